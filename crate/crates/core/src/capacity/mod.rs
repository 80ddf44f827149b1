//! Memory-capacity laboratory: registries of printed memories, fidelity
//! matrices, greedy capacity estimates, forgetting curves and association
//! graphs.
//!
//! Two memories are *distinguishable* when their overlap is below `ε`. Recall
//! strength is modelled as the fidelity between a re-presented code and each
//! stored memory; this is a convention of this crate and is labelled as such
//! in every output that uses it.

pub mod config;
pub mod output;
pub mod registry;

use std::sync::Arc;

use petgraph::unionfind::UnionFind;
use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::su11::{
    forgetting_time, ln_cosh, log_overlap, neumaier_sum, Code, MemoryState, ModeList,
};
use crate::thermo::check_grid;

pub use registry::{CodeSource, Entry, Registry, SCHEMA_VERSION};

pub const DEFAULT_EPSILON: f64 = 0.05;

/// Label written next to any fidelity used as a recall score.
pub const RECALL_CONVENTION: &str = "recall strength = state fidelity with the re-presented code";

/// Which clock each memory is evaluated on.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Clock {
    /// Every memory evolved for the same time `t`; the matrix does not depend on `t`.
    #[default]
    Common,
    /// Memory `i` evolved for `t − printed_at_i`.
    Staggered,
}

fn state_for(registry: &Registry, entry: &Entry, t: f64, clock: Clock) -> Result<MemoryState> {
    match clock {
        Clock::Common => registry.state_at(entry, t),
        Clock::Staggered => registry.state_since_printing(entry, t),
    }
}

pub fn check_epsilon(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("threshold must lie in (0, 1), got {eps}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FidelityMatrix {
    pub ids: Vec<String>,
    pub time: f64,
    pub clock: Clock,
    /// `ln` of the overlaps; kept alongside `values` since those underflow for large `K`.
    pub log_values: Vec<Vec<f64>>,
    pub values: Vec<Vec<f64>>,
}

impl FidelityMatrix {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn max_off_diagonal(&self) -> Option<f64> {
        let n = self.len();
        (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| self.values[i][j])
            .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))))
    }
}

/// Pairwise overlaps of all registry entries at time `t`.
pub fn fidelity_matrix(registry: &Registry, t: f64, clock: Clock, exec: Execution) -> Result<FidelityMatrix> {
    if registry.is_empty() {
        return Err(Error::domain("registry has no memories"));
    }
    let states: Vec<MemoryState> = registry
        .entries()
        .iter()
        .map(|e| state_for(registry, e, t, clock))
        .collect::<Result<_>>()?;
    let n = states.len();
    // upper triangle row by row, mirrored afterwards so the matrix is exactly symmetric
    let upper: Vec<Vec<f64>> = exec::map_range(exec, n, |i| {
        (i + 1..n)
            .map(|j| log_overlap(&states[i], &states[j]).expect("shared mode list"))
            .collect()
    });
    let mut log_values = vec![vec![0.0; n]; n];
    for i in 0..n {
        for (off, &v) in upper[i].iter().enumerate() {
            let j = i + 1 + off;
            log_values[i][j] = v;
            log_values[j][i] = v;
        }
    }
    let values = log_values
        .iter()
        .map(|row| row.iter().map(|v| v.exp()).collect())
        .collect();
    Ok(FidelityMatrix {
        ids: registry.ids(),
        time: t,
        clock,
        log_values,
        values,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RecallScore {
    pub id: String,
    pub log_fidelity: f64,
    pub fidelity: f64,
}

/// Scores every memory against a freshly printed probe code, best first
/// (ties keep registry order).
pub fn recall(registry: &Registry, probe: &Code, t: f64, clock: Clock, exec: Execution) -> Result<Vec<RecallScore>> {
    let probe = MemoryState::new(registry.modes().clone(), probe.clone())?;
    let scores = exec::map_slice(exec, registry.entries(), |e| {
        let s = state_for(registry, e, t, clock)?;
        let l = log_overlap(&probe, &s)?;
        Ok(RecallScore {
            id: e.id.clone(),
            log_fidelity: l,
            fidelity: l.exp(),
        })
    });
    let mut scores: Vec<RecallScore> = scores.into_iter().collect::<Result<_>>()?;
    scores.sort_by(|a, b| b.log_fidelity.total_cmp(&a.log_fidelity));
    Ok(scores)
}

/// Uniform sampling range for code parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ThetaRange {
    pub lo: f64,
    pub hi: f64,
}

impl ThetaRange {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && hi >= lo) {
            return Err(Error::domain(format!(
                "code range must satisfy 0 <= lo <= hi (got [{lo}, {hi}])"
            )));
        }
        Ok(ThetaRange { lo, hi })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Candidate code number `index` for a given seed.
///
/// Each candidate has its own ChaCha stream and draws its modes in order, so
/// the code for `K` modes is a prefix of the code for any larger `K`.
pub fn sample_code(seed: u64, index: u64, k: usize, range: ThetaRange) -> Code {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let dist = Uniform::new_inclusive(range.lo, range.hi);
    Code::new((0..k).map(|_| dist.sample(&mut rng)).collect()).expect("range is non-negative")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Packing {
    /// Indices of accepted candidates, in acceptance order.
    pub accepted: Vec<usize>,
    /// `curve[i]` = number accepted after considering candidates `0..=i`.
    pub curve: Vec<usize>,
}

/// Greedy packing: candidate `i` is kept iff its overlap with every kept
/// candidate is below `epsilon`. All candidates are compared at a common time.
pub fn greedy_pack(candidates: &[MemoryState], epsilon: f64, exec: Execution) -> Result<Packing> {
    check_epsilon(epsilon)?;
    let ln_eps = epsilon.ln();
    let mut accepted: Vec<usize> = Vec::new();
    let mut curve = Vec::with_capacity(candidates.len());
    for (i, c) in candidates.iter().enumerate() {
        let ok = exec::all(exec, &accepted, |&j| {
            log_overlap(c, &candidates[j]).map_or(false, |l| l < ln_eps)
        });
        if ok {
            accepted.push(i);
        }
        curve.push(accepted.len());
    }
    Ok(Packing { accepted, curve })
}

/// Distribution of the log overlap between two independent uniform codes.
///
/// Per mode the gap `δ = θ − θ'` is triangular on `[−w, w]`; the log overlap
/// is a sum of `K` independent `−ln cosh δ` terms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OverlapSummary {
    pub per_mode_mean: f64,
    pub per_mode_std: f64,
    pub log_overlap_mean: f64,
    pub log_overlap_std: f64,
    /// `(ln ε − mean)/std`; large positive values mean most pairs are distinguishable.
    pub epsilon_z: f64,
}

/// `E[ln cosh δ]` and `E[ln² cosh δ]` for `δ` triangular on `[−w, w]`, by composite Simpson.
fn triangular_ln_cosh_moments(w: f64) -> (f64, f64) {
    if w == 0.0 {
        return (0.0, 0.0);
    }
    const N: usize = 4096;
    let h = w / N as f64;
    let (mut m1, mut m2) = (0.0, 0.0);
    for i in 0..=N {
        let d = i as f64 * h;
        let weight = if i == 0 || i == N {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let density = 2.0 * (w - d) / (w * w);
        let f = ln_cosh(d);
        m1 += weight * density * f;
        m2 += weight * density * f * f;
    }
    (m1 * h / 3.0, m2 * h / 3.0)
}

pub fn overlap_summary(k: usize, range: ThetaRange, epsilon: f64) -> OverlapSummary {
    let (m1, m2) = triangular_ln_cosh_moments(range.width());
    let var = (m2 - m1 * m1).max(0.0);
    let mean = -(k as f64) * m1;
    let std = (k as f64 * var).sqrt();
    OverlapSummary {
        per_mode_mean: -m1,
        per_mode_std: var.sqrt(),
        log_overlap_mean: mean,
        log_overlap_std: std,
        epsilon_z: if std > 0.0 { (epsilon.ln() - mean) / std } else { f64::NAN },
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CapacityReport {
    pub mode_count: usize,
    pub candidate_count: usize,
    pub epsilon: f64,
    pub range: ThetaRange,
    pub seed: u64,
    pub accepted: usize,
    pub packing: Packing,
    pub theory: OverlapSummary,
}

/// Greedy capacity of the mode list at threshold `epsilon`.
pub fn capacity_estimate(
    modes: &Arc<ModeList>,
    range: ThetaRange,
    epsilon: f64,
    candidate_count: usize,
    seed: u64,
    exec: Execution,
) -> Result<CapacityReport> {
    check_epsilon(epsilon)?;
    if candidate_count == 0 {
        return Err(Error::domain("candidate_count must be >= 1"));
    }
    let k = modes.len();
    let candidates: Vec<MemoryState> = exec::map_range(exec, candidate_count, |i| {
        MemoryState::new(modes.clone(), sample_code(seed, i as u64, k, range))
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let packing = greedy_pack(&candidates, epsilon, exec)?;
    Ok(CapacityReport {
        mode_count: k,
        candidate_count,
        epsilon,
        range,
        seed,
        accepted: packing.accepted.len(),
        packing,
        theory: overlap_summary(k, range, epsilon),
    })
}

/// [`capacity_estimate`] on the first `K` modes for each `K` in `mode_counts`.
pub fn capacity_sweep(
    modes: &ModeList,
    mode_counts: &[usize],
    range: ThetaRange,
    epsilon: f64,
    candidate_count: usize,
    seed: u64,
    exec: Execution,
) -> Result<Vec<CapacityReport>> {
    mode_counts
        .iter()
        .map(|&k| {
            let sub = Arc::new(modes.truncated(k)?);
            capacity_estimate(&sub, range, epsilon, candidate_count, seed, exec)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ForgettingPoint {
    pub time: f64,
    pub log_self_overlap: f64,
    pub self_overlap: f64,
    pub log_vacuum_overlap: f64,
    pub vacuum_overlap: f64,
    pub total_occupation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ForgettingCurve {
    /// `None` when no mode is damped.
    pub tau: Option<f64>,
    pub points: Vec<ForgettingPoint>,
}

/// Overlap with the printed state, overlap with the empty vacuum and total
/// occupation along `grid`.
pub fn forgetting_curve(modes: &Arc<ModeList>, code: &Code, grid: &[f64], exec: Execution) -> Result<ForgettingCurve> {
    check_grid(grid)?;
    let origin = MemoryState::new(modes.clone(), code.clone())?;
    let vacuum = MemoryState::vacuum(modes.clone());
    let points = exec::map_slice(exec, grid, |&t| {
        let s = origin.with_time(t)?;
        let ls = log_overlap(&s, &origin)?;
        let lv = log_overlap(&s, &vacuum)?;
        Ok(ForgettingPoint {
            time: t,
            log_self_overlap: ls,
            self_overlap: ls.exp(),
            log_vacuum_overlap: lv,
            vacuum_overlap: lv.exp(),
            total_occupation: s.total_occupation(),
        })
    });
    Ok(ForgettingCurve {
        tau: forgetting_time(modes, code).finite(),
        points: points.into_iter().collect::<Result<_>>()?,
    })
}

/// Least-squares slope of `ln⟨0(t)|0(0)⟩` over `n` evenly spaced times in `[t0, t1]`.
pub fn decay_slope(modes: &Arc<ModeList>, code: &Code, t0: f64, t1: f64, n: usize) -> Result<f64> {
    if !(n >= 2 && t1 > t0) {
        return Err(Error::domain("decay fit needs n >= 2 and t1 > t0"));
    }
    let grid: Vec<f64> = (0..n).map(|i| t0 + (t1 - t0) * i as f64 / (n - 1) as f64).collect();
    let curve = forgetting_curve(modes, code, &grid, Execution::Sequential)?;
    let ys: Vec<f64> = curve.points.iter().map(|p| p.log_self_overlap).collect();
    let tm = neumaier_sum(grid.iter().copied()) / n as f64;
    let ym = neumaier_sum(ys.iter().copied()) / n as f64;
    let sxy = neumaier_sum(grid.iter().zip(&ys).map(|(t, y)| (t - tm) * (y - ym)));
    let sxx = neumaier_sum(grid.iter().map(|t| (t - tm) * (t - tm)));
    Ok(sxy / sxx)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub fidelity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AssociationGraph {
    pub ids: Vec<String>,
    pub threshold: f64,
    pub edges: Vec<Edge>,
    /// Connected components, each sorted, ordered by smallest member.
    pub clusters: Vec<Vec<usize>>,
}

/// Edges between memories whose fidelity is at least `threshold`.
pub fn association_graph(fm: &FidelityMatrix, threshold: f64) -> Result<AssociationGraph> {
    check_epsilon(threshold)?;
    let n = fm.len();
    let mut uf = UnionFind::<usize>::new(n);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let f = fm.values[i][j];
            if f >= threshold {
                edges.push(Edge { a: i, b: j, fidelity: f });
                uf.union(i, j);
            }
        }
    }
    let labels = uf.into_labeling();
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let root = labels[i];
        if slot[root] == usize::MAX {
            slot[root] = clusters.len();
            clusters.push(Vec::new());
        }
        clusters[slot[root]].push(i);
    }
    Ok(AssociationGraph {
        ids: fm.ids.clone(),
        threshold,
        edges,
        clusters,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn modes(k: usize) -> Arc<ModeList> {
        Arc::new(ModeList::uniform(k, 1.0, 0.5).unwrap())
    }

    fn registry(codes: &[Vec<f64>]) -> Registry {
        let mut r = Registry::new(modes(codes[0].len()));
        for (i, c) in codes.iter().enumerate() {
            r = r.print(&format!("m{i}"), &CodeSource::Thetas(c.clone()), 0.0).unwrap();
        }
        r
    }

    #[test]
    fn fidelity_matrix_shape_and_invariance() {
        let r = registry(&[vec![0.1, 0.5], vec![0.9, 0.2], vec![0.1, 0.5]]);
        let a = fidelity_matrix(&r, 0.0, Clock::Common, Execution::Sequential).unwrap();
        let b = fidelity_matrix(&r, 7.25, Clock::Common, Execution::Parallel).unwrap();
        assert_eq!(a.values, b.values);
        for i in 0..3 {
            assert_eq!(a.values[i][i], 1.0);
            for j in 0..3 {
                assert_eq!(a.values[i][j], a.values[j][i]);
                assert!(a.values[i][j] > 0.0 && a.values[i][j] <= 1.0);
            }
        }
        assert_eq!(a.values[0][2], 1.0);
    }

    #[test]
    fn gap_arccosh_two_gives_half() {
        let g = 2f64.acosh();
        let r = registry(&[vec![0.0], vec![g]]);
        let fm = fidelity_matrix(&r, 0.0, Clock::Common, Execution::Sequential).unwrap();
        assert!((fm.values[0][1] - 0.5).abs() < 1e-15);
        let r2 = registry(&[vec![0.0, 0.0], vec![g, g]]);
        let fm2 = fidelity_matrix(&r2, 0.0, Clock::Common, Execution::Sequential).unwrap();
        assert!((fm2.values[0][1] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn staggered_clock_depends_on_time() {
        let m = modes(1);
        let r = Registry::new(m)
            .print("a", &CodeSource::Thetas(vec![0.5]), 0.0)
            .unwrap()
            .print("b", &CodeSource::Thetas(vec![0.5]), 2.0)
            .unwrap();
        let fm = fidelity_matrix(&r, 2.0, Clock::Staggered, Execution::Sequential).unwrap();
        assert!((fm.values[0][1] - 1.0 / 1f64.cosh()).abs() < 1e-15);
        assert!(fidelity_matrix(&r, 1.0, Clock::Staggered, Execution::Sequential).is_err());
    }

    #[test]
    fn sampled_codes_extend_as_prefixes() {
        let range = ThetaRange::new(0.0, 2.0).unwrap();
        let short = sample_code(7, 3, 4, range);
        let long = sample_code(7, 3, 9, range);
        assert_eq!(short.thetas(), &long.thetas()[..4]);
        assert_ne!(sample_code(7, 4, 4, range), short);
        assert!(ThetaRange::new(1.0, 0.5).is_err());
    }

    #[test]
    fn packing_on_gap_grid() {
        // overlaps along the grid are 1/2, 1/7, 1/26, ...: at ε = 0.05 every third point fits
        let g = 2f64.acosh();
        let m = modes(1);
        let states: Vec<MemoryState> = (0..10)
            .map(|i| MemoryState::new(m.clone(), Code::new(vec![g * i as f64]).unwrap()).unwrap())
            .collect();
        let p = greedy_pack(&states, 0.05, Execution::Sequential).unwrap();
        assert_eq!(p.accepted, vec![0, 3, 6, 9]);
        let p = greedy_pack(&states, 0.6, Execution::Parallel).unwrap();
        assert_eq!(p.accepted.len(), 10);
    }

    #[test]
    fn epsilon_near_one_accepts_distinct_candidates() {
        let r = capacity_estimate(&modes(3), ThetaRange::new(0.0, 1.0).unwrap(), 0.999999999, 50, 1, Execution::Sequential)
            .unwrap();
        assert_eq!(r.accepted, 50);
        assert_eq!(r.packing.curve.last(), Some(&50));
    }

    #[test]
    fn overlap_summary_matches_monte_carlo() {
        let range = ThetaRange::new(0.0, 2.0).unwrap();
        let s = overlap_summary(1, range, 0.05);
        let n = 200_000;
        let mut acc = 0.0;
        for i in 0..n {
            let a = sample_code(11, 2 * i, 1, range).thetas()[0];
            let b = sample_code(11, 2 * i + 1, 1, range).thetas()[0];
            acc += ln_cosh(a - b);
        }
        assert!((s.per_mode_mean + acc / n as f64).abs() < 5e-3);
    }

    #[test]
    fn forgetting_curve_peaks_at_tau() {
        let m = Arc::new(ModeList::uniform(1, 1.0, 0.5).unwrap());
        let code = Code::new(vec![1.0]).unwrap();
        let grid: Vec<f64> = (0..=40).map(|i| 0.1 * i as f64).collect();
        let c = forgetting_curve(&m, &code, &grid, Execution::Parallel).unwrap();
        assert_eq!(c.tau, Some(2.0));
        let best = c.points.iter().max_by(|a, b| a.vacuum_overlap.total_cmp(&b.vacuum_overlap)).unwrap();
        assert!((best.time - 2.0).abs() < 1e-12);
        assert!((best.vacuum_overlap - 1.0).abs() < 1e-12);
        assert!((c.points[0].total_occupation - 1f64.sinh().powi(2)).abs() < 1e-15);
    }

    #[test]
    fn association_clusters() {
        let r = registry(&[vec![0.1], vec![0.1], vec![3.0], vec![0.15]]);
        let fm = fidelity_matrix(&r, 0.0, Clock::Common, Execution::Sequential).unwrap();
        let g = association_graph(&fm, 0.9).unwrap();
        assert_eq!(g.clusters, vec![vec![0, 1, 3], vec![2]]);
        assert!(g.edges.iter().any(|e| (e.a, e.b, e.fidelity) == (0, 1, 1.0)));
        let none = association_graph(&fm, 0.999999).unwrap();
        assert_eq!(none.edges.len(), 1);
    }

    #[test]
    fn recall_ranks_exact_match_first() {
        let r = registry(&[vec![0.2, 0.9], vec![1.1, 0.3]]);
        let s = recall(&r, &Code::new(vec![1.1, 0.3]).unwrap(), 0.0, Clock::Common, Execution::Sequential).unwrap();
        assert_eq!(s[0].id, "m1");
        assert_eq!(s[0].fidelity, 1.0);
    }
}
