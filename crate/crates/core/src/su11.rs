//! Closed-form engine for code-indexed memory vacua.
//!
//! Every mode pair of a memory state is an SU(1,1) coherent state in the
//! `j = 0` sector, fully described by the effective squeeze parameter
//! `Θ_κ(t) = Γ_κ t − θ_κ`. Occupations, overlaps, quadrature variances and the
//! SU(1,1) labels are all elementary functions of `Θ`, so nothing here
//! integrates anything: evolution just moves the clock.
//!
//! Units: `ħ = k_B = 1`, mode energy `E_κ = Ω_κ`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical constants of one mode pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeParams {
    pub index: usize,
    /// Frequency, equal to the mode energy with `ħ = 1`.
    pub omega: f64,
    /// Damping rate.
    pub gamma: f64,
}

impl ModeParams {
    pub fn energy(&self) -> f64 {
        self.omega
    }
}

/// Validated list of modes: indices `0..K` in order, `Ω > 0`, `Γ ≥ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeList(Vec<ModeParams>);

impl ModeList {
    pub fn from_params(params: Vec<ModeParams>) -> Result<Self> {
        if params.is_empty() {
            return Err(Error::domain("mode list must contain at least one mode"));
        }
        for (i, p) in params.iter().enumerate() {
            if p.index != i {
                return Err(Error::domain(format!(
                    "mode indices must be contiguous from 0: position {i} has index {}",
                    p.index
                )));
            }
            if !(p.omega.is_finite() && p.omega > 0.0) {
                return Err(Error::domain(format!("mode {i}: omega must be > 0, got {}", p.omega)));
            }
            if !(p.gamma.is_finite() && p.gamma >= 0.0) {
                return Err(Error::domain(format!("mode {i}: gamma must be >= 0, got {}", p.gamma)));
            }
        }
        Ok(ModeList(params))
    }

    /// Builds modes from parallel frequency and damping lists.
    pub fn new(omegas: &[f64], gammas: &[f64]) -> Result<Self> {
        if omegas.len() != gammas.len() {
            return Err(Error::domain(format!(
                "{} frequencies but {} damping rates",
                omegas.len(),
                gammas.len()
            )));
        }
        Self::from_params(
            omegas
                .iter()
                .zip(gammas)
                .enumerate()
                .map(|(index, (&omega, &gamma))| ModeParams { index, omega, gamma })
                .collect(),
        )
    }

    pub fn uniform(count: usize, omega: f64, gamma: f64) -> Result<Self> {
        Self::new(&vec![omega; count], &vec![gamma; count])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn params(&self) -> &[ModeParams] {
        &self.0
    }

    pub fn get(&self, kappa: usize) -> Result<&ModeParams> {
        self.0.get(kappa).ok_or(Error::ModeIndex {
            index: kappa,
            len: self.0.len(),
        })
    }

    pub fn total_gamma(&self) -> f64 {
        self.0.iter().map(|p| p.gamma).sum()
    }

    /// Keeps the first `k` modes.
    pub fn truncated(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.len() {
            return Err(Error::domain(format!("cannot keep {k} of {} modes", self.len())));
        }
        Ok(ModeList(self.0[..k].to_vec()))
    }
}

/// A memory code: one squeeze parameter `θ_κ ≥ 0` per mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Code(Vec<f64>);

impl Code {
    pub fn new(thetas: Vec<f64>) -> Result<Self> {
        if let Some((i, t)) = thetas
            .iter()
            .enumerate()
            .find(|(_, t)| !(t.is_finite() && **t >= 0.0))
        {
            return Err(Error::domain(format!("code entry {i} must be finite and >= 0, got {t}")));
        }
        Ok(Code(thetas))
    }

    /// The empty code (all condensates zero).
    pub fn empty(len: usize) -> Self {
        Code(vec![0.0; len])
    }

    /// Code from condensate counts `𝒩_κ = sinh²θ_κ`.
    pub fn from_condensates(counts: &[f64]) -> Result<Self> {
        if let Some(n) = counts.iter().find(|n| !(n.is_finite() && **n >= 0.0)) {
            return Err(Error::domain(format!("condensate counts must be >= 0, got {n}")));
        }
        Ok(Code(counts.iter().map(|n| n.sqrt().asinh()).collect()))
    }

    /// Code whose modes all follow the Bose distribution at inverse temperature `beta`.
    pub fn from_beta(modes: &ModeList, beta: f64) -> Result<Self> {
        modes
            .params()
            .iter()
            .map(|p| theta_from_beta(beta, p.energy()))
            .collect::<Result<Vec<_>>>()
            .map(Code)
    }

    pub fn thetas(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn condensates(&self) -> Vec<f64> {
        self.0.iter().map(|t| t.sinh().powi(2)).collect()
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{t}")?;
        }
        write!(f, "]")
    }
}

/// SU(1,1) labels of one mode pair: Casimir label `j` and `m = ½(𝒩_A + 𝒩_Ã)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuantumNumbers {
    pub j: f64,
    pub m: f64,
}

/// Quadrature variances of the `a` and `ã` oscillators.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Variances {
    pub dx2: f64,
    pub dy2: f64,
    pub dxt2: f64,
    pub dyt2: f64,
}

/// Time after which every decaying mode has returned to the empty vacuum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ForgettingTime {
    At(f64),
    /// No mode is damped; the code is never washed out.
    Never,
}

impl ForgettingTime {
    pub fn finite(self) -> Option<f64> {
        match self {
            ForgettingTime::At(t) => Some(t),
            ForgettingTime::Never => None,
        }
    }
}

/// A memory vacuum with code `θ` observed at time `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct MemoryState {
    modes: Arc<ModeList>,
    code: Code,
    time: f64,
}

impl MemoryState {
    /// Freshly printed state at `t = 0`.
    pub fn new(modes: Arc<ModeList>, code: Code) -> Result<Self> {
        Self::at_time(modes, code, 0.0)
    }

    pub fn at_time(modes: Arc<ModeList>, code: Code, time: f64) -> Result<Self> {
        if code.len() != modes.len() {
            return Err(Error::CodeLength {
                expected: modes.len(),
                found: code.len(),
            });
        }
        if !(time.is_finite() && time >= 0.0) {
            return Err(Error::domain(format!("time must be finite and >= 0, got {time}")));
        }
        Ok(MemoryState { modes, code, time })
    }

    /// The empty vacuum `|0⟩₀` at `t = 0`.
    pub fn vacuum(modes: Arc<ModeList>) -> Self {
        let code = Code::empty(modes.len());
        MemoryState {
            modes,
            code,
            time: 0.0,
        }
    }

    pub fn modes(&self) -> &Arc<ModeList> {
        &self.modes
    }

    pub fn code(&self) -> &Code {
        &self.code
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    fn check(&self, kappa: usize) -> Result<()> {
        if kappa < self.len() {
            Ok(())
        } else {
            Err(Error::ModeIndex {
                index: kappa,
                len: self.len(),
            })
        }
    }

    fn theta_unchecked(&self, kappa: usize) -> f64 {
        self.modes.params()[kappa].gamma * self.time - self.code.thetas()[kappa]
    }

    /// `Θ_κ(t) = Γ_κ t − θ_κ`.
    pub fn effective_theta(&self, kappa: usize) -> Result<f64> {
        self.check(kappa)?;
        Ok(self.theta_unchecked(kappa))
    }

    pub fn effective_thetas(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.theta_unchecked(k)).collect()
    }

    /// Number of `A_κ` quanta, `sinh²Θ_κ(t)`.
    pub fn occupation(&self, kappa: usize) -> Result<f64> {
        Ok(self.effective_theta(kappa)?.sinh().powi(2))
    }

    pub fn total_occupation(&self) -> f64 {
        (0..self.len())
            .map(|k| self.theta_unchecked(k).sinh().powi(2))
            .sum()
    }

    /// Internal energy of the `A` subsystem, `Σ E_κ sinh²Θ_κ`.
    pub fn energy(&self) -> f64 {
        self.modes
            .params()
            .iter()
            .enumerate()
            .map(|(k, p)| p.energy() * self.theta_unchecked(k).sinh().powi(2))
            .sum()
    }

    /// Moves the clock forward by `dt`; the code and modes are untouched.
    pub fn evolve(&self, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt >= 0.0) {
            return Err(Error::domain(format!(
                "evolution step must be finite and >= 0, got {dt} (reverse evolution is not supported)"
            )));
        }
        Ok(MemoryState {
            modes: Arc::clone(&self.modes),
            code: self.code.clone(),
            time: self.time + dt,
        })
    }

    /// Same code observed at absolute time `t`.
    pub fn with_time(&self, t: f64) -> Result<Self> {
        Self::at_time(Arc::clone(&self.modes), self.code.clone(), t)
    }

    /// Re-prints `code`: the clock restarts at zero.
    pub fn refresh(&self, code: Code) -> Result<Self> {
        Self::new(Arc::clone(&self.modes), code)
    }

    pub fn forgetting_time(&self) -> ForgettingTime {
        forgetting_time(&self.modes, &self.code)
    }

    pub fn variances(&self, kappa: usize) -> Result<Variances> {
        let theta = self.effective_theta(kappa)?;
        let shrink = 0.25 * (-2.0 * theta).exp();
        let grow = 0.25 * (2.0 * theta).exp();
        Ok(Variances {
            dx2: shrink,
            dy2: grow,
            dxt2: grow,
            dyt2: shrink,
        })
    }

    pub fn quantum_numbers(&self, kappa: usize) -> Result<QuantumNumbers> {
        Ok(QuantumNumbers {
            // equal A and Ã occupation is conserved by the κ-diagonal dynamics
            j: 0.0,
            m: self.occupation(kappa)?,
        })
    }
}

/// `θ` whose condensate `sinh²θ` equals the Bose factor `1/(e^{βE} − 1)`.
pub fn theta_from_beta(beta: f64, energy: f64) -> Result<f64> {
    if !(beta > 0.0 && energy > 0.0) || beta.is_nan() || energy.is_nan() {
        return Err(Error::domain(format!(
            "inverse temperature and energy must be > 0 (beta = {beta}, energy = {energy})"
        )));
    }
    Ok(bose_occupation(beta * energy).sqrt().asinh())
}

/// Bose factor `1/(e^x − 1)` for `x = βE > 0`.
pub fn bose_occupation(beta_energy: f64) -> f64 {
    1.0 / beta_energy.exp_m1()
}

/// `ln cosh x` without overflow: `|x| + ln(1 + e^{−2|x|}) − ln 2`.
pub fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// `ln|tanh x|` for `x ≠ 0`, accurate for large `|x|`.
pub(crate) fn ln_abs_tanh(x: f64) -> f64 {
    let a = x.abs();
    let e = (-2.0 * a).exp();
    // 1 − e cancels for small |x|; expm1 keeps it exact there
    let lo = if a < 0.5 { (-(-2.0 * a).exp_m1()).ln() } else { (-e).ln_1p() };
    lo - e.ln_1p()
}

/// Compensated (Neumaier) sum.
pub(crate) fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

fn same_modes(a: &MemoryState, b: &MemoryState) -> bool {
    Arc::ptr_eq(&a.modes, &b.modes) || a.modes == b.modes
}

/// `ln⟨a|b⟩ = −Σ_κ ln cosh(Θ_κ^a − Θ_κ^b)`.
pub fn log_overlap(a: &MemoryState, b: &MemoryState) -> Result<f64> {
    if !same_modes(a, b) {
        return Err(Error::ModeMismatch);
    }
    let dt = a.time - b.time;
    let (ta, tb) = (a.code.thetas(), b.code.thetas());
    // Θ^a − Θ^b grouped so that equal clocks cancel exactly
    Ok(-neumaier_sum(
        a.modes
            .params()
            .iter()
            .enumerate()
            .map(|(k, p)| ln_cosh(p.gamma * dt - (ta[k] - tb[k]))),
    ))
}

/// `⟨a|b⟩ ∈ (0, 1]`; underflows to 0 for very distant states.
pub fn overlap(a: &MemoryState, b: &MemoryState) -> Result<f64> {
    log_overlap(a, b).map(f64::exp)
}

/// `τ = max θ_κ/Γ_κ` over damped modes.
pub fn forgetting_time(modes: &ModeList, code: &Code) -> ForgettingTime {
    modes
        .params()
        .iter()
        .zip(code.thetas())
        .filter(|(p, _)| p.gamma > 0.0)
        .map(|(p, theta)| theta / p.gamma)
        .fold(None, |acc: Option<f64>, t| Some(acc.map_or(t, |m| m.max(t))))
        .map_or(ForgettingTime::Never, ForgettingTime::At)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn single(theta: f64, gamma: f64, t: f64) -> MemoryState {
        let modes = Arc::new(ModeList::uniform(1, 1.0, gamma).unwrap());
        MemoryState::at_time(modes, Code::new(vec![theta]).unwrap(), t).unwrap()
    }

    #[test]
    fn theta_from_beta_values() {
        assert_relative_eq!(theta_from_beta(2f64.ln(), 1.0).unwrap(), 1f64.asinh(), epsilon = 1e-15);
        assert_relative_eq!(theta_from_beta(1.0, 1.5f64.ln()).unwrap(), 1.146216, epsilon = 1e-6);
        assert_relative_eq!(theta_from_beta(1.0, 2f64.ln()).unwrap(), 0.881374, epsilon = 1e-6);
        assert_eq!(theta_from_beta(1e4, 1.0).unwrap(), 0.0);
        assert!(theta_from_beta(0.0, 1.0).is_err());
        assert!(theta_from_beta(1.0, -1.0).is_err());
        assert!(theta_from_beta(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn theta_from_beta_round_trips_through_occupation() {
        for be in [0.01, 0.3, 1.0, 2.5, 10.0] {
            let s = single(theta_from_beta(be, 1.0).unwrap(), 1.0, 0.0);
            assert_relative_eq!(s.occupation(0).unwrap(), bose_occupation(be), max_relative = 1e-12);
        }
    }

    #[test]
    fn effective_theta_examples() {
        assert_eq!(single(1.3, 0.5, 0.0).effective_theta(0).unwrap(), -1.3);
        assert_eq!(single(1.0, 0.5, 2.0).effective_theta(0).unwrap(), 0.0);
        assert_eq!(single(1.0, 0.5, 4.0).effective_theta(0).unwrap(), 1.0);
        assert!(matches!(
            single(1.0, 0.5, 4.0).effective_theta(1),
            Err(Error::ModeIndex { index: 1, len: 1 })
        ));
    }

    #[test]
    fn occupation_examples() {
        assert_eq!(single(0.0, 0.0, 7.0).occupation(0).unwrap(), 0.0);
        assert_relative_eq!(single(1f64.asinh(), 1.0, 0.0).occupation(0).unwrap(), 1.0, epsilon = 1e-14);
        assert_relative_eq!(single(1.0, 1.0, 2.0).occupation(0).unwrap(), 1.381098, epsilon = 1e-6);
        assert_eq!(single(0.7, 0.35, 2.0).occupation(0).unwrap(), 0.0);
    }

    #[test]
    fn evolve_rejects_negative_steps_and_composes() {
        let s = single(0.9, 0.4, 0.0);
        assert_eq!(s.evolve(0.0).unwrap(), s);
        assert!(matches!(s.evolve(-1e-9), Err(Error::Domain(_))));
        let two = s.evolve(0.5).unwrap().evolve(1.25).unwrap();
        assert_eq!(two, s.evolve(1.75).unwrap());
        assert_eq!(two.code(), s.code());
    }

    #[test]
    fn overlap_examples() {
        let gap = 2f64.acosh();
        let a = single(gap, 1.0, 0.0);
        let b = single(0.0, 1.0, 0.0);
        assert_relative_eq!(log_overlap(&a, &b).unwrap(), -(2f64.ln()), epsilon = 1e-15);
        assert_relative_eq!(overlap(&a, &b).unwrap(), 0.5, epsilon = 1e-15);
        assert_eq!(log_overlap(&a, &a).unwrap(), 0.0);
        assert_eq!(overlap(&a, &a).unwrap(), 1.0);
    }

    #[test]
    fn overlap_requires_same_modes() {
        let a = single(0.5, 1.0, 0.0);
        let b = single(0.5, 2.0, 0.0);
        assert!(matches!(log_overlap(&a, &b), Err(Error::ModeMismatch)));
        // equal content behind different allocations is fine
        let c = single(0.1, 1.0, 0.0);
        assert!(log_overlap(&a, &c).is_ok());
    }

    #[test]
    fn overlap_product_law() {
        let delta = 0.7;
        for k in [1usize, 2, 5, 40] {
            let modes = Arc::new(ModeList::uniform(k, 1.0, 0.3).unwrap());
            let a = MemoryState::new(modes.clone(), Code::new(vec![delta; k]).unwrap()).unwrap();
            let b = MemoryState::vacuum(modes);
            assert_relative_eq!(
                overlap(&a, &b).unwrap(),
                delta.cosh().powi(-(k as i32)),
                max_relative = 1e-13
            );
        }
    }

    #[test]
    fn large_mode_counts_stay_finite_in_log_domain() {
        let k = 5000;
        let modes = Arc::new(ModeList::uniform(k, 1.0, 0.3).unwrap());
        let a = MemoryState::new(modes.clone(), Code::new(vec![2.0; k]).unwrap()).unwrap();
        let b = MemoryState::vacuum(modes);
        let lo = log_overlap(&a, &b).unwrap();
        assert!(lo.is_finite() && lo < -5000.0);
        assert_eq!(overlap(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn ln_cosh_matches_naive_where_safe() {
        for x in [-20.0, -3.0, -0.1, 0.0, 1e-8, 0.5, 4.0, 30.0] {
            assert_relative_eq!(ln_cosh(x), f64::cosh(x).ln(), epsilon = 1e-14, max_relative = 1e-14);
        }
        assert_relative_eq!(ln_cosh(1000.0), 1000.0 - std::f64::consts::LN_2);
    }

    #[test]
    fn forgetting_time_examples() {
        let modes = Arc::new(ModeList::new(&[1.0, 1.0], &[1.0, 1.0]).unwrap());
        let s = MemoryState::new(modes, Code::new(vec![1.0, 2.0]).unwrap()).unwrap();
        assert_eq!(s.forgetting_time(), ForgettingTime::At(2.0));

        let modes = Arc::new(ModeList::new(&[1.0, 1.0], &[0.5, 4.0]).unwrap());
        let s = MemoryState::new(modes, Code::new(vec![1.0, 2.0]).unwrap()).unwrap();
        assert_eq!(s.forgetting_time(), ForgettingTime::At(2.0));

        let modes = Arc::new(ModeList::new(&[1.0, 1.0], &[0.0, 0.0]).unwrap());
        let s = MemoryState::new(modes, Code::new(vec![1.0, 2.0]).unwrap()).unwrap();
        assert_eq!(s.forgetting_time(), ForgettingTime::Never);

        // undamped modes are ignored
        let modes = Arc::new(ModeList::new(&[1.0, 1.0], &[0.0, 2.0]).unwrap());
        let s = MemoryState::new(modes, Code::new(vec![5.0, 1.0]).unwrap()).unwrap();
        assert_eq!(s.forgetting_time(), ForgettingTime::At(0.5));
    }

    #[test]
    fn forgotten_state_is_the_empty_vacuum() {
        let s = single(1.1, 0.4, 0.0);
        let tau = s.forgetting_time().finite().unwrap();
        let at_tau = s.with_time(tau).unwrap();
        let vac = MemoryState::vacuum(s.modes().clone());
        assert_relative_eq!(overlap(&at_tau, &vac).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn refresh_restores_code() {
        let s = single(0.8, 0.5, 0.0);
        assert_eq!(s.refresh(s.code().clone()).unwrap(), s);
        let old = s.evolve(3.0).unwrap();
        let c = Code::new(vec![1.7]).unwrap();
        let r = old.refresh(c.clone()).unwrap();
        assert_eq!(r.time(), 0.0);
        assert_relative_eq!(r.occupation(0).unwrap(), 1.7f64.sinh().powi(2));
        assert_eq!(r.forgetting_time(), ForgettingTime::At(1.7 / 0.5));
        assert!(matches!(
            old.refresh(Code::new(vec![1.0, 2.0]).unwrap()),
            Err(Error::CodeLength { expected: 1, found: 2 })
        ));
    }

    #[test]
    fn variance_examples() {
        let v = single(0.6, 0.3, 2.0).variances(0).unwrap();
        for x in [v.dx2, v.dy2, v.dxt2, v.dyt2] {
            assert_relative_eq!(x, 0.25, epsilon = 1e-15);
        }
        let v = single(0.5, 1.0, 1.0).variances(0).unwrap();
        assert_relative_eq!(v.dy2, 0.679570, epsilon = 1e-6);
        // t = 0 reproduces the printed squeeze: ΔX² = ¼e^{2θ}
        let v = single(0.4, 1.0, 0.0).variances(0).unwrap();
        assert_relative_eq!(v.dx2, 0.25 * (0.8f64).exp(), max_relative = 1e-15);
        assert_relative_eq!(v.dx2 * v.dy2, 1.0 / 16.0, max_relative = 1e-12);
    }

    #[test]
    fn quantum_number_examples() {
        let q = single(1f64.asinh(), 1.0, 0.0).quantum_numbers(0).unwrap();
        assert_eq!(q.j, 0.0);
        assert_relative_eq!(q.m, 1.0, epsilon = 1e-14);
        let q = single(0.6, 0.3, 2.0).quantum_numbers(0).unwrap();
        assert_eq!(q.m, 0.0);
    }

    #[test]
    fn code_validation_and_condensates() {
        assert!(Code::new(vec![0.1, -0.2]).is_err());
        assert!(Code::new(vec![f64::INFINITY]).is_err());
        let c = Code::from_condensates(&[0.0, 1.0, 2.0]).unwrap();
        assert_relative_eq!(c.thetas()[1], 1f64.asinh());
        for (n, back) in [0.0, 1.0, 2.0].iter().zip(c.condensates()) {
            assert_relative_eq!(*n, back, epsilon = 1e-14);
        }
    }

    #[test]
    fn mode_list_validation() {
        assert!(ModeList::new(&[1.0], &[-0.1]).is_err());
        assert!(ModeList::new(&[0.0], &[0.1]).is_err());
        assert!(ModeList::new(&[1.0, 2.0], &[0.1]).is_err());
        assert!(ModeList::new(&[], &[]).is_err());
        let bad = vec![ModeParams { index: 1, omega: 1.0, gamma: 0.0 }];
        assert!(ModeList::from_params(bad).is_err());
    }

    #[test]
    fn time_shift_leaves_same_time_overlaps_unchanged() {
        let modes = Arc::new(ModeList::new(&[1.0, 2.0, 3.0], &[0.2, 0.5, 1.0]).unwrap());
        let a = MemoryState::new(modes.clone(), Code::new(vec![0.3, 1.0, 0.1]).unwrap()).unwrap();
        let b = MemoryState::new(modes, Code::new(vec![1.2, 0.0, 0.6]).unwrap()).unwrap();
        let base = log_overlap(&a, &b).unwrap();
        let later = log_overlap(&a.evolve(3.7).unwrap(), &b.evolve(3.7).unwrap()).unwrap();
        assert_eq!(base, later);
    }
}
