//! Oracle-versus-closed-form comparisons.
//!
//! Each check builds states in a [`FockWorkspace`] purely from operator
//! actions and compares against [`crate::su11`] / [`crate::thermo`]. Results
//! are flat rows so that the CLI can write them as a table and tests can
//! assert on them.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::fock::{oracle_overlap, FockVector, FockWorkspace};
use crate::su11::{overlap, Code, MemoryState, ModeList};
use crate::thermo;

pub const ORACLE_TOL: f64 = 1e-8;
pub const ALGEBRA_TOL: f64 = 1e-12;
pub const SQUEEZE_TOL: f64 = 1e-8;
pub const FLOW_TOL: f64 = 1e-6;
pub const FLOW_DT: f64 = 1e-4;
pub const FLOW_RATIO: (f64, f64) = (3.5, 4.5);
pub const HOLE_TOL: f64 = 1e-8;

pub const GRID_THETAS: [f64; 6] = [0.1, 0.3, 0.5, 0.8, 1.0, 1.2];
pub const GRID_GAMMAS: [f64; 2] = [0.25, 1.0];
/// Evaluation times as fractions of the forgetting time `τ = θ/Γ`.
pub const GRID_TIME_FRACTIONS: [f64; 4] = [0.0, 0.5, 1.0, 2.0];
pub const SQUEEZE_THETAS: [f64; 3] = [0.25, 0.5, 1.0];
pub const FLOW_THETAS: [f64; 3] = [0.1, 0.5, 1.0];
pub const ALGEBRA_DIM: usize = 32;

const OMEGA: f64 = 1.0;

/// One compared quantity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRow {
    pub suite: &'static str,
    pub check: String,
    pub theta: f64,
    pub gamma: f64,
    pub time: f64,
    pub theta_eff: f64,
    pub analytic: f64,
    pub oracle: f64,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckRow {
    #[allow(clippy::too_many_arguments)]
    fn compare(
        suite: &'static str,
        check: impl Into<String>,
        (theta, gamma, time): (f64, f64, f64),
        analytic: f64,
        oracle: f64,
        tolerance: f64,
    ) -> Self {
        let residual = (analytic - oracle).abs();
        CheckRow {
            suite,
            check: check.into(),
            theta,
            gamma,
            time,
            theta_eff: gamma * time - theta,
            analytic,
            oracle,
            residual,
            tolerance,
            passed: residual <= tolerance,
        }
    }

    /// A residual that should be zero.
    fn bound(
        suite: &'static str,
        check: impl Into<String>,
        (theta, gamma, time): (f64, f64, f64),
        residual: f64,
        tolerance: f64,
    ) -> Self {
        CheckRow {
            suite,
            check: check.into(),
            theta,
            gamma,
            time,
            theta_eff: gamma * time - theta,
            analytic: 0.0,
            oracle: residual,
            residual,
            tolerance,
            passed: residual <= tolerance,
        }
    }
}

fn single_state(theta: f64, gamma: f64, t: f64) -> Result<MemoryState> {
    let modes = Arc::new(ModeList::uniform(1, OMEGA, gamma)?);
    MemoryState::at_time(modes, Code::new(vec![theta])?, t)
}

/// Observables at one `(θ, Γ, t)` point.
pub fn oracle_point(ws: &FockWorkspace, theta: f64, t: f64) -> Result<Vec<CheckRow>> {
    let gamma = ws.gamma();
    let key = (theta, gamma, t);
    let state = single_state(theta, gamma, t)?;
    let th = state.effective_theta(0)?;
    let v = ws.trajectory(theta, t)?;
    let mut rows = Vec::new();
    let mut cmp = |name: &str, analytic: f64, oracle: f64| {
        rows.push(CheckRow::compare("oracle", name, key, analytic, oracle, ORACLE_TOL));
    };

    cmp("occupation", state.occupation(0)?, ws.occupation_a(&v));
    cmp("occupation_tilde", state.occupation(0)?, ws.occupation_a_tilde(&v));

    let vacuum = MemoryState::vacuum(state.modes().clone());
    cmp(
        "vacuum_overlap",
        overlap(&state, &vacuum)?,
        oracle_overlap(&v, &FockVector::vacuum(ws.dim()))?,
    );

    // a second code printed at the same time and evolved alongside, chosen
    // so that its effective parameter Θ/2 − 0.1 stays inside the budget
    let partner_theta = 0.5 * (gamma * t + theta) + 0.1;
    let partner = single_state(partner_theta, gamma, t)?;
    let w = ws.trajectory(partner_theta, t)?;
    cmp("pair_overlap", overlap(&state, &partner)?, oracle_overlap(&v, &w)?);
    // and the same code seen at printing time
    let origin = single_state(theta, gamma, 0.0)?;
    let u = ws.memory_vector_via_generator(theta)?;
    cmp("self_overlap", overlap(&state, &origin)?, oracle_overlap(&v, &u)?);

    let var = state.variances(0)?;
    let ov = ws.variances(&v);
    cmp("dx2", var.dx2, ov.dx2);
    cmp("dy2", var.dy2, ov.dy2);
    cmp("dxt2", var.dxt2, ov.dxt2);
    cmp("dyt2", var.dyt2, ov.dyt2);

    let s = thermo::entropy(&state).total;
    if th != 0.0 {
        cmp("entropy_expectation", s, ws.entropy_expectation(&v, th)?);
    }
    cmp("entanglement_entropy", s, ws.entanglement_entropy(&v));

    let qn = state.quantum_numbers(0)?;
    let oq = ws.quantum_numbers(&v);
    cmp("m", qn.m, oq.m);
    cmp("j", qn.j, oq.j);
    Ok(rows)
}

/// The `θ × Γ × {0, τ/2, τ, 2τ}` equivalence grid at truncation `dim`.
pub fn oracle_grid(dim: usize, exec: Execution) -> Result<Vec<CheckRow>> {
    let mut points = Vec::new();
    for &gamma in &GRID_GAMMAS {
        for &theta in &GRID_THETAS {
            for &f in &GRID_TIME_FRACTIONS {
                points.push((gamma, theta, f * theta / gamma));
            }
        }
    }
    let workspaces: Vec<FockWorkspace> = GRID_GAMMAS
        .iter()
        .map(|&g| FockWorkspace::build(dim, OMEGA, g))
        .collect::<Result<_>>()?;
    let rows = exec::map_slice(exec, &points, |&(gamma, theta, t)| {
        let ws = &workspaces[GRID_GAMMAS.iter().position(|&g| g == gamma).unwrap()];
        oracle_point(ws, theta, t)
    });
    let mut out = Vec::new();
    for r in rows {
        out.extend(r?);
    }
    Ok(out)
}

/// Operator-algebra identities and `j = 0` sector behaviour.
pub fn algebra_suite(dim: usize) -> Result<Vec<CheckRow>> {
    let ws = FockWorkspace::build(dim, OMEGA, 1.0)?;
    let r = ws.algebra_residuals();
    let key = (0.0, 1.0, 0.0);
    let mut rows: Vec<CheckRow> = [
        ("ccr", r.ccr),
        ("cross_commutators", r.cross),
        ("j_plus_j_minus", r.j_plus_minus),
        ("j3_ladder", r.j3_ladder),
        ("casimir", r.casimir),
        ("h0_h_int", r.h0_h_int),
        ("sector_closure", r.sector_closure),
    ]
    .into_iter()
    .map(|(name, res)| CheckRow::bound("algebra", name, key, res, ALGEBRA_TOL))
    .collect();
    for theta in [0.3, 0.8] {
        let v = ws.memory_vector(theta)?;
        rows.push(CheckRow::bound(
            "algebra",
            "h0_on_memory_vector",
            (theta, 1.0, 0.0),
            ws.h0_action_norm(&v),
            ALGEBRA_TOL,
        ));
        rows.push(CheckRow::bound(
            "algebra",
            "off_diagonal_support",
            (theta, 1.0, 0.0),
            ws.evolve_vector(&v, 0.5)?.off_diagonal_max(),
            ALGEBRA_TOL,
        ));
    }
    Ok(rows)
}

/// Two-mode squeeze against the product of single-mode squeezers, plus the
/// quadrature variances of a single-mode squeezed vacuum.
pub fn squeeze_suite(dim: usize) -> Result<Vec<CheckRow>> {
    let ws = FockWorkspace::build(dim, OMEGA, 1.0)?;
    let mut rows = Vec::new();
    for theta in SQUEEZE_THETAS {
        let key = (theta, 0.0, 0.0);
        let r = ws.check_squeeze_factorization(theta)?;
        rows.push(CheckRow::bound("squeeze", "factorization", key, r.residual, SQUEEZE_TOL));
        let v = ws.single_mode_squeezed(theta)?;
        let var = ws.variances(&v);
        let wide = 0.25 * (2.0 * theta).exp();
        let narrow = 0.25 * (-2.0 * theta).exp();
        rows.push(CheckRow::compare("squeeze", "single_mode_dx2", key, wide, var.dx2, SQUEEZE_TOL));
        rows.push(CheckRow::compare("squeeze", "single_mode_dy2", key, narrow, var.dy2, SQUEEZE_TOL));
    }
    Ok(rows)
}

/// Printing parameter and time that reach effective parameter `target` with `Γ = 1`.
fn reach(target: f64) -> (f64, f64) {
    let theta = 0.5;
    (theta, target + theta)
}

/// Entropy-generated time flow at `dt` and `dt/2`, with the residual ratio.
pub fn flow_suite(dim: usize) -> Result<Vec<CheckRow>> {
    let ws = FockWorkspace::build(dim, OMEGA, 1.0)?;
    let mut rows = Vec::new();
    for target in FLOW_THETAS {
        let (theta, t) = reach(target);
        let key = (theta, 1.0, t);
        let coarse = ws.check_entropy_flow(theta, t, FLOW_DT)?;
        let fine = ws.check_entropy_flow(theta, t, 0.5 * FLOW_DT)?;
        rows.push(CheckRow::bound("flow", "residual", key, coarse, FLOW_TOL));
        let ratio = coarse / fine;
        let mut row = CheckRow::compare("flow", "halving_ratio", key, 4.0, ratio, 0.5);
        row.passed = (FLOW_RATIO.0..=FLOW_RATIO.1).contains(&ratio);
        rows.push(row);
    }
    Ok(rows)
}

/// Hole relations along a trajectory covering `|Θ| ∈ [0.1, 1.2]` on both sides of zero.
pub fn hole_suite(dim: usize) -> Result<Vec<CheckRow>> {
    let ws = FockWorkspace::build(dim, OMEGA, 1.0)?;
    let theta = 1.2;
    let mut rows = Vec::new();
    for step in 1..=12 {
        for sign in [-1.0, 1.0] {
            let t = 0.1 * (12.0 + sign * step as f64);
            let th = t - theta;
            let v = ws.trajectory(theta, t)?;
            let r = ws.check_hole_relations(&v, th)?;
            rows.push(CheckRow::bound("hole", "create_a", (theta, 1.0, t), r.create_a, HOLE_TOL));
            rows.push(CheckRow::bound(
                "hole",
                "create_a_tilde",
                (theta, 1.0, t),
                r.create_a_tilde,
                HOLE_TOL,
            ));
        }
    }
    Ok(rows)
}

/// Names accepted by [`run_suites`].
pub const SUITES: [&str; 5] = ["oracle", "algebra", "squeeze", "flow", "hole"];

/// Runs one suite. The algebra suite is capped at [`ALGEBRA_DIM`]: its
/// round-off grows with the largest matrix entries, roughly linearly in `dim`.
pub fn run_suite(name: &str, dim: usize, exec: Execution) -> Result<Vec<CheckRow>> {
    match name {
        "oracle" => oracle_grid(dim, exec),
        "algebra" => algebra_suite(dim.min(ALGEBRA_DIM)),
        "squeeze" => squeeze_suite(dim),
        "flow" => flow_suite(dim),
        "hole" => hole_suite(dim),
        other => Err(Error::Config(format!(
            "unknown verification suite {other:?} (expected one of {})",
            SUITES.join(", ")
        ))),
    }
}

/// Runs the named suites in order and concatenates their rows.
pub fn run_suites(names: &[&str], dim: usize, exec: Execution) -> Result<Vec<CheckRow>> {
    let mut rows = Vec::new();
    for name in names {
        rows.extend(run_suite(name, dim, exec)?);
    }
    Ok(rows)
}
