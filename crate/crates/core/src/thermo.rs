//! Thermodynamics of memory vacua: entropy, per-mode effective temperature,
//! free energy and the discrete first-law ledger.
//!
//! All quantities are closed forms in `Θ_κ(t)`. The entropy per mode is the
//! expectation of the entropy operator with `⟨A†A⟩ = sinh²Θ` and
//! `⟨AA†⟩ = cosh²Θ`,
//!
//! ```text
//! s(Θ) = cosh²Θ ln cosh²Θ − sinh²Θ ln sinh²Θ,
//! ```
//!
//! evaluated as `2 ln coshΘ − 2 sinh²Θ ln|tanhΘ|` so that it stays finite for
//! large `|Θ|` and takes the limit 0 at `Θ = 0`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::su11::{ln_abs_tanh, ln_cosh, neumaier_sum, MemoryState};

/// `atanh(e)/e` for `e = e^{−2|Θ|} ∈ [0, 1)`, with the limit 1 at `e = 0`.
fn atanh_ratio(e: f64) -> f64 {
    if e < 1e-8 {
        1.0 + e * e / 3.0
    } else {
        e.atanh() / e
    }
}

/// Per-mode entropy `s(Θ)`.
pub fn mode_entropy(theta_eff: f64) -> f64 {
    if theta_eff == 0.0 {
        return 0.0;
    }
    // sinh²Θ · (−2 ln|tanhΘ|) = (1 − e)² atanh(e)/e with e = e^{−2|Θ|}
    let e = (-2.0 * theta_eff.abs()).exp();
    2.0 * ln_cosh(theta_eff) + (1.0 - e).powi(2) * atanh_ratio(e)
}

/// `ds/dΘ = −2 sinh 2Θ ln|tanh Θ|`, continuous with value 0 at `Θ = 0`.
pub fn mode_entropy_slope(theta_eff: f64) -> f64 {
    if theta_eff == 0.0 {
        return 0.0;
    }
    let e = (-2.0 * theta_eff.abs()).exp();
    theta_eff.signum() * 2.0 * (1.0 - e * e) * atanh_ratio(e)
}

/// `βE = −ln tanh²Θ`, the inverse temperature at which the Bose factor equals `sinh²Θ`.
pub fn beta_energy(theta_eff: f64) -> Result<f64> {
    if theta_eff == 0.0 || theta_eff.is_nan() {
        return Err(Error::ZeroOccupation { mode: 0 });
    }
    Ok(-2.0 * ln_abs_tanh(theta_eff))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Entropy {
    pub per_mode: Vec<f64>,
    pub total: f64,
}

/// Entropy of the `A` subsystem.
pub fn entropy(state: &MemoryState) -> Entropy {
    let per_mode: Vec<f64> = state.effective_thetas().into_iter().map(mode_entropy).collect();
    let total = neumaier_sum(per_mode.iter().copied());
    Entropy { per_mode, total }
}

/// Entropy of the mirror subsystem `Ã`. Memory states carry equal `A` and
/// `Ã` occupation, so this coincides with [`entropy`] mode by mode.
pub fn entropy_tilde(state: &MemoryState) -> Entropy {
    entropy(state)
}

/// `β_κ = −ln tanh²Θ_κ / E_κ`.
pub fn effective_beta(state: &MemoryState, kappa: usize) -> Result<f64> {
    let theta = state.effective_theta(kappa)?;
    let energy = state.modes().params()[kappa].energy();
    beta_energy(theta)
        .map(|be| be / energy)
        .map_err(|_| Error::ZeroOccupation { mode: kappa })
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("inverse temperature must be finite and > 0, got {beta}")))
    }
}

/// `F_A = Σ E_κ sinh²Θ_κ − 𝒮/β`.
pub fn free_energy(state: &MemoryState, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    Ok(state.energy() - entropy(state).total / beta)
}

/// Analytic `∂F_A/∂Θ_κ = E_κ sinh 2Θ_κ − (1/β) ds/dΘ_κ` for every mode.
///
/// With `ds/dΘ = β_κ E_κ sinh 2Θ` this is `E_κ sinh 2Θ_κ (1 − β_κ/β)`, which
/// vanishes at `β = β_κ` and otherwise has the sign of `(β − β_κ) Θ_κ`.
pub fn stationarity_residual(state: &MemoryState, beta: f64) -> Result<Vec<f64>> {
    check_beta(beta)?;
    Ok(state
        .modes()
        .params()
        .iter()
        .zip(state.effective_thetas())
        .map(|(p, th)| p.energy() * (2.0 * th).sinh() - mode_entropy_slope(th) / beta)
        .collect())
}

/// Least-squares single inverse temperature over modes with `Θ_κ ≠ 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BetaFit {
    pub beta: f64,
    /// Root-mean-square of `β E_κ − β_κ E_κ`; zero only when every mode shares one temperature.
    pub rms_residual: f64,
    pub modes_used: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThermoSnapshot {
    pub time: f64,
    pub per_mode_entropy: Vec<f64>,
    pub entropy: f64,
    pub energy: f64,
    /// `None` where `Θ_κ = 0` (zero temperature).
    pub betas: Vec<Option<f64>>,
    pub beta_fit: Option<BetaFit>,
}

pub fn fit_beta(state: &MemoryState) -> Option<BetaFit> {
    let pairs: Vec<(f64, f64)> = state
        .modes()
        .params()
        .iter()
        .zip(state.effective_thetas())
        .filter_map(|(p, th)| beta_energy(th).ok().map(|be| (p.energy(), be)))
        .collect();
    if pairs.is_empty() {
        return None;
    }
    let num = neumaier_sum(pairs.iter().map(|(e, be)| e * be));
    let den = neumaier_sum(pairs.iter().map(|(e, _)| e * e));
    let beta = num / den;
    let ss = neumaier_sum(pairs.iter().map(|(e, be)| (beta * e - be).powi(2)));
    Some(BetaFit {
        beta,
        rms_residual: (ss / pairs.len() as f64).sqrt(),
        modes_used: pairs.len(),
    })
}

pub fn snapshot(state: &MemoryState) -> ThermoSnapshot {
    let s = entropy(state);
    ThermoSnapshot {
        time: state.time(),
        entropy: s.total,
        per_mode_entropy: s.per_mode,
        energy: state.energy(),
        betas: (0..state.len()).map(|k| effective_beta(state, k).ok()).collect(),
        beta_fit: fit_beta(state),
    }
}

/// Requires a non-empty, finite, non-negative, strictly increasing grid.
pub fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::domain("time grid is empty"));
    }
    if grid.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::domain("time grid entries must be finite and >= 0"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("time grid must be strictly increasing"));
    }
    Ok(())
}

pub fn snapshots(state: &MemoryState, grid: &[f64], exec: Execution) -> Result<Vec<ThermoSnapshot>> {
    check_grid(grid)?;
    exec::map_slice(exec, grid, |&t| state.with_time(t).map(|s| snapshot(&s)))
        .into_iter()
        .collect()
}

/// Total entropy `𝒮(t)` along the grid.
pub fn entropy_trace(state: &MemoryState, grid: &[f64], exec: Execution) -> Result<Vec<f64>> {
    check_grid(grid)?;
    exec::map_slice(exec, grid, |&t| state.with_time(t).map(|s| entropy(&s).total))
        .into_iter()
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LedgerStep {
    pub t0: f64,
    pub t1: f64,
    pub d_energy: f64,
    pub d_entropy: f64,
    /// `Σ_κ Δs_κ / β_κ` with `β_κ` taken at the step midpoint.
    pub heat: f64,
    pub residual: f64,
    /// Some `Θ_κ` touches or crosses 0 within the step; `heat` and `residual` are NaN.
    pub flagged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FirstLawLedger {
    pub steps: Vec<LedgerStep>,
}

impl FirstLawLedger {
    pub fn flagged_count(&self) -> usize {
        self.steps.iter().filter(|s| s.flagged).count()
    }

    /// `Σ |residual|` over unflagged steps.
    pub fn total_abs_residual(&self) -> f64 {
        neumaier_sum(self.steps.iter().filter(|s| !s.flagged).map(|s| s.residual.abs()))
    }

    pub fn max_abs_residual(&self) -> f64 {
        self.steps
            .iter()
            .filter(|s| !s.flagged)
            .map(|s| s.residual.abs())
            .fold(0.0, f64::max)
    }
}

fn ledger_step(state: &MemoryState, t0: f64, t1: f64) -> LedgerStep {
    let tm = 0.5 * (t0 + t1);
    let mut d_energy = Vec::with_capacity(state.len());
    let mut d_entropy = Vec::with_capacity(state.len());
    let mut heat = Vec::with_capacity(state.len());
    let mut flagged = false;
    for (p, &theta) in state.modes().params().iter().zip(state.code().thetas()) {
        let th0 = p.gamma * t0 - theta;
        let th1 = p.gamma * t1 - theta;
        let e = p.energy();
        let de = e * (th1.sinh().powi(2) - th0.sinh().powi(2));
        let ds = mode_entropy(th1) - mode_entropy(th0);
        d_energy.push(de);
        d_entropy.push(ds);
        if de == 0.0 && ds == 0.0 {
            continue;
        }
        if th0 * th1 <= 0.0 {
            flagged = true;
            continue;
        }
        let be = beta_energy(p.gamma * tm - theta).unwrap_or(f64::INFINITY);
        heat.push(ds * e / be);
    }
    let d_energy = neumaier_sum(d_energy);
    let d_entropy = neumaier_sum(d_entropy);
    let (heat, residual) = if flagged {
        (f64::NAN, f64::NAN)
    } else {
        let q = neumaier_sum(heat);
        (q, d_energy - q)
    };
    LedgerStep {
        t0,
        t1,
        d_energy,
        d_entropy,
        heat,
        residual,
        flagged,
    }
}

/// Step-by-step check of `dE_A = (1/β) d𝒮_A` with midpoint per-mode `β_κ`.
///
/// The per-step residual is third order in the step, so the summed residual
/// over a fixed interval converges at second order.
pub fn first_law_ledger(state: &MemoryState, grid: &[f64], exec: Execution) -> Result<FirstLawLedger> {
    check_grid(grid)?;
    let steps = exec::map_range(exec, grid.len().saturating_sub(1), |i| {
        ledger_step(state, grid[i], grid[i + 1])
    });
    Ok(FirstLawLedger { steps })
}
