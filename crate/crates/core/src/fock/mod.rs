//! Brute-force oracle on a truncated two-oscillator Fock space.
//!
//! One mode pair is represented on the basis `|n, ñ⟩` of `A†A` and `Ã†Ã`
//! eigenstates, each oscillator truncated to `dim` levels. All operators are
//! explicit sparse matrices, so every closed form of [`crate::su11`] and
//! [`crate::thermo`] can be checked against plain linear algebra.
//!
//! Conventions:
//! - The oscillator modes are `a = (A − Ã)/√2` and `ã = (A + Ã)/√2`. This
//!   choice of phase for the mirror mode makes the two-mode squeeze
//!   `exp(−iG(θ))` factor into `Ŝ_a(θ) Ŝ_ã(−θ)`, with `ΔX² = ¼e^{2θ}` at
//!   printing time.
//! - Operator identities are asserted on the interior subspace
//!   `n, ñ < dim − 1`; the top level of each oscillator is where truncation
//!   breaks the commutation relations.
//! - Exponential actions run on a headroom box of `2·dim` levels per
//!   oscillator and are projected back, so the only error left in the
//!   returned vector is the measured discarded norm² (checked against
//!   [`TAIL_BUDGET`]).

mod expm;
mod sparse;
mod vector;

pub use expm::expm_action;
pub use sparse::{SparseMatrix, C64};
pub use vector::{oracle_overlap, FockVector};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::su11::{QuantumNumbers, Variances};

/// Default truncation per oscillator.
pub const DEFAULT_DIM: usize = 64;
pub const MIN_DIM: usize = 4;
/// Largest discarded norm² accepted from any truncated state.
pub const TAIL_BUDGET: f64 = 1e-10;
/// Smallest `|Θ|` accepted by the hole-relation check (division by `sinh Θ`).
pub const HOLE_MIN_THETA: f64 = 1e-6;
/// Smallest `|Θ|` accepted by the entropy-flow check (`ln sinh²Θ` diverges).
pub const FLOW_MIN_THETA: f64 = 0.05;

const HEADROOM_FACTOR: usize = 2;
const HERMITICITY_TOL: f64 = 1e-12;

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Single-oscillator lowering matrix: `⟨n−1|b|n⟩ = √n`.
pub fn lowering(dim: usize) -> SparseMatrix {
    SparseMatrix::from_triplets(dim, (1..dim).map(|n| (n - 1, n, re((n as f64).sqrt()))))
}

/// Operators that generate the exponentials; needed both at `dim` and on the headroom box.
#[derive(Clone, Debug)]
struct Generators {
    dim: usize,
    /// `J₊ − J₋ = A†Ã† − AÃ`.
    pair: SparseMatrix,
    /// `−½(a² − a†²)`, so `Ŝ_a(θ) = exp(θ·squeeze_a)`.
    squeeze_a: SparseMatrix,
    /// `−½(ã² − ã†²)`.
    squeeze_a_tilde: SparseMatrix,
}

struct Ladders {
    mode_a: SparseMatrix,
    mode_a_tilde: SparseMatrix,
    osc_a: SparseMatrix,
    osc_a_tilde: SparseMatrix,
}

impl Ladders {
    fn new(dim: usize) -> Self {
        let b = lowering(dim);
        let id = SparseMatrix::identity(dim);
        let mode_a = SparseMatrix::kron(&b, &id);
        let mode_a_tilde = SparseMatrix::kron(&id, &b);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let osc_a = s * &(&mode_a - &mode_a_tilde);
        let osc_a_tilde = s * &(&mode_a + &mode_a_tilde);
        Ladders {
            mode_a,
            mode_a_tilde,
            osc_a,
            osc_a_tilde,
        }
    }

    fn generators(&self, dim: usize) -> Generators {
        let j_plus = &self.mode_a.adjoint() * &self.mode_a_tilde.adjoint();
        let j_minus = &self.mode_a * &self.mode_a_tilde;
        Generators {
            dim,
            pair: &j_plus - &j_minus,
            squeeze_a: squeeze_generator(&self.osc_a),
            squeeze_a_tilde: squeeze_generator(&self.osc_a_tilde),
        }
    }
}

fn squeeze_generator(b: &SparseMatrix) -> SparseMatrix {
    let bd = b.adjoint();
    -0.5 * &(&(b * b) - &(&bd * &bd))
}

/// Explicit operator matrices for one mode pair at truncation `dim`.
#[derive(Clone, Debug)]
pub struct FockWorkspace {
    dim: usize,
    omega: f64,
    gamma: f64,
    pub mode_a: SparseMatrix,
    pub mode_a_tilde: SparseMatrix,
    pub osc_a: SparseMatrix,
    pub osc_a_tilde: SparseMatrix,
    pub j_plus: SparseMatrix,
    pub j_minus: SparseMatrix,
    pub j3: SparseMatrix,
    /// `𝒞² = ¼ + J₃² − ½(J₊J₋ + J₋J₊)`.
    pub casimir_sq: SparseMatrix,
    pub number_a: SparseMatrix,
    pub number_a_tilde: SparseMatrix,
    pub h0: SparseMatrix,
    pub h_int: SparseMatrix,
    local: Generators,
    headroom: Generators,
}

/// Residuals of the hole relations `A†/coshΘ = Ã/sinhΘ` and `Ã†/coshΘ = A/sinhΘ` on a vector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HoleResiduals {
    pub create_a: f64,
    pub create_a_tilde: f64,
}

impl HoleResiduals {
    pub fn max(&self) -> f64 {
        self.create_a.max(self.create_a_tilde)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SqueezeResidual {
    /// `‖exp(−iG(θ))|0,0⟩ − Ŝ_a(θ)Ŝ_ã(−θ)|0,0⟩‖` inside the workspace box.
    pub residual: f64,
    /// Largest norm² either side leaked outside the box.
    pub discarded: f64,
}

/// Interior-subspace residuals of the operator algebra; all should vanish to round-off.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct AlgebraResiduals {
    /// `[A,A†] − 1`, `[Ã,Ã†] − 1`, `[a,a†] − 1`, `[ã,ã†] − 1`.
    pub ccr: f64,
    /// `[A,Ã]`, `[A,Ã†]` everywhere, `[a,ã]`, `[a,ã†]` on the interior.
    pub cross: f64,
    /// `[J₊,J₋] + 2J₃`.
    pub j_plus_minus: f64,
    /// `[J₃,J₊] − J₊` and `[J₃,J₋] + J₋`.
    pub j3_ladder: f64,
    /// `𝒞² − ¼(A†A − Ã†Ã)²`.
    pub casimir: f64,
    /// `[H₀, H_I]`.
    pub h0_h_int: f64,
    /// Largest `H_I` or `J₃` matrix element leaving the diagonal `n = ñ` span.
    pub sector_closure: f64,
}

impl AlgebraResiduals {
    pub fn max(&self) -> f64 {
        [
            self.ccr,
            self.cross,
            self.j_plus_minus,
            self.j3_ladder,
            self.casimir,
            self.h0_h_int,
            self.sector_closure,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

impl FockWorkspace {
    pub fn build(dim: usize, omega: f64, gamma: f64) -> Result<Self> {
        if dim < MIN_DIM {
            return Err(Error::domain(format!("truncation must be >= {MIN_DIM}, got {dim}")));
        }
        if !(omega.is_finite() && omega > 0.0 && gamma.is_finite() && gamma >= 0.0) {
            return Err(Error::domain(format!(
                "need omega > 0 and gamma >= 0 (omega = {omega}, gamma = {gamma})"
            )));
        }
        let l = Ladders::new(dim);
        let j_plus = &l.mode_a.adjoint() * &l.mode_a_tilde.adjoint();
        let j_minus = j_plus.adjoint();
        let number_a = &l.mode_a.adjoint() * &l.mode_a;
        let number_a_tilde = &l.mode_a_tilde.adjoint() * &l.mode_a_tilde;
        let id = SparseMatrix::identity(dim * dim);
        let j3 = 0.5 * &(&(&number_a + &number_a_tilde) + &id);
        let casimir_sq = &(&(0.25 * &id) + &(&j3 * &j3))
            - &(0.5 * &(&(&j_plus * &j_minus) + &(&j_minus * &j_plus)));
        let h0 = omega * &(&number_a - &number_a_tilde);
        let h_int = C64::new(0.0, gamma) * &(&j_plus - &j_minus);

        for (name, m) in [("H0", &h0), ("H_I", &h_int)] {
            let defect = m.hermiticity_defect();
            if defect > HERMITICITY_TOL {
                return Err(Error::domain(format!("{name} is not Hermitian (defect {defect:e})")));
            }
        }

        let local = l.generators(dim);
        let big = HEADROOM_FACTOR * dim;
        let headroom = Ladders::new(big).generators(big);
        Ok(FockWorkspace {
            dim,
            omega,
            gamma,
            mode_a: l.mode_a,
            mode_a_tilde: l.mode_a_tilde,
            osc_a: l.osc_a,
            osc_a_tilde: l.osc_a_tilde,
            j_plus,
            j_minus,
            j3,
            casimir_sq,
            number_a,
            number_a_tilde,
            h0,
            h_int,
            local,
            headroom,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `G(θ) = −iθ(J₊ − J₋)`.
    pub fn g_operator(&self, theta: f64) -> SparseMatrix {
        C64::new(0.0, -theta) * &self.local.pair
    }

    /// Generator of `Ŝ_a(θ) = exp(θ·K)`: `K = −½(a² − a†²)`.
    pub fn squeeze_a_generator(&self) -> &SparseMatrix {
        &self.local.squeeze_a
    }

    /// Generator of `Ŝ_ã(θ) = exp(θ·K̃)`: `K̃ = −½(ã² − ã†²)`.
    pub fn squeeze_a_tilde_generator(&self) -> &SparseMatrix {
        &self.local.squeeze_a_tilde
    }

    /// Entropy operator `S_A(Θ) = −(A†A ln sinh²Θ − AA† ln cosh²Θ)` (diagonal).
    pub fn entropy_operator(&self, theta_eff: f64) -> Result<SparseMatrix> {
        if theta_eff == 0.0 || !theta_eff.is_finite() {
            return Err(Error::DegenerateTheta { theta: theta_eff });
        }
        let ln_s2 = 2.0 * theta_eff.sinh().abs().ln();
        let ln_c2 = 2.0 * crate::su11::ln_cosh(theta_eff);
        let diag: Vec<C64> = (0..self.dim * self.dim)
            .map(|i| {
                let n = (i / self.dim) as f64;
                re(-(n * ln_s2 - (n + 1.0) * ln_c2))
            })
            .collect();
        Ok(SparseMatrix::diagonal(&diag))
    }

    pub fn interior_mask(&self) -> Vec<bool> {
        let d = self.dim;
        (0..d * d).map(|i| i / d < d - 1 && i % d < d - 1).collect()
    }

    fn check_tail(&self, tail: f64) -> Result<()> {
        if tail > TAIL_BUDGET || tail.is_nan() {
            Err(Error::TruncationBudget {
                tail,
                budget: TAIL_BUDGET,
                dim: self.dim,
            })
        } else {
            Ok(())
        }
    }

    /// Analytic discarded norm² `λ^{2d}` of a squeezed pair with `λ = tanh|θ|`.
    pub fn analytic_tail(&self, theta: f64) -> f64 {
        theta.tanh().abs().powi(2 * self.dim as i32)
    }

    /// Memory vector `Σ (−tanh θ)ⁿ/cosh θ |n,n⟩`, renormalised after truncation.
    pub fn memory_vector(&self, theta: f64) -> Result<FockVector> {
        self.state_vector(-theta)
    }

    /// Memory vector in the evolved parametrisation `Σ tanhⁿΘ/coshΘ |n,n⟩`.
    pub fn state_vector(&self, theta_eff: f64) -> Result<FockVector> {
        if !theta_eff.is_finite() {
            return Err(Error::domain("squeeze parameter must be finite"));
        }
        self.check_tail(self.analytic_tail(theta_eff))?;
        let lambda = theta_eff.tanh();
        let mut v = FockVector::zeros(self.dim);
        let mut amp = 1.0 / theta_eff.cosh();
        for n in 0..self.dim {
            v.set(n, n, re(amp));
            amp *= lambda;
        }
        Ok(v.normalized())
    }

    fn headroom_vacuum(&self) -> FockVector {
        FockVector::vacuum(self.headroom.dim)
    }

    fn project_checked(&self, big: &FockVector) -> Result<FockVector> {
        let (v, lost) = big.project(self.dim);
        self.check_tail(lost)?;
        Ok(v)
    }

    fn exp_pair(&self, v: &FockVector, s: f64) -> Result<FockVector> {
        let amps = expm_action(&self.headroom.pair, re(s), v.amplitudes())?;
        FockVector::from_amplitudes(v.dim(), amps)
    }

    /// `exp(−itH₀)` is a diagonal phase `e^{−itΩ(n−ñ)}`.
    fn apply_h0_phase(&self, v: &mut FockVector, t: f64) {
        let d = v.dim();
        for (i, a) in v.amplitudes_mut().iter_mut().enumerate() {
            let diff = (i / d) as f64 - (i % d) as f64;
            if diff != 0.0 {
                *a *= C64::from_polar(1.0, -t * self.omega * diff);
            }
        }
    }

    /// `exp(−iG(θ))|0,0⟩` by series action, renormalised after projection.
    pub fn memory_vector_via_generator(&self, theta: f64) -> Result<FockVector> {
        let big = self.exp_pair(&self.headroom_vacuum(), -theta)?;
        Ok(self.project_checked(&big)?.normalized())
    }

    /// `exp(−itH)v` with `H = H₀ + H_I`. Norm is preserved up to the
    /// discarded tail, which must stay within budget.
    pub fn evolve_vector(&self, v: &FockVector, t: f64) -> Result<FockVector> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::domain(format!("evolution time must be finite and >= 0, got {t}")));
        }
        if v.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                left: v.dim(),
                right: self.dim,
            });
        }
        let mut big = self.exp_pair(&v.embed(self.headroom.dim), self.gamma * t)?;
        self.apply_h0_phase(&mut big, t);
        self.project_checked(&big)
    }

    /// The printed-then-evolved state `exp(−itH) exp(−iG(θ))|0,0⟩`, built
    /// entirely by operator actions and projected once at the end.
    pub fn trajectory(&self, theta: f64, t: f64) -> Result<FockVector> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::domain(format!("evolution time must be finite and >= 0, got {t}")));
        }
        let printed = self.exp_pair(&self.headroom_vacuum(), -theta)?;
        let mut big = self.exp_pair(&printed, self.gamma * t)?;
        self.apply_h0_phase(&mut big, t);
        self.project_checked(&big)
    }

    /// `‖H₀ v‖`; zero on the `j = 0` sector.
    pub fn h0_action_norm(&self, v: &FockVector) -> f64 {
        self.h0
            .matvec(v.amplitudes())
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Normalised expectation `⟨v|M|v⟩/⟨v|v⟩`.
    pub fn expect(&self, op: &SparseMatrix, v: &FockVector) -> C64 {
        op.expectation(v.amplitudes()) / v.norm_sqr()
    }

    pub fn occupation_a(&self, v: &FockVector) -> f64 {
        self.expect(&self.number_a, v).re
    }

    pub fn occupation_a_tilde(&self, v: &FockVector) -> f64 {
        self.expect(&self.number_a_tilde, v).re
    }

    /// `j = ½(⟨A†A⟩ − ⟨Ã†Ã⟩)` and `m = ⟨J₃⟩ − ½`.
    ///
    /// `j` is read from the number operators rather than from `√⟨𝒞²⟩`: the
    /// truncated `J₊J₋` products are wrong on the top level, and the square
    /// root turns a 1e−8 defect there into a 1e−4 one.
    pub fn quantum_numbers(&self, v: &FockVector) -> QuantumNumbers {
        QuantumNumbers {
            j: 0.5 * (self.occupation_a(v) - self.occupation_a_tilde(v)),
            m: self.expect(&self.j3, v).re - 0.5,
        }
    }

    /// `⟨𝒞²⟩`, subject to the top-level truncation defect of the `J₊J₋` products.
    pub fn casimir_expectation(&self, v: &FockVector) -> f64 {
        self.expect(&self.casimir_sq, v).re
    }

    fn quadrature_variances(&self, b: &SparseMatrix, v: &FockVector) -> (f64, f64) {
        let bd = b.adjoint();
        let x = 0.5 * &(b + &bd);
        let y = C64::new(0.0, -0.5) * &(b - &bd);
        let var = |q: &SparseMatrix| {
            let qv = q.matvec(v.amplitudes());
            let second: f64 = qv.iter().map(|a| a.norm_sqr()).sum::<f64>() / v.norm_sqr();
            let first = self.expect(q, v).re;
            second - first * first
        };
        (var(&x), var(&y))
    }

    /// Variances of `X, Y` (`a = X + iY`) and of the tilde pair.
    pub fn variances(&self, v: &FockVector) -> Variances {
        let (dx2, dy2) = self.quadrature_variances(&self.osc_a, v);
        let (dxt2, dyt2) = self.quadrature_variances(&self.osc_a_tilde, v);
        Variances {
            dx2,
            dy2,
            dxt2,
            dyt2,
        }
    }

    /// `⟨S_A(Θ)⟩`.
    pub fn entropy_expectation(&self, v: &FockVector, theta_eff: f64) -> Result<f64> {
        Ok(self.expect(&self.entropy_operator(theta_eff)?, v).re)
    }

    /// Von Neumann entropy of the `A` oscillator after tracing out `Ã`.
    pub fn entanglement_entropy(&self, v: &FockVector) -> f64 {
        let d = self.dim;
        let norm = v.norm_sqr();
        let rho = DMatrix::<C64>::from_fn(d, d, |n, k| {
            (0..d).map(|m| v.get(n, m) * v.get(k, m).conj()).sum::<C64>() / norm
        });
        SymmetricEigen::new(rho)
            .eigenvalues
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| -p * p.ln())
            .sum()
    }

    /// Residuals of `A†v/coshΘ − Ãv/sinhΘ` and `Ã†v/coshΘ − Av/sinhΘ` on the interior.
    pub fn check_hole_relations(&self, v: &FockVector, theta_eff: f64) -> Result<HoleResiduals> {
        if !(theta_eff.abs() >= HOLE_MIN_THETA) {
            return Err(Error::DegenerateTheta { theta: theta_eff });
        }
        let (c, s) = (theta_eff.cosh(), theta_eff.sinh());
        let mask = self.interior_mask();
        let residual = |create: &SparseMatrix, destroy: &SparseMatrix| {
            let lhs = create.matvec(v.amplitudes());
            let rhs = destroy.matvec(v.amplitudes());
            lhs.iter()
                .zip(&rhs)
                .zip(&mask)
                .filter(|(_, &keep)| keep)
                .map(|((l, r), _)| (l / c - r / s).norm_sqr())
                .sum::<f64>()
                .sqrt()
        };
        Ok(HoleResiduals {
            create_a: residual(&self.mode_a.adjoint(), &self.mode_a_tilde),
            create_a_tilde: residual(&self.mode_a_tilde.adjoint(), &self.mode_a),
        })
    }

    /// `Ŝ_a(θ)|0,0⟩`, a single-mode squeezed vacuum of the `a` oscillator.
    pub fn single_mode_squeezed(&self, theta: f64) -> Result<FockVector> {
        let vac = self.headroom_vacuum();
        let amps = expm_action(&self.headroom.squeeze_a, re(theta), vac.amplitudes())?;
        let big = FockVector::from_amplitudes(self.headroom.dim, amps)?;
        Ok(self.project_checked(&big)?.normalized())
    }

    /// Compares the two-mode squeeze `exp(−iG(θ))|0,0⟩` with the product of
    /// single-mode squeezers `Ŝ_a(θ)Ŝ_ã(−θ)|0,0⟩`.
    pub fn check_squeeze_factorization(&self, theta: f64) -> Result<SqueezeResidual> {
        self.check_tail(self.analytic_tail(theta))?;
        let vac = self.headroom_vacuum();
        let two_mode = self.exp_pair(&vac, -theta)?;
        let h = &self.headroom;
        let tilde = expm_action(&h.squeeze_a_tilde, re(-theta), vac.amplitudes())?;
        let product = expm_action(&h.squeeze_a, re(theta), &tilde)?;
        let product = FockVector::from_amplitudes(h.dim, product)?;
        let (lhs, lost_l) = two_mode.project(self.dim);
        let (rhs, lost_r) = product.project(self.dim);
        let discarded = lost_l.max(lost_r);
        self.check_tail(discarded)?;
        let residual = lhs
            .amplitudes()
            .iter()
            .zip(rhs.amplitudes())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        Ok(SqueezeResidual { residual, discarded })
    }

    /// `∂S/∂t` for the A subsystem at effective parameter `Θ` (diagonal):
    /// `−(A†A·2Γ cothΘ − AA†·2Γ tanhΘ)`.
    pub fn entropy_rate_operator(&self, theta_eff: f64) -> Result<SparseMatrix> {
        if theta_eff == 0.0 {
            return Err(Error::DegenerateTheta { theta: theta_eff });
        }
        let g2 = 2.0 * self.gamma;
        let (coth, tanh) = (1.0 / theta_eff.tanh(), theta_eff.tanh());
        let diag: Vec<C64> = (0..self.dim * self.dim)
            .map(|i| {
                let n = (i / self.dim) as f64;
                re(-(n * g2 * coth - (n + 1.0) * g2 * tanh))
            })
            .collect();
        Ok(SparseMatrix::diagonal(&diag))
    }

    /// Central-difference residual of `∂_t|0(t)⟩ = −½(∂S/∂t)|0(t)⟩` on the
    /// interior, along the trajectory printed with `θ` and damped by the
    /// workspace's `Γ`.
    pub fn check_entropy_flow(&self, theta: f64, t: f64, dt: f64) -> Result<f64> {
        if !(dt > 0.0 && t >= dt) {
            return Err(Error::domain(format!("need 0 < dt <= t (t = {t}, dt = {dt})")));
        }
        let theta_eff = self.gamma * t - theta;
        if !(theta_eff.abs() >= FLOW_MIN_THETA) {
            return Err(Error::DegenerateTheta { theta: theta_eff });
        }
        let plus = self.trajectory(theta, t + dt)?;
        let minus = self.trajectory(theta, t - dt)?;
        let here = self.trajectory(theta, t)?;
        let rate = self.entropy_rate_operator(theta_eff)?;
        let flow = rate.matvec(here.amplitudes());
        let mask = self.interior_mask();
        Ok(plus
            .amplitudes()
            .iter()
            .zip(minus.amplitudes())
            .zip(&flow)
            .zip(&mask)
            .filter(|(_, &keep)| keep)
            .map(|(((p, m), f), _)| ((p - m) / (2.0 * dt) + 0.5 * f).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }

    /// Operator-algebra residuals on the interior subspace.
    pub fn algebra_residuals(&self) -> AlgebraResiduals {
        let n = self.dim * self.dim;
        let mask = self.interior_mask();
        let all = vec![true; n];
        let id = SparseMatrix::identity(n);
        let comm = SparseMatrix::commutator;
        let on = |m: &SparseMatrix, keep: &[bool]| m.max_abs_in_columns(keep);

        let ccr = [&self.mode_a, &self.mode_a_tilde, &self.osc_a, &self.osc_a_tilde]
            .into_iter()
            .map(|b| on(&(&comm(b, &b.adjoint()) - &id), &mask))
            .fold(0.0, f64::max);

        let cross = [
            on(&comm(&self.mode_a, &self.mode_a_tilde), &all),
            on(&comm(&self.mode_a, &self.mode_a_tilde.adjoint()), &all),
            on(&comm(&self.osc_a, &self.osc_a_tilde), &mask),
            on(&comm(&self.osc_a, &self.osc_a_tilde.adjoint()), &mask),
        ]
        .into_iter()
        .fold(0.0, f64::max);

        let j_plus_minus = on(
            &(&comm(&self.j_plus, &self.j_minus) + &(2.0 * &self.j3)),
            &mask,
        );
        let j3_ladder = on(&(&comm(&self.j3, &self.j_plus) - &self.j_plus), &mask).max(on(
            &(&comm(&self.j3, &self.j_minus) + &self.j_minus),
            &mask,
        ));

        let diff = &self.number_a - &self.number_a_tilde;
        let casimir = on(&(&self.casimir_sq - &(0.25 * &(&diff * &diff))), &mask);
        let h0_h_int = on(&comm(&self.h0, &self.h_int), &mask);

        let d = self.dim;
        let mut sector_closure = 0.0f64;
        for op in [&self.h_int, &self.j3] {
            for (r, c, v) in op.triplets() {
                let col_diag = c / d == c % d;
                let row_diag = r / d == r % d;
                if col_diag && !row_diag {
                    sector_closure = sector_closure.max(v.norm());
                }
            }
        }

        AlgebraResiduals {
            ccr,
            cross,
            j_plus_minus,
            j3_ladder,
            casimir,
            h0_h_int,
            sector_closure,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn ws(dim: usize) -> FockWorkspace {
        FockWorkspace::build(dim, 1.3, 0.7).unwrap()
    }

    #[test]
    fn build_rejects_tiny_dims() {
        assert!(FockWorkspace::build(3, 1.0, 1.0).is_err());
        assert!(FockWorkspace::build(8, 0.0, 1.0).is_err());
        assert!(FockWorkspace::build(8, 1.0, -1.0).is_err());
    }

    #[test]
    fn lowering_matrix_elements() {
        let b = lowering(6);
        for n in 1..6 {
            assert_eq!(b.get(n - 1, n), re((n as f64).sqrt()));
        }
        assert_eq!(b.nnz(), 5);
    }

    #[test]
    fn algebra_holds_on_interior() {
        let r = ws(12).algebra_residuals();
        assert!(r.max() < 1e-12, "{r:?}");
    }

    #[test]
    fn hamiltonians_are_hermitian_and_h_int_is_imaginary() {
        let w = ws(8);
        assert_eq!(w.h0.hermiticity_defect(), 0.0);
        assert!(w.h_int.hermiticity_defect() < 1e-15);
        assert!(w.h_int.triplets().all(|(_, _, v)| v.re == 0.0));
    }

    #[test]
    fn memory_vector_examples() {
        let w = ws(40);
        assert_eq!(w.memory_vector(0.0).unwrap(), FockVector::vacuum(40));
        let v = w.memory_vector(1f64.asinh()).unwrap();
        assert_relative_eq!(w.occupation_a(&v), 1.0, epsilon = 1e-8);
        let v = w.memory_vector(0.6).unwrap();
        for n in 0..10 {
            assert_relative_eq!((v.get(n + 1, n + 1) / v.get(n, n)).re, -(0.6f64.tanh()), epsilon = 1e-14);
        }
        assert_eq!(v.off_diagonal_max(), 0.0);
    }

    #[test]
    fn memory_vector_refuses_out_of_budget() {
        let w = ws(8);
        assert!(matches!(w.memory_vector(2.0), Err(Error::TruncationBudget { .. })));
    }

    #[test]
    fn generator_route_matches_closed_form() {
        let w = ws(32);
        for theta in [0.0, 0.2, 0.5] {
            let a = w.memory_vector(theta).unwrap();
            let b = w.memory_vector_via_generator(theta).unwrap();
            assert_relative_eq!(oracle_overlap(&a, &b).unwrap(), 1.0, epsilon = 1e-12);
            let d: f64 = a.amplitudes().iter().zip(b.amplitudes()).map(|(x, y)| (x - y).norm_sqr()).sum();
            assert!(d.sqrt() < 1e-10);
        }
    }

    #[test]
    fn zero_time_evolution_is_identity() {
        let w = ws(16);
        let v = w.memory_vector(0.4).unwrap();
        assert_eq!(w.evolve_vector(&v, 0.0).unwrap(), v);
        assert!(w.evolve_vector(&v, -1.0).is_err());
    }

    #[test]
    fn h0_is_silent_on_memory_states() {
        let w = ws(16);
        let v = w.memory_vector(0.5).unwrap();
        assert!(w.h0_action_norm(&v) < 1e-15);
        let mut off = FockVector::zeros(16);
        off.set(2, 1, re(1.0));
        assert!(w.h0_action_norm(&off) > 1.0);
    }

    #[test]
    fn hole_relations_reject_degenerate_theta() {
        let w = ws(16);
        let v = w.state_vector(0.0).unwrap();
        assert!(matches!(w.check_hole_relations(&v, 0.0), Err(Error::DegenerateTheta { .. })));
    }

    #[test]
    fn squeeze_factorization_at_zero_is_exact() {
        let w = ws(16);
        let r = w.check_squeeze_factorization(0.0).unwrap();
        assert_eq!(r.residual, 0.0);
    }

    #[test]
    fn entropy_operator_degenerate_at_zero() {
        assert!(ws(8).entropy_operator(0.0).is_err());
        assert!(ws(8).entropy_rate_operator(0.0).is_err());
    }

    #[test]
    fn entropy_flow_rejects_small_theta_and_bad_steps() {
        let w = FockWorkspace::build(16, 1.0, 1.0).unwrap();
        assert!(matches!(w.check_entropy_flow(0.5, 0.5, 1e-3), Err(Error::DegenerateTheta { .. })));
        assert!(w.check_entropy_flow(0.5, 0.0, 1e-3).is_err());
    }
}
