//! Action of a matrix exponential on a vector, `exp(s·M) v`, by scaled Taylor
//! series. The step count is chosen from `|s|·‖M‖₁` so each step's series has
//! argument norm at most [`STEP_NORM`]; terms are summed until they fall
//! below machine precision relative to the running sum.

use super::sparse::{SparseMatrix, C64};
use crate::error::{Error, Result};

const STEP_NORM: f64 = 4.0;
const MAX_TERMS: usize = 80;
const MAX_STEPS: usize = 1_000_000;
const TERM_TOL: f64 = 1e-17;

pub fn expm_action(m: &SparseMatrix, s: C64, v: &[C64]) -> Result<Vec<C64>> {
    let norm = s.norm() * m.norm1();
    let mut out = v.to_vec();
    if norm == 0.0 {
        return Ok(out);
    }
    let steps = (norm / STEP_NORM).ceil() as usize;
    if steps > MAX_STEPS {
        return Err(Error::NonConvergence {
            what: "scaling steps",
            cap: MAX_STEPS,
        });
    }
    let h = s / steps as f64;
    let mut term = vec![C64::new(0.0, 0.0); v.len()];
    let mut next = vec![C64::new(0.0, 0.0); v.len()];
    for _ in 0..steps {
        term.copy_from_slice(&out);
        let mut quiet = 0;
        let mut converged = false;
        for k in 1..=MAX_TERMS {
            m.matvec_into(&term, &mut next);
            let f = h / k as f64;
            let mut term_max = 0.0f64;
            let mut sum_max = 0.0f64;
            for ((t, n), o) in term.iter_mut().zip(&next).zip(out.iter_mut()) {
                *t = f * n;
                *o += *t;
                term_max = term_max.max(t.norm());
                sum_max = sum_max.max(o.norm());
            }
            // two consecutive negligible terms guard against an accidental zero
            if term_max <= TERM_TOL * sum_max {
                quiet += 1;
                if quiet == 2 {
                    converged = true;
                    break;
                }
            } else {
                quiet = 0;
            }
        }
        if !converged {
            return Err(Error::NonConvergence {
                what: "series terms",
                cap: MAX_TERMS,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_generator() {
        // exp(φ [[0,-1],[1,0]]) e0 = (cos φ, sin φ)
        let g = SparseMatrix::from_triplets(2, [(0, 1, C64::new(-1.0, 0.0)), (1, 0, C64::new(1.0, 0.0))]);
        for phi in [0.0, 0.3, 2.0, 37.5] {
            let v = expm_action(&g, C64::new(phi, 0.0), &[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]).unwrap();
            assert!((v[0].re - f64::cos(phi)).abs() < 1e-13);
            assert!((v[1].re - f64::sin(phi)).abs() < 1e-13);
        }
    }

    #[test]
    fn diagonal_phase() {
        let d = SparseMatrix::diagonal(&[C64::new(1.0, 0.0), C64::new(-2.0, 0.0)]);
        let v = expm_action(&d, C64::new(0.0, 1.5), &[C64::new(1.0, 0.0), C64::new(1.0, 0.0)]).unwrap();
        assert!((v[0] - C64::from_polar(1.0, 1.5)).norm() < 1e-14);
        assert!((v[1] - C64::from_polar(1.0, -3.0)).norm() < 1e-14);
    }

    #[test]
    fn absurd_norm_is_refused() {
        let g = SparseMatrix::from_triplets(1, [(0, 0, C64::new(1.0, 0.0))]);
        assert!(matches!(
            expm_action(&g, C64::new(0.0, 1e9), &[C64::new(1.0, 0.0)]),
            Err(Error::NonConvergence { .. })
        ));
    }
}
