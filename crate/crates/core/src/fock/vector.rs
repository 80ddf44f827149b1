use super::sparse::C64;
use crate::error::{Error, Result};

/// Amplitudes over the two-oscillator basis `|n, ñ⟩`, `0 ≤ n, ñ < dim`, stored
/// row-major (`n * dim + ñ`), where `n` counts `A` quanta and `ñ` counts `Ã`
/// quanta.
#[derive(Clone, Debug, PartialEq)]
pub struct FockVector {
    dim: usize,
    amps: Vec<C64>,
}

impl FockVector {
    pub fn zeros(dim: usize) -> Self {
        FockVector {
            dim,
            amps: vec![C64::new(0.0, 0.0); dim * dim],
        }
    }

    /// The empty vacuum `|0, 0⟩`.
    pub fn vacuum(dim: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.amps[0] = C64::new(1.0, 0.0);
        v
    }

    pub fn from_amplitudes(dim: usize, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                left: amps.len(),
                right: dim * dim,
            });
        }
        Ok(FockVector { dim, amps })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn index(&self, n: usize, m: usize) -> usize {
        n * self.dim + m
    }

    pub fn get(&self, n: usize, m: usize) -> C64 {
        self.amps[self.index(n, m)]
    }

    pub fn set(&mut self, n: usize, m: usize, value: C64) {
        let i = self.index(n, m);
        self.amps[i] = value;
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalized(mut self) -> Self {
        let n = self.norm();
        if n > 0.0 {
            self.amps.iter_mut().for_each(|a| *a /= n);
        }
        self
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &FockVector) -> Result<C64> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Largest amplitude off the diagonal `n = ñ`.
    pub fn off_diagonal_max(&self) -> f64 {
        let mut worst = 0.0f64;
        for n in 0..self.dim {
            for m in 0..self.dim {
                if n != m {
                    worst = worst.max(self.get(n, m).norm());
                }
            }
        }
        worst
    }

    /// Copies into a larger box, padding with zeros.
    pub fn embed(&self, dim: usize) -> Self {
        assert!(dim >= self.dim);
        let mut out = Self::zeros(dim);
        for n in 0..self.dim {
            for m in 0..self.dim {
                out.set(n, m, self.get(n, m));
            }
        }
        out
    }

    /// Restricts to a smaller box; returns the kept vector and the discarded norm².
    pub fn project(&self, dim: usize) -> (Self, f64) {
        assert!(dim <= self.dim);
        let mut out = Self::zeros(dim);
        let mut kept = 0.0;
        for n in 0..dim {
            for m in 0..dim {
                let a = self.get(n, m);
                kept += a.norm_sqr();
                out.set(n, m, a);
            }
        }
        (out, (self.norm_sqr() - kept).max(0.0))
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }
}

/// Normalised overlap `⟨u|v⟩/(‖u‖‖v‖)`; real for memory vectors.
pub fn oracle_overlap(u: &FockVector, v: &FockVector) -> Result<f64> {
    let ip = u.inner(v)?;
    Ok(ip.re / (u.norm() * v.norm()))
}
