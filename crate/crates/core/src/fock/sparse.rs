//! Compressed-sparse-row complex matrices, just enough for operator algebra on
//! a truncated two-oscillator space.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

pub type C64 = Complex64;

#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<C64>,
}

impl SparseMatrix {
    pub fn zeros(n: usize) -> Self {
        SparseMatrix {
            n,
            indptr: vec![0; n + 1],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![C64::new(1.0, 0.0); n])
    }

    pub fn diagonal(diag: &[C64]) -> Self {
        Self::from_triplets(diag.len(), diag.iter().enumerate().map(|(i, &v)| (i, i, v)))
    }

    /// Builds an `n × n` matrix; duplicate entries are summed, exact zeros dropped.
    pub fn from_triplets(n: usize, triplets: impl IntoIterator<Item = (usize, usize, C64)>) -> Self {
        let mut t: Vec<(usize, usize, C64)> = triplets.into_iter().collect();
        t.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0usize; n + 1];
        let mut indices = Vec::with_capacity(t.len());
        let mut values: Vec<C64> = Vec::with_capacity(t.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in t {
            assert!(r < n && c < n, "entry ({r}, {c}) outside {n}x{n}");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                values.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..n {
            indptr[r + 1] += indptr[r];
        }
        SparseMatrix { n, indptr, indices, values }.pruned()
    }

    fn pruned(self) -> Self {
        if self.values.iter().all(|v| *v != C64::new(0.0, 0.0)) {
            return self;
        }
        let n = self.n;
        Self::from_triplets(n, self.triplets().filter(|(_, _, v)| *v != C64::new(0.0, 0.0)))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let span = self.indptr[r]..self.indptr[r + 1];
        self.indices[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.n).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let span = self.indptr[r]..self.indptr[r + 1];
        match self.indices[span.clone()].binary_search(&c) {
            Ok(pos) => self.values[span.start + pos],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(self.n, self.triplets().map(|(r, c, v)| (c, r, v.conj())))
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out.pruned()
    }

    pub fn kron(a: &Self, b: &Self) -> Self {
        let n = a.n * b.n;
        Self::from_triplets(
            n,
            a.triplets().flat_map(|(ra, ca, va)| {
                b.triplets()
                    .map(move |(rb, cb, vb)| (ra * b.n + rb, ca * b.n + cb, va * vb))
            }),
        )
    }

    /// `y = M x`.
    pub fn matvec_into(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.indptr[r]..self.indptr[r + 1] {
                acc += self.values[k] * x[self.indices[k]];
            }
            *out = acc;
        }
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.n];
        self.matvec_into(x, &mut y);
        y
    }

    /// `⟨x|M|x⟩`.
    pub fn expectation(&self, x: &[C64]) -> C64 {
        self.matvec(x)
            .iter()
            .zip(x)
            .map(|(mx, xi)| xi.conj() * mx)
            .sum()
    }

    /// Largest column sum of absolute values.
    pub fn norm1(&self) -> f64 {
        let mut cols = vec![0.0f64; self.n];
        for (c, v) in self.indices.iter().zip(&self.values) {
            cols[*c] += v.norm();
        }
        cols.into_iter().fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest `|M_rc|` over columns `c` where `keep[c]` holds.
    pub fn max_abs_in_columns(&self, keep: &[bool]) -> f64 {
        assert_eq!(keep.len(), self.n);
        self.indices
            .iter()
            .zip(&self.values)
            .filter(|(c, _)| keep[**c])
            .map(|(_, v)| v.norm())
            .fold(0.0, f64::max)
    }

    /// `max |M − M†|`.
    pub fn hermiticity_defect(&self) -> f64 {
        (self - &self.adjoint()).max_abs()
    }

    /// `[A, B] = AB − BA`.
    pub fn commutator(a: &Self, b: &Self) -> Self {
        &(a * b) - &(b * a)
    }
}

impl Add for &SparseMatrix {
    type Output = SparseMatrix;
    fn add(self, rhs: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.n, rhs.n);
        SparseMatrix::from_triplets(self.n, self.triplets().chain(rhs.triplets()))
    }
}

impl Sub for &SparseMatrix {
    type Output = SparseMatrix;
    fn sub(self, rhs: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.n, rhs.n);
        SparseMatrix::from_triplets(
            self.n,
            self.triplets().chain(rhs.triplets().map(|(r, c, v)| (r, c, -v))),
        )
    }
}

impl Neg for &SparseMatrix {
    type Output = SparseMatrix;
    fn neg(self) -> SparseMatrix {
        self.scale(C64::new(-1.0, 0.0))
    }
}

impl Mul for &SparseMatrix {
    type Output = SparseMatrix;
    /// Row-by-row (Gustavson) product.
    fn mul(self, rhs: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.n, rhs.n);
        let n = self.n;
        let mut acc = vec![C64::new(0.0, 0.0); n];
        let mut seen = vec![usize::MAX; n];
        let mut cols: Vec<usize> = Vec::new();
        let mut triplets = Vec::new();
        for r in 0..n {
            cols.clear();
            for (k, a) in self.row(r) {
                for (c, b) in rhs.row(k) {
                    if seen[c] != r {
                        seen[c] = r;
                        acc[c] = C64::new(0.0, 0.0);
                        cols.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            for &c in &cols {
                triplets.push((r, c, acc[c]));
            }
        }
        SparseMatrix::from_triplets(n, triplets)
    }
}

impl Mul<&SparseMatrix> for C64 {
    type Output = SparseMatrix;
    fn mul(self, rhs: &SparseMatrix) -> SparseMatrix {
        rhs.scale(self)
    }
}

impl Mul<&SparseMatrix> for f64 {
    type Output = SparseMatrix;
    fn mul(self, rhs: &SparseMatrix) -> SparseMatrix {
        rhs.scale(C64::new(self, 0.0))
    }
}
