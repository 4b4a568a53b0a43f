//! Sparse operators on the system Hilbert space and the real coordinate
//! system used for Hermitian matrices.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

/// Sparse d×d complex matrix with row and column access.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOp {
    dim: usize,
    entries: Vec<(usize, usize, Complex64)>,
    by_col: Vec<Vec<(usize, Complex64)>>,
    by_row: Vec<Vec<(usize, Complex64)>>,
}

impl SparseOp {
    /// Build from (row, col, value) triplets; duplicates are summed and zeros dropped.
    pub fn from_triplets(dim: usize, triplets: impl IntoIterator<Item = (usize, usize, Complex64)>) -> Self {
        let mut merged: std::collections::BTreeMap<(usize, usize), Complex64> = Default::default();
        for (r, c, v) in triplets {
            assert!(r < dim && c < dim, "operator entry ({r},{c}) outside dimension {dim}");
            *merged.entry((r, c)).or_default() += v;
        }
        let entries: Vec<_> = merged
            .into_iter()
            .filter(|(_, v)| *v != Complex64::new(0.0, 0.0))
            .map(|((r, c), v)| (r, c, v))
            .collect();
        let mut by_col = vec![vec![]; dim];
        let mut by_row = vec![vec![]; dim];
        for &(r, c, v) in &entries {
            by_col[c].push((r, v));
            by_row[r].push((c, v));
        }
        Self {
            dim,
            entries,
            by_col,
            by_row,
        }
    }

    pub fn from_dense(m: &Array2<Complex64>) -> Self {
        let dim = m.nrows();
        Self::from_triplets(dim, m.indexed_iter().map(|((r, c), v)| (r, c, *v)))
    }

    /// |to⟩⟨from|.
    pub fn transition(dim: usize, to: usize, from: usize) -> Self {
        Self::from_triplets(dim, [(to, from, Complex64::new(1.0, 0.0))])
    }

    /// Σ w_i |i⟩⟨i|.
    pub fn diagonal(dim: usize, weights: impl IntoIterator<Item = (usize, f64)>) -> Self {
        Self::from_triplets(dim, weights.into_iter().map(|(i, w)| (i, i, Complex64::new(w, 0.0))))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(usize, usize, Complex64)] {
        &self.entries
    }

    pub fn col(&self, c: usize) -> &[(usize, Complex64)] {
        &self.by_col[c]
    }

    pub fn row(&self, r: usize) -> &[(usize, Complex64)] {
        &self.by_row[r]
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.by_row[r]
            .iter()
            .find(|(cc, _)| *cc == c)
            .map(|(_, v)| *v)
            .unwrap_or_default()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(self.dim, self.entries.iter().map(|&(r, c, v)| (c, r, v.conj())))
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        Self::from_triplets(self.dim, self.entries.iter().map(|&(r, c, v)| (r, c, v * s)))
    }

    pub fn matmul(&self, other: &SparseOp) -> Self {
        let mut t = vec![];
        for &(r, k, v) in &self.entries {
            for &(c, w) in other.row(k) {
                t.push((r, c, v * w));
            }
        }
        Self::from_triplets(self.dim, t)
    }

    pub fn to_dense(&self) -> Array2<Complex64> {
        let mut m = Array2::zeros((self.dim, self.dim));
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v;
        }
        m
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.entries
            .iter()
            .all(|&(r, c, v)| (v - self.get(c, r).conj()).norm() <= tol * v.norm().max(1.0))
    }
}

/// Real coordinates of a Hermitian d×d matrix: the d diagonal entries,
/// then Re and Im of each upper-triangle element.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HermitianCoords {
    pub dim: usize,
}

impl HermitianCoords {
    pub fn new(dim: usize) -> Self {
        Self { dim }
    }

    pub fn len(&self) -> usize {
        self.dim * self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.dim == 0
    }

    fn pair(&self, a: usize, b: usize) -> usize {
        debug_assert!(a < b);
        a * self.dim - a * (a + 1) / 2 + (b - a - 1)
    }

    pub fn diag(&self, a: usize) -> usize {
        a
    }

    /// Coordinates of Re ρ_ab and Im ρ_ab for a < b.
    pub fn re_im(&self, a: usize, b: usize) -> (usize, usize) {
        let p = self.dim + 2 * self.pair(a, b);
        (p, p + 1)
    }

    /// (a, b, is_imaginary) for a coordinate index; diagonal coordinates
    /// report a == b.
    pub fn describe(&self, idx: usize) -> (usize, usize, bool) {
        if idx < self.dim {
            return (idx, idx, false);
        }
        let p = (idx - self.dim) / 2;
        let im = (idx - self.dim) % 2 == 1;
        let mut a = 0;
        let mut start = 0;
        while start + (self.dim - a - 1) <= p {
            start += self.dim - a - 1;
            a += 1;
        }
        (a, a + 1 + (p - start), im)
    }

    /// Add `v` to element (r, c) of a Hermitian matrix expressed in coordinates.
    /// Only r ≤ c is meaningful; callers fold the lower triangle themselves.
    pub(crate) fn accumulate(&self, out: &mut impl FnMut(usize, f64), r: usize, c: usize, v: Complex64) {
        if r == c {
            out(self.diag(r), v.re);
        } else {
            let (re, im) = self.re_im(r, c);
            out(re, v.re);
            out(im, v.im);
        }
    }

    pub fn to_coords(&self, m: &Array2<Complex64>) -> Array1<f64> {
        let d = self.dim;
        let mut x = Array1::zeros(d * d);
        for a in 0..d {
            x[a] = m[(a, a)].re;
            for b in a + 1..d {
                let (re, im) = self.re_im(a, b);
                x[re] = m[(a, b)].re;
                x[im] = m[(a, b)].im;
            }
        }
        x
    }

    pub fn from_coords(&self, x: &[f64]) -> Array2<Complex64> {
        let d = self.dim;
        let mut m = Array2::zeros((d, d));
        for a in 0..d {
            m[(a, a)] = Complex64::new(x[a], 0.0);
            for b in a + 1..d {
                let (re, im) = self.re_im(a, b);
                let v = Complex64::new(x[re], x[im]);
                m[(a, b)] = v;
                m[(b, a)] = v.conj();
            }
        }
        m
    }

    /// Element (r, c) of the Hermitian matrix with coordinates `x`.
    pub fn element(&self, x: &[f64], r: usize, c: usize) -> Complex64 {
        use std::cmp::Ordering::*;
        match r.cmp(&c) {
            Equal => Complex64::new(x[r], 0.0),
            Less => {
                let (re, im) = self.re_im(r, c);
                Complex64::new(x[re], x[im])
            }
            Greater => {
                let (re, im) = self.re_im(c, r);
                Complex64::new(x[re], -x[im])
            }
        }
    }
}
