use super::operators::HermitianCoords;
use crate::{Error, Result};
use ndarray::Array2;
use num_complex::Complex64;

/// Density matrix ρ.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    pub matrix: Array2<Complex64>,
}

impl DensityOperator {
    pub fn new(matrix: Array2<Complex64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::Usage("density matrix must be square".into()));
        }
        Ok(Self { matrix })
    }

    /// |i⟩⟨i|.
    pub fn pure(dim: usize, index: usize) -> Result<Self> {
        Self::mixture(dim, &[(index, 1.0)])
    }

    /// Σ w_i |i⟩⟨i| with the weights normalised to unit trace.
    pub fn mixture(dim: usize, weights: &[(usize, f64)]) -> Result<Self> {
        let total: f64 = weights.iter().map(|(_, w)| w).sum();
        if !(total > 0.0) || weights.iter().any(|(_, w)| *w < 0.0) {
            return Err(Error::Usage("mixture weights must be non-negative with a positive sum".into()));
        }
        let mut m = Array2::zeros((dim, dim));
        for &(i, w) in weights {
            if i >= dim {
                return Err(Error::Usage(format!("basis index {i} out of range for dimension {dim}")));
            }
            m[(i, i)] += Complex64::new(w / total, 0.0);
        }
        Ok(Self { matrix: m })
    }

    pub fn from_coords(coords: HermitianCoords, x: &[f64]) -> Self {
        Self {
            matrix: coords.from_coords(x),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.diag().sum()
    }

    pub fn population(&self, i: usize) -> f64 {
        self.matrix[(i, i)].re
    }

    pub fn element(&self, r: usize, c: usize) -> Complex64 {
        self.matrix[(r, c)]
    }

    /// max |ρ − ρ†|.
    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut e: f64 = 0.0;
        for r in 0..d {
            for c in 0..d {
                e = e.max((self.matrix[(r, c)] - self.matrix[(c, r)].conj()).norm());
            }
        }
        e
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let d = self.dim();
        let m = nalgebra::DMatrix::from_fn(d, d, |r, c| self.matrix[(r, c)]);
        let w = nalgebra::SymmetricEigen::try_new(m, 1e-15, 10_000)
            .ok_or_else(|| Error::Numerical("eigendecomposition did not converge".into()))?
            .eigenvalues;
        Ok(w.iter().copied().collect())
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?.into_iter().fold(f64::INFINITY, f64::min))
    }
}
