use crate::error::{Error, Result};
use nalgebra::DMatrix;

/// Constant antisymmetric deformation matrix, entries in units of length².
///
/// Antisymmetry is enforced at construction: only the upper triangle is
/// accepted and the lower triangle is filled with the negated values.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaMatrix {
    dim: usize,
    entries: DMatrix<f64>,
}

impl ThetaMatrix {
    /// Builds a `dim`-dimensional antisymmetric matrix from upper-triangle
    /// entries `(mu, nu, value)` with `mu < nu < dim`.
    pub fn new(dim: usize, upper_entries: &[(usize, usize, f64)]) -> Result<Self> {
        if dim < 2 {
            return Err(Error::invalid(format!("theta dimension must be >= 2, got {dim}")));
        }
        let mut entries = DMatrix::zeros(dim, dim);
        for &(mu, nu, value) in upper_entries {
            if mu >= nu {
                return Err(Error::invalid(format!(
                    "theta entry ({mu},{nu}) is not strictly upper triangular"
                )));
            }
            if nu >= dim {
                return Err(Error::invalid(format!(
                    "theta entry ({mu},{nu}) out of range for dimension {dim}"
                )));
            }
            if !value.is_finite() {
                return Err(Error::invalid(format!(
                    "theta entry ({mu},{nu}) has non-finite value {value}"
                )));
            }
            entries[(mu, nu)] = value;
            entries[(nu, mu)] = -value;
        }
        Ok(Self { dim, entries })
    }

    /// The commutative case: all entries zero.
    pub fn zero(dim: usize) -> Self {
        Self::new(dim, &[]).expect("dim >= 2 checked by caller")
    }

    /// Rescales every entry by `factor` (used by deformation sweeps).
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            dim: self.dim,
            entries: &self.entries * factor,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, mu: usize, nu: usize) -> f64 {
        self.entries[(mu, nu)]
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// max over mu, nu of |theta[mu][nu]|.
    pub fn sup_norm(&self) -> f64 {
        self.entries.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&v| v == 0.0)
    }

    /// theta applied to a real vector: (theta k)_mu = sum_nu theta[mu][nu] k[nu].
    pub fn apply(&self, k: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|mu| (0..self.dim).map(|nu| self.entries[(mu, nu)] * k[nu]).sum())
            .collect()
    }

    /// Bilinear form a^T theta b.
    pub fn bilinear(&self, a: &[f64], b: &[f64]) -> f64 {
        let mut acc = 0.0;
        for mu in 0..self.dim {
            for nu in 0..self.dim {
                acc += a[mu] * self.entries[(mu, nu)] * b[nu];
            }
        }
        acc
    }
}
