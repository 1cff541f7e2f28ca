use faer::{c64, MatRef};

use crate::error::{Error, Result};
use crate::fock::FockBasis;
use crate::linalg::{self, CMat};

/// Relative tolerance for accepting a matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// A dense Hermitian matrix acting on a fixed-particle-number Fock space.
#[derive(Debug, Clone)]
pub struct HermitianOperator {
    particles: usize,
    modes: usize,
    matrix: CMat,
}

impl HermitianOperator {
    /// Wraps `matrix`, checking shape against the basis tag and Hermiticity.
    pub fn new(particles: usize, modes: usize, matrix: CMat) -> Result<Self> {
        let expected = FockBasis::dimension(particles, modes);
        if matrix.nrows() != expected || matrix.ncols() != expected {
            return Err(Error::Dimension {
                expected,
                got: matrix.nrows().max(matrix.ncols()),
            });
        }
        let residual = linalg::hermitian_residual(matrix.as_ref());
        if residual > HERMITIAN_TOL {
            return Err(Error::NotHermitian { residual });
        }
        Ok(Self {
            particles,
            modes,
            matrix,
        })
    }

    pub(crate) fn from_parts_unchecked(particles: usize, modes: usize, matrix: CMat) -> Self {
        debug_assert!(linalg::hermitian_residual(matrix.as_ref()) <= HERMITIAN_TOL);
        Self {
            particles,
            modes,
            matrix,
        }
    }

    pub fn for_basis(basis: &FockBasis, matrix: CMat) -> Result<Self> {
        Self::new(basis.particles(), basis.modes(), matrix)
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> MatRef<'_, c64> {
        self.matrix.as_ref()
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn same_space(&self, other: &Self) -> bool {
        self.particles == other.particles && self.modes == other.modes
    }

    fn check_same_space(&self, other: &Self) -> Result<()> {
        if self.same_space(other) {
            Ok(())
        } else {
            Err(Error::BasisMismatch(format!(
                "operators act on (N={}, M={}) and (N={}, M={})",
                self.particles, self.modes, other.particles, other.modes
            )))
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_space(other)?;
        Ok(Self::from_parts_unchecked(
            self.particles,
            self.modes,
            &self.matrix + &other.matrix,
        ))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_parts_unchecked(
            self.particles,
            self.modes,
            linalg::scaled(self.matrix.as_ref(), c64::new(s, 0.0)),
        )
    }

    /// Adds `shift` times the identity.
    pub fn shifted(&self, shift: f64) -> Self {
        let mut m = self.matrix.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += c64::new(shift, 0.0);
        }
        Self::from_parts_unchecked(self.particles, self.modes, m)
    }

    /// `⟨v|H|v⟩`, which is real for Hermitian `H`.
    pub fn expectation(&self, v: &[c64]) -> f64 {
        linalg::expectation(self.matrix.as_ref(), v).re
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.matrix[(i, i)].re).sum()
    }
}
