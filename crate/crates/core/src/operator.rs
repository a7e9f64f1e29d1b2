//! Dense complex operators.
//!
//! [`HermitianOperator`] is the carrier for every Hamiltonian and observable in
//! the crate. Matrices with an identically zero imaginary part are diagonalized
//! with the real symmetric solver, which is several times faster than the
//! complex Hermitian one for the sizes the Dicke testbed reaches.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// Tolerance used when a builder asserts that its output is Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Dense square complex matrix together with a Hermiticity flag.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    matrix: CMatrix,
    hermitian: bool,
}

impl HermitianOperator {
    /// Wraps `matrix`, requiring it to be Hermitian to within `tol` entrywise.
    pub fn new(matrix: CMatrix, tol: f64) -> Result<Self> {
        check_square(&matrix, "HermitianOperator::new")?;
        let deviation = hermiticity_defect(&matrix);
        if deviation > tol {
            return Err(Error::NotHermitian {
                expected: "Hermitian",
                deviation,
            });
        }
        Ok(Self {
            matrix,
            hermitian: true,
        })
    }

    /// Wraps `matrix` without checks; the flag records what the caller asserts.
    pub fn from_parts(matrix: CMatrix, hermitian: bool) -> Self {
        Self { matrix, hermitian }
    }

    pub fn from_real(matrix: &DMatrix<f64>) -> Self {
        let hermitian = matrix.nrows() == matrix.ncols() && matrix == &matrix.transpose();
        Self {
            matrix: matrix.map(|x| C64::new(x, 0.0)),
            hermitian,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    /// Max entrywise |A - A†|.
    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(&self.matrix)
    }

    /// True when every entry has an exactly zero imaginary part.
    pub fn is_real(&self) -> bool {
        self.matrix.iter().all(|z| z.im == 0.0)
    }

    fn require_hermitian(&self) -> Result<()> {
        if self.hermitian {
            Ok(())
        } else {
            Err(Error::NotHermitian {
                expected: "flagged Hermitian",
                deviation: self.hermiticity_defect(),
            })
        }
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        self.require_hermitian()?;
        let mut values: Vec<f64> = if self.is_real() {
            let m = symmetrized_real(&self.matrix);
            m.symmetric_eigenvalues().iter().copied().collect()
        } else {
            let m = symmetrized(&self.matrix);
            SymmetricEigen::new(m).eigenvalues.iter().copied().collect()
        };
        values.sort_by(f64::total_cmp);
        Ok(values)
    }

    /// Eigenvalues (ascending) and the matching orthonormal eigenvectors as columns.
    pub fn eigh(&self) -> Result<(Vec<f64>, CMatrix)> {
        self.require_hermitian()?;
        let (values, vectors): (Vec<f64>, CMatrix) = if self.is_real() {
            let eig = SymmetricEigen::new(symmetrized_real(&self.matrix));
            (
                eig.eigenvalues.iter().copied().collect(),
                eig.eigenvectors.map(|x| C64::new(x, 0.0)),
            )
        } else {
            let eig = SymmetricEigen::new(symmetrized(&self.matrix));
            (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
        };
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let sorted_values = order.iter().map(|&i| values[i]).collect();
        let sorted_vectors = CMatrix::from_fn(vectors.nrows(), vectors.ncols(), |r, c| {
            vectors[(r, order[c])]
        });
        Ok((sorted_values, sorted_vectors))
    }
}

fn check_square(m: &CMatrix, context: &'static str) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            context,
            expected: m.nrows(),
            got: m.ncols(),
        });
    }
    Ok(())
}

fn symmetrized(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

fn symmetrized_real(m: &CMatrix) -> DMatrix<f64> {
    let re = m.map(|z| z.re);
    (&re + re.transpose()) * 0.5
}

/// Max entrywise |A - A†|; `f64::INFINITY` for non-square input.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    if m.nrows() != m.ncols() {
        return f64::INFINITY;
    }
    max_abs(&(m - m.adjoint()))
}

/// Max entrywise |A + A†|; zero for an anti-Hermitian matrix.
pub fn anti_hermiticity_defect(m: &CMatrix) -> f64 {
    if m.nrows() != m.ncols() {
        return f64::INFINITY;
    }
    max_abs(&(m + m.adjoint()))
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Kronecker product `a ⊗ b`; the first factor is the slow index.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn real_scalar(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Entrywise real matrix lifted to complex.
pub fn complexify(m: &DMatrix<f64>) -> CMatrix {
    m.map(|x| C64::new(x, 0.0))
}
