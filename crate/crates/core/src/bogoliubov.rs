//! Bogoliubov transformations of quadratic boson Hamiltonians.
//!
//! A form with blocks `H1` (Hermitian) and `H2` (symmetric) stands for
//!
//! ```text
//! H = Σ H1_ij a_i† a_j + ½ Σ (H2_ij a_i† a_j† + h.c.)  =  ½ ψ† ℍ ψ - ½ Tr H1
//! ```
//!
//! with `ψ = (a, a†)` and `ℍ = [[H1, H2], [H2*, H1*]]`. The transformation
//! `ψ = T φ`, `φ = (b, b†)`, obeys `T† I₋ T = I₋` and brings `ℍ` to
//! `diag(ω̃, ω̃)`. It is built with Colpa's Cholesky method, which requires `ℍ`
//! to be positive definite.

use nalgebra::{Cholesky, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_non_negative, check_positive, Error, Result};
use crate::operator::{hermiticity_defect, max_abs, CMatrix, HermitianOperator, C64};

/// Closed-form single-mode transformation for `ω a†a + Δ (a + a†)²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingleModeBogo {
    pub delta: f64,
    pub omega: f64,
    /// λ = sqrt(1 + 4Δ/ω).
    pub lambda: f64,
    pub cosh_theta: f64,
    pub sinh_theta: f64,
    pub omega_tilde: f64,
}

pub fn single_mode(delta: f64, omega: f64) -> Result<SingleModeBogo> {
    check_non_negative("Delta", delta)?;
    check_positive("omega", omega)?;
    let lambda = (1.0 + 4.0 * delta / omega).sqrt();
    let root = lambda.sqrt();
    Ok(SingleModeBogo {
        delta,
        omega,
        lambda,
        cosh_theta: (lambda + 1.0) / (2.0 * root),
        sinh_theta: (lambda - 1.0) / (2.0 * root),
        omega_tilde: omega * lambda,
    })
}

/// Symmetry tolerance for the blocks of a [`QuadraticBosonForm`].
pub const FORM_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticBosonForm {
    h1: CMatrix,
    h2: CMatrix,
}

impl QuadraticBosonForm {
    pub fn new(h1: CMatrix, h2: CMatrix) -> Result<Self> {
        let m = h1.nrows();
        if m == 0 {
            return Err(Error::InvalidParameter {
                name: "M",
                value: 0.0,
                reason: "at least one mode is required",
            });
        }
        for (block, name) in [(&h1, "H1 must be M x M"), (&h2, "H2 must be M x M")] {
            if block.nrows() != m || block.ncols() != m {
                return Err(Error::DimensionMismatch {
                    context: name,
                    expected: m,
                    got: block.ncols().max(block.nrows()),
                });
            }
        }
        let d1 = hermiticity_defect(&h1);
        if d1 > FORM_TOL {
            return Err(Error::NotHermitian {
                expected: "Hermitian H1",
                deviation: d1,
            });
        }
        let d2 = max_abs(&(&h2 - h2.transpose()));
        if d2 > FORM_TOL {
            return Err(Error::NotHermitian {
                expected: "symmetric H2",
                deviation: d2,
            });
        }
        Ok(Self { h1, h2 })
    }

    /// The uniform-mode reduction of `ω a†a + Δ(a + a†)²`: H1 = ω + 2Δ, H2 = 2Δ.
    pub fn single_mode(delta: f64, omega: f64) -> Result<Self> {
        check_non_negative("Delta", delta)?;
        check_positive("omega", omega)?;
        Self::new(
            CMatrix::from_element(1, 1, C64::new(omega + 2.0 * delta, 0.0)),
            CMatrix::from_element(1, 1, C64::new(2.0 * delta, 0.0)),
        )
    }

    pub fn modes(&self) -> usize {
        self.h1.nrows()
    }

    pub fn h1(&self) -> &CMatrix {
        &self.h1
    }

    pub fn h2(&self) -> &CMatrix {
        &self.h2
    }

    /// ℍ = [[H1, H2], [H2*, H1*]].
    pub fn block(&self) -> CMatrix {
        let m = self.modes();
        let mut h = CMatrix::zeros(2 * m, 2 * m);
        h.view_mut((0, 0), (m, m)).copy_from(&self.h1);
        h.view_mut((0, m), (m, m)).copy_from(&self.h2);
        h.view_mut((m, 0), (m, m)).copy_from(&self.h2.conjugate());
        h.view_mut((m, m), (m, m)).copy_from(&self.h1.conjugate());
        h
    }
}

/// I₋ = diag(1, ..., 1, -1, ..., -1) of size 2M.
pub fn metric(m: usize) -> CMatrix {
    CMatrix::from_diagonal(&DVector::from_fn(2 * m, |i, _| {
        C64::new(if i < m { 1.0 } else { -1.0 }, 0.0)
    }))
}

#[derive(Clone, Debug, PartialEq)]
pub struct BogoTransform {
    /// ψ = T φ.
    pub t: CMatrix,
    /// `a = α b + β b†`.
    pub alpha: CMatrix,
    pub beta: CMatrix,
    /// Normal-mode frequencies in ascending order.
    pub omega_tilde: Vec<f64>,
    /// Ground-state energy ½Σω̃ - ½Tr H1.
    pub ground_energy: f64,
}

impl BogoTransform {
    pub fn modes(&self) -> usize {
        self.omega_tilde.len()
    }

    /// max |T† I₋ T - I₋|.
    pub fn pseudo_unitarity_residual(&self) -> f64 {
        let g = metric(self.modes());
        max_abs(&(self.t.adjoint() * &g * &self.t - g))
    }

    /// Largest off-diagonal entry of T† ℍ T.
    pub fn off_diagonal_residual(&self, form: &QuadraticBosonForm) -> f64 {
        let d = self.t.adjoint() * form.block() * &self.t;
        let mut worst: f64 = 0.0;
        for i in 0..d.nrows() {
            for j in 0..d.ncols() {
                if i != j {
                    worst = worst.max(d[(i, j)].norm());
                }
            }
        }
        worst
    }

    /// ℍ rebuilt from T and ω̃, using T⁻¹ = I₋ T† I₋.
    pub fn reconstruct(&self) -> CMatrix {
        let m = self.modes();
        let g = metric(m);
        let d = CMatrix::from_diagonal(&DVector::from_fn(2 * m, |i, _| {
            C64::new(self.omega_tilde[i % m], 0.0)
        }));
        &g * &self.t * d * self.t.adjoint() * &g
    }
}

/// Relative size below which an eigenvalue of ℍ counts as non-positive.
pub const STABILITY_TOL: f64 = 1e-9;

/// Diagonalizes a stable quadratic form.
///
/// Fails with [`Error::Unstable`] when ℍ is not positive definite.
pub fn diagonalize_quadratic(form: &QuadraticBosonForm) -> Result<BogoTransform> {
    let m = form.modes();
    let h = form.block();
    let h = (&h + h.adjoint()) * C64::new(0.5, 0.0);
    let spectrum = HermitianOperator::from_parts(h.clone(), true).eigenvalues()?;
    let scale = spectrum.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    if spectrum[0] <= STABILITY_TOL * scale {
        return Err(Error::Unstable(format!(
            "the Hamiltonian matrix has eigenvalue {:e}",
            spectrum[0]
        )));
    }
    let chol = Cholesky::new(h)
        .ok_or_else(|| Error::Unstable("the Hamiltonian matrix is not positive definite".into()))?;
    // ℍ = L L† = K† K with K = L†.
    let l = chol.l();
    let k_inv = l
        .adjoint()
        .try_inverse()
        .ok_or_else(|| Error::Unstable("singular Cholesky factor".into()))?;
    let g = metric(m);
    let w = l.adjoint() * &g * &l;
    let w = (&w + w.adjoint()) * C64::new(0.5, 0.0);
    let (values, vectors) = HermitianOperator::from_parts(w, true).eigh()?;

    // Sylvester: exactly M positive and M negative eigenvalues.
    let positive: Vec<usize> = (0..2 * m).filter(|&i| values[i] > 0.0).collect();
    if positive.len() != m {
        return Err(Error::Unstable(format!(
            "expected {m} positive normal-mode frequencies, found {}",
            positive.len()
        )));
    }

    let mut t = CMatrix::zeros(2 * m, 2 * m);
    let mut omega_tilde = Vec::with_capacity(m);
    for (j, &idx) in positive.iter().enumerate() {
        let e = values[idx];
        let mut col = &k_inv * vectors.column(idx) * C64::new(e.sqrt(), 0.0);
        // Fix the free phase: largest |α| entry real and positive.
        let pivot = (0..m)
            .max_by(|&a, &b| col[a].norm().total_cmp(&col[b].norm()).then(b.cmp(&a)))
            .unwrap_or(0);
        if col[pivot].norm() > 0.0 {
            let phase = col[pivot].conj() / col[pivot].norm();
            col *= phase;
        }
        for r in 0..m {
            t[(r, j)] = col[r];
            t[(r + m, j)] = col[r + m];
            // b† column is the swapped conjugate of the b column.
            t[(r, j + m)] = col[r + m].conj();
            t[(r + m, j + m)] = col[r].conj();
        }
        omega_tilde.push(e);
    }
    let alpha = t.view((0, 0), (m, m)).into_owned();
    let beta = t.view((0, m), (m, m)).into_owned();
    let trace: f64 = (0..m).map(|i| form.h1()[(i, i)].re).sum();
    let ground_energy = 0.5 * omega_tilde.iter().sum::<f64>() - 0.5 * trace;
    Ok(BogoTransform {
        t,
        alpha,
        beta,
        omega_tilde,
        ground_energy,
    })
}

/// Couplings to the new modes.
///
/// Given a linear coupling `Σ_κ A_κ u_κ(r) a_κ + h.c.`, returns the matrix whose
/// row κ, column r holds the coefficient of `b_κ`,
/// `Σ_κ' A_κ' (u_κ'(r) α_κ'κ + u*_κ'(r) β*_κ'κ)`.
/// `mode_samples` has one row per old mode and one column per sample point.
pub fn transform_couplings(
    bogo: &BogoTransform,
    amplitudes: &[f64],
    mode_samples: &CMatrix,
) -> Result<CMatrix> {
    let m = bogo.modes();
    if amplitudes.len() != m {
        return Err(Error::DimensionMismatch {
            context: "one amplitude per mode",
            expected: m,
            got: amplitudes.len(),
        });
    }
    if mode_samples.nrows() != m {
        return Err(Error::DimensionMismatch {
            context: "one row of mode samples per mode",
            expected: m,
            got: mode_samples.nrows(),
        });
    }
    let a = CMatrix::from_diagonal(&DVector::from_iterator(
        m,
        amplitudes.iter().map(|&x| C64::new(x, 0.0)),
    ));
    let weighted = &a * mode_samples;
    let out = bogo.alpha.transpose() * &weighted + bogo.beta.adjoint() * weighted.conjugate();
    Ok(out)
}
