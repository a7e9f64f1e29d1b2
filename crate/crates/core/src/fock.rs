//! Truncated single-mode Fock space and hyperbolic functions of anti-Hermitian
//! boson operators.
//!
//! Truncation leaves `[a, a†]` wrong in the last row and column only. The
//! hyperbolic functions of a truncated generator are accurate on the low-lying
//! levels; callers should not trust the top quarter of the Fock ladder.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::operator::{anti_hermiticity_defect, CMatrix, HermitianOperator, C64};

/// Ladder operators on occupations `0..=cutoff`.
#[derive(Clone, Debug)]
pub struct FockOperators {
    pub cutoff: usize,
    pub a: CMatrix,
    pub a_dag: CMatrix,
    pub n: CMatrix,
}

impl FockOperators {
    pub fn dim(&self) -> usize {
        self.cutoff + 1
    }
}

pub fn build_fock(cutoff: usize) -> Result<FockOperators> {
    if cutoff < 1 {
        return Err(Error::InvalidParameter {
            name: "N_ph",
            value: cutoff as f64,
            reason: "boson cutoff must be at least 1",
        });
    }
    let dim = cutoff + 1;
    let mut a = CMatrix::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    let a_dag = a.adjoint();
    let n = CMatrix::from_diagonal(&DVector::from_fn(dim, |k, _| C64::new(k as f64, 0.0)));
    Ok(FockOperators {
        cutoff,
        a,
        a_dag,
        n,
    })
}

/// Returns `(cosh α, sinh α)` for an anti-Hermitian `α`.
///
/// `iα` is Hermitian, so with `iα = V diag(h) V†` one has
/// `cosh α = V diag(cos h) V†` and `sinh α = V diag(-i sin h) V†`.
/// A real input (real antisymmetric generator) yields real outputs.
pub fn cosh_sinh_of(alpha: &CMatrix) -> Result<(HermitianOperator, CMatrix)> {
    if alpha.nrows() != alpha.ncols() {
        return Err(Error::DimensionMismatch {
            context: "cosh_sinh_of expects a square matrix",
            expected: alpha.nrows(),
            got: alpha.ncols(),
        });
    }
    let deviation = anti_hermiticity_defect(alpha);
    if deviation > 1e-12 {
        return Err(Error::NotHermitian {
            expected: "anti-Hermitian",
            deviation,
        });
    }
    let dim = alpha.nrows();
    let generator = HermitianOperator::from_parts(alpha * C64::new(0.0, 1.0), true);
    let (h, v) = generator.eigh()?;

    let cos = CMatrix::from_diagonal(&DVector::from_iterator(
        dim,
        h.iter().map(|x| C64::new(x.cos(), 0.0)),
    ));
    let sin = CMatrix::from_diagonal(&DVector::from_iterator(
        dim,
        h.iter().map(|x| C64::new(0.0, -x.sin())),
    ));
    let mut cosh = &v * cos * v.adjoint();
    let mut sinh = &v * sin * v.adjoint();

    if alpha.iter().all(|z| z.im == 0.0) {
        cosh.apply(|z| *z = C64::new(z.re, 0.0));
        sinh.apply(|z| *z = C64::new(z.re, 0.0));
    }
    // Exact symmetrization; removes roundoff asymmetry left by the products.
    let cosh = (&cosh + cosh.adjoint()) * C64::new(0.5, 0.0);
    let sinh = (&sinh - sinh.adjoint()) * C64::new(0.5, 0.0);
    Ok((HermitianOperator::from_parts(cosh, true), sinh))
}

/// Result of evaluating a scalar at two boson cutoffs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CutoffCheck {
    pub cutoff: usize,
    pub value: f64,
    pub refined_cutoff: usize,
    pub refined_value: f64,
}

impl CutoffCheck {
    pub fn difference(&self) -> f64 {
        (self.refined_value - self.value).abs()
    }
}

/// Evaluates `f` at `cutoff` and `cutoff + 5`, failing if they differ by more
/// than `tol`.
pub fn check_cutoff_convergence<F>(cutoff: usize, tol: f64, f: F) -> Result<CutoffCheck>
where
    F: Fn(usize) -> Result<f64>,
{
    let refined_cutoff = cutoff + 5;
    let check = CutoffCheck {
        cutoff,
        value: f(cutoff)?,
        refined_cutoff,
        refined_value: f(refined_cutoff)?,
    };
    if check.difference().is_nan() || check.difference() > tol {
        return Err(Error::NotConverged(format!(
            "value changes by {:e} between cutoffs {} and {} (tolerance {:e})",
            check.difference(),
            cutoff,
            refined_cutoff,
            tol
        )));
    }
    Ok(check)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{commutator, identity, max_abs};

    fn generator(zeta: f64, cutoff: usize) -> CMatrix {
        let f = build_fock(cutoff).unwrap();
        (&f.a_dag - &f.a) * C64::new(2.0 * zeta, 0.0)
    }

    #[test]
    fn cutoff_one_ladder() {
        let f = build_fock(1).unwrap();
        assert_eq!(f.a[(0, 1)], C64::new(1.0, 0.0));
        assert_eq!(f.a[(0, 0)], C64::new(0.0, 0.0));
        assert_eq!(f.a[(1, 0)], C64::new(0.0, 0.0));
        assert_eq!(f.a[(1, 1)], C64::new(0.0, 0.0));
        assert!(build_fock(0).is_err());
    }

    #[test]
    fn number_operator_is_a_dag_a() {
        let f = build_fock(2).unwrap();
        let n = &f.a_dag * &f.a;
        for k in 0..3 {
            assert!((n[(k, k)].re - k as f64).abs() < 1e-15);
        }
        assert!(max_abs(&(n - &f.n)) < 1e-15);
    }

    #[test]
    fn commutator_identity_below_top_level() {
        for cutoff in [1, 5, 30] {
            let f = build_fock(cutoff).unwrap();
            let c = commutator(&f.a, &f.a_dag);
            assert!((c[(0, 0)].re - 1.0).abs() < 1e-14);
            let lower = c.view((0, 0), (cutoff, cutoff)).into_owned();
            assert!(max_abs(&(lower - identity(cutoff))) < 1e-12);
        }
    }

    #[test]
    fn zero_generator_gives_identity_and_zero() {
        let (c, s) = cosh_sinh_of(&CMatrix::zeros(4, 4)).unwrap();
        assert!(max_abs(&(c.matrix() - identity(4))) < 1e-15);
        assert!(max_abs(&s) < 1e-15);
    }

    #[test]
    fn small_zeta_is_identity_plus_second_order() {
        let zeta = 1e-4;
        let (c, _) = cosh_sinh_of(&generator(zeta, 12)).unwrap();
        let dev = max_abs(&(c.matrix() - identity(13)));
        // cosh α - 1 = α²/2 + ..., with |α| ~ 2ζ√n.
        assert!(dev < 20.0 * zeta * zeta * 12.0, "deviation {dev}");
        assert!(dev > 0.0);
    }

    #[test]
    fn hyperbolic_identity_on_low_levels() {
        let (c, s) = cosh_sinh_of(&generator(0.3, 40)).unwrap();
        let lhs = c.matrix() * c.matrix() - &s * &s;
        let block = lhs.view((0, 0), (30, 30)).into_owned();
        assert!(max_abs(&(block - identity(30))) < 1e-8);
        // Same eigenbasis, so they commute.
        assert!(max_abs(&commutator(c.matrix(), &s)) < 1e-10);
    }

    #[test]
    fn matches_power_series_on_small_generator() {
        // Oracle: truncated Taylor series of cosh and sinh.
        let alpha = generator(0.2, 8);
        let mut term = identity(9);
        let mut cosh = identity(9);
        let mut sinh = CMatrix::zeros(9, 9);
        for k in 1..40 {
            term = &term * &alpha * C64::new(1.0 / k as f64, 0.0);
            if k % 2 == 0 {
                cosh += &term;
            } else {
                sinh += &term;
            }
        }
        let (c, s) = cosh_sinh_of(&alpha).unwrap();
        assert!(max_abs(&(c.matrix() - cosh)) < 1e-12);
        assert!(max_abs(&(s - sinh)) < 1e-12);
    }

    #[test]
    fn rejects_non_anti_hermitian() {
        let f = build_fock(3).unwrap();
        assert!(cosh_sinh_of(&(&f.a + &f.a_dag)).is_err());
    }

    #[test]
    fn cutoff_guard() {
        let ok = check_cutoff_convergence(10, 1e-6, |n| Ok(1.0 + (-2.0 * n as f64).exp())).unwrap();
        assert!(ok.difference() < 1e-6);
        assert!(check_cutoff_convergence(10, 1e-6, |n| Ok(n as f64)).is_err());
    }
}
