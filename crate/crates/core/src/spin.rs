//! Collective angular momentum in fixed total-spin representations and the
//! total-spin sector decomposition of N two-level systems.
//!
//! Half-integers are carried as twice their value so parity checks are exact.
//! Basis states are ordered by descending magnetic number, `m = S, S-1, ..., -S`;
//! every other module builds on that ordering.

use std::fmt;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::operator::{CMatrix, C64};

/// A non-negative half-integer stored as twice its value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HalfInt(u32);

impl HalfInt {
    pub fn from_twice(twice: i64) -> Result<Self> {
        if twice < 0 || twice > u32::MAX as i64 {
            return Err(Error::InvalidSpin(twice));
        }
        Ok(Self(twice as u32))
    }

    /// Accepts values whose double is a non-negative integer.
    pub fn from_f64(value: f64) -> Result<Self> {
        let twice = 2.0 * value;
        if !twice.is_finite() || twice.fract() != 0.0 {
            return Err(Error::InvalidParameter {
                name: "S",
                value,
                reason: "2S must be an integer",
            });
        }
        Self::from_twice(twice as i64)
    }

    pub fn twice(self) -> u32 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    /// Number of states `2S + 1`.
    pub fn multiplicity(self) -> usize {
        self.0 as usize + 1
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_multiple_of(2) {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// One total-spin sector of N spin-1/2 particles.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinSector {
    pub spin: HalfInt,
    pub n: usize,
    pub dim: usize,
    /// Natural log of the number of times the sector appears, ln Ω(S, N).
    pub log_degeneracy: f64,
}

impl SpinSector {
    pub fn new(spin: HalfInt, n: usize) -> Result<Self> {
        let log_degeneracy = log_degeneracy(spin, n)?;
        Ok(Self {
            spin,
            n,
            dim: spin.multiplicity(),
            log_degeneracy,
        })
    }

    pub fn s(&self) -> f64 {
        self.spin.value()
    }
}

/// ln Ω(S, N) where Ω(S, N) = N! (2S+1) / ((N/2 - S)! (N/2 + S + 1)!).
///
/// Evaluated as ln C(N, N/2 - S) + ln(2S+1) - ln(N/2 + S + 1) so the fully
/// symmetric sector gives exactly zero.
pub fn log_degeneracy(spin: HalfInt, n: usize) -> Result<f64> {
    validate_sector(spin, n)?;
    let twice = spin.twice() as usize;
    let k = (n - twice) / 2; // N/2 - S
    let ln_binom = if k == 0 {
        0.0
    } else {
        ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
    };
    let upper = (n + twice) as f64 / 2.0 + 1.0; // N/2 + S + 1
    Ok(ln_binom + ((twice + 1) as f64).ln() - upper.ln())
}

fn validate_sector(spin: HalfInt, n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidSector {
            s: spin.value(),
            n,
            reason: "N must be at least 1",
        });
    }
    let twice = spin.twice() as usize;
    if twice > n {
        return Err(Error::InvalidSector {
            s: spin.value(),
            n,
            reason: "S exceeds N/2",
        });
    }
    if !(n - twice).is_multiple_of(2) {
        return Err(Error::InvalidSector {
            s: spin.value(),
            n,
            reason: "2S and N must have equal parity",
        });
    }
    Ok(())
}

/// All sectors S = s0, s0+1, ..., N/2 in ascending order.
pub fn sector_list(n: usize) -> Result<Vec<SpinSector>> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "N",
            value: 0.0,
            reason: "must be at least 1",
        });
    }
    (n % 2..=n)
        .step_by(2)
        .map(|twice| SpinSector::new(HalfInt(twice as u32), n))
        .collect()
}

/// Angular-momentum matrices of one spin-S irrep (ħ = 1).
#[derive(Clone, Debug)]
pub struct SpinOperators {
    pub spin: HalfInt,
    pub sx: CMatrix,
    pub sy: CMatrix,
    pub sz: CMatrix,
    pub sp: CMatrix,
    pub sm: CMatrix,
}

impl SpinOperators {
    pub fn dim(&self) -> usize {
        self.spin.multiplicity()
    }

    /// Magnetic number of basis index `k`.
    pub fn m_of(&self, k: usize) -> f64 {
        self.spin.value() - k as f64
    }
}

pub fn build_spin_operators(spin: HalfInt) -> SpinOperators {
    let dim = spin.multiplicity();
    let s = spin.value();
    let m = |k: usize| s - k as f64;

    let mut sz = CMatrix::zeros(dim, dim);
    let mut sp = CMatrix::zeros(dim, dim);
    for k in 0..dim {
        sz[(k, k)] = C64::new(m(k), 0.0);
        if k > 0 {
            // S+ |m> = sqrt(S(S+1) - m(m+1)) |m+1>, and m+1 sits one index up.
            let mk = m(k);
            sp[(k - 1, k)] = C64::new((s * (s + 1.0) - mk * (mk + 1.0)).sqrt(), 0.0);
        }
    }
    let sm = sp.adjoint();
    let sx = (&sp + &sm) * C64::new(0.5, 0.0);
    let sy = (&sp - &sm) * C64::new(0.0, -0.5);
    SpinOperators {
        spin,
        sx,
        sy,
        sz,
        sp,
        sm,
    }
}

/// Convenience wrapper taking S as a float.
pub fn spin_operators(s: f64) -> Result<SpinOperators> {
    Ok(build_spin_operators(HalfInt::from_f64(s)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{commutator, max_abs};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn spin_half_is_pauli_over_two() {
        let ops = spin_operators(0.5).unwrap();
        let sx = CMatrix::from_row_slice(2, 2, &[c(0.0), c(0.5), c(0.5), c(0.0)]);
        let sz = CMatrix::from_row_slice(2, 2, &[c(0.5), c(0.0), c(0.0), c(-0.5)]);
        assert!(max_abs(&(ops.sx - sx)) < 1e-15);
        assert!(max_abs(&(ops.sz - sz)) < 1e-15);
    }

    #[test]
    fn spin_one_sz_diagonal() {
        let ops = spin_operators(1.0).unwrap();
        let diag: Vec<f64> = (0..3).map(|k| ops.sz[(k, k)].re).collect();
        assert_eq!(diag, vec![1.0, 0.0, -1.0]);
    }

    #[test]
    fn spin_three_halves_commutator_by_direct_multiplication() {
        let ops = spin_operators(1.5).unwrap();
        // Oracle: explicit triple loop, independent of nalgebra's product.
        let d = ops.dim();
        let mut comm = CMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..d {
                    acc += ops.sx[(i, k)] * ops.sy[(k, j)] - ops.sy[(i, k)] * ops.sx[(k, j)];
                }
                comm[(i, j)] = acc;
            }
        }
        let target = &ops.sz * C64::new(0.0, 1.0);
        assert!(max_abs(&(comm - target)) < 1e-12);
    }

    #[test]
    fn ladder_relations() {
        let ops = spin_operators(2.5).unwrap();
        let sp = &ops.sx + &ops.sy * C64::new(0.0, 1.0);
        assert!(max_abs(&(sp - &ops.sp)) < 1e-14);
        assert!(max_abs(&(ops.sp.adjoint() - &ops.sm)) == 0.0);
        let c = commutator(&ops.sz, &ops.sp);
        assert!(max_abs(&(c - &ops.sp)) < 1e-12);
    }

    #[test]
    fn rejects_bad_spin() {
        assert!(HalfInt::from_twice(-1).is_err());
        assert!(HalfInt::from_f64(0.3).is_err());
        assert!(HalfInt::from_f64(-0.5).is_err());
        assert_eq!(HalfInt::from_f64(1.5).unwrap().twice(), 3);
    }

    #[test]
    fn degeneracy_of_two_spins() {
        // 1/2 ⊗ 1/2 = 0 ⊕ 1, each once.
        let s0 = log_degeneracy(HalfInt(0), 2).unwrap();
        let s1 = log_degeneracy(HalfInt(2), 2).unwrap();
        assert!(s0.abs() < 1e-14 && s1.abs() < 1e-14);
    }

    #[test]
    fn symmetric_sector_is_unique() {
        for n in [1usize, 2, 7, 100, 10_000] {
            assert_eq!(log_degeneracy(HalfInt(n as u32), n).unwrap(), 0.0);
        }
    }

    #[test]
    fn degeneracy_rejects_invalid_pairs() {
        assert!(log_degeneracy(HalfInt(4), 2).is_err());
        assert!(log_degeneracy(HalfInt(1), 2).is_err());
        assert!(log_degeneracy(HalfInt(0), 0).is_err());
    }

    #[test]
    fn degeneracy_large_n_is_finite() {
        let ld = log_degeneracy(HalfInt(0), 20_000).unwrap();
        assert!(ld.is_finite() && ld > 1000.0);
    }

    #[test]
    fn sector_lists() {
        let two: Vec<f64> = sector_list(2).unwrap().iter().map(|s| s.s()).collect();
        assert_eq!(two, vec![0.0, 1.0]);
        let three: Vec<f64> = sector_list(3).unwrap().iter().map(|s| s.s()).collect();
        assert_eq!(three, vec![0.5, 1.5]);
        let hundred = sector_list(100).unwrap();
        assert_eq!(hundred.len(), 51);
        assert_eq!(hundred[0].s(), 0.0);
        assert_eq!(hundred[50].s(), 50.0);
        assert!(sector_list(0).is_err());
    }

    #[test]
    fn display_half_integers() {
        assert_eq!(HalfInt(3).to_string(), "3/2");
        assert_eq!(HalfInt(4).to_string(), "2");
    }
}
