//! Matter-only effective Hamiltonians, light observables recovered from matter
//! expectations, and the imaginary-time kernel left behind by the photons.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{check_positive, Error, Result};
use crate::models::DickeParams;
use crate::operator::{hermiticity_defect, CMatrix, HermitianOperator, C64, HERMITIAN_TOL};
use crate::spin::{build_spin_operators, SpinSector};
use crate::thermo::bose_occupation;

/// One photon mode coupled to matter through `-c (C b + C† b†)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingChannel {
    pub c: f64,
    pub omega_tilde: f64,
    pub op: CMatrix,
    pub hermitian: bool,
}

impl CouplingChannel {
    pub fn new(c: f64, omega_tilde: f64, op: CMatrix) -> Result<Self> {
        if !c.is_finite() {
            return Err(Error::InvalidParameter {
                name: "c",
                value: c,
                reason: "must be finite",
            });
        }
        check_positive("omega_tilde", omega_tilde)?;
        if op.nrows() != op.ncols() {
            return Err(Error::DimensionMismatch {
                context: "coupling operator must be square",
                expected: op.nrows(),
                got: op.ncols(),
            });
        }
        let hermitian = hermiticity_defect(&op) <= HERMITIAN_TOL;
        Ok(Self {
            c,
            omega_tilde,
            op,
            hermitian,
        })
    }

    /// c²/ω̃, the strength of the induced matter interaction.
    pub fn strength(&self) -> f64 {
        self.c * self.c / self.omega_tilde
    }
}

/// Dicke channel in one spin sector: c = 2g, ω̃ = ω_c, C = -S_x.
pub fn dicke_channel(p: &DickeParams, sector: &SpinSector) -> Result<CouplingChannel> {
    p.validate()?;
    let s = build_spin_operators(sector.spin);
    CouplingChannel::new(2.0 * p.g(), p.omega_c, -s.sx)
}

/// H_eff = H_M - Σ (c²/ω̃) C C†.
pub fn build_effective(
    h_m: &HermitianOperator,
    channels: &[CouplingChannel],
) -> Result<HermitianOperator> {
    let dim = h_m.dim();
    let mut h = h_m.matrix().clone();
    for ch in channels {
        if ch.op.nrows() != dim {
            return Err(Error::DimensionMismatch {
                context: "coupling operator and matter Hamiltonian",
                expected: dim,
                got: ch.op.nrows(),
            });
        }
        h -= &ch.op * ch.op.adjoint() * C64::new(ch.strength(), 0.0);
    }
    let h = (&h + h.adjoint()) * C64::new(0.5, 0.0);
    HermitianOperator::new(h, HERMITIAN_TOL)
}

/// `(⟨b + b†⟩, ⟨b - b†⟩)` from matter expectations of C and C†.
pub fn photon_quadrature_from_matter(
    ch: &CouplingChannel,
    expect_c: C64,
    expect_c_dag: C64,
) -> (C64, C64) {
    let r = ch.c / ch.omega_tilde;
    (
        -(expect_c + expect_c_dag) * r,
        (expect_c - expect_c_dag) * r,
    )
}

/// ⟨b†b⟩ = n_B(β, ω̃) + (c/ω̃)² ⟨C C†⟩.
pub fn photon_number_from_matter(
    ch: &CouplingChannel,
    beta: f64,
    expect_cc_dag: f64,
) -> Result<f64> {
    photon_number(ch.c, ch.omega_tilde, beta, expect_cc_dag)
}

/// Scalar form of [`photon_number_from_matter`].
pub fn photon_number(c: f64, omega_tilde: f64, beta: f64, expect_cc_dag: f64) -> Result<f64> {
    check_positive("beta", beta)?;
    check_positive("omega_tilde", omega_tilde)?;
    let r = c / omega_tilde;
    Ok(bose_occupation(beta, omega_tilde) + r * r * expect_cc_dag)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatsubaraKernelSpec {
    pub omega_tilde: f64,
    pub beta: f64,
    pub n_max: usize,
    pub tau_grid: Vec<f64>,
    /// Keep only ω_n = 0 (constant photon paths).
    #[serde(default)]
    pub zero_mode_only: bool,
}

/// Largest change of the even part allowed when `n_max` is doubled.
pub const KERNEL_TOL: f64 = 1e-8;

/// K(τ) = K̄(τ) - (1/ω̃) ∂_τ K̄(τ), with K̄ = β Σ δ(τ - βn) - K̿.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatsubaraKernel {
    pub tau: Vec<f64>,
    /// K̄(τ), from the truncated Matsubara sum.
    pub even: Vec<f64>,
    /// -(1/ω̃) ∂_τ K̄(τ); zero at τ = 0 (symmetric limit).
    pub odd: Vec<f64>,
    /// Resummed K̄ on (0, β): (βω̃/2) cosh(ω̃(β/2 - τ)) / sinh(βω̃/2).
    pub even_closed_form: Vec<f64>,
    /// Weight of the delta comb inside K̄.
    pub delta_weight: f64,
    /// Regular part of K̿ away from the delta comb, equal to -K̄.
    pub double_bar_regular: Vec<f64>,
    pub n_max: usize,
    /// Largest change of either part between n_max and 2 n_max.
    pub convergence: f64,
}

impl MatsubaraKernel {
    pub fn total(&self) -> Vec<C64> {
        self.even
            .iter()
            .zip(&self.odd)
            .map(|(e, o)| C64::new(e + o, 0.0))
            .collect()
    }
}

fn kernel_parts(a: f64, x: f64, n_max: usize) -> (f64, f64) {
    // Kummer acceleration: the 1/n², 1/n⁴ (even) and 1/n, 1/n³ (odd) tails
    // have Bernoulli-polynomial Fourier sums on [0, 1]; only an O(n⁻⁶)
    // remainder is summed numerically.
    let mut even_tail = 0.0;
    let mut odd_tail = 0.0;
    let a2 = a * a;
    for n in (1..=n_max).rev() {
        let nf = n as f64;
        let arg = 2.0 * PI * nf * x;
        let n2 = nf * nf;
        let den = n2 + a2;
        even_tail += arg.cos() / (n2 * n2 * den);
        odd_tail += arg.sin() / (n2 * nf * den);
    }
    let b2 = x * x - x + 1.0 / 6.0;
    let b3 = x * x * x - 1.5 * x * x + 0.5 * x;
    let b4 = x * x * x * x - 2.0 * x * x * x + x * x - 1.0 / 30.0;
    let (p2, p3, p4) = (PI * PI, PI * PI * PI, PI * PI * PI * PI);
    let even =
        1.0 + 2.0 * a2 * p2 * b2 + (2.0 / 3.0) * a2 * a2 * p4 * b4 + 2.0 * a2 * a2 * a2 * even_tail;
    let odd = if x == 0.0 {
        0.0
    } else {
        a * PI * (1.0 - 2.0 * x) - (4.0 / 3.0) * a2 * a * p3 * b3 + 2.0 * a2 * a2 * a * odd_tail
    };
    (even, odd)
}

pub fn matsubara_kernel(spec: &MatsubaraKernelSpec) -> Result<MatsubaraKernel> {
    check_positive("omega_tilde", spec.omega_tilde)?;
    check_positive("beta", spec.beta)?;
    if spec.n_max < 1 {
        return Err(Error::InvalidParameter {
            name: "n_max",
            value: 0.0,
            reason: "at least one Matsubara frequency is required",
        });
    }
    for &t in &spec.tau_grid {
        if !(0.0..spec.beta).contains(&t) {
            return Err(Error::InvalidParameter {
                name: "tau",
                value: t,
                reason: "must lie in [0, beta)",
            });
        }
    }
    let (w, beta) = (spec.omega_tilde, spec.beta);
    let closed = |t: f64| 0.5 * beta * w * (w * (0.5 * beta - t)).cosh() / (0.5 * beta * w).sinh();
    let even_closed_form: Vec<f64> = spec.tau_grid.iter().map(|&t| closed(t)).collect();

    if spec.zero_mode_only {
        let len = spec.tau_grid.len();
        return Ok(MatsubaraKernel {
            tau: spec.tau_grid.clone(),
            even: vec![1.0; len],
            odd: vec![0.0; len],
            even_closed_form,
            delta_weight: beta,
            double_bar_regular: vec![-1.0; len],
            n_max: 0,
            convergence: 0.0,
        });
    }

    let a = beta * w / (2.0 * PI);
    let mut even = Vec::with_capacity(spec.tau_grid.len());
    let mut odd = Vec::with_capacity(spec.tau_grid.len());
    let mut convergence: f64 = 0.0;
    for &t in &spec.tau_grid {
        let x = t / beta;
        let (e, o) = kernel_parts(a, x, spec.n_max);
        let (e2, o2) = kernel_parts(a, x, 2 * spec.n_max);
        convergence = convergence.max((e2 - e).abs()).max((o2 - o).abs());
        even.push(e);
        odd.push(o);
    }
    if convergence > KERNEL_TOL {
        return Err(Error::NotConverged(format!(
            "kernel changes by {convergence:e} when n_max = {} is doubled",
            spec.n_max
        )));
    }
    let double_bar_regular = even.iter().map(|e| -e).collect();
    Ok(MatsubaraKernel {
        tau: spec.tau_grid.clone(),
        even,
        odd,
        even_closed_form,
        delta_weight: beta,
        double_bar_regular,
        n_max: spec.n_max,
        convergence,
    })
}

/// (1/β) ∫_0^β K̄(τ) dτ by Simpson's rule over one period; equals 1, the
/// weight of the zero Matsubara frequency.
pub fn kernel_sum_rule(omega_tilde: f64, beta: f64, n_max: usize, intervals: usize) -> Result<f64> {
    let intervals = intervals.max(2) + intervals % 2;
    let k = matsubara_kernel(&MatsubaraKernelSpec {
        omega_tilde,
        beta,
        n_max,
        tau_grid: uniform_tau_grid(beta, intervals),
        zero_mode_only: false,
    })?;
    // K̄ is smooth on the closed period; K̄(β) = K̄(0).
    let mut acc = 2.0 * k.even[0];
    for (i, v) in k.even.iter().enumerate().skip(1) {
        acc += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    Ok(acc / (3.0 * intervals as f64))
}

/// Uniform grid of `points` values on [0, β).
pub fn uniform_tau_grid(beta: f64, points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| beta * i as f64 / points as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::dicke_effective;
    use crate::operator::{identity, max_abs};
    use crate::spin::HalfInt;

    fn toy_h() -> HermitianOperator {
        HermitianOperator::new(
            CMatrix::from_row_slice(
                2,
                2,
                &[
                    C64::new(1.0, 0.0),
                    C64::new(0.2, 0.1),
                    C64::new(0.2, -0.1),
                    C64::new(-1.0, 0.0),
                ],
            ),
            1e-12,
        )
        .unwrap()
    }

    fn lowering() -> CMatrix {
        CMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(0.0, 0.0),
                C64::new(1.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
            ],
        )
    }

    #[test]
    fn no_channels_is_identity_map() {
        let h = toy_h();
        assert_eq!(build_effective(&h, &[]).unwrap().matrix(), h.matrix());
    }

    #[test]
    fn dicke_channel_reproduces_effective_model() {
        let p = DickeParams::new(1.0, 0.3, 0.8, 6, 1, 1.0).unwrap();
        let sector = SpinSector::new(HalfInt::from_twice(4).unwrap(), 6).unwrap();
        let s = build_spin_operators(sector.spin);
        let hm = HermitianOperator::new(&s.sz * C64::new(p.omega_z, 0.0), 1e-12).unwrap();
        let h = build_effective(&hm, &[dicke_channel(&p, &sector).unwrap()]).unwrap();
        let reference = dicke_effective(&p, &sector).unwrap();
        assert!(max_abs(&(h.matrix() - reference.matrix())) < 1e-14);
    }

    #[test]
    fn split_channels_add_up() {
        let h = toy_h();
        let c = CouplingChannel::new(0.6, 1.3, lowering()).unwrap();
        let half = CouplingChannel::new(0.6 / 2f64.sqrt(), 1.3, lowering()).unwrap();
        let one = build_effective(&h, &[c]).unwrap();
        let two = build_effective(&h, &[half.clone(), half]).unwrap();
        assert!(max_abs(&(one.matrix() - two.matrix())) < 1e-14);
    }

    #[test]
    fn ordering_is_c_c_dagger() {
        // σ- σ+ = |1><1| in this basis, distinct from σ+ σ- = |0><0|.
        let zero = HermitianOperator::new(CMatrix::zeros(2, 2), 1e-12).unwrap();
        let ch = CouplingChannel::new(1.0, 1.0, lowering()).unwrap();
        assert!(!ch.hermitian);
        let h = build_effective(&zero, &[ch]).unwrap();
        assert_eq!(h.matrix()[(0, 0)], C64::new(-1.0, 0.0));
        assert_eq!(h.matrix()[(1, 1)], C64::new(0.0, 0.0));
    }

    #[test]
    fn induced_term_is_negative_semidefinite() {
        let zero = HermitianOperator::new(CMatrix::zeros(2, 2), 1e-12).unwrap();
        let op = CMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(0.3, 0.2),
                C64::new(1.0, -0.4),
                C64::new(-0.7, 0.0),
                C64::new(0.1, 0.9),
            ],
        );
        let h = build_effective(&zero, &[CouplingChannel::new(1.1, 0.4, op).unwrap()]).unwrap();
        assert!(h.eigenvalues().unwrap().iter().all(|&e| e <= 1e-12));
    }

    #[test]
    fn rescaling_invariance() {
        let h = toy_h();
        let op = lowering() + identity(2) * C64::new(0.3, 0.0);
        let a = CouplingChannel::new(0.8, 2.0, op.clone()).unwrap();
        let s: f64 = 3.7;
        let b = CouplingChannel::new(0.8 / s.sqrt(), 2.0, op * C64::new(s.sqrt(), 0.0)).unwrap();
        let ha = build_effective(&h, &[a]).unwrap();
        let hb = build_effective(&h, &[b]).unwrap();
        assert!(max_abs(&(ha.matrix() - hb.matrix())) < 1e-14);
    }

    #[test]
    fn dimension_mismatch() {
        let ch = CouplingChannel::new(1.0, 1.0, identity(3)).unwrap();
        assert!(build_effective(&toy_h(), &[ch]).is_err());
        assert!(CouplingChannel::new(1.0, 0.0, identity(2)).is_err());
    }

    #[test]
    fn quadratures() {
        let ch = CouplingChannel::new(0.5, 2.0, identity(2)).unwrap();
        let zero = C64::new(0.0, 0.0);
        assert_eq!(photon_quadrature_from_matter(&ch, zero, zero), (zero, zero));
        let x = C64::new(0.3, 0.0);
        let (q, p) = photon_quadrature_from_matter(&ch, x, x);
        assert!((q.re + 2.0 * 0.5 * 0.3 / 2.0).abs() < 1e-15 && p.norm() == 0.0);
    }

    #[test]
    fn photon_number_limits() {
        let ch = CouplingChannel::new(0.0, 1.0, identity(2)).unwrap();
        let nb = photon_number_from_matter(&ch, 2.0, 5.0).unwrap();
        assert!((nb - 1.0 / (2f64.exp() - 1.0)).abs() < 1e-15);
        assert!(photon_number_from_matter(&ch, 1e3, 5.0).unwrap() < 1e-300);
        assert!(photon_number_from_matter(&ch, 0.0, 5.0).is_err());
    }

    fn spec(w: f64, beta: f64, points: usize) -> MatsubaraKernelSpec {
        MatsubaraKernelSpec {
            omega_tilde: w,
            beta,
            n_max: 200,
            tau_grid: uniform_tau_grid(beta, points),
            zero_mode_only: false,
        }
    }

    #[test]
    fn even_part_matches_resummation() {
        for (w, beta) in [(1.0, 5.0), (2.0, 0.3), (0.7, 1.0)] {
            let k = matsubara_kernel(&spec(w, beta, 64)).unwrap();
            for i in 1..64 {
                assert!(
                    (k.even[i] - k.even_closed_form[i]).abs() < 1e-8,
                    "w={w} beta={beta} i={i}"
                );
            }
            // At τ = 0 the series converges to the same continuous value.
            assert!((k.even[0] - k.even_closed_form[0]).abs() < 1e-8);
        }
    }

    #[test]
    fn odd_part_matches_derivative_and_parity() {
        let (w, beta) = (1.3, 2.0);
        let k = matsubara_kernel(&spec(w, beta, 40)).unwrap();
        for i in 1..40 {
            let t = k.tau[i];
            let exact = 0.5 * beta * w * (w * (0.5 * beta - t)).sinh() / (0.5 * beta * w).sinh();
            assert!((k.odd[i] - exact).abs() < 1e-8);
            assert!((k.odd[i] + k.odd[40 - i]).abs() < 1e-8);
        }
        assert_eq!(k.odd[0], 0.0);
    }

    #[test]
    fn zero_mode_only_is_constant() {
        let mut s = spec(3.0, 10.0, 8);
        s.zero_mode_only = true;
        let k = matsubara_kernel(&s).unwrap();
        assert!(k.total().iter().all(|z| *z == C64::new(1.0, 0.0)));
        assert_eq!(k.delta_weight, 10.0);
    }

    #[test]
    fn sum_rule() {
        for (w, beta) in [(1.0, 5.0), (0.4, 0.5), (3.0, 2.0)] {
            assert!((kernel_sum_rule(w, beta, 400, 2000).unwrap() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn rejects_bad_specs() {
        let mut s = spec(1.0, 1.0, 4);
        s.tau_grid.push(1.0);
        assert!(matsubara_kernel(&s).is_err());
        let mut s = spec(1.0, 1.0, 4);
        s.n_max = 0;
        assert!(matsubara_kernel(&s).is_err());
        let mut s = spec(50.0, 50.0, 4);
        s.n_max = 2;
        assert!(matches!(matsubara_kernel(&s), Err(Error::NotConverged(_))));
    }
}
