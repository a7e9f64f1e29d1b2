//! Hamiltonian builders for the Dicke testbed in a fixed total-spin sector.
//!
//! Composite operators act on `spin ⊗ boson`, spin being the slow index.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_non_negative, check_positive, Error, Result};
use crate::fock::{build_fock, cosh_sinh_of, FockOperators};
use crate::operator::{identity, kron, CMatrix, HermitianOperator, C64, HERMITIAN_TOL};
use crate::spin::{build_spin_operators, HalfInt, SpinOperators, SpinSector};

/// Largest composite dimension the builders will allocate.
pub const MAX_DIM: usize = 20_000;

/// Relative detuning below which the Schrieffer-Wolff generator is refused.
pub const RESONANCE_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DickeParams {
    pub omega_c: f64,
    pub omega_z: f64,
    /// Collective coupling λ; the single-spin coupling is g = λ/√N.
    pub lambda: f64,
    pub n: usize,
    /// Boson cutoff (highest retained occupation).
    pub n_ph: usize,
    pub beta: f64,
}

impl DickeParams {
    pub fn new(
        omega_c: f64,
        omega_z: f64,
        lambda: f64,
        n: usize,
        n_ph: usize,
        beta: f64,
    ) -> Result<Self> {
        let p = Self {
            omega_c,
            omega_z,
            lambda,
            n,
            n_ph,
            beta,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("omega_c", self.omega_c)?;
        check_positive("omega_z", self.omega_z)?;
        check_non_negative("lambda", self.lambda)?;
        check_positive("beta", self.beta)?;
        if self.n == 0 {
            return Err(Error::InvalidParameter {
                name: "N",
                value: 0.0,
                reason: "must be at least 1",
            });
        }
        Ok(())
    }

    pub fn g(&self) -> f64 {
        self.lambda / (self.n as f64).sqrt()
    }

    pub fn zeta(&self) -> f64 {
        self.g() / self.omega_c
    }

    /// Zero-temperature critical coupling, 4λ_c² = ω_c ω_z.
    pub fn lambda_c(&self) -> f64 {
        (self.omega_c * self.omega_z).sqrt() / 2.0
    }

    /// Coefficient of S_x² in the effective Hamiltonian, 4g²/ω_c.
    pub fn sx2_coupling(&self) -> f64 {
        4.0 * self.g() * self.g() / self.omega_c
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_omega_c(mut self, omega_c: f64) -> Self {
        self.omega_c = omega_c;
        self
    }

    pub fn with_n_ph(mut self, n_ph: usize) -> Self {
        self.n_ph = n_ph;
        self
    }
}

/// Which Hamiltonian a computation uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// Full Dicke model diagonalized in the polaron frame.
    FullPolaron,
    /// Full Dicke model in the lab frame.
    Full,
    Effective,
    /// Schrieffer-Wolff Hamiltonian at first order in ξ±.
    Sw,
    /// Exact thermodynamic-limit solution.
    Analytic,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::FullPolaron,
        ModelKind::Full,
        ModelKind::Effective,
        ModelKind::Sw,
        ModelKind::Analytic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::FullPolaron => "full_polaron",
            ModelKind::Full => "full",
            ModelKind::Effective => "effective",
            ModelKind::Sw => "sw",
            ModelKind::Analytic => "analytic",
        }
    }

    /// Whether the model carries an explicit boson factor.
    pub fn has_bosons(self) -> bool {
        matches!(
            self,
            ModelKind::FullPolaron | ModelKind::Full | ModelKind::Sw
        )
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .iter()
            .copied()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown model `{s}`")))
    }
}

fn check_sector(p: &DickeParams, sector: &SpinSector) -> Result<()> {
    p.validate()?;
    if sector.n != p.n {
        return Err(Error::InvalidSector {
            s: sector.s(),
            n: p.n,
            reason: "sector was built for a different N",
        });
    }
    Ok(())
}

fn composite_setup(p: &DickeParams, sector: &SpinSector) -> Result<(SpinOperators, FockOperators)> {
    check_sector(p, sector)?;
    let fock = build_fock(p.n_ph)?;
    let dim = sector.dim * fock.dim();
    if dim > MAX_DIM {
        return Err(Error::DimensionTooLarge {
            dim,
            limit: MAX_DIM,
        });
    }
    Ok((build_spin_operators(sector.spin), fock))
}

fn finish(m: CMatrix) -> Result<HermitianOperator> {
    HermitianOperator::new(m, HERMITIAN_TOL)
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// H = ω_z S_z + ω_c a†a + 2g S_x (a + a†).
pub fn dicke_full(p: &DickeParams, sector: &SpinSector) -> Result<HermitianOperator> {
    let (s, f) = composite_setup(p, sector)?;
    let id_s = identity(s.dim());
    let id_b = identity(f.dim());
    let x = &f.a + &f.a_dag;
    let h = kron(&s.sz, &id_b) * re(p.omega_z)
        + kron(&id_s, &f.n) * re(p.omega_c)
        + kron(&s.sx, &x) * re(2.0 * p.g());
    finish(h)
}

/// Polaron-frame Hamiltonian
/// H_P = ω_z (S_z cosh α̂ - i S_y sinh α̂) + ω_c a†a - (4g²/ω_c) S_x²,
/// with α̂ = 2ζ(a† - a) and ζ = g/ω_c.
pub fn dicke_polaron(p: &DickeParams, sector: &SpinSector) -> Result<HermitianOperator> {
    let (s, f) = composite_setup(p, sector)?;
    let alpha = (&f.a_dag - &f.a) * re(2.0 * p.zeta());
    let (cosh, sinh) = cosh_sinh_of(&alpha)?;
    let minus_i_sy = &s.sy * C64::new(0.0, -1.0);
    let id_s = identity(s.dim());
    let id_b = identity(f.dim());
    let sx2 = &s.sx * &s.sx;
    let h = (kron(&s.sz, cosh.matrix()) + kron(&minus_i_sy, &sinh)) * re(p.omega_z)
        + kron(&id_s, &f.n) * re(p.omega_c)
        - kron(&sx2, &id_b) * re(p.sx2_coupling());
    // The product of two antisymmetric real factors is symmetric only up to
    // roundoff; restore exact Hermiticity.
    let h = (&h + h.adjoint()) * re(0.5);
    finish(h)
}

/// H_eff = ω_z S_z - (4g²/ω_c) S_x², on the spin sector alone.
pub fn dicke_effective(p: &DickeParams, sector: &SpinSector) -> Result<HermitianOperator> {
    check_sector(p, sector)?;
    let s = build_spin_operators(sector.spin);
    let h = &s.sz * re(p.omega_z) - &s.sx * &s.sx * re(p.sx2_coupling());
    finish(h)
}

fn sw_denominator(p: &DickeParams) -> Result<f64> {
    let detuning = (p.omega_c - p.omega_z).abs();
    let threshold = RESONANCE_TOL * p.omega_c;
    if detuning < threshold {
        return Err(Error::Resonance {
            detuning,
            threshold,
        });
    }
    Ok(p.omega_c * p.omega_c - p.omega_z * p.omega_z)
}

/// Schrieffer-Wolff Hamiltonian at first order in ξ± = g/(ω_c ± ω_z):
/// H_SW = ω_z S_z + ω_c a†a - (2g²ω_z/(ω_c²-ω_z²)) S_z (a+a†)² - (4g²ω_c/(ω_c²-ω_z²)) S_x².
pub fn dicke_sw_full(p: &DickeParams, sector: &SpinSector) -> Result<HermitianOperator> {
    let denom = sw_denominator(p)?;
    let (s, f) = composite_setup(p, sector)?;
    let g2 = p.g() * p.g();
    let x = &f.a + &f.a_dag;
    let x2 = &x * &x;
    let id_s = identity(s.dim());
    let id_b = identity(f.dim());
    let sx2 = &s.sx * &s.sx;
    let h = kron(&s.sz, &id_b) * re(p.omega_z) + kron(&id_s, &f.n) * re(p.omega_c)
        - kron(&s.sz, &x2) * re(2.0 * g2 * p.omega_z / denom)
        - kron(&sx2, &id_b) * re(4.0 * g2 * p.omega_c / denom);
    finish(h)
}

/// The boson-free terms of H_SW: ω_z S_z - (4g²ω_c/(ω_c²-ω_z²)) S_x².
pub fn dicke_sw_matter_part(p: &DickeParams, sector: &SpinSector) -> Result<HermitianOperator> {
    let denom = sw_denominator(p)?;
    check_sector(p, sector)?;
    let s = build_spin_operators(sector.spin);
    let g2 = p.g() * p.g();
    let h = &s.sz * re(p.omega_z) - &s.sx * &s.sx * re(4.0 * g2 * p.omega_c / denom);
    finish(h)
}

/// Builds the sector Hamiltonian of `kind`. [`ModelKind::Analytic`] has no matrix.
pub fn build_hamiltonian(
    kind: ModelKind,
    p: &DickeParams,
    sector: &SpinSector,
) -> Result<HermitianOperator> {
    match kind {
        ModelKind::FullPolaron => dicke_polaron(p, sector),
        ModelKind::Full => dicke_full(p, sector),
        ModelKind::Effective => dicke_effective(p, sector),
        ModelKind::Sw => dicke_sw_full(p, sector),
        ModelKind::Analytic => Err(Error::Missing(
            "the analytic model has no finite-N Hamiltonian".into(),
        )),
    }
}

/// Frequency of the slow-cavity Schrieffer-Wolff boson in a fixed-m_z sector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SlowCavityFrequency {
    Real(f64),
    /// The radicand is negative: the Hamiltonian is not bounded below.
    Imaginary {
        radicand: f64,
    },
}

impl SlowCavityFrequency {
    pub fn is_imaginary(&self) -> bool {
        matches!(self, SlowCavityFrequency::Imaginary { .. })
    }

    pub fn real(&self) -> Option<f64> {
        match *self {
            SlowCavityFrequency::Real(x) => Some(x),
            SlowCavityFrequency::Imaginary { .. } => None,
        }
    }
}

/// ε(m_z) = sqrt(ω_c² + 8g²ω_c m_z/ω_z).
///
/// Radicands within 1e-12·ω_c² of zero are treated as zero so the critical
/// point itself is not misreported as imaginary through roundoff.
pub fn sw_slow_cavity_frequency(
    p: &DickeParams,
    m_z: f64,
    spin: HalfInt,
) -> Result<SlowCavityFrequency> {
    p.validate()?;
    let twice_m = 2.0 * m_z;
    if !twice_m.is_finite() || twice_m.fract() != 0.0 {
        return Err(Error::InvalidParameter {
            name: "m_z",
            value: m_z,
            reason: "must be a half-integer",
        });
    }
    if m_z.abs() > spin.value() {
        return Err(Error::MagneticNumberOutOfRange {
            m_z,
            s: spin.value(),
        });
    }
    let g2 = p.lambda * p.lambda / p.n as f64;
    let radicand = p.omega_c * p.omega_c + 8.0 * g2 * p.omega_c * m_z / p.omega_z;
    let tol = 1e-12 * p.omega_c * p.omega_c;
    if radicand < -tol {
        Ok(SlowCavityFrequency::Imaginary { radicand })
    } else {
        Ok(SlowCavityFrequency::Real(radicand.max(0.0).sqrt()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::max_abs;
    use crate::spin::{sector_list, SpinSector};

    fn params(lambda: f64, n: usize, n_ph: usize) -> DickeParams {
        DickeParams::new(1.0, 1.0, lambda, n, n_ph, 1.0).unwrap()
    }

    fn sector(twice: i64, n: usize) -> SpinSector {
        SpinSector::new(HalfInt::from_twice(twice).unwrap(), n).unwrap()
    }

    #[test]
    fn coupling_relation() {
        let p = DickeParams::new(2.0, 1.0, 0.7, 49, 4, 1.0).unwrap();
        assert!((p.g() * 7.0 - 0.7).abs() < 1e-15);
        assert!((p.zeta() - 0.05).abs() < 1e-15);
        assert!(DickeParams::new(0.0, 1.0, 0.1, 2, 2, 1.0).is_err());
        assert!(DickeParams::new(1.0, 1.0, -0.1, 2, 2, 1.0).is_err());
    }

    #[test]
    fn decoupled_spectrum() {
        let p = DickeParams::new(1.3, 0.7, 0.0, 3, 4, 1.0).unwrap();
        let sec = sector(3, 3);
        let ev = dicke_full(&p, &sec).unwrap().eigenvalues().unwrap();
        let mut expected: Vec<f64> = Vec::new();
        for k in 0..4 {
            for n in 0..=4 {
                expected.push(0.7 * (1.5 - k as f64) + 1.3 * n as f64);
            }
        }
        expected.sort_by(f64::total_cmp);
        for (a, b) in ev.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12);
        }
        let ev_p = dicke_polaron(&p, &sec).unwrap().eigenvalues().unwrap();
        for (a, b) in ev_p.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn coupling_lowers_ground_state() {
        // N = 1 so g = λ.
        let p = params(0.1, 1, 1);
        let ev = dicke_full(&p, &sector(1, 1))
            .unwrap()
            .eigenvalues()
            .unwrap();
        assert!(ev[0] < -0.5);
    }

    #[test]
    fn full_cutoff_converged() {
        let p = params(0.1, 1, 60);
        let e60 = dicke_full(&p, &sector(1, 1))
            .unwrap()
            .eigenvalues()
            .unwrap()[0];
        let e200 = dicke_full(&p.with_n_ph(200), &sector(1, 1))
            .unwrap()
            .eigenvalues()
            .unwrap()[0];
        assert!((e60 - e200).abs() < 1e-10);
    }

    #[test]
    fn polaron_reduces_to_bare_at_zero_coupling() {
        let p = params(0.0, 4, 3);
        let sec = sector(4, 4);
        let hp = dicke_polaron(&p, &sec).unwrap();
        let hf = dicke_full(&p, &sec).unwrap();
        assert!(max_abs(&(hp.matrix() - hf.matrix())) < 1e-14);
    }

    #[test]
    fn polaron_and_full_share_spectrum() {
        for (lambda, twice) in [(0.3, 4), (0.45, 6), (0.2, 3)] {
            let n = 6 + (twice as usize % 2);
            let p = params(lambda, n, 100);
            let sec = sector(twice, n);
            let full = dicke_full(&p, &sec).unwrap().eigenvalues().unwrap();
            let pol = dicke_polaron(&p.with_n_ph(140), &sec)
                .unwrap()
                .eigenvalues()
                .unwrap();
            for k in 0..20 {
                assert!(
                    (full[k] - pol[k]).abs() < 1e-6,
                    "level {k}: {} vs {}",
                    full[k],
                    pol[k]
                );
            }
        }
    }

    #[test]
    fn builders_are_hermitian() {
        let p = DickeParams::new(1.0, 0.4, 0.8, 10, 6, 1.0).unwrap();
        for sec in sector_list(10).unwrap() {
            for kind in [
                ModelKind::Full,
                ModelKind::FullPolaron,
                ModelKind::Effective,
                ModelKind::Sw,
            ] {
                let h = build_hamiltonian(kind, &p, &sec).unwrap();
                assert!(h.hermiticity_defect() <= 1e-12, "{kind}");
            }
        }
    }

    #[test]
    fn effective_spin_half_is_shifted_free_spin() {
        let p = params(0.2, 1, 1);
        let ev = dicke_effective(&p, &sector(1, 1))
            .unwrap()
            .eigenvalues()
            .unwrap();
        let shift = p.g() * p.g() / p.omega_c;
        assert!((ev[0] - (-0.5 - shift)).abs() < 1e-14);
        assert!((ev[1] - (0.5 - shift)).abs() < 1e-14);
    }

    #[test]
    fn effective_spin_one_closed_form() {
        // ω_z = 1, 4g²/ω_c = 1, S = 1. In the |1>,|0>,|-1> basis,
        // S_x² = [[1/2,0,1/2],[0,1,0],[1/2,0,1/2]], so H = diag(1,0,-1) - S_x².
        // |0> decouples with E = -1; the {|1>,|-1>} block [[1/2,-1/2],[-1/2,-3/2]]
        // has E = -1/2 ± sqrt(1 + 1/4).
        let n = 2;
        let g = 0.5; // 4g²/ω_c = 1 with ω_c = 1
        let p = DickeParams::new(1.0, 1.0, g * (n as f64).sqrt(), n, 1, 1.0).unwrap();
        let ev = dicke_effective(&p, &sector(2, n))
            .unwrap()
            .eigenvalues()
            .unwrap();
        let r = 1.25f64.sqrt();
        let mut expected = [-0.5 - r, -1.0, -0.5 + r];
        expected.sort_by(f64::total_cmp);
        for (a, b) in ev.iter().zip(expected.iter()) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn effective_real_symmetric_in_sx_basis() {
        let p = params(0.4, 8, 1);
        let sec = sector(8, 8);
        let h = dicke_effective(&p, &sec).unwrap();
        let s = build_spin_operators(sec.spin);
        let (_, v) = HermitianOperator::new(s.sx.clone(), 1e-12)
            .unwrap()
            .eigh()
            .unwrap();
        let rotated = v.adjoint() * h.matrix() * &v;
        // Eigenvectors of the real S_x are real up to phase; with a real solver the
        // rotated matrix must be real symmetric.
        assert!(rotated.iter().all(|z| z.im.abs() < 1e-12));
        assert!(max_abs(&(&rotated - rotated.transpose())) < 1e-12);
    }

    #[test]
    fn sw_decoupled_at_zero_coupling() {
        let p = DickeParams::new(2.0, 1.0, 0.0, 2, 3, 1.0).unwrap();
        let ev = dicke_sw_full(&p, &sector(2, 2))
            .unwrap()
            .eigenvalues()
            .unwrap();
        assert!((ev[0] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn sw_rejects_resonance() {
        let p = params(0.1, 2, 3);
        assert!(matches!(
            dicke_sw_full(&p, &sector(2, 2)),
            Err(Error::Resonance { .. })
        ));
    }

    #[test]
    fn sw_fast_cavity_matches_effective() {
        let p = DickeParams::new(1000.0, 1.0, 5.0, 20, 2, 1.0).unwrap();
        for sec in sector_list(20).unwrap() {
            let sw = dicke_sw_matter_part(&p, &sec).unwrap();
            let eff = dicke_effective(&p, &sec).unwrap();
            let scale = max_abs(eff.matrix());
            assert!(max_abs(&(sw.matrix() - eff.matrix())) <= 1e-5 * scale);
        }
    }

    #[test]
    fn slow_cavity_frequency() {
        let n = 10;
        let spin = HalfInt::from_twice(n as i64).unwrap();
        let base = DickeParams::new(1.0, 1.0, 0.0, n, 1, 1.0).unwrap();
        assert_eq!(
            sw_slow_cavity_frequency(&base, 0.0, spin).unwrap(),
            SlowCavityFrequency::Real(1.0)
        );

        let at_c = base.with_lambda(base.lambda_c());
        let eps = sw_slow_cavity_frequency(&at_c, -5.0, spin).unwrap();
        assert!(eps.real().unwrap().abs() < 1e-10);

        let above = base.with_lambda(1.1 * base.lambda_c());
        assert!(sw_slow_cavity_frequency(&above, -5.0, spin)
            .unwrap()
            .is_imaginary());
        assert!(sw_slow_cavity_frequency(&above, -5.5, spin).is_err());
        assert!(sw_slow_cavity_frequency(&above, 0.3, spin).is_err());
    }

    #[test]
    fn dimension_guard() {
        let p = params(0.1, 400, 60);
        let sec = sector(400, 400);
        assert!(matches!(
            dicke_full(&p, &sec),
            Err(Error::DimensionTooLarge { .. })
        ));
    }

    #[test]
    fn model_names_round_trip() {
        for k in ModelKind::ALL {
            assert_eq!(k.name().parse::<ModelKind>().unwrap(), k);
        }
        assert!("dicke".parse::<ModelKind>().is_err());
    }
}
