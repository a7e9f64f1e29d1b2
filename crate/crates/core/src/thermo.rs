//! Partition functions and free energies.
//!
//! Everything is accumulated in the log domain: Ω(S, N) alone overflows an
//! f64 near N ≈ 1000, and Boltzmann factors at low temperature do so much
//! earlier. Sector contributions are folded in ascending-S order so results
//! do not depend on how the spectra were produced.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{check_positive, Error, Result};
use crate::models::DickeParams;
use crate::operator::{CMatrix, C64};
use crate::spin::{sector_list, SpinSector};

/// ln Σ exp(x_i); `-inf` for an empty slice.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let sum: f64 = xs.iter().map(|x| (x - max).exp()).sum();
    max + sum.ln()
}

/// ln of the harmonic-oscillator partition function, -ln(1 - e^{-βω}).
pub fn log_z_oscillator(beta: f64, omega: f64) -> f64 {
    -(-(-beta * omega).exp_m1()).ln()
}

/// Bose occupation 1/(e^{βω} - 1).
pub fn bose_occupation(beta: f64, omega: f64) -> f64 {
    1.0 / (beta * omega).exp_m1()
}

/// Energies of one spin sector.
#[derive(Clone, Debug, PartialEq)]
pub struct SectorSpectrum {
    pub sector: SpinSector,
    pub energies: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThermoResult {
    pub beta: f64,
    pub n: usize,
    pub free_energy_per_site: f64,
    pub log_z: f64,
    pub observables: BTreeMap<String, f64>,
}

impl ThermoResult {
    pub fn from_log_z(log_z: f64, beta: f64, n: usize) -> Self {
        Self {
            beta,
            n,
            free_energy_per_site: -log_z / (beta * n as f64),
            log_z,
            observables: BTreeMap::new(),
        }
    }

    /// Adds ln Z_extra (a decoupled factor) to the partition function.
    pub fn with_extra_log_z(self, extra: f64) -> Self {
        let mut out = Self::from_log_z(self.log_z + extra, self.beta, self.n);
        out.observables = self.observables;
        out
    }

    pub fn observable(&self, name: &str) -> Option<f64> {
        self.observables.get(name).copied()
    }
}

fn check_sector_set(sectors: &[&SpinSector], n: usize) -> Result<()> {
    let expected = sector_list(n)?;
    if sectors.len() != expected.len() {
        return Err(Error::SectorSet(format!(
            "expected {} sectors for N = {n}, got {}",
            expected.len(),
            sectors.len()
        )));
    }
    for (got, want) in sectors.iter().zip(&expected) {
        if got.spin != want.spin || got.n != n {
            return Err(Error::SectorSet(format!(
                "sector S = {} (N = {}) is missing, duplicated or foreign",
                want.spin, n
            )));
        }
    }
    Ok(())
}

fn sorted_by_spin<T>(items: &[T], key: impl Fn(&T) -> &SpinSector) -> Vec<&T> {
    let mut v: Vec<&T> = items.iter().collect();
    v.sort_by_key(|t| key(t).spin);
    v
}

/// ln Z = ln Σ_S Ω(S, N) Σ_i e^{-β E_i}, with f = -ln Z/(βN).
pub fn free_energy_from_spectra(
    spectra: &[SectorSpectrum],
    beta: f64,
    n: usize,
) -> Result<ThermoResult> {
    check_positive("beta", beta)?;
    let ordered = sorted_by_spin(spectra, |s| &s.sector);
    check_sector_set(&ordered.iter().map(|s| &s.sector).collect::<Vec<_>>(), n)?;
    let terms: Vec<f64> = ordered
        .iter()
        .map(|s| {
            let weights: Vec<f64> = s.energies.iter().map(|e| -beta * e).collect();
            s.sector.log_degeneracy + log_sum_exp(&weights)
        })
        .collect();
    let log_z = log_sum_exp(&terms);
    if !log_z.is_finite() {
        return Err(Error::NotConverged(format!("ln Z is not finite ({log_z})")));
    }
    Ok(ThermoResult::from_log_z(log_z, beta, n))
}

/// Sector eigenpairs together with an observable in the same basis.
#[derive(Clone, Debug)]
pub struct SectorBlock<'a> {
    pub sector: SpinSector,
    pub energies: &'a [f64],
    pub vectors: &'a CMatrix,
    pub operator: &'a CMatrix,
}

/// Eigenvalues of one sector with the diagonal matrix elements ⟨i|O|i⟩ of an
/// observable in the same eigenbasis.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalBlock {
    pub sector: SpinSector,
    pub energies: Vec<f64>,
    pub values: Vec<f64>,
}

/// Gibbs average from per-sector diagonal elements.
pub fn thermal_average(blocks: &[DiagonalBlock], beta: f64, n: usize) -> Result<f64> {
    check_positive("beta", beta)?;
    let ordered = sorted_by_spin(blocks, |b| &b.sector);
    check_sector_set(&ordered.iter().map(|b| &b.sector).collect::<Vec<_>>(), n)?;
    let mut max = f64::NEG_INFINITY;
    for b in &ordered {
        if b.values.len() != b.energies.len() {
            return Err(Error::DimensionMismatch {
                context: "observable diagonal and energies disagree",
                expected: b.energies.len(),
                got: b.values.len(),
            });
        }
        for e in &b.energies {
            max = max.max(b.sector.log_degeneracy - beta * e);
        }
    }
    let (mut num, mut den) = (0.0, 0.0);
    for b in ordered {
        for (e, v) in b.energies.iter().zip(&b.values) {
            let w = (b.sector.log_degeneracy - beta * e - max).exp();
            num += w * v;
            den += w;
        }
    }
    Ok(num / den)
}

/// Gibbs average Σ_S Ω_S Tr(O e^{-βH_S}) / Z.
pub fn thermal_expectation(blocks: &[SectorBlock<'_>], beta: f64, n: usize) -> Result<f64> {
    let mut diag = Vec::with_capacity(blocks.len());
    for b in blocks {
        let dim = b.vectors.nrows();
        if b.operator.nrows() != dim || b.operator.ncols() != dim {
            return Err(Error::DimensionMismatch {
                context: "observable and eigenvectors disagree",
                expected: dim,
                got: b.operator.nrows(),
            });
        }
        if b.energies.len() != b.vectors.ncols() {
            return Err(Error::DimensionMismatch {
                context: "energies and eigenvectors disagree",
                expected: b.vectors.ncols(),
                got: b.energies.len(),
            });
        }
        let ov = b.operator * b.vectors;
        let values = (0..b.energies.len())
            .map(|i| {
                let d: C64 = b.vectors.column(i).dotc(&ov.column(i));
                d.re
            })
            .collect();
        diag.push(DiagonalBlock {
            sector: b.sector,
            energies: b.energies.to_vec(),
            values,
        });
    }
    thermal_average(&diag, beta, n)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Normal,
    Superradiant,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldSolution {
    /// Root of 2σ = tanh(4βλ²σ/ω_c) in the superradiant branch, zero otherwise.
    pub sigma: f64,
    pub branch: Branch,
    pub lambda_c: f64,
    /// `None` when λ ≤ λ_c (no finite-temperature transition).
    pub beta_c: Option<f64>,
    /// Order parameter ⟨S_x⟩/N (up to sign).
    pub order_parameter: f64,
}

/// Bisection on a sign change of `f` in `[lo, hi]`; stops when the bracket
/// stops shrinking or `|f| <= tol`.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::NotConverged(format!(
            "no sign change on [{lo}, {hi}]"
        )));
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    let root = 0.5 * (lo + hi);
    let residual = f(root).abs();
    if residual > tol {
        return Err(Error::NotConverged(format!(
            "bisection residual {residual:e} exceeds {tol:e}"
        )));
    }
    Ok(root)
}

/// β_c solving ω_c ω_z = 4λ² tanh(β_c ω_z/2), or `None` when λ ≤ λ_c.
pub fn critical_temperature(p: &DickeParams) -> Result<Option<f64>> {
    p.validate()?;
    let target = p.omega_c * p.omega_z / (4.0 * p.lambda * p.lambda);
    if target >= 1.0 {
        return Ok(None);
    }
    let f = |b: f64| (b * p.omega_z / 2.0).tanh() - target;
    let mut hi = 1.0 / p.omega_z;
    while f(hi) < 0.0 {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::NotConverged("β_c bracket diverged".into()));
        }
    }
    Ok(Some(bisect(f, 0.0, hi, 1e-12)?))
}

/// Coupling at which the thermodynamic-limit transition occurs at inverse
/// temperature β: 4λ² tanh(βω_z/2) = ω_c ω_z.
pub fn critical_coupling_at(omega_c: f64, omega_z: f64, beta: f64) -> f64 {
    (omega_c * omega_z / (4.0 * (beta * omega_z / 2.0).tanh())).sqrt()
}

/// Exact N → ∞ free energy per site of the Dicke model.
///
/// The superradiant branch is selected when the self-consistency equation
/// 2σ = tanh(4βλ²σ/ω_c) has a root with σ ≥ ω_c ω_z/(8λ²), the smallest value
/// for which the order parameter is real. That is equivalent to λ > λ_c and
/// β > β_c.
pub fn analytic_free_energy(p: &DickeParams) -> Result<(ThermoResult, MeanFieldSolution)> {
    p.validate()?;
    let beta = p.beta;
    let lambda_c = p.lambda_c();
    let beta_c = critical_temperature(p)?;
    let normal_f = -(2.0 * (beta * p.omega_z / 2.0).cosh()).ln() / beta;

    let superradiant = p.lambda > lambda_c
        && 4.0 * p.lambda * p.lambda * (beta * p.omega_z / 2.0).tanh() > p.omega_c * p.omega_z;

    let (f, sigma, branch, order) = if superradiant {
        let coupling = 4.0 * p.lambda * p.lambda / p.omega_c;
        let sigma_min = p.omega_c * p.omega_z / (8.0 * p.lambda * p.lambda);
        let residual = |s: f64| (beta * coupling * s).tanh() - 2.0 * s;
        let sigma = bisect(residual, sigma_min, 0.5, 1e-12)?;
        let e = coupling * sigma;
        // ln 2cosh(x) = |x| + ln(1 + e^{-2|x|}), stable for large βE.
        let ln2cosh = (beta * e).abs() + (-2.0 * (beta * e).abs()).exp().ln_1p();
        let minus_beta_f = ln2cosh - beta * coupling * sigma * sigma
            + beta * p.omega_c * p.omega_z * p.omega_z / (16.0 * p.lambda * p.lambda);
        let x2 = (sigma * sigma - sigma_min * sigma_min).max(0.0);
        (-minus_beta_f / beta, sigma, Branch::Superradiant, x2.sqrt())
    } else {
        (normal_f, 0.0, Branch::Normal, 0.0)
    };

    let mut result = ThermoResult::from_log_z(-beta * f * p.n as f64, beta, p.n);
    result.free_energy_per_site = f;
    result.observables.insert("sx_over_n".into(), order);
    result
        .observables
        .insert("sx2_over_n2".into(), order * order);
    result.observables.insert(
        "photon_number_per_site".into(),
        4.0 * p.lambda * p.lambda / (p.omega_c * p.omega_c) * order * order,
    );
    Ok((
        result,
        MeanFieldSolution {
            sigma,
            branch,
            lambda_c,
            beta_c,
            order_parameter: order,
        },
    ))
}

/// Outcome of a Hepp-Lieb sandwich check, ln Z̃ ≤ ln Z ≤ ln Z̃ + βΣω_k.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeppLiebCheck {
    /// ln Z - ln Z̃.
    pub gap: f64,
    /// βΣω_k - gap; non-negative when the upper bound holds.
    pub upper_slack: f64,
    pub bound_width: f64,
}

/// Relative tolerance applied to both sides of the sandwich.
pub const HEPP_LIEB_TOL: f64 = 1e-9;

pub fn hepp_lieb_gap(
    log_z: f64,
    log_z_tilde: f64,
    beta: f64,
    mode_freqs: &[f64],
) -> Result<HeppLiebCheck> {
    check_positive("beta", beta)?;
    let width = beta * mode_freqs.iter().sum::<f64>();
    let gap = log_z - log_z_tilde;
    let tol = HEPP_LIEB_TOL * log_z.abs().max(1.0);
    let check = HeppLiebCheck {
        gap,
        upper_slack: width - gap,
        bound_width: width,
    };
    if gap < -tol {
        return Err(Error::BoundViolation(format!(
            "ln Z = {log_z} lies below the lower bound ln Z̃ = {log_z_tilde}"
        )));
    }
    if check.upper_slack < -tol {
        return Err(Error::BoundViolation(format!(
            "ln Z = {log_z} exceeds ln Z̃ + βΣω = {}",
            log_z_tilde + width
        )));
    }
    Ok(check)
}

/// ln Tr_S exp(-β h·S) for a field of magnitude `h > 0`.
fn log_spin_trace(beta: f64, h: f64, twice_s: u32) -> f64 {
    let s = twice_s as f64 / 2.0;
    let x = beta * h;
    // Σ_{k=0}^{2S} e^{-xk} = (1 - e^{-x(2S+1)}) / (1 - e^{-x})
    let num = -(-x * (twice_s as f64 + 1.0)).exp_m1();
    let den = -(-x).exp_m1();
    x * s + num.ln() - den.ln()
}

fn simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let n = intervals + intervals % 2;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// ln Z̃ for the Dicke model, the coherent-state lower bound
/// Z̃ = Tr_M ∫ d²z/π exp(-β⟨z|H|z⟩) with ⟨z|H|z⟩ = ω_z S_z + ω_c|z|² + 4g Re(z) S_x.
///
/// The imaginary part of z integrates in closed form; the real part is
/// integrated by Simpson's rule, refined until successive estimates of ln Z̃_S
/// agree to 1e-13.
pub fn dicke_coherent_log_z(p: &DickeParams) -> Result<f64> {
    p.validate()?;
    let beta = p.beta;
    let g = p.g();
    let mut terms = Vec::new();
    for sector in sector_list(p.n)? {
        let twice = sector.spin.twice();
        let s = sector.s();
        let phi = |x: f64| {
            let h = (p.omega_z * p.omega_z + 16.0 * g * g * x * x).sqrt();
            -beta * p.omega_c * x * x + log_spin_trace(beta, h, twice)
        };
        // φ is bounded above by -βω_c(x - x*)² + const with x* = 2gS/ω_c;
        // past `upper` the integrand is below e^{-60} of its peak.
        let x_star = 2.0 * g * s / p.omega_c;
        let reach =
            ((beta * s * p.omega_z + (twice as f64 + 1.0).ln() + 60.0) / (beta * p.omega_c)).sqrt();
        let upper = x_star + reach;
        let peak = (0..=400)
            .map(|i| phi(upper * i as f64 / 400.0))
            .fold(f64::NEG_INFINITY, f64::max);
        let integrand = |x: f64| (phi(x) - peak).exp();
        let mut intervals = 2000;
        let mut prev = simpson(&integrand, 0.0, upper, intervals);
        loop {
            intervals *= 2;
            let next = simpson(&integrand, 0.0, upper, intervals);
            let converged = ((next - prev) / next).abs() < 1e-13;
            prev = next;
            if converged {
                break;
            }
            if intervals > 1 << 20 {
                return Err(Error::NotConverged("coherent-state quadrature".into()));
            }
        }
        // 2∫_0^∞ dx (even integrand) times (1/π)·sqrt(π/(βω_c)) from the Im z integral.
        let log_zs =
            peak + (2.0 * prev).ln() + 0.5 * (std::f64::consts::PI / (beta * p.omega_c)).ln()
                - std::f64::consts::PI.ln();
        terms.push(sector.log_degeneracy + log_zs);
    }
    Ok(log_sum_exp(&terms))
}
