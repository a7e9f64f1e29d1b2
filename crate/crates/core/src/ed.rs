//! Exact diagonalization of the Dicke testbed, sector by sector.

use std::time::{Duration, Instant};

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{build_fock, check_cutoff_convergence};
use crate::models::{build_hamiltonian, DickeParams, ModelKind};
use crate::operator::{kron, CMatrix, HermitianOperator};
use crate::spin::{build_spin_operators, sector_list, SpinSector};
use crate::thermo::{
    analytic_free_energy, bose_occupation, dicke_coherent_log_z, free_energy_from_spectra,
    hepp_lieb_gap, log_z_oscillator, thermal_average, DiagonalBlock, HeppLiebCheck, SectorSpectrum,
    ThermoResult,
};

/// Observable keys stored in [`ThermoResult::observables`].
pub const SX2_OVER_N2: &str = "sx2_over_n2";
pub const PHOTON_NUMBER: &str = "photon_number";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdOptions {
    /// Compute ⟨S_x²⟩/N² and the photon number (needs eigenvectors).
    pub observables: bool,
    /// Diagonalize sectors on the rayon pool.
    pub parallel: bool,
    /// Abort with [`Error::Timeout`] once this many seconds have elapsed.
    pub time_cap_s: Option<f64>,
    /// Require f to change by less than this when N_ph grows by 5.
    pub cutoff_tol: Option<f64>,
}

impl Default for EdOptions {
    fn default() -> Self {
        Self {
            observables: false,
            parallel: true,
            time_cap_s: None,
            cutoff_tol: None,
        }
    }
}

struct Deadline {
    start: Instant,
    cap: Option<Duration>,
    cap_s: f64,
}

impl Deadline {
    fn new(cap_s: Option<f64>) -> Self {
        Self {
            start: Instant::now(),
            cap: cap_s.map(Duration::from_secs_f64),
            cap_s: cap_s.unwrap_or(f64::INFINITY),
        }
    }

    fn check(&self) -> Result<()> {
        match self.cap {
            Some(cap) if self.start.elapsed() > cap => Err(Error::Timeout(self.cap_s)),
            _ => Ok(()),
        }
    }
}

fn real_part(m: &CMatrix) -> DMatrix<f64> {
    m.map(|z| z.re)
}

/// Sector observables: S_x² and, where defined, the lab-frame photon number.
fn sector_observables(
    kind: ModelKind,
    p: &DickeParams,
    sector: &SpinSector,
) -> Result<Vec<CMatrix>> {
    let s = build_spin_operators(sector.spin);
    let sx2 = &s.sx * &s.sx;
    match kind {
        ModelKind::Effective => Ok(vec![sx2]),
        ModelKind::Full | ModelKind::FullPolaron | ModelKind::Sw => {
            let f = build_fock(p.n_ph)?;
            let id_s = CMatrix::identity(s.dim(), s.dim());
            let id_b = CMatrix::identity(f.dim(), f.dim());
            let sx2_full = kron(&sx2, &id_b);
            let mut ops = vec![sx2_full.clone()];
            if kind == ModelKind::Full {
                ops.push(kron(&id_s, &f.n));
            } else if kind == ModelKind::FullPolaron {
                // Lab-frame a = a_P - 2ζ S_x, so a†a = a†a - 2ζ S_x (a + a†) + 4ζ² S_x².
                let zeta = p.zeta();
                let x = &f.a + &f.a_dag;
                let n = kron(&id_s, &f.n)
                    - kron(&s.sx, &x) * crate::operator::real_scalar(2.0 * zeta)
                    + sx2_full * crate::operator::real_scalar(4.0 * zeta * zeta);
                ops.push(n);
            }
            Ok(ops)
        }
        ModelKind::Analytic => Err(Error::Missing(
            "no sector observables for the analytic model".into(),
        )),
    }
}

struct SectorOutput {
    spectrum: SectorSpectrum,
    diagonals: Vec<Vec<f64>>,
}

fn diagonalize_sector(
    kind: ModelKind,
    p: &DickeParams,
    sector: &SpinSector,
    observables: bool,
) -> Result<SectorOutput> {
    let h = build_hamiltonian(kind, p, sector)?;
    if !observables {
        return Ok(SectorOutput {
            spectrum: SectorSpectrum {
                sector: *sector,
                energies: h.eigenvalues()?,
            },
            diagonals: Vec::new(),
        });
    }
    let ops = sector_observables(kind, p, sector)?;
    let (energies, diagonals) = if h.is_real() && ops.iter().all(|o| o.iter().all(|z| z.im == 0.0))
    {
        let hr = real_part(h.matrix());
        let eig = SymmetricEigen::new((&hr + hr.transpose()) * 0.5);
        let diagonals = ops
            .iter()
            .map(|o| {
                let ov = real_part(o) * &eig.eigenvectors;
                (0..hr.nrows())
                    .map(|i| eig.eigenvectors.column(i).dot(&ov.column(i)))
                    .collect::<Vec<f64>>()
            })
            .collect();
        (
            eig.eigenvalues.iter().copied().collect::<Vec<f64>>(),
            diagonals,
        )
    } else {
        let (e, v) = h.eigh()?;
        let diagonals = ops
            .iter()
            .map(|o| {
                let ov = o * &v;
                (0..e.len())
                    .map(|i| v.column(i).dotc(&ov.column(i)).re)
                    .collect()
            })
            .collect();
        (e, diagonals)
    };
    Ok(SectorOutput {
        spectrum: SectorSpectrum {
            sector: *sector,
            energies,
        },
        diagonals,
    })
}

fn run_sectors(
    kind: ModelKind,
    p: &DickeParams,
    opts: &EdOptions,
    deadline: &Deadline,
) -> Result<Vec<SectorOutput>> {
    let sectors = sector_list(p.n)?;
    let job = |s: &SpinSector| {
        deadline.check()?;
        let out = diagonalize_sector(kind, p, s, opts.observables)?;
        deadline.check()?;
        Ok(out)
    };
    // Collect preserves sector order, so the downstream fold is deterministic.
    if opts.parallel {
        sectors.par_iter().map(job).collect()
    } else {
        sectors.iter().map(job).collect()
    }
}

/// Spectra of every sector, ascending in S.
pub fn sector_spectra(
    kind: ModelKind,
    p: &DickeParams,
    opts: &EdOptions,
) -> Result<Vec<SectorSpectrum>> {
    let deadline = Deadline::new(opts.time_cap_s);
    let quiet = EdOptions {
        observables: false,
        ..*opts
    };
    Ok(run_sectors(kind, p, &quiet, &deadline)?
        .into_iter()
        .map(|o| o.spectrum)
        .collect())
}

/// ln Z of the free oscillator that the effective model factors out.
fn extra_log_z(kind: ModelKind, p: &DickeParams) -> f64 {
    match kind {
        ModelKind::Effective => log_z_oscillator(p.beta, p.omega_c),
        _ => 0.0,
    }
}

fn thermo_once(
    kind: ModelKind,
    p: &DickeParams,
    opts: &EdOptions,
    deadline: &Deadline,
) -> Result<ThermoResult> {
    if kind == ModelKind::Analytic {
        let (mut r, _) = analytic_free_energy(p)?;
        let per_site = r
            .observables
            .remove("photon_number_per_site")
            .unwrap_or(0.0);
        r.observables.insert(
            PHOTON_NUMBER.into(),
            p.n as f64 * per_site + bose_occupation(p.beta, p.omega_c),
        );
        return Ok(r);
    }
    let outputs = run_sectors(kind, p, opts, deadline)?;
    let spectra: Vec<SectorSpectrum> = outputs.iter().map(|o| o.spectrum.clone()).collect();
    let mut result =
        free_energy_from_spectra(&spectra, p.beta, p.n)?.with_extra_log_z(extra_log_z(kind, p));
    if opts.observables {
        let average = |k: usize| {
            let blocks: Vec<DiagonalBlock> = outputs
                .iter()
                .map(|o| DiagonalBlock {
                    sector: o.spectrum.sector,
                    energies: o.spectrum.energies.clone(),
                    values: o.diagonals[k].clone(),
                })
                .collect();
            thermal_average(&blocks, p.beta, p.n)
        };
        let sx2 = average(0)?;
        let n2 = (p.n * p.n) as f64;
        result.observables.insert(SX2_OVER_N2.into(), sx2 / n2);
        let photons = match kind {
            ModelKind::Effective => Some(crate::effective::photon_number(
                2.0 * p.g(),
                p.omega_c,
                p.beta,
                sx2,
            )?),
            ModelKind::Full | ModelKind::FullPolaron => Some(average(1)?),
            _ => None,
        };
        if let Some(n_ph) = photons {
            result.observables.insert(PHOTON_NUMBER.into(), n_ph);
        }
    }
    Ok(result)
}

/// Thermodynamics of `kind` at `p`.
///
/// The effective model's ln Z includes the decoupled oscillator factor, so its
/// f is directly comparable with the full model.
pub fn dicke_thermo(kind: ModelKind, p: &DickeParams, opts: &EdOptions) -> Result<ThermoResult> {
    p.validate()?;
    let deadline = Deadline::new(opts.time_cap_s);
    let result = thermo_once(kind, p, opts, &deadline)?;
    if let (Some(tol), true) = (opts.cutoff_tol, kind.has_bosons()) {
        let quiet = EdOptions {
            observables: false,
            cutoff_tol: None,
            ..*opts
        };
        let base = result.free_energy_per_site;
        check_cutoff_convergence(p.n_ph, tol, |cut| {
            if cut == p.n_ph {
                Ok(base)
            } else {
                Ok(thermo_once(kind, &p.with_n_ph(cut), &quiet, &deadline)?.free_energy_per_site)
            }
        })?;
    }
    Ok(result)
}

/// Hepp-Lieb sandwich of an ED ln Z against the coherent-state bound.
pub fn hepp_lieb_check(p: &DickeParams, log_z: f64) -> Result<(f64, HeppLiebCheck)> {
    let log_z_tilde = dicke_coherent_log_z(p)?;
    Ok((
        log_z_tilde,
        hepp_lieb_gap(log_z, log_z_tilde, p.beta, &[p.omega_c])?,
    ))
}

/// Builds a sector Hamiltonian; re-exported for benchmarks and the CLI.
pub fn sector_hamiltonian(
    kind: ModelKind,
    p: &DickeParams,
    sector: &SpinSector,
) -> Result<HermitianOperator> {
    build_hamiltonian(kind, p, sector)
}
