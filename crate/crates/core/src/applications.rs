//! Evaluators for photon condensation criteria, the electron-gas mass
//! renormalization and cavity-mediated spin-spin couplings.

use std::io::Read;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{check_non_negative, check_positive, Error, Result};
use crate::operator::C64;

/// Complex field vector at one site.
pub type FieldSample = [C64; 3];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub omega: f64,
    #[serde(default)]
    pub delta: f64,
    #[serde(default)]
    pub c_e: f64,
    #[serde(default)]
    pub c_m: f64,
    pub polarization: [f64; 3],
    /// Transverse mode function sampled at each site of the owning [`ModeSet`].
    #[serde(default)]
    pub u_perp: Vec<FieldSample>,
}

impl Mode {
    pub fn validate(&self) -> Result<()> {
        check_positive("omega_k", self.omega)?;
        check_non_negative("Delta_k", self.delta)?;
        for (name, v) in [("c_e", self.c_e), ("c_m", self.c_m)] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    value: v,
                    reason: "must be finite",
                });
            }
        }
        let norm = self.polarization.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter {
                name: "polarization",
                value: norm,
                reason: "must be a unit vector",
            });
        }
        Ok(())
    }

    /// ω̃ = sqrt(ω² + 4Δω).
    pub fn omega_tilde(&self) -> f64 {
        (self.omega * self.omega + 4.0 * self.delta * self.omega).sqrt()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ModeSet {
    #[serde(default)]
    pub positions: Vec<[f64; 3]>,
    pub modes: Vec<Mode>,
}

impl ModeSet {
    pub fn validate(&self) -> Result<()> {
        for m in &self.modes {
            m.validate()?;
        }
        Ok(())
    }

    /// Also requires every mode to be sampled at every position.
    pub fn validate_samples(&self) -> Result<()> {
        self.validate()?;
        for (k, m) in self.modes.iter().enumerate() {
            if m.u_perp.len() != self.positions.len() {
                return Err(Error::Missing(format!(
                    "mode {k} has {} samples for {} positions",
                    m.u_perp.len(),
                    self.positions.len()
                )));
            }
        }
        Ok(())
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let set: Self = serde_json::from_str(s)?;
        set.validate()?;
        Ok(set)
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    /// Replaces positions and samples with those read from CSV.
    pub fn with_samples(mut self, samples: ModeSamples) -> Result<Self> {
        if samples.u_perp.len() != self.modes.len() {
            return Err(Error::DimensionMismatch {
                context: "sampled modes and mode parameters",
                expected: self.modes.len(),
                got: samples.u_perp.len(),
            });
        }
        for (m, u) in self.modes.iter_mut().zip(samples.u_perp) {
            m.u_perp = u;
        }
        self.positions = samples.positions;
        self.validate_samples()?;
        Ok(self)
    }
}

/// Outcome of a condensation criterion.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CondensationCheck {
    pub factor: f64,
    pub transition_possible: bool,
}

/// 4Δ₀/(ω₀ + 4Δ₀). A uniform condensate needs this to reach 1, which it never does.
pub fn nogo_factor(delta0: f64, omega0: f64) -> Result<CondensationCheck> {
    check_non_negative("Delta0", delta0)?;
    check_positive("omega0", omega0)?;
    Ok(CondensationCheck {
        factor: 4.0 * delta0 / (omega0 + 4.0 * delta0),
        transition_possible: false,
    })
}

/// N (c₀ᵉ)²/ω₀², the criterion once the diamagnetic term is dropped.
pub fn nogo_factor_without_a2(n: usize, c0e: f64, omega0: f64) -> Result<CondensationCheck> {
    check_non_negative("c0e", c0e.abs())?;
    check_positive("omega0", omega0)?;
    let factor = n as f64 * c0e * c0e / (omega0 * omega0);
    Ok(CondensationCheck {
        factor,
        transition_possible: factor >= 1.0,
    })
}

/// ΔE_M ≤ Σ ω̃_k n_k, with `occupations` as (ω̃_k, n_k) pairs.
pub fn nonuniform_criterion(delta_e_matter: f64, occupations: &[(f64, f64)]) -> Result<bool> {
    let mut budget = 0.0;
    for &(w, n) in occupations {
        check_positive("omega_tilde", w)?;
        check_non_negative("photon occupation", n)?;
        budget += w * n;
    }
    Ok(delta_e_matter <= budget)
}

/// Σ_k 4Δ_k/(ω_k + 4Δ_k), the prefactor of the induced (e·P)² term.
pub fn electron_gas_factor(modes: &ModeSet) -> Result<f64> {
    modes.validate()?;
    Ok(modes
        .modes
        .iter()
        .map(|m| 4.0 * m.delta / (m.omega + 4.0 * m.delta))
        .sum())
}

/// J such that H_eff = H_S - Σ_ij S_i · J_ij · S_j.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinCouplingMatrix {
    pub positions: Vec<[f64; 3]>,
    /// Row-major N x N array of 3x3 blocks.
    pub blocks: Vec<[[f64; 3]; 3]>,
}

impl SpinCouplingMatrix {
    pub fn sites(&self) -> usize {
        self.positions.len()
    }

    pub fn block(&self, i: usize, j: usize) -> &[[f64; 3]; 3] {
        &self.blocks[i * self.sites() + j]
    }

    /// The 3N x 3N real symmetric matrix, site-major.
    pub fn dense(&self) -> DMatrix<f64> {
        let n = self.sites();
        DMatrix::from_fn(3 * n, 3 * n, |r, c| self.block(r / 3, c / 3)[r % 3][c % 3])
    }
}

/// J_ij = Σ_κ (c_κ²/ω_κ) Re[u_κ(r_i) ⊗ u_κ*(r_j)], with c_κ the magnetic coupling.
///
/// Taking the real part combines each mode with its conjugate partner
/// u_{-k} = u_k*, which keeps J real and symmetric.
pub fn spin_coupling_matrix(modes: &ModeSet) -> Result<SpinCouplingMatrix> {
    modes.validate_samples()?;
    let n = modes.positions.len();
    let mut blocks = vec![[[0.0; 3]; 3]; n * n];
    for m in &modes.modes {
        let w = m.c_m * m.c_m / m.omega;
        for i in 0..n {
            for j in 0..n {
                let (ui, uj) = (&m.u_perp[i], &m.u_perp[j]);
                for (row, ua) in blocks[i * n + j].iter_mut().zip(ui) {
                    for (x, uc) in row.iter_mut().zip(uj) {
                        *x += w * (ua * uc.conj()).re;
                    }
                }
            }
        }
    }
    Ok(SpinCouplingMatrix {
        positions: modes.positions.clone(),
        blocks,
    })
}

fn real_vec(v: [f64; 3]) -> FieldSample {
    v.map(|x| C64::new(x, 0.0))
}

/// The k → 0 mode: u(r) = e at every site.
pub fn uniform_mode(
    positions: &[[f64; 3]],
    omega: f64,
    delta: f64,
    c_e: f64,
    c_m: f64,
    polarization: [f64; 3],
) -> Result<Mode> {
    let mode = Mode {
        omega,
        delta,
        c_e,
        c_m,
        polarization,
        u_perp: vec![real_vec(polarization); positions.len()],
    };
    mode.validate()?;
    Ok(mode)
}

/// Standing wave u(x) = √2 cos(qπx/L) e along x in a cavity of length L.
#[allow(clippy::too_many_arguments)]
pub fn standing_wave_mode(
    positions: &[[f64; 3]],
    length: f64,
    q: usize,
    omega: f64,
    delta: f64,
    c_e: f64,
    c_m: f64,
    polarization: [f64; 3],
) -> Result<Mode> {
    check_positive("cavity length", length)?;
    let amp = 2f64.sqrt();
    let u_perp = positions
        .iter()
        .map(|r| {
            let f = amp * (q as f64 * std::f64::consts::PI * r[0] / length).cos();
            real_vec(polarization.map(|e| e * f))
        })
        .collect();
    let mode = Mode {
        omega,
        delta,
        c_e,
        c_m,
        polarization,
        u_perp,
    };
    mode.validate()?;
    Ok(mode)
}

/// Mode functions read from a file, `u_perp[mode][site]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeSamples {
    pub positions: Vec<[f64; 3]>,
    pub u_perp: Vec<Vec<FieldSample>>,
}

#[derive(Debug, Deserialize)]
struct SampleRow {
    mode: usize,
    site: usize,
    x: f64,
    y: f64,
    z: f64,
    ux_re: f64,
    ux_im: f64,
    uy_re: f64,
    uy_im: f64,
    uz_re: f64,
    uz_im: f64,
}

/// Reads CSV rows `mode,site,x,y,z,ux_re,ux_im,uy_re,uy_im,uz_re,uz_im`.
///
/// Modes and sites are zero-based and every (mode, site) pair must appear
/// exactly once; a site must have the same position in every mode.
pub fn read_mode_samples_csv<R: Read>(reader: R) -> Result<ModeSamples> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let rows: Vec<SampleRow> = rdr.deserialize().collect::<std::result::Result<_, _>>()?;
    let n_modes = rows.iter().map(|r| r.mode + 1).max().unwrap_or(0);
    let n_sites = rows.iter().map(|r| r.site + 1).max().unwrap_or(0);
    let mut positions: Vec<Option<[f64; 3]>> = vec![None; n_sites];
    let mut u: Vec<Vec<Option<FieldSample>>> = vec![vec![None; n_sites]; n_modes];
    for r in rows {
        let pos = [r.x, r.y, r.z];
        match positions[r.site] {
            Some(p) if p != pos => {
                return Err(Error::Parse(format!(
                    "site {} has inconsistent positions",
                    r.site
                )));
            }
            _ => positions[r.site] = Some(pos),
        }
        let slot = &mut u[r.mode][r.site];
        if slot.is_some() {
            return Err(Error::Parse(format!(
                "duplicate sample for mode {} site {}",
                r.mode, r.site
            )));
        }
        *slot = Some([
            C64::new(r.ux_re, r.ux_im),
            C64::new(r.uy_re, r.uy_im),
            C64::new(r.uz_re, r.uz_im),
        ]);
    }
    let positions = positions
        .into_iter()
        .enumerate()
        .map(|(i, p)| p.ok_or_else(|| Error::Missing(format!("no samples for site {i}"))))
        .collect::<Result<Vec<_>>>()?;
    let u_perp = u
        .into_iter()
        .enumerate()
        .map(|(k, row)| {
            row.into_iter()
                .enumerate()
                .map(|(i, s)| {
                    s.ok_or_else(|| Error::Missing(format!("mode {k} is not sampled at site {i}")))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ModeSamples { positions, u_perp })
}

pub fn load_mode_samples_csv(path: &Path) -> Result<ModeSamples> {
    read_mode_samples_csv(std::fs::File::open(path)?)
}
