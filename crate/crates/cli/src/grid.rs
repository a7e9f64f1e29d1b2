use std::path::PathBuf;

use anyhow::{Context, Result};
use cavity_eft::models::ModelKind;
use cavity_eft::sweep::{LinearGrid, SweepSpec};
use clap::{Args, ValueEnum};

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Preset {
    /// Four models, three detunings, two temperatures, N = 30, N_ph = 100.
    Fig2,
    /// Finite-size scaling, N ∈ {10, 30, 60, 100}, βω_c = 5, N_ph = 10.
    Fig3,
}

/// Grid selection. Precedence: flags, then `--config`, then `--preset`, then defaults.
#[derive(Args, Debug, Default)]
pub struct GridArgs {
    /// JSON sweep specification.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Comma-separated model names.
    #[arg(long, value_delimiter = ',')]
    pub model: Vec<ModelKind>,
    /// Comma-separated system sizes.
    #[arg(long = "N", value_delimiter = ',')]
    pub n: Vec<usize>,
    #[arg(long)]
    pub nph: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub beta: Vec<f64>,
    /// Absolute spin splittings; stored as ω_z/ω_c.
    #[arg(long = "omega-z", value_delimiter = ',')]
    pub omega_z: Vec<f64>,
    #[arg(long = "omega-c")]
    pub omega_c: Option<f64>,
    /// λ/λ_c grid as start:stop:steps.
    #[arg(long = "lambda-grid")]
    pub lambda_grid: Option<LinearGrid>,
    /// Comma-separated outputs: f, photon_number, sx2_over_n2.
    #[arg(long, value_delimiter = ',')]
    pub outputs: Vec<String>,
    /// Wall-time cap per grid point, seconds.
    #[arg(long = "time-cap")]
    pub time_cap: Option<f64>,
    #[arg(long = "cutoff-tol")]
    pub cutoff_tol: Option<f64>,
    /// Skip the coherent-state bound check.
    #[arg(long = "no-hepp-lieb")]
    pub no_hepp_lieb: bool,
    /// Fill the wall_time_ms column.
    #[arg(long)]
    pub timing: bool,
}

fn default_spec() -> SweepSpec {
    SweepSpec {
        models: vec![ModelKind::FullPolaron],
        n: vec![30],
        beta: vec![5.0],
        omega_z_over_omega_c: vec![1.0],
        n_ph: 10,
        outputs: vec!["f".into()],
        ..SweepSpec::fig2()
    }
}

impl GridArgs {
    pub fn spec(&self) -> Result<SweepSpec> {
        let mut spec = match (&self.config, self.preset) {
            (Some(path), _) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                SweepSpec::from_json_str(&text)
                    .with_context(|| format!("parsing {}", path.display()))?
            }
            (None, Some(Preset::Fig2)) => SweepSpec::fig2(),
            (None, Some(Preset::Fig3)) => SweepSpec::fig3(),
            (None, None) => default_spec(),
        };
        if !self.model.is_empty() {
            spec.models = self.model.clone();
        }
        if !self.n.is_empty() {
            spec.n = self.n.clone();
        }
        if let Some(n_ph) = self.nph {
            spec.n_ph = n_ph;
        }
        if !self.beta.is_empty() {
            spec.beta = self.beta.clone();
        }
        if let Some(w) = self.omega_c {
            spec.omega_c = w;
        }
        if !self.omega_z.is_empty() {
            spec.omega_z_over_omega_c = self.omega_z.iter().map(|w| w / spec.omega_c).collect();
        }
        if let Some(g) = self.lambda_grid {
            spec.lambda_over_lambda_c = g.values();
        }
        if !self.outputs.is_empty() {
            spec.outputs = self.outputs.clone();
        }
        if self.time_cap.is_some() {
            spec.time_cap_s = self.time_cap;
        }
        if self.cutoff_tol.is_some() {
            spec.cutoff_tol = self.cutoff_tol;
        }
        if self.no_hepp_lieb {
            spec.hepp_lieb = false;
        }
        if self.timing {
            spec.timing = true;
        }
        spec.validate().context("invalid sweep configuration")?;
        Ok(spec)
    }
}
