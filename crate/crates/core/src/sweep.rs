//! Parameter sweeps over the Dicke testbed and their tabular output.
//!
//! Grid points are independent; a sweep runs them on a fixed-size worker pool
//! and merges results in grid order, so the CSV is identical for any worker
//! count. Wall times are the only non-deterministic quantity and are emitted
//! only on request.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ed::{dicke_thermo, hepp_lieb_check, EdOptions, PHOTON_NUMBER, SX2_OVER_N2};
use crate::error::{Error, Result};
use crate::models::{DickeParams, ModelKind};

fn default_omega_c() -> f64 {
    1.0
}

fn default_outputs() -> Vec<String> {
    vec!["f".into()]
}

fn default_true() -> bool {
    true
}

/// Inclusive linear grid `start:stop:steps`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearGrid {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl LinearGrid {
    pub fn values(&self) -> Vec<f64> {
        match self.steps {
            0 => Vec::new(),
            1 => vec![self.start],
            s => (0..s)
                .map(|i| self.start + (self.stop - self.start) * i as f64 / (s - 1) as f64)
                .collect(),
        }
    }
}

impl std::str::FromStr for LinearGrid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::Parse(format!("expected start:stop:steps, got `{s}`"));
        if parts.len() != 3 {
            return Err(bad());
        }
        Ok(Self {
            start: parts[0].trim().parse().map_err(|_| bad())?,
            stop: parts[1].trim().parse().map_err(|_| bad())?,
            steps: parts[2].trim().parse().map_err(|_| bad())?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub models: Vec<ModelKind>,
    /// Couplings in units of λ_c = sqrt(ω_c ω_z)/2.
    pub lambda_over_lambda_c: Vec<f64>,
    pub n: Vec<usize>,
    pub beta: Vec<f64>,
    pub omega_z_over_omega_c: Vec<f64>,
    #[serde(default = "default_omega_c")]
    pub omega_c: f64,
    pub n_ph: usize,
    /// Any of `f`, `photon_number`, `sx2_over_n2`.
    #[serde(default = "default_outputs")]
    pub outputs: Vec<String>,
    /// Check every boson-ED row against the coherent-state bound.
    #[serde(default = "default_true")]
    pub hepp_lieb: bool,
    #[serde(default)]
    pub time_cap_s: Option<f64>,
    #[serde(default)]
    pub cutoff_tol: Option<f64>,
    /// Record wall times (makes the output run-dependent).
    #[serde(default)]
    pub timing: bool,
}

pub const OUTPUT_NAMES: [&str; 3] = ["f", SX2_OVER_N2, PHOTON_NUMBER];

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        let empty = |what: &str| Error::Parse(format!("sweep grid `{what}` is empty"));
        if self.models.is_empty() {
            return Err(empty("models"));
        }
        if self.lambda_over_lambda_c.is_empty() {
            return Err(empty("lambda_over_lambda_c"));
        }
        if self.n.is_empty() {
            return Err(empty("n"));
        }
        if self.beta.is_empty() {
            return Err(empty("beta"));
        }
        if self.omega_z_over_omega_c.is_empty() {
            return Err(empty("omega_z_over_omega_c"));
        }
        for out in &self.outputs {
            if !OUTPUT_NAMES.contains(&out.as_str()) {
                return Err(Error::Parse(format!("unknown output `{out}`")));
            }
        }
        if let Some(cap) = self.time_cap_s {
            crate::error::check_positive("time_cap_s", cap)?;
        }
        for p in self.points() {
            p.params.validate()?;
        }
        Ok(())
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    fn wants_observables(&self) -> bool {
        self.outputs.iter().any(|o| o != "f")
    }

    /// Grid points in output order: model, ω_z/ω_c, β, N, then λ/λ_c.
    pub fn points(&self) -> Vec<GridPoint> {
        let mut out = Vec::new();
        for &model in &self.models {
            for &ratio in &self.omega_z_over_omega_c {
                for &beta in &self.beta {
                    for &n in &self.n {
                        for &l in &self.lambda_over_lambda_c {
                            let omega_z = ratio * self.omega_c;
                            let lambda_c = (self.omega_c * omega_z).sqrt() / 2.0;
                            out.push(GridPoint {
                                model,
                                lambda_over_lambda_c: l,
                                params: DickeParams {
                                    omega_c: self.omega_c,
                                    omega_z,
                                    lambda: l * lambda_c,
                                    n,
                                    n_ph: self.n_ph,
                                    beta,
                                },
                            });
                        }
                    }
                }
            }
        }
        out
    }

    /// Free-energy comparison of all four models on three detunings and two
    /// temperatures, N = 30, N_ph = 100.
    pub fn fig2() -> Self {
        Self {
            models: vec![
                ModelKind::FullPolaron,
                ModelKind::Effective,
                ModelKind::Sw,
                ModelKind::Analytic,
            ],
            lambda_over_lambda_c: crate::sweep::LinearGrid {
                start: 0.0,
                stop: 2.0,
                steps: 21,
            }
            .values(),
            n: vec![30],
            beta: vec![0.2, 5.0],
            omega_z_over_omega_c: vec![1.0 / 7.0, 1.0, 2.0],
            omega_c: 1.0,
            n_ph: 100,
            outputs: OUTPUT_NAMES.iter().map(|s| s.to_string()).collect(),
            hepp_lieb: true,
            time_cap_s: None,
            cutoff_tol: None,
            timing: false,
        }
    }

    /// Finite-size scaling at βω_c = 5, N_ph = 10.
    pub fn fig3() -> Self {
        Self {
            models: vec![
                ModelKind::FullPolaron,
                ModelKind::Effective,
                ModelKind::Analytic,
            ],
            n: vec![10, 30, 60, 100],
            beta: vec![5.0],
            n_ph: 10,
            outputs: default_outputs(),
            ..Self::fig2()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridPoint {
    pub model: ModelKind,
    pub lambda_over_lambda_c: f64,
    pub params: DickeParams,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub model: ModelKind,
    pub n: usize,
    pub n_ph: usize,
    pub beta: f64,
    pub omega_c: f64,
    pub omega_z: f64,
    pub lambda: f64,
    pub lambda_over_lambda_c: f64,
    pub f_per_site: Option<f64>,
    pub log_z: Option<f64>,
    pub photon_number: Option<f64>,
    pub sx2_over_n2: Option<f64>,
    pub log_z_tilde: Option<f64>,
    pub hepp_lieb_ok: Option<bool>,
    pub wall_time_ms: Option<f64>,
    pub error: Option<String>,
}

pub const COLUMNS: [&str; 16] = [
    "model",
    "N",
    "N_ph",
    "beta",
    "omega_c",
    "omega_z",
    "lambda",
    "lambda_over_lambda_c",
    "f_per_site",
    "log_Z",
    "photon_number",
    "sx2_over_n2",
    "log_Z_tilde",
    "hepp_lieb_ok",
    "wall_time_ms",
    "error",
];

/// 17 significant digits, enough to round-trip any f64.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

impl SweepRow {
    fn record(&self) -> Vec<String> {
        let opt = |x: Option<f64>| x.map(format_float).unwrap_or_default();
        vec![
            self.model.name().to_string(),
            self.n.to_string(),
            self.n_ph.to_string(),
            format_float(self.beta),
            format_float(self.omega_c),
            format_float(self.omega_z),
            format_float(self.lambda),
            format_float(self.lambda_over_lambda_c),
            opt(self.f_per_site),
            opt(self.log_z),
            opt(self.photon_number),
            opt(self.sx2_over_n2),
            opt(self.log_z_tilde),
            self.hepp_lieb_ok.map(|b| b.to_string()).unwrap_or_default(),
            opt(self.wall_time_ms),
            self.error.clone().unwrap_or_default(),
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(COLUMNS)?;
        for row in &self.rows {
            w.write_record(row.record())?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        for row in &self.rows {
            out.push_str(&serde_json::to_string(row)?);
            out.push('\n');
        }
        Ok(out)
    }
}

fn evaluate(point: &GridPoint, spec: &SweepSpec, parallel: bool) -> SweepRow {
    let p = point.params;
    let start = Instant::now();
    let mut row = SweepRow {
        model: point.model,
        n: p.n,
        n_ph: p.n_ph,
        beta: p.beta,
        omega_c: p.omega_c,
        omega_z: p.omega_z,
        lambda: p.lambda,
        lambda_over_lambda_c: point.lambda_over_lambda_c,
        f_per_site: None,
        log_z: None,
        photon_number: None,
        sx2_over_n2: None,
        log_z_tilde: None,
        hepp_lieb_ok: None,
        wall_time_ms: None,
        error: None,
    };
    let opts = EdOptions {
        observables: spec.wants_observables(),
        parallel,
        time_cap_s: spec.time_cap_s,
        cutoff_tol: spec.cutoff_tol,
    };
    match dicke_thermo(point.model, &p, &opts) {
        Ok(r) => {
            row.f_per_site = Some(r.free_energy_per_site);
            row.log_z = Some(r.log_z);
            let wanted = |name: &str| spec.outputs.iter().any(|o| o == name);
            if wanted(PHOTON_NUMBER) {
                row.photon_number = r.observable(PHOTON_NUMBER);
            }
            if wanted(SX2_OVER_N2) {
                row.sx2_over_n2 = r.observable(SX2_OVER_N2);
            }
            if spec.hepp_lieb && matches!(point.model, ModelKind::Full | ModelKind::FullPolaron) {
                match hepp_lieb_check(&p, r.log_z) {
                    Ok((tilde, _)) => {
                        row.log_z_tilde = Some(tilde);
                        row.hepp_lieb_ok = Some(true);
                    }
                    Err(e) => {
                        row.hepp_lieb_ok = Some(false);
                        row.error = Some(e.to_string());
                    }
                }
            }
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    if spec.timing {
        row.wall_time_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    row
}

/// Runs every grid point on `workers` threads; rows come back in grid order.
pub fn run_sweep(spec: &SweepSpec, workers: usize) -> Result<SweepResult> {
    spec.validate()?;
    let points = spec.points();
    let workers = workers.max(1);
    // Few points: let each one spread its sectors over the pool instead.
    let sector_parallel = points.len() < workers;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Io(e.to_string()))?;
    let rows = pool.install(|| {
        points
            .par_iter()
            .map(|pt| evaluate(pt, spec, sector_parallel))
            .collect()
    });
    Ok(SweepResult { rows })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub model: ModelKind,
    pub n: usize,
    pub beta: f64,
    pub omega_z: f64,
    pub lambda_over_lambda_c: f64,
    pub f: f64,
    pub f_baseline: f64,
    pub relative_difference: f64,
}

type PointKey = (usize, u64, u64, u64, u64);

fn key(r: &SweepRow) -> PointKey {
    (
        r.n,
        r.beta.to_bits(),
        r.omega_c.to_bits(),
        r.omega_z.to_bits(),
        r.lambda.to_bits(),
    )
}

/// |f - f_base| / |f_base| for every successful non-baseline row.
pub fn compare_models(result: &SweepResult, baseline: ModelKind) -> Result<Vec<Comparison>> {
    let base: HashMap<PointKey, f64> = result
        .rows
        .iter()
        .filter(|r| r.model == baseline)
        .filter_map(|r| r.f_per_site.map(|f| (key(r), f)))
        .collect();
    let mut out = Vec::new();
    for r in result.rows.iter().filter(|r| r.model != baseline) {
        let Some(f) = r.f_per_site else { continue };
        let f_base = *base.get(&key(r)).ok_or_else(|| {
            Error::Missing(format!(
                "no {baseline} row for N = {}, beta = {}, omega_z = {}, lambda = {}",
                r.n, r.beta, r.omega_z, r.lambda
            ))
        })?;
        out.push(Comparison {
            model: r.model,
            n: r.n,
            beta: r.beta,
            omega_z: r.omega_z,
            lambda_over_lambda_c: r.lambda_over_lambda_c,
            f,
            f_baseline: f_base,
            relative_difference: ((f - f_base) / f_base).abs(),
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaxDifference {
    pub model: ModelKind,
    pub n: usize,
    pub beta: f64,
    pub omega_z: f64,
    pub max_relative_difference: f64,
    pub at_lambda_over_lambda_c: f64,
}

/// Largest relative difference over the λ grid, per (model, N, β, ω_z).
pub fn max_over_lambda(comparisons: &[Comparison]) -> Vec<MaxDifference> {
    let mut out: Vec<MaxDifference> = Vec::new();
    for c in comparisons {
        let existing = out.iter_mut().find(|m| {
            m.model == c.model && m.n == c.n && m.beta == c.beta && m.omega_z == c.omega_z
        });
        match existing {
            Some(m) if c.relative_difference > m.max_relative_difference => {
                m.max_relative_difference = c.relative_difference;
                m.at_lambda_over_lambda_c = c.lambda_over_lambda_c;
            }
            Some(_) => {}
            None => out.push(MaxDifference {
                model: c.model,
                n: c.n,
                beta: c.beta,
                omega_z: c.omega_z,
                max_relative_difference: c.relative_difference,
                at_lambda_over_lambda_c: c.lambda_over_lambda_c,
            }),
        }
    }
    out
}

/// Writes `contents` to `path` through a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::Io(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(
        ".{}.tmp{}",
        name.to_string_lossy(),
        std::process::id()
    ));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })?;
    Ok(())
}
