//! Command-line front end: sweeps, single-point evaluations and self-tests.

mod grid;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use cavity_eft::applications::{
    electron_gas_factor, load_mode_samples_csv, nogo_factor, nogo_factor_without_a2,
    spin_coupling_matrix, ModeSet,
};
use cavity_eft::bogoliubov::{diagonalize_quadratic, QuadraticBosonForm};
use cavity_eft::effective::{matsubara_kernel, uniform_tau_grid, MatsubaraKernelSpec};
use cavity_eft::models::ModelKind;
use cavity_eft::selftest;
use cavity_eft::sweep::{compare_models, max_over_lambda, run_sweep};
use clap::{Parser, Subcommand};
use serde_json::json;

use grid::GridArgs;
use output::{Format, OutputArgs};

#[derive(Parser, Debug)]
#[command(
    name = "cavity-eft",
    version,
    about = "Effective matter Hamiltonians for cavity QED"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Free energies and observables over a parameter grid.
    Sweep {
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        out: OutputArgs,
        /// Print the max-over-λ relative difference to this model on stderr.
        #[arg(long)]
        baseline: Option<ModelKind>,
    },
    /// Thermodynamic-limit solution on a grid.
    Analytic {
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Exact diagonalization on a grid; drops the analytic model from presets.
    Ed {
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Bogoliubov diagonalization of a quadratic photon form.
    Bogoliubov {
        /// JSON file with `h1` and `h2`, each a matrix of [re, im] pairs.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Single-mode form ω a†a + Δ(a + a†)².
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        omega: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Imaginary-time kernel of a photon mode.
    Kernel {
        #[arg(long = "omega-tilde")]
        omega_tilde: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long = "n-max", default_value_t = 400)]
        n_max: usize,
        #[arg(long, default_value_t = 64)]
        points: usize,
        #[arg(long = "zero-mode-only")]
        zero_mode_only: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Photon-condensation criteria.
    Condensation {
        /// Mode-set JSON; evaluates every mode and the electron-gas factor.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        omega: Option<f64>,
        /// Particle number for the criterion without the A² term.
        #[arg(long = "N")]
        n: Option<usize>,
        #[arg(long = "c-e")]
        c_e: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cavity-mediated spin-spin coupling matrix.
    SpinCouplings {
        /// Mode-set JSON.
        #[arg(long)]
        config: PathBuf,
        /// CSV of sampled mode functions replacing those in the JSON.
        #[arg(long)]
        samples: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Structural invariant suites.
    Selftest,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run_grid(
    spec: cavity_eft::SweepSpec,
    out: &OutputArgs,
    baseline: Option<ModelKind>,
) -> Result<ExitCode> {
    let result = run_sweep(&spec, out.workers())?;
    let body = match out.format {
        Format::Csv => result.to_csv()?,
        Format::Jsonl => result.to_jsonl()?,
    };
    out.emit(&body)?;
    if let Some(base) = baseline {
        for m in max_over_lambda(&compare_models(&result, base)?) {
            eprintln!(
                "{} vs {base}: N={} beta={} omega_z={} max |df/f| = {:.6e} at lambda/lambda_c = {}",
                m.model,
                m.n,
                m.beta,
                m.omega_z,
                m.max_relative_difference,
                m.at_lambda_over_lambda_c
            );
        }
    }
    let failures = result.failures();
    if failures > 0 {
        eprintln!("{failures} of {} points failed", result.rows.len());
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Sweep {
            grid,
            out,
            baseline,
        } => {
            let spec = grid.spec()?;
            run_grid(spec, &out, baseline)
        }
        Command::Analytic { grid, out } => {
            if grid.model.iter().any(|&m| m != ModelKind::Analytic) {
                bail!("`analytic` only runs the analytic model");
            }
            let mut spec = grid.spec()?;
            spec.models = vec![ModelKind::Analytic];
            run_grid(spec, &out, None)
        }
        Command::Ed { grid, out } => {
            if grid.model.contains(&ModelKind::Analytic) {
                bail!("`ed` does not run the analytic model");
            }
            let mut spec = grid.spec()?;
            spec.models.retain(|&m| m != ModelKind::Analytic);
            if spec.models.is_empty() {
                spec.models = vec![ModelKind::FullPolaron];
            }
            run_grid(spec, &out, None)
        }
        Command::Bogoliubov {
            config: path,
            delta,
            omega,
            out,
        } => {
            let form = match (path, delta) {
                (Some(p), None) => output::read_form(&p),
                (None, Some(d)) => QuadraticBosonForm::single_mode(d, omega).map_err(Into::into),
                _ => Err(anyhow::anyhow!("give exactly one of --config or --delta")),
            }?;
            let b = diagonalize_quadratic(&form)?;
            let report = json!({
                "omega_tilde": b.omega_tilde,
                "ground_energy": b.ground_energy,
                "pseudo_unitarity_residual": b.pseudo_unitarity_residual(),
                "off_diagonal_residual": b.off_diagonal_residual(&form),
                "alpha": output::matrix_json(&b.alpha),
                "beta": output::matrix_json(&b.beta),
            });
            output::emit_to(
                out.as_deref(),
                &format!("{}\n", serde_json::to_string_pretty(&report)?),
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Kernel {
            omega_tilde,
            beta,
            n_max,
            points,
            zero_mode_only,
            out,
        } => {
            if !beta.is_finite() || beta <= 0.0 || points < 2 {
                bail!("need beta > 0 and at least 2 points");
            }
            let k = matsubara_kernel(&MatsubaraKernelSpec {
                omega_tilde,
                beta,
                n_max,
                tau_grid: uniform_tau_grid(beta, points),
                zero_mode_only,
            })?;
            let body = match out.format {
                Format::Jsonl => format!("{}\n", serde_json::to_string(&k)?),
                Format::Csv => output::kernel_csv(&k),
            };
            out.emit(&body)?;
            eprintln!(
                "delta weight {}, convergence {:.3e} at n_max = {}",
                k.delta_weight, k.convergence, k.n_max
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Condensation {
            config: path,
            delta,
            omega,
            n,
            c_e,
            out,
        } => {
            let report = if let Some(p) = path {
                let set =
                    ModeSet::load_json(&p).with_context(|| format!("reading {}", p.display()))?;
                let modes: Vec<_> = set
                    .modes
                    .iter()
                    .map(|m| {
                        nogo_factor(m.delta, m.omega).map(|c| {
                            json!({ "omega": m.omega, "delta": m.delta, "omega_tilde": m.omega_tilde(), "check": c })
                        })
                    })
                    .collect::<cavity_eft::Result<_>>()?;
                json!({ "modes": modes, "electron_gas_factor": electron_gas_factor(&set)? })
            } else {
                let omega = omega.context("--omega is required without --config")?;
                let mut report = serde_json::Map::new();
                if let Some(d) = delta {
                    report.insert("with_a2".into(), json!(nogo_factor(d, omega)?));
                }
                match (n, c_e) {
                    (Some(n), Some(c)) => {
                        report.insert(
                            "without_a2".into(),
                            json!(nogo_factor_without_a2(n, c, omega)?),
                        );
                    }
                    (None, None) => {}
                    _ => bail!("--N and --c-e go together"),
                }
                if report.is_empty() {
                    bail!("nothing to evaluate: give --delta or --N with --c-e");
                }
                serde_json::Value::Object(report)
            };
            output::emit_to(
                out.as_deref(),
                &format!("{}\n", serde_json::to_string_pretty(&report)?),
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::SpinCouplings {
            config: path,
            samples,
            out,
        } => {
            let set =
                ModeSet::load_json(&path).with_context(|| format!("reading {}", path.display()))?;
            let set = match samples {
                Some(s) => set.with_samples(load_mode_samples_csv(&s)?)?,
                None => set,
            };
            let j = spin_coupling_matrix(&set)?;
            output::emit_to(
                out.as_deref(),
                &format!("{}\n", serde_json::to_string_pretty(&j)?),
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Selftest => {
            let mut failed = 0;
            for s in selftest::run_all() {
                println!(
                    "{} {}: {} ({:.0} ms)",
                    if s.passed { "PASS" } else { "FAIL" },
                    s.name,
                    s.detail,
                    s.elapsed_ms
                );
                failed += usize::from(!s.passed);
            }
            if failed > 0 {
                eprintln!("{failed} suites failed");
                return Ok(ExitCode::from(2));
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
