use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use cavity_eft::bogoliubov::QuadraticBosonForm;
use cavity_eft::effective::MatsubaraKernel;
use cavity_eft::sweep::{format_float, write_atomic};
use cavity_eft::{CMatrix, C64};
use clap::{Args, ValueEnum};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Jsonl,
}

#[derive(Args, Debug)]
pub struct OutputArgs {
    /// Output file (written atomically); stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    pub workers: Option<usize>,
}

impl OutputArgs {
    pub fn workers(&self) -> usize {
        self.workers
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
    }

    pub fn emit(&self, body: &str) -> Result<()> {
        emit_to(self.out.as_deref(), body)
    }
}

pub fn emit_to(out: Option<&Path>, body: &str) -> Result<()> {
    match out {
        Some(path) => {
            write_atomic(path, body).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            std::io::stdout().lock().write_all(body.as_bytes())?;
            Ok(())
        }
    }
}

type Pairs = Vec<Vec<[f64; 2]>>;

fn to_matrix(rows: &Pairs, name: &str) -> Result<CMatrix> {
    let m = rows.len();
    if rows.iter().any(|r| r.len() != m) {
        anyhow::bail!("`{name}` must be a square matrix");
    }
    Ok(CMatrix::from_fn(m, m, |i, j| {
        C64::new(rows[i][j][0], rows[i][j][1])
    }))
}

/// Reads `{"h1": [[[re, im], ...], ...], "h2": ...}`.
pub fn read_form(path: &Path) -> Result<QuadraticBosonForm> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut parts: HashMap<String, Pairs> =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let mut take = |name: &str| {
        parts
            .remove(name)
            .with_context(|| format!("missing `{name}`"))
            .and_then(|rows| to_matrix(&rows, name))
    };
    let h1 = take("h1")?;
    let h2 = take("h2")?;
    Ok(QuadraticBosonForm::new(h1, h2)?)
}

pub fn matrix_json(m: &CMatrix) -> Pairs {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

pub fn kernel_csv(k: &MatsubaraKernel) -> String {
    let mut s = String::from("tau,even,odd,even_closed_form,double_bar_regular\n");
    for i in 0..k.tau.len() {
        let row = [
            k.tau[i],
            k.even[i],
            k.odd[i],
            k.even_closed_form[i],
            k.double_bar_regular[i],
        ];
        let cells: Vec<String> = row.iter().map(|&x| format_float(x)).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}
