//! Structural invariant suites, runnable from the command line.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::applications::{spin_coupling_matrix, standing_wave_mode, uniform_mode, ModeSet};
use crate::ed::{dicke_thermo, hepp_lieb_check, EdOptions};
use crate::effective::{kernel_sum_rule, matsubara_kernel, uniform_tau_grid, MatsubaraKernelSpec};
use crate::error::Result;
use crate::models::{DickeParams, ModelKind};
use crate::operator::{commutator, identity, max_abs, HermitianOperator, C64};
use crate::spin::{build_spin_operators, sector_list, HalfInt};
use crate::thermo::{log_sum_exp, HEPP_LIEB_TOL};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub elapsed_ms: f64,
}

fn run(name: &str, f: impl FnOnce() -> Result<(bool, String)>) -> SuiteOutcome {
    let start = Instant::now();
    let (passed, detail) = match f() {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    SuiteOutcome {
        name: name.to_string(),
        passed,
        detail,
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
    }
}

/// [S_x, S_y] = iS_z (and cyclic), S² = S(S+1) for 2S = 1..=20.
pub fn spin_algebra() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for twice in 1..=20 {
        let s = build_spin_operators(HalfInt::from_twice(twice)?);
        let i = C64::new(0.0, 1.0);
        worst = worst
            .max(max_abs(&(commutator(&s.sx, &s.sy) - &s.sz * i)))
            .max(max_abs(&(commutator(&s.sy, &s.sz) - &s.sx * i)))
            .max(max_abs(&(commutator(&s.sz, &s.sx) - &s.sy * i)));
        let sv = s.spin.value();
        let casimir = &s.sx * &s.sx + &s.sy * &s.sy + &s.sz * &s.sz;
        worst = worst.max(max_abs(
            &(casimir - identity(s.dim()) * C64::new(sv * (sv + 1.0), 0.0)),
        ));
    }
    Ok((worst < 1e-10, format!("max closure defect {worst:.3e}")))
}

/// Σ_S Ω(S, N)(2S + 1) = 2^N for N = 1..=60.
pub fn degeneracy_sum_rule() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for n in 1..=60usize {
        let terms: Vec<f64> = sector_list(n)?
            .iter()
            .map(|s| s.log_degeneracy + (s.dim as f64).ln())
            .collect();
        let target = n as f64 * 2f64.ln();
        worst = worst.max((log_sum_exp(&terms) - target).abs() / target);
    }
    Ok((
        worst < 1e-12,
        format!("max relative defect in ln 2^N {worst:.3e}"),
    ))
}

/// ln Z̃ ≤ ln Z ≤ ln Z̃ + βω_c for every ED point computed here.
pub fn hepp_lieb_sandwich() -> Result<(bool, String)> {
    let mut count = 0;
    let mut min_gap = f64::INFINITY;
    let mut min_slack = f64::INFINITY;
    for n in [2usize, 5, 8] {
        for ratio in [0.5f64, 1.0, 2.0] {
            for beta in [0.2, 1.0, 5.0] {
                for l in [0.0, 0.5, 1.0, 1.5, 2.0] {
                    let lambda_c = ratio.sqrt() / 2.0;
                    let p = DickeParams::new(1.0, ratio, l * lambda_c, n, 40, beta)?;
                    let opts = EdOptions {
                        parallel: false,
                        ..EdOptions::default()
                    };
                    let r = dicke_thermo(ModelKind::FullPolaron, &p, &opts)?;
                    let (_, check) = hepp_lieb_check(&p, r.log_z)?;
                    min_gap = min_gap.min(check.gap);
                    min_slack = min_slack.min(check.upper_slack);
                    count += 1;
                }
            }
        }
    }
    Ok((
        min_gap > -HEPP_LIEB_TOL && min_slack > -HEPP_LIEB_TOL,
        format!("{count} points; min lower gap {min_gap:.3e}, min upper slack {min_slack:.3e}"),
    ))
}

/// Deterministic pseudo-random numbers in [-1, 1).
fn scrambled(i: usize) -> f64 {
    let x = ((i as f64 + 1.0) * 12.9898).sin() * 43758.5453;
    2.0 * (x - x.floor()) - 1.0
}

/// J is PSD for random complex modes; a single uniform mode gives rank one.
pub fn spin_coupling_structure() -> Result<(bool, String)> {
    let positions: Vec<[f64; 3]> = (0..6).map(|i| [0.13 * i as f64, 0.0, 0.0]).collect();
    let mut k = 0;
    let mut next = || {
        k += 1;
        scrambled(k)
    };
    let mut modes = Vec::new();
    for _ in 0..3 {
        let mut m = standing_wave_mode(
            &positions,
            1.0,
            1,
            1.0 + next().abs(),
            0.0,
            0.0,
            next(),
            [0.0, 0.0, 1.0],
        )?;
        for u in m.u_perp.iter_mut() {
            *u = [
                C64::new(next(), next()),
                C64::new(next(), next()),
                C64::new(next(), next()),
            ];
        }
        modes.push(m);
    }
    let random = spin_coupling_matrix(&ModeSet {
        positions: positions.clone(),
        modes,
    })?;
    let dense = random.dense();
    let symmetric = (&dense - dense.transpose()).amax() < 1e-14;
    let ev = HermitianOperator::from_real(&dense).eigenvalues()?;
    let psd = ev[0] >= -1e-12;

    let uniform = spin_coupling_matrix(&ModeSet {
        positions: positions.clone(),
        modes: vec![uniform_mode(
            &positions,
            2.0,
            0.0,
            0.0,
            0.7,
            [0.0, 1.0, 0.0],
        )?],
    })?;
    let ev_u = HermitianOperator::from_real(&uniform.dense()).eigenvalues()?;
    let scale = ev_u.last().copied().unwrap_or(0.0);
    let rank = ev_u
        .iter()
        .filter(|e| e.abs() > 1e-12 * scale.max(1.0))
        .count();
    let expected_top = positions.len() as f64 * 0.49 / 2.0;
    let rank_one = rank == 1 && (scale - expected_top).abs() < 1e-12;
    Ok((
        symmetric && psd && rank_one,
        format!("min eigenvalue {:.3e}, uniform-mode rank {rank}", ev[0]),
    ))
}

/// K_odd(τ) = -K_odd(β - τ) and (1/β)∫K̄ = 1.
pub fn kernel_properties() -> Result<(bool, String)> {
    let mut worst_parity: f64 = 0.0;
    let mut worst_sum: f64 = 0.0;
    for (w, beta) in [(1.0, 5.0), (0.3, 2.0), (4.0, 1.0)] {
        let points = 64;
        let k = matsubara_kernel(&MatsubaraKernelSpec {
            omega_tilde: w,
            beta,
            n_max: 400,
            tau_grid: uniform_tau_grid(beta, points),
            zero_mode_only: false,
        })?;
        for i in 1..points {
            worst_parity = worst_parity.max((k.odd[i] + k.odd[points - i]).abs());
        }
        worst_sum = worst_sum.max((kernel_sum_rule(w, beta, 400, 4000)? - 1.0).abs());
    }
    Ok((
        worst_parity < 1e-8 && worst_sum < 1e-8,
        format!("parity defect {worst_parity:.3e}, sum-rule defect {worst_sum:.3e}"),
    ))
}

pub fn run_all() -> Vec<SuiteOutcome> {
    vec![
        run("spin algebra closure", spin_algebra),
        run("degeneracy sum rule (N <= 60)", degeneracy_sum_rule),
        run("Hepp-Lieb sandwich", hepp_lieb_sandwich),
        run(
            "spin-coupling PSD and uniform rank one",
            spin_coupling_structure,
        ),
        run("kernel parity and sum rule", kernel_properties),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_suites_pass() {
        for s in run_all() {
            assert!(s.passed, "{}: {}", s.name, s.detail);
        }
    }
}
