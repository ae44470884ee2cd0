//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::time::Instant;

use common::*;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spinoc_cli::cell::{solve_cell, CellKey};
use spinoc_cli::config::{BrodySettings, DiffHistSettings, DiffRange, ExperimentConfig, Preset};
use spinoc_cli::spectra::{brody_table, difference_histograms};
use spinoc_cli::sweep::run_sweep;
use spinoc_core::basis::{enumerate_sector, parity_adapt, ChainParams, Parity};
use spinoc_core::dynamics::{norm, propagate_forward, ControlField, PropagationCache, State};
use spinoc_core::field_analysis::{analyze, bandwidth, sipr, siprn_upper_bound, FieldSpectrum};
use spinoc_core::krotov::{
    fidelity, fidelity_gradient, krotov_iteration_with, KrotovConfig, UpdateScheme,
};
use spinoc_core::operators::{build_control, build_h01, OperatorMatrix};
use spinoc_core::spectral_stats::{brody_fit, SpacingSample, SpacingSource};
use spinoc_core::{ControlOperatorKind, ProcessKind};

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn desk() -> ExperimentConfig {
    ExperimentConfig::preset(Preset::Desk)
}

fn cell(process: ProcessKind, k: usize, gamma: f64, j: f64) -> CellKey {
    CellKey {
        process,
        k,
        gamma,
        j,
        seed: 0,
    }
}

fn sector_arithmetic() -> Outcome {
    let start = Instant::now();
    let dims: Vec<usize> = (1..=4).map(|k| enumerate_sector(15, k).unwrap().dim()).collect();
    let even = parity_adapt(&enumerate_sector(15, 4).unwrap(), Parity::Even).dim();
    let secs = start.elapsed().as_secs_f64();
    outcome(
        dims == [15, 105, 455, 1365] && even == 693 && secs < 1.0,
        format!("D_K = {dims:?}, D_(4,+) = {even}, {secs:.3} s"),
    )
}

/// Gamma values where `beta` crosses 0.5, by linear interpolation.
fn crossings(gammas: &[f64], betas: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 1..gammas.len() {
        let (b0, b1) = (betas[i - 1] - 0.5, betas[i] - 0.5);
        if b0 == 0.0 {
            out.push(gammas[i - 1]);
        } else if b0 * b1 < 0.0 {
            out.push(gammas[i - 1] + (gammas[i] - gammas[i - 1]) * b0 / (b0 - b1));
        }
    }
    if betas.last() == Some(&0.5) {
        out.push(*gammas.last().unwrap());
    }
    out
}

fn chaos_transition() -> Outcome {
    let settings = BrodySettings {
        l: 15,
        k_values: vec![4],
        gamma_grid: (0..=10).map(|i| i as f64 / 10.0).collect(),
        epsilon_grid: vec![-3.0, 0.0, 3.0],
        ..BrodySettings::default()
    };
    let rows = brody_table(&desk().chain, &settings, 0).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for &eps in &settings.epsilon_grid {
        let betas: Vec<f64> = settings
            .gamma_grid
            .iter()
            .map(|&g| rows.iter().find(|r| r.gamma == g && r.epsilon == eps).unwrap().beta)
            .collect();
        let cross = crossings(&settings.gamma_grid, &betas);
        let ok = betas[0] <= 0.35
            && betas[10] >= 0.65
            && !cross.is_empty()
            && cross.iter().all(|c| (0.3..=0.7).contains(c));
        pass &= ok;
        parts.push(format!(
            "eps={eps}: beta(0)={:.3} beta(1)={:.3} crossing {:?}",
            betas[0],
            betas[10],
            cross.iter().map(|c| (c * 1000.0).round() / 1000.0).collect::<Vec<_>>()
        ));
    }
    outcome(pass, format!("trim {} | {}", settings.trim_fraction, parts.join(" | ")))
}

fn difference_convergence() -> Outcome {
    let start = Instant::now();
    let settings = DiffHistSettings {
        l: 15,
        k: 4,
        gammas: vec![0.0, 1.0],
        m_values: vec![DiffRange::Fixed(1), DiffRange::FractionOfDim { fraction_of_dim: 0.1 }],
        bins: 40,
        upper: 4.0,
        trim_fraction: 0.0,
    };
    let r = difference_histograms(&desk().chain, &settings).unwrap();
    let ratio = r[1].l1_distance / r[0].l1_distance;
    let secs = start.elapsed().as_secs_f64();
    outcome(
        r[1].m == 70 && ratio < 0.25 && secs < 60.0,
        format!(
            "L1(M=1) = {:.4}, L1(M={}) = {:.4}, ratio {:.3}, {secs:.1} s",
            r[0].l1_distance, r[1].m, r[1].l1_distance, ratio
        ),
    )
}

fn krotov_convergence() -> Outcome {
    let cfg = desk();
    let mut pass = true;
    let mut parts = Vec::new();
    for gamma in [0.0, 1.0] {
        let run = solve_cell(&cfg, cell(ProcessKind::A, 1, gamma, 1.0)).unwrap();
        let worst = run
            .result
            .fidelity_history
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min);
        pass &= run.outcome.fidelity >= 0.99 && worst >= -1e-10;
        parts.push(format!(
            "Gamma={gamma}: F={:.5} after {} it, min dF={:.1e}",
            run.outcome.fidelity, run.outcome.iterations, worst
        ));
    }
    outcome(pass, parts.join(" | "))
}

fn bandwidth_physics() -> Outcome {
    let cfg = desk();
    let run = |k, gamma, j| solve_cell(&cfg, cell(ProcessKind::A, k, gamma, j)).unwrap().outcome;
    let grid = [0.0, 1.0];
    let k1: Vec<_> = grid.iter().map(|&g| run(1, g, 1.0)).collect();
    let k2: Vec<_> = grid.iter().map(|&g| run(2, g, 1.0)).collect();

    let mut parts = Vec::new();
    let mut a_ok = true;
    for (i, g) in grid.iter().enumerate() {
        let (a, b) = (k1[i].metrics.omega_bw, k2[i].metrics.omega_bw);
        let rel = (a - b).abs() / a.min(b);
        a_ok &= rel <= 0.2;
        parts.push(format!("(a) Gamma={g}: bw K1={a:.3} K2={b:.3} diff {:.1}%", 100.0 * rel));
    }

    let mut b_ok = true;
    for (k, base) in [(1, &k1[1]), (2, &k2[1])] {
        let doubled = run(k, 1.0, 2.0);
        let ratio = doubled.metrics.omega_bw / base.metrics.omega_bw;
        b_ok &= (ratio - 2.0).abs() <= 0.2;
        parts.push(format!("(b) K={k}: bw(2J)/bw(J) = {ratio:.3}"));
    }

    let mean = |v: &[spinoc_cli::cell::CellOutcome]| {
        v.iter().map(|o| o.metrics.siprn).sum::<f64>() / v.len() as f64
    };
    let (s1, s2) = (mean(&k1), mean(&k2));
    let c_ok = s2 > s1;
    parts.push(format!("(c) mean siprn K1={s1:.4} K2={s2:.4}"));
    let converged = k1.iter().chain(&k2).all(|o| o.converged);
    parts.push(format!("all converged: {converged}"));
    outcome(a_ok && b_ok && c_ok, parts.join(" | "))
}

fn long_range_contrast() -> Outcome {
    let cfg = ExperimentConfig::from_json(
        Preset::Desk,
        r#"{"processes": ["A"], "k_values": [1, 2], "control": "long_range"}"#,
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let summary = run_sweep(&cfg, dir.path()).unwrap();
    let mut pass = true;
    let mut worst_margin = f64::INFINITY;
    for &g in &cfg.gamma_grid {
        let bw = |k: usize| {
            summary.rows.iter().find(|r| r.k == k && r.gamma == g).unwrap().omega_bw
        };
        let (b1, b2) = (bw(1), bw(2));
        pass &= b2 > b1;
        worst_margin = worst_margin.min(b2 - b1);
    }
    let missed: Vec<String> = summary
        .rows
        .iter()
        .filter(|r| !r.converged)
        .map(|r| format!("K={} Gamma={} F={:.4}", r.k, r.gamma, r.fidelity))
        .collect();
    outcome(
        pass,
        format!(
            "{} Gamma points, min bw(K2)-bw(K1) = {worst_margin:.3}; not converged: [{}]",
            cfg.gamma_grid.len(),
            missed.join(", ")
        ),
    )
}

fn random_state(dim: usize, rng: &mut ChaCha8Rng) -> State {
    let v = State::from_fn(dim, |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    let n = norm(&v);
    v / c(n)
}

fn sector_ops(l: usize, k: usize, kind: ControlOperatorKind) -> (OperatorMatrix, OperatorMatrix) {
    let p = ChainParams::new(l, 1.0, 0.6, 0.5).unwrap();
    let s = enumerate_sector(l, k).unwrap();
    (build_h01(&p, &s).unwrap(), build_control(kind, &p, &s).unwrap())
}

fn strang_order() -> (bool, String) {
    let mut ok = true;
    let mut orders = Vec::new();
    for kind in [ControlOperatorKind::LocalEdge, ControlOperatorKind::LongRange] {
        let (h01, hc) = sector_ops(4, 2, kind);
        let a = to_complex(h01.data());
        let b = to_complex(hc.data());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let psi0 = random_state(h01.dim(), &mut rng);
        let err = |dt: f64| {
            let n = (2.0 / dt).round() as usize;
            let s: Vec<f64> = (0..n)
                .map(|j| {
                    let t = (j as f64 + 0.5) * dt;
                    0.8 * (1.3 * t).sin() + 0.3 * (2.9 * t).cos()
                })
                .collect();
            let field = ControlField::new(dt, s).unwrap();
            let cache = PropagationCache::new(&h01, &hc, dt).unwrap();
            let ours = propagate_forward(&psi0, &field, &cache).unwrap();
            let mut exact = psi0.clone();
            for &e in field.samples() {
                exact = unitary(&(&a + &b * c(e)), dt) * exact;
            }
            norm(&(ours - exact))
        };
        let order = (err(0.02) / err(0.01)).log2();
        ok &= (1.8..=2.2).contains(&order);
        orders.push(format!("{order:.3}"));
    }
    (ok, format!("Strang order {}", orders.join("/")))
}

fn norm_drift() -> (bool, String) {
    let p = ChainParams::new(9, 1.0, 0.5, 0.5).unwrap();
    let basis = parity_adapt(&enumerate_sector(9, 2).unwrap(), Parity::Even);
    let h01 = build_h01(&p, &basis).unwrap();
    let mut worst = 0.0f64;
    for kind in [ControlOperatorKind::LocalEdge, ControlOperatorKind::LongRange] {
        let hc = build_control(kind, &p, &basis).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = (0..100_000).map(|_| 4.0 * rng.random::<f64>() - 2.0).collect();
        let field = ControlField::new(0.01, s).unwrap();
        let cache = PropagationCache::new(&h01, &hc, 0.01).unwrap();
        let psi = propagate_forward(&random_state(basis.dim(), &mut rng), &field, &cache).unwrap();
        worst = worst.max((norm(&psi) - 1.0).abs());
    }
    (worst < 1e-9, format!("norm drift {worst:.1e}"))
}

fn gradient_check() -> (bool, String) {
    let (h01, hc) = sector_ops(4, 2, ControlOperatorKind::LocalEdge);
    let params = ChainParams::new(4, 1.0, 0.6, 0.5).unwrap();
    // One transfer time keeps the finite differences affordable.
    let mut cfg = KrotovConfig::for_chain(&params);
    cfg.total_time = params.transfer_time();
    cfg.lambda0 = spinoc_core::krotov::DEFAULT_LAMBDA_TIMES_T / cfg.total_time;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let psi0 = random_state(h01.dim(), &mut rng);
    let psi_f = random_state(h01.dim(), &mut rng);
    let cache = PropagationCache::new(&h01, &hc, cfg.dt).unwrap();
    let field = cfg.guess_field().unwrap();
    let f = |fl: &ControlField| {
        fidelity(&propagate_forward(&psi0, fl, &cache).unwrap(), &psi_f).unwrap()
    };
    let h = 1e-4;
    let fd: Vec<f64> = (0..field.len())
        .map(|j| {
            let mut up = field.clone();
            let mut down = field.clone();
            up.samples_mut()[j] += h;
            down.samples_mut()[j] -= h;
            (f(&up) - f(&down)) / (2.0 * h)
        })
        .collect();
    let exact = fidelity_gradient(&field, &psi0, &psi_f, &cache).unwrap();
    let cos_exact = cosine(&exact, &fd);
    let mut ok = cos_exact > 0.999;
    let mut parts = vec![format!("gradient cos {cos_exact:.6}")];
    for scheme in [UpdateScheme::Sequential, UpdateScheme::Concurrent] {
        let next = krotov_iteration_with(&field, &psi0, &psi_f, &cache, cfg.lambda0, scheme).unwrap();
        let delta: Vec<f64> = next.samples().iter().zip(field.samples()).map(|(a, b)| a - b).collect();
        let cos = cosine(&delta, &fd);
        ok &= cos > 0.999;
        parts.push(format!("{scheme:?} update cos {cos:.6}"));
    }
    (ok, parts.join(", "))
}

fn brody_recovery() -> (bool, String) {
    let mut ok = true;
    let mut fits = Vec::new();
    for (i, beta0) in [0.0, 0.3, 0.7, 1.0].into_iter().enumerate() {
        let s = SpacingSample::from_raw(brody_samples(beta0, 10_000, 40 + i as u64), SpacingSource::Consecutive)
            .unwrap();
        let beta = brody_fit(&s).unwrap().beta;
        ok &= (beta - beta0).abs() <= 0.05;
        fits.push(format!("{beta:.3}"));
    }
    (ok, format!("Brody fits [{}]", fits.join(", ")))
}

fn flat_spectrum() -> (bool, String) {
    let domega = 0.25;
    let spec = FieldSpectrum::from_weights(domega, 1, vec![1.0; 100]).unwrap();
    let w = 100.0 * domega;
    let beta = 0.01;
    let bw = bandwidth(&spec, beta);
    let s = sipr(&spec);
    let ok = (s - w).abs() <= 1e-12 * w && (bw - (1.0 - beta) * w).abs() <= 1e-12 * w;
    (ok, format!("flat sIPR {s} (W {w}), bw {bw}"))
}

fn siprn_bound() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for _ in 0..100 {
        let n = rng.random_range(64..2048);
        let beta = rng.random_range(0.001..0.3);
        let samples = (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        let m = analyze(&ControlField::new(0.01, samples).unwrap(), beta, true).unwrap();
        let ratio = m.siprn / siprn_upper_bound(beta);
        ok &= ratio <= 1.0;
        worst = worst.max(ratio);
    }
    (ok, format!("max siprn/bound {worst:.3}"))
}

fn kernels() -> Outcome {
    let start = Instant::now();
    let checks = [strang_order(), norm_drift(), gradient_check(), brody_recovery(), flat_spectrum(), siprn_bound()];
    let secs = start.elapsed().as_secs_f64();
    let pass = checks.iter().all(|(ok, _)| *ok) && secs < 60.0;
    let detail: Vec<String> = checks
        .iter()
        .map(|(ok, d)| if *ok { d.clone() } else { format!("FAILED {d}") })
        .collect();
    outcome(pass, format!("{}; {secs:.1} s", detail.join("; ")))
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("sector arithmetic", sector_arithmetic),
        ("chaos transition", chaos_transition),
        ("difference-histogram convergence", difference_convergence),
        ("Krotov convergence", krotov_convergence),
        ("bandwidth physics", bandwidth_physics),
        ("long-range control contrast", long_range_contrast),
        ("numerical kernels", kernels),
    ];
    let only: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !only.is_empty() && !only.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {n} ({name}): {} [{:.1} s] {}",
            if o.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            o.detail
        );
    }
    if failed > 0 {
        println!("acceptance: {failed} criterion(s) failed");
        std::process::exit(1);
    }
    println!("acceptance: all criteria passed");
}
