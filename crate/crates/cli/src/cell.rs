//! A single optimization cell: build the problem, run Krotov, analyze the field.

use std::path::Path;

use spinoc_core::basis::{enumerate_sector, parity_adapt, Parity};
use spinoc_core::dynamics::{PropagationCache, State};
use spinoc_core::field_analysis::{analyze, power_spectrum, SpectralMetrics};
use spinoc_core::io::{write_field, write_fidelity_history, write_spectrum, write_state};
use spinoc_core::krotov::{optimize_with_cache, KrotovConfig, OptimizationResult};
use spinoc_core::operators::{build_control, build_h0, build_h01};
use spinoc_core::protocols::{build_process_a, build_process_b};
use spinoc_core::spectral_stats::{diagonalize, energy_spread};
use spinoc_core::ProcessKind;

use crate::config::ExperimentConfig;
use crate::{write_file, CliError};

/// Coordinates of one sweep cell. `seed` is 0 for process A.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellKey {
    pub process: ProcessKind,
    pub k: usize,
    pub gamma: f64,
    pub j: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct CellOutcome {
    pub key: CellKey,
    /// NaN entries when the field has no spectral content.
    pub metrics: SpectralMetrics,
    pub fidelity: f64,
    pub iterations: usize,
    pub delta_e: f64,
    pub converged: bool,
}

/// Everything produced by [`solve_cell`].
#[derive(Debug, Clone)]
pub struct CellRun {
    pub outcome: CellOutcome,
    pub krotov: KrotovConfig,
    pub result: OptimizationResult,
    pub psi0: State,
    pub psi_f: State,
}

pub fn solve_cell(cfg: &ExperimentConfig, key: CellKey) -> Result<CellRun, CliError> {
    let params = cfg.params(key.gamma, key.j);
    params.validate()?;
    let basis = parity_adapt(&enumerate_sector(params.l, key.k)?, Parity::Even);
    let h01 = build_h01(&params, &basis)?;
    let hc = build_control(cfg.control, &params, &basis)?;
    let (psi0, psi_f) = match key.process {
        ProcessKind::A => build_process_a(&basis)?,
        ProcessKind::B => {
            let h0 = diagonalize(&build_h0(&params, &basis)?)?;
            let (a, b, _) = build_process_b(&basis, &h0, key.seed, cfg.amplitude_distribution)?;
            (a, b)
        }
    };

    let mut krotov = cfg.krotov.to_config(&params);
    let cache = PropagationCache::new(&h01, &hc, krotov.dt)?;
    if cfg.krotov.scale_lambda_by_control_norm {
        krotov = krotov.scale_lambda_for_control(cache.control_norm(), params.j);
    }
    let result = optimize_with_cache(&psi0, &psi_f, &cache, &krotov)?;
    let metrics = match analyze(&result.field, cfg.analysis.beta_cutoff, cfg.analysis.remove_dc) {
        Ok(m) => m,
        Err(spinoc_core::Error::EmptySpectrum) => SpectralMetrics {
            omega_bw: f64::NAN,
            sipr: f64::NAN,
            siprn: f64::NAN,
            beta_cutoff: cfg.analysis.beta_cutoff,
        },
        Err(e) => return Err(e.into()),
    };
    let outcome = CellOutcome {
        key,
        metrics,
        fidelity: result.final_fidelity(),
        iterations: result.iterations,
        delta_e: energy_spread(cache.free_energies()),
        converged: result.converged,
    };
    Ok(CellRun {
        outcome,
        krotov,
        result,
        psi0,
        psi_f,
    })
}

/// Run the configured single cell and dump its field, spectrum, history and
/// states under `out`.
pub fn run_optimize(cfg: &ExperimentConfig, out: &Path) -> Result<CellOutcome, CliError> {
    let c = cfg.cell;
    let key = CellKey {
        process: c.process,
        k: c.k,
        gamma: c.gamma,
        j: c.j,
        seed: if c.process == ProcessKind::A { 0 } else { c.seed },
    };
    let run = solve_cell(cfg, key)?;
    write_file(&out.join("field.csv"), |w| write_field(w, &run.result.field))?;
    write_file(&out.join("fidelity_history.csv"), |w| {
        write_fidelity_history(w, &run.result.fidelity_history)
    })?;
    if let Ok(spec) = power_spectrum(&run.result.field, cfg.analysis.remove_dc) {
        write_file(&out.join("field_spectrum.csv"), |w| write_spectrum(w, &spec))?;
    }
    write_file(&out.join("psi0.csv"), |w| write_state(w, &run.psi0))?;
    write_file(&out.join("psif.csv"), |w| write_state(w, &run.psi_f))?;
    write_file(&out.join("cell.csv"), |w| {
        crate::sweep::write_header(w)?;
        crate::sweep::write_row(w, cfg, &run.outcome)
    })?;
    Ok(run.outcome)
}
