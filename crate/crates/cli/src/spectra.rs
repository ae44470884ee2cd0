//! Spectral-only experiments: Brody sweeps, energy-difference histograms and
//! control connectivity maps.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use spinoc_core::basis::{enumerate_sector, parity_adapt, ChainParams, Parity, ParityBasis};
use spinoc_core::io::{fmt_float, write_histogram, write_matrix_grid};
use spinoc_core::operators::{build_control, build_h01, matrix_in_eigenbasis};
use spinoc_core::spectral_stats::{
    brody_fit, density_poisson, density_wigner_dyson, diagonalize, energy_differences,
    level_spacings, Histogram,
};
use spinoc_core::ControlOperatorKind;

use crate::config::{BrodySettings, DiffHistSettings, ExperimentConfig};
use crate::{thread_pool, write_file, CliError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BrodyRow {
    pub k: usize,
    pub gamma: f64,
    pub epsilon: f64,
    /// NaN when the sector has too few levels to fit.
    pub beta: f64,
    pub samples: usize,
    pub low_statistics: bool,
}

fn even_basis(l: usize, k: usize) -> Result<ParityBasis, CliError> {
    Ok(parity_adapt(&enumerate_sector(l, k)?, Parity::Even))
}

fn sorted_levels(params: &ChainParams, basis: &ParityBasis, epsilon: f64) -> Result<Vec<f64>, CliError> {
    let mut h = build_h01(params, basis)?;
    if epsilon != 0.0 {
        h = h.add_scaled(epsilon, &build_control(ControlOperatorKind::LocalEdge, params, basis)?)?;
    }
    Ok(diagonalize(&h)?.energies().iter().copied().collect())
}

/// Brody parameter of `H01 + eps Hc` for every `(K, gamma, eps)` cell, in
/// grid order.
pub fn brody_table(
    chain: &ChainParams,
    settings: &BrodySettings,
    jobs: usize,
) -> Result<Vec<BrodyRow>, CliError> {
    let mut cells = Vec::new();
    for &k in &settings.k_values {
        for &gamma in &settings.gamma_grid {
            for &epsilon in &settings.epsilon_grid {
                cells.push((k, gamma, epsilon));
            }
        }
    }
    let bases: Vec<(usize, ParityBasis)> = settings
        .k_values
        .iter()
        .map(|&k| even_basis(settings.l, k).map(|b| (k, b)))
        .collect::<Result<_, _>>()?;
    let pool = thread_pool(jobs)?;
    pool.install(|| {
        cells
            .par_iter()
            .map(|&(k, gamma, epsilon)| {
                let basis = &bases.iter().find(|(kk, _)| *kk == k).expect("basis built").1;
                let params = ChainParams {
                    l: settings.l,
                    gamma,
                    ..*chain
                };
                let levels = sorted_levels(&params, basis, epsilon)?;
                let low = k < settings.min_reliable_k;
                let fit = level_spacings(&levels, settings.trim_fraction).and_then(|s| brody_fit(&s));
                Ok(match fit {
                    Ok(f) => BrodyRow {
                        k,
                        gamma,
                        epsilon,
                        beta: f.beta,
                        samples: f.samples,
                        low_statistics: low || f.degenerate,
                    },
                    Err(spinoc_core::Error::TooFewSamples { found, .. }) => BrodyRow {
                        k,
                        gamma,
                        epsilon,
                        beta: f64::NAN,
                        samples: found,
                        low_statistics: true,
                    },
                    Err(e) => return Err(e.into()),
                })
            })
            .collect()
    })
}

/// Mean `beta` over the epsilon grid for each `(K, gamma)`, ignoring NaN.
pub fn brody_means(rows: &[BrodyRow]) -> Vec<(usize, f64, f64)> {
    let mut out: Vec<(usize, f64, f64, usize)> = Vec::new();
    for r in rows {
        let slot = match out.iter_mut().find(|(k, g, _, _)| *k == r.k && *g == r.gamma) {
            Some(s) => s,
            None => {
                out.push((r.k, r.gamma, 0.0, 0));
                out.last_mut().expect("just pushed")
            }
        };
        if r.beta.is_finite() {
            slot.2 += r.beta;
            slot.3 += 1;
        }
    }
    out.into_iter()
        .map(|(k, g, sum, n)| (k, g, if n > 0 { sum / n as f64 } else { f64::NAN }))
        .collect()
}

pub fn run_brody(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<BrodyRow>, CliError> {
    let rows = brody_table(&cfg.chain, &cfg.brody, cfg.jobs)?;
    write_file(&out.join("brody.csv"), |w| {
        writeln!(w, "gamma,epsilon,K,beta,samples,low_statistics")?;
        for r in &rows {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                fmt_float(r.gamma),
                fmt_float(r.epsilon),
                r.k,
                fmt_float(r.beta),
                r.samples,
                r.low_statistics
            )?;
        }
        Ok(())
    })?;
    write_file(&out.join("brody_mean.csv"), |w| {
        writeln!(w, "gamma,K,mean_beta")?;
        for (k, g, mean) in brody_means(&rows) {
            writeln!(w, "{},{k},{}", fmt_float(g), fmt_float(mean))?;
        }
        Ok(())
    })?;
    Ok(rows)
}

#[derive(Debug, Clone)]
pub struct DiffHistResult {
    pub m: usize,
    /// One histogram per configured gamma.
    pub histograms: Vec<Histogram>,
    /// Between the first two gammas.
    pub l1_distance: f64,
}

pub fn difference_histograms(
    chain: &ChainParams,
    settings: &DiffHistSettings,
) -> Result<Vec<DiffHistResult>, CliError> {
    let basis = even_basis(settings.l, settings.k)?;
    let spectra: Vec<Vec<f64>> = settings
        .gammas
        .iter()
        .map(|&gamma| {
            let params = ChainParams {
                l: settings.l,
                gamma,
                ..*chain
            };
            sorted_levels(&params, &basis, 0.0)
        })
        .collect::<Result<_, _>>()?;
    settings
        .m_values
        .iter()
        .map(|range| {
            let m = range.resolve(basis.dim());
            let histograms: Vec<Histogram> = spectra
                .iter()
                .map(|levels| {
                    let s = energy_differences(levels, m, settings.trim_fraction)?;
                    Histogram::with_range(s.values(), settings.bins, 0.0, settings.upper)
                })
                .collect::<Result<_, _>>()?;
            let l1_distance = histograms[0].l1_distance(&histograms[1])?;
            Ok(DiffHistResult {
                m,
                histograms,
                l1_distance,
            })
        })
        .collect()
}

pub fn run_difference_histograms(
    cfg: &ExperimentConfig,
    out: &Path,
) -> Result<Vec<DiffHistResult>, CliError> {
    let s = &cfg.diffhist;
    let results = difference_histograms(&cfg.chain, s)?;
    for r in &results {
        for (h, gamma) in r.histograms.iter().zip(&s.gammas) {
            let name = format!("diffhist_m{}_gamma{}.csv", r.m, fmt_float(*gamma));
            write_file(&out.join(name), |w| write_histogram(w, h))?;
        }
    }
    write_file(&out.join("diffhist_l1.csv"), |w| {
        writeln!(w, "M,l1_distance")?;
        for r in &results {
            writeln!(w, "{},{}", r.m, fmt_float(r.l1_distance))?;
        }
        Ok(())
    })?;
    write_file(&out.join("diffhist_reference.csv"), |w| {
        writeln!(w, "s,poisson,wigner_dyson")?;
        let width = s.upper / s.bins as f64;
        for i in 0..s.bins {
            let x = (i as f64 + 0.5) * width;
            writeln!(
                w,
                "{},{},{}",
                fmt_float(x),
                fmt_float(density_poisson(x)),
                fmt_float(density_wigner_dyson(x))
            )?;
        }
        Ok(())
    })?;
    Ok(results)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConnectivityCounts {
    pub local_computational: usize,
    pub local_energy: usize,
    pub long_range_computational: usize,
    pub long_range_energy: usize,
}

/// `|Hc|` and `|H'c|` in the computational and `H01` eigenbases.
pub fn run_connectivity_maps(
    cfg: &ExperimentConfig,
    out: &Path,
) -> Result<ConnectivityCounts, CliError> {
    let s = cfg.connmap;
    let params = cfg.params(s.gamma, cfg.chain.j);
    let basis = even_basis(params.l, s.k)?;
    let spectrum = diagonalize(&build_h01(&params, &basis)?)?;
    let threshold = s.threshold * params.j;
    let mut counts = [0usize; 4];
    let grids = [
        (ControlOperatorKind::LocalEdge, "hc"),
        (ControlOperatorKind::LongRange, "hc_long_range"),
    ];
    for (i, (kind, name)) in grids.into_iter().enumerate() {
        let comp = build_control(kind, &params, &basis)?;
        let energy = matrix_in_eigenbasis(&comp, &spectrum)?;
        counts[2 * i] = comp.count_above(threshold);
        counts[2 * i + 1] = energy.count_above(threshold);
        write_file(&out.join(format!("connmap_{name}_computational.csv")), |w| {
            write_matrix_grid(w, comp.data())
        })?;
        write_file(&out.join(format!("connmap_{name}_energy.csv")), |w| {
            write_matrix_grid(w, energy.data())
        })?;
    }
    let counts = ConnectivityCounts {
        local_computational: counts[0],
        local_energy: counts[1],
        long_range_computational: counts[2],
        long_range_energy: counts[3],
    };
    write_file(&out.join("connmap_counts.csv"), |w| {
        writeln!(w, "grid,entries_above_threshold")?;
        writeln!(w, "hc_computational,{}", counts.local_computational)?;
        writeln!(w, "hc_energy,{}", counts.local_energy)?;
        writeln!(w, "hc_long_range_computational,{}", counts.long_range_computational)?;
        writeln!(w, "hc_long_range_energy,{}", counts.long_range_energy)
    })?;
    Ok(counts)
}
