//! Diagonalization and level statistics: spacings, generalized energy
//! differences, the Poisson / Wigner-Dyson / Brody densities and a
//! maximum-likelihood Brody fit.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::operators::OperatorMatrix;

/// Relative asymmetry tolerated by [`diagonalize`].
const SYMMETRY_TOL: f64 = 1e-10;

/// Upper end of the Brody search interval.
pub const BRODY_BETA_MAX: f64 = 1.5;

/// Minimum sample size accepted by [`brody_fit`].
pub const BRODY_MIN_SAMPLES: usize = 50;

/// Ascending eigenvalues with matching orthonormal eigenvector columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    energies: DVector<f64>,
    eigenvectors: DMatrix<f64>,
}

impl Spectrum {
    pub fn energies(&self) -> &DVector<f64> {
        &self.energies
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn eigenvector(&self, n: usize) -> DVector<f64> {
        self.eigenvectors.column(n).into_owned()
    }

    /// `E_max - E_0`.
    pub fn energy_spread(&self) -> f64 {
        energy_spread(self.energies.as_slice())
    }
}

/// Dense symmetric eigensolve with eigenvalues sorted ascending.
pub fn diagonalize(op: &OperatorMatrix) -> Result<Spectrum> {
    let scale = op.max_abs().max(1.0);
    let asym = op.max_asymmetry();
    if asym > SYMMETRY_TOL * scale {
        return Err(Error::NotHermitian {
            max_asymmetry: asym,
        });
    }
    let n = op.dim();
    if n == 0 {
        return Ok(Spectrum {
            energies: DVector::zeros(0),
            eigenvectors: DMatrix::zeros(0, 0),
        });
    }
    let eig = op.data().clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let energies = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut eigenvectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors
            .column_mut(dst)
            .copy_from(&eig.eigenvectors.column(src));
    }
    Ok(Spectrum {
        energies,
        eigenvectors,
    })
}

/// `E_max - E_0` of an ascending list; zero for fewer than two levels.
pub fn energy_spread(energies: &[f64]) -> f64 {
    match (energies.first(), energies.last()) {
        (Some(lo), Some(hi)) => hi - lo,
        _ => 0.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpacingSource {
    /// Nearest-level spacings, `E_{n+1} - E_n`.
    Consecutive,
    /// All differences `E_{n+m} - E_n` with `0 < m <= M`.
    Generalized { m: usize },
}

/// Spacing-type sample rescaled to unit mean.
#[derive(Debug, Clone, PartialEq)]
pub struct SpacingSample {
    values: Vec<f64>,
    source: SpacingSource,
}

impl SpacingSample {
    /// Normalize arbitrary non-negative values to unit mean.
    pub fn from_raw(mut values: Vec<f64>, source: SpacingSource) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::TooFewSamples {
                required: 1,
                found: 0,
            });
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Degenerate(
                "spacings must be finite and non-negative".into(),
            ));
        }
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        if mean <= 0.0 {
            return Err(Error::Degenerate("all spacings vanish".into()));
        }
        values.iter_mut().for_each(|v| *v /= mean);
        Ok(Self { values, source })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn source(&self) -> SpacingSource {
        self.source
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// Drop `floor(trim_fraction * N)` levels from each end of the spectrum.
fn trimmed(energies: &[f64], trim_fraction: f64) -> Result<&[f64]> {
    if !(0.0..0.5).contains(&trim_fraction) {
        return Err(Error::Degenerate(format!(
            "trim fraction {trim_fraction} outside [0, 0.5)"
        )));
    }
    let cut = (trim_fraction * energies.len() as f64).floor() as usize;
    Ok(&energies[cut..energies.len() - cut])
}

/// Consecutive spacings of an ascending list of levels, normalized to mean 1.
pub fn level_spacings(energies: &[f64], trim_fraction: f64) -> Result<SpacingSample> {
    let levels = trimmed(energies, trim_fraction)?;
    if levels.len() < 3 {
        return Err(Error::TooFewSamples {
            required: 3,
            found: levels.len(),
        });
    }
    let raw = levels.windows(2).map(|w| w[1] - w[0]).collect();
    SpacingSample::from_raw(raw, SpacingSource::Consecutive)
}

/// The multiset `{E_{n+m} - E_n : 0 < m <= M}`, normalized to mean 1.
pub fn energy_differences(energies: &[f64], m: usize, trim_fraction: f64) -> Result<SpacingSample> {
    let levels = trimmed(energies, trim_fraction)?;
    let n = levels.len();
    if m == 0 || m >= n {
        return Err(Error::DifferenceRange { m, n });
    }
    if m == 1 {
        return level_spacings(levels, 0.0);
    }
    let count: usize = (1..=m).map(|d| n - d).sum();
    let mut raw = Vec::with_capacity(count);
    for d in 1..=m {
        raw.extend((0..n - d).map(|i| levels[i + d] - levels[i]));
    }
    SpacingSample::from_raw(raw, SpacingSource::Generalized { m })
}

pub fn density_poisson(s: f64) -> f64 {
    (-s).exp()
}

pub fn density_wigner_dyson(s: f64) -> f64 {
    0.5 * PI * s * (-0.25 * PI * s * s).exp()
}

/// Brody normalization `b = Gamma((beta + 2)/(beta + 1))^(beta + 1)`.
pub fn brody_b(beta: f64) -> f64 {
    gamma((beta + 2.0) / (beta + 1.0)).powf(beta + 1.0)
}

pub fn density_brody(s: f64, beta: f64) -> f64 {
    let b = brody_b(beta);
    (beta + 1.0) * b * s.powf(beta) * (-b * s.powf(beta + 1.0)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BrodyFit {
    /// Brody parameter in `[0, BRODY_BETA_MAX]`.
    pub beta: f64,
    /// Normalization coefficient matching `beta`.
    pub b: f64,
    /// Mean log-likelihood per sample at `beta`.
    pub log_likelihood: f64,
    pub samples: usize,
    /// Set when the sample has (numerically) no spread; `beta` is then meaningless.
    pub degenerate: bool,
}

fn brody_log_likelihood(values: &[f64], beta: f64) -> f64 {
    let b = brody_b(beta);
    let head = (beta + 1.0).ln() + b.ln();
    let mut acc = 0.0;
    for &s in values {
        let log_s = if s > 0.0 {
            beta * s.ln()
        } else if beta == 0.0 {
            0.0
        } else {
            return f64::NEG_INFINITY;
        };
        acc += head + log_s - b * s.powf(beta + 1.0);
    }
    acc / values.len() as f64
}

/// Maximize `f` on `[lo, hi]`: coarse grid scan, then golden-section refinement
/// around the best grid point down to `tol`.
fn maximize_bracketed(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    const GRID: usize = 150;
    let step = (hi - lo) / GRID as f64;
    let (mut best_x, mut best_f) = (lo, f(lo));
    for i in 1..=GRID {
        let x = lo + step * i as f64;
        let fx = f(x);
        if fx > best_f {
            best_x = x;
            best_f = fx;
        }
    }
    let mut a = (best_x - step).max(lo);
    let mut b = (best_x + step).min(hi);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    if fx >= best_f {
        (x, fx)
    } else {
        (best_x, best_f)
    }
}

/// Maximum-likelihood Brody parameter of a unit-mean spacing sample.
pub fn brody_fit(sample: &SpacingSample) -> Result<BrodyFit> {
    let values = sample.values();
    if values.len() < BRODY_MIN_SAMPLES {
        return Err(Error::TooFewSamples {
            required: BRODY_MIN_SAMPLES,
            found: values.len(),
        });
    }
    let mean = sample.mean();
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / values.len() as f64;
    let (beta, log_likelihood) =
        maximize_bracketed(|beta| brody_log_likelihood(values, beta), 0.0, BRODY_BETA_MAX, 1e-4);
    Ok(BrodyFit {
        beta,
        b: brody_b(beta),
        log_likelihood,
        samples: values.len(),
        degenerate: var < 1e-12,
    })
}

/// Least-squares fit of the Brody density to a histogram of the sample.
/// Binning-dependent; kept as a cross-check of [`brody_fit`].
pub fn brody_fit_histogram(sample: &SpacingSample, bins: usize, upper: f64) -> Result<f64> {
    if sample.len() < BRODY_MIN_SAMPLES {
        return Err(Error::TooFewSamples {
            required: BRODY_MIN_SAMPLES,
            found: sample.len(),
        });
    }
    let hist = Histogram::with_range(sample.values(), bins, 0.0, upper)?;
    let centers = hist.centers();
    let residual = |beta: f64| {
        -centers
            .iter()
            .zip(hist.densities())
            .map(|(&s, &h)| (h - density_brody(s, beta)).powi(2))
            .sum::<f64>()
    };
    Ok(maximize_bracketed(residual, 0.0, BRODY_BETA_MAX, 1e-4).0)
}

/// Density-normalized histogram with uniform bins.
///
/// Densities are `count / (total * width)` where `total` counts every
/// sample, including any outside the range, so the mass inside the range
/// is the fraction of samples it holds.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    edges: Vec<f64>,
    densities: Vec<f64>,
    total: usize,
}

impl Histogram {
    /// Bins spanning `[min, max]` of the data.
    pub fn new(values: &[f64], bins: usize) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::TooFewSamples {
                required: 1,
                found: 0,
            });
        }
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let mut hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if hi <= lo {
            hi = lo + 1.0;
        }
        Self::with_range(values, bins, lo, hi)
    }

    pub fn with_range(values: &[f64], bins: usize, lo: f64, hi: f64) -> Result<Self> {
        if bins == 0 || !(hi > lo) {
            return Err(Error::Degenerate(format!(
                "histogram needs bins > 0 and hi > lo (got {bins}, [{lo}, {hi}])"
            )));
        }
        if values.is_empty() {
            return Err(Error::TooFewSamples {
                required: 1,
                found: 0,
            });
        }
        let width = (hi - lo) / bins as f64;
        let mut counts = vec![0usize; bins];
        for &v in values {
            if v < lo || v > hi {
                continue;
            }
            let idx = (((v - lo) / width) as usize).min(bins - 1);
            counts[idx] += 1;
        }
        let norm = values.len() as f64 * width;
        let edges = (0..=bins).map(|i| lo + width * i as f64).collect();
        Ok(Self {
            edges,
            densities: counts.iter().map(|&c| c as f64 / norm).collect(),
            total: values.len(),
        })
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn densities(&self) -> &[f64] {
        &self.densities
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn bin_width(&self) -> f64 {
        self.edges[1] - self.edges[0]
    }

    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    pub fn mass(&self) -> f64 {
        self.densities.iter().sum::<f64>() * self.bin_width()
    }

    /// `sum_i |p_i - q_i| * width`; both histograms must share their bins.
    pub fn l1_distance(&self, other: &Histogram) -> Result<f64> {
        if self.edges.len() != other.edges.len()
            || self
                .edges
                .iter()
                .zip(&other.edges)
                .any(|(a, b)| (a - b).abs() > 1e-12 * a.abs().max(1.0))
        {
            return Err(Error::Degenerate("histograms have different bins".into()));
        }
        Ok(self
            .densities
            .iter()
            .zip(&other.densities)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            * self.bin_width())
    }
}
