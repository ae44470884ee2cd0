//! Spectral complexity of a control field.
//!
//! The one-sided periodogram of the sampled field is normalized to a power
//! density `p_k` on bins `omega_k = k * domega` (`domega = 2 pi / T`) with
//! `sum_k p_k domega = 1`. Bin `k` stands for the interval
//! `((k - 1) domega, k domega]`, so all integrals below are plain Riemann
//! sums and the bandwidth is reported at a bin edge.

use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::dynamics::ControlField;
use crate::error::{Error, Result};

/// Default tail weight left outside the bandwidth.
pub const DEFAULT_BETA_CUTOFF: f64 = 1e-2;

/// Minimum number of samples accepted by [`power_spectrum`].
pub const MIN_SAMPLES: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct FieldSpectrum {
    domega: f64,
    /// Index of the first bin (1 when the DC bin is excluded).
    k_min: usize,
    power: Vec<f64>,
}

impl FieldSpectrum {
    /// Normalize non-negative bin weights starting at bin `k_min`.
    pub fn from_weights(domega: f64, k_min: usize, weights: Vec<f64>) -> Result<Self> {
        if !(domega > 0.0) {
            return Err(Error::InvalidField("bin width must be positive".into()));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidField("spectral weights must be non-negative".into()));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::EmptySpectrum);
        }
        let scale = 1.0 / (total * domega);
        Ok(Self {
            domega,
            k_min,
            power: weights.into_iter().map(|w| w * scale).collect(),
        })
    }

    pub fn domega(&self) -> f64 {
        self.domega
    }

    pub fn power(&self) -> &[f64] {
        &self.power
    }

    pub fn omega(&self, bin: usize) -> f64 {
        (self.k_min + bin) as f64 * self.domega
    }

    pub fn omegas(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.power.len()).map(move |i| self.omega(i))
    }

    /// `sum_k p_k domega`; 1 up to rounding.
    pub fn total_mass(&self) -> f64 {
        self.power.iter().sum::<f64>() * self.domega
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralMetrics {
    pub omega_bw: f64,
    pub sipr: f64,
    pub siprn: f64,
    pub beta_cutoff: f64,
}

/// One-sided rectangular-window periodogram of the field.
pub fn power_spectrum(field: &ControlField, remove_dc: bool) -> Result<FieldSpectrum> {
    let n = field.len();
    if n < MIN_SAMPLES {
        return Err(Error::TooFewSamples {
            required: MIN_SAMPLES,
            found: n,
        });
    }
    let mean = if remove_dc {
        field.samples().iter().sum::<f64>() / n as f64
    } else {
        0.0
    };
    let mut buf: Vec<Complex<f64>> = field
        .samples()
        .iter()
        .map(|&x| Complex::new(x - mean, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let half = n / 2;
    let k_min = usize::from(remove_dc);
    let weights: Vec<f64> = (k_min..=half)
        .map(|k| {
            let p = buf[k].norm_sqr();
            // Interior bins collect the mirrored negative frequency too.
            if k == 0 || (n.is_multiple_of(2) && k == half) {
                p
            } else {
                2.0 * p
            }
        })
        .collect();
    let domega = 2.0 * PI / field.total_time();
    FieldSpectrum::from_weights(domega, k_min, weights)
}

/// Smallest bin edge below which at least `1 - beta_cutoff` of the power lies.
pub fn bandwidth(spec: &FieldSpectrum, beta_cutoff: f64) -> f64 {
    let target = (1.0 - beta_cutoff) / spec.domega;
    let total: f64 = spec.power.iter().sum();
    // Relative slack absorbs rounding in the running sum.
    let target = target.min(total) * (1.0 - 1e-12);
    let mut acc = 0.0;
    for (i, &p) in spec.power.iter().enumerate() {
        acc += p;
        if acc >= target {
            return spec.omega(i);
        }
    }
    spec.omega(spec.power.len() - 1)
}

/// `1 / sum_k p_k^2 domega`.
pub fn sipr(spec: &FieldSpectrum) -> f64 {
    1.0 / (spec.power.iter().map(|p| p * p).sum::<f64>() * spec.domega)
}

pub fn siprn(spec: &FieldSpectrum, omega_bw: f64) -> f64 {
    sipr(spec) / omega_bw
}

/// Bandwidth, sIPR and normalized sIPR of a field.
pub fn analyze(field: &ControlField, beta_cutoff: f64, remove_dc: bool) -> Result<SpectralMetrics> {
    if !(beta_cutoff > 0.0 && beta_cutoff < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "bandwidth cutoff {beta_cutoff} outside (0, 1)"
        )));
    }
    let spec = power_spectrum(field, remove_dc)?;
    metrics_of(&spec, beta_cutoff)
}

pub fn metrics_of(spec: &FieldSpectrum, beta_cutoff: f64) -> Result<SpectralMetrics> {
    let omega_bw = bandwidth(spec, beta_cutoff);
    if !(omega_bw > 0.0) {
        return Err(Error::EmptySpectrum);
    }
    let sipr = sipr(spec);
    Ok(SpectralMetrics {
        omega_bw,
        sipr,
        siprn: sipr / omega_bw,
        beta_cutoff,
    })
}

/// Upper bound on the normalized sIPR implied by Cauchy-Schwarz on the
/// bins below the bandwidth (DC bin excluded).
pub fn siprn_upper_bound(beta_cutoff: f64) -> f64 {
    (1.0 - beta_cutoff).powi(-2)
}
