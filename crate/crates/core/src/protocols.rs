//! Initial and target states of the two transfer processes, written in the
//! even-parity basis of the `K`-excitation sector.
//!
//! * Process A moves a centred block of excitations into the symmetric
//!   superposition of the two edge blocks.
//! * Process B starts in the ground state of the nearest-neighbour chain and
//!   targets a random superposition of its excited states.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::basis::{mirror, Parity, ParityBasis};
use crate::dynamics::{real_state, State};
use crate::error::{Error, Result};
use crate::spectral_stats::Spectrum;

/// Relative gap below which the two lowest levels count as degenerate.
const DEGENERACY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ProcessKind {
    A,
    B,
}

impl std::fmt::Display for ProcessKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ProcessKind::A => "A",
            ProcessKind::B => "B",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProcessSpec {
    pub kind: ProcessKind,
    pub l: usize,
    pub k: usize,
    /// Only used by process B.
    pub seed: u64,
}

impl ProcessSpec {
    pub fn validate(&self, basis: &ParityBasis) -> Result<()> {
        if basis.parity() != Parity::Even {
            return Err(Error::InvalidProcess("processes live in the even-parity basis".into()));
        }
        if basis.parent().l() != self.l || basis.parent().k() != self.k {
            return Err(Error::InvalidProcess(format!(
                "basis is (L={}, K={}), process wants (L={}, K={})",
                basis.parent().l(),
                basis.parent().k(),
                self.l,
                self.k
            )));
        }
        match self.kind {
            ProcessKind::A => {
                if self.l.is_multiple_of(2) {
                    return Err(Error::InvalidProcess("process A needs an odd chain".into()));
                }
                if self.k == 0 || 2 * self.k >= self.l {
                    return Err(Error::InvalidProcess(format!(
                        "process A needs 0 < 2K < L (K={}, L={})",
                        self.k, self.l
                    )));
                }
            }
            ProcessKind::B => {
                if basis.dim() < 2 {
                    return Err(Error::InvalidProcess(
                        "process B needs at least two even-parity states".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// How the random amplitudes of the process B target are drawn before
/// normalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmplitudeDistribution {
    /// i.i.d. standard complex Gaussians (uniform on the unit sphere).
    #[default]
    ComplexGaussian,
    /// Modulus uniform on `[0, 1)`, phase uniform on `[0, 2 pi)`.
    UniformModulus,
}

/// Mask of the centred block: odd `K` fills `c-(K-1)/2 ..= c+(K-1)/2`,
/// even `K` leaves the centre site `c` empty.
pub fn central_block(l: usize, k: usize) -> u32 {
    let c = l.div_ceil(2); // 1-based centre site
    let sites: Vec<usize> = if k % 2 == 1 {
        let h = (k - 1) / 2;
        (c - h..=c + h).collect()
    } else {
        let h = k / 2;
        (c - h..c).chain(c + 1..=c + h).collect()
    };
    sites.iter().fold(0u32, |m, &s| m | (1 << (s - 1)))
}

/// Left edge block, sites `1..=K`.
pub fn left_block(k: usize) -> u32 {
    (1u32 << k) - 1
}

/// Expand a computational-basis vector (given as mask/amplitude pairs) in
/// the parity basis; fails if it has weight outside the basis.
fn project(basis: &ParityBasis, terms: &[(u32, f64)]) -> Result<State> {
    let mut out = State::zeros(basis.dim());
    for &(mask, amp) in terms {
        let (pos, coeff) = basis.locate(mask).ok_or_else(|| {
            Error::InvalidProcess(format!("state {mask:#b} not in the parity basis"))
        })?;
        out[pos] += Complex64::new(amp * coeff, 0.0);
    }
    Ok(out)
}

pub fn build_process_a(basis: &ParityBasis) -> Result<(State, State)> {
    let l = basis.parent().l();
    let k = basis.parent().k();
    ProcessSpec {
        kind: ProcessKind::A,
        l,
        k,
        seed: 0,
    }
    .validate(basis)?;
    let centre = central_block(l, k);
    debug_assert_eq!(mirror(centre, l), centre);
    let left = left_block(k);
    let right = mirror(left, l);
    let amp = std::f64::consts::FRAC_1_SQRT_2;
    let psi0 = project(basis, &[(centre, 1.0)])?;
    let psi_f = project(basis, &[(left, amp), (right, amp)])?;
    Ok((psi0, psi_f))
}

/// Ground state of `H0` and a seeded random superposition of all its
/// excited states. `h0_spectrum` must come from the even-parity `H0`.
pub fn build_process_b(
    basis: &ParityBasis,
    h0_spectrum: &Spectrum,
    seed: u64,
    distribution: AmplitudeDistribution,
) -> Result<(State, State, bool)> {
    let l = basis.parent().l();
    let k = basis.parent().k();
    ProcessSpec {
        kind: ProcessKind::B,
        l,
        k,
        seed,
    }
    .validate(basis)?;
    if h0_spectrum.len() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            found: h0_spectrum.len(),
        });
    }
    let e = h0_spectrum.energies();
    let scale = e.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let degenerate_ground = (e[1] - e[0]).abs() < DEGENERACY_TOL * scale;

    let psi0 = real_state(&h0_spectrum.eigenvector(0));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amps: Vec<Complex64> = (1..basis.dim())
        .map(|_| match distribution {
            AmplitudeDistribution::ComplexGaussian => {
                Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
            }
            AmplitudeDistribution::UniformModulus => {
                Complex64::from_polar(rng.random::<f64>(), 2.0 * PI * rng.random::<f64>())
            }
        })
        .collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    let vectors = h0_spectrum.eigenvectors();
    let mut psi_f = State::zeros(basis.dim());
    for (n, a) in amps.iter().enumerate() {
        let a = a / norm;
        for (out, &v) in psi_f.iter_mut().zip(vectors.column(n + 1).iter()) {
            *out += a * v;
        }
    }
    Ok((psi0, psi_f, degenerate_ground))
}
