//! Computational basis of a fixed-magnetization sector and its
//! parity-adapted sub-bases.
//!
//! Site `i` (1-based, left to right) is stored in bit `i - 1` of a `u32`
//! mask, so site 1 is the least significant bit. The mirror operation maps
//! site `i` to site `L + 1 - i`, i.e. it reverses the lowest `L` bits.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest chain that fits the `u32` state masks with room to spare.
pub const MAX_SITES: usize = 30;

/// Physical parameters of the open spin chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainParams {
    /// Number of sites.
    pub l: usize,
    /// Nearest-neighbour coupling; the energy unit.
    pub j: f64,
    /// Ratio of next-to-nearest to nearest-neighbour coupling.
    pub gamma: f64,
    /// ZZ anisotropy.
    pub alpha_z: f64,
}

impl Default for ChainParams {
    fn default() -> Self {
        Self {
            l: 15,
            j: 1.0,
            gamma: 0.0,
            alpha_z: 0.5,
        }
    }
}

impl ChainParams {
    pub fn new(l: usize, j: f64, gamma: f64, alpha_z: f64) -> Result<Self> {
        let params = Self {
            l,
            j,
            gamma,
            alpha_z,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.l < 2 || self.l > MAX_SITES {
            return Err(Error::InvalidParams(format!(
                "chain length {} outside 2..={MAX_SITES}",
                self.l
            )));
        }
        if !(self.j.is_finite() && self.j > 0.0) {
            return Err(Error::InvalidParams(format!(
                "coupling J = {} must be positive",
                self.j
            )));
        }
        if !self.gamma.is_finite() || self.gamma < 0.0 {
            return Err(Error::InvalidParams(format!(
                "gamma = {} must be finite and non-negative",
                self.gamma
            )));
        }
        if !self.alpha_z.is_finite() {
            return Err(Error::InvalidParams("alpha_z must be finite".into()));
        }
        Ok(())
    }

    /// Single-excitation end-to-end transfer time `(L - 1) pi / J`.
    pub fn transfer_time(&self) -> f64 {
        (self.l as f64 - 1.0) * std::f64::consts::PI / self.j
    }
}

/// Mirror-reflect the lowest `l` bits of `state`.
pub fn mirror(state: u32, l: usize) -> u32 {
    debug_assert!((1..=32).contains(&l));
    state.reverse_bits() >> (32 - l)
}

/// Binomial coefficient, exact for the sizes used here.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// All `L`-bit masks with exactly `K` set bits, in increasing order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectorBasis {
    l: usize,
    k: usize,
    states: Vec<u32>,
}

impl SectorBasis {
    pub fn l(&self) -> usize {
        self.l
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[u32] {
        &self.states
    }

    pub fn state(&self, index: usize) -> u32 {
        self.states[index]
    }

    /// Position of `mask` in the basis, if it belongs to the sector.
    pub fn index_of(&self, mask: u32) -> Option<usize> {
        self.states.binary_search(&mask).ok()
    }
}

/// Enumerate the sector with `k` up spins on `l` sites.
pub fn enumerate_sector(l: usize, k: usize) -> Result<SectorBasis> {
    if l == 0 || l > MAX_SITES {
        return Err(Error::InvalidParams(format!(
            "chain length {l} outside 1..={MAX_SITES}"
        )));
    }
    if k > l {
        return Err(Error::SectorOutOfRange { l, k });
    }
    let mut states = Vec::with_capacity(binomial(l, k));
    if k == 0 {
        states.push(0);
    } else {
        // Gosper's hack walks the K-subsets in increasing integer order.
        let limit = 1u64 << l;
        let mut s: u64 = (1u64 << k) - 1;
        while s < limit {
            states.push(s as u32);
            let c = s & s.wrapping_neg();
            let r = s + c;
            s = (((r ^ s) >> 2) / c) | r;
        }
    }
    Ok(SectorBasis { l, k, states })
}

/// Eigenvalue of the mirror permutation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Parity {
    #[serde(rename = "+")]
    Even,
    #[serde(rename = "-")]
    Odd,
}

impl Parity {
    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Even => "+",
            Parity::Odd => "-",
        })
    }
}

/// A parity eigenvector written in the parent sector basis: either a single
/// palindromic state or a normalized mirror pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParityVector {
    first: (usize, f64),
    second: Option<(usize, f64)>,
}

impl ParityVector {
    /// `(sector index, coefficient)` pairs, one or two of them.
    pub fn components(&self) -> impl Iterator<Item = (usize, f64)> {
        std::iter::once(self.first).chain(self.second)
    }

    /// Index of the canonical (smaller) representative in the parent basis.
    pub fn representative(&self) -> usize {
        self.first.0
    }

    pub fn is_palindrome(&self) -> bool {
        self.second.is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParityBasis {
    parent: SectorBasis,
    parity: Parity,
    vectors: Vec<ParityVector>,
}

impl ParityBasis {
    pub fn parent(&self) -> &SectorBasis {
        &self.parent
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[ParityVector] {
        &self.vectors
    }

    pub fn vector(&self, index: usize) -> &ParityVector {
        &self.vectors[index]
    }

    /// Index of the basis vector containing the computational state `mask`,
    /// together with the coefficient of `mask` in it.
    pub fn locate(&self, mask: u32) -> Option<(usize, f64)> {
        let l = self.parent.l;
        let rep = mask.min(mirror(mask, l));
        let rep_index = self.parent.index_of(rep)?;
        let pos = self
            .vectors
            .binary_search_by_key(&rep_index, |v| v.representative())
            .ok()?;
        let mask_index = self.parent.index_of(mask)?;
        self.vectors[pos]
            .components()
            .find(|&(i, _)| i == mask_index)
            .map(|(_, c)| (pos, c))
    }
}

/// Build the orthonormal parity eigenbasis of `basis` with eigenvalue `parity`.
///
/// Mirror pairs `{s, P s}` contribute `(|s> + sign |P s>) / sqrt 2` with `s`
/// the smaller mask; palindromes only appear in the even basis.
pub fn parity_adapt(basis: &SectorBasis, parity: Parity) -> ParityBasis {
    let l = basis.l;
    let sign = parity.sign();
    let mut vectors = Vec::new();
    for (i, &s) in basis.states.iter().enumerate() {
        let m = mirror(s, l);
        if s == m {
            if parity == Parity::Even {
                vectors.push(ParityVector {
                    first: (i, 1.0),
                    second: None,
                });
            }
        } else if s < m {
            let j = basis
                .index_of(m)
                .expect("mirror preserves the excitation number");
            vectors.push(ParityVector {
                first: (i, FRAC_1_SQRT_2),
                second: Some((j, sign * FRAC_1_SQRT_2)),
            });
        }
    }
    ParityBasis {
        parent: basis.clone(),
        parity,
        vectors,
    }
}

/// Closed-form dimension of a parity block for odd `l`.
pub fn parity_dim_odd_chain(l: usize, k: usize, parity: Parity) -> usize {
    assert!(l % 2 == 1, "closed form holds for odd chains only");
    let total = binomial(l, k);
    // Palindromes fix the centre site and mirror one half onto the other.
    let palindromes = binomial((l - 1) / 2, k / 2);
    match parity {
        Parity::Even => (total + palindromes) / 2,
        Parity::Odd => (total - palindromes) / 2,
    }
}
