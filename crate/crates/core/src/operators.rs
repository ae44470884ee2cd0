//! Dense operator matrices for the chain Hamiltonian and the control terms.
//!
//! Every operator here is real in the computational basis and in the
//! parity-adapted basis, so matrices are stored as real-symmetric
//! `DMatrix<f64>`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::basis::{ChainParams, Parity, ParityBasis, SectorBasis};
use crate::error::{Error, Result};
use crate::spectral_stats::Spectrum;

/// Identifies the basis an [`OperatorMatrix`] is written in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisTag {
    /// Computational states of sector `k`, optionally parity-adapted.
    Computational {
        l: usize,
        k: usize,
        parity: Option<Parity>,
    },
    /// Eigenbasis of some operator expressed in the matching computational basis.
    Energy {
        l: usize,
        k: usize,
        parity: Option<Parity>,
    },
}

/// A basis operators can be assembled in.
pub trait Basis {
    fn dim(&self) -> usize;
    fn sector(&self) -> &SectorBasis;
    fn tag(&self) -> BasisTag;
    /// Restrict a matrix written in the full sector basis to this basis.
    fn restrict(&self, sector_matrix: &DMatrix<f64>) -> DMatrix<f64>;
}

impl Basis for SectorBasis {
    fn dim(&self) -> usize {
        SectorBasis::dim(self)
    }

    fn sector(&self) -> &SectorBasis {
        self
    }

    fn tag(&self) -> BasisTag {
        BasisTag::Computational {
            l: self.l(),
            k: self.k(),
            parity: None,
        }
    }

    fn restrict(&self, sector_matrix: &DMatrix<f64>) -> DMatrix<f64> {
        sector_matrix.clone()
    }
}

impl Basis for ParityBasis {
    fn dim(&self) -> usize {
        ParityBasis::dim(self)
    }

    fn sector(&self) -> &SectorBasis {
        self.parent()
    }

    fn tag(&self) -> BasisTag {
        BasisTag::Computational {
            l: self.parent().l(),
            k: self.parent().k(),
            parity: Some(self.parity()),
        }
    }

    fn restrict(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        let vectors = self.vectors();
        let n = vectors.len();
        DMatrix::from_fn(n, n, |a, b| {
            let mut acc = 0.0;
            for (i, ci) in vectors[a].components() {
                for (j, cj) in vectors[b].components() {
                    acc += ci * cj * m[(i, j)];
                }
            }
            acc
        })
    }
}

/// Which control operator drives the chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlOperatorKind {
    /// Z fields on the two end sites, `(J/2)(sz_1 + sz_L)`.
    #[default]
    LocalEdge,
    /// All-to-all XY hopping, `(J/2) sum_{i<j} (sx_i sx_j + sy_i sy_j)`.
    LongRange,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    tag: BasisTag,
    data: DMatrix<f64>,
}

impl OperatorMatrix {
    pub fn new(tag: BasisTag, data: DMatrix<f64>) -> Result<Self> {
        if data.nrows() != data.ncols() {
            return Err(Error::DimensionMismatch {
                expected: data.nrows(),
                found: data.ncols(),
            });
        }
        Ok(Self { tag, data })
    }

    pub fn tag(&self) -> BasisTag {
        self.tag
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn into_data(self) -> DMatrix<f64> {
        self.data
    }

    /// Largest `|M_ij - M_ji|`.
    pub fn max_asymmetry(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in (j + 1)..n {
                worst = worst.max((self.data[(i, j)] - self.data[(j, i)]).abs());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    /// Largest off-diagonal magnitude.
    pub fn max_off_diagonal(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                if i != j {
                    worst = worst.max(self.data[(i, j)].abs());
                }
            }
        }
        worst
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        self.max_off_diagonal() <= tol
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.data.diagonal().iter().copied().collect()
    }

    /// `self + factor * other`; both must share a basis.
    pub fn add_scaled(&self, factor: f64, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        debug_assert_eq!(self.tag, other.tag);
        Ok(OperatorMatrix {
            tag: self.tag,
            data: &self.data + &other.data * factor,
        })
    }

    /// Number of entries with `|M_ij| > threshold`.
    pub fn count_above(&self, threshold: f64) -> usize {
        self.data.iter().filter(|x| x.abs() > threshold).count()
    }
}

/// XY exchange plus ZZ term summed over `bonds`, written in the sector basis.
fn exchange_matrix(
    sector: &SectorBasis,
    bonds: &[(usize, usize)],
    hop: f64,
    zz: f64,
) -> DMatrix<f64> {
    let n = sector.dim();
    let mut m = DMatrix::zeros(n, n);
    for (col, &s) in sector.states().iter().enumerate() {
        let mut diag = 0.0;
        for &(a, b) in bonds {
            let up_a = (s >> a) & 1;
            let up_b = (s >> b) & 1;
            if up_a == up_b {
                diag += zz;
            } else {
                diag -= zz;
                if hop != 0.0 {
                    let flipped = s ^ ((1 << a) | (1 << b));
                    let row = sector
                        .index_of(flipped)
                        .expect("exchange conserves magnetization");
                    m[(row, col)] += hop;
                }
            }
        }
        m[(col, col)] += diag;
    }
    m
}

fn bonds_at_distance(l: usize, distance: usize) -> Vec<(usize, usize)> {
    (0..l.saturating_sub(distance))
        .map(|i| (i, i + distance))
        .collect()
}

fn assemble<B: Basis + ?Sized>(basis: &B, sector_matrix: DMatrix<f64>) -> OperatorMatrix {
    OperatorMatrix {
        tag: basis.tag(),
        data: basis.restrict(&sector_matrix),
    }
}

fn check_basis<B: Basis + ?Sized>(params: &ChainParams, basis: &B) -> Result<()> {
    params.validate()?;
    if basis.sector().l() != params.l {
        return Err(Error::DimensionMismatch {
            expected: params.l,
            found: basis.sector().l(),
        });
    }
    Ok(())
}

/// Nearest-neighbour XXZ chain, `(J/2) sum_i (sx sx + sy sy + alpha_z sz sz)`.
pub fn build_h0<B: Basis + ?Sized>(params: &ChainParams, basis: &B) -> Result<OperatorMatrix> {
    check_basis(params, basis)?;
    let bonds = bonds_at_distance(params.l, 1);
    let m = exchange_matrix(basis.sector(), &bonds, params.j, 0.5 * params.j * params.alpha_z);
    Ok(assemble(basis, m))
}

/// Next-to-nearest-neighbour XXZ couplings.
pub fn build_h1<B: Basis + ?Sized>(params: &ChainParams, basis: &B) -> Result<OperatorMatrix> {
    check_basis(params, basis)?;
    let bonds = bonds_at_distance(params.l, 2);
    let m = exchange_matrix(basis.sector(), &bonds, params.j, 0.5 * params.j * params.alpha_z);
    Ok(assemble(basis, m))
}

/// Free chain Hamiltonian `H0 + gamma H1`.
pub fn build_h01<B: Basis + ?Sized>(params: &ChainParams, basis: &B) -> Result<OperatorMatrix> {
    let h0 = build_h0(params, basis)?;
    if params.gamma == 0.0 {
        return Ok(h0);
    }
    h0.add_scaled(params.gamma, &build_h1(params, basis)?)
}

/// Edge control `(J/2)(sz_1 + sz_L)`.
pub fn build_hc<B: Basis + ?Sized>(params: &ChainParams, basis: &B) -> Result<OperatorMatrix> {
    check_basis(params, basis)?;
    let sector = basis.sector();
    let last = params.l - 1;
    let n = sector.dim();
    let mut m = DMatrix::zeros(n, n);
    for (i, &s) in sector.states().iter().enumerate() {
        let z = |site: usize| if (s >> site) & 1 == 1 { 1.0 } else { -1.0 };
        m[(i, i)] = 0.5 * params.j * (z(0) + z(last));
    }
    Ok(assemble(basis, m))
}

/// Long-range control: all-to-all XY hopping with amplitude `J`.
pub fn build_hc_long_range<B: Basis + ?Sized>(
    params: &ChainParams,
    basis: &B,
) -> Result<OperatorMatrix> {
    check_basis(params, basis)?;
    let bonds: Vec<(usize, usize)> = (0..params.l)
        .flat_map(|a| ((a + 1)..params.l).map(move |b| (a, b)))
        .collect();
    let m = exchange_matrix(basis.sector(), &bonds, params.j, 0.0);
    Ok(assemble(basis, m))
}

pub fn build_control<B: Basis + ?Sized>(
    kind: ControlOperatorKind,
    params: &ChainParams,
    basis: &B,
) -> Result<OperatorMatrix> {
    match kind {
        ControlOperatorKind::LocalEdge => build_hc(params, basis),
        ControlOperatorKind::LongRange => build_hc_long_range(params, basis),
    }
}

/// `V^T M V` with `V` the eigenvector matrix of `spectrum`.
pub fn matrix_in_eigenbasis(op: &OperatorMatrix, spectrum: &Spectrum) -> Result<OperatorMatrix> {
    let v = spectrum.eigenvectors();
    if v.nrows() != op.dim() {
        return Err(Error::DimensionMismatch {
            expected: v.nrows(),
            found: op.dim(),
        });
    }
    let tag = match op.tag {
        BasisTag::Computational { l, k, parity } | BasisTag::Energy { l, k, parity } => {
            BasisTag::Energy { l, k, parity }
        }
    };
    Ok(OperatorMatrix {
        tag,
        data: v.transpose() * &op.data * v,
    })
}
