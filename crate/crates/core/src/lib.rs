//! Optimal control of spin-1/2 chains and the spectral complexity of the
//! resulting control fields.
//!
//! The crate is organized bottom-up:
//!
//! * [`basis`]: fixed-magnetization sectors and their parity-adapted sub-bases.
//! * [`operators`]: the XXZ chain with next-to-nearest couplings and the
//!   control operators, as dense real-symmetric matrices.
//! * [`spectral_stats`]: diagonalization, spacing statistics and Brody fits.
//! * [`dynamics`]: piecewise-constant propagation with Strang splitting.
//! * [`krotov`]: the iterative field optimizer.
//! * [`field_analysis`]: power spectra, bandwidth and spectral IPR.
//! * [`protocols`]: initial/target state pairs for the two transfer processes.
//! * [`io`]: fixed-format CSV emission shared by the command-line tools.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod basis;
pub mod dynamics;
pub mod error;
pub mod field_analysis;
pub mod io;
pub mod krotov;
pub mod operators;
pub mod protocols;
pub mod spectral_stats;

pub use basis::{ChainParams, ParityBasis, Parity, SectorBasis};
pub use dynamics::{ControlField, PropagationCache, State, Trajectory};
pub use error::{Error, Result};
pub use field_analysis::{FieldSpectrum, SpectralMetrics};
pub use krotov::{KrotovConfig, OptimizationResult, StopReason};
pub use operators::{BasisTag, ControlOperatorKind, OperatorMatrix};
pub use protocols::{ProcessKind, ProcessSpec};
pub use spectral_stats::{BrodyFit, Histogram, SpacingSample, Spectrum};
