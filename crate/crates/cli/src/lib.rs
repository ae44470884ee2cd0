//! Experiment driver for the `spinoc` binary: declarative configs in, fixed-
//! format CSV tables out.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cell;
pub mod config;
pub mod spectra;
pub mod sweep;

use std::path::Path;

pub use config::{ExperimentConfig, Preset};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0}")]
    Core(#[from] spinoc_core::Error),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("existing output {0} does not match this sweep")]
    IncompatibleOutput(String),
}

impl CliError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) if is_config_error(e) => 2,
            _ => 1,
        }
    }
}

fn is_config_error(e: &spinoc_core::Error) -> bool {
    use spinoc_core::Error::*;
    matches!(
        e,
        InvalidParams(_) | InvalidConfig(_) | InvalidProcess(_) | SectorOutOfRange { .. }
    )
}

pub(crate) fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Write a file through `f`, creating parent directories as needed.
pub(crate) fn write_file(
    path: &Path,
    f: impl FnOnce(&mut std::io::BufWriter<std::fs::File>) -> std::io::Result<()>,
) -> Result<(), CliError> {
    use std::io::Write;
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let file = std::fs::File::create(path).map_err(io_err(path))?;
    let mut w = std::io::BufWriter::new(file);
    f(&mut w).and_then(|_| w.flush()).map_err(io_err(path))
}

/// Rayon pool with `jobs` threads (0 = default).
pub fn thread_pool(jobs: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {jobs} workers: {e}")))
}
