//! Experiment configuration: built-in presets overlaid with a JSON document.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use spinoc_core::basis::{binomial, ChainParams};
use spinoc_core::field_analysis::DEFAULT_BETA_CUTOFF;
use spinoc_core::krotov::{
    InitialGuess, KrotovConfig, UpdateScheme, DEFAULT_GUESS, DEFAULT_HORIZON_TRANSFER_TIMES,
    DEFAULT_J_DT, DEFAULT_LAMBDA_TIMES_T, DEFAULT_MAX_ITERATIONS, DEFAULT_TARGET_FIDELITY,
};
use spinoc_core::protocols::AmplitudeDistribution;
use spinoc_core::{ControlOperatorKind, ProcessKind};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Desk,
    Paper,
}

/// Optimizer settings in chain-relative units, turned into a
/// [`KrotovConfig`] per cell once `J` and `L` are known.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KrotovSettings {
    /// Horizon in units of `(L - 1) pi / J`.
    pub horizon_transfer_times: f64,
    /// `J dt`.
    pub j_dt: f64,
    /// `lambda0 T` for a control of norm `J`.
    pub lambda_times_t: f64,
    /// Multiply `lambda0` by `(||Hc|| / J)^2` for controls stronger than `J`.
    pub scale_lambda_by_control_norm: bool,
    pub target_fidelity: f64,
    pub max_iterations: usize,
    pub initial_guess: f64,
    pub scheme: UpdateScheme,
    pub stagnation_window: usize,
    pub stagnation_tol: f64,
}

impl Default for KrotovSettings {
    fn default() -> Self {
        Self {
            horizon_transfer_times: DEFAULT_HORIZON_TRANSFER_TIMES,
            j_dt: DEFAULT_J_DT,
            lambda_times_t: DEFAULT_LAMBDA_TIMES_T,
            scale_lambda_by_control_norm: true,
            target_fidelity: DEFAULT_TARGET_FIDELITY,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            initial_guess: DEFAULT_GUESS,
            scheme: UpdateScheme::Sequential,
            stagnation_window: 50,
            stagnation_tol: 1e-12,
        }
    }
}

impl KrotovSettings {
    /// Config for `params`, before any control-norm scaling of `lambda0`.
    pub fn to_config(&self, params: &ChainParams) -> KrotovConfig {
        let total_time = self.horizon_transfer_times * params.transfer_time();
        KrotovConfig {
            total_time,
            dt: self.j_dt / params.j,
            lambda0: self.lambda_times_t / total_time,
            target_fidelity: self.target_fidelity,
            max_iterations: self.max_iterations,
            initial_guess: InitialGuess::Constant(self.initial_guess),
            scheme: self.scheme,
            stagnation_window: self.stagnation_window,
            stagnation_tol: self.stagnation_tol,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSettings {
    pub beta_cutoff: f64,
    pub remove_dc: bool,
}

impl Default for AnalysisSettings {
    fn default() -> Self {
        Self {
            beta_cutoff: DEFAULT_BETA_CUTOFF,
            remove_dc: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BrodySettings {
    /// Chain length for the level statistics, independent of the sweep chain.
    pub l: usize,
    pub k_values: Vec<usize>,
    pub gamma_grid: Vec<f64>,
    pub epsilon_grid: Vec<f64>,
    /// Fraction of levels dropped at each spectral edge before fitting.
    pub trim_fraction: f64,
    /// Rows with `K` below this are flagged as low statistics.
    pub min_reliable_k: usize,
}

impl Default for BrodySettings {
    fn default() -> Self {
        Self {
            l: 15,
            k_values: vec![1, 2, 3, 4],
            gamma_grid: linspace(0.0, 1.0, 11),
            epsilon_grid: linspace(-3.0, 3.0, 13),
            trim_fraction: 0.1,
            min_reliable_k: 3,
        }
    }
}

/// Difference range `M`, either fixed or a fraction of the basis dimension
/// (rounded up).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DiffRange {
    Fixed(usize),
    FractionOfDim { fraction_of_dim: f64 },
}

impl DiffRange {
    pub fn resolve(&self, dim: usize) -> usize {
        match *self {
            DiffRange::Fixed(m) => m,
            DiffRange::FractionOfDim { fraction_of_dim } => {
                (fraction_of_dim * dim as f64).ceil() as usize
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiffHistSettings {
    pub l: usize,
    pub k: usize,
    /// The first two entries are compared by L1 distance.
    pub gammas: Vec<f64>,
    pub m_values: Vec<DiffRange>,
    pub bins: usize,
    pub upper: f64,
    pub trim_fraction: f64,
}

impl Default for DiffHistSettings {
    fn default() -> Self {
        Self {
            l: 15,
            k: 4,
            gammas: vec![0.0, 1.0],
            m_values: vec![
                DiffRange::Fixed(1),
                DiffRange::Fixed(5),
                DiffRange::Fixed(20),
                DiffRange::FractionOfDim {
                    fraction_of_dim: 0.1,
                },
            ],
            bins: 40,
            upper: 4.0,
            trim_fraction: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConnMapSettings {
    pub k: usize,
    pub gamma: f64,
    /// Entries above `threshold * J` are counted as connections.
    pub threshold: f64,
}

impl Default for ConnMapSettings {
    fn default() -> Self {
        Self {
            k: 2,
            gamma: 1.0,
            threshold: 0.01,
        }
    }
}

/// One optimization for the `optimize` subcommand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellSettings {
    pub process: ProcessKind,
    pub k: usize,
    pub gamma: f64,
    pub j: f64,
    pub seed: u64,
}

impl Default for CellSettings {
    fn default() -> Self {
        Self {
            process: ProcessKind::A,
            k: 1,
            gamma: 0.0,
            j: 1.0,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// `chain.j` and `chain.gamma` are replaced by the grid values in sweeps.
    pub chain: ChainParams,
    pub processes: Vec<ProcessKind>,
    pub k_values: Vec<usize>,
    pub gamma_grid: Vec<f64>,
    pub j_grid: Vec<f64>,
    pub control: ControlOperatorKind,
    pub krotov: KrotovSettings,
    pub analysis: AnalysisSettings,
    pub brody: BrodySettings,
    pub diffhist: DiffHistSettings,
    pub connmap: ConnMapSettings,
    pub cell: CellSettings,
    /// Process B is run once per seed; process A ignores them.
    pub seeds: Vec<u64>,
    pub amplitude_distribution: AmplitudeDistribution,
    pub output_dir: PathBuf,
    /// Worker threads; 0 uses every available core.
    pub jobs: usize,
    /// Exit with status 3 when a sweep cell misses the target fidelity.
    pub fail_on_unconverged: bool,
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

impl ExperimentConfig {
    pub fn preset(preset: Preset) -> Self {
        let desk = Self {
            chain: ChainParams {
                l: 9,
                j: 1.0,
                gamma: 0.0,
                alpha_z: 0.5,
            },
            processes: vec![ProcessKind::A, ProcessKind::B],
            k_values: vec![1, 2],
            gamma_grid: linspace(0.0, 1.0, 11),
            j_grid: vec![1.0],
            control: ControlOperatorKind::LocalEdge,
            krotov: KrotovSettings::default(),
            analysis: AnalysisSettings::default(),
            brody: BrodySettings::default(),
            diffhist: DiffHistSettings::default(),
            connmap: ConnMapSettings::default(),
            cell: CellSettings::default(),
            seeds: vec![1],
            amplitude_distribution: AmplitudeDistribution::ComplexGaussian,
            output_dir: PathBuf::from("out"),
            jobs: 0,
            fail_on_unconverged: true,
        };
        match preset {
            Preset::Desk => desk,
            // K = 4 optimizations at L = 15 take hours.
            Preset::Paper => Self {
                chain: ChainParams { l: 15, ..desk.chain },
                k_values: vec![1, 2, 3, 4],
                connmap: ConnMapSettings { k: 3, ..desk.connmap },
                ..desk
            },
        }
    }

    /// Preset values overridden field by field by the JSON document.
    pub fn from_json(preset: Preset, text: &str) -> Result<Self, CliError> {
        let overlay: Value = serde_json::from_str(text)
            .map_err(|e| CliError::Config(format!("invalid JSON: {e}")))?;
        let mut base = serde_json::to_value(Self::preset(preset))
            .map_err(|e| CliError::Config(e.to_string()))?;
        merge(&mut base, overlay);
        let cfg: Self =
            serde_json::from_value(base).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(preset: Preset, path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => {
                let cfg = Self::preset(preset);
                cfg.validate()?;
                Ok(cfg)
            }
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
                Self::from_json(preset, &text)
            }
        }
    }

    pub fn params(&self, gamma: f64, j: f64) -> ChainParams {
        ChainParams {
            gamma,
            j,
            ..self.chain
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        self.chain.validate().map_err(|e| CliError::Config(e.to_string()))?;
        let l = self.chain.l;
        for (name, empty) in [
            ("processes", self.processes.is_empty()),
            ("k_values", self.k_values.is_empty()),
            ("gamma_grid", self.gamma_grid.is_empty()),
            ("j_grid", self.j_grid.is_empty()),
            ("seeds", self.seeds.is_empty()),
            ("brody.k_values", self.brody.k_values.is_empty()),
            ("brody.gamma_grid", self.brody.gamma_grid.is_empty()),
            ("brody.epsilon_grid", self.brody.epsilon_grid.is_empty()),
            ("diffhist.m_values", self.diffhist.m_values.is_empty()),
        ] {
            if empty {
                return bad(format!("{name} must not be empty"));
            }
        }
        for &gamma in self.gamma_grid.iter().chain(&self.brody.gamma_grid).chain(&self.diffhist.gammas) {
            if !gamma.is_finite() || gamma < 0.0 {
                return bad(format!("gamma {gamma} must be finite and non-negative"));
            }
        }
        for &j in &self.j_grid {
            if !(j.is_finite() && j > 0.0) {
                return bad(format!("J = {j} must be positive"));
            }
        }
        if self.epsilon_out_of_range() {
            return bad("epsilon grid values must be finite".into());
        }
        for &k in &self.k_values {
            if k == 0 || k >= l {
                return bad(format!("K = {k} outside 1..{l}"));
            }
            for process in &self.processes {
                match process {
                    ProcessKind::A if l.is_multiple_of(2) || 2 * k >= l => {
                        return bad(format!("process A needs odd L and 2K < L (L={l}, K={k})"));
                    }
                    ProcessKind::B if binomial(l, k) < 4 => {
                        return bad(format!("process B needs a larger sector (L={l}, K={k})"));
                    }
                    _ => {}
                }
            }
        }
        for &k in &self.brody.k_values {
            if k == 0 || k >= self.brody.l {
                return bad(format!("brody K = {k} outside 1..{}", self.brody.l));
            }
        }
        if !(0.0..0.5).contains(&self.brody.trim_fraction)
            || !(0.0..0.5).contains(&self.diffhist.trim_fraction)
        {
            return bad("trim fractions must lie in [0, 0.5)".into());
        }
        if self.diffhist.gammas.len() < 2 {
            return bad("diffhist.gammas needs two values to compare".into());
        }
        if self.diffhist.k == 0 || self.diffhist.k >= self.diffhist.l {
            return bad(format!("diffhist K = {} outside 1..{}", self.diffhist.k, self.diffhist.l));
        }
        if self.diffhist.bins == 0 || !(self.diffhist.upper > 0.0) {
            return bad("diffhist needs positive bins and upper edge".into());
        }
        if self.connmap.k == 0 || self.connmap.k >= l {
            return bad(format!("connmap K = {} outside 1..{l}", self.connmap.k));
        }
        let beta = self.analysis.beta_cutoff;
        if !(beta > 0.0 && beta < 1.0) {
            return bad(format!("beta_cutoff {beta} outside (0, 1)"));
        }
        let sample = self.krotov.to_config(&self.chain);
        sample.validate().map_err(|e| CliError::Config(e.to_string()))?;
        if self.cell.k == 0 || self.cell.k >= l || !(self.cell.j > 0.0) || self.cell.gamma < 0.0 {
            return bad("cell settings outside the chain's range".into());
        }
        Ok(())
    }

    fn epsilon_out_of_range(&self) -> bool {
        self.brody.epsilon_grid.iter().any(|e| !e.is_finite())
    }
}

/// Recursive object merge; arrays and scalars in `overlay` replace `base`.
fn merge(base: &mut Value, overlay: Value) {
    match (base, overlay) {
        (Value::Object(b), Value::Object(o)) => {
            for (key, value) in o {
                match b.get_mut(&key) {
                    Some(slot) => merge(slot, value),
                    None => {
                        b.insert(key, value);
                    }
                }
            }
        }
        (slot, value) => *slot = value,
    }
}
