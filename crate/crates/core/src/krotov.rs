//! Krotov optimization of a single control field for state-to-state transfer.
//!
//! Each iteration propagates the co-state `chi(t)` backwards from
//! `chi(T) = <psi_f|psi(T)> psi_f` under the current field, then re-runs the
//! forward propagation while updating every sample just before it is used:
//!
//! ```text
//! eps_j <- eps_j + Im <chi(t_j)| Hc |psi(t_j)> / lambda
//! ```
//!
//! With the sequential (immediate-feedback) scheme the fidelity never
//! decreases for a convex target functional such as this projector.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::ChainParams;
use crate::dynamics::{norm, ControlField, PropagationCache, State};
use crate::error::{Error, Result};
use crate::operators::OperatorMatrix;

/// Paper-scale defaults: horizon in units of the transfer time, step in `1/J`.
pub const DEFAULT_HORIZON_TRANSFER_TIMES: f64 = 15.0;
pub const DEFAULT_J_DT: f64 = 1e-2;
pub const DEFAULT_GUESS: f64 = 0.1;
pub const DEFAULT_TARGET_FIDELITY: f64 = 0.99;
pub const DEFAULT_MAX_ITERATIONS: usize = 5000;
/// `lambda0 = DEFAULT_LAMBDA_TIMES_T / T` for a control operator of norm `J`.
pub const DEFAULT_LAMBDA_TIMES_T: f64 = 100.0;

/// Below this overlap the co-state is set to zero.
const ZERO_OVERLAP: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateScheme {
    /// Forward states come from the field being built (immediate feedback).
    #[default]
    Sequential,
    /// All samples updated from the previous iteration's forward trajectory.
    Concurrent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialGuess {
    Constant(f64),
    Samples(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KrotovConfig {
    pub total_time: f64,
    pub dt: f64,
    pub lambda0: f64,
    pub target_fidelity: f64,
    pub max_iterations: usize,
    pub initial_guess: InitialGuess,
    #[serde(default)]
    pub scheme: UpdateScheme,
    /// Iterations without a fidelity gain above `stagnation_tol` before giving up.
    pub stagnation_window: usize,
    pub stagnation_tol: f64,
}

impl KrotovConfig {
    /// Defaults for a chain: `T = 15 T_L`, `J dt = 1e-2`, `lambda0 = 100 / T`.
    pub fn for_chain(params: &ChainParams) -> Self {
        let total_time = DEFAULT_HORIZON_TRANSFER_TIMES * params.transfer_time();
        Self {
            total_time,
            dt: DEFAULT_J_DT / params.j,
            lambda0: DEFAULT_LAMBDA_TIMES_T / total_time,
            target_fidelity: DEFAULT_TARGET_FIDELITY,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            initial_guess: InitialGuess::Constant(DEFAULT_GUESS),
            scheme: UpdateScheme::Sequential,
            stagnation_window: 50,
            stagnation_tol: 1e-12,
        }
    }

    /// Scale `lambda0` by `(||Hc|| / J)^2` (norm floored at `J`).
    ///
    /// The sequential update feeds each new sample straight into the next
    /// step, with a loop gain of roughly `dt ||Hc||^2 / lambda0`; keeping that
    /// gain fixed stops strong controls from ringing at the Nyquist frequency.
    /// The edge control has norm `J`, so its weight is unchanged.
    pub fn scale_lambda_for_control(mut self, control_norm: f64, j: f64) -> Self {
        let ratio = (control_norm / j).max(1.0);
        self.lambda0 *= ratio * ratio;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.total_time) || !positive(self.dt) || !positive(self.lambda0) {
            return Err(Error::InvalidConfig(
                "total_time, dt and lambda0 must be positive".into(),
            ));
        }
        if !(self.target_fidelity > 0.0 && self.target_fidelity <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "target fidelity {} outside (0, 1]",
                self.target_fidelity
            )));
        }
        if let InitialGuess::Samples(s) = &self.initial_guess {
            if s.len() != self.steps() {
                return Err(Error::InvalidConfig(format!(
                    "initial guess has {} samples, horizon needs {}",
                    s.len(),
                    self.steps()
                )));
            }
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        ControlField::steps_for(self.total_time, self.dt)
    }

    pub fn guess_field(&self) -> Result<ControlField> {
        match &self.initial_guess {
            InitialGuess::Constant(v) => ControlField::constant(self.dt, self.steps(), *v),
            InitialGuess::Samples(s) => ControlField::new(self.dt, s.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    TargetReached,
    MaxIterations,
    Stagnated,
    /// `psi(T)` became orthogonal to the target, so the co-state vanished.
    ZeroOverlap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    pub field: ControlField,
    /// Fidelity of the guess followed by one entry per iteration.
    pub fidelity_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub stop_reason: StopReason,
}

impl OptimizationResult {
    pub fn final_fidelity(&self) -> f64 {
        *self.fidelity_history.last().expect("history holds the guess")
    }

    /// Largest decrease between consecutive iterations (0 if monotone).
    pub fn worst_decrease(&self) -> f64 {
        self.fidelity_history
            .windows(2)
            .map(|w| w[0] - w[1])
            .fold(0.0, f64::max)
    }
}

fn check_pair(a: &State, b: &State) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(())
}

/// `|<psi|psi_f>|^2`.
pub fn fidelity(psi: &State, psi_f: &State) -> Result<f64> {
    check_pair(psi, psi_f)?;
    Ok(psi_f.dotc(psi).norm_sqr())
}

/// `chi(T) = <psi_f|psi(T)> psi_f`, or zero when the overlap is negligible.
pub fn co_state(psi_t: &State, psi_f: &State) -> Result<State> {
    check_pair(psi_t, psi_f)?;
    let overlap = psi_f.dotc(psi_t);
    if overlap.norm_sqr() < ZERO_OVERLAP {
        return Ok(State::zeros(psi_f.len()));
    }
    Ok(psi_f * overlap)
}

fn check_unit(state: &State, what: &str) -> Result<()> {
    let n = norm(state);
    if (n - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidProcess(format!("{what} has norm {n}, expected 1")));
    }
    Ok(())
}

/// One backward/forward sweep in the control frame. Returns the updated field
/// and `psi(T)` under it.
fn sweep(
    field: &ControlField,
    psi0: &State,
    psi_f: &State,
    psi_t: &State,
    cache: &PropagationCache,
    lambda0: f64,
    scheme: UpdateScheme,
) -> (ControlField, State) {
    let chi_t = psi_f * psi_f.dotc(psi_t);
    let (_, chis) = cache.run_in_frame(chi_t, field, true, true);
    let mut next = field.clone();
    let inv_lambda = 1.0 / lambda0;
    match scheme {
        UpdateScheme::Sequential => {
            let mut psi = psi0.clone();
            let mut scratch = State::zeros(psi.len());
            for (eps, chi) in next.samples_mut().iter_mut().zip(&chis) {
                *eps += inv_lambda * cache.control_matrix_element(chi, &psi).im;
                cache.step_in_frame(&mut psi, *eps, false, &mut scratch);
            }
            (next, psi)
        }
        UpdateScheme::Concurrent => {
            let (_, psis) = cache.run_in_frame(psi0.clone(), field, false, true);
            for ((eps, chi), psi) in next.samples_mut().iter_mut().zip(&chis).zip(&psis) {
                *eps += inv_lambda * cache.control_matrix_element(chi, psi).im;
            }
            let (end, _) = cache.run_in_frame(psi0.clone(), &next, false, false);
            (next, end)
        }
    }
}

/// One Krotov update of `field` (sequential scheme).
pub fn krotov_iteration(
    field: &ControlField,
    psi0: &State,
    psi_f: &State,
    cache: &PropagationCache,
    lambda0: f64,
) -> Result<ControlField> {
    krotov_iteration_with(field, psi0, psi_f, cache, lambda0, UpdateScheme::Sequential)
}

pub fn krotov_iteration_with(
    field: &ControlField,
    psi0: &State,
    psi_f: &State,
    cache: &PropagationCache,
    lambda0: f64,
    scheme: UpdateScheme,
) -> Result<ControlField> {
    cache.check_state(psi0)?;
    cache.check_state(psi_f)?;
    if !(lambda0 > 0.0) {
        return Err(Error::InvalidConfig("lambda0 must be positive".into()));
    }
    let psi0 = cache.to_frame(psi0);
    let psi_f = cache.to_frame(psi_f);
    let (psi_t, _) = cache.run_in_frame(psi0.clone(), field, false, false);
    Ok(sweep(field, &psi0, &psi_f, &psi_t, cache, lambda0, scheme).0)
}

/// Exact derivative of the fidelity with respect to each field sample for
/// the Strang-split propagator.
pub fn fidelity_gradient(
    field: &ControlField,
    psi0: &State,
    psi_f: &State,
    cache: &PropagationCache,
) -> Result<Vec<f64>> {
    cache.check_state(psi0)?;
    cache.check_state(psi_f)?;
    let psi0 = cache.to_frame(psi0);
    let psi_f = cache.to_frame(psi_f);
    let (psi_t, psis) = cache.run_in_frame(psi0, field, false, true);
    let chi_t = &psi_f * psi_f.dotc(&psi_t);
    let (_, chis) = cache.run_in_frame(chi_t, field, true, true);
    let elems: Vec<Complex64> = chis
        .iter()
        .zip(&psis)
        .map(|(c, p)| cache.control_matrix_element(c, p))
        .collect();
    let dt = field.dt();
    Ok(elems.windows(2).map(|w| dt * (w[0].im + w[1].im)).collect())
}

/// Iterate Krotov updates until the target fidelity, the iteration cap or
/// stagnation.
pub fn optimize(
    psi0: &State,
    psi_f: &State,
    h01: &OperatorMatrix,
    hc: &OperatorMatrix,
    config: &KrotovConfig,
) -> Result<OptimizationResult> {
    config.validate()?;
    let cache = PropagationCache::new(h01, hc, config.dt)?;
    optimize_with_cache(psi0, psi_f, &cache, config)
}

pub fn optimize_with_cache(
    psi0: &State,
    psi_f: &State,
    cache: &PropagationCache,
    config: &KrotovConfig,
) -> Result<OptimizationResult> {
    config.validate()?;
    cache.check_state(psi0)?;
    cache.check_state(psi_f)?;
    check_unit(psi0, "initial state")?;
    check_unit(psi_f, "target state")?;
    if (cache.dt() - config.dt).abs() > 1e-12 * config.dt {
        return Err(Error::InvalidConfig("cache and config time steps differ".into()));
    }

    let psi0 = cache.to_frame(psi0);
    let psi_f = cache.to_frame(psi_f);
    let mut field = config.guess_field()?;
    let (mut psi_t, _) = cache.run_in_frame(psi0.clone(), &field, false, false);
    let mut f = psi_f.dotc(&psi_t).norm_sqr();
    let mut history = vec![f];
    let mut stalled = 0usize;

    let stop_reason = loop {
        if f >= config.target_fidelity {
            break StopReason::TargetReached;
        }
        if history.len() > config.max_iterations {
            break StopReason::MaxIterations;
        }
        if f < ZERO_OVERLAP {
            break StopReason::ZeroOverlap;
        }
        let (next, next_psi_t) = sweep(
            &field,
            &psi0,
            &psi_f,
            &psi_t,
            cache,
            config.lambda0,
            config.scheme,
        );
        let f_next = psi_f.dotc(&next_psi_t).norm_sqr();
        if f_next - f < config.stagnation_tol {
            stalled += 1;
        } else {
            stalled = 0;
        }
        field = next;
        psi_t = next_psi_t;
        f = f_next;
        history.push(f);
        if stalled >= config.stagnation_window && f < config.target_fidelity {
            break StopReason::Stagnated;
        }
    };

    Ok(OptimizationResult {
        field,
        iterations: history.len() - 1,
        converged: f >= config.target_fidelity,
        fidelity_history: history,
        stop_reason,
    })
}
