//! Time evolution under `H(t) = H01 + eps(t) Hc` with a piecewise-constant
//! field, using Strang splitting
//! `exp(-i eps Hc dt/2) exp(-i H01 dt) exp(-i eps Hc dt/2)`.
//!
//! States are propagated in the *control frame*: the eigenbasis of the
//! control operator. For the edge control this is the working basis itself
//! (the operator is already diagonal there), so the frame change is free.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operators::OperatorMatrix;
use crate::spectral_stats::diagonalize;

pub type State = DVector<Complex64>;

/// Uniformly sampled control field; sample `j` is held on `[j dt, (j+1) dt)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlField {
    dt: f64,
    samples: Vec<f64>,
}

impl ControlField {
    pub fn new(dt: f64, samples: Vec<f64>) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidField(format!("time step {dt} must be positive")));
        }
        if let Some(j) = samples.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidField(format!("sample {j} is not finite")));
        }
        Ok(Self { dt, samples })
    }

    pub fn constant(dt: f64, steps: usize, value: f64) -> Result<Self> {
        Self::new(dt, vec![value; steps])
    }

    /// Number of steps covering `[0, total_time]`, rounded to the nearest integer.
    pub fn steps_for(total_time: f64, dt: f64) -> usize {
        (total_time / dt).round() as usize
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [f64] {
        &mut self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn total_time(&self) -> f64 {
        self.dt * self.samples.len() as f64
    }

    /// Left edge of every step.
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.samples.len()).map(move |j| j as f64 * self.dt)
    }
}

/// States at every grid point `t_0 .. t_N` (`N + 1` entries).
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<State>,
}

impl Trajectory {
    pub fn first(&self) -> &State {
        &self.states[0]
    }

    pub fn last(&self) -> &State {
        self.states.last().expect("trajectory is never empty")
    }
}

/// Precomputed spectral data for repeated propagation with fixed
/// `(H01, Hc, dt)`.
#[derive(Debug, Clone)]
pub struct PropagationCache {
    dt: f64,
    /// Eigenvalues of the control operator.
    control_eigs: Vec<f64>,
    /// Control eigenvectors in the working basis; `None` when already diagonal.
    control_frame: Option<DMatrix<f64>>,
    /// Free eigenvectors expressed in the control frame.
    free_vectors: DMatrix<f64>,
    /// `exp(-i E_n dt)`.
    free_phases: Vec<Complex64>,
    free_energies: Vec<f64>,
}

impl PropagationCache {
    pub fn new(h01: &OperatorMatrix, hc: &OperatorMatrix, dt: f64) -> Result<Self> {
        if h01.dim() != hc.dim() {
            return Err(Error::DimensionMismatch {
                expected: h01.dim(),
                found: hc.dim(),
            });
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidField(format!("time step {dt} must be positive")));
        }
        let free = diagonalize(h01)?;
        let diag_tol = 1e-14 * hc.max_abs().max(1.0);
        let (control_eigs, control_frame, free_vectors) = if hc.is_diagonal(diag_tol) {
            (hc.diagonal(), None, free.eigenvectors().clone())
        } else {
            let ctrl = diagonalize(hc)?;
            let w = ctrl.eigenvectors().clone();
            let u = w.transpose() * free.eigenvectors();
            (ctrl.energies().iter().copied().collect(), Some(w), u)
        };
        let free_energies: Vec<f64> = free.energies().iter().copied().collect();
        let free_phases = free_energies
            .iter()
            .map(|&e| Complex64::from_polar(1.0, -e * dt))
            .collect();
        Ok(Self {
            dt,
            control_eigs,
            control_frame,
            free_vectors,
            free_phases,
            free_energies,
        })
    }

    pub fn dim(&self) -> usize {
        self.control_eigs.len()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn control_eigenvalues(&self) -> &[f64] {
        &self.control_eigs
    }

    /// Spectral norm of the control operator.
    pub fn control_norm(&self) -> f64 {
        self.control_eigs.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn free_energies(&self) -> &[f64] {
        &self.free_energies
    }

    /// Whether the control operator was diagonal in the working basis.
    pub fn has_diagonal_control(&self) -> bool {
        self.control_frame.is_none()
    }

    pub fn check_state(&self, state: &State) -> Result<()> {
        if state.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: state.len(),
            });
        }
        Ok(())
    }

    fn check_field(&self, field: &ControlField) -> Result<()> {
        if (field.dt() - self.dt).abs() > 1e-12 * self.dt {
            return Err(Error::InvalidField(format!(
                "field step {} differs from cache step {}",
                field.dt(),
                self.dt
            )));
        }
        Ok(())
    }

    /// Working basis -> control frame.
    pub fn to_frame(&self, state: &State) -> State {
        match &self.control_frame {
            None => state.clone(),
            Some(w) => {
                let mut out = State::zeros(state.len());
                mul_real_transpose(w, state.as_slice(), out.as_mut_slice());
                out
            }
        }
    }

    /// Control frame -> working basis.
    pub fn from_frame(&self, state: &State) -> State {
        match &self.control_frame {
            None => state.clone(),
            Some(w) => {
                let mut out = State::zeros(state.len());
                mul_real(w, state.as_slice(), out.as_mut_slice());
                out
            }
        }
    }

    /// `<chi|Hc|psi>` for two control-frame states.
    pub(crate) fn control_matrix_element(&self, chi: &State, psi: &State) -> Complex64 {
        chi.iter()
            .zip(psi.iter())
            .zip(&self.control_eigs)
            .map(|((c, p), &e)| c.conj() * p * e)
            .sum()
    }

    /// One Strang step in the control frame; `backward` applies the adjoint.
    pub(crate) fn step_in_frame(
        &self,
        state: &mut State,
        eps: f64,
        backward: bool,
        scratch: &mut State,
    ) {
        let sign = if backward { 1.0 } else { -1.0 };
        let half = 0.5 * eps * self.dt * sign;
        let kick = |state: &mut State| {
            for (amp, &c) in state.iter_mut().zip(&self.control_eigs) {
                *amp *= Complex64::from_polar(1.0, half * c);
            }
        };
        kick(state);
        scratch.fill(Complex64::new(0.0, 0.0));
        mul_real_transpose(&self.free_vectors, state.as_slice(), scratch.as_mut_slice());
        for (amp, phase) in scratch.iter_mut().zip(&self.free_phases) {
            *amp *= if backward { phase.conj() } else { *phase };
        }
        state.fill(Complex64::new(0.0, 0.0));
        mul_real(&self.free_vectors, scratch.as_slice(), state.as_mut_slice());
        kick(state);
    }

    /// Propagate a control-frame state over the whole field, optionally
    /// recording every grid point.
    pub(crate) fn run_in_frame(
        &self,
        mut state: State,
        field: &ControlField,
        backward: bool,
        store: bool,
    ) -> (State, Vec<State>) {
        let mut scratch = State::zeros(state.len());
        let mut stored = Vec::new();
        if store {
            stored.reserve(field.len() + 1);
            stored.push(state.clone());
        }
        let mut apply = |eps: f64, state: &mut State| {
            self.step_in_frame(state, eps, backward, &mut scratch);
            if store {
                stored.push(state.clone());
            }
        };
        if backward {
            for &eps in field.samples().iter().rev() {
                apply(eps, &mut state);
            }
            stored.reverse();
        } else {
            for &eps in field.samples() {
                apply(eps, &mut state);
            }
        }
        (state, stored)
    }
}

/// `out += m v` for a real column-major matrix and complex vector.
fn mul_real(m: &DMatrix<f64>, v: &[Complex64], out: &mut [Complex64]) {
    let n = m.nrows();
    for (col, &vj) in m.as_slice().chunks_exact(n).zip(v) {
        for (o, &a) in out.iter_mut().zip(col) {
            *o += vj * a;
        }
    }
}

/// `out += m^T v`.
fn mul_real_transpose(m: &DMatrix<f64>, v: &[Complex64], out: &mut [Complex64]) {
    let n = m.nrows();
    for (o, col) in out.iter_mut().zip(m.as_slice().chunks_exact(n)) {
        let mut acc = Complex64::new(0.0, 0.0);
        for (&a, &x) in col.iter().zip(v) {
            acc += x * a;
        }
        *o += acc;
    }
}

pub fn make_propagation_cache(
    h01: &OperatorMatrix,
    hc: &OperatorMatrix,
    dt: f64,
) -> Result<PropagationCache> {
    PropagationCache::new(h01, hc, dt)
}

/// Single Strang step of length `cache.dt()` with field value `eps`.
pub fn step(state: &State, eps: f64, cache: &PropagationCache) -> Result<State> {
    cache.check_state(state)?;
    let mut s = cache.to_frame(state);
    let mut scratch = State::zeros(s.len());
    cache.step_in_frame(&mut s, eps, false, &mut scratch);
    Ok(cache.from_frame(&s))
}

/// `psi(T)` from `psi(0)`.
pub fn propagate_forward(psi0: &State, field: &ControlField, cache: &PropagationCache) -> Result<State> {
    cache.check_state(psi0)?;
    cache.check_field(field)?;
    let (end, _) = cache.run_in_frame(cache.to_frame(psi0), field, false, false);
    Ok(cache.from_frame(&end))
}

/// `psi(t_j)` for every grid point.
pub fn forward_trajectory(
    psi0: &State,
    field: &ControlField,
    cache: &PropagationCache,
) -> Result<Trajectory> {
    cache.check_state(psi0)?;
    cache.check_field(field)?;
    let (_, states) = cache.run_in_frame(cache.to_frame(psi0), field, false, true);
    Ok(Trajectory {
        states: states.iter().map(|s| cache.from_frame(s)).collect(),
    })
}

/// `chi(0)` from `chi(T)` under the same Hamiltonian, run backwards in time.
pub fn propagate_backward(
    chi_t: &State,
    field: &ControlField,
    cache: &PropagationCache,
) -> Result<State> {
    cache.check_state(chi_t)?;
    cache.check_field(field)?;
    let (start, _) = cache.run_in_frame(cache.to_frame(chi_t), field, true, false);
    Ok(cache.from_frame(&start))
}

/// `chi(t_j)` for every grid point, indexed forward in time.
pub fn backward_trajectory(
    chi_t: &State,
    field: &ControlField,
    cache: &PropagationCache,
) -> Result<Trajectory> {
    cache.check_state(chi_t)?;
    cache.check_field(field)?;
    let (_, states) = cache.run_in_frame(cache.to_frame(chi_t), field, true, true);
    Ok(Trajectory {
        states: states.iter().map(|s| cache.from_frame(s)).collect(),
    })
}

pub fn norm(state: &State) -> f64 {
    state.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Embed a real vector as a complex state.
pub fn real_state(v: &DVector<f64>) -> State {
    v.map(|x| Complex64::new(x, 0.0))
}

/// Basis vector `e_index`.
pub fn basis_state(dim: usize, index: usize) -> State {
    let mut s = State::zeros(dim);
    s[index] = Complex64::new(1.0, 0.0);
    s
}
