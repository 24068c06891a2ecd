//! Trigonometric integrators in two-step form, the alpha-family of modified
//! trigonometric integrators, and the driver loop that steps them.

mod alpha;
mod driver;
mod trig;

use thiserror::Error;

use crate::model::{BlockVector, FrequencySystem, Potential, PotentialDomainError};

pub use alpha::{alpha_as_trig, alpha_step, modified_frequency, AlphaAsTrig, AlphaScheme};
pub use driver::{integrate, IntegrationError};
pub use trig::{recover_momentum, start_step, two_step_advance, TrigIntegrator};

/// `|sin(h w_j)|` below this makes momentum recovery fail.
pub const RESONANT_SIN_FLOOR: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StepError {
    #[error(transparent)]
    PotentialDomain(#[from] PotentialDomainError),
    #[error("momentum not recoverable: |sin(h w_{block})| = {sin_abs:e} at h w = {h_omega}")]
    ResonantStepSize { block: usize, h_omega: f64, sin_abs: f64 },
    #[error("h w = {h_omega} outside the domain h w < {limit} of the alpha = {alpha} scheme")]
    FrequencyOutOfDomain { alpha: f64, h_omega: f64, limit: f64 },
    #[error("invalid integrator parameter: {0}")]
    InvalidParameter(String),
}

/// Two consecutive positions `(q_{n-1}, q_n)` of a two-step scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct StepPair {
    pub q_prev: BlockVector,
    pub q_curr: BlockVector,
    pub n: usize,
    pub t: f64,
}

impl StepPair {
    pub fn new(q_prev: BlockVector, q_curr: BlockVector, n: usize, h: f64) -> Self {
        assert!(q_prev.same_layout(&q_curr), "block layouts differ");
        StepPair { q_prev, q_curr, n, t: n as f64 * h }
    }
}

/// Buffers reused across steps.
#[derive(Debug, Clone)]
pub struct Workspace {
    pub(crate) arg: BlockVector,
    pub(crate) grad: BlockVector,
}

impl Workspace {
    pub fn new(freq: &FrequencySystem) -> Self {
        Workspace { arg: BlockVector::zeros(freq), grad: BlockVector::zeros(freq) }
    }
}

/// A symmetric two-step scheme `q_{n+1} = F(q_{n-1}, q_n)` with a starting
/// step from `(q_0, p_0)` and a momentum recovered from `q_{n+1} - q_{n-1}`.
pub trait TwoStepMethod: Send + Sync {
    fn freq(&self) -> &FrequencySystem;

    fn step_size(&self) -> f64;

    fn start_into(
        &self,
        potential: &dyn Potential,
        q0: &BlockVector,
        p0: &BlockVector,
        out: &mut BlockVector,
        ws: &mut Workspace,
    ) -> Result<(), StepError>;

    fn advance_into(
        &self,
        potential: &dyn Potential,
        q_prev: &BlockVector,
        q_curr: &BlockVector,
        out: &mut BlockVector,
        ws: &mut Workspace,
    ) -> Result<(), StepError>;

    fn momentum_into(&self, q_prev: &BlockVector, q_next: &BlockVector, out: &mut BlockVector)
        -> Result<(), StepError>;
}

/// Writes `-grad U(arg)` into `ws.grad`.
pub(crate) fn force(potential: &dyn Potential, ws: &mut Workspace) -> Result<(), StepError> {
    let Workspace { arg, grad } = ws;
    potential.gradient_into(arg, grad)?;
    for g in grad.as_mut_slice() {
        *g = -*g;
    }
    Ok(())
}
