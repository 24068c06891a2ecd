use thiserror::Error;

use crate::model::{BlockVector, OscState, Potential};

use super::{StepError, TwoStepMethod, Workspace};

#[derive(Debug, Error, Clone, PartialEq)]
#[error("step {step}: {source}")]
pub struct IntegrationError {
    pub step: usize,
    #[source]
    pub source: StepError,
}

fn at(step: usize) -> impl FnOnce(StepError) -> IntegrationError {
    move |source| IntegrationError { step, source }
}

/// Runs `n_steps` steps of a two-step method from `state0`.
///
/// The sampler sees `(n, state_n)` for every `n` in `0, stride, 2*stride, ..`
/// up to `n_steps`. The momentum `p_n` needs `q_{n+1}`, which is computed one
/// step ahead, so the final state costs one extra advance. Time is `n * h`.
pub fn integrate<M, F>(
    method: &M,
    potential: &dyn Potential,
    state0: &OscState,
    n_steps: usize,
    stride: usize,
    mut sampler: F,
) -> Result<OscState, IntegrationError>
where
    M: TwoStepMethod + ?Sized,
    F: FnMut(usize, &OscState),
{
    if n_steps == 0 || stride == 0 {
        return Err(at(0)(StepError::InvalidParameter(format!("n_steps = {n_steps}, stride = {stride}"))));
    }
    let freq = method.freq();
    if !state0.conforms(freq) {
        return Err(at(0)(StepError::InvalidParameter("initial state does not conform".into())));
    }
    let h = method.step_size();
    let t0 = state0.t;
    let mut ws = Workspace::new(freq);

    sampler(0, state0);

    let mut q_prev = state0.q.clone();
    let mut q_curr = BlockVector::zeros(freq);
    let mut q_next = BlockVector::zeros(freq);
    method.start_into(potential, &state0.q, &state0.p, &mut q_curr, &mut ws).map_err(at(1))?;

    let mut sample = state0.clone();
    for n in 1..=n_steps {
        method.advance_into(potential, &q_prev, &q_curr, &mut q_next, &mut ws).map_err(at(n + 1))?;
        if n % stride == 0 || n == n_steps {
            method.momentum_into(&q_prev, &q_next, &mut sample.p).map_err(at(n))?;
            sample.q.as_mut_slice().copy_from_slice(q_curr.as_slice());
            sample.t = t0 + n as f64 * h;
            if n % stride == 0 {
                sampler(n, &sample);
            }
        }
        std::mem::swap(&mut q_prev, &mut q_curr);
        std::mem::swap(&mut q_curr, &mut q_next);
    }
    Ok(sample)
}
