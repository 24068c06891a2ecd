//! Numerical resonances between the step size and the frequencies.
//!
//! The pipeline enumerates the sine combinations `|sin(h/2 k.w)|` for
//! `||k|| <= N+1`, finds an empty gap window, collects the near-resonant `k`
//! below it, builds the integer module they generate, and shifts the
//! frequencies by a minimal-norm correction so that every module element
//! becomes an exact resonance. The step-size conditions
//! `|sin(h w_j)| >= sqrt(h)` and `|h k.w - 2 pi r| >= sqrt(h)` (`r != 0`)
//! are checked separately.

mod combinations;
mod frequencies;
mod gap;
mod lattice;

use std::f64::consts::PI;

use thiserror::Error;

use crate::model::FrequencySystem;

pub use combinations::{
    canonical_count, canonical_vectors, dot, l1_norm, lattice_point_count, sine_combinations, sine_combinations_capped,
    SineCombination, DEFAULT_LATTICE_CAP,
};
pub use frequencies::{
    modify_frequencies, verify_modified_frequencies, ModifiedFrequencies, VerificationReport, MEMBER_RESIDUAL_TOL,
    MIN_SINGULAR_VALUE,
};
pub use gap::{detect_gap, near_resonant_set, GapResult};
pub use lattice::{hermite_normal_form, in_module, module_basis, ResonanceModule};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ResonanceError {
    #[error("{count} lattice points exceed the enumeration cap {cap}")]
    CombinatorialOverflow { count: u128, cap: u128 },
    #[error("no empty gap window: {0}")]
    GapNotFound(String),
    #[error("module basis is ill-conditioned (smallest singular value {smallest_singular_value:e})")]
    IllConditionedBasis { smallest_singular_value: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// `kappa = min_j |sin(h w_j)|`; passes iff `kappa >= sqrt(h)`.
pub fn check_assumption_a(freq: &FrequencySystem, h: f64) -> (f64, bool) {
    let kappa = freq.fast_omegas().iter().map(|w| (h * w).sin().abs()).fold(f64::INFINITY, f64::min);
    (kappa, kappa >= h.sqrt())
}

/// Distance from `x` to the nearest nonzero multiple of `2 pi`.
fn distance_to_nonzero_multiple(x: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let r = (x / two_pi).round();
    if r != 0.0 {
        (x - two_pi * r).abs()
    } else {
        two_pi - x.abs()
    }
}

/// `min |h k.w - 2 pi r|` over `||k|| <= N+1` and `r != 0`; passes iff the
/// margin is at least `sqrt(h)`. `r = 0` is deliberately not excluded.
pub fn check_num_nonres(freq: &FrequencySystem, h: f64, n: u32) -> Result<(f64, bool), ResonanceError> {
    let ks = canonical_vectors(freq.num_fast(), n + 1, DEFAULT_LATTICE_CAP)?;
    let margin =
        ks.iter().map(|k| distance_to_nonzero_multiple(h * dot(k, freq.fast_omegas()))).fold(f64::INFINITY, f64::min);
    Ok((margin, margin >= h.sqrt()))
}

/// Everything the resonance analysis produces for one `(freq, h, N, delta)`.
#[derive(Debug, Clone)]
pub struct ResonanceAnalysis {
    pub n: u32,
    pub delta: f64,
    pub h: f64,
    pub combinations: Vec<SineCombination>,
    pub gap: GapResult,
    pub near_resonant: Vec<Vec<i64>>,
    pub modified: ModifiedFrequencies,
    pub verification: VerificationReport,
    pub kappa: f64,
    pub assumption_a: bool,
    pub nonres_margin: f64,
    pub nonres: bool,
}

impl ResonanceAnalysis {
    pub fn module(&self) -> &ResonanceModule {
        &self.modified.module
    }
}

pub fn analyze(freq: &FrequencySystem, h: f64, n: u32, delta: f64) -> Result<ResonanceAnalysis, ResonanceError> {
    let combinations = sine_combinations(freq, h, n)?;
    let gap = detect_gap(&combinations, h, delta, n, freq.num_fast())?;
    let near_resonant = near_resonant_set(&combinations, &gap);
    let module = module_basis(freq.num_fast(), &near_resonant);
    let modified = modify_frequencies(freq, h, &module, &gap)?;
    let verification = verify_modified_frequencies(&modified, freq, h, n)?;
    let (kappa, assumption_a) = check_assumption_a(freq, h);
    let (nonres_margin, nonres) = check_num_nonres(freq, h, n)?;
    Ok(ResonanceAnalysis {
        n,
        delta,
        h,
        combinations,
        gap,
        near_resonant,
        modified,
        verification,
        kappa,
        assumption_a,
        nonres_margin,
        nonres,
    })
}
