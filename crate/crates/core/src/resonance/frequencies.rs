use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::model::FrequencySystem;

use super::combinations::{canonical_vectors, dot, DEFAULT_LATTICE_CAP};
use super::{in_module, GapResult, ResonanceError, ResonanceModule};

/// Smallest singular value accepted for the module basis matrix.
pub const MIN_SINGULAR_VALUE: f64 = 1e-10;

/// Modified frequencies `varpi = w + theta` turning every module element
/// into an exact resonance `sin(h/2 k.varpi) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModifiedFrequencies {
    pub varpi: Vec<f64>,
    pub theta: Vec<f64>,
    /// `m_i` with `h/2 k^i.varpi = pi m_i` for each basis row `k^i`.
    pub multiples: Vec<i64>,
    pub module: ResonanceModule,
    pub gap: GapResult,
}

/// Minimal-norm `theta` solving `k^i.(w + theta) = 2 pi m_i / h`, where
/// `m_i` is the integer closest to `h/2 k^i.w / pi`.
pub fn modify_frequencies(
    freq: &FrequencySystem,
    h: f64,
    module: &ResonanceModule,
    gap: &GapResult,
) -> Result<ModifiedFrequencies, ResonanceError> {
    let omegas = freq.fast_omegas();
    let ell = omegas.len();
    if module.dim() != ell {
        return Err(ResonanceError::InvalidInput(format!(
            "module dimension {} does not match {ell} fast frequencies",
            module.dim()
        )));
    }
    let basis = module.basis();
    let d = basis.len();
    let mut multiples = Vec::with_capacity(d);
    let mut theta = vec![0.0; ell];
    if d > 0 {
        let k = DMatrix::from_fn(d, ell, |i, j| basis[i][j] as f64);
        let mut rhs = DVector::zeros(d);
        for (i, row) in basis.iter().enumerate() {
            let kw = dot(row, omegas);
            let m = (0.5 * h * kw / PI).round();
            multiples.push(m as i64);
            rhs[i] = 2.0 * PI * m / h - kw;
        }
        let svd = k.svd(true, true);
        let smin = svd.singular_values.iter().copied().fold(f64::INFINITY, f64::min);
        if smin < MIN_SINGULAR_VALUE {
            return Err(ResonanceError::IllConditionedBasis { smallest_singular_value: smin });
        }
        let sol = svd
            .solve(&rhs, 0.0)
            .map_err(|e| ResonanceError::InvalidInput(format!("minimal-norm solve failed: {e}")))?;
        theta.copy_from_slice(sol.as_slice());
    }
    let varpi = omegas.iter().zip(&theta).map(|(w, t)| w + t).collect();
    Ok(ModifiedFrequencies { varpi, theta, multiples, module: module.clone(), gap: *gap })
}

/// Outcome of checking the modified-frequency properties on all `||k|| <= N+1`.
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    /// `max |sin(h/2 k.varpi)|` over module members.
    pub member_residual: f64,
    /// `min |sin(h/2 k.varpi)|` over non-members (`inf` if there are none).
    pub nonmember_min: f64,
    /// `1/2 h^{1-alpha-mu}`
    pub nonmember_threshold: f64,
    /// `max_j |theta_j| h^{alpha-mu}`
    pub empirical_gamma: f64,
    pub units_excluded: bool,
    pub doubles_excluded: bool,
    pub members_checked: usize,
    pub nonmembers_checked: usize,
}

/// Member residual tolerance.
pub const MEMBER_RESIDUAL_TOL: f64 = 1e-9;

impl VerificationReport {
    pub fn exact_resonance_ok(&self) -> bool {
        self.member_residual <= MEMBER_RESIDUAL_TOL
    }

    pub fn nonresonance_bound_ok(&self) -> bool {
        self.nonmember_min >= self.nonmember_threshold
    }

    pub fn passed(&self) -> bool {
        self.exact_resonance_ok() && self.nonresonance_bound_ok() && self.units_excluded && self.doubles_excluded
    }
}

pub fn verify_modified_frequencies(
    mf: &ModifiedFrequencies,
    freq: &FrequencySystem,
    h: f64,
    n: u32,
) -> Result<VerificationReport, ResonanceError> {
    let ell = freq.num_fast();
    let ks = canonical_vectors(ell, n + 1, DEFAULT_LATTICE_CAP)?;
    let gap = &mf.gap;
    let mut member_residual: f64 = 0.0;
    let mut nonmember_min = f64::INFINITY;
    let (mut members, mut nonmembers) = (0, 0);
    for k in &ks {
        let s = (0.5 * h * dot(k, &mf.varpi)).sin().abs();
        if in_module(k, &mf.module) {
            members += 1;
            member_residual = member_residual.max(s);
        } else {
            nonmembers += 1;
            nonmember_min = nonmember_min.min(s);
        }
    }
    let unit = |j: usize, scale: i64| {
        let mut e = vec![0i64; ell];
        e[j] = scale;
        e
    };
    let units_excluded = (0..ell).all(|j| !in_module(&unit(j, 1), &mf.module));
    let doubles_excluded = (0..ell).all(|j| !in_module(&unit(j, 2), &mf.module));
    let max_theta = mf.theta.iter().fold(0.0_f64, |m, t| m.max(t.abs()));
    Ok(VerificationReport {
        member_residual,
        nonmember_min,
        nonmember_threshold: 0.5 * h.powf(1.0 - gap.alpha - gap.mu),
        empirical_gamma: max_theta * h.powf(gap.alpha - gap.mu),
        units_excluded,
        doubles_excluded,
        members_checked: members,
        nonmembers_checked: nonmembers,
    })
}
