use crate::filters::{sinc, ChiFilter, FilterPair};
use crate::model::{BlockVector, FrequencySystem, Potential};

use super::{force, StepError, StepPair, TrigIntegrator, TwoStepMethod, Workspace};

/// The alpha-family of symplectic schemes
///
/// ```text
/// q_{n+1} - 2q_n + q_{n-1} + h^2 W^2 q_n + alpha h^2 W^2 (q_{n+1} - 2q_n + q_{n-1}) = h^2 g(q_n)
/// 2h p_n = (I + alpha h^2 W^2)(q_{n+1} - q_{n-1})
/// ```
///
/// `alpha = 0` is Stormer-Verlet, `alpha = 1/4` the IMEX scheme. `W` is
/// diagonal, so the implicit part is a componentwise division.
#[derive(Debug, Clone)]
pub struct AlphaScheme {
    alpha: f64,
    h: f64,
    freq: FrequencySystem,
    comp_denom: Vec<f64>,
    comp_h2w2: Vec<f64>,
}

impl AlphaScheme {
    pub fn new(alpha: f64, h: f64, freq: FrequencySystem) -> Result<Self, StepError> {
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(StepError::InvalidParameter(format!("alpha = {alpha}")));
        }
        if !(h.is_finite() && h > 0.0) {
            return Err(StepError::InvalidParameter(format!("step size h = {h}")));
        }
        for &w in freq.fast_omegas() {
            check_domain(alpha, h * w)?;
        }
        let comp_h2w2 = freq.expand(|j| {
            let hw = h * freq.omega(j);
            hw * hw
        });
        let comp_denom = comp_h2w2.iter().map(|x| 1.0 + alpha * x).collect();
        Ok(AlphaScheme { alpha, h, freq, comp_denom, comp_h2w2 })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn freq(&self) -> &FrequencySystem {
        &self.freq
    }

    /// Modified frequencies `(0, w~_1, ..., w~_l)`.
    pub fn modified_omegas(&self) -> Result<Vec<f64>, StepError> {
        self.freq.omegas().iter().map(|&w| modified_frequency(self.alpha, self.h, w)).collect()
    }
}

fn check_domain(alpha: f64, h_omega: f64) -> Result<(), StepError> {
    if alpha < 0.25 {
        let limit = 2.0 / (1.0 - 4.0 * alpha).sqrt();
        if !(h_omega < limit) {
            return Err(StepError::FrequencyOutOfDomain { alpha, h_omega, limit });
        }
    }
    Ok(())
}

/// `w~ = (2/h) arcsin( (h w / 2) / sqrt(1 + alpha h^2 w^2) )`, so `h w~` lies in `[0, pi]`.
pub fn modified_frequency(alpha: f64, h: f64, omega: f64) -> Result<f64, StepError> {
    if !(h > 0.0 && omega >= 0.0 && alpha >= 0.0) {
        return Err(StepError::InvalidParameter(format!("alpha = {alpha}, h = {h}, omega = {omega}")));
    }
    let hw = h * omega;
    check_domain(alpha, hw)?;
    let s = (0.5 * hw) / (1.0 + alpha * hw * hw).sqrt();
    Ok(2.0 * s.min(1.0).asin() / h)
}

impl TwoStepMethod for AlphaScheme {
    fn freq(&self) -> &FrequencySystem {
        &self.freq
    }

    fn step_size(&self) -> f64 {
        self.h
    }

    fn start_into(
        &self,
        potential: &dyn Potential,
        q0: &BlockVector,
        p0: &BlockVector,
        out: &mut BlockVector,
        ws: &mut Workspace,
    ) -> Result<(), StepError> {
        // eliminate q_{-1} using the momentum relation at n = 0
        ws.arg.as_mut_slice().copy_from_slice(q0.as_slice());
        force(potential, ws)?;
        let h = self.h;
        let (q, p, g) = (q0.as_slice(), p0.as_slice(), ws.grad.as_slice());
        for (i, o) in out.as_mut_slice().iter_mut().enumerate() {
            let accel = h * h * g[i] - self.comp_h2w2[i] * q[i];
            *o = q[i] + (h * p[i] + 0.5 * accel) / self.comp_denom[i];
        }
        Ok(())
    }

    fn advance_into(
        &self,
        potential: &dyn Potential,
        q_prev: &BlockVector,
        q_curr: &BlockVector,
        out: &mut BlockVector,
        ws: &mut Workspace,
    ) -> Result<(), StepError> {
        ws.arg.as_mut_slice().copy_from_slice(q_curr.as_slice());
        force(potential, ws)?;
        let h2 = self.h * self.h;
        let (qp, qc, g) = (q_prev.as_slice(), q_curr.as_slice(), ws.grad.as_slice());
        for (i, o) in out.as_mut_slice().iter_mut().enumerate() {
            let accel = h2 * g[i] - self.comp_h2w2[i] * qc[i];
            *o = 2.0 * qc[i] - qp[i] + accel / self.comp_denom[i];
        }
        Ok(())
    }

    fn momentum_into(
        &self,
        q_prev: &BlockVector,
        q_next: &BlockVector,
        out: &mut BlockVector,
    ) -> Result<(), StepError> {
        let (qp, qn) = (q_prev.as_slice(), q_next.as_slice());
        for (i, o) in out.as_mut_slice().iter_mut().enumerate() {
            *o = self.comp_denom[i] * (qn[i] - qp[i]) / (2.0 * self.h);
        }
        Ok(())
    }
}

/// One step of the alpha-family: returns `(q_{n+1}, p_n)`.
pub fn alpha_step(
    scheme: &AlphaScheme,
    s: &StepPair,
    potential: &dyn Potential,
) -> Result<(BlockVector, BlockVector), StepError> {
    let mut ws = Workspace::new(&scheme.freq);
    let mut q_next = BlockVector::zeros(&scheme.freq);
    scheme.advance_into(potential, &s.q_prev, &s.q_curr, &mut q_next, &mut ws)?;
    let mut p = BlockVector::zeros(&scheme.freq);
    scheme.momentum_into(&s.q_prev, &q_next, &mut p)?;
    Ok((q_next, p))
}

/// An alpha-family scheme rewritten as a trigonometric integrator over the
/// modified frequencies, together with the momentum transform
/// `p~_j = (chi(h w~_j) / sinc(h w~_j)) p_j`.
#[derive(Debug, Clone)]
pub struct AlphaAsTrig {
    pub integrator: TrigIntegrator,
    pub chi: ChiFilter,
    /// `chi(h w~_j) / sinc(h w~_j)` per block.
    pub momentum_factors: Vec<f64>,
}

impl AlphaAsTrig {
    /// `p -> p~`
    pub fn to_trig_momentum(&self, p: &BlockVector) -> BlockVector {
        self.scale_blocks(p, |f| f)
    }

    /// `p~ -> p`
    pub fn from_trig_momentum(&self, p_tilde: &BlockVector) -> BlockVector {
        self.scale_blocks(p_tilde, |f| 1.0 / f)
    }

    fn scale_blocks(&self, v: &BlockVector, map: impl Fn(f64) -> f64) -> BlockVector {
        let mut out = v.clone();
        for (j, &f) in self.momentum_factors.iter().enumerate() {
            let s = map(f);
            for x in out.block_mut(j) {
                *x *= s;
            }
        }
        out
    }
}

/// Equivalent modified trigonometric integrator: frequencies `w~`, filters
/// `phi = 1`, `psi = chi = 1 - 4 alpha sin^2(xi/2)`.
pub fn alpha_as_trig(scheme: &AlphaScheme) -> Result<AlphaAsTrig, StepError> {
    let omegas = scheme.modified_omegas()?;
    let freq = scheme.freq.with_omegas(omegas).map_err(|e| StepError::InvalidParameter(e.to_string()))?;
    let chi = ChiFilter::alpha_family(scheme.alpha);
    let momentum_factors = freq
        .omegas()
        .iter()
        .map(|&w| {
            let xi = scheme.h * w;
            chi.eval(xi) / sinc(xi)
        })
        .collect();
    let integrator = TrigIntegrator::new(FilterPair::alpha_family(scheme.alpha), scheme.h, freq)?;
    Ok(AlphaAsTrig { integrator, chi, momentum_factors })
}
