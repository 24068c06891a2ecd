use crate::filters::{sinc, FilterPair};
use crate::model::{BlockVector, FrequencySystem, Potential};

use super::{force, StepError, StepPair, TwoStepMethod, Workspace, RESONANT_SIN_FLOOR};

/// Trigonometric integrator
///
/// ```text
/// q_{n+1} - 2 cos(hW) q_n + q_{n-1} = h^2 Psi g(Phi q_n)
/// 2h sinc(hW) p_n                  = q_{n+1} - q_{n-1}
/// ```
///
/// with `Psi = psi(hW)`, `Phi = phi(hW)` and `g = -grad U`.
#[derive(Debug, Clone)]
pub struct TrigIntegrator {
    pair: FilterPair,
    h: f64,
    freq: FrequencySystem,
    // per block
    cos: Vec<f64>,
    sinc: Vec<f64>,
    psi: Vec<f64>,
    phi: Vec<f64>,
    // per flat component
    comp_cos: Vec<f64>,
    comp_h_sinc: Vec<f64>,
    comp_h2_psi: Vec<f64>,
    comp_phi: Vec<f64>,
    resonant: Option<(usize, f64)>,
}

impl TrigIntegrator {
    pub fn new(pair: FilterPair, h: f64, freq: FrequencySystem) -> Result<Self, StepError> {
        if !(h.is_finite() && h > 0.0) {
            return Err(StepError::InvalidParameter(format!("step size h = {h}")));
        }
        let xi: Vec<f64> = freq.omegas().iter().map(|w| h * w).collect();
        let cos: Vec<f64> = xi.iter().map(|x| x.cos()).collect();
        let sinc_v: Vec<f64> = xi.iter().map(|&x| sinc(x)).collect();
        let psi: Vec<f64> = xi.iter().map(|&x| pair.psi(x)).collect();
        let phi: Vec<f64> = xi.iter().map(|&x| pair.phi(x)).collect();
        let resonant =
            xi.iter().enumerate().skip(1).map(|(j, x)| (j, x.sin().abs())).find(|&(_, s)| s < RESONANT_SIN_FLOOR);
        let comp_cos = freq.expand(|j| cos[j]);
        let comp_h_sinc = freq.expand(|j| h * sinc_v[j]);
        let comp_h2_psi = freq.expand(|j| h * h * psi[j]);
        let comp_phi = freq.expand(|j| phi[j]);
        Ok(TrigIntegrator {
            pair,
            h,
            freq,
            cos,
            sinc: sinc_v,
            psi,
            phi,
            comp_cos,
            comp_h_sinc,
            comp_h2_psi,
            comp_phi,
            resonant,
        })
    }

    pub fn pair(&self) -> &FilterPair {
        &self.pair
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn freq(&self) -> &FrequencySystem {
        &self.freq
    }

    /// `cos(h w_j)` for block `j`.
    pub fn cos(&self, j: usize) -> f64 {
        self.cos[j]
    }

    pub fn sinc(&self, j: usize) -> f64 {
        self.sinc[j]
    }

    pub fn psi(&self, j: usize) -> f64 {
        self.psi[j]
    }

    pub fn phi(&self, j: usize) -> f64 {
        self.phi[j]
    }

    fn filtered_force(&self, potential: &dyn Potential, q: &BlockVector, ws: &mut Workspace) -> Result<(), StepError> {
        for ((a, &x), &f) in ws.arg.as_mut_slice().iter_mut().zip(q.as_slice()).zip(&self.comp_phi) {
            *a = f * x;
        }
        force(potential, ws)
    }
}

impl TwoStepMethod for TrigIntegrator {
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
        self.filtered_force(potential, q0, ws)?;
        let g = ws.grad.as_slice();
        for (i, o) in out.as_mut_slice().iter_mut().enumerate() {
            *o = self.comp_cos[i] * q0.as_slice()[i]
                + self.comp_h_sinc[i] * p0.as_slice()[i]
                + 0.5 * self.comp_h2_psi[i] * g[i];
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
        self.filtered_force(potential, q_curr, ws)?;
        let g = ws.grad.as_slice();
        let (qp, qc) = (q_prev.as_slice(), q_curr.as_slice());
        for (i, o) in out.as_mut_slice().iter_mut().enumerate() {
            *o = 2.0 * self.comp_cos[i] * qc[i] - qp[i] + self.comp_h2_psi[i] * g[i];
        }
        Ok(())
    }

    fn momentum_into(
        &self,
        q_prev: &BlockVector,
        q_next: &BlockVector,
        out: &mut BlockVector,
    ) -> Result<(), StepError> {
        if let Some((block, sin_abs)) = self.resonant {
            return Err(StepError::ResonantStepSize { block, h_omega: self.h * self.freq.omega(block), sin_abs });
        }
        let (qp, qn) = (q_prev.as_slice(), q_next.as_slice());
        for (i, o) in out.as_mut_slice().iter_mut().enumerate() {
            *o = (qn[i] - qp[i]) / (2.0 * self.comp_h_sinc[i]);
        }
        Ok(())
    }
}

/// `q_1 = cos(hW) q_0 + h sinc(hW) p_0 + h^2/2 Psi g(Phi q_0)`.
pub fn start_step(
    integ: &TrigIntegrator,
    potential: &dyn Potential,
    q0: &BlockVector,
    p0: &BlockVector,
) -> Result<BlockVector, StepError> {
    let mut ws = Workspace::new(&integ.freq);
    let mut out = BlockVector::zeros(&integ.freq);
    integ.start_into(potential, q0, p0, &mut out, &mut ws)?;
    Ok(out)
}

/// `q_{n+1} = 2 cos(hW) q_n - q_{n-1} + h^2 Psi g(Phi q_n)`.
pub fn two_step_advance(
    integ: &TrigIntegrator,
    potential: &dyn Potential,
    s: &StepPair,
) -> Result<BlockVector, StepError> {
    let mut ws = Workspace::new(&integ.freq);
    let mut out = BlockVector::zeros(&integ.freq);
    integ.advance_into(potential, &s.q_prev, &s.q_curr, &mut out, &mut ws)?;
    Ok(out)
}

/// `p_n = (q_{n+1} - q_{n-1}) / (2h sinc(hW))`.
pub fn recover_momentum(
    integ: &TrigIntegrator,
    q_prev: &BlockVector,
    q_next: &BlockVector,
) -> Result<BlockVector, StepError> {
    let mut out = BlockVector::zeros(&integ.freq);
    integ.momentum_into(q_prev, q_next, &mut out)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ZeroPotential;
    use std::f64::consts::PI;

    fn harmonic(omega: f64) -> FrequencySystem {
        FrequencySystem::new(vec![0, 1], vec![0.0, omega]).unwrap()
    }

    fn bv(f: &FrequencySystem, x: &[f64]) -> BlockVector {
        BlockVector::from_flat(f, x.to_vec()).unwrap()
    }

    #[test]
    fn start_step_free_oscillator() {
        let f = harmonic(10.0);
        let integ = TrigIntegrator::new(FilterPair::deuflhard(), 0.1, f.clone()).unwrap();
        let q1 = start_step(&integ, &ZeroPotential, &bv(&f, &[1.0]), &bv(&f, &[0.0])).unwrap();
        assert!((q1.as_slice()[0] - 0.5403023058681398).abs() < 1e-16);
    }

    #[test]
    fn start_step_free_particle() {
        let f = FrequencySystem::new(vec![1], vec![0.0]).unwrap();
        let h = 0.37;
        let integ = TrigIntegrator::new(FilterPair::gautschi_a(), h, f.clone()).unwrap();
        let q1 = start_step(&integ, &ZeroPotential, &bv(&f, &[0.0]), &bv(&f, &[1.0])).unwrap();
        assert_eq!(q1.as_slice()[0], h);
    }

    #[test]
    fn chebyshev_recurrence_reproduces_cosine() {
        let f = harmonic(10.0);
        let h = 0.1;
        let integ = TrigIntegrator::new(FilterPair::deuflhard(), h, f.clone()).unwrap();
        let q0 = bv(&f, &[1.0]);
        let q1 = start_step(&integ, &ZeroPotential, &q0, &bv(&f, &[0.0])).unwrap();
        let mut s = StepPair::new(q0, q1, 1, h);
        for n in 1..100 {
            let next = two_step_advance(&integ, &ZeroPotential, &s).unwrap();
            s = StepPair::new(s.q_curr, next, n + 1, h);
        }
        assert!((s.q_curr.as_slice()[0] - 100f64.cos()).abs() < 1e-12);
        assert!((s.t - 10.0).abs() < 1e-14);
    }

    #[test]
    fn slow_block_is_verlet() {
        let f = FrequencySystem::new(vec![1], vec![0.0]).unwrap();
        let h = 0.05;
        let u = crate::model::FnPotential::new("quartic", |q| 0.25 * q[0].powi(4), |q, g| g[0] = q[0].powi(3));
        let integ = TrigIntegrator::new(FilterPair::deuflhard(), h, f.clone()).unwrap();
        let s = StepPair::new(bv(&f, &[0.4]), bv(&f, &[0.5]), 1, h);
        let next = two_step_advance(&integ, &u, &s).unwrap();
        let verlet = 2.0 * 0.5 - 0.4 - h * h * 0.5_f64.powi(3);
        assert_eq!(next.as_slice()[0], verlet);
    }

    #[test]
    fn momentum_recovery() {
        let f = harmonic(10.0);
        let integ = TrigIntegrator::new(FilterPair::deuflhard(), 0.1, f.clone()).unwrap();
        let q = bv(&f, &[0.3]);
        let p = recover_momentum(&integ, &q, &q).unwrap();
        assert_eq!(p.as_slice()[0], 0.0);

        let w = 1.0;
        let res = TrigIntegrator::new(FilterPair::deuflhard(), PI / w, harmonic(w)).unwrap();
        let z = bv(res.freq(), &[0.0]);
        assert!(matches!(recover_momentum(&res, &z, &z), Err(StepError::ResonantStepSize { block: 1, .. })));
    }

    #[test]
    fn cached_scalars_match_fresh_evaluation() {
        let f = FrequencySystem::new(vec![1, 2, 1], vec![0.0, 50.0, 70.7]).unwrap();
        let h = 0.013;
        let pair = FilterPair::gautschi_a();
        let integ = TrigIntegrator::new(pair.clone(), h, f.clone()).unwrap();
        for j in 0..3 {
            let xi = h * f.omega(j);
            assert_eq!(integ.cos(j), xi.cos());
            assert_eq!(integ.sinc(j), sinc(xi));
            assert_eq!(integ.psi(j), pair.psi(xi));
            assert_eq!(integ.phi(j), pair.phi(xi));
        }
    }

    #[test]
    fn rejects_bad_step() {
        assert!(TrigIntegrator::new(FilterPair::deuflhard(), 0.0, harmonic(1.0)).is_err());
        assert!(TrigIntegrator::new(FilterPair::deuflhard(), f64::NAN, harmonic(1.0)).is_err());
    }
}
