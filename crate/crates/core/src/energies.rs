//! Total, slow, oscillatory and modified oscillatory energies.
//!
//! Every oscillatory functional here has the form
//! `sum_{j>=1} 1/2 (a_j |p_j|^2 + b_j |q_j|^2)` and is represented by a
//! [`QuadraticEnergy`] holding the per-block weights.

use crate::filters::{sigma, sinc, FilterError, FilterPair};
use crate::integrators::{AlphaScheme, StepError};
use crate::model::{FrequencySystem, OscState, Potential, PotentialDomainError};

/// Fast dimension above which block sums use compensated summation.
const COMPENSATED_THRESHOLD: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyReport {
    pub t: f64,
    pub h: f64,
    pub h_slow: f64,
    pub h_osc: f64,
    /// The modified oscillatory energy the method nearly conserves:
    /// `H*_w` for trigonometric integrators, `H~*_w` for the alpha-family.
    pub h_osc_star: f64,
    pub h_osc_star_tilde: Option<f64>,
}

/// Selects one field of an [`EnergyReport`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EnergyField {
    Total,
    Slow,
    Osc,
    OscStar,
    OscStarTilde,
}

impl EnergyField {
    pub fn get(self, r: &EnergyReport) -> f64 {
        match self {
            EnergyField::Total => r.h,
            EnergyField::Slow => r.h_slow,
            EnergyField::Osc => r.h_osc,
            EnergyField::OscStar => r.h_osc_star,
            EnergyField::OscStarTilde => r.h_osc_star_tilde.unwrap_or(f64::NAN),
        }
    }
}

/// Neumaier summation.
#[derive(Debug, Default, Clone, Copy)]
struct CompensatedSum {
    sum: f64,
    c: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.c += (self.sum - t) + x;
        } else {
            self.c += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum + self.c
    }
}

/// `sum_{j>=1} 1/2 (a_j |p_j|^2 + b_j |q_j|^2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticEnergy {
    p_weights: Vec<f64>,
    q_weights: Vec<f64>,
    compensated: bool,
}

impl QuadraticEnergy {
    /// Weights indexed by fast block (`index 0` is block 1).
    pub fn new(freq: &FrequencySystem, p_weights: Vec<f64>, q_weights: Vec<f64>) -> Self {
        assert_eq!(p_weights.len(), freq.num_fast());
        assert_eq!(q_weights.len(), freq.num_fast());
        let fast_dim: usize = freq.block_dims()[1..].iter().sum();
        QuadraticEnergy { p_weights, q_weights, compensated: fast_dim > COMPENSATED_THRESHOLD }
    }

    /// `H_w`
    pub fn oscillatory(freq: &FrequencySystem) -> Self {
        let b = freq.fast_omegas().iter().map(|w| w * w).collect();
        Self::new(freq, vec![1.0; freq.num_fast()], b)
    }

    /// `H*_w`: block `j` weighted by `sigma(h w_j)`.
    pub fn modified(pair: &FilterPair, h: f64, freq: &FrequencySystem) -> Result<Self, FilterError> {
        let s: Vec<f64> = freq.fast_omegas().iter().map(|&w| sigma(pair, h * w)).collect::<Result<_, _>>()?;
        let b = s.iter().zip(freq.fast_omegas()).map(|(s, w)| s * w * w).collect();
        Ok(Self::new(freq, s, b))
    }

    /// `H~*_w` of the alpha-family, using `w~`, `sigma(h w~)` and the
    /// momentum factor `chi(h w~)/sinc(h w~)`.
    pub fn modified_tilde(scheme: &AlphaScheme) -> Result<Self, StepError> {
        let freq = scheme.freq();
        let h = scheme.h();
        let pair = FilterPair::alpha_family(scheme.alpha());
        let mut a = Vec::with_capacity(freq.num_fast());
        let mut b = Vec::with_capacity(freq.num_fast());
        for &w in freq.fast_omegas() {
            let wt = crate::integrators::modified_frequency(scheme.alpha(), h, w)?;
            let xi = h * wt;
            let sig = sigma(&pair, xi).map_err(|e| StepError::InvalidParameter(e.to_string()))?;
            let factor = pair.psi(xi) / sinc(xi);
            a.push(sig * factor * factor);
            b.push(sig * wt * wt);
        }
        Ok(Self::new(freq, a, b))
    }

    pub fn eval(&self, state: &OscState) -> f64 {
        let layout = state.q.layout();
        let term = |j: usize| {
            let blk = j + 1;
            let r = layout.range(blk);
            let p2: f64 = state.p.as_slice()[r.clone()].iter().map(|x| x * x).sum();
            let q2: f64 = state.q.as_slice()[r].iter().map(|x| x * x).sum();
            0.5 * (self.p_weights[j] * p2 + self.q_weights[j] * q2)
        };
        if self.compensated {
            let mut acc = CompensatedSum::default();
            for j in 0..self.p_weights.len() {
                let r = layout.range(j + 1);
                for i in r {
                    let (p, q) = (state.p.as_slice()[i], state.q.as_slice()[i]);
                    acc.add(0.5 * self.p_weights[j] * p * p);
                    acc.add(0.5 * self.q_weights[j] * q * q);
                }
            }
            acc.value()
        } else {
            (0..self.p_weights.len()).map(term).sum()
        }
    }
}

pub fn oscillatory_energy(freq: &FrequencySystem, state: &OscState) -> f64 {
    QuadraticEnergy::oscillatory(freq).eval(state)
}

/// `1/2 |p_0|^2 + U(q)`.
pub fn slow_energy(potential: &dyn Potential, state: &OscState) -> Result<f64, PotentialDomainError> {
    let kinetic = 0.5 * state.p.block_norm_sq(0);
    Ok(kinetic + potential.value(&state.q)?)
}

pub fn modified_oscillatory_energy(
    pair: &FilterPair,
    h: f64,
    freq: &FrequencySystem,
    state: &OscState,
) -> Result<f64, FilterError> {
    Ok(QuadraticEnergy::modified(pair, h, freq)?.eval(state))
}

pub fn modified_oscillatory_energy_tilde(scheme: &AlphaScheme, state: &OscState) -> Result<f64, StepError> {
    Ok(QuadraticEnergy::modified_tilde(scheme)?.eval(state))
}

/// Evaluates all energies of a state with precomputed weights.
#[derive(Debug, Clone)]
pub struct EnergyMeter {
    osc: QuadraticEnergy,
    star: QuadraticEnergy,
    tilde: bool,
}

impl EnergyMeter {
    pub fn for_trig(pair: &FilterPair, h: f64, freq: &FrequencySystem) -> Result<Self, FilterError> {
        Ok(EnergyMeter {
            osc: QuadraticEnergy::oscillatory(freq),
            star: QuadraticEnergy::modified(pair, h, freq)?,
            tilde: false,
        })
    }

    pub fn for_alpha(scheme: &AlphaScheme) -> Result<Self, StepError> {
        Ok(EnergyMeter {
            osc: QuadraticEnergy::oscillatory(scheme.freq()),
            star: QuadraticEnergy::modified_tilde(scheme)?,
            tilde: true,
        })
    }

    pub fn report(&self, potential: &dyn Potential, state: &OscState) -> Result<EnergyReport, PotentialDomainError> {
        let h_slow = slow_energy(potential, state)?;
        let h_osc = self.osc.eval(state);
        let h_osc_star = self.star.eval(state);
        Ok(EnergyReport {
            t: state.t,
            h: h_slow + h_osc,
            h_slow,
            h_osc,
            h_osc_star,
            h_osc_star_tilde: self.tilde.then_some(h_osc_star),
        })
    }
}

/// `(t, value(t) - value(t_0))` for the selected field.
pub fn deviation_series(samples: &[EnergyReport], which: EnergyField) -> Vec<(f64, f64)> {
    let Some(first) = samples.first() else {
        return Vec::new();
    };
    let base = which.get(first);
    samples.iter().map(|r| (r.t, which.get(r) - base)).collect()
}
