//! Benchmark problems: a cubic-quartic single oscillator, the transformed
//! Fermi-Pasta-Ulam chain, a two-frequency system with bilinear coupling,
//! and the uncoupled harmonic oscillator.

use std::fmt;
use std::sync::Arc;

use crate::model::{BlockVector, FnPotential, FrequencySystem, ModelError, OscState, Potential, ZeroPotential};

/// Componentwise bound of the admissible region for every catalog potential.
pub const ADMISSIBLE_BOUND: f64 = 10.0;

/// Names accepted by [`by_name`].
pub const PROBLEM_NAMES: [&str; 4] = ["exp1", "fpu", "multifreq", "harmonic"];

#[derive(Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub freq: FrequencySystem,
    pub potential: Arc<dyn Potential>,
    pub initial: OscState,
    pub admissible_region: String,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("freq", &self.freq)
            .field("initial", &self.initial)
            .finish()
    }
}

fn check_omega(omega: f64) -> Result<(), ModelError> {
    if omega.is_finite() && omega > 0.0 {
        Ok(())
    } else {
        Err(ModelError::InvalidValue(format!("omega must be positive and finite, got {omega}")))
    }
}

fn build(
    name: &str,
    freq: FrequencySystem,
    potential: Arc<dyn Potential>,
    q: Vec<f64>,
    p: Vec<f64>,
) -> Result<ProblemSpec, ModelError> {
    let q = BlockVector::from_flat(&freq, q)?;
    let p = BlockVector::from_flat(&freq, p)?;
    Ok(ProblemSpec {
        name: name.to_string(),
        initial: OscState::new(0.0, q, p)?,
        freq,
        potential,
        admissible_region: format!("|q_i| <= {ADMISSIBLE_BOUND}"),
    })
}

/// One fast oscillator with `U = q^3 + q^4`, `q(0) = 0.1/omega`, `p(0) = 1`.
pub fn exp1(omega: f64) -> Result<ProblemSpec, ModelError> {
    check_omega(omega)?;
    let freq = FrequencySystem::new(vec![0, 1], vec![0.0, omega])?;
    let u = FnPotential::new(
        "q^3+q^4",
        |q| q[0].powi(3) + q[0].powi(4),
        |q, g| g[0] = 3.0 * q[0] * q[0] + 4.0 * q[0].powi(3),
    )
    .with_bound(ADMISSIBLE_BOUND);
    build("exp1", freq, Arc::new(u), vec![0.1 / omega], vec![1.0])
}

/// Quartic soft-spring coupling of the transformed chain with `m` stiff
/// springs. Coordinates are `[x0_1..x0_m, x1_1..x1_m]`.
fn fpu_potential(m: usize) -> FnPotential {
    let value = move |q: &[f64]| {
        let (x0, x1) = q.split_at(m);
        let mut s = (x0[0] - x1[0]).powi(4);
        for i in 0..m - 1 {
            s += (x0[i + 1] - x1[i + 1] - x0[i] - x1[i]).powi(4);
        }
        s += (x0[m - 1] + x1[m - 1]).powi(4);
        0.25 * s
    };
    let gradient = move |q: &[f64], g: &mut [f64]| {
        g.fill(0.0);
        let (x0, x1) = q.split_at(m);
        let a = (x0[0] - x1[0]).powi(3);
        g[0] += a;
        g[m] -= a;
        for i in 0..m - 1 {
            let b = (x0[i + 1] - x1[i + 1] - x0[i] - x1[i]).powi(3);
            g[i + 1] += b;
            g[m + i + 1] -= b;
            g[i] -= b;
            g[m + i] -= b;
        }
        let c = (x0[m - 1] + x1[m - 1]).powi(3);
        g[m - 1] += c;
        g[2 * m - 1] += c;
    };
    FnPotential::new(format!("fpu(m={m})"), value, gradient).with_bound(ADMISSIBLE_BOUND)
}

/// Transformed Fermi-Pasta-Ulam chain: a slow block and one fast block at
/// frequency `omega`, both of dimension `m`.
///
/// Initial data `x0_1 = 1, p0_1 = 1, x1_1 = 1/omega, p1_1 = 1`, rest zero,
/// so the initial oscillatory energy is exactly 1.
pub fn fpu(omega: f64, m: usize) -> Result<ProblemSpec, ModelError> {
    check_omega(omega)?;
    if m == 0 {
        return Err(ModelError::InvalidValue("fpu needs m >= 1".into()));
    }
    let freq = FrequencySystem::new(vec![m, m], vec![0.0, omega])?;
    let mut q = vec![0.0; 2 * m];
    let mut p = vec![0.0; 2 * m];
    q[0] = 1.0;
    p[0] = 1.0;
    q[m] = 1.0 / omega;
    p[m] = 1.0;
    build("fpu", freq, Arc::new(fpu_potential(m)), q, p)
}

/// Two fast scalar blocks at `omega` and `sqrt(2) omega` plus a scalar slow
/// block, coupled by `U = 0.01 q1 q2`.
pub fn multifreq(omega: f64) -> Result<ProblemSpec, ModelError> {
    check_omega(omega)?;
    let freq = FrequencySystem::new(vec![1, 1, 1], vec![0.0, omega, 2f64.sqrt() * omega])?;
    let eps = 1.0 / omega;
    let u = FnPotential::new(
        "0.01*q1*q2",
        |q| 0.01 * q[1] * q[2],
        |q, g| {
            g[0] = 0.0;
            g[1] = 0.01 * q[2];
            g[2] = 0.01 * q[1];
        },
    )
    .with_bound(ADMISSIBLE_BOUND);
    build("multifreq", freq, Arc::new(u), vec![0.0, 0.3 * eps, 0.8 * eps], vec![0.0, 0.6, 0.7])
}

/// Uncoupled oscillator `U = 0`, `q(0) = 1/omega`, `p(0) = 1`.
pub fn harmonic(omega: f64) -> Result<ProblemSpec, ModelError> {
    check_omega(omega)?;
    let freq = FrequencySystem::new(vec![0, 1], vec![0.0, omega])?;
    build("harmonic", freq, Arc::new(ZeroPotential), vec![1.0 / omega], vec![1.0])
}

/// Looks up a catalog problem; `fpu` uses `m = 3`.
pub fn by_name(name: &str, omega: f64) -> Result<ProblemSpec, ModelError> {
    match name {
        "exp1" => exp1(omega),
        "fpu" => fpu(omega, 3),
        "multifreq" => multifreq(omega),
        "harmonic" => harmonic(omega),
        other => Err(ModelError::InvalidValue(format!(
            "unknown problem '{other}', expected one of {}",
            PROBLEM_NAMES.join(", ")
        ))),
    }
}
