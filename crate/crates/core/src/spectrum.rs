//! Windowed single-frequency amplitude probes of sampled trajectories.
//!
//! Target frequencies `k.varpi` are generally not on an FFT grid, so each
//! probe is a Hann-windowed Goertzel correlation at exactly that frequency.

use std::f64::consts::PI;

use thiserror::Error;

/// Minimum number of periods of a nonzero target frequency inside the window.
pub const MIN_PERIODS: f64 = 20.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectrumError {
    #[error("window of length {length} covers {periods:.2} periods of the target, need {required}")]
    WindowTooShort { length: f64, periods: f64, required: f64 },
    #[error("need at least 2 uniformly spaced samples: {0}")]
    BadSampling(String),
    #[error("need at least {required} points for a scaling fit, got {got}")]
    TooFewPoints { required: usize, got: usize },
}

/// A probed peak: label `k`, aliased target frequency, amplitude, block index.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralPeak {
    pub k: Vec<i64>,
    pub target_freq: f64,
    pub amplitude: f64,
    pub component: usize,
}

/// Reduces `freq` to the principal alias in `(-pi/h, pi/h]`.
pub fn principal_alias(freq: f64, h: f64) -> f64 {
    let period = 2.0 * PI / h;
    let mut f = freq - period * (freq / period).round();
    if f <= -PI / h {
        f += period;
    }
    f
}

fn hann(n: usize, len: usize) -> f64 {
    if len < 2 {
        return 1.0;
    }
    0.5 * (1.0 - (2.0 * PI * n as f64 / (len - 1) as f64).cos())
}

fn check_sampling(samples: &[(f64, f64)]) -> Result<f64, SpectrumError> {
    if samples.len() < 2 {
        return Err(SpectrumError::BadSampling(format!("{} samples", samples.len())));
    }
    let dt = samples[1].0 - samples[0].0;
    if !(dt > 0.0) {
        return Err(SpectrumError::BadSampling(format!("non-increasing times, dt = {dt}")));
    }
    let span = samples.last().unwrap().0 - samples[0].0;
    let expected = dt * (samples.len() - 1) as f64;
    if (span - expected).abs() > 1e-6 * span.max(dt) {
        return Err(SpectrumError::BadSampling("sample times are not uniform".into()));
    }
    Ok(dt)
}

/// `2/W |sum_n w_n x_n exp(-i freq t_n)|` with Hann weights `w_n` and
/// `W = sum w_n`; the factor 2 is dropped for `freq = 0`.
pub fn amplitude_at(samples: &[(f64, f64)], freq: f64) -> Result<f64, SpectrumError> {
    let dt = check_sampling(samples)?;
    let len = samples.len();
    let span = samples[len - 1].0 - samples[0].0;
    if freq != 0.0 {
        let periods = span * freq.abs() / (2.0 * PI);
        if periods < MIN_PERIODS {
            return Err(SpectrumError::WindowTooShort { length: span, periods, required: MIN_PERIODS });
        }
    }
    // generalised Goertzel recurrence at the per-sample phase increment
    let theta = freq * dt;
    let coeff = 2.0 * theta.cos();
    let (mut s1, mut s2) = (0.0, 0.0);
    let mut weight_sum = 0.0;
    for (n, &(_, x)) in samples.iter().enumerate() {
        let w = hann(n, len);
        weight_sum += w;
        let s0 = w * x + coeff * s1 - s2;
        s2 = s1;
        s1 = s0;
    }
    // y = e^{i theta} s1 - s2, up to a unit phase factor
    let re = theta.cos() * s1 - s2;
    let im = theta.sin() * s1;
    let mag = re.hypot(im);
    let scale = if freq == 0.0 { 1.0 } else { 2.0 };
    Ok(scale * mag / weight_sum)
}

/// Hann-weighted mean square `sum w x^2 / W`.
pub fn windowed_power(samples: &[(f64, f64)]) -> f64 {
    let len = samples.len();
    let (mut num, mut den) = (0.0, 0.0);
    for (n, &(_, x)) in samples.iter().enumerate() {
        let w = hann(n, len);
        num += w * x * x;
        den += w;
    }
    num / den
}

/// Least-squares slope of `log(amplitude)` against `log(omega)`.
pub fn check_amplitude_scaling(omegas: &[f64], amplitudes: &[f64]) -> Result<f64, SpectrumError> {
    if omegas.len() != amplitudes.len() || omegas.len() < 3 {
        return Err(SpectrumError::TooFewPoints { required: 3, got: omegas.len().min(amplitudes.len()) });
    }
    Ok(log_log_slope(omegas, amplitudes))
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
