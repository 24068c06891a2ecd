//! Filter functions `psi`, `phi`, `chi` of trigonometric integrators and the
//! derived weight `sigma(xi) = sinc(xi) phi(xi) / psi(xi)`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use crate::model::FrequencySystem;

/// Below this magnitude `psi` is treated as vanishing.
pub const DEFAULT_PSI_FLOOR: f64 = 1e-14;

const SINC_SERIES_CUTOFF: f64 = 1e-4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FilterError {
    #[error("psi({xi}) = {psi} vanishes (|psi| < {floor})")]
    DivisionByVanishingPsi { xi: f64, psi: f64, floor: f64 },
    #[error("unknown filter pair `{0}` (expected `deuflhard` or `gautschi_A`)")]
    UnknownName(String),
}

/// `sin(xi)/xi`, with a Taylor branch near the origin.
pub fn sinc(xi: f64) -> f64 {
    let a = xi.abs();
    if a < SINC_SERIES_CUTOFF {
        let x2 = a * a;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        a.sin() / a
    }
}

/// A real filter function with value 1 at the origin.
#[derive(Clone)]
pub enum Filter {
    One,
    Sinc,
    /// `sinc^2(xi/2)`
    SincSquaredHalf,
    /// `1 - 4 alpha sin^2(xi/2)`, the filter of the alpha-family.
    AlphaFamily(f64),
    /// `cos(xi/2) sqrt(1 - 4 alpha sin^2(xi/2))`; for the alpha-family this is
    /// `(w~/w) sinc(xi)` written in terms of `xi = h w~` alone.
    ScaledSinc(f64),
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for Filter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Filter::One => write!(f, "One"),
            Filter::Sinc => write!(f, "Sinc"),
            Filter::SincSquaredHalf => write!(f, "SincSquaredHalf"),
            Filter::AlphaFamily(a) => write!(f, "AlphaFamily({a})"),
            Filter::ScaledSinc(a) => write!(f, "ScaledSinc({a})"),
            Filter::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl Filter {
    pub fn custom<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        Filter::Custom(Arc::new(f))
    }

    pub fn eval(&self, xi: f64) -> f64 {
        match self {
            Filter::One => 1.0,
            Filter::Sinc => sinc(xi),
            Filter::SincSquaredHalf => {
                let s = sinc(0.5 * xi);
                s * s
            }
            Filter::AlphaFamily(alpha) => {
                let s = (0.5 * xi).sin();
                1.0 - 4.0 * alpha * s * s
            }
            Filter::ScaledSinc(alpha) => {
                let s = (0.5 * xi).sin();
                (0.5 * xi).cos() * (1.0 - 4.0 * alpha * s * s).max(0.0).sqrt()
            }
            Filter::Custom(f) => f(xi),
        }
    }
}

/// Filter pair `(psi, phi)` defining a trigonometric integrator.
#[derive(Debug, Clone)]
pub struct FilterPair {
    pub psi: Filter,
    pub phi: Filter,
    pub name: String,
}

impl FilterPair {
    pub fn new(name: impl Into<String>, psi: Filter, phi: Filter) -> Self {
        FilterPair { psi, phi, name: name.into() }
    }

    /// `phi = 1`, `psi = sinc`: symplectic.
    pub fn deuflhard() -> Self {
        Self::new("deuflhard", Filter::Sinc, Filter::One)
    }

    /// `phi = 1`, `psi = sinc^2(xi/2)`: the (non-symplectic) Gautschi-type method A.
    pub fn gautschi_a() -> Self {
        Self::new("gautschi_A", Filter::SincSquaredHalf, Filter::One)
    }

    /// `phi = 1`, `psi = 1 - 4 alpha sin^2(xi/2)`.
    pub fn alpha_family(alpha: f64) -> Self {
        Self::new(format!("alpha:{alpha}"), Filter::AlphaFamily(alpha), Filter::One)
    }

    pub fn psi(&self, xi: f64) -> f64 {
        self.psi.eval(xi)
    }

    pub fn phi(&self, xi: f64) -> f64 {
        self.phi.eval(xi)
    }
}

impl FromStr for FilterPair {
    type Err = FilterError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "deuflhard" => Ok(Self::deuflhard()),
            "gautschi_A" | "gautschi_a" => Ok(Self::gautschi_a()),
            other => Err(FilterError::UnknownName(other.to_string())),
        }
    }
}

/// Momentum filter `chi` of a modified trigonometric integrator.
#[derive(Debug, Clone)]
pub struct ChiFilter(pub Filter);

impl ChiFilter {
    pub fn alpha_family(alpha: f64) -> Self {
        ChiFilter(Filter::AlphaFamily(alpha))
    }

    /// `chi = W^{-1} W~ sinc(h W~)`, expressed through `xi = h w~` for the alpha-family.
    pub fn frequency_ratio_sinc(alpha: f64) -> Self {
        ChiFilter(Filter::ScaledSinc(alpha))
    }

    pub fn eval(&self, xi: f64) -> f64 {
        self.0.eval(xi)
    }
}

pub fn sigma(pair: &FilterPair, xi: f64) -> Result<f64, FilterError> {
    sigma_with_floor(pair, xi, DEFAULT_PSI_FLOOR)
}

pub fn sigma_with_floor(pair: &FilterPair, xi: f64, floor: f64) -> Result<f64, FilterError> {
    let psi = pair.psi(xi);
    if !(psi.abs() >= floor) {
        return Err(FilterError::DivisionByVanishingPsi { xi, psi, floor });
    }
    Ok(sinc(xi) * pair.phi(xi) / psi)
}

/// `psi(h w_j) = sinc(h w_j) phi(h w_j)` for every fast block, up to `tol`.
pub fn is_symplectic(pair: &FilterPair, h: f64, freq: &FrequencySystem, tol: f64) -> bool {
    assert!(tol > 0.0);
    freq.fast_omegas().iter().all(|&w| {
        let xi = h * w;
        (pair.psi(xi) - sinc(xi) * pair.phi(xi)).abs() <= tol
    })
}
