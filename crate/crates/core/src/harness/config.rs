use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::filters::FilterPair;

use super::HarnessError;

/// Integration method selected by `trig:<filter-name>` or `alpha:<value>`.
#[derive(Debug, Clone)]
pub enum MethodSpec {
    Trig(FilterPair),
    Alpha(f64),
}

impl FromStr for MethodSpec {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || HarnessError::Config(format!("method '{s}': expected trig:<filter> or alpha:<value>"));
        let (kind, arg) = s.split_once(':').ok_or_else(bad)?;
        match kind.trim() {
            "trig" => {
                arg.trim().parse::<FilterPair>().map(MethodSpec::Trig).map_err(|e| HarnessError::Config(e.to_string()))
            }
            "alpha" => {
                let a: f64 = arg.trim().parse().map_err(|_| bad())?;
                if !a.is_finite() {
                    return Err(bad());
                }
                Ok(MethodSpec::Alpha(a))
            }
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for MethodSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MethodSpec::Trig(pair) => write!(f, "trig:{}", pair.name),
            MethodSpec::Alpha(a) => write!(f, "alpha:{a}"),
        }
    }
}

/// Step size given directly or as `h * omega`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepControl {
    HOmega(f64),
    H(f64),
}

impl StepControl {
    pub fn step_size(self, omega: f64) -> f64 {
        match self {
            StepControl::HOmega(x) => x / omega,
            StepControl::H(h) => h,
        }
    }
}

/// Which half of the initial state a perturbation touches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PerturbTarget {
    Q,
    P,
}

/// Additive perturbations `x_c + delta` of one flat initial component.
#[derive(Debug, Clone, PartialEq)]
pub struct Perturbation {
    pub target: PerturbTarget,
    pub component: usize,
    pub deltas: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub problem: String,
    pub omega: f64,
    pub method: MethodSpec,
    pub step: StepControl,
    pub t_end: f64,
    pub stride: usize,
    pub out: Option<PathBuf>,
    pub perturbation: Option<Perturbation>,
    pub seed: u64,
}

impl RunConfig {
    pub fn new(problem: &str, omega: f64, method: MethodSpec, step: StepControl, t_end: f64) -> Self {
        RunConfig {
            problem: problem.to_string(),
            omega,
            method,
            step,
            t_end,
            stride: 1,
            out: None,
            perturbation: None,
            seed: 0,
        }
    }

    pub fn h(&self) -> f64 {
        self.step.step_size(self.omega)
    }

    /// `ceil(t_end / h)`, ignoring rounding noise in the quotient.
    pub fn n_steps(&self) -> Result<usize, HarnessError> {
        let ratio = self.t_end / self.h();
        if !(ratio.is_finite() && ratio > 0.0) {
            return Err(HarnessError::Config(format!("t_end / h = {ratio} is not a positive number")));
        }
        if ratio > 2f64.powi(53) {
            return Err(HarnessError::Config(format!("t_end / h = {ratio:e} exceeds 2^53")));
        }
        let n = (ratio * (1.0 - 4.0 * f64::EPSILON)).ceil();
        Ok((n as usize).max(1))
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return Err(HarnessError::Config(format!("omega = {}", self.omega)));
        }
        let h = self.h();
        if !(h.is_finite() && h > 0.0) {
            return Err(HarnessError::Config(format!("step size h = {h}")));
        }
        if self.stride == 0 {
            return Err(HarnessError::Config("stride must be >= 1".into()));
        }
        self.n_steps().map(|_| ())
    }

    /// Builds a config from flat `key = value` pairs. Recognised keys:
    /// `problem, omega, method, h_omega, h, t_end, stride, out, seed,
    /// perturb_target, perturb_component, perturb_deltas`.
    pub fn from_map(map: &ConfigMap) -> Result<Self, HarnessError> {
        let step = match (map.get_f64("h_omega")?, map.get_f64("h")?) {
            (Some(_), Some(_)) => {
                return Err(HarnessError::Config("give either h_omega or h, not both".into()));
            }
            (Some(x), None) => StepControl::HOmega(x),
            (None, Some(h)) => StepControl::H(h),
            (None, None) => return Err(HarnessError::Config("missing h_omega or h".into())),
        };
        let method: MethodSpec = map.require("method")?.parse()?;
        let perturbation = match map.get("perturb_component") {
            None => None,
            Some(_) => {
                let component = map.get_parsed::<usize>("perturb_component")?.unwrap();
                let target = match map.get("perturb_target").unwrap_or("q") {
                    "q" => PerturbTarget::Q,
                    "p" => PerturbTarget::P,
                    other => return Err(HarnessError::Config(format!("perturb_target '{other}'"))),
                };
                let deltas = match map.get("perturb_deltas") {
                    None => Vec::new(),
                    Some(s) => parse_list(s)?,
                };
                Some(Perturbation { target, component, deltas })
            }
        };
        let cfg = RunConfig {
            problem: map.require("problem")?.to_string(),
            omega: map.get_f64("omega")?.ok_or_else(|| HarnessError::Config("missing omega".into()))?,
            method,
            step,
            t_end: map.get_f64("t_end")?.ok_or_else(|| HarnessError::Config("missing t_end".into()))?,
            stride: map.get_parsed("stride")?.unwrap_or(1),
            out: map.get("out").map(PathBuf::from),
            perturbation,
            seed: map.get_parsed("seed")?.unwrap_or(0),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Equidistant scan of `h omega` around `center`.
#[derive(Debug, Clone)]
pub struct ScanConfig {
    pub center: f64,
    pub width: f64,
    pub points: usize,
    /// `step` is overwritten per grid point.
    pub template: RunConfig,
}

impl ScanConfig {
    pub fn grid(&self) -> Result<Vec<f64>, HarnessError> {
        if self.points < 2 {
            return Err(HarnessError::Config(format!("scan needs >= 2 points, got {}", self.points)));
        }
        if !(self.width.is_finite() && self.width > 0.0 && self.center.is_finite()) {
            return Err(HarnessError::Config(format!("scan center {} width {}", self.center, self.width)));
        }
        let last = (self.points - 1) as f64;
        Ok((0..self.points).map(|i| self.center - self.width / 2.0 + i as f64 * self.width / last).collect())
    }

    pub fn from_map(map: &ConfigMap) -> Result<Self, HarnessError> {
        let mut template_map = map.clone();
        template_map.remove("h");
        let center = map
            .get_f64("center")?
            .or(map.get_f64("h_omega")?)
            .ok_or_else(|| HarnessError::Config("missing scan center".into()))?;
        template_map.set("h_omega", &center.to_string());
        Ok(ScanConfig {
            center,
            width: map.get_f64("width")?.ok_or_else(|| HarnessError::Config("missing scan width".into()))?,
            points: map.get_parsed("points")?.ok_or_else(|| HarnessError::Config("missing scan points".into()))?,
            template: RunConfig::from_map(&template_map)?,
        })
    }
}

fn parse_list(s: &str) -> Result<Vec<f64>, HarnessError> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| HarnessError::Config(format!("bad number '{t}' in list"))))
        .collect()
}

/// Flat `key = value` configuration. Later insertions override earlier ones,
/// which is how command-line flags take precedence over a config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigMap {
    entries: BTreeMap<String, String>,
}

impl ConfigMap {
    /// Parses lines of `key = value`. Blank lines, `#`/`;` comments and
    /// `[section]` headers are ignored; keys are case-sensitive and dashes
    /// are normalised to underscores.
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let mut map = ConfigMap::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') || line.starts_with('[') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| HarnessError::Config(format!("line {}: expected key = value", lineno + 1)))?;
            let key = k.trim();
            if key.is_empty() {
                return Err(HarnessError::Config(format!("line {}: empty key", lineno + 1)));
            }
            map.set(key, v.trim());
        }
        Ok(map)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) {
        self.entries.insert(key.replace('-', "_"), value.to_string());
    }

    pub fn remove(&mut self, key: &str) -> Option<String> {
        self.entries.remove(key)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn require(&self, key: &str) -> Result<&str, HarnessError> {
        self.get(key).ok_or_else(|| HarnessError::Config(format!("missing {key}")))
    }

    pub fn get_parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>, HarnessError> {
        self.get(key)
            .map(|v| v.parse::<T>().map_err(|_| HarnessError::Config(format!("{key} = '{v}' is not valid"))))
            .transpose()
    }

    /// Like [`get_parsed`](Self::get_parsed) but also accepts `pi`-expressions
    /// such as `2pi/3`, `pi/2` or `0.5*pi`.
    pub fn get_f64(&self, key: &str) -> Result<Option<f64>, HarnessError> {
        self.get(key)
            .map(|v| parse_real(v).ok_or_else(|| HarnessError::Config(format!("{key} = '{v}' is not a number"))))
            .transpose()
    }
}

/// Parses a real number or a simple multiple of pi: `[a][*]pi[/b]`.
pub fn parse_real(s: &str) -> Option<f64> {
    let s = s.trim();
    if let Ok(x) = s.parse::<f64>() {
        return Some(x);
    }
    let lower = s.to_ascii_lowercase();
    let idx = lower.find("pi")?;
    let (pre, post) = (&lower[..idx], &lower[idx + 2..]);
    let pre = pre.trim().trim_end_matches('*').trim();
    let coeff = match pre {
        "" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().ok()?,
    };
    let post = post.trim();
    let denom = if post.is_empty() { 1.0 } else { post.strip_prefix('/')?.trim().parse::<f64>().ok()? };
    Some(coeff * std::f64::consts::PI / denom)
}
