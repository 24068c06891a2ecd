use std::fmt::Write as _;
use std::io::Write;

use log::warn;

use crate::model::FrequencySystem;
use crate::resonance::{analyze, canonical_vectors, dot, ResonanceAnalysis, DEFAULT_LATTICE_CAP};
use crate::spectrum::{amplitude_at, principal_alias, SpectralPeak, SpectrumError};

use super::config::RunConfig;
use super::run::{prepare, simulate_to};
use super::HarnessError;

/// The analysis together with a human-readable rendering of it.
#[derive(Debug, Clone)]
pub struct ResonanceReport {
    pub analysis: ResonanceAnalysis,
    pub text: String,
}

impl ResonanceReport {
    /// CSV `k,value,in_module` over all enumerated combinations; `k` is
    /// written as space-separated integers.
    pub fn write_combinations_csv(&self, w: &mut dyn Write) -> std::io::Result<()> {
        writeln!(w, "k,value,in_module")?;
        let module = self.analysis.module();
        for c in &self.analysis.combinations {
            let k: Vec<String> = c.k.iter().map(|x| x.to_string()).collect();
            writeln!(w, "{},{:.16e},{}", k.join(" "), c.value, u8::from(module.contains(&c.k)))?;
        }
        w.flush()
    }
}

fn fmt_vec<T: std::fmt::Display>(v: &[T]) -> String {
    let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(","))
}

/// Runs the full resonance pipeline and renders every intermediate result.
pub fn resonance_report(freq: &FrequencySystem, h: f64, n: u32, delta: f64) -> Result<ResonanceReport, HarnessError> {
    let a = analyze(freq, h, n, delta).map_err(|e| HarnessError::Analysis(e.to_string()))?;
    let mut t = String::new();
    let fast = freq.fast_omegas();
    let _ = writeln!(t, "frequencies      {}", fmt_vec(fast));
    let _ = writeln!(t, "h                {h:.16e}");
    let _ = writeln!(t, "N                {n}");
    let _ = writeln!(t, "delta            {delta}");
    let _ = writeln!(t, "combinations     {}", a.combinations.len());
    let g = &a.gap;
    let _ = writeln!(
        t,
        "gap              index {} alpha {:.6} mu {:.6} window [{:.6e}, {:.6e}]",
        g.index, g.alpha, g.mu, g.lower, g.upper
    );
    let _ = writeln!(t, "near-resonant    {}", a.near_resonant.len());
    for k in &a.near_resonant {
        let _ = writeln!(t, "  k = {}", fmt_vec(k));
    }
    let m = a.module();
    let _ = writeln!(t, "module rank      {}", m.rank());
    for b in m.basis() {
        let _ = writeln!(t, "  basis {}", fmt_vec(b));
    }
    let mf = &a.modified;
    let _ = writeln!(t, "modified freqs   {}", fmt_vec(&mf.varpi));
    let _ = writeln!(t, "correction theta {}", fmt_vec(&mf.theta));
    let v = &a.verification;
    let _ = writeln!(t, "exact resonance  residual {:.3e} -> {}", v.member_residual, pass(v.exact_resonance_ok()));
    let _ = writeln!(
        t,
        "non-resonance    min {:.6e} >= {:.6e} -> {}",
        v.nonmember_min,
        v.nonmember_threshold,
        pass(v.nonresonance_bound_ok())
    );
    let _ = writeln!(t, "empirical gamma  {:.6e}", v.empirical_gamma);
    let _ = writeln!(t, "units excluded   {}   doubles excluded {}", pass(v.units_excluded), pass(v.doubles_excluded));
    let _ =
        writeln!(t, "assumption A     kappa {:.6e} >= sqrt(h) {:.6e} -> {}", a.kappa, h.sqrt(), pass(a.assumption_a));
    let _ = writeln!(t, "step condition   margin {:.6e} >= sqrt(h) -> {}", a.nonres_margin, pass(a.nonres));
    Ok(ResonanceReport { analysis: a, text: t })
}

fn pass(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "FAIL"
    }
}

/// Parameters of a spectrum run on top of a [`RunConfig`].
#[derive(Debug, Clone)]
pub struct SpectrumRequest {
    /// Flat coordinate index whose trajectory is analysed.
    pub component: usize,
    /// Highest `||k||_1` of the probed combination frequencies.
    pub max_order: u32,
    /// Gap parameter of the resonance analysis supplying the modified frequencies.
    pub delta: f64,
    /// Analysis window `[t0, t_end]`; `None` uses the whole run.
    pub t0: Option<f64>,
}

/// Simulates `cfg`, samples one coordinate at the configured stride and
/// probes it at `k.varpi` for `k = 0` and every canonical `k` with
/// `||k||_1 <= max_order`, where `varpi` are the modified frequencies.
/// Probes whose window is too short are skipped with a warning.
pub fn spectrum_report(cfg: &RunConfig, req: &SpectrumRequest) -> Result<Vec<SpectralPeak>, HarnessError> {
    let prep = prepare(cfg)?;
    let freq = prep.problem.freq.clone();
    if req.component >= freq.dim() {
        return Err(HarnessError::Config(format!(
            "component {} out of range (dimension {})",
            req.component,
            freq.dim()
        )));
    }
    let h = prep.h;
    let ell = freq.num_fast();
    let varpi = if ell == 0 {
        Vec::new()
    } else {
        let n = req.max_order.saturating_sub(1).max(1);
        analyze(&freq, h, n, req.delta).map_err(|e| HarnessError::Analysis(e.to_string()))?.modified.varpi
    };
    let mut samples = Vec::new();
    let t0 = req.t0.unwrap_or(f64::NEG_INFINITY);
    simulate_to(&prep, &prep.problem.initial.clone(), cfg.stride, None, |s| {
        if s.t >= t0 {
            samples.push((s.t, s.q.as_slice()[req.component]));
        }
    })?;

    let block = freq.layout().block_of(req.component);
    let mut labels: Vec<Vec<i64>> = vec![vec![0; ell]];
    if ell > 0 {
        labels.extend(
            canonical_vectors(ell, req.max_order, DEFAULT_LATTICE_CAP)
                .map_err(|e| HarnessError::Analysis(e.to_string()))?,
        );
    }
    let mut peaks = Vec::with_capacity(labels.len());
    for k in labels {
        let target = principal_alias(dot(&k, &varpi), h);
        match amplitude_at(&samples, target.abs()) {
            Ok(amplitude) => peaks.push(SpectralPeak { k, target_freq: target, amplitude, component: block }),
            Err(e @ SpectrumError::WindowTooShort { .. }) => warn!("skipping k = {k:?}: {e}"),
            Err(e) => return Err(HarnessError::Analysis(e.to_string())),
        }
    }
    Ok(peaks)
}

/// CSV with header `k,target_freq,amplitude,component`; `k` is written as
/// space-separated integers.
pub fn write_peaks_csv(w: &mut dyn Write, peaks: &[SpectralPeak]) -> std::io::Result<()> {
    writeln!(w, "k,target_freq,amplitude,component")?;
    for p in peaks {
        let k: Vec<String> = p.k.iter().map(|x| x.to_string()).collect();
        writeln!(w, "{},{:.16e},{:.16e},{}", k.join(" "), p.target_freq, p.amplitude, p.component)?;
    }
    w.flush()
}
