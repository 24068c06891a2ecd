use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;

use crate::energies::{EnergyMeter, EnergyReport};
use crate::experiments::{by_name, ProblemSpec};
use crate::filters::FilterError;
use crate::integrators::{integrate, AlphaScheme, StepError, TrigIntegrator, TwoStepMethod};
use crate::model::OscState;

use super::config::{MethodSpec, PerturbTarget, RunConfig, ScanConfig, StepControl};
use super::HarnessError;

pub const CSV_HEADER: &str = "t,H,H_slow,H_osc,H_osc_star,dev_H,dev_H_slow,dev_H_osc,dev_H_osc_star";
pub const SCAN_HEADER: &str = "h_omega,max_dev_H_osc,error";

/// A problem, a ready-to-step method and its energy meter.
pub struct Prepared {
    pub problem: ProblemSpec,
    pub method: Box<dyn TwoStepMethod>,
    pub meter: EnergyMeter,
    pub h: f64,
    pub n_steps: usize,
}

fn step_config_error(e: StepError) -> HarnessError {
    match e {
        StepError::ResonantStepSize { .. } => HarnessError::ResonantStep(e.to_string()),
        _ => HarnessError::Config(e.to_string()),
    }
}

fn filter_error(e: FilterError) -> HarnessError {
    match e {
        FilterError::DivisionByVanishingPsi { .. } => HarnessError::ResonantStep(e.to_string()),
        FilterError::UnknownName(_) => HarnessError::Config(e.to_string()),
    }
}

pub fn prepare(cfg: &RunConfig) -> Result<Prepared, HarnessError> {
    cfg.validate()?;
    let problem = by_name(&cfg.problem, cfg.omega)?;
    let h = cfg.h();
    let freq = problem.freq.clone();
    let (method, meter): (Box<dyn TwoStepMethod>, EnergyMeter) = match &cfg.method {
        MethodSpec::Trig(pair) => {
            let meter = EnergyMeter::for_trig(pair, h, &freq).map_err(filter_error)?;
            let integ = TrigIntegrator::new(pair.clone(), h, freq).map_err(step_config_error)?;
            (Box::new(integ), meter)
        }
        MethodSpec::Alpha(a) => {
            let scheme = AlphaScheme::new(*a, h, freq).map_err(step_config_error)?;
            let meter = EnergyMeter::for_alpha(&scheme).map_err(step_config_error)?;
            (Box::new(scheme), meter)
        }
    };
    Ok(Prepared { problem, method, meter, h, n_steps: cfg.n_steps()? })
}

/// Largest `|E(t_n) - E(t_0)|` over every step of a run.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MaxDeviations {
    pub h: f64,
    pub h_slow: f64,
    pub h_osc: f64,
    pub h_osc_star: f64,
}

impl MaxDeviations {
    fn update(&mut self, d: &[f64; 4]) {
        self.h = self.h.max(d[0].abs());
        self.h_slow = self.h_slow.max(d[1].abs());
        self.h_osc = self.h_osc.max(d[2].abs());
        self.h_osc_star = self.h_osc_star.max(d[3].abs());
    }
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub h: f64,
    pub n_steps: usize,
    pub initial: EnergyReport,
    pub last: EnergyReport,
    pub max_dev: MaxDeviations,
    pub final_state: OscState,
    pub rows: usize,
}

fn deviations(r: &EnergyReport, base: &EnergyReport) -> [f64; 4] {
    [r.h - base.h, r.h_slow - base.h_slow, r.h_osc - base.h_osc, r.h_osc_star - base.h_osc_star]
}

fn write_row(w: &mut dyn Write, r: &EnergyReport, d: &[f64; 4]) -> std::io::Result<()> {
    writeln!(
        w,
        "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
        r.t, r.h, r.h_slow, r.h_osc, r.h_osc_star, d[0], d[1], d[2], d[3]
    )
}

/// Runs a prepared problem from `initial`, tracking deviations at every step
/// and emitting CSV rows (and `on_sample` calls) at multiples of `stride`.
pub fn simulate_to(
    prep: &Prepared,
    initial: &OscState,
    stride: usize,
    mut csv: Option<&mut dyn Write>,
    mut on_sample: impl FnMut(&OscState),
) -> Result<RunSummary, HarnessError> {
    let potential = prep.problem.potential.as_ref();
    let base =
        prep.meter.report(potential, initial).map_err(|e| HarnessError::Config(format!("initial state: {e}")))?;
    let mut max_dev = MaxDeviations::default();
    let mut last = base;
    let mut rows = 0usize;
    let mut failure: Option<HarnessError> = None;
    let csv_path = "<csv output>";

    if let Some(w) = csv.as_deref_mut() {
        writeln!(w, "{CSV_HEADER}").map_err(|e| HarnessError::io(Path::new(csv_path), e))?;
    }
    let final_state = integrate(prep.method.as_ref(), potential, initial, prep.n_steps, 1, |n, state| {
        if failure.is_some() {
            return;
        }
        let report = match prep.meter.report(potential, state) {
            Ok(r) if r.h.is_finite() && r.h_osc_star.is_finite() => r,
            _ => {
                failure = Some(HarnessError::NonFinite { step: n });
                return;
            }
        };
        let d = deviations(&report, &base);
        max_dev.update(&d);
        last = report;
        if n % stride == 0 {
            on_sample(state);
            if let Some(w) = csv.as_deref_mut() {
                if let Err(e) = write_row(w, &report, &d) {
                    failure = Some(HarnessError::io(Path::new(csv_path), e));
                    return;
                }
            }
            rows += 1;
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    if let Some(w) = csv {
        w.flush().map_err(|e| HarnessError::io(Path::new(csv_path), e))?;
    }
    Ok(RunSummary { h: prep.h, n_steps: prep.n_steps, initial: base, last, max_dev, final_state, rows })
}

fn create(path: &Path) -> Result<BufWriter<File>, HarnessError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| HarnessError::io(path, e))
}

/// Runs `cfg` and writes the sampled energies to `cfg.out` when given.
pub fn simulate(cfg: &RunConfig) -> Result<RunSummary, HarnessError> {
    let prep = prepare(cfg)?;
    let initial = prep.problem.initial.clone();
    info!("{} omega={} h={} steps={} method={}", cfg.problem, cfg.omega, prep.h, prep.n_steps, cfg.method);
    match &cfg.out {
        Some(path) => {
            let mut w = create(path)?;
            simulate_to(&prep, &initial, cfg.stride, Some(&mut w), |_| {}).map_err(|e| relabel_io(e, path))
        }
        None => simulate_to(&prep, &initial, cfg.stride, None, |_| {}),
    }
}

fn relabel_io(e: HarnessError, path: &Path) -> HarnessError {
    match e {
        HarnessError::Io { source, .. } => HarnessError::io(path, source),
        other => other,
    }
}

/// One run of an ensemble; `delta = None` is the unperturbed base run.
#[derive(Debug)]
pub struct EnsembleMember {
    pub index: usize,
    pub delta: Option<f64>,
    pub path: Option<PathBuf>,
    pub result: Result<RunSummary, HarnessError>,
}

fn perturbed(initial: &OscState, target: PerturbTarget, component: usize, delta: f64) -> Option<OscState> {
    let mut s = initial.clone();
    let v = match target {
        PerturbTarget::Q => s.q.as_mut_slice(),
        PerturbTarget::P => s.p.as_mut_slice(),
    };
    let x = v[component];
    let y = x + delta;
    if y == x {
        return None;
    }
    v[component] = y;
    Some(s)
}

/// Runs the base configuration and one member per perturbation `delta`.
///
/// With `cfg.out` set it is treated as a directory receiving
/// `member_000.csv` (base), `member_001.csv`, ... . Deltas too small to
/// change the stored component are skipped with a warning.
pub fn ensemble(cfg: &RunConfig) -> Result<Vec<EnsembleMember>, HarnessError> {
    let prep = prepare(cfg)?;
    let initial = prep.problem.initial.clone();
    let mut starts: Vec<(Option<f64>, OscState)> = vec![(None, initial.clone())];
    if let Some(pert) = &cfg.perturbation {
        if pert.component >= prep.problem.freq.dim() {
            return Err(HarnessError::Config(format!(
                "perturbation component {} out of range (dimension {})",
                pert.component,
                prep.problem.freq.dim()
            )));
        }
        for &d in &pert.deltas {
            match perturbed(&initial, pert.target, pert.component, d) {
                Some(s) => starts.push((Some(d), s)),
                None => warn!("perturbation {d:e} is below one ulp of component {}; skipped", pert.component),
            }
        }
    }
    if let Some(dir) = &cfg.out {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    }
    // each member rebuilds its own method; `Prepared` is not `Clone`
    let members = starts
        .into_par_iter()
        .enumerate()
        .map(|(index, (delta, start))| {
            let path = cfg.out.as_ref().map(|d| d.join(format!("member_{index:03}.csv")));
            let result = match &path {
                Some(p) => create(p).and_then(|mut w| {
                    simulate_to(&prepare(cfg)?, &start, cfg.stride, Some(&mut w), |_| {}).map_err(|e| relabel_io(e, p))
                }),
                None => prepare(cfg).and_then(|pr| simulate_to(&pr, &start, cfg.stride, None, |_| {})),
            };
            EnsembleMember { index, delta, path, result }
        })
        .collect();
    Ok(members)
}

/// One grid point of a scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub h_omega: f64,
    pub max_dev_h_osc: f64,
    pub error: Option<String>,
}

/// Runs every grid point (in parallel) and returns rows in grid order.
/// Failing points become `NaN` rows carrying the error message.
pub fn scan(sc: &ScanConfig) -> Result<Vec<ScanRow>, HarnessError> {
    let grid = sc.grid()?;
    let rows = grid
        .par_iter()
        .map(|&h_omega| {
            let mut cfg = sc.template.clone();
            cfg.step = StepControl::HOmega(h_omega);
            cfg.out = None;
            match prepare(&cfg).and_then(|p| {
                let init = p.problem.initial.clone();
                simulate_to(&p, &init, usize::MAX, None, |_| {})
            }) {
                Ok(s) => ScanRow { h_omega, max_dev_h_osc: s.max_dev.h_osc, error: None },
                Err(e) => ScanRow { h_omega, max_dev_h_osc: f64::NAN, error: Some(e.to_string()) },
            }
        })
        .collect();
    Ok(rows)
}

pub fn write_scan_csv(w: &mut dyn Write, rows: &[ScanRow]) -> std::io::Result<()> {
    writeln!(w, "{SCAN_HEADER}")?;
    for r in rows {
        let err = r.error.as_deref().unwrap_or("").replace([',', '\n', '\r'], ";");
        writeln!(w, "{:.16e},{:.16e},{}", r.h_omega, r.max_dev_h_osc, err)?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::FilterPair;

    fn cfg(problem: &str, h_omega: f64, t_end: f64) -> RunConfig {
        RunConfig::new(problem, 100.0, MethodSpec::Trig(FilterPair::deuflhard()), StepControl::HOmega(h_omega), t_end)
    }

    #[test]
    fn harmonic_run_is_exact() {
        let s = simulate(&cfg("harmonic", 1.0, 20.0)).unwrap();
        assert_eq!(s.n_steps, 2000);
        assert!(s.max_dev.h <= 1e-12 && s.max_dev.h_osc <= 1e-12 && s.max_dev.h_osc_star <= 1e-12);
    }

    #[test]
    fn csv_shape_and_stride() {
        let mut c = cfg("exp1", 1.0, 1.0);
        c.stride = 10;
        let prep = prepare(&c).unwrap();
        let mut buf: Vec<u8> = Vec::new();
        let s = simulate_to(&prep, &prep.problem.initial.clone(), c.stride, Some(&mut buf), |_| {}).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len() - 1, 100 / 10 + 1);
        assert_eq!(s.rows, 11);
        assert!(lines[1].split(',').all(|f| f.contains('e')));
        assert_eq!(lines[1].split(',').count(), 9);
    }

    #[test]
    fn max_deviation_independent_of_stride() {
        let mut a = cfg("exp1", 2.0, 5.0);
        let full = simulate(&a).unwrap();
        a.stride = 37;
        let sub = simulate(&a).unwrap();
        assert_eq!(full.max_dev, sub.max_dev);
    }

    #[test]
    fn sub_ulp_perturbation_is_skipped() {
        let mut c = cfg("fpu", 1.0, 0.5);
        c.omega = 50.0;
        c.perturbation =
            Some(super::super::Perturbation { target: PerturbTarget::Q, component: 0, deltas: vec![1e-17, 7e-16] });
        let members = ensemble(&c).unwrap();
        assert_eq!(members.len(), 2);
        assert_eq!(members[1].delta, Some(7e-16));
    }

    #[test]
    fn scan_rows_in_order_with_failures() {
        let mut t = cfg("exp1", 1.0, 1.0);
        t.method = MethodSpec::Alpha(0.0);
        // alpha = 0 has h w < 2; the second point is outside that domain
        let sc = ScanConfig { center: 1.5, width: 1.0, points: 2, template: t };
        let rows = scan(&sc).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows[0].error.is_none() && rows[0].max_dev_h_osc.is_finite());
        assert!(rows[1].max_dev_h_osc.is_nan() && rows[1].error.is_some());
        let mut buf = Vec::new();
        write_scan_csv(&mut buf, &rows).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 3);
    }
}
