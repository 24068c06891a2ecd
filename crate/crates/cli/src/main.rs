use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::error;

use trigint::experiments::by_name;
use trigint::harness::{
    ensemble, resonance_report, scan, simulate, spectrum_report, write_peaks_csv, write_scan_csv, ConfigMap,
    HarnessError, RunConfig, ScanConfig, SpectrumRequest,
};

#[derive(Parser)]
#[command(name = "trigint", version, about = "Long-time runs of trigonometric integrators for oscillatory systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one problem and write sampled energies as CSV.
    Simulate(Common),
    /// Run the base problem plus one member per initial perturbation.
    Ensemble {
        #[command(flatten)]
        common: Common,
        /// Flat index of the perturbed initial component.
        #[arg(long)]
        perturb_component: Option<usize>,
        /// `q` or `p`.
        #[arg(long)]
        perturb_target: Option<String>,
        /// Comma-separated additive perturbations.
        #[arg(long, allow_hyphen_values = true)]
        perturb_deltas: Option<String>,
    },
    /// Maximum oscillatory-energy deviation over a grid of h*omega values.
    Scan {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        center: Option<String>,
        #[arg(long)]
        width: Option<String>,
        #[arg(long)]
        points: Option<usize>,
    },
    /// Resonance module, modified frequencies and step-size conditions.
    Resonance {
        #[command(flatten)]
        common: Common,
        /// Combination order: `||k||_1 <= n + 1`.
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        delta: Option<String>,
        /// Also write every combination `k`, its sine value and module membership.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Amplitudes of one coordinate at the combination frequencies.
    Spectrum {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        component: Option<usize>,
        #[arg(long)]
        max_order: Option<u32>,
        #[arg(long)]
        delta: Option<String>,
        /// Start of the analysis window.
        #[arg(long)]
        t0: Option<String>,
    },
}

#[derive(Args)]
struct Common {
    /// exp1, fpu, multifreq or harmonic.
    #[arg(long)]
    problem: Option<String>,
    #[arg(long)]
    omega: Option<String>,
    /// Step size as h*omega; accepts forms like `2pi/3`.
    #[arg(long)]
    h_omega: Option<String>,
    #[arg(long)]
    h: Option<String>,
    /// `trig:deuflhard`, `trig:gautschi_A` or `alpha:<value>`.
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    t_end: Option<String>,
    #[arg(long)]
    stride: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Flat `key = value` file; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn to_map(&self) -> Result<ConfigMap, HarnessError> {
        let mut m = match &self.config {
            Some(p) => ConfigMap::load(p)?,
            None => ConfigMap::default(),
        };
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                m.set(k, &v);
            }
        };
        put("problem", self.problem.clone());
        put("omega", self.omega.clone());
        put("method", self.method.clone());
        put("t_end", self.t_end.clone());
        put("stride", self.stride.map(|s| s.to_string()));
        put("out", self.out.as_ref().map(|p| p.display().to_string()));
        put("seed", self.seed.map(|s| s.to_string()));
        // a step given on the command line replaces either form from the file
        if self.h_omega.is_some() || self.h.is_some() {
            m.remove("h_omega");
            m.remove("h");
        }
        if let Some(v) = &self.h_omega {
            m.set("h_omega", v);
        }
        if let Some(v) = &self.h {
            m.set("h", v);
        }
        Ok(m)
    }
}

fn set_opt<T: ToString>(m: &mut ConfigMap, key: &str, v: &Option<T>) {
    if let Some(v) = v {
        m.set(key, &v.to_string());
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, HarnessError> {
    match path {
        Some(p) => File::create(p)
            .map(|f| Box::new(BufWriter::new(f)) as Box<dyn Write>)
            .map_err(|e| HarnessError::Io { path: p.display().to_string(), source: e }),
        None => Ok(Box::new(io::stdout().lock())),
    }
}

fn io_err(path: Option<&Path>, e: io::Error) -> HarnessError {
    HarnessError::Io { path: path.map_or("<stdout>".into(), |p| p.display().to_string()), source: e }
}

/// Fills in defaults that keep non-integrating commands from demanding
/// irrelevant keys.
fn default_key(m: &mut ConfigMap, key: &str, value: &str) {
    if m.get(key).is_none() {
        m.set(key, value);
    }
}

fn run(cli: Cli) -> Result<ExitCode, HarnessError> {
    match cli.command {
        Command::Simulate(common) => {
            let cfg = RunConfig::from_map(&common.to_map()?)?;
            let s = simulate(&cfg)?;
            println!(
                "steps={} h={:e} max_dev_H={:e} max_dev_H_slow={:e} max_dev_H_osc={:e} max_dev_H_osc_star={:e}",
                s.n_steps, s.h, s.max_dev.h, s.max_dev.h_slow, s.max_dev.h_osc, s.max_dev.h_osc_star
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Ensemble { common, perturb_component, perturb_target, perturb_deltas } => {
            let mut m = common.to_map()?;
            set_opt(&mut m, "perturb_component", &perturb_component);
            set_opt(&mut m, "perturb_target", &perturb_target);
            set_opt(&mut m, "perturb_deltas", &perturb_deltas);
            let cfg = RunConfig::from_map(&m)?;
            let members = ensemble(&cfg)?;
            let mut first_err = None;
            println!("member,delta,max_dev_H,max_dev_H_osc,file");
            for mem in members {
                let delta = mem.delta.map_or("base".to_string(), |d| format!("{d:e}"));
                let file = mem.path.as_ref().map_or(String::new(), |p| p.display().to_string());
                match mem.result {
                    Ok(s) => println!("{},{},{:e},{:e},{}", mem.index, delta, s.max_dev.h, s.max_dev.h_osc, file),
                    Err(e) => {
                        println!("{},{},NaN,NaN,{}", mem.index, delta, file);
                        first_err.get_or_insert(e);
                    }
                }
            }
            match first_err {
                Some(e) => Err(e),
                None => Ok(ExitCode::SUCCESS),
            }
        }
        Command::Scan { common, center, width, points } => {
            let mut m = common.to_map()?;
            set_opt(&mut m, "center", &center);
            set_opt(&mut m, "width", &width);
            set_opt(&mut m, "points", &points);
            let sc = ScanConfig::from_map(&m)?;
            let rows = scan(&sc)?;
            let path = sc.template.out.as_deref();
            let mut w = output(path)?;
            write_scan_csv(&mut w, &rows).map_err(|e| io_err(path, e))?;
            let failed = rows.iter().filter(|r| r.error.is_some()).count();
            if failed > 0 {
                error!("{failed} of {} scan points failed", rows.len());
                return Ok(ExitCode::from(4));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Resonance { common, n, delta, csv } => {
            let mut m = common.to_map()?;
            set_opt(&mut m, "n", &n);
            set_opt(&mut m, "delta", &delta);
            default_key(&mut m, "method", "trig:deuflhard");
            default_key(&mut m, "t_end", "1");
            let cfg = RunConfig::from_map(&m)?;
            let problem = by_name(&cfg.problem, cfg.omega)?;
            let n: u32 = m.get_parsed("n")?.unwrap_or(2);
            let delta = m.get_f64("delta")?.unwrap_or(0.25);
            let report = resonance_report(&problem.freq, cfg.h(), n, delta)?;
            let path = cfg.out.as_deref();
            let mut w = output(path)?;
            w.write_all(report.text.as_bytes()).and_then(|_| w.flush()).map_err(|e| io_err(path, e))?;
            if let Some(p) = csv.as_deref() {
                let mut w = output(Some(p))?;
                report.write_combinations_csv(&mut w).map_err(|e| io_err(Some(p), e))?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Spectrum { common, component, max_order, delta, t0 } => {
            let mut m = common.to_map()?;
            set_opt(&mut m, "component", &component);
            set_opt(&mut m, "max_order", &max_order);
            set_opt(&mut m, "delta", &delta);
            set_opt(&mut m, "t0", &t0);
            let mut cfg = RunConfig::from_map(&m)?;
            let path = cfg.out.take();
            let req = SpectrumRequest {
                component: m.get_parsed("component")?.unwrap_or(0),
                max_order: m.get_parsed("max_order")?.unwrap_or(2),
                delta: m.get_f64("delta")?.unwrap_or(0.25),
                t0: m.get_f64("t0")?,
            };
            let peaks = spectrum_report(&cfg, &req)?;
            let mut w = output(path.as_deref())?;
            write_peaks_csv(&mut w, &peaks).map_err(|e| io_err(path.as_deref(), e))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
