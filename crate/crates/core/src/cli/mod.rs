//! Command-line front end: configuration, run orchestration and output.
//!
//! `qedvolterra <mode> [--config FILE] [--alpha X --dt X --tmax X --state S
//! --method M --out PATH --force] [--set key=value]...`
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure.

mod config;
mod fit;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::Parser;
use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::atom::{transition_frequency, AtomError, ModelParams, SmearingFunction};
use crate::kernels::{
    concentrated_amplitude, make_kernel, KernelError, KernelEvaluator, KernelState, SpectralDensity,
    SqueezeParams,
};
use crate::laplace::{markov_rate, LaplaceAnalysis, LaplaceError};
use crate::units::{energy_to_ev, time_to_si};
use crate::volterra::{solve_ide, AmplitudeSeries, TimeGrid, VolterraError};

pub use config::{
    read_table, CustomDensity, Mode, RunConfig, Settings, SqueezeSpec, StateKind, SweepAxis,
    Transition, KEYS,
};
pub use fit::{fit_decay, DecayFit, RELIABLE_R2};

/// Solves whose decay time exceeds this many steps are refused without
/// `force`.
pub const MAX_DECAY_STEPS: f64 = 1e9;
/// Solves with more steps than this are refused without `force`.
pub const MAX_STEPS: f64 = 1e7;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("fit failed: {0}")]
    Fit(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Volterra(#[from] VolterraError),
    #[error(transparent)]
    Laplace(#[from] LaplaceError),
    #[error("{context}: {source}")]
    Context {
        context: String,
        source: Box<CliError>,
    },
}

impl From<AtomError> for CliError {
    fn from(e: AtomError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Context { source, .. } => source.exit_code(),
            _ => 3,
        }
    }

    fn context(self, context: impl Into<String>) -> Self {
        CliError::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "qedvolterra",
    version,
    about = "Spontaneous emission of a two-level atom from field two-point functions",
    after_help = "Every configuration key can be set with --set key=value; see the README for the key list.\nExit codes: 0 success, 2 configuration error, 3 numerical failure."
)]
pub struct Args {
    /// kernel | solve | rates | sweep
    pub mode: String,
    /// Flat `key = value` configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long)]
    pub dt: Option<String>,
    #[arg(long)]
    pub tmax: Option<String>,
    #[arg(long)]
    pub state: Option<String>,
    #[arg(long)]
    pub method: Option<String>,
    /// Output path (`-` for stdout).
    #[arg(long)]
    pub out: Option<String>,
    /// Run solves the step-count guard would refuse.
    #[arg(long)]
    pub force: bool,
    /// Any configuration key, as key=value (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

impl Args {
    /// Merges the config file, `--set` pairs and named flags (in that order
    /// of increasing precedence).
    pub fn into_config(self) -> Result<RunConfig, CliError> {
        let mode: Mode = self.mode.parse()?;
        let mut settings = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
                Settings::parse(&text, path.parent())?
            }
            None => Settings::default(),
        };
        for pair in &self.set {
            settings.set_pair(pair)?;
        }
        let flags = [
            ("alpha", &self.alpha),
            ("dt", &self.dt),
            ("t_max", &self.tmax),
            ("state", &self.state),
            ("method", &self.method),
            ("out", &self.out),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                settings.set(key, v, None)?;
            }
        }
        if self.force {
            settings.set("force", "true", None)?;
        }
        settings.into_config(mode)
    }
}

/// Parses `args` (including the program name), runs, reports errors on
/// stderr and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match args.into_config().and_then(|c| run(&c)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("qedvolterra: {e}");
            e.exit_code()
        }
    }
}

/// Everything needed to solve one configuration.
#[derive(Debug, Clone)]
pub struct Problem {
    pub params: ModelParams,
    /// Stationary (vacuum or custom) part of the kernel.
    pub density: SpectralDensity,
    pub chi: SmearingFunction,
    pub kernel: KernelEvaluator,
}

fn chi_from_table(path: &Path) -> Result<(SmearingFunction, Vec<(f64, [f64; 3])>), CliError> {
    let rows: Vec<(f64, [f64; 3])> = read_table(path, 4)?
        .into_iter()
        .map(|r| (r[0], [r[1], r[2], r[3]]))
        .collect();
    if rows.len() < 2 || rows.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(CliError::Config(format!(
            "{}: need at least 2 rows with increasing p",
            path.display()
        )));
    }
    let table = rows.clone();
    let chi = SmearingFunction::new(format!("table[{}]", path.display()), move |p| {
        // linear in |p|, zero outside the table
        let k = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        let i = table.partition_point(|r| r.0 <= k);
        if i == 0 || i == table.len() {
            return [0.0; 3];
        }
        let ((k0, c0), (k1, c1)) = (table[i - 1], table[i]);
        let u = (k - k0) / (k1 - k0);
        [0, 1, 2].map(|j| c0[j] + u * (c1[j] - c0[j]))
    });
    Ok((chi, rows))
}

/// Builds parameters, density, smearing function and kernel.
pub fn build_problem(cfg: &RunConfig) -> Result<Problem, CliError> {
    let cfg_err = |e: KernelError| CliError::Config(e.to_string());
    if cfg.alpha == 0.0 && cfg.transition == Transition::Hydrogen2p1s {
        // the hydrogen structure degenerates at alpha = 0 but the atom is
        // decoupled anyway: c = 1 for any kernel
        let density = SpectralDensity::new(
            "decoupled",
            |_| 0.0,
            crate::quad::Decay::Exponential { rate: 1.0, constant: f64::MIN_POSITIVE },
            1.0,
        )
        .map_err(cfg_err)?
        .with_mass(0.0);
        return Ok(Problem {
            params: ModelParams::new(0.0, 0.0)?,
            kernel: KernelEvaluator::stationary("decoupled", |_| Complex64::new(0.0, 0.0)),
            chi: SmearingFunction::new("none", |_| [0.0; 3]),
            density,
        });
    }
    let (omega, chi_table) = match &cfg.transition {
        Transition::Hydrogen2p1s => (transition_frequency(cfg.alpha)?, None),
        Transition::Custom { omega, chi_table } => (*omega, chi_table.clone()),
    };
    let params = ModelParams::new(cfg.alpha, omega)?;
    let (chi, chi_rows) = match (&cfg.transition, &chi_table) {
        (Transition::Hydrogen2p1s, _) => (SmearingFunction::hydrogen_2p1s(cfg.alpha), None),
        (_, Some(path)) => {
            let (chi, rows) = chi_from_table(path)?;
            (chi, Some(rows))
        }
        (_, None) => (SmearingFunction::new("none", |_| [0.0; 3]), None),
    };
    let density = match cfg.state {
        StateKind::Custom => match &cfg.custom_density {
            CustomDensity::Ohmic { amplitude, cutoff } => {
                SpectralDensity::ohmic(*amplitude, *cutoff).map_err(cfg_err)?
            }
            CustomDensity::Table(path) => {
                let pts: Vec<(f64, f64)> = read_table(path, 2)?.into_iter().map(|r| (r[0], r[1])).collect();
                SpectralDensity::from_table(format!("table[{}]", path.display()), &pts, cfg.table_tail_order)
                    .map_err(cfg_err)?
            }
        },
        _ => match (&cfg.transition, chi_rows) {
            (Transition::Hydrogen2p1s, _) => SpectralDensity::hydrogen(cfg.alpha).map_err(cfg_err)?,
            (_, Some(rows)) => SpectralDensity::from_chi_table(chi.label(), &rows, cfg.table_tail_order)
                .map_err(cfg_err)?,
            (_, None) => {
                return Err(CliError::Config(
                    "transition = custom needs chi_table for vacuum and squeezed states".into(),
                ))
            }
        },
    };
    let state = match (cfg.state, &cfg.squeeze) {
        (StateKind::SqueezedConcentrated | StateKind::SqueezedGeneral, Some(s)) => {
            let mut p = SqueezeParams::real(s.r, s.q, s.d).map_err(cfg_err)?;
            p = p.with_amplitude(match (s.amplitude, s.sigma) {
                (Some(a), _) => a,
                (None, Some(sigma)) => concentrated_amplitude(sigma, s.q),
                (None, None) => 1.0,
            });
            if cfg.state == StateKind::SqueezedGeneral {
                let sigma = s.sigma.ok_or_else(|| CliError::Config("squeezed_general needs squeeze_sigma".into()))?;
                KernelState::SqueezedGeneral(p.with_gaussian(sigma).map_err(cfg_err)?)
            } else {
                KernelState::SqueezedConcentrated(p)
            }
        }
        _ => KernelState::Vacuum,
    };
    let kernel = make_kernel(&state, &density, &chi, &cfg.quad)?;
    Ok(Problem {
        params,
        density,
        chi,
        kernel,
    })
}

impl Problem {
    /// Fastest time scale of the kernel and phase.
    fn default_dt(&self, cfg: &RunConfig) -> f64 {
        let mut rate = self.density.width().max(self.params.omega.abs());
        if let Some(s) = &cfg.squeeze {
            rate = rate.max((s.q[0] * s.q[0] + s.q[1] * s.q[1] + s.q[2] * s.q[2]).sqrt());
        }
        0.05 / rate
    }

    /// `(dt, t_max)` from the config or the defaults.
    pub fn grid(&self, cfg: &RunConfig) -> Result<TimeGrid, CliError> {
        let dt = cfg.dt.unwrap_or_else(|| self.default_dt(cfg));
        let t_max = match cfg.t_max {
            Some(t) => t,
            None => {
                let g = markov_rate(&self.density, &self.params);
                if g > 0.0 {
                    5.0 / g
                } else {
                    return Err(CliError::Config(
                        "t_max is required when the Markov rate vanishes".into(),
                    ));
                }
            }
        };
        TimeGrid::covering(dt, t_max).map_err(|e| CliError::Config(e.to_string()))
    }

    /// `Err` with an explanation when the solve is out of desk scale.
    pub fn feasibility(&self, grid: &TimeGrid) -> Result<(), CliError> {
        let g = markov_rate(&self.density, &self.params);
        let decay_steps = 1.0 / (g * grid.dt);
        if g > 0.0 && decay_steps > MAX_DECAY_STEPS {
            return Err(CliError::Config(format!(
                "the decay time 1/gamma = {:.3e} is {decay_steps:.2e} steps of dt = {:.3e}; \
                 the kernel varies on a scale ~{:.1e} times shorter than the decay, so a time-domain \
                 solve is out of reach (use rates mode, a larger alpha, or --force)",
                1.0 / g,
                grid.dt,
                1.0 / (g / self.density.width()),
            )));
        }
        if grid.n_steps as f64 > MAX_STEPS {
            return Err(CliError::Config(format!(
                "{} steps requested (limit {MAX_STEPS:e} without --force)",
                grid.n_steps
            )));
        }
        Ok(())
    }

    pub fn solve(&self, cfg: &RunConfig, grid: &TimeGrid) -> Result<AmplitudeSeries, CliError> {
        Ok(solve_ide(&self.kernel, &self.params, grid, cfg.method)?)
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", p.display()))),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(format!("stdout: {e}"))),
    }
}

/// Kernel samples as CSV: `tau,re_s,im_s` for stationary kernels,
/// `t,s,re_s,im_s` on a square grid otherwise.
pub fn kernel_csv(problem: &Problem, cfg: &RunConfig) -> Result<String, CliError> {
    let span = match (cfg.kernel_t_max, cfg.t_max) {
        (Some(t), _) | (None, Some(t)) => t,
        (None, None) => 20.0 / problem.density.width(),
    };
    let n = cfg.kernel_samples;
    let h = span / (n - 1) as f64;
    let k = &problem.kernel;
    let mut out = String::new();
    if k.is_stationary() {
        let vals: Vec<Complex64> = (0..n)
            .into_par_iter()
            .map(|i| k.lag(i as f64 * h))
            .collect::<Result<_, _>>()?;
        out.push_str("tau,re_s,im_s\n");
        for (i, v) in vals.iter().enumerate() {
            let _ = writeln!(out, "{:.16e},{:.16e},{:.16e}", i as f64 * h, v.re, v.im);
        }
    } else {
        let vals: Vec<Complex64> = (0..n * n)
            .into_par_iter()
            .map(|ij| k.eval((ij / n) as f64 * h, (ij % n) as f64 * h))
            .collect::<Result<_, _>>()?;
        out.push_str("t,s,re_s,im_s\n");
        for (ij, v) in vals.iter().enumerate() {
            let _ = writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                (ij / n) as f64 * h,
                (ij % n) as f64 * h,
                v.re,
                v.im
            );
        }
    }
    Ok(out)
}

/// Outcome of `rates` for one configuration.
#[derive(Debug, Clone)]
pub struct RatesReport {
    pub analysis: LaplaceAnalysis,
    /// `None` with the reason when no time-domain fit was made.
    pub fit: Result<DecayFit, String>,
    pub series: Option<AmplitudeSeries>,
    pub stationary: bool,
}

/// Laplace analysis plus, when feasible, a solve and a decay fit.
pub fn rates(cfg: &RunConfig) -> Result<RatesReport, CliError> {
    let problem = build_problem(cfg)?;
    let analysis = LaplaceAnalysis::run(&problem.density, &problem.params, &cfg.quad)?;
    let grid = problem.grid(cfg)?;
    let (fit, series) = match problem.feasibility(&grid) {
        Err(reason) if !cfg.force => (Err(format!("skipped: {reason}")), None),
        _ => {
            let series = problem.solve(cfg, &grid)?;
            let window = (cfg.fit_window.0 * grid.t_max(), cfg.fit_window.1 * grid.t_max());
            let fit = fit_decay(&series, window).map_err(|e| e.to_string());
            (fit, Some(series))
        }
    };
    Ok(RatesReport {
        analysis,
        fit,
        series,
        stationary: problem.kernel.is_stationary(),
    })
}

fn state_label(cfg: &RunConfig) -> String {
    cfg.state.name().to_string()
}

/// `key = value` summary; floats in 17-digit scientific notation.
pub fn summary_text(cfg: &RunConfig, report: &RatesReport) -> String {
    let a = &report.analysis;
    let mut out = String::new();
    let mut s = |k: &str, v: &str| {
        let _ = writeln!(out, "{k} = {v}");
    };
    s("mode", &cfg.mode.to_string());
    s("state", &state_label(cfg));
    s("density", a.density.label());
    s(
        "laplace_kernel",
        if report.stationary { "full" } else { "stationary_part" },
    );
    let f = |x: f64| format!("{x:.16e}");
    s("alpha", &f(a.params.alpha));
    s("omega", &f(a.params.omega));
    s("omega_ev", &f(energy_to_ev(a.params.omega)));
    for (k, v) in a.summary_pairs() {
        s(k, &f(v));
    }
    s("lifetime_markov_s", &f(time_to_si(1.0 / a.gamma_markov)));
    match &report.fit {
        Ok(fit) => {
            s("fit_status", if fit.reliable() { "ok" } else { "unreliable" });
            s("gamma_fit", &f(fit.gamma_fit));
            s("fit_intercept", &f(fit.intercept));
            s("fit_r_squared", &f(fit.r_squared));
            s("fit_t1", &f(fit.window.0));
            s("fit_t2", &f(fit.window.1));
        }
        Err(reason) => {
            s("fit_status", &reason.replace('\n', " "));
            for k in ["gamma_fit", "fit_intercept", "fit_r_squared", "fit_t1", "fit_t2"] {
                s(k, &f(f64::NAN));
            }
        }
    }
    out
}

/// Rows `value,gamma_markov,gamma_pole,pole_re,pole_im,lamb_shift,gamma_fit,fit_r_squared`
/// in axis order; points run in parallel.
pub fn sweep_csv(cfg: &RunConfig) -> Result<String, CliError> {
    let (axis, values) = cfg
        .sweep
        .clone()
        .ok_or_else(|| CliError::Config("sweep mode needs sweep_axis".into()))?;
    let reports: Vec<RatesReport> = values
        .par_iter()
        .map(|&v| rates(&cfg.with_axis(axis, v)).map_err(|e| e.context(format!("{} = {v}", axis.name()))))
        .collect::<Result<_, _>>()?;
    let mut out = format!(
        "{},gamma_markov,gamma_pole,pole_re,pole_im,lamb_shift,gamma_fit,fit_r_squared\n",
        axis.name()
    );
    for (v, r) in values.iter().zip(&reports) {
        let a = &r.analysis;
        let (re, im) = a.pole.map_or((f64::NAN, f64::NAN), |p| (p.s.re, p.s.im));
        let (gf, r2) = r.fit.as_ref().map_or((f64::NAN, f64::NAN), |f| (f.gamma_fit, f.r_squared));
        let _ = writeln!(
            out,
            "{v:.16e},{:.16e},{:.16e},{re:.16e},{im:.16e},{:.16e},{gf:.16e},{r2:.16e}",
            a.gamma_markov,
            a.gamma_pole(),
            a.shift()
        );
    }
    Ok(out)
}

/// Executes one configured run and writes its outputs.
pub fn run(cfg: &RunConfig) -> Result<(), CliError> {
    match cfg.mode {
        Mode::Kernel => {
            let problem = build_problem(cfg)?;
            write_output(cfg.out.as_deref(), &kernel_csv(&problem, cfg)?)
        }
        Mode::Solve => {
            let problem = build_problem(cfg)?;
            let grid = problem.grid(cfg)?;
            if !cfg.force {
                problem.feasibility(&grid)?;
            }
            let series = problem.solve(cfg, &grid)?;
            write_output(cfg.out.as_deref(), &series.to_csv())
        }
        Mode::Rates => {
            let report = rates(cfg)?;
            if let (Some(path), Some(series)) = (&cfg.series_out, &report.series) {
                write_output(Some(path), &series.to_csv())?;
            }
            write_output(cfg.out.as_deref(), &summary_text(cfg, &report))
        }
        Mode::Sweep => write_output(cfg.out.as_deref(), &sweep_csv(cfg)?),
    }
}
