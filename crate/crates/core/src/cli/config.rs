use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::atom::Vec3;
use crate::quad::QuadConfig;
use crate::units::FINE_STRUCTURE;
use crate::volterra::Method;

use super::CliError;

/// Documented configuration keys, in file order. Command-line flags use the
/// same names with a `--` prefix (`t_max` is `--tmax`); any key can also be
/// given as `--set key=value`.
pub const KEYS: &[(&str, &str)] = &[
    ("state", "vacuum | squeezed_concentrated | squeezed_general | custom (default vacuum)"),
    ("alpha", "coupling constant, or `physical` for 1/137.035999 (default physical)"),
    ("transition", "hydrogen_2p1s | custom (default hydrogen_2p1s)"),
    ("omega", "transition frequency; required for transition = custom"),
    ("chi_table", "rows `p chi_x chi_y chi_z` of a radial smearing profile (transition = custom)"),
    ("custom_density", "ohmic | table: stationary density for state = custom (default ohmic)"),
    ("ohmic_amplitude", "A in rho = A p exp(-p / cutoff) (default 1)"),
    ("ohmic_cutoff", "cutoff in rho = A p exp(-p / cutoff) (default 1)"),
    ("rho_table", "rows `p rho` for custom_density = table"),
    ("table_tail_order", "power-law order of the tail beyond a table (default 4)"),
    ("squeeze_r", "squeezing amplitude r"),
    ("squeeze_q", "carrier momentum `qx,qy,qz`"),
    ("squeeze_d", "real polarization `dx,dy,dz`, orthogonal to q"),
    ("squeeze_amplitude", "amplitude of the concentrated mode function (default from squeeze_sigma, else 1)"),
    ("squeeze_sigma", "Gaussian wavepacket width (required for squeezed_general)"),
    ("dt", "time step (default 0.05 min(1/omega, 1/width))"),
    ("t_max", "final time (default 5 / gamma_markov)"),
    ("method", "trapezoid | gregory4 (default trapezoid)"),
    ("quad_rel_tol", "quadrature relative tolerance (default 1e-11)"),
    ("quad_abs_tol", "quadrature absolute tolerance (default 1e-24)"),
    ("out", "primary output path, `-` for stdout (default -)"),
    ("series_out", "rates mode: also write the solved series here"),
    ("fit_window", "decay-fit window as fractions of t_max `f1,f2` (default 0.2,0.9)"),
    ("kernel_samples", "kernel mode: samples per axis (default 201)"),
    ("kernel_t_max", "kernel mode: largest sampled time (default t_max)"),
    ("sweep_axis", "alpha | omega | squeeze_r | ohmic_amplitude"),
    ("sweep_values", "comma-separated values of the sweep axis"),
    ("force", "true to run solves the step-count guard would refuse"),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Kernel,
    Solve,
    Rates,
    Sweep,
}

impl FromStr for Mode {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "kernel" => Ok(Mode::Kernel),
            "solve" => Ok(Mode::Solve),
            "rates" => Ok(Mode::Rates),
            "sweep" => Ok(Mode::Sweep),
            other => Err(bad("mode", other, "kernel, solve, rates or sweep")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Kernel => "kernel",
            Mode::Solve => "solve",
            Mode::Rates => "rates",
            Mode::Sweep => "sweep",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateKind {
    Vacuum,
    SqueezedConcentrated,
    SqueezedGeneral,
    /// Stationary kernel of a user density (`custom_density`).
    Custom,
}

impl StateKind {
    pub fn name(&self) -> &'static str {
        match self {
            StateKind::Vacuum => "vacuum",
            StateKind::SqueezedConcentrated => "squeezed_concentrated",
            StateKind::SqueezedGeneral => "squeezed_general",
            StateKind::Custom => "custom",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Transition {
    Hydrogen2p1s,
    /// Frequency plus an optional `(p, chi)` table.
    Custom { omega: f64, chi_table: Option<PathBuf> },
}

#[derive(Debug, Clone, PartialEq)]
pub enum CustomDensity {
    Ohmic { amplitude: f64, cutoff: f64 },
    Table(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SqueezeSpec {
    pub r: f64,
    pub q: Vec3,
    pub d: Vec3,
    pub amplitude: Option<f64>,
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Alpha,
    Omega,
    SqueezeR,
    OhmicAmplitude,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::Alpha => "alpha",
            SweepAxis::Omega => "omega",
            SweepAxis::SqueezeR => "squeeze_r",
            SweepAxis::OhmicAmplitude => "ohmic_amplitude",
        }
    }
}

/// Validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub state: StateKind,
    pub alpha: f64,
    pub transition: Transition,
    pub custom_density: CustomDensity,
    pub table_tail_order: f64,
    pub squeeze: Option<SqueezeSpec>,
    pub dt: Option<f64>,
    pub t_max: Option<f64>,
    pub method: Method,
    pub quad: QuadConfig,
    pub out: Option<PathBuf>,
    pub series_out: Option<PathBuf>,
    pub fit_window: (f64, f64),
    pub kernel_samples: usize,
    pub kernel_t_max: Option<f64>,
    pub sweep: Option<(SweepAxis, Vec<f64>)>,
    pub force: bool,
}

fn bad(key: &str, value: &str, expected: &str) -> CliError {
    CliError::Config(format!("{key} = '{value}': expected {expected}"))
}

fn num(key: &str, v: &str) -> Result<f64, CliError> {
    v.trim()
        .parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| bad(key, v, "a finite number"))
}

fn list(key: &str, v: &str) -> Result<Vec<f64>, CliError> {
    v.split(',').filter(|s| !s.trim().is_empty()).map(|s| num(key, s)).collect()
}

fn vec3(key: &str, v: &str) -> Result<Vec3, CliError> {
    let xs = list(key, v)?;
    <[f64; 3]>::try_from(xs).map_err(|_| bad(key, v, "three comma-separated numbers"))
}

fn boolean(key: &str, v: &str) -> Result<bool, CliError> {
    match v.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(bad(key, v, "true or false")),
    }
}

fn path(v: &str, base: Option<&Path>) -> Option<PathBuf> {
    let p = PathBuf::from(v.trim());
    if v.trim() == "-" {
        return None;
    }
    Some(match base {
        Some(b) if p.is_relative() => b.join(p),
        _ => p,
    })
}

/// Raw `key = value` settings, each with the directory its relative paths
/// resolve against.
#[derive(Debug, Clone, Default)]
pub struct Settings {
    values: BTreeMap<String, (String, Option<PathBuf>)>,
}

impl Settings {
    /// Parses flat `key = value` text; `#` starts a comment.
    pub fn parse(text: &str, base: Option<&Path>) -> Result<Self, CliError> {
        let mut out = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`", i + 1)))?;
            let k = k.trim();
            if out.values.contains_key(k) {
                return Err(CliError::Config(format!("line {}: duplicate key '{k}'", i + 1)));
            }
            out.set(k, v.trim(), base)?;
        }
        Ok(out)
    }

    /// Sets (or overrides) one key.
    pub fn set(&mut self, key: &str, value: &str, base: Option<&Path>) -> Result<(), CliError> {
        if !KEYS.iter().any(|(k, _)| *k == key) {
            let known: Vec<&str> = KEYS.iter().map(|(k, _)| *k).collect();
            return Err(CliError::Config(format!(
                "unknown key '{key}' (known keys: {})",
                known.join(", ")
            )));
        }
        self.values
            .insert(key.to_string(), (value.to_string(), base.map(Path::to_path_buf)));
        Ok(())
    }

    /// Parses `key=value`.
    pub fn set_pair(&mut self, pair: &str) -> Result<(), CliError> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("--set '{pair}': expected key=value")))?;
        self.set(k.trim(), v.trim(), None)
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|(v, _)| v.as_str())
    }

    fn get_path(&self, key: &str) -> Option<PathBuf> {
        self.values.get(key).and_then(|(v, b)| path(v, b.as_deref()))
    }

    fn get_num(&self, key: &str) -> Result<Option<f64>, CliError> {
        self.get(key).map(|v| num(key, v)).transpose()
    }

    /// Validates the settings into a `RunConfig` for `mode`.
    pub fn into_config(self, mode: Mode) -> Result<RunConfig, CliError> {
        let state = match self.get("state").unwrap_or("vacuum") {
            "vacuum" => StateKind::Vacuum,
            "squeezed_concentrated" => StateKind::SqueezedConcentrated,
            "squeezed_general" => StateKind::SqueezedGeneral,
            "custom" => StateKind::Custom,
            other => {
                return Err(bad(
                    "state",
                    other,
                    "vacuum, squeezed_concentrated, squeezed_general or custom",
                ))
            }
        };
        let alpha = match self.get("alpha") {
            None | Some("physical") => FINE_STRUCTURE,
            Some(v) => num("alpha", v)?,
        };
        if alpha < 0.0 {
            return Err(bad("alpha", &alpha.to_string(), "a nonnegative number"));
        }
        let transition = match self.get("transition").unwrap_or("hydrogen_2p1s") {
            "hydrogen_2p1s" => {
                if self.get("omega").is_some() {
                    return Err(CliError::Config(
                        "omega is fixed by transition = hydrogen_2p1s; use transition = custom".into(),
                    ));
                }
                Transition::Hydrogen2p1s
            }
            "custom" => Transition::Custom {
                omega: self
                    .get_num("omega")?
                    .ok_or_else(|| CliError::Config("transition = custom needs omega".into()))?,
                chi_table: self.get_path("chi_table"),
            },
            other => return Err(bad("transition", other, "hydrogen_2p1s or custom")),
        };
        let custom_density = match self.get("custom_density").unwrap_or("ohmic") {
            "ohmic" => CustomDensity::Ohmic {
                amplitude: self.get_num("ohmic_amplitude")?.unwrap_or(1.0),
                cutoff: self.get_num("ohmic_cutoff")?.unwrap_or(1.0),
            },
            "table" => CustomDensity::Table(
                self.get_path("rho_table")
                    .ok_or_else(|| CliError::Config("custom_density = table needs rho_table".into()))?,
            ),
            other => return Err(bad("custom_density", other, "ohmic or table")),
        };
        let squeeze = match self.get("squeeze_r") {
            None => None,
            Some(r) => Some(SqueezeSpec {
                r: num("squeeze_r", r)?,
                q: vec3("squeeze_q", self.get("squeeze_q").unwrap_or(""))?,
                d: vec3("squeeze_d", self.get("squeeze_d").unwrap_or(""))?,
                amplitude: self.get_num("squeeze_amplitude")?,
                sigma: self.get_num("squeeze_sigma")?,
            }),
        };
        let squeezed = matches!(state, StateKind::SqueezedConcentrated | StateKind::SqueezedGeneral);
        match (&squeeze, squeezed) {
            (None, true) => {
                return Err(CliError::Config(format!(
                    "state = {} needs squeeze_r, squeeze_q and squeeze_d",
                    state.name()
                )))
            }
            (Some(_), false) => {
                return Err(CliError::Config("squeeze_* keys need a squeezed state".into()))
            }
            _ => {}
        }
        if state == StateKind::SqueezedGeneral && squeeze.as_ref().is_some_and(|s| s.sigma.is_none()) {
            return Err(CliError::Config("state = squeezed_general needs squeeze_sigma".into()));
        }
        let dt = self.get_num("dt")?;
        let t_max = self.get_num("t_max")?;
        if let Some(dt) = dt {
            if !(dt > 0.0) {
                return Err(bad("dt", &dt.to_string(), "a positive number"));
            }
            if let Some(t) = t_max {
                if !(t > dt) {
                    return Err(CliError::Config(format!("t_max ({t}) must exceed dt ({dt})")));
                }
            }
        }
        if let Some(t) = t_max {
            if !(t > 0.0) {
                return Err(bad("t_max", &t.to_string(), "a positive number"));
            }
        }
        let method = match self.get("method") {
            None => Method::Trapezoid,
            Some(m) => m.parse().map_err(|e: String| CliError::Config(e))?,
        };
        let quad = QuadConfig::default().with_tolerances(
            self.get_num("quad_rel_tol")?.unwrap_or(QuadConfig::default().rel_tol),
            self.get_num("quad_abs_tol")?.unwrap_or(QuadConfig::default().abs_tol),
        );
        quad.validate().map_err(|e| CliError::Config(e.to_string()))?;
        let fit_window = match self.get("fit_window") {
            None => (0.2, 0.9),
            Some(v) => match list("fit_window", v)?.as_slice() {
                &[a, b] if 0.0 <= a && a < b && b <= 1.0 => (a, b),
                _ => return Err(bad("fit_window", v, "two fractions 0 <= f1 < f2 <= 1")),
            },
        };
        let kernel_samples = match self.get_num("kernel_samples")? {
            None => 201,
            Some(n) if n >= 2.0 && n.fract() == 0.0 && n <= 1e6 => n as usize,
            Some(n) => return Err(bad("kernel_samples", &n.to_string(), "an integer in [2, 1e6]")),
        };
        let sweep = match self.get("sweep_axis") {
            None => None,
            Some(a) => {
                let axis = match a {
                    "alpha" => SweepAxis::Alpha,
                    "omega" => SweepAxis::Omega,
                    "squeeze_r" => SweepAxis::SqueezeR,
                    "ohmic_amplitude" => SweepAxis::OhmicAmplitude,
                    other => return Err(bad("sweep_axis", other, "alpha, omega, squeeze_r or ohmic_amplitude")),
                };
                Some((axis, list("sweep_values", self.get("sweep_values").unwrap_or(""))?))
            }
        };
        if mode == Mode::Sweep {
            match &sweep {
                None => return Err(CliError::Config("sweep mode needs sweep_axis".into())),
                Some((_, v)) if v.is_empty() => {
                    return Err(CliError::Config("sweep mode needs nonempty sweep_values".into()))
                }
                Some((SweepAxis::Omega, _)) if transition == Transition::Hydrogen2p1s => {
                    return Err(CliError::Config("sweeping omega needs transition = custom".into()))
                }
                Some((SweepAxis::SqueezeR, _)) if !squeezed => {
                    return Err(CliError::Config("sweeping squeeze_r needs a squeezed state".into()))
                }
                _ => {}
            }
        }
        Ok(RunConfig {
            mode,
            state,
            alpha,
            transition,
            custom_density,
            table_tail_order: self.get_num("table_tail_order")?.unwrap_or(4.0),
            squeeze,
            dt,
            t_max,
            method,
            quad,
            out: self.get_path("out"),
            series_out: self.get_path("series_out"),
            fit_window,
            kernel_samples,
            kernel_t_max: self.get_num("kernel_t_max")?,
            sweep,
            force: self.get("force").map(|v| boolean("force", v)).transpose()?.unwrap_or(false),
        })
    }
}

impl RunConfig {
    /// A copy with the sweep axis set to `value`.
    pub fn with_axis(&self, axis: SweepAxis, value: f64) -> Self {
        let mut c = self.clone();
        match axis {
            SweepAxis::Alpha => c.alpha = value,
            SweepAxis::Omega => {
                if let Transition::Custom { omega, .. } = &mut c.transition {
                    *omega = value;
                }
            }
            SweepAxis::SqueezeR => {
                if let Some(s) = &mut c.squeeze {
                    s.r = value;
                }
            }
            SweepAxis::OhmicAmplitude => {
                if let CustomDensity::Ohmic { amplitude, .. } = &mut c.custom_density {
                    *amplitude = value;
                }
            }
        }
        c
    }
}

/// Reads whitespace- or comma-separated numeric rows with `ncols` columns.
pub fn read_table(path: &Path, ncols: usize) -> Result<Vec<Vec<f64>>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read table {}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let row: Vec<f64> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| num(&format!("{}:{}", path.display(), i + 1), s))
            .collect::<Result<_, _>>()?;
        if row.len() != ncols {
            return Err(CliError::Config(format!(
                "{}:{}: expected {ncols} columns, found {}",
                path.display(),
                i + 1,
                row.len()
            )));
        }
        rows.push(row);
    }
    Ok(rows)
}
