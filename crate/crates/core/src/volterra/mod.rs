//! Time-domain solvers for
//! `c'(t) = -alpha int_0^t e^{i omega (t-s)} S(t,s) c(s) ds`, `c(0) = 1`,
//! and for the equivalent integral equation `c(T) = 1 - int_0^T Z(T-s) c(s) ds`.

mod analysis;
mod ide;

use std::fmt::{self, Write as _};
use std::str::FromStr;

use num_complex::Complex64;
use thiserror::Error;

use crate::kernels::KernelError;

pub use analysis::{estimate_order, fit_short_time, OrderEstimate};
pub use ide::{compute_z, solve_ide, solve_integral_form};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VolterraError {
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),
    #[error("time step {dt} too large: dt * |diagonal weight| = {product:.3} >= 1 at step {step}; try dt <= {suggested:.3e}")]
    StepTooLarge {
        dt: f64,
        product: f64,
        step: usize,
        suggested: f64,
    },
    #[error("kernel '{0}' is not stationary; Z(tau) needs S(t,s) = S(t-s)")]
    NotStationary(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("{0}")]
    Fit(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// Uniform grid `t_k = k dt`, `k = 0..=n_steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub dt: f64,
    pub n_steps: usize,
}

impl TimeGrid {
    pub fn new(dt: f64, n_steps: usize) -> Result<Self, VolterraError> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(VolterraError::InvalidGrid(format!("dt must be positive and finite, got {dt}")));
        }
        if n_steps < 1 {
            return Err(VolterraError::InvalidGrid("need at least one step".into()));
        }
        Ok(Self { dt, n_steps })
    }

    /// Grid covering `[0, t_max]` with `round(t_max / dt)` steps.
    pub fn covering(dt: f64, t_max: f64) -> Result<Self, VolterraError> {
        if !(t_max > dt && t_max.is_finite()) {
            return Err(VolterraError::InvalidGrid(format!(
                "t_max must exceed dt (t_max {t_max}, dt {dt})"
            )));
        }
        Self::new(dt, (t_max / dt).round() as usize)
    }

    pub fn t(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn t_max(&self) -> f64 {
        self.t(self.n_steps)
    }

    pub fn len(&self) -> usize {
        self.n_steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n_steps).map(|k| self.t(k))
    }

    /// The same interval with `factor` times more steps.
    pub fn refined(&self, factor: usize) -> Self {
        Self {
            dt: self.dt / factor as f64,
            n_steps: self.n_steps * factor,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Trapezoid,
    Gregory4,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Trapezoid => "trapezoid",
            Method::Gregory4 => "gregory4",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "trapezoid" => Ok(Method::Trapezoid),
            "gregory4" => Ok(Method::Gregory4),
            other => Err(format!("unknown method '{other}' (expected trapezoid or gregory4)")),
        }
    }
}

/// `c(t_k)` on a grid, with provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeSeries {
    pub grid: TimeGrid,
    pub values: Vec<Complex64>,
    pub method: String,
    pub kernel_label: String,
    pub alpha: f64,
    pub omega: f64,
}

impl AmplitudeSeries {
    pub fn times(&self) -> Vec<f64> {
        self.grid.times().collect()
    }

    pub fn abs2(&self) -> Vec<f64> {
        self.values.iter().map(|c| c.norm_sqr()).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    /// Largest `|c - other|` over the common grid points of two series
    /// covering the same interval (the finer grid is subsampled).
    pub fn max_deviation(&self, other: &AmplitudeSeries) -> Result<f64, VolterraError> {
        let (coarse, fine) = if self.grid.n_steps <= other.grid.n_steps {
            (self, other)
        } else {
            (other, self)
        };
        let ratio = fine.grid.n_steps / coarse.grid.n_steps;
        if ratio * coarse.grid.n_steps != fine.grid.n_steps
            || (coarse.grid.t_max() - fine.grid.t_max()).abs() > 1e-9 * coarse.grid.t_max()
        {
            return Err(VolterraError::GridMismatch(format!(
                "{} steps of {} vs {} steps of {}",
                coarse.grid.n_steps, coarse.grid.dt, fine.grid.n_steps, fine.grid.dt
            )));
        }
        Ok((0..coarse.grid.len())
            .map(|k| (coarse.values[k] - fine.values[k * ratio]).norm())
            .fold(0.0, f64::max))
    }

    /// CSV with header `t,re_c,im_c,abs2_c`, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(80 * self.values.len() + 32);
        out.push_str("t,re_c,im_c,abs2_c\n");
        for (k, c) in self.values.iter().enumerate() {
            let _ = writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                self.grid.t(k),
                c.re,
                c.im,
                c.norm_sqr()
            );
        }
        out
    }
}

/// `Z(tau_k)` on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ZKernel {
    pub grid: TimeGrid,
    pub values: Vec<Complex64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(TimeGrid::new(0.0, 10).is_err());
        assert!(TimeGrid::new(0.1, 0).is_err());
        assert!(TimeGrid::covering(0.1, 0.05).is_err());
        let g = TimeGrid::covering(0.01, 200.0).unwrap();
        assert_eq!(g.n_steps, 20_000);
        assert_eq!(g.t(0), 0.0);
        assert_eq!(g.refined(2).n_steps, 40_000);
    }

    #[test]
    fn csv_format() {
        let s = AmplitudeSeries {
            grid: TimeGrid::new(0.5, 1).unwrap(),
            values: vec![Complex64::new(1.0, 0.0), Complex64::new(0.5, -0.25)],
            method: "trapezoid".into(),
            kernel_label: "k".into(),
            alpha: 0.1,
            omega: 0.0,
        };
        let csv = s.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,re_c,im_c,abs2_c");
        assert_eq!(
            lines[2],
            "5.0000000000000000e-1,5.0000000000000000e-1,-2.5000000000000000e-1,3.1250000000000000e-1"
        );
        assert!(csv.ends_with('\n'));
    }

    #[test]
    fn method_parsing() {
        assert_eq!("gregory4".parse::<Method>().unwrap(), Method::Gregory4);
        assert!("euler".parse::<Method>().is_err());
    }
}
