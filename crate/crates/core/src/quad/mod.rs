//! Numerical integration: adaptive complex quadrature on finite intervals and
//! Fourier-type integrals `int_0^inf g(p) e^{-i p tau} dp` over the half line.

mod gk;
mod oscillatory;

use num_complex::Complex64;
use thiserror::Error;

pub use gk::{integrate_breakpoints, kronrod21_nodes};
pub use oscillatory::{oscillatory_halfline, Envelope};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadError {
    #[error("quadrature did not converge after {subdivisions} subdivisions (estimate {value}, error {err_est:e})")]
    NonConvergence {
        value: Complex64,
        err_est: f64,
        subdivisions: usize,
    },
    #[error("series acceleration did not converge after {panels} panels (estimate {value})")]
    AccelerationFailed { value: Complex64, panels: usize },
    #[error("invalid decay metadata: {0}")]
    InvalidDecay(String),
    #[error("invalid quadrature configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailStrategy {
    /// Integrate between consecutive zeros of the oscillation and accelerate
    /// the alternating panel sums.
    BetweenZerosAcceleration,
    /// Integrate up to a truncation point fixed by the analytic tail bound.
    TruncateWithBound,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    pub tail_strategy: TailStrategy,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-11,
            abs_tol: 1e-24,
            max_subdivisions: 500,
            tail_strategy: TailStrategy::BetweenZerosAcceleration,
        }
    }
}

impl QuadConfig {
    pub fn validate(&self) -> Result<(), QuadError> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(QuadError::InvalidConfig(format!(
                "tolerances must be positive (rel {}, abs {})",
                self.rel_tol, self.abs_tol
            )));
        }
        if self.max_subdivisions < 8 {
            return Err(QuadError::InvalidConfig(format!(
                "max_subdivisions must be at least 8, got {}",
                self.max_subdivisions
            )));
        }
        Ok(())
    }

    pub fn with_tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }
}

/// Declared large-momentum decay of a nonnegative envelope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Decay {
    /// `|g(p)| <= constant * p^-order` for `p >= from`.
    Algebraic { order: f64, constant: f64, from: f64 },
    /// `|g(p)| <= constant * exp(-rate p)` for all `p >= 0`.
    Exponential { rate: f64, constant: f64 },
}

impl Decay {
    pub fn validate(&self) -> Result<(), QuadError> {
        match *self {
            Decay::Algebraic { order, constant, from } => {
                if !(order >= 2.0 && constant >= 0.0 && from >= 0.0) {
                    return Err(QuadError::InvalidDecay(format!(
                        "algebraic decay needs order >= 2 and nonnegative constants (order {order}, constant {constant}, from {from})"
                    )));
                }
            }
            Decay::Exponential { rate, constant } => {
                if !(rate > 0.0 && constant >= 0.0) {
                    return Err(QuadError::InvalidDecay(format!(
                        "exponential decay needs a positive rate (rate {rate}, constant {constant})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Pointwise bound on `|g(p)|`.
    pub fn bound(&self, p: f64) -> f64 {
        match *self {
            Decay::Algebraic { order, constant, from } => {
                if p < from.max(f64::MIN_POSITIVE) {
                    f64::INFINITY
                } else {
                    constant * p.powf(-order)
                }
            }
            Decay::Exponential { rate, constant } => constant * (-rate * p).exp(),
        }
    }

    /// Bound on `int_P^inf |g(p)| dp`.
    pub fn tail(&self, p: f64) -> f64 {
        match *self {
            Decay::Algebraic { order, constant, from } => {
                if p < from.max(f64::MIN_POSITIVE) {
                    f64::INFINITY
                } else {
                    constant / ((order - 1.0) * p.powf(order - 1.0))
                }
            }
            Decay::Exponential { rate, constant } => constant / rate * (-rate * p).exp(),
        }
    }

    /// Bound on `int_P^inf |g(p)| / p dp`.
    pub fn tail_over_p(&self, p: f64) -> f64 {
        match *self {
            Decay::Algebraic { order, constant, from } => {
                if p < from.max(f64::MIN_POSITIVE) {
                    f64::INFINITY
                } else {
                    constant / (order * p.powf(order))
                }
            }
            Decay::Exponential { .. } => self.tail(p) / p,
        }
    }

    /// Smallest `P` with `tail(P) <= target`.
    pub fn truncation_point(&self, target: f64) -> f64 {
        match *self {
            Decay::Algebraic { order, constant, from } => {
                let p = (constant / ((order - 1.0) * target)).powf(1.0 / (order - 1.0));
                p.max(from)
            }
            Decay::Exponential { rate, constant } => {
                ((constant / (rate * target)).ln() / rate).max(0.0)
            }
        }
    }
}

/// Adaptive integral of `f` over `[a, b]` returning `(value, error estimate)`.
pub fn integrate_finite<F>(
    f: F,
    a: f64,
    b: f64,
    cfg: &QuadConfig,
) -> Result<(Complex64, f64), QuadError>
where
    F: Fn(f64) -> Complex64,
{
    cfg.validate()?;
    integrate_breakpoints(&f, &[a, b], cfg)
}
