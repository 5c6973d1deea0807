//! Laplace-domain analysis of stationary kernels.
//!
//! `S^(s) = int_0^inf e^{-st} S(t) dt = int_0^inf rho(p) / (s + i p) dp`,
//! `c^(s) = 1 / (s + alpha S^(s - i omega))`. `S^` has a branch cut along
//! `s in -i [0, inf)`; its continuation through the cut (second sheet) is
//! `S^_II(s) = S^(s) + 2 pi rho(i s)` for `Re s < 0`, which is where the
//! resonance pole of `c^` lives.

mod bromwich;

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::atom::ModelParams;
use crate::kernels::SpectralDensity;
use crate::quad::{integrate_breakpoints, QuadConfig, QuadError};

pub use bromwich::{bromwich_invert, BromwichResult};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LaplaceError {
    #[error("S^(s) needs Re s > 0 (got {0}); use the second-sheet variant")]
    LeftHalfPlane(Complex64),
    #[error("density '{0}' has no analytic extension; pole search refused")]
    NoExtension(String),
    #[error("Newton iteration did not converge in {iterations} steps (last s = {last}, |F| = {residual:e})")]
    Divergence {
        iterations: usize,
        last: Complex64,
        residual: f64,
    },
    #[error("pole at {0} lies in the right half plane")]
    UnphysicalPole(Complex64),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error(transparent)]
    Quad(#[from] QuadError),
}

/// `int_0^L dp / (s + i p)` with the argument tracked continuously along the
/// path (valid on either side of the imaginary axis; `Re s = +0` gives the
/// right-hand limit).
fn segment_integral(s: Complex64, l: f64) -> Complex64 {
    let (a, b) = (s.re, s.im);
    let ln_ratio = (Complex64::new(a, b + l).norm() / s.norm()).ln();
    let darg = ((b + l) / a).atan() - (b / a).atan();
    let darg = if a == 0.0 && a.is_sign_positive() {
        // atan(+-inf) handles the limit, but b = 0 gives 0/0
        (b + l).signum() * PI / 2.0 - if b == 0.0 { 0.0 } else { b.signum() * PI / 2.0 }
    } else {
        darg
    };
    Complex64::new(0.0, -1.0) * Complex64::new(ln_ratio, darg)
}

/// `int_0^inf rho(p) / (s + i p) dp` at any `s` off the cut, with the pole
/// contribution near `p0 = -Im s` subtracted analytically. `Re s = +0` is
/// the limit from the right.
fn cauchy(rho: &SpectralDensity, s: Complex64, cfg: &QuadConfig) -> Result<Complex64, LaplaceError> {
    if !(s.re.is_finite() && s.im.is_finite()) {
        return Err(LaplaceError::Invalid(format!("s must be finite, got {s}")));
    }
    let width = rho.width();
    let p0 = -s.im;
    let subtract = p0 > 0.0 && rho.eval(p0) > 0.0;
    let r0 = if subtract { rho.eval(p0) } else { 0.0 };
    let l = 2.0 * p0;
    let integrand = |p: f64| {
        let num = if subtract && p <= l { rho.eval(p) - r0 } else { rho.eval(p) };
        num / Complex64::new(s.re, s.im + p)
    };
    let mass = rho.mass().unwrap_or_else(|| rho.envelope().estimate_mass().unwrap_or(1.0));
    let tol = cfg.abs_tol.max(cfg.rel_tol * mass / (s.norm() + width));
    // truncation: int_P^inf rho / |s + ip| <= tail(P) / (P - |s|)
    let mut upper = 4.0 * (width + s.norm()) + if subtract { l } else { 0.0 };
    for _ in 0..200 {
        if rho.decay().tail(upper) / (upper - s.norm()).max(width) <= 0.1 * tol {
            break;
        }
        upper *= 1.5;
    }
    let mut pts = vec![0.0];
    let mut push = |x: f64| {
        if x > *pts.last().expect("nonempty") && x < upper {
            pts.push(x);
        }
    };
    // graded points around the near-singular location and geometric after
    let scale = width / 64.0;
    let mut x = scale;
    let mut marks = Vec::new();
    if subtract {
        marks.extend([p0, l]);
        let d = s.re.abs().max(1e-6 * p0);
        for k in 0..30 {
            let off = d * 4f64.powi(k);
            if off >= p0 {
                break;
            }
            marks.push(p0 - off);
            marks.push(p0 + off);
        }
    }
    while x < upper {
        marks.push(x);
        x *= 2.0;
    }
    marks.sort_by(f64::total_cmp);
    for m in marks {
        push(m);
    }
    pts.push(upper);
    let local = QuadConfig {
        abs_tol: 0.5 * tol,
        max_subdivisions: cfg.max_subdivisions + 4 * pts.len(),
        ..*cfg
    };
    let (rest, _) = integrate_breakpoints(&integrand, &pts, &local)?;
    Ok(if subtract { rest + r0 * segment_integral(s, l) } else { rest })
}

/// `S^(s) = int_0^inf rho(p) / (s + ip) dp`, `Re s > 0`.
pub fn s_hat(rho: &SpectralDensity, s: Complex64, cfg: &QuadConfig) -> Result<Complex64, LaplaceError> {
    if !(s.re > 0.0) {
        return Err(LaplaceError::LeftHalfPlane(s));
    }
    cauchy(rho, s, cfg)
}

/// `S^` continued through the cut on the negative imaginary axis:
/// `S^(s)` for `Re s >= 0` (right-hand limit on the axis), and
/// `S^(s) + 2 pi rho(i s)` for `Re s < 0`.
pub fn s_hat_second_sheet(
    rho: &SpectralDensity,
    s: Complex64,
    cfg: &QuadConfig,
) -> Result<Complex64, LaplaceError> {
    if !rho.has_extension() {
        return Err(LaplaceError::NoExtension(rho.label().to_string()));
    }
    if s.re >= 0.0 {
        let s = Complex64::new(s.re.abs(), s.im);
        return cauchy(rho, s, cfg);
    }
    let jump = rho
        .eval_complex(Complex64::new(0.0, 1.0) * s)
        .expect("extension checked above");
    Ok(cauchy(rho, s, cfg)? + 2.0 * PI * jump)
}

/// Weak-coupling decay rate of `|c|^2`: `2 pi alpha rho(omega)`
/// (zero for `omega <= 0`).
pub fn markov_rate(rho: &SpectralDensity, params: &ModelParams) -> f64 {
    if params.omega > 0.0 {
        2.0 * PI * params.alpha * rho.eval(params.omega)
    } else {
        0.0
    }
}

/// A converged root of `F(s) = s + alpha S^_II(s - i omega)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pole {
    pub s: Complex64,
    pub residual: f64,
    pub iterations: usize,
}

impl Pole {
    /// Decay rate of `|c|^2`: `-2 Re s0`.
    pub fn gamma(&self) -> f64 {
        -2.0 * self.s.re
    }

    /// Level shift in the frame of `c`: `c ~ e^{-i shift t}`, i.e. `-Im s0`.
    pub fn shift(&self) -> f64 {
        -self.s.im
    }
}

fn pole_function(
    rho: &SpectralDensity,
    params: &ModelParams,
    s: Complex64,
    cfg: &QuadConfig,
) -> Result<Complex64, LaplaceError> {
    Ok(s + params.alpha * s_hat_second_sheet(rho, s - Complex64::new(0.0, params.omega), cfg)?)
}

/// Newton iteration on `F(z) = 0` with a central-difference derivative of
/// step `h`. Stops when `|F| < abs_tol` and the last step is below
/// `rel_step * |z|`.
pub fn find_root<F>(
    f: F,
    start: Complex64,
    h: f64,
    abs_tol: f64,
    rel_step: f64,
    max_iter: usize,
) -> Result<(Complex64, f64, usize), LaplaceError>
where
    F: Fn(Complex64) -> Result<Complex64, LaplaceError>,
{
    let mut z = start;
    let mut fz = f(z)?;
    for it in 1..=max_iter {
        let d = (f(z + h)? - f(z - h)?) / (2.0 * h);
        if d.norm() == 0.0 || !d.re.is_finite() {
            break;
        }
        let step = fz / d;
        z -= step;
        fz = f(z)?;
        if fz.norm() < abs_tol && step.norm() <= rel_step * z.norm().max(f64::MIN_POSITIVE) {
            return Ok((z, fz.norm(), it));
        }
    }
    Err(LaplaceError::Divergence {
        iterations: max_iter,
        last: z,
        residual: fz.norm(),
    })
}

/// First-order pole estimate `-alpha S^(0+ - i omega)`.
pub fn pole_seed(
    rho: &SpectralDensity,
    params: &ModelParams,
    cfg: &QuadConfig,
) -> Result<Complex64, LaplaceError> {
    Ok(-params.alpha * cauchy(rho, Complex64::new(0.0, -params.omega), cfg)?)
}

/// Resonance pole of `c^(s)`, by Newton from `s_init` (default: the
/// first-order seed). Converges to `|F(s0)| < 1e-12`.
pub fn find_pole(
    rho: &SpectralDensity,
    params: &ModelParams,
    s_init: Option<Complex64>,
    cfg: &QuadConfig,
) -> Result<Pole, LaplaceError> {
    if !rho.has_extension() {
        return Err(LaplaceError::NoExtension(rho.label().to_string()));
    }
    let start = match s_init {
        Some(s) => s,
        None => pole_seed(rho, params, cfg)?,
    };
    let h = 1e-6 * rho.width().min(start.norm().max(1e-3 * rho.width()));
    let (s, residual, iterations) =
        find_root(|s| pole_function(rho, params, s, cfg), start, h, 1e-12, 1e-10, 50)?;
    if s.re > 0.0 {
        return Err(LaplaceError::UnphysicalPole(s));
    }
    Ok(Pole { s, residual, iterations })
}

/// Newton from 8 seeds in the strip `|Im s| <= width`; distinct converged
/// roots with `Re s <= 0`, slowest-decaying first.
pub fn find_poles(
    rho: &SpectralDensity,
    params: &ModelParams,
    cfg: &QuadConfig,
) -> Result<Vec<Pole>, LaplaceError> {
    if !rho.has_extension() {
        return Err(LaplaceError::NoExtension(rho.label().to_string()));
    }
    let seed = pole_seed(rho, params, cfg)?;
    let width = rho.width();
    let depth = seed.re.abs().max(1e-3 * params.alpha * width);
    let mut seeds = vec![seed];
    for k in 0..7 {
        let y = -width + 2.0 * width * k as f64 / 6.0;
        seeds.push(Complex64::new(-depth, y));
    }
    let found: Vec<Option<Pole>> = seeds
        .par_iter()
        .map(|&s| find_pole(rho, params, Some(s), cfg).ok())
        .collect();
    let mut poles: Vec<Pole> = Vec::new();
    for p in found.into_iter().flatten() {
        if p.s.im.abs() > width {
            continue;
        }
        let tol = 1e-8 * p.s.norm().max(1e-300);
        if poles.iter().all(|q| (q.s - p.s).norm() > tol) {
            poles.push(p);
        }
    }
    poles.sort_by(|a, b| b.s.re.total_cmp(&a.s.re));
    Ok(poles)
}

/// Rates and pole of one stationary problem.
#[derive(Debug, Clone)]
pub struct LaplaceAnalysis {
    pub density: SpectralDensity,
    pub params: ModelParams,
    /// `None` when the density has no analytic extension.
    pub pole: Option<Pole>,
    pub gamma_markov: f64,
}

impl LaplaceAnalysis {
    /// Computes the Markov rate and, when possible, the pole.
    pub fn run(
        density: &SpectralDensity,
        params: &ModelParams,
        cfg: &QuadConfig,
    ) -> Result<Self, LaplaceError> {
        let pole = if density.has_extension() {
            Some(find_pole(density, params, None, cfg)?)
        } else {
            None
        };
        Ok(Self {
            density: density.clone(),
            params: *params,
            pole,
            gamma_markov: markov_rate(density, params),
        })
    }

    pub fn gamma_pole(&self) -> f64 {
        self.pole.map_or(f64::NAN, |p| p.gamma())
    }

    pub fn shift(&self) -> f64 {
        self.pole.map_or(f64::NAN, |p| p.shift())
    }

    /// `key = value` lines: gamma_markov, gamma_pole, pole_re, pole_im,
    /// lamb_shift, residual.
    pub fn summary_pairs(&self) -> Vec<(&'static str, f64)> {
        let (re, im, res) = self
            .pole
            .map_or((f64::NAN, f64::NAN, f64::NAN), |p| (p.s.re, p.s.im, p.residual));
        vec![
            ("gamma_markov", self.gamma_markov),
            ("gamma_pole", self.gamma_pole()),
            ("pole_re", re),
            ("pole_im", im),
            ("lamb_shift", self.shift()),
            ("residual", res),
        ]
    }
}
