//! Field-state kernels `S(t,s)`: smeared two-point functions of the initial
//! field state.
//!
//! For stationary states `S(t,s) = S(t-s)` with
//! `S(tau) = int_0^inf rho(p) e^{-i p tau} dp`. The polarization sum is the
//! transverse projector, which for the hydrogen transition is folded into
//! the angle-integrated density `rho`.

mod density;
mod squeeze;

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::atom::SmearingFunction;
use crate::quad::{oscillatory_halfline, QuadConfig, QuadError};

pub use density::{hydrogen_vacuum_density, SpectralDensity};
pub use squeeze::{
    concentrated_amplitude, concentrated_envelope, delta_from_modes, squeezed_delta_concentrated,
    squeezed_delta_general, CVec3, ModeFunction, SqueezeParams, Wavepacket,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error("squeezed_general state needs a wavepacket")]
    MissingWavepacket,
    #[error("invalid kernel parameters: {0}")]
    InvalidParams(String),
    #[error("invalid density table: {0}")]
    Table(String),
    #[error("kernel '{0}' is not stationary")]
    NotStationary(String),
}

/// `S(tau) = int_0^inf rho(p) e^{-i p tau} dp`.
pub fn vacuum_kernel(
    tau: f64,
    rho: &SpectralDensity,
    cfg: &QuadConfig,
) -> Result<Complex64, QuadError> {
    oscillatory_halfline(&rho.envelope(), tau, cfg)
}

type LagFn = Arc<dyn Fn(f64) -> Result<Complex64, KernelError> + Send + Sync>;
type GeneralFn = Arc<dyn Fn(f64, f64) -> Result<Complex64, KernelError> + Send + Sync>;

/// One additive piece of a kernel.
#[derive(Clone)]
pub enum KernelPart {
    /// Depends on `t - s` only.
    Lag(LagFn),
    /// Squeezed correction built from a mode function.
    Squeeze { mode: ModeFunction, sc: f64, sh2: f64 },
    /// Arbitrary `(t, s)` dependence.
    General(GeneralFn),
}

impl KernelPart {
    fn is_stationary(&self) -> bool {
        matches!(self, KernelPart::Lag(_))
    }
}

/// A kernel `S(t,s)` as a sum of parts. Immutable and shareable across
/// threads.
#[derive(Clone)]
pub struct KernelEvaluator {
    parts: Vec<KernelPart>,
    label: String,
}

impl fmt::Debug for KernelEvaluator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KernelEvaluator")
            .field("label", &self.label)
            .field("parts", &self.parts.len())
            .field("stationary", &self.is_stationary())
            .finish()
    }
}

impl KernelEvaluator {
    pub fn from_parts(label: impl Into<String>, parts: Vec<KernelPart>) -> Self {
        Self {
            parts,
            label: label.into(),
        }
    }

    /// Stationary kernel from `tau -> S(tau)`. The closure is also called at
    /// negative lags when evaluated directly, so it should be Hermitian.
    pub fn stationary<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64) -> Complex64 + Send + Sync + 'static,
    {
        Self::from_parts(label, vec![KernelPart::Lag(Arc::new(move |tau| Ok(f(tau))))])
    }

    pub fn general<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64, f64) -> Complex64 + Send + Sync + 'static,
    {
        Self::from_parts(label, vec![KernelPart::General(Arc::new(move |t, s| Ok(f(t, s))))])
    }

    /// Vacuum kernel of a spectral density.
    pub fn from_density(rho: &SpectralDensity, cfg: &QuadConfig) -> Result<Self, KernelError> {
        cfg.validate()?;
        let rho = rho.clone();
        let cfg = *cfg;
        let label = format!("vacuum[{}]", rho.label());
        Ok(Self::from_parts(
            label,
            vec![KernelPart::Lag(Arc::new(move |tau| Ok(vacuum_kernel(tau, &rho, &cfg)?)))],
        ))
    }

    pub fn with_part(mut self, part: KernelPart, label: impl Into<String>) -> Self {
        self.parts.push(part);
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_stationary(&self) -> bool {
        self.parts.iter().all(KernelPart::is_stationary)
    }

    pub fn parts(&self) -> &[KernelPart] {
        &self.parts
    }

    pub fn eval(&self, t: f64, s: f64) -> Result<Complex64, KernelError> {
        let mut acc = Complex64::new(0.0, 0.0);
        for part in &self.parts {
            acc += match part {
                KernelPart::Lag(f) => f(t - s)?,
                KernelPart::Squeeze { mode, sc, sh2 } => {
                    delta_from_modes(mode.eval(t), mode.eval(s), *sc, *sh2)
                }
                KernelPart::General(f) => f(t, s)?,
            };
        }
        Ok(acc)
    }

    /// `S(tau)` of a stationary kernel.
    pub fn lag(&self, tau: f64) -> Result<Complex64, KernelError> {
        if !self.is_stationary() {
            return Err(KernelError::NotStationary(self.label.clone()));
        }
        self.eval(tau, 0.0)
    }

    /// Tabulates the kernel on the grid `t_k = k dt`, `k = 0..=n`.
    ///
    /// Stationary parts are sampled once per lag (in parallel), mode
    /// functions once per grid point; general parts stay on-the-fly.
    pub fn tabulate(&self, dt: f64, n: usize) -> Result<TabulatedKernel, KernelError> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(KernelError::InvalidParams(format!("dt must be positive, got {dt}")));
        }
        let lag_parts: Vec<&LagFn> = self
            .parts
            .iter()
            .filter_map(|p| match p {
                KernelPart::Lag(f) => Some(f),
                _ => None,
            })
            .collect();
        let lag = if lag_parts.is_empty() {
            None
        } else {
            let values: Result<Vec<Complex64>, KernelError> = (0..=n)
                .into_par_iter()
                .map(|k| {
                    let tau = k as f64 * dt;
                    let mut acc = Complex64::new(0.0, 0.0);
                    for f in &lag_parts {
                        acc += f(tau)?;
                    }
                    Ok(acc)
                })
                .collect();
            Some(values?)
        };
        let modes = self
            .parts
            .iter()
            .filter_map(|p| match p {
                KernelPart::Squeeze { mode, sc, sh2 } => Some((mode, *sc, *sh2)),
                _ => None,
            })
            .map(|(mode, sc, sh2)| {
                let f: Vec<Complex64> =
                    (0..=n).into_par_iter().map(|k| mode.eval(k as f64 * dt)).collect();
                (f, sc, sh2)
            })
            .collect();
        let general = self
            .parts
            .iter()
            .filter_map(|p| match p {
                KernelPart::General(f) => Some(f.clone()),
                _ => None,
            })
            .collect();
        Ok(TabulatedKernel {
            dt,
            n,
            lag,
            modes,
            general,
        })
    }
}

/// A kernel sampled on a uniform grid.
#[derive(Clone)]
pub struct TabulatedKernel {
    dt: f64,
    n: usize,
    lag: Option<Vec<Complex64>>,
    modes: Vec<(Vec<Complex64>, f64, f64)>,
    general: Vec<GeneralFn>,
}

impl TabulatedKernel {
    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.n + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_stationary(&self) -> bool {
        self.modes.is_empty() && self.general.is_empty()
    }

    /// `S(k dt)` for `k = 0..=n` when the kernel is stationary.
    pub fn lags(&self) -> Option<&[Complex64]> {
        if self.is_stationary() {
            self.lag.as_deref()
        } else {
            None
        }
    }

    /// `S(t_i, t_j)`; lags `j > i` use Hermiticity.
    pub fn get(&self, i: usize, j: usize) -> Result<Complex64, KernelError> {
        let mut acc = Complex64::new(0.0, 0.0);
        if let Some(lag) = &self.lag {
            acc += if i >= j { lag[i - j] } else { lag[j - i].conj() };
        }
        for (f, sc, sh2) in &self.modes {
            acc += delta_from_modes(f[i], f[j], *sc, *sh2);
        }
        for g in &self.general {
            acc += g(i as f64 * self.dt, j as f64 * self.dt)?;
        }
        Ok(acc)
    }

    /// `S(t_n, t_j)` for `j = 0..=n`.
    pub fn row(&self, n: usize) -> Result<Vec<Complex64>, KernelError> {
        (0..=n).map(|j| self.get(n, j)).collect()
    }
}

/// Initial field state.
#[derive(Debug, Clone)]
pub enum KernelState {
    Vacuum,
    SqueezedGeneral(SqueezeParams),
    SqueezedConcentrated(SqueezeParams),
    /// A ready-made evaluator (e.g. an analytic test kernel).
    Custom(KernelEvaluator),
}

/// Builds the kernel of `state` on top of the vacuum density `rho`.
///
/// Squeezed states with `r != 0` are non-stationary; with `r = 0` the
/// correction vanishes identically and is dropped.
pub fn make_kernel(
    state: &KernelState,
    rho: &SpectralDensity,
    chi: &SmearingFunction,
    cfg: &QuadConfig,
) -> Result<KernelEvaluator, KernelError> {
    let squeeze = |params: &SqueezeParams, mode: ModeFunction, name: &str| {
        let vac = KernelEvaluator::from_density(rho, cfg)?;
        if params.r == 0.0 {
            return Ok(vac);
        }
        let (sc, sh2) = params.coefficients();
        let label = format!("{name}[r={}]+{}", params.r, vac.label());
        Ok::<_, KernelError>(vac.with_part(KernelPart::Squeeze { mode, sc, sh2 }, label))
    };
    match state {
        KernelState::Vacuum => KernelEvaluator::from_density(rho, cfg),
        KernelState::SqueezedGeneral(p) => {
            if p.wavepacket.is_none() {
                return Err(KernelError::MissingWavepacket);
            }
            squeeze(p, ModeFunction::general(p, chi)?, "squeezed_general")
        }
        KernelState::SqueezedConcentrated(p) => {
            squeeze(p, ModeFunction::concentrated(p, chi), "squeezed_concentrated")
        }
        KernelState::Custom(k) => Ok(k.clone()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn s0_closed(alpha: f64) -> f64 {
        32.0 * alpha.powi(4) / (6561.0 * PI * PI)
    }

    #[test]
    fn hydrogen_moment() {
        let cfg = QuadConfig::default();
        for alpha in [1.0, 0.1] {
            let rho = SpectralDensity::hydrogen(alpha).unwrap();
            let s0 = vacuum_kernel(0.0, &rho, &cfg).unwrap();
            assert!(((s0.re - s0_closed(alpha)) / s0_closed(alpha)).abs() < 1e-8);
            assert!(s0.im.abs() < 1e-12 * s0_closed(alpha));
        }
        assert!((s0_closed(1.0) - 4.9417e-4).abs() < 1e-7);
    }

    /// Composite Simpson on [0, 200 alpha] with a fine grid plus the
    /// algebraic tail bound.
    fn brute_force(rho: &SpectralDensity, tau: f64, alpha: f64) -> (Complex64, f64) {
        let upper = 200.0 * alpha;
        let n = 2_000_000;
        let h = upper / n as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..=n {
            let p = k as f64 * h;
            let w = if k == 0 || k == n { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
            acc += rho.eval(p) * Complex64::new(0.0, -p * tau).exp() * w;
        }
        (acc * (h / 3.0), rho.decay().tail(upper))
    }

    #[test]
    fn hydrogen_kernel_against_brute_force() {
        let alpha = 1.0;
        let rho = SpectralDensity::hydrogen(alpha).unwrap();
        let cfg = QuadConfig::default();
        for tau in [0.5, 5.0, 50.0] {
            let v = vacuum_kernel(tau / alpha, &rho, &cfg).unwrap();
            let (b, tail) = brute_force(&rho, tau / alpha, alpha);
            assert!(tail < 1e-12);
            assert!((v - b).norm() < 1e-7 * s0_closed(alpha), "tau {tau}: {v} vs {b}");
        }
    }

    #[test]
    fn ohmic_kernel_closed_form() {
        let rho = SpectralDensity::ohmic(1.0, 1.0).unwrap();
        let cfg = QuadConfig::default();
        for tau in [0.0, 0.3, 2.0, 17.0, 150.0] {
            let v = vacuum_kernel(tau, &rho, &cfg).unwrap();
            let exact = 1.0 / Complex64::new(1.0, tau).powi(2);
            assert!((v - exact).norm() < 1e-10, "{tau}: {v} vs {exact}");
        }
    }

    #[test]
    fn riemann_lebesgue_decay() {
        let alpha = 0.5;
        let rho = SpectralDensity::hydrogen(alpha).unwrap();
        let v = vacuum_kernel(50.0 / alpha, &rho, &QuadConfig::default()).unwrap();
        assert!(v.norm() < 0.05 * s0_closed(alpha));
    }

    #[test]
    fn second_derivative_at_origin() {
        // S''(0) = -int p^2 rho; for hydrogen int u^3/(u^2+9/4)^4 du = 1/(12 (9/4)^2)
        let alpha = 1.0;
        let rho = SpectralDensity::hydrogen(alpha).unwrap();
        let cfg = QuadConfig::default();
        let h = 1e-2;
        let s = |t| vacuum_kernel(t, &rho, &cfg).unwrap();
        let d2 = (s(h) - 2.0 * s(0.0) + s(-h)) / (h * h);
        let exact = -alpha.powi(5) / (3.0 * PI * PI) / (12.0 * 2.25f64.powi(2));
        assert!(d2.im.abs() < 1e-9);
        assert!(((d2.re - exact) / exact).abs() < 1e-3, "{d2} vs {exact}");
    }

    #[test]
    fn make_kernel_flags() {
        let alpha = 0.5;
        let rho = SpectralDensity::hydrogen(alpha).unwrap();
        let chi = SmearingFunction::hydrogen_2p1s(alpha);
        let cfg = QuadConfig::default();
        let vac = make_kernel(&KernelState::Vacuum, &rho, &chi, &cfg).unwrap();
        assert!(vac.is_stationary());
        let p = SqueezeParams::real(0.5, [0.3, 0.0, 0.0], [0.0, 0.0, 1.0]).unwrap();
        let sq = make_kernel(&KernelState::SqueezedConcentrated(p.clone()), &rho, &chi, &cfg).unwrap();
        assert!(!sq.is_stationary());
        assert!(sq.lag(1.0).is_err());
        assert!(matches!(
            make_kernel(&KernelState::SqueezedGeneral(p), &rho, &chi, &cfg),
            Err(KernelError::MissingWavepacket)
        ));
        let p0 = SqueezeParams::real(0.0, [0.3, 0.0, 0.0], [0.0, 0.0, 1.0]).unwrap();
        let sq0 = make_kernel(&KernelState::SqueezedConcentrated(p0), &rho, &chi, &cfg).unwrap();
        assert!(sq0.is_stationary());
        for (t, s) in [(0.0, 0.0), (1.0, 4.0), (7.5, 2.0)] {
            assert!((sq0.eval(t, s).unwrap() - vac.eval(t, s).unwrap()).norm() < 1e-12);
        }
    }

    #[test]
    fn tabulated_matches_direct() {
        let alpha = 0.5;
        let rho = SpectralDensity::hydrogen(alpha).unwrap();
        let chi = SmearingFunction::hydrogen_2p1s(alpha);
        let cfg = QuadConfig::default();
        let p = SqueezeParams::real(0.5, [0.3, 0.0, 0.0], [0.0, 0.0, 1.0]).unwrap();
        let k = make_kernel(&KernelState::SqueezedConcentrated(p), &rho, &chi, &cfg).unwrap();
        let tab = k.tabulate(0.25, 20).unwrap();
        for (i, j) in [(0, 0), (5, 2), (2, 5), (20, 13)] {
            let a = tab.get(i, j).unwrap();
            let b = k.eval(i as f64 * 0.25, j as f64 * 0.25).unwrap();
            assert!((a - b).norm() < 1e-15 + 1e-10 * b.norm(), "{i},{j}");
        }
    }

    fn squeezed_kernel() -> KernelEvaluator {
        let alpha = 0.5;
        let rho = SpectralDensity::hydrogen(alpha).unwrap();
        let chi = SmearingFunction::hydrogen_2p1s(alpha);
        let p = SqueezeParams::real(0.5, [0.3, 0.0, 0.0], [0.0, 0.0, 1.0])
            .unwrap()
            .with_gaussian(0.05)
            .unwrap();
        make_kernel(&KernelState::SqueezedGeneral(p), &rho, &chi, &QuadConfig::default()).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]

        #[test]
        fn squeezed_kernel_is_hermitian(t in 0.0f64..40.0, s in 0.0f64..40.0) {
            let k = squeezed_kernel();
            let a = k.eval(t, s).unwrap();
            let b = k.eval(s, t).unwrap();
            prop_assert!((a - b.conj()).norm() < 1e-10);
        }

        #[test]
        fn vacuum_kernel_is_stationary_and_bounded(t in 0.0f64..100.0, s in 0.0f64..100.0, h in -20.0f64..20.0) {
            let rho = SpectralDensity::ohmic(1.0, 0.8).unwrap();
            let k = KernelEvaluator::from_density(&rho, &QuadConfig::default()).unwrap();
            let a = k.eval(t, s).unwrap();
            prop_assert!((a - k.eval(t + h, s + h).unwrap()).norm() < 1e-12);
            prop_assert!((a - k.eval(s, t).unwrap().conj()).norm() < 1e-12);
            prop_assert!(a.norm() <= 0.64 * (1.0 + 1e-10));
        }
    }
}
