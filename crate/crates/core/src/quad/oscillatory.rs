//! `int_0^inf g(p) e^{-i p tau} dp` for real envelopes with declared decay.

use num_complex::Complex64;

use super::gk::integrate_breakpoints;
use super::{Decay, QuadConfig, QuadError, TailStrategy};

const MAX_AITKEN_LEVELS: usize = 8;
const PLAIN_THRESHOLD: f64 = 2.0;

/// A real envelope `g` together with its decay metadata.
#[derive(Clone, Copy)]
pub struct Envelope<'a> {
    pub f: &'a (dyn Fn(f64) -> f64 + Sync),
    pub decay: Decay,
    /// Location of the maximum of `|g|`; beyond `2 * peak` the envelope is
    /// assumed monotone.
    pub peak: f64,
    /// `int_0^inf |g|`, used to turn the relative tolerance into an absolute
    /// one. Estimated on the fly when absent.
    pub mass: Option<f64>,
}

impl Envelope<'_> {
    fn characteristic_momentum(&self) -> f64 {
        let from_decay = match self.decay {
            Decay::Algebraic { order, constant, from } => from.max(constant.powf(1.0 / order)),
            Decay::Exponential { rate, .. } => 1.0 / rate,
        };
        self.peak.max(from_decay).max(f64::MIN_POSITIVE)
    }

    /// Crude `int_0^inf |g|`; only sets the tolerance scale.
    pub fn estimate_mass(&self) -> Result<f64, QuadError> {
        if let Some(m) = self.mass {
            return Ok(m);
        }
        let l = 50.0 * self.characteristic_momentum();
        let cfg = QuadConfig {
            rel_tol: 1e-6,
            abs_tol: f64::MIN_POSITIVE,
            max_subdivisions: 2000,
            tail_strategy: TailStrategy::TruncateWithBound,
        };
        let f = |p: f64| Complex64::new((self.f)(p).abs(), 0.0);
        let (v, _) = integrate_breakpoints(&f, &geometric_points(0.0, l, l / 1e4), &cfg)?;
        let tail = self.decay.tail(l);
        Ok(v.re + if tail.is_finite() { tail } else { 0.0 })
    }
}

/// `[a, s, 2s, 4s, ..., b]`
fn geometric_points(a: f64, b: f64, start: f64) -> Vec<f64> {
    let mut pts = vec![a];
    let mut x = a + start.max((b - a) * 1e-12);
    while x < b {
        pts.push(x);
        x = a + 2.0 * (x - a);
    }
    pts.push(b);
    pts
}

/// `int_0^inf g(p) e^{-i p tau} dp`.
///
/// Below `|tau| * peak = 2` the integrand is integrated directly up to the
/// truncation point implied by the decay bound. Above it the half line is cut
/// at the zeros `k pi / |tau|`, the panels past the envelope maximum are
/// summed one by one and the alternating partial sums are accelerated with
/// iterated Aitken extrapolation.
pub fn oscillatory_halfline(
    env: &Envelope<'_>,
    tau: f64,
    cfg: &QuadConfig,
) -> Result<Complex64, QuadError> {
    cfg.validate()?;
    env.decay.validate()?;
    if !tau.is_finite() {
        return Err(QuadError::InvalidConfig(format!("tau must be finite, got {tau}")));
    }
    let mass = env.estimate_mass()?;
    let tol = cfg.abs_tol.max(cfg.rel_tol * mass);
    let w = tau.abs();
    let value = if w == 0.0
        || w * env.peak < PLAIN_THRESHOLD
        || cfg.tail_strategy == TailStrategy::TruncateWithBound
    {
        plain(env, w, tol, cfg)?
    } else {
        between_zeros(env, w, tol, cfg)?
    };
    Ok(if tau < 0.0 { value.conj() } else { value })
}

fn integrand<'a>(env: &'a Envelope<'_>, w: f64) -> impl Fn(f64) -> Complex64 + 'a {
    move |p| (env.f)(p) * Complex64::new(0.0, -p * w).exp()
}

fn plain(env: &Envelope<'_>, w: f64, tol: f64, cfg: &QuadConfig) -> Result<Complex64, QuadError> {
    let scale = env.characteristic_momentum();
    let upper = env.decay.truncation_point(0.1 * tol).max(2.0 * env.peak);
    let mut pts = geometric_points(0.0, upper, scale / 64.0);
    if w > 0.0 {
        // keep at most a few oscillations per starting interval
        let per = 8.0 * std::f64::consts::PI / w;
        let mut refined = vec![pts[0]];
        for seg in pts.windows(2) {
            let n = (((seg[1] - seg[0]) / per).ceil() as usize).clamp(1, 4096);
            for k in 1..=n {
                refined.push(seg[0] + (seg[1] - seg[0]) * k as f64 / n as f64);
            }
        }
        pts = refined;
    }
    let local = QuadConfig {
        abs_tol: 0.5 * tol,
        max_subdivisions: cfg.max_subdivisions + pts.len(),
        ..*cfg
    };
    let (v, _) = integrate_breakpoints(&integrand(env, w), &pts, &local)?;
    Ok(v)
}

fn between_zeros(
    env: &Envelope<'_>,
    w: f64,
    tol: f64,
    cfg: &QuadConfig,
) -> Result<Complex64, QuadError> {
    let h = std::f64::consts::PI / w;
    let f = integrand(env, w);
    let monotone_from = match env.decay {
        Decay::Algebraic { from, .. } => from.max(2.0 * env.peak),
        Decay::Exponential { .. } => 2.0 * env.peak,
    };
    let k0 = ((monotone_from / h).ceil() as usize).max(1);
    let head_pts: Vec<f64> = (0..=k0).map(|k| k as f64 * h).collect();
    let head_cfg = QuadConfig {
        abs_tol: 0.25 * tol,
        max_subdivisions: cfg.max_subdivisions + k0,
        ..*cfg
    };
    let (head, _) = integrate_breakpoints(&f, &head_pts, &head_cfg)?;

    let panel_cfg = QuadConfig {
        abs_tol: 0.01 * tol,
        ..*cfg
    };
    let mut partial = vec![head];
    let mut sum = head;
    let mut previous: Option<Complex64> = None;
    for k in k0..k0 + cfg.max_subdivisions {
        let a = k as f64 * h;
        let (panel, _) = integrate_breakpoints(&f, &[a, a + h], &panel_cfg)?;
        sum += panel;
        partial.push(sum);
        if env.decay.tail(a + h) <= 0.1 * tol {
            return Ok(sum);
        }
        let n = partial.len();
        if n >= 5 {
            let window = &partial[n.saturating_sub(2 * MAX_AITKEN_LEVELS + 1)..];
            let estimate = accelerate(window);
            if let Some(prev) = previous {
                if (estimate - prev).norm() <= 0.1 * tol {
                    return Ok(estimate);
                }
            }
            previous = Some(estimate);
        }
    }
    Err(QuadError::AccelerationFailed {
        value: previous.unwrap_or(sum),
        panels: cfg.max_subdivisions,
    })
}

/// Iterated Aitken extrapolation applied to real and imaginary parts.
pub(crate) fn accelerate(sums: &[Complex64]) -> Complex64 {
    let re: Vec<f64> = sums.iter().map(|z| z.re).collect();
    let im: Vec<f64> = sums.iter().map(|z| z.im).collect();
    Complex64::new(aitken_iterated(&re), aitken_iterated(&im))
}

fn aitken_iterated(seq: &[f64]) -> f64 {
    let mut s = seq.to_vec();
    for _ in 0..MAX_AITKEN_LEVELS {
        if s.len() < 3 {
            break;
        }
        s = s
            .windows(3)
            .map(|t| {
                let d1 = t[1] - t[0];
                let d2 = t[2] - t[1];
                let den = d2 - d1;
                if den == 0.0 || den.abs() <= 1e3 * f64::EPSILON * t[2].abs() {
                    t[2]
                } else {
                    t[2] - d2 * d2 / den
                }
            })
            .collect();
    }
    *s.last().expect("non-empty sequence")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn exp_env(f: &(dyn Fn(f64) -> f64 + Sync)) -> Envelope<'_> {
        Envelope {
            f,
            decay: Decay::Exponential { rate: 1.0, constant: 1.0 },
            peak: 0.0,
            mass: Some(1.0),
        }
    }

    #[test]
    fn exponential_envelope_examples() {
        let g = |p: f64| (-p).exp();
        let env = exp_env(&g);
        let cfg = QuadConfig::default();
        let v0 = oscillatory_halfline(&env, 0.0, &cfg).unwrap();
        assert!((v0 - 1.0).norm() < 1e-10);
        let v1 = oscillatory_halfline(&env, 1.0, &cfg).unwrap();
        assert!((v1 - Complex64::new(0.5, -0.5)).norm() < 1e-10);
    }

    #[test]
    fn between_zeros_path_for_peaked_envelope() {
        // p e^{-p}: int = 1 / (1 + i tau)^2
        let g = |p: f64| p * (-p).exp();
        let env = Envelope {
            f: &g,
            decay: Decay::Exponential { rate: 0.5, constant: 2.0 / std::f64::consts::E },
            peak: 1.0,
            mass: None,
        };
        let cfg = QuadConfig::default();
        for tau in [0.5, 3.0, 10.0, 57.0, 200.0] {
            let v = oscillatory_halfline(&env, tau, &cfg).unwrap();
            let exact = Complex64::new(1.0, tau).powi(-2);
            assert!((v - exact).norm() < 1e-10, "tau {tau}: {v} vs {exact}");
        }
    }

    #[test]
    fn algebraic_envelope_accelerates() {
        // 1/(1+p^2): int cos(p tau) = pi/2 e^{-tau}
        let g = |p: f64| 1.0 / (1.0 + p * p);
        let env = Envelope {
            f: &g,
            decay: Decay::Algebraic { order: 2.0, constant: 1.0, from: 0.0 },
            peak: 1.0,
            mass: Some(std::f64::consts::FRAC_PI_2),
        };
        let cfg = QuadConfig::default().with_tolerances(1e-9, 1e-14);
        let v = oscillatory_halfline(&env, 5.0, &cfg).unwrap();
        assert!((v.re - std::f64::consts::FRAC_PI_2 * (-5.0f64).exp()).abs() < 1e-8, "{v}");
    }

    #[test]
    fn aitken_sums_alternating_series() {
        // ln 2 = 1 - 1/2 + 1/3 - ...
        let mut s = 0.0;
        let sums: Vec<Complex64> = (1..=17)
            .map(|k| {
                s += if k % 2 == 1 { 1.0 } else { -1.0 } / k as f64;
                Complex64::new(s, 0.0)
            })
            .collect();
        assert!((accelerate(&sums).re - 2f64.ln()).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn conjugation_symmetry(tau in 0.0f64..80.0) {
            let g = |p: f64| p * (-p).exp();
            let env = Envelope {
                f: &g,
                decay: Decay::Exponential { rate: 0.5, constant: 1.0 },
                peak: 1.0,
                mass: Some(1.0),
            };
            let cfg = QuadConfig::default();
            let a = oscillatory_halfline(&env, tau, &cfg).unwrap();
            let b = oscillatory_halfline(&env, -tau, &cfg).unwrap();
            prop_assert!((a - b.conj()).norm() <= 1e-10);
        }

        #[test]
        fn linearity(tau in 0.0f64..40.0) {
            fn g1(p: f64) -> f64 { p * (-p).exp() }
            fn g2(p: f64) -> f64 { (-2.0 * p).exp() }
            fn g12(p: f64) -> f64 { g1(p) + g2(p) }
            let d = Decay::Exponential { rate: 0.5, constant: 2.0 };
            let cfg = QuadConfig::default();
            let e = |f: &'static (dyn Fn(f64) -> f64 + Sync)| Envelope { f, decay: d, peak: 1.0, mass: Some(1.5) };
            let a = oscillatory_halfline(&e(&g1), tau, &cfg).unwrap();
            let b = oscillatory_halfline(&e(&g2), tau, &cfg).unwrap();
            let c = oscillatory_halfline(&e(&g12), tau, &cfg).unwrap();
            prop_assert!((a + b - c).norm() <= 1e-9);
        }
    }
}
