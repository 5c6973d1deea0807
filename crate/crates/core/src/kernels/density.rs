//! Spectral densities `rho(p)` over the photon momentum magnitude.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use super::KernelError;
use crate::quad::{Decay, Envelope};

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type ComplexFn = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

/// `(alpha^2 / 3 pi^2) p / ((p/alpha)^2 + 9/4)^4`, the angle-integrated
/// vacuum density of the hydrogen 2P -> 1S transition.
pub fn hydrogen_vacuum_density(p: f64, alpha: f64) -> Result<f64, KernelError> {
    if !(p >= 0.0) {
        return Err(KernelError::InvalidParams(format!(
            "momentum magnitude must be nonnegative, got {p}"
        )));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(KernelError::InvalidParams(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    Ok(hydrogen_rho(p, alpha))
}

fn hydrogen_rho(p: f64, alpha: f64) -> f64 {
    let u = p / alpha;
    alpha * alpha / (3.0 * PI * PI) * p / (u * u + 2.25).powi(4)
}

/// Nonnegative density with its decay metadata and, optionally, an analytic
/// continuation to complex momenta.
#[derive(Clone)]
pub struct SpectralDensity {
    eval: RealFn,
    extension: Option<ComplexFn>,
    decay: Decay,
    peak: f64,
    mass: Option<f64>,
    label: String,
}

impl fmt::Debug for SpectralDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralDensity")
            .field("label", &self.label)
            .field("decay", &self.decay)
            .field("peak", &self.peak)
            .field("analytic", &self.extension.is_some())
            .finish()
    }
}

impl SpectralDensity {
    /// A custom density. `peak` is where `rho` is largest; past `2 * peak`
    /// the density must be monotone.
    pub fn new<F>(
        label: impl Into<String>,
        rho: F,
        decay: Decay,
        peak: f64,
    ) -> Result<Self, KernelError>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        decay.validate()?;
        if !(peak >= 0.0 && peak.is_finite()) {
            return Err(KernelError::InvalidParams(format!(
                "peak must be finite and nonnegative, got {peak}"
            )));
        }
        Ok(Self {
            eval: Arc::new(rho),
            extension: None,
            decay,
            peak,
            mass: None,
            label: label.into(),
        })
    }

    /// Attach the continuation `z -> rho(z)` used off the real axis.
    pub fn with_extension<G>(mut self, ext: G) -> Self
    where
        G: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    {
        self.extension = Some(Arc::new(ext));
        self
    }

    /// Known `int_0^inf rho`, i.e. `S(0)`.
    pub fn with_mass(mut self, mass: f64) -> Self {
        self.mass = Some(mass);
        self
    }

    pub fn hydrogen(alpha: f64) -> Result<Self, KernelError> {
        hydrogen_vacuum_density(0.0, alpha)?;
        let a2 = alpha * alpha;
        let pref = a2 / (3.0 * PI * PI);
        let decay = Decay::Algebraic {
            order: 7.0,
            constant: pref * alpha.powi(8),
            from: 0.0,
        };
        let d = Self::new(
            "hydrogen_vacuum",
            move |p| hydrogen_rho(p, alpha),
            decay,
            alpha * (9.0f64 / 28.0).sqrt(),
        )?;
        Ok(d
            .with_extension(move |z: Complex64| {
                let u = z / alpha;
                pref * z / (u * u + 2.25).powi(4)
            })
            .with_mass(32.0 * alpha.powi(4) / (6561.0 * PI * PI)))
    }

    /// `A p exp(-p / cutoff)`, with `S(tau) = A cutoff^2 / (1 + i cutoff tau)^2`.
    pub fn ohmic(amplitude: f64, cutoff: f64) -> Result<Self, KernelError> {
        if !(amplitude >= 0.0 && amplitude.is_finite() && cutoff > 0.0 && cutoff.is_finite()) {
            return Err(KernelError::InvalidParams(format!(
                "ohmic density needs amplitude >= 0 and cutoff > 0 (got {amplitude}, {cutoff})"
            )));
        }
        let decay = Decay::Exponential {
            rate: 0.5 / cutoff,
            constant: (2.0 * amplitude * cutoff / std::f64::consts::E).max(f64::MIN_POSITIVE),
        };
        let d = Self::new(
            "ohmic",
            move |p| amplitude * p * (-p / cutoff).exp(),
            decay,
            cutoff,
        )?;
        Ok(d
            .with_extension(move |z: Complex64| amplitude * z * (-z / cutoff).exp())
            .with_mass(amplitude * cutoff * cutoff))
    }

    /// Density from tabulated `(p, rho)` pairs with strictly increasing `p`.
    ///
    /// Natural cubic spline between nodes (clamped at zero), linear to zero
    /// below the first node and `rho_last (p_last / p)^tail_order` beyond the
    /// last one. No analytic extension.
    pub fn from_table(
        label: impl Into<String>,
        points: &[(f64, f64)],
        tail_order: f64,
    ) -> Result<Self, KernelError> {
        if points.len() < 3 {
            return Err(KernelError::Table(format!(
                "need at least 3 rows, got {}",
                points.len()
            )));
        }
        for (i, &(p, r)) in points.iter().enumerate() {
            if !(p.is_finite() && r.is_finite() && p >= 0.0 && r >= 0.0) {
                return Err(KernelError::Table(format!(
                    "row {}: p and rho must be finite and nonnegative ({p}, {r})",
                    i + 1
                )));
            }
            if i > 0 && p <= points[i - 1].0 {
                return Err(KernelError::Table(format!(
                    "row {}: momenta must be strictly increasing",
                    i + 1
                )));
            }
        }
        if !(tail_order >= 2.0) {
            return Err(KernelError::Table(format!(
                "tail_order must be at least 2, got {tail_order}"
            )));
        }
        let spline = NaturalSpline::new(points);
        let (p_last, r_last) = *points.last().expect("nonempty");
        let (p_first, r_first) = points[0];
        let peak = points
            .iter()
            .fold((0.0, f64::NEG_INFINITY), |acc, &(p, r)| if r > acc.1 { (p, r) } else { acc })
            .0;
        let decay = Decay::Algebraic {
            order: tail_order,
            constant: (r_last * p_last.powf(tail_order)).max(f64::MIN_POSITIVE),
            from: p_last,
        };
        Self::new(
            label,
            move |p| {
                if p >= p_last {
                    r_last * (p_last / p).powf(tail_order)
                } else if p < p_first {
                    r_first * p / p_first
                } else {
                    spline.eval(p).max(0.0)
                }
            },
            decay,
            peak.max(p_first),
        )
    }

    /// Density `p |chi(p)|^2 / (6 pi^2)` of a direction-independent vector
    /// smearing profile `chi(|p|)`, given as rows `(p, chi_x, chi_y, chi_z)`.
    pub fn from_chi_table(
        label: impl Into<String>,
        rows: &[(f64, [f64; 3])],
        tail_order: f64,
    ) -> Result<Self, KernelError> {
        let points: Vec<(f64, f64)> = rows
            .iter()
            .map(|&(p, c)| (p, p * (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]) / (6.0 * PI * PI)))
            .collect();
        Self::from_table(label, &points, tail_order)
    }

    /// A copy scaled by `factor >= 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self, KernelError> {
        if !(factor >= 0.0 && factor.is_finite()) {
            return Err(KernelError::InvalidParams(format!(
                "scale factor must be nonnegative, got {factor}"
            )));
        }
        let inner = self.eval.clone();
        let decay = match self.decay {
            Decay::Algebraic { order, constant, from } => Decay::Algebraic {
                order,
                constant: (constant * factor).max(f64::MIN_POSITIVE),
                from,
            },
            Decay::Exponential { rate, constant } => Decay::Exponential {
                rate,
                constant: (constant * factor).max(f64::MIN_POSITIVE),
            },
        };
        Ok(Self {
            eval: Arc::new(move |p| factor * inner(p)),
            extension: self.extension.clone().map(|e| {
                Arc::new(move |z| factor * e(z)) as ComplexFn
            }),
            decay,
            peak: self.peak,
            mass: self.mass.map(|m| m * factor),
            label: format!("{}*{factor}", self.label),
        })
    }

    pub fn eval(&self, p: f64) -> f64 {
        (self.eval)(p)
    }

    /// `rho(z)` at complex momentum, when a continuation is available.
    pub fn eval_complex(&self, z: Complex64) -> Option<Complex64> {
        self.extension.as_ref().map(|e| e(z))
    }

    pub fn has_extension(&self) -> bool {
        self.extension.is_some()
    }

    pub fn decay(&self) -> Decay {
        self.decay
    }

    pub fn peak(&self) -> f64 {
        self.peak
    }

    pub fn mass(&self) -> Option<f64> {
        self.mass
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Momentum scale of the density (peak, or the decay scale when the
    /// peak sits at the origin).
    pub fn width(&self) -> f64 {
        let d = match self.decay {
            Decay::Algebraic { from, .. } => from,
            Decay::Exponential { rate, .. } => 0.5 / rate,
        };
        self.peak.max(d).max(f64::MIN_POSITIVE)
    }

    pub fn envelope(&self) -> Envelope<'_> {
        Envelope {
            f: &*self.eval,
            decay: self.decay,
            peak: self.peak,
            mass: self.mass,
        }
    }
}

/// Natural cubic spline through `(x_i, y_i)`.
struct NaturalSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl NaturalSpline {
    fn new(points: &[(f64, f64)]) -> Self {
        let n = points.len();
        let x: Vec<f64> = points.iter().map(|p| p.0).collect();
        let y: Vec<f64> = points.iter().map(|p| p.1).collect();
        // second derivatives by the Thomas algorithm, m_0 = m_{n-1} = 0
        let mut m = vec![0.0; n];
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        for i in 1..n - 1 {
            let h0 = x[i] - x[i - 1];
            let h1 = x[i + 1] - x[i];
            let rhs = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
            let diag = 2.0 * (h0 + h1) - h0 * c[i - 1];
            c[i] = h1 / diag;
            d[i] = (rhs - h0 * d[i - 1]) / diag;
        }
        for i in (1..n - 1).rev() {
            m[i] = d[i] - c[i] * m[i + 1];
        }
        Self { x, y, m }
    }

    fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        let i = match self.x.partition_point(|&v| v <= t) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        };
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hydrogen_density_examples() {
        assert_eq!(hydrogen_vacuum_density(0.0, 1.0).unwrap(), 0.0);
        let v = hydrogen_vacuum_density(1.0, 1.0).unwrap();
        assert!((v - 1.0 / (3.0 * PI * PI * 3.25f64.powi(4))).abs() < 1e-18);
        assert!((v - 3.027e-4).abs() < 1e-6);
        assert!(hydrogen_vacuum_density(-1e-3, 1.0).is_err());
    }

    #[test]
    fn hydrogen_density_peak() {
        let alpha = 0.3;
        let p_star = alpha * (9.0f64 / 28.0).sqrt();
        assert!((p_star / alpha - 0.56695).abs() < 1e-5);
        let f = |p| hydrogen_vacuum_density(p, alpha).unwrap();
        let h = 1e-4 * alpha;
        assert!(f(p_star) > f(p_star - h) && f(p_star) > f(p_star + h));
        assert_eq!(SpectralDensity::hydrogen(alpha).unwrap().peak(), p_star);
    }

    #[test]
    fn decay_bounds_hold() {
        let h = SpectralDensity::hydrogen(0.5).unwrap();
        let o = SpectralDensity::ohmic(1.3, 0.7).unwrap();
        for k in 0..400 {
            let p = 0.01 + k as f64 * 0.25;
            assert!(h.eval(p) <= h.decay().bound(p) * (1.0 + 1e-12));
            assert!(o.eval(p) <= o.decay().bound(p) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn extension_matches_on_real_axis() {
        let h = SpectralDensity::hydrogen(0.7).unwrap();
        let o = SpectralDensity::ohmic(1.0, 2.0).unwrap();
        for p in [0.1, 0.5, 1.7, 4.0] {
            let z = Complex64::new(p, 0.0);
            assert!((h.eval_complex(z).unwrap().re - h.eval(p)).abs() < 1e-15);
            assert!((o.eval_complex(z).unwrap().re - o.eval(p)).abs() < 1e-15);
        }
    }

    #[test]
    fn spline_reproduces_cubic_data_closely() {
        let pts: Vec<(f64, f64)> = (0..=200)
            .map(|k| {
                let p = k as f64 * 0.05;
                (p, p * (-p).exp())
            })
            .collect();
        let d = SpectralDensity::from_table("t", &pts, 4.0).unwrap();
        for p in [0.33, 1.01, 2.777, 7.5] {
            assert!((d.eval(p) - p * (-p).exp()).abs() < 1e-5, "{p}");
        }
        // tail beyond the table
        let (pl, rl) = pts[200];
        assert!((d.eval(2.0 * pl) - rl / 16.0).abs() < 1e-15);
        assert!(d.eval_complex(Complex64::new(1.0, 0.0)).is_none());
    }

    #[test]
    fn table_validation() {
        assert!(SpectralDensity::from_table("t", &[(0.0, 0.0), (1.0, 1.0)], 4.0).is_err());
        assert!(
            SpectralDensity::from_table("t", &[(0.0, 0.0), (1.0, 1.0), (0.5, 1.0)], 4.0).is_err()
        );
        assert!(
            SpectralDensity::from_table("t", &[(0.0, 0.0), (1.0, -1.0), (2.0, 1.0)], 4.0).is_err()
        );
        assert!(
            SpectralDensity::from_table("t", &[(0.0, 0.0), (1.0, 1.0), (2.0, 1.0)], 1.0).is_err()
        );
    }

    #[test]
    fn chi_table_density() {
        let rows = [(0.0, [0.0, 0.0, 1.0]), (1.0, [0.0, 1.0, 1.0]), (2.0, [0.5, 0.0, 0.0])];
        let d = SpectralDensity::from_chi_table("c", &rows, 3.0).unwrap();
        assert!((d.eval(1.0) - 2.0 / (6.0 * PI * PI)).abs() < 1e-15);
    }

    #[test]
    fn scaling_doubles() {
        let o = SpectralDensity::ohmic(1.0, 1.0).unwrap();
        let o2 = o.scaled(2.0).unwrap();
        assert_eq!(o2.eval(0.8), 2.0 * o.eval(0.8));
        assert_eq!(o2.mass(), Some(2.0));
    }
}
