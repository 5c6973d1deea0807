//! Squeezed-state corrections to the vacuum kernel.
//!
//! For a squeezed state built on the wavepacket `f` the two-point function
//! changes by
//!
//! `dS(t,s) = -[F(t)F(s) + c.c.] sinh r cosh r + [conj(F(t))F(s) + c.c.] sinh^2 r`
//!
//! with the mode function
//! `F(t) = (2 pi)^{-3/2} int d^3p / sqrt(2|p|) (P_T(p) f(p)) . chi(p) e^{-i|p|t}`.
//! `dS` is real and symmetric, so the total kernel stays Hermitian.
//!
//! The general display is taken as authoritative for the sign of the
//! `sinh^2` term; the concentrated (plane-wave) form below is its
//! narrow-wavepacket limit.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use super::KernelError;
use crate::atom::{transverse_projection, SmearingFunction, Vec3};
use crate::quad::kronrod21_nodes;

pub type CVec3 = [Complex64; 3];

type Profile = Arc<dyn Fn(Vec3) -> CVec3 + Send + Sync>;

const RADIAL_PANELS: usize = 64;
const POLAR_PANELS: usize = 2;
const AZIMUTH_POINTS: usize = 32;
/// Gaussian support radius in units of sigma; exp(-7^2/2) ~ 2e-11.
const GAUSSIAN_CUTOFF: f64 = 7.0;

fn norm3(v: Vec3) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Wavepacket `f(p)` (polarization-vector valued) supported in the ball
/// `|p - center| <= radius`.
#[derive(Clone)]
pub struct Wavepacket {
    profile: Profile,
    center: Vec3,
    radius: f64,
    sigma: Option<f64>,
    label: String,
}

impl fmt::Debug for Wavepacket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Wavepacket")
            .field("label", &self.label)
            .field("center", &self.center)
            .field("radius", &self.radius)
            .finish()
    }
}

impl Wavepacket {
    pub fn new<F>(
        label: impl Into<String>,
        center: Vec3,
        radius: f64,
        profile: F,
    ) -> Result<Self, KernelError>
    where
        F: Fn(Vec3) -> CVec3 + Send + Sync + 'static,
    {
        if !(radius > 0.0 && radius.is_finite() && center.iter().all(|c| c.is_finite())) {
            return Err(KernelError::InvalidParams(format!(
                "wavepacket needs a finite centre and positive radius (radius {radius})"
            )));
        }
        Ok(Self {
            profile: Arc::new(profile),
            center,
            radius,
            sigma: None,
            label: label.into(),
        })
    }

    /// L2-normalized Gaussian `pi^{-3/4} sigma^{-3/2} exp(-|p-q|^2 / 2 sigma^2) d`.
    pub fn gaussian(q: Vec3, d: CVec3, sigma: f64) -> Result<Self, KernelError> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(KernelError::InvalidParams(format!(
                "wavepacket width must be positive, got {sigma}"
            )));
        }
        let norm = PI.powf(-0.75) * sigma.powf(-1.5);
        let mut w = Self::new("gaussian", q, GAUSSIAN_CUTOFF * sigma, move |p| {
            let r2 = (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2);
            let g = norm * (-0.5 * r2 / (sigma * sigma)).exp();
            [d[0] * g, d[1] * g, d[2] * g]
        })?;
        w.sigma = Some(sigma);
        Ok(w)
    }

    pub fn eval(&self, p: Vec3) -> CVec3 {
        (self.profile)(p)
    }

    pub fn center(&self) -> Vec3 {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Width of a Gaussian wavepacket.
    pub fn sigma(&self) -> Option<f64> {
        self.sigma
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

/// Amplitude `r`, carrier momentum `q`, polarization `d` and an optional
/// wavepacket. `amplitude` scales the concentrated form (the plane-wave
/// limit does not fix a normalization).
#[derive(Debug, Clone)]
pub struct SqueezeParams {
    pub r: f64,
    pub q: Vec3,
    pub d: CVec3,
    pub amplitude: f64,
    pub wavepacket: Option<Wavepacket>,
}

impl SqueezeParams {
    /// Validates `d . q = 0` and normalizes `d`.
    pub fn new(r: f64, q: Vec3, d: CVec3) -> Result<Self, KernelError> {
        if !r.is_finite() {
            return Err(KernelError::InvalidParams(format!("squeeze amplitude must be finite, got {r}")));
        }
        let qn = norm3(q);
        if !(qn > 0.0 && qn.is_finite()) {
            return Err(KernelError::InvalidParams("carrier momentum must be nonzero and finite".into()));
        }
        let dn = d.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(dn > 0.0 && dn.is_finite()) {
            return Err(KernelError::InvalidParams("polarization must be nonzero and finite".into()));
        }
        let dq: Complex64 = (0..3).map(|i| d[i] * q[i]).sum();
        if dq.norm() > 1e-10 * dn * qn {
            return Err(KernelError::InvalidParams(format!(
                "polarization must be orthogonal to the carrier (|d.q|/|d||q| = {:e})",
                dq.norm() / (dn * qn)
            )));
        }
        Ok(Self {
            r,
            q,
            d: [d[0] / dn, d[1] / dn, d[2] / dn],
            amplitude: 1.0,
            wavepacket: None,
        })
    }

    /// Convenience for real polarizations.
    pub fn real(r: f64, q: Vec3, d: Vec3) -> Result<Self, KernelError> {
        Self::new(r, q, d.map(|x| Complex64::new(x, 0.0)))
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Self {
        self.amplitude = amplitude;
        self
    }

    pub fn with_wavepacket(mut self, w: Wavepacket) -> Self {
        self.wavepacket = Some(w);
        self
    }

    /// Attach the Gaussian wavepacket of width `sigma` around `q` with
    /// polarization `d`.
    pub fn with_gaussian(self, sigma: f64) -> Result<Self, KernelError> {
        let w = Wavepacket::gaussian(self.q, self.d, sigma)?;
        Ok(self.with_wavepacket(w))
    }

    /// `(sinh r cosh r, sinh^2 r)`.
    pub fn coefficients(&self) -> (f64, f64) {
        let (sh, ch) = (self.r.sinh(), self.r.cosh());
        (sh * ch, sh * sh)
    }

    /// `m = d . chi(q)`.
    pub fn overlap(&self, chi: &SmearingFunction) -> Complex64 {
        let c = chi.eval(self.q);
        (0..3).map(|i| self.d[i] * c[i]).sum()
    }
}

/// Amplitude of the plane-wave limit of a Gaussian wavepacket of width
/// `sigma` around `q`: `pi^{-3/4} sigma^{3/2} / sqrt(2|q|)`.
pub fn concentrated_amplitude(sigma: f64, q: Vec3) -> f64 {
    PI.powf(-0.75) * sigma.powf(1.5) / (2.0 * norm3(q)).sqrt()
}

/// The mode function `F(t)` entering `dS`.
#[derive(Debug, Clone)]
pub enum ModeFunction {
    /// `amplitude * exp(-i freq t)` (concentrated wavepacket).
    Plane { amplitude: Complex64, freq: f64 },
    /// `sum_j weight_j exp(-i k_j t)` over radial quadrature nodes, with
    /// the angular integrals already done.
    Radial { nodes: Arc<Vec<(f64, Complex64)>> },
}

impl ModeFunction {
    pub fn concentrated(params: &SqueezeParams, chi: &SmearingFunction) -> Self {
        Self::Plane {
            amplitude: params.overlap(chi) * params.amplitude,
            freq: norm3(params.q),
        }
    }

    /// Precomputes the angular integrals of `F` for the params' wavepacket.
    pub fn general(params: &SqueezeParams, chi: &SmearingFunction) -> Result<Self, KernelError> {
        let w = params.wavepacket.as_ref().ok_or(KernelError::MissingWavepacket)?;
        let c = w.center();
        let cn = norm3(c);
        let radius = w.radius();
        // orthonormal frame with e3 along the wavepacket centre
        let e3 = if cn > 0.0 { [c[0] / cn, c[1] / cn, c[2] / cn] } else { [0.0, 0.0, 1.0] };
        let helper = if e3[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
        let e1 = {
            let dot = helper[0] * e3[0] + helper[1] * e3[1] + helper[2] * e3[2];
            let v = [helper[0] - dot * e3[0], helper[1] - dot * e3[1], helper[2] - dot * e3[2]];
            let n = norm3(v);
            [v[0] / n, v[1] / n, v[2] / n]
        };
        let e2 = [
            e3[1] * e1[2] - e3[2] * e1[1],
            e3[2] * e1[0] - e3[0] * e1[2],
            e3[0] * e1[1] - e3[1] * e1[0],
        ];
        let k_lo = (cn - radius).max(0.0);
        let k_hi = cn + radius;
        let hk = (k_hi - k_lo) / RADIAL_PANELS as f64;
        let radial: Vec<(f64, f64)> = (0..RADIAL_PANELS)
            .flat_map(|j| kronrod21_nodes(k_lo + j as f64 * hk, k_lo + (j + 1) as f64 * hk))
            .collect();
        let pref = (2.0 * PI).powf(-1.5);
        let dphi = 2.0 * PI / AZIMUTH_POINTS as f64;
        let nodes: Vec<(f64, Complex64)> = radial
            .par_iter()
            .map(|&(k, wk)| {
                // polar range of the support ball at this radius
                let cos_min = if cn > 0.0 {
                    ((k * k + cn * cn - radius * radius) / (2.0 * k * cn)).clamp(-1.0, 1.0)
                } else {
                    -1.0
                };
                let theta_max = cos_min.acos();
                let mut acc = Complex64::new(0.0, 0.0);
                if theta_max > 0.0 {
                    let ht = theta_max / POLAR_PANELS as f64;
                    for pt in 0..POLAR_PANELS {
                        for (th, wt) in kronrod21_nodes(pt as f64 * ht, (pt + 1) as f64 * ht) {
                            let (st, ct) = th.sin_cos();
                            let mut ring = Complex64::new(0.0, 0.0);
                            for ip in 0..AZIMUTH_POINTS {
                                let (sp, cp) = (ip as f64 * dphi).sin_cos();
                                let dir = [
                                    st * cp * e1[0] + st * sp * e2[0] + ct * e3[0],
                                    st * cp * e1[1] + st * sp * e2[1] + ct * e3[1],
                                    st * cp * e1[2] + st * sp * e2[2] + ct * e3[2],
                                ];
                                let p = [k * dir[0], k * dir[1], k * dir[2]];
                                let f = w.eval(p);
                                let x = chi.eval(p);
                                // (P_T f) . chi = f . (P_T chi) since P_T is symmetric
                                let xt = transverse_projection(p, x);
                                ring += f[0] * xt[0] + f[1] * xt[1] + f[2] * xt[2];
                            }
                            acc += ring * (wt * st * dphi);
                        }
                    }
                }
                (k, acc * (pref * wk * k * k / (2.0 * k).sqrt()))
            })
            .collect();
        Ok(Self::Radial { nodes: Arc::new(nodes) })
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        match self {
            Self::Plane { amplitude, freq } => amplitude * Complex64::new(0.0, -freq * t).exp(),
            Self::Radial { nodes } => nodes
                .iter()
                .map(|&(k, w)| w * Complex64::new(0.0, -k * t).exp())
                .sum(),
        }
    }

    /// `sup_t |F(t)|` bound: `|amplitude|` or the sum of node magnitudes.
    pub fn bound(&self) -> f64 {
        match self {
            Self::Plane { amplitude, .. } => amplitude.norm(),
            Self::Radial { nodes } => nodes.iter().map(|(_, w)| w.norm()).sum(),
        }
    }
}

/// `dS` from mode values `F(t)`, `F(s)` and the coefficients
/// `(sinh r cosh r, sinh^2 r)`.
pub fn delta_from_modes(ft: Complex64, fs: Complex64, sc: f64, sh2: f64) -> Complex64 {
    let pair = ft * fs;
    let cross = ft.conj() * fs;
    Complex64::new(-2.0 * pair.re * sc + 2.0 * cross.re * sh2, 0.0)
}

/// `dS(t,s)` for the params' wavepacket. Builds the mode function on every
/// call; kernels built by `make_kernel` precompute it once.
pub fn squeezed_delta_general(
    t: f64,
    s: f64,
    params: &SqueezeParams,
    chi: &SmearingFunction,
) -> Result<Complex64, KernelError> {
    let mode = ModeFunction::general(params, chi)?;
    let (sc, sh2) = params.coefficients();
    Ok(delta_from_modes(mode.eval(t), mode.eval(s), sc, sh2))
}

/// `dS(t,s)` in the plane-wave limit: with `M = amplitude * d . chi(q)`,
/// `-[M^2 e^{-i|q|(t+s)} + c.c.] sinh r cosh r + [|M|^2 e^{i|q|(t-s)} + c.c.] sinh^2 r`.
pub fn squeezed_delta_concentrated(
    t: f64,
    s: f64,
    params: &SqueezeParams,
    chi: &SmearingFunction,
) -> Complex64 {
    let mode = ModeFunction::concentrated(params, chi);
    let (sc, sh2) = params.coefficients();
    delta_from_modes(mode.eval(t), mode.eval(s), sc, sh2)
}

/// `2 |M|^2 (sinh r cosh r + sinh^2 r)`, a bound on `|dS|` for the
/// concentrated form.
pub fn concentrated_envelope(params: &SqueezeParams, chi: &SmearingFunction) -> f64 {
    let m2 = (params.overlap(chi) * params.amplitude).norm_sqr();
    let (sc, sh2) = params.coefficients();
    2.0 * (m2 * sc.abs() + m2 * sh2)
}
