//! Hydrogen 1S and 2P orbitals and the transition smearing function.
//!
//! The smearing function is the overlap `chi_i(x) = psi_1(x) d_i psi_0(x)`
//! between the excited (2P, m = 0) and ground (1S) orbitals, used in
//! momentum space through its Fourier transform
//! `chi_i(p) = int d^3x e^{-i p.x} chi_i(x)`. Both orbitals are real and the
//! 2P state is quantized along the z axis.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

pub type Vec3 = [f64; 3];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AtomError {
    #[error("fine-structure constant must be positive and finite, got {0}")]
    InvalidAlpha(f64),
    #[error("transition frequency must be finite, got {0}")]
    InvalidOmega(f64),
}

/// Coupling constant and transition frequency of the two-level atom.
///
/// `alpha = 0` is accepted and describes the decoupled atom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub alpha: f64,
    pub omega: f64,
}

impl ModelParams {
    pub fn new(alpha: f64, omega: f64) -> Result<Self, AtomError> {
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(AtomError::InvalidAlpha(alpha));
        }
        if !omega.is_finite() {
            return Err(AtomError::InvalidOmega(omega));
        }
        Ok(Self { alpha, omega })
    }

    /// Hydrogen 2P -> 1S with `omega = 3 alpha^2 / 8`.
    pub fn hydrogen(alpha: f64) -> Result<Self, AtomError> {
        Ok(Self {
            alpha,
            omega: transition_frequency(alpha)?,
        })
    }
}

/// `E_1 - E_0` for 2P -> 1S in units of `m_e c^2`: `alpha^2 (1/2 - 1/8)`.
pub fn transition_frequency(alpha: f64) -> Result<f64, AtomError> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(AtomError::InvalidAlpha(alpha));
    }
    Ok(0.375 * alpha * alpha)
}

/// Closed-form momentum-space smearing function of the 2P -> 1S transition:
///
/// `chi_i(p) = sqrt(2) alpha^5 [4 p_i p_z / D^3 - delta_iz / D^2]`,
/// `D = p^2 + 9 alpha^2 / 4`.
///
/// The first (longitudinal) term is kept; kernels project it out.
pub fn chi_momentum(p: Vec3, alpha: f64) -> Vec3 {
    let d = p[0] * p[0] + p[1] * p[1] + p[2] * p[2] + 2.25 * alpha * alpha;
    let pref = std::f64::consts::SQRT_2 * alpha.powi(5);
    let long = 4.0 * p[2] / (d * d * d);
    let trans = 1.0 / (d * d);
    [
        pref * long * p[0],
        pref * long * p[1],
        pref * (long * p[2] - trans),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orbital {
    /// 1S
    Ground,
    /// 2P, m = 0
    Excited,
}

pub fn orbital_value(which: Orbital, x: Vec3, alpha: f64) -> f64 {
    let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    match which {
        Orbital::Ground => alpha.powf(1.5) / PI.sqrt() * (-alpha * r).exp(),
        // r cos(theta) = z
        Orbital::Excited => {
            alpha.powf(2.5) / (4.0 * (2.0 * PI).sqrt()) * x[2] * (-0.5 * alpha * r).exp()
        }
    }
}

/// Position-space smearing function `psi_1(x) d_i psi_0(x)` (real orbitals).
pub fn chi_position(x: Vec3, alpha: f64) -> Vec3 {
    let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    if r == 0.0 {
        return [0.0; 3];
    }
    let psi1 = orbital_value(Orbital::Excited, x, alpha);
    let dpsi0 = -alpha * orbital_value(Orbital::Ground, x, alpha) / r;
    [psi1 * dpsi0 * x[0], psi1 * dpsi0 * x[1], psi1 * dpsi0 * x[2]]
}

/// Momentum-space smearing function of a transition.
#[derive(Clone)]
pub struct SmearingFunction {
    eval: Arc<dyn Fn(Vec3) -> Vec3 + Send + Sync>,
    label: String,
}

impl SmearingFunction {
    pub fn new<F>(label: impl Into<String>, eval: F) -> Self
    where
        F: Fn(Vec3) -> Vec3 + Send + Sync + 'static,
    {
        Self {
            eval: Arc::new(eval),
            label: label.into(),
        }
    }

    pub fn hydrogen_2p1s(alpha: f64) -> Self {
        Self::new("hydrogen_2p1s", move |p| chi_momentum(p, alpha))
    }

    pub fn eval(&self, p: Vec3) -> Vec3 {
        (self.eval)(p)
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl fmt::Debug for SmearingFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SmearingFunction")
            .field("label", &self.label)
            .finish()
    }
}

/// Applies `delta_ij - p_i p_j / p^2` to `v`. Returns `v` unchanged at `p = 0`.
pub fn transverse_projection(p: Vec3, v: Vec3) -> Vec3 {
    let p2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
    if p2 == 0.0 {
        return v;
    }
    let pv = (p[0] * v[0] + p[1] * v[1] + p[2] * v[2]) / p2;
    [v[0] - pv * p[0], v[1] - pv * p[1], v[2] - pv * p[2]]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn transition_frequency_examples() {
        assert_eq!(transition_frequency(1.0).unwrap(), 0.375);
        assert_eq!(transition_frequency(0.5).unwrap(), 0.09375);
        let w = transition_frequency(1.0 / 137.035999).unwrap();
        assert!((w - 1.99693e-5).abs() < 1e-9);
        assert!(transition_frequency(0.0).is_err());
        assert!(transition_frequency(-1.0).is_err());
    }

    #[test]
    fn model_params_validation() {
        assert!(ModelParams::new(0.0, 1.0).is_ok());
        assert!(ModelParams::new(-0.1, 1.0).is_err());
        assert!(ModelParams::new(0.1, f64::NAN).is_err());
        let h = ModelParams::hydrogen(0.2).unwrap();
        assert!((h.omega - 0.375 * 0.04).abs() < 1e-15);
    }

    #[test]
    fn chi_examples() {
        let c0 = chi_momentum([0.0; 3], 1.0);
        assert_eq!(c0[0], 0.0);
        assert_eq!(c0[1], 0.0);
        assert!((c0[2] + 16.0 * 2f64.sqrt() / 81.0).abs() < 1e-15);
        assert!((c0[2] + 0.279351).abs() < 1e-6);

        let c1 = chi_momentum([0.0, 0.0, 1.0], 1.0);
        let expected = 2f64.sqrt() * (4.0 / 3.25f64.powi(3) - 1.0 / 3.25f64.powi(2));
        assert!((c1[2] - expected).abs() < 1e-15);
        assert!((c1[2] - 0.030899).abs() < 5e-6);

        assert_eq!(
            chi_momentum([0.0, 0.0, 0.7], 1.0),
            chi_momentum([0.0, 0.0, -0.7], 1.0)
        );
    }

    #[test]
    fn orbital_examples() {
        let g = orbital_value(Orbital::Ground, [0.0; 3], 1.0);
        assert!((g - 1.0 / PI.sqrt()).abs() < 1e-15);
        assert!((g - 0.564190).abs() < 1e-6);
        assert_eq!(orbital_value(Orbital::Excited, [1.3, -0.4, 0.0], 0.7), 0.0);
    }

    /// Radial Simpson oracle on [0, 60/alpha].
    fn radial_norm(which: Orbital, alpha: f64) -> f64 {
        // angular factor: 1 for the s state, 1/3 for the p_z state (cos^2 average)
        let n = 200_000;
        let rmax = 60.0 / alpha;
        let h = rmax / n as f64;
        let mut sum = 0.0;
        for k in 0..=n {
            let r = k as f64 * h;
            let w = if k == 0 || k == n {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let v = orbital_value(which, [0.0, 0.0, r], alpha);
            let ang = match which {
                Orbital::Ground => 1.0,
                Orbital::Excited => 1.0 / 3.0,
            };
            sum += w * 4.0 * PI * r * r * v * v * ang;
        }
        sum * h / 3.0
    }

    #[test]
    fn orbitals_normalized() {
        for alpha in [1.0, 0.3] {
            assert!((radial_norm(Orbital::Ground, alpha) - 1.0).abs() < 1e-8);
            assert!((radial_norm(Orbital::Excited, alpha) - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn chi_position_matches_product_formula() {
        let x = [0.3, -0.2, 0.5];
        let c = chi_position(x, 1.0);
        let r = (0.09f64 + 0.04 + 0.25).sqrt();
        let expected = -1.0 / (4.0 * 2f64.sqrt() * PI) * x[2] * (-1.5 * r).exp() / r;
        for i in 0..3 {
            assert!((c[i] - expected * x[i]).abs() < 1e-15);
        }
    }

    proptest! {
        #[test]
        fn transverse_part_orthogonal(px in -5.0f64..5.0, py in -5.0f64..5.0, pz in -5.0f64..5.0, alpha in 0.05f64..2.0) {
            let p = [px, py, pz];
            let p2 = px * px + py * py + pz * pz;
            prop_assume!(p2 > 1e-6);
            let t = transverse_projection(p, chi_momentum(p, alpha));
            let dot = t[0] * px + t[1] * py + t[2] * pz;
            let scale = chi_momentum(p, alpha).iter().map(|v| v.abs()).sum::<f64>() * p2.sqrt();
            prop_assert!(dot.abs() <= 1e-12 * scale.max(1e-300));
        }

        #[test]
        fn scaling_law(px in -3.0f64..3.0, py in -3.0f64..3.0, pz in -3.0f64..3.0, alpha in 0.01f64..2.0) {
            let lhs = chi_momentum([alpha * px, alpha * py, alpha * pz], alpha);
            let rhs = chi_momentum([px, py, pz], 1.0);
            for i in 0..3 {
                prop_assert!((lhs[i] - alpha * rhs[i]).abs() <= 1e-12 * (alpha * rhs[i]).abs().max(1e-14 * alpha));
            }
        }

        #[test]
        fn even_and_decaying(px in -50.0f64..50.0, py in -50.0f64..50.0, pz in -50.0f64..50.0) {
            let alpha = 0.7;
            let a = chi_momentum([px, py, pz], alpha);
            let b = chi_momentum([-px, -py, -pz], alpha);
            prop_assert_eq!(a, b);
            let p = (px * px + py * py + pz * pz).sqrt();
            let norm = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
            // |chi| (1 + p/alpha)^4 stays bounded
            prop_assert!(norm * (1.0 + p / alpha).powi(4) < 5.0 * alpha);
        }
    }
}
