//! Slow oracle: direct 3-D transform `chi(p) = int e^{-i p.x} chi(x) d^3x`
//! of the position-space smearing function against the closed form.

use num_complex::Complex64;
use qedvolterra::atom::{chi_momentum, chi_position, Vec3};
use qedvolterra::quad::{integrate_finite, kronrod21_nodes, QuadConfig};
use rayon::prelude::*;

const POLAR_PANELS: usize = 12;
const AZIMUTH: usize = 96;

/// Angular integral at radius `r` of `e^{-i p.x} chi_i(x)`, component `i`.
fn shell(p: Vec3, r: f64, i: usize, alpha: f64) -> Complex64 {
    let h = 2.0 / POLAR_PANELS as f64;
    let dphi = 2.0 * std::f64::consts::PI / AZIMUTH as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for panel in 0..POLAR_PANELS {
        let lo = -1.0 + panel as f64 * h;
        for (ct, w) in kronrod21_nodes(lo, lo + h) {
            let st = (1.0 - ct * ct).max(0.0).sqrt();
            for k in 0..AZIMUTH {
                let (sp, cp) = (k as f64 * dphi).sin_cos();
                let x = [r * st * cp, r * st * sp, r * ct];
                let phase = -(p[0] * x[0] + p[1] * x[1] + p[2] * x[2]);
                acc += Complex64::from_polar(1.0, phase) * (chi_position(x, alpha)[i] * w * dphi);
            }
        }
    }
    acc * r * r
}

fn transform(p: Vec3, alpha: f64) -> [Complex64; 3] {
    let cfg = QuadConfig::default().with_tolerances(1e-10, 1e-16);
    // the orbitals decay like e^{-3 alpha r / 2}; e^{-90} is far below 1e-6
    let r_max = 60.0 / alpha;
    let mut out = [Complex64::new(0.0, 0.0); 3];
    for (i, o) in out.iter_mut().enumerate() {
        let pts: Vec<f64> = (0..=24).map(|k| r_max * k as f64 / 24.0).collect();
        *o = pts
            .windows(2)
            .collect::<Vec<_>>()
            .par_iter()
            .map(|w| integrate_finite(|r| shell(p, r, i, alpha), w[0], w[1], &cfg).unwrap().0)
            .sum();
    }
    out
}

#[test]
fn closed_form_matches_direct_transform() {
    let alpha = 1.0;
    let momenta: [Vec3; 5] = [
        [0.0, 0.0, 0.5],
        [0.7, 0.0, 0.0],
        [0.3, -0.4, 1.2],
        [1.5, 1.0, -0.5],
        [0.0, 1.8, 1.8],
    ];
    for p in momenta {
        let num = transform(p, alpha);
        let exact = chi_momentum(p, alpha);
        let scale = exact.iter().map(|x| x * x).sum::<f64>().sqrt();
        let err = (0..3)
            .map(|i| (num[i] - exact[i]).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(err <= 1e-6 * scale, "p = {p:?}: {num:?} vs {exact:?} (rel {:.2e})", err / scale);
    }
}
