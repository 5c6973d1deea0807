use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::{s_hat, LaplaceError};
use crate::atom::ModelParams;
use crate::kernels::SpectralDensity;
use crate::quad::QuadConfig;
use crate::volterra::{AmplitudeSeries, TimeGrid};

/// Upper limit on contour nodes; beyond it the requested tolerance is
/// unreachable at reasonable cost.
const MAX_NODES: usize = 20_000_000;

/// `c(t)` from the Bromwich integral, with a per-point error bound.
#[derive(Debug, Clone)]
pub struct BromwichResult {
    pub series: AmplitudeSeries,
    /// Truncation plus aliasing bound at each grid point.
    pub error_estimate: Vec<f64>,
    pub sigma: f64,
    pub y_max: f64,
    pub nodes: usize,
}

/// Inverts `c^(s) = 1 / (s + alpha S^(s - i omega))` on the line
/// `Re s = 4 / t_max`:
/// `c(t) = 1 + (1 / 2 pi) int e^{s t} (c^(s) - 1/s) dy`.
///
/// The subtracted integrand decays like `alpha S(0) / |y|^3`, so the line
/// is truncated at `|y| = sqrt(e^{sigma t_max} alpha S(0) / (2 pi tol))` and
/// sampled with spacing `pi / (2 t_max)` (aliasing `~ e^{-16}`).
pub fn bromwich_invert(
    rho: &SpectralDensity,
    params: &ModelParams,
    grid: &TimeGrid,
    tol: f64,
    cfg: &QuadConfig,
) -> Result<BromwichResult, LaplaceError> {
    if !(tol > 0.0) {
        return Err(LaplaceError::Invalid(format!("tolerance must be positive, got {tol}")));
    }
    let t_max = grid.t_max();
    let sigma = 4.0 / t_max;
    let h = PI / (2.0 * t_max);
    let s0 = rho
        .mass()
        .unwrap_or_else(|| rho.envelope().estimate_mass().unwrap_or(1.0));
    let strength = params.alpha * s0;
    let y_max = ((sigma * t_max).exp() * strength / (2.0 * PI * tol)).sqrt().max(10.0 * h);
    let half = (y_max / h).ceil() as usize;
    let nodes = 2 * half + 1;
    if nodes > MAX_NODES {
        return Err(LaplaceError::Invalid(format!(
            "tolerance {tol} needs {nodes} contour nodes (limit {MAX_NODES})"
        )));
    }
    let w = Complex64::new(0.0, params.omega);
    let g: Vec<Complex64> = (0..nodes)
        .into_par_iter()
        .map(|k| {
            let s = Complex64::new(sigma, (k as f64 - half as f64) * h);
            if params.alpha == 0.0 {
                return Ok(Complex64::new(0.0, 0.0));
            }
            let a = params.alpha * s_hat(rho, s - w, cfg)?;
            let weight = if k == 0 || k == nodes - 1 { 0.5 } else { 1.0 };
            // c^ - 1/s = -a / (s (s + a))
            Ok(-weight * a / (s * (s + a)))
        })
        .collect::<Result<_, LaplaceError>>()?;
    let values: Vec<Complex64> = grid
        .times()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&t| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, gk) in g.iter().enumerate() {
                let y = (k as f64 - half as f64) * h;
                acc += Complex64::from_polar(1.0, y * t) * gk;
            }
            Complex64::new(1.0, 0.0) + (sigma * t).exp() * h / (2.0 * PI) * acc
        })
        .collect();
    let alias = (-4.0 * sigma * t_max).exp() / (1.0 - (-4.0 * sigma * t_max).exp());
    let error_estimate = grid
        .times()
        .map(|t| (sigma * t).exp() * strength / (2.0 * PI * y_max * y_max) + alias)
        .collect();
    Ok(BromwichResult {
        series: AmplitudeSeries {
            grid: *grid,
            values,
            method: "bromwich".into(),
            kernel_label: rho.label().to_string(),
            alpha: params.alpha,
            omega: params.omega,
        },
        error_estimate,
        sigma,
        y_max,
        nodes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decoupled_is_identity() {
        let rho = SpectralDensity::ohmic(1.0, 1.0).unwrap();
        let p = ModelParams::new(0.0, 1.0).unwrap();
        let g = TimeGrid::covering(1.0, 10.0).unwrap();
        let r = bromwich_invert(&rho, &p, &g, 1e-6, &QuadConfig::default()).unwrap();
        assert!(r.series.values.iter().all(|c| (c - 1.0).norm() < 1e-15));
    }

    #[test]
    fn exponential_kernel_oracle() {
        // rho = lambda / (pi (lambda^2 + p^2)) on the full line is not
        // representable here, so use the ohmic closed form against the
        // time-domain solver instead (see the volterra tests for that
        // solver's own oracles)
        use crate::kernels::KernelEvaluator;
        use crate::volterra::{solve_ide, Method};
        let rho = SpectralDensity::ohmic(1.0, 1.0).unwrap();
        let p = ModelParams::new(0.05, 1.0).unwrap();
        let t_max = 40.0;
        let coarse = TimeGrid::covering(0.5, t_max).unwrap();
        let r = bromwich_invert(&rho, &p, &coarse, 1e-6, &QuadConfig::default()).unwrap();
        let k = KernelEvaluator::stationary("ohmic", |t: f64| 1.0 / Complex64::new(1.0, t).powi(2));
        let fine = TimeGrid::covering(0.01, t_max).unwrap();
        let ide = solve_ide(&k, &p, &fine, Method::Gregory4).unwrap();
        let dev = r.series.max_deviation(&ide).unwrap();
        let bound = r.error_estimate.iter().cloned().fold(0.0, f64::max);
        assert!(dev < 1e-5 && bound < 1e-5, "{dev} {bound}");
    }
}
