use num_complex::Complex64;

use super::{AmplitudeSeries, TimeGrid, VolterraError};

/// Empirical convergence order from runs at `dt`, `dt/2`, `dt/4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderEstimate {
    pub order: f64,
    /// Max errors (against the oracle) or successive differences (Richardson).
    pub errors: [f64; 3],
    /// Set when an error sits at the floating-point floor and the ratio
    /// means nothing.
    pub inconclusive: bool,
}

/// Runs `solve` on `grid` refined by 1, 2 and 4.
///
/// With an `exact` solution the order is the mean of `log2(e_h / e_{h/2})`
/// over the two successive pairs, errors taken at the coarse grid points.
/// Without one, `log2(|c_h - c_{h/2}| / |c_{h/2} - c_{h/4}|)` is used.
pub fn estimate_order<S>(
    solve: S,
    exact: Option<&dyn Fn(f64) -> Complex64>,
    grid: &TimeGrid,
) -> Result<OrderEstimate, VolterraError>
where
    S: Fn(&TimeGrid) -> Result<AmplitudeSeries, VolterraError>,
{
    let runs = [solve(grid)?, solve(&grid.refined(2))?, solve(&grid.refined(4))?];
    let floor = 1e3 * f64::EPSILON;
    match exact {
        Some(f) => {
            let mut errors = [0.0; 3];
            for (e, run) in errors.iter_mut().zip(&runs) {
                let stride = run.grid.n_steps / grid.n_steps;
                *e = (0..grid.len())
                    .map(|k| (run.values[k * stride] - f(grid.t(k))).norm())
                    .fold(0.0, f64::max);
            }
            let inconclusive = errors.iter().any(|e| !(*e > floor));
            let order = 0.5 * ((errors[0] / errors[1]).log2() + (errors[1] / errors[2]).log2());
            Ok(OrderEstimate {
                order,
                errors,
                inconclusive,
            })
        }
        None => {
            let d1 = runs[0].max_deviation(&runs[1])?;
            let d2 = runs[1].max_deviation(&runs[2])?;
            let inconclusive = !(d1 > floor && d2 > floor);
            Ok(OrderEstimate {
                order: (d1 / d2).log2(),
                errors: [d1, d2, f64::NAN],
                inconclusive,
            })
        }
    }
}

/// Least-squares fit of `Re(1 - c(t_k))`, `k = 1..=n_points`, to
/// `sum_i a_i t^{powers[i]}`. Returns the coefficients `a_i`.
pub fn fit_short_time(
    series: &AmplitudeSeries,
    n_points: usize,
    powers: &[i32],
) -> Result<Vec<f64>, VolterraError> {
    let m = powers.len();
    if m == 0 || n_points < m || n_points >= series.values.len() {
        return Err(VolterraError::Fit(format!(
            "cannot fit {m} powers to {n_points} points of a series with {} samples",
            series.values.len()
        )));
    }
    // normal equations on scaled abscissae x = t / t_n for conditioning
    let t_n = series.grid.t(n_points);
    let mut a = vec![vec![0.0; m + 1]; m];
    for k in 1..=n_points {
        let x = series.grid.t(k) / t_n;
        let y = 1.0 - series.values[k].re;
        let basis: Vec<f64> = powers.iter().map(|&p| x.powi(p)).collect();
        for i in 0..m {
            for j in 0..m {
                a[i][j] += basis[i] * basis[j];
            }
            a[i][m] += basis[i] * y;
        }
    }
    // Gaussian elimination with partial pivoting
    for col in 0..m {
        let piv = (col..m)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("nonempty");
        a.swap(col, piv);
        if a[col][col].abs() < 1e-300 {
            return Err(VolterraError::Fit("singular short-time fit".into()));
        }
        for row in col + 1..m {
            let f = a[row][col] / a[col][col];
            for k in col..=m {
                a[row][k] -= f * a[col][k];
            }
        }
    }
    let mut coef = vec![0.0; m];
    for i in (0..m).rev() {
        let mut s = a[i][m];
        for j in i + 1..m {
            s -= a[i][j] * coef[j];
        }
        coef[i] = s / a[i][i];
    }
    Ok(coef
        .iter()
        .zip(powers)
        .map(|(c, &p)| c / t_n.powi(p))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atom::ModelParams;
    use crate::kernels::KernelEvaluator;
    use crate::volterra::{solve_ide, Method};

    fn series(values: Vec<Complex64>, dt: f64) -> AmplitudeSeries {
        AmplitudeSeries {
            grid: TimeGrid::new(dt, values.len() - 1).unwrap(),
            values,
            method: "synthetic".into(),
            kernel_label: String::new(),
            alpha: 0.0,
            omega: 0.0,
        }
    }

    #[test]
    fn short_time_fit_recovers_polynomial() {
        let dt = 0.01;
        let v = (0..20)
            .map(|k| {
                let t = k as f64 * dt;
                Complex64::new(1.0 - 0.3 * t * t + 0.7 * t.powi(4), 0.1 * t)
            })
            .collect();
        let s = series(v, dt);
        let c = fit_short_time(&s, 10, &[2, 4]).unwrap();
        assert!((c[0] - 0.3).abs() < 1e-9 && (c[1] + 0.7).abs() < 1e-6, "{c:?}");
        assert!(fit_short_time(&s, 1, &[2, 4]).is_err());
    }

    #[test]
    fn order_of_trapezoid_and_gregory() {
        let k = KernelEvaluator::stationary("exp", |tau: f64| Complex64::new((-tau.abs()).exp(), 0.0));
        let p = ModelParams::new(0.1, 0.5).unwrap();
        let oracle = |t: f64| {
            let mu = Complex64::new(-1.0, 0.5);
            let d = (mu * mu - 0.4).sqrt();
            let (rp, rm) = ((mu + d) / 2.0, (mu - d) / 2.0);
            (rp * (rm * t).exp() - rm * (rp * t).exp()) / (rp - rm)
        };
        let g = TimeGrid::covering(0.2, 20.0).unwrap();
        let trap = estimate_order(|g| solve_ide(&k, &p, g, Method::Trapezoid), Some(&oracle), &g).unwrap();
        assert!((trap.order - 2.0).abs() < 0.2, "{trap:?}");
        let greg = estimate_order(|g| solve_ide(&k, &p, g, Method::Gregory4), Some(&oracle), &g).unwrap();
        assert!((greg.order - 4.0).abs() < 0.5, "{greg:?}");
        assert!(!greg.inconclusive);
        let rich = estimate_order(|g| solve_ide(&k, &p, g, Method::Trapezoid), None, &g).unwrap();
        assert!((rich.order - 2.0).abs() < 0.2, "{rich:?}");
    }

    #[test]
    fn decoupled_problem_is_inconclusive() {
        let k = KernelEvaluator::stationary("one", |_| Complex64::new(1.0, 0.0));
        let p = ModelParams::new(0.0, 0.0).unwrap();
        let g = TimeGrid::new(0.1, 10).unwrap();
        let one = |_t: f64| Complex64::new(1.0, 0.0);
        let e = estimate_order(|g| solve_ide(&k, &p, g, Method::Trapezoid), Some(&one), &g).unwrap();
        assert!(e.inconclusive);
    }
}
