use num_complex::Complex64;

use super::{AmplitudeSeries, Method, TimeGrid, VolterraError, ZKernel};
use crate::atom::ModelParams;
use crate::kernels::{KernelError, KernelEvaluator, TabulatedKernel};

/// Substep refinements used for the Gregory starting values.
const START_REFINEMENTS: [usize; 3] = [8, 16, 32];

/// `K(t_i, t_j) = e^{i omega (t_i - t_j)} S(t_i, t_j)` on a grid.
enum PhasedKernel<'a> {
    /// `K(i, j) = lags[i - j]` for `i >= j`.
    Stationary(Vec<Complex64>),
    General {
        tab: &'a TabulatedKernel,
        phase: Vec<Complex64>,
    },
}

impl<'a> PhasedKernel<'a> {
    fn new(tab: &'a TabulatedKernel, omega: f64) -> Self {
        let dt = tab.dt();
        let phase: Vec<Complex64> = (0..tab.len())
            .map(|k| Complex64::new(0.0, omega * k as f64 * dt).exp())
            .collect();
        match tab.lags() {
            Some(lags) => {
                PhasedKernel::Stationary(lags.iter().zip(&phase).map(|(s, p)| s * p).collect())
            }
            None => PhasedKernel::General { tab, phase },
        }
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> Result<Complex64, KernelError> {
        match self {
            PhasedKernel::Stationary(k) => Ok(if i >= j { k[i - j] } else { k[j - i].conj() }),
            PhasedKernel::General { tab, phase } => {
                let ph = if i >= j { phase[i - j] } else { phase[j - i].conj() };
                Ok(ph * tab.get(i, j)?)
            }
        }
    }
}

fn check_diagonal(alpha: f64, dt: f64, kdiag: Complex64, step: usize) -> Result<(), VolterraError> {
    let product = dt * alpha * dt / 2.0 * kdiag.norm();
    if product >= 1.0 || !product.is_finite() {
        let suggested = (1.0 / (alpha * kdiag.norm())).sqrt();
        return Err(VolterraError::StepTooLarge {
            dt,
            product,
            step,
            suggested,
        });
    }
    Ok(())
}

/// Implicit product trapezoid. `k(i, j)` is the phased kernel on a grid of
/// spacing `dt`. Returns `c` and `y = c'`.
fn trapezoid_core<F>(
    n: usize,
    dt: f64,
    alpha: f64,
    k: F,
) -> Result<(Vec<Complex64>, Vec<Complex64>), VolterraError>
where
    F: Fn(usize, usize) -> Result<Complex64, KernelError>,
{
    let mut c = vec![Complex64::new(0.0, 0.0); n + 1];
    c[0] = Complex64::new(1.0, 0.0);
    // y = c' = -alpha int_0^t K c; vanishes at t = 0
    let mut y = vec![Complex64::new(0.0, 0.0); n + 1];
    for m in 1..=n {
        let kmm = k(m, m)?;
        check_diagonal(alpha, dt, kmm, m)?;
        let mut s = k(m, 0)? * c[0] * 0.5;
        for j in 1..m {
            s += k(m, j)? * c[j];
        }
        let rhs = c[m - 1] + y[m - 1] * (dt / 2.0) - s * (alpha * dt * dt / 2.0);
        c[m] = rhs / (1.0 + kmm * (alpha * dt * dt / 4.0));
        y[m] = -(s + kmm * c[m] * 0.5) * (alpha * dt);
    }
    Ok((c, y))
}

/// Weights (in units of dt) for `int_0^{t_n}` on `n + 1` points, `n >= 4`.
fn gregory_weights(n: usize, w: &mut Vec<f64>) {
    w.clear();
    w.resize(n + 1, 1.0);
    if n == 4 {
        w.copy_from_slice(&[1.0 / 3.0, 4.0 / 3.0, 2.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0]);
        return;
    }
    let ends = [3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0];
    for (i, e) in ends.iter().enumerate() {
        w[i] = *e;
        w[n - i] = *e;
    }
}

/// Fourth-order scheme: Adams-Moulton 4 for `c' = y`, Gregory quadrature for
/// `y`, starting values `(c, y)` at steps 1..3 supplied.
fn gregory_core<F>(
    n: usize,
    dt: f64,
    alpha: f64,
    start: &[(Complex64, Complex64)],
    k: F,
) -> Result<Vec<Complex64>, VolterraError>
where
    F: Fn(usize, usize) -> Result<Complex64, KernelError>,
{
    let mut c = vec![Complex64::new(0.0, 0.0); n + 1];
    c[0] = Complex64::new(1.0, 0.0);
    let mut y = vec![Complex64::new(0.0, 0.0); n + 1];
    // y_1..y_3 come from the start-up runs too: a quadrature rule for them
    // would need K(t_i, t_j) with j > i, where Hermitian kernels may kink
    for (m, &(cm, ym)) in start.iter().enumerate().take(n.min(3)) {
        c[m + 1] = cm;
        y[m + 1] = ym;
    }
    if n <= 3 {
        return Ok(c);
    }
    let mut w = Vec::with_capacity(n + 1);
    for m in 4..=n {
        gregory_weights(m, &mut w);
        let kmm = k(m, m)?;
        check_diagonal(alpha, dt, kmm, m)?;
        let mut s = Complex64::new(0.0, 0.0);
        for j in 0..m {
            s += k(m, j)? * c[j] * w[j];
        }
        let a = s * (-alpha * dt);
        let b = kmm * (-alpha * dt * w[m]);
        let rhs = c[m - 1] + (a * 9.0 + y[m - 1] * 19.0 - y[m - 2] * 5.0 + y[m - 3]) * (dt / 24.0);
        c[m] = rhs / (1.0 - b * (9.0 * dt / 24.0));
        y[m] = a + b * c[m];
    }
    Ok(c)
}

/// `(c, c')` at `t_1..t_3` from trapezoid runs with substeps `dt/8`, `dt/16`,
/// `dt/32` and two levels of Richardson extrapolation (the trapezoid error
/// expands in even powers of the step).
fn gregory_start(
    kernel: &KernelEvaluator,
    omega: f64,
    alpha: f64,
    dt: f64,
    steps: usize,
) -> Result<Vec<(Complex64, Complex64)>, VolterraError> {
    let finest = START_REFINEMENTS[2];
    let fine_dt = dt / finest as f64;
    let tab = kernel.tabulate(fine_dt, steps * finest)?;
    let pk = PhasedKernel::new(&tab, omega);
    let mut runs = Vec::new();
    for r in START_REFINEMENTS {
        let stride = finest / r;
        let (c, y) = trapezoid_core(steps * r, dt / r as f64, alpha, |i, j| pk.get(i * stride, j * stride))?;
        runs.push((1..=steps).map(|m| (c[m * r], y[m * r])).collect::<Vec<_>>());
    }
    let extrapolate = |a: Complex64, b: Complex64, c: Complex64| {
        let r1a = (b * 4.0 - a) / 3.0;
        let r1b = (c * 4.0 - b) / 3.0;
        (r1b * 16.0 - r1a) / 15.0
    };
    Ok((0..steps)
        .map(|m| {
            let [a, b, c] = [runs[0][m], runs[1][m], runs[2][m]];
            (extrapolate(a.0, b.0, c.0), extrapolate(a.1, b.1, c.1))
        })
        .collect())
}

/// Solves the amplitude equation on `grid`.
///
/// The kernel is tabulated once (one evaluation per lag for stationary
/// kernels); each step is an implicit scalar solve. Steps with
/// `dt * alpha dt/2 |S(t_n,t_n)| >= 1` are refused.
pub fn solve_ide(
    kernel: &KernelEvaluator,
    params: &ModelParams,
    grid: &TimeGrid,
    method: Method,
) -> Result<AmplitudeSeries, VolterraError> {
    let tab = kernel.tabulate(grid.dt, grid.n_steps)?;
    let pk = PhasedKernel::new(&tab, params.omega);
    let k = |i: usize, j: usize| pk.get(i, j);
    let values = match method {
        Method::Trapezoid => trapezoid_core(grid.n_steps, grid.dt, params.alpha, k)?.0,
        Method::Gregory4 => {
            let start = gregory_start(kernel, params.omega, params.alpha, grid.dt, grid.n_steps.min(3))?;
            gregory_core(grid.n_steps, grid.dt, params.alpha, &start, k)?
        }
    };
    Ok(AmplitudeSeries {
        grid: *grid,
        values,
        method: method.name().to_string(),
        kernel_label: kernel.label().to_string(),
        alpha: params.alpha,
        omega: params.omega,
    })
}

/// `Z(tau) = alpha int_0^tau S(t, 0) e^{i omega t} dt` by the cumulative
/// trapezoid rule.
pub fn compute_z(
    kernel: &KernelEvaluator,
    params: &ModelParams,
    grid: &TimeGrid,
) -> Result<ZKernel, VolterraError> {
    if !kernel.is_stationary() {
        return Err(VolterraError::NotStationary(kernel.label().to_string()));
    }
    let tab = kernel.tabulate(grid.dt, grid.n_steps)?;
    let PhasedKernel::Stationary(g) = PhasedKernel::new(&tab, params.omega) else {
        return Err(VolterraError::NotStationary(kernel.label().to_string()));
    };
    let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
    for k in 1..grid.len() {
        values[k] = values[k - 1] + (g[k - 1] + g[k]) * (params.alpha * grid.dt / 2.0);
    }
    Ok(ZKernel { grid: *grid, values })
}

/// `c(T) = 1 - int_0^T Z(T - s) c(s) ds` by the trapezoid rule.
pub fn solve_integral_form(z: &ZKernel, grid: &TimeGrid) -> Result<AmplitudeSeries, VolterraError> {
    if z.grid != *grid || z.values.len() != grid.len() {
        return Err(VolterraError::GridMismatch(format!(
            "Z has {} samples at dt {}, grid has {} at dt {}",
            z.values.len(),
            z.grid.dt,
            grid.len(),
            grid.dt
        )));
    }
    let dt = grid.dt;
    let zv = &z.values;
    let mut c = vec![Complex64::new(0.0, 0.0); grid.len()];
    c[0] = Complex64::new(1.0, 0.0);
    for n in 1..grid.len() {
        let mut s = zv[n] * c[0] * 0.5;
        for j in 1..n {
            s += zv[n - j] * c[j];
        }
        c[n] = (Complex64::new(1.0, 0.0) - s * dt) / (1.0 + zv[0] * (dt / 2.0));
    }
    Ok(AmplitudeSeries {
        grid: *grid,
        values: c,
        method: "integral_form".into(),
        kernel_label: String::new(),
        alpha: f64::NAN,
        omega: f64::NAN,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant_kernel() -> KernelEvaluator {
        KernelEvaluator::stationary("const", |_| Complex64::new(1.0, 0.0))
    }

    fn exp_kernel(lambda: f64) -> KernelEvaluator {
        KernelEvaluator::stationary("exp", move |tau: f64| Complex64::new((-lambda * tau.abs()).exp(), 0.0))
    }

    /// `c'' - (i omega - lambda) c' + alpha c = 0`, `c(0) = 1`, `c'(0) = 0`.
    fn exp_oracle(alpha: f64, omega: f64, lambda: f64, t: f64) -> Complex64 {
        let mu = Complex64::new(-lambda, omega);
        let disc = (mu * mu - 4.0 * alpha).sqrt();
        let rp = (mu + disc) / 2.0;
        let rm = (mu - disc) / 2.0;
        (rp * (rm * t).exp() - rm * (rp * t).exp()) / (rp - rm)
    }

    #[test]
    fn decoupled_is_exactly_one() {
        let p = ModelParams::new(0.0, 0.3).unwrap();
        let g = TimeGrid::new(0.1, 100).unwrap();
        for m in [Method::Trapezoid, Method::Gregory4] {
            let s = solve_ide(&constant_kernel(), &p, &g, m).unwrap();
            assert!(s.values.iter().all(|c| *c == Complex64::new(1.0, 0.0)));
        }
    }

    #[test]
    fn constant_kernel_gives_cosine() {
        let p = ModelParams::new(0.25, 0.0).unwrap();
        let g = TimeGrid::covering(1e-2, 10.0).unwrap();
        for m in [Method::Trapezoid, Method::Gregory4] {
            let s = solve_ide(&constant_kernel(), &p, &g, m).unwrap();
            let err = s
                .values
                .iter()
                .enumerate()
                .map(|(k, c)| (c - (0.5 * g.t(k)).cos()).norm())
                .fold(0.0, f64::max);
            assert!(err < 1e-4, "{m}: {err}");
        }
    }

    #[test]
    fn exponential_kernel_oracle() {
        let (alpha, omega, lambda) = (0.1, 0.5, 1.0);
        let p = ModelParams::new(alpha, omega).unwrap();
        let g = TimeGrid::covering(0.05, 20.0).unwrap();
        let s = solve_ide(&exp_kernel(lambda), &p, &g, Method::Gregory4).unwrap();
        let err = s
            .values
            .iter()
            .enumerate()
            .map(|(k, c)| (c - exp_oracle(alpha, omega, lambda, g.t(k))).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn z_kernel_properties() {
        let p = ModelParams::new(0.3, 0.0).unwrap();
        let g = TimeGrid::new(0.1, 50).unwrap();
        let z = compute_z(&constant_kernel(), &p, &g).unwrap();
        assert_eq!(z.values[0], Complex64::new(0.0, 0.0));
        for k in 0..g.len() {
            assert!((z.values[k] - 0.3 * g.t(k)).norm() < 1e-13);
        }
        let sq = KernelEvaluator::general("g", |t, s| Complex64::new((t * s).cos(), 0.0));
        assert!(matches!(compute_z(&sq, &p, &g), Err(VolterraError::NotStationary(_))));
    }

    #[test]
    fn integral_form_matches_ide() {
        let p = ModelParams::new(0.1, 0.5).unwrap();
        // both schemes are second order with different error constants
        let g = TimeGrid::covering(0.005, 30.0).unwrap();
        let k = exp_kernel(1.0);
        let a = solve_ide(&k, &p, &g, Method::Trapezoid).unwrap();
        let z = compute_z(&k, &p, &g).unwrap();
        let b = solve_integral_form(&z, &g).unwrap();
        assert!(a.max_deviation(&b).unwrap() < 1e-6);
        let zero = ZKernel { grid: g, values: vec![Complex64::new(0.0, 0.0); g.len()] };
        assert!(solve_integral_form(&zero, &g).unwrap().values.iter().all(|c| c.re == 1.0 && c.im == 0.0));
        let other = TimeGrid::new(0.02, 10).unwrap();
        assert!(solve_integral_form(&z, &other).is_err());
    }

    #[test]
    fn refuses_huge_steps() {
        let p = ModelParams::new(1.0, 0.0).unwrap();
        let g = TimeGrid::new(2.0, 5).unwrap();
        match solve_ide(&constant_kernel(), &p, &g, Method::Trapezoid) {
            Err(VolterraError::StepTooLarge { suggested, .. }) => assert!(suggested < 2.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn gregory_weights_integrate_cubics() {
        let mut w = Vec::new();
        for n in 4..12 {
            gregory_weights(n, &mut w);
            let q: f64 = w.iter().enumerate().map(|(j, wj)| wj * (j as f64).powi(3)).sum();
            assert!((q - (n as f64).powi(4) / 4.0).abs() < 1e-9, "{n}");
        }
    }
}
