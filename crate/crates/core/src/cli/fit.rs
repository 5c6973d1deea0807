use crate::volterra::AmplitudeSeries;

use super::CliError;

/// Fits with `r_squared` below this are flagged unreliable.
pub const RELIABLE_R2: f64 = 0.95;

/// Exponential fit `|c(t)|^2 ~ exp(intercept - gamma_fit t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub gamma_fit: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
}

impl DecayFit {
    pub fn reliable(&self) -> bool {
        self.r_squared >= RELIABLE_R2
    }
}

/// Least-squares line through `(t, ln |c(t)|^2)` for grid points in
/// `[t1, t2]`; `gamma_fit` is minus the slope.
pub fn fit_decay(series: &AmplitudeSeries, window: (f64, f64)) -> Result<DecayFit, CliError> {
    let (t1, t2) = window;
    let t_end = series.grid.t_max();
    if !(0.0 <= t1 && t1 < t2 && t2 <= t_end * (1.0 + 1e-12)) {
        return Err(CliError::Fit(format!(
            "window [{t1}, {t2}] is not inside the solved range [0, {t_end}]"
        )));
    }
    let mut pts = Vec::new();
    for (k, c) in series.values.iter().enumerate() {
        let t = series.grid.t(k);
        if t < t1 || t > t2 {
            continue;
        }
        let a = c.norm_sqr();
        if !(a > 0.0) {
            return Err(CliError::Fit(format!("|c| vanishes at t = {t}")));
        }
        pts.push((t, a.ln()));
    }
    if pts.len() < 10 {
        return Err(CliError::Fit(format!(
            "only {} points in the fit window (need 10)",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let (mt, my) = pts
        .iter()
        .fold((0.0, 0.0), |(a, b), &(t, y)| (a + t / n, b + y / n));
    let (mut stt, mut sty, mut syy) = (0.0, 0.0, 0.0);
    for &(t, y) in &pts {
        stt += (t - mt) * (t - mt);
        sty += (t - mt) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sty / stt;
    let intercept = my - slope * mt;
    let ss_res: f64 = pts
        .iter()
        .map(|&(t, y)| (y - intercept - slope * t).powi(2))
        .sum();
    // a flat series is a perfect (zero-rate) line
    let r_squared = if syy > 0.0 { (1.0 - ss_res / syy).clamp(0.0, 1.0) } else { 1.0 };
    Ok(DecayFit {
        gamma_fit: -slope,
        intercept,
        r_squared,
        window,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::volterra::TimeGrid;
    use num_complex::Complex64;

    fn series(f: impl Fn(f64) -> Complex64, dt: f64, n: usize) -> AmplitudeSeries {
        let grid = TimeGrid::new(dt, n).unwrap();
        AmplitudeSeries {
            values: grid.times().map(f).collect(),
            grid,
            method: "synthetic".into(),
            kernel_label: String::new(),
            alpha: 0.0,
            omega: 0.0,
        }
    }

    #[test]
    fn exact_exponential() {
        let s = series(|t| Complex64::new((-0.025 * t).exp(), 0.0), 0.5, 400);
        let f = fit_decay(&s, (40.0, 180.0)).unwrap();
        assert!((f.gamma_fit - 0.05).abs() < 1e-10);
        assert!((f.r_squared - 1.0).abs() < 1e-12 && f.reliable());
    }

    #[test]
    fn oscillation_is_unreliable() {
        let s = series(|t| Complex64::new((0.5 * t).cos(), 0.0), 0.01, 1000);
        let f = fit_decay(&s, (2.0, 9.0)).unwrap();
        assert!(!f.reliable(), "{f:?}");
    }

    #[test]
    fn rejects_bad_windows() {
        let s = series(|_| Complex64::new(1.0, 0.0), 0.1, 100);
        assert!(fit_decay(&s, (5.0, 20.0)).is_err());
        assert!(fit_decay(&s, (5.0, 5.5)).is_err());
        let flat = fit_decay(&s, (1.0, 9.0)).unwrap();
        assert_eq!((flat.gamma_fit, flat.r_squared), (0.0, 1.0));
        let zero = series(|_| Complex64::new(0.0, 0.0), 0.1, 100);
        assert!(fit_decay(&zero, (1.0, 9.0)).is_err());
    }
}
