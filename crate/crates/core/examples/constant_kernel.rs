//! `S = 1`, `omega = 0`: the amplitude equation reduces to `c'' = -alpha c`.

use num_complex::Complex64;
use qedvolterra::atom::ModelParams;
use qedvolterra::kernels::KernelEvaluator;
use qedvolterra::volterra::{solve_ide, Method, TimeGrid};

fn main() {
    let k = KernelEvaluator::stationary("constant", |_| Complex64::new(1.0, 0.0));
    let p = ModelParams::new(0.25, 0.0).unwrap();
    for dt in [0.1, 0.01, 0.001] {
        let g = TimeGrid::covering(dt, 10.0).unwrap();
        for m in [Method::Trapezoid, Method::Gregory4] {
            let s = solve_ide(&k, &p, &g, m).unwrap();
            let err = s
                .values
                .iter()
                .zip(g.times())
                .map(|(c, t)| (c - (0.5 * t).cos()).norm())
                .fold(0.0, f64::max);
            println!("dt = {dt:<6} {m:<10} max |c - cos(t/2)| = {err:.3e}");
        }
    }
}
