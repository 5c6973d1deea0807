//! Empirical convergence orders on the exponential kernel `S = e^{-|tau|}`.

use num_complex::Complex64;
use qedvolterra::atom::ModelParams;
use qedvolterra::kernels::KernelEvaluator;
use qedvolterra::volterra::{estimate_order, solve_ide, Method, TimeGrid};

fn main() {
    let k = KernelEvaluator::stationary("exp", |tau: f64| Complex64::new((-tau.abs()).exp(), 0.0));
    let p = ModelParams::new(0.1, 0.5).unwrap();
    let g = TimeGrid::covering(0.1, 50.0).unwrap();
    for m in [Method::Trapezoid, Method::Gregory4] {
        let e = estimate_order(|g| solve_ide(&k, &p, g, m), None, &g).unwrap();
        println!(
            "{m:<10} order {:.3} (differences {:.3e}, {:.3e})",
            e.order, e.errors[0], e.errors[1]
        );
    }
}
