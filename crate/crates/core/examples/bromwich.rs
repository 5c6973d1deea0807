//! Numerical inverse Laplace transform of `c^(s)` against the time-domain
//! solver.

use qedvolterra::atom::ModelParams;
use qedvolterra::kernels::{KernelEvaluator, SpectralDensity};
use qedvolterra::laplace::bromwich_invert;
use qedvolterra::quad::QuadConfig;
use qedvolterra::volterra::{solve_ide, Method, TimeGrid};

fn main() {
    let cfg = QuadConfig::default();
    let rho = SpectralDensity::ohmic(1.0, 1.0).unwrap();
    let p = ModelParams::new(0.05, 1.0).unwrap();
    let coarse = TimeGrid::covering(1.0, 60.0).unwrap();
    let br = bromwich_invert(&rho, &p, &coarse, 1e-7, &cfg).unwrap();
    let k = KernelEvaluator::from_density(&rho, &cfg).unwrap();
    let ide = solve_ide(&k, &p, &TimeGrid::covering(0.01, 60.0).unwrap(), Method::Gregory4).unwrap();
    println!(
        "sigma = {:.4}, y_max = {:.1}, {} nodes, max |bromwich - ide| = {:.2e}",
        br.sigma,
        br.y_max,
        br.nodes,
        br.series.max_deviation(&ide).unwrap()
    );
    for (k, c) in br.series.values.iter().enumerate().step_by(10) {
        println!("t = {:>4}: c = {c:.8}, error bound {:.1e}", coarse.t(k), br.error_estimate[k]);
    }
}
