//! Weak-coupling decay for `rho(p) = p e^{-p}`: time-domain fit, Markov
//! rate and resonance pole side by side.

use qedvolterra::atom::ModelParams;
use qedvolterra::cli::fit_decay;
use qedvolterra::kernels::{KernelEvaluator, SpectralDensity};
use qedvolterra::laplace::{find_pole, markov_rate};
use qedvolterra::quad::QuadConfig;
use qedvolterra::volterra::{solve_ide, Method, TimeGrid};

fn main() {
    let cfg = QuadConfig::default();
    let rho = SpectralDensity::ohmic(1.0, 1.0).unwrap();
    let p = ModelParams::new(0.01, 1.0).unwrap();
    let k = KernelEvaluator::from_density(&rho, &cfg).unwrap();
    let g = TimeGrid::covering(0.01, 200.0).unwrap();
    let s = solve_ide(&k, &p, &g, Method::Trapezoid).unwrap();
    let fit = fit_decay(&s, (40.0, 180.0)).unwrap();
    let pole = find_pole(&rho, &p, None, &cfg).unwrap();
    println!("gamma_fit    = {:.8} (r^2 = {:.10})", fit.gamma_fit, fit.r_squared);
    println!("gamma_pole   = {:.8} (s0 = {:.6e})", pole.gamma(), pole.s);
    println!("gamma_markov = {:.8}", markov_rate(&rho, &p));
    for t in [0.0, 1.0, 5.0, 50.0, 100.0, 200.0] {
        let c = s.values[(t / g.dt).round() as usize];
        println!("t = {t:>5}: |c|^2 = {:.8}, exp(-gamma_pole t) = {:.8}", c.norm_sqr(), (-pole.gamma() * t).exp());
    }
}
