//! Resonance poles on the second sheet and their approach to the Markov
//! rate at weak coupling.

use qedvolterra::atom::ModelParams;
use qedvolterra::kernels::SpectralDensity;
use qedvolterra::laplace::{find_poles, markov_rate};
use qedvolterra::quad::QuadConfig;

fn main() {
    let cfg = QuadConfig::default();
    println!("ohmic density, omega = 1");
    let rho = SpectralDensity::ohmic(1.0, 1.0).unwrap();
    for alpha in [0.001, 0.01, 0.05, 0.1] {
        let p = ModelParams::new(alpha, 1.0).unwrap();
        let poles = find_poles(&rho, &p, &cfg).unwrap();
        let gm = markov_rate(&rho, &p);
        let s0 = poles[0].s;
        println!(
            "alpha = {alpha:<6} s0 = {s0:.6e}  gamma/markov - 1 = {:+.3e}  ({} distinct roots)",
            poles[0].gamma() / gm - 1.0,
            poles.len()
        );
    }
    println!("hydrogen vacuum");
    for alpha in [0.05, 0.2, 0.5] {
        let rho = SpectralDensity::hydrogen(alpha).unwrap();
        let p = ModelParams::hydrogen(alpha).unwrap();
        let poles = find_poles(&rho, &p, &cfg).unwrap();
        println!(
            "alpha = {alpha:<6} gamma_pole = {:.6e}, gamma_markov = {:.6e}, shift = {:.3e}",
            poles[0].gamma(),
            markov_rate(&rho, &p),
            poles[0].shift()
        );
    }
}
