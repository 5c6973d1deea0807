//! Dimensionless units and the hydrogen 2P -> 1S scales.

use qedvolterra::atom::ModelParams;
use qedvolterra::kernels::SpectralDensity;
use qedvolterra::laplace::markov_rate;
use qedvolterra::units::{UnitSystem, FINE_STRUCTURE};

fn main() {
    let u = UnitSystem::codata2018();
    print!("{}", u.reference_table());
    let p = ModelParams::hydrogen(FINE_STRUCTURE).unwrap();
    let gamma = markov_rate(&SpectralDensity::hydrogen(FINE_STRUCTURE).unwrap(), &p);
    println!("omega        = {:.6e} (= {:.4} eV)", p.omega, u.energy_to_ev(p.omega));
    println!("gamma_markov = {gamma:.4e} (= {:.4e} 1/s)", u.rate_to_si(gamma));
    println!("lifetime     = {:.3} ns", u.time_to_si(1.0 / gamma) * 1e9);
    println!("decay / kernel time scale ratio ~ {:.1e}", FINE_STRUCTURE / gamma);
}
