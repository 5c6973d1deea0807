//! Vacuum kernel `S(tau)` of the hydrogen transition, tabulated as CSV.

use std::f64::consts::PI;

use qedvolterra::kernels::{vacuum_kernel, SpectralDensity};
use qedvolterra::quad::QuadConfig;

fn main() {
    let alpha = 0.5;
    let cfg = QuadConfig::default();
    let rho = SpectralDensity::hydrogen(alpha).unwrap();
    let closed = 32.0 * alpha.powi(4) / (6561.0 * PI * PI);
    let s0 = vacuum_kernel(0.0, &rho, &cfg).unwrap();
    eprintln!("S(0) = {:.12e}, closed form {closed:.12e}", s0.re);
    println!("tau,re_s,im_s,abs_s");
    for k in 0..=60 {
        let tau = 0.5 * k as f64;
        let s = vacuum_kernel(tau, &rho, &cfg).unwrap();
        println!("{tau:.16e},{:.16e},{:.16e},{:.16e}", s.re, s.im, s.norm());
    }
}
