//! Squeezed initial states: concentrated and Gaussian-wavepacket kernels and
//! their effect on the amplitude.

use qedvolterra::atom::{ModelParams, SmearingFunction};
use qedvolterra::kernels::{
    concentrated_amplitude, concentrated_envelope, make_kernel, KernelState, SpectralDensity,
    SqueezeParams,
};
use qedvolterra::quad::QuadConfig;
use qedvolterra::volterra::{solve_ide, Method, TimeGrid};

fn main() {
    let alpha = 0.5;
    let cfg = QuadConfig::default();
    let p = ModelParams::hydrogen(alpha).unwrap();
    let rho = SpectralDensity::hydrogen(alpha).unwrap();
    let chi = SmearingFunction::hydrogen_2p1s(alpha);
    let (q, d, sigma) = ([0.3, 0.0, 0.0], [0.0, 0.0, 1.0], 0.05);
    let g = TimeGrid::covering(0.02, 20.0).unwrap();
    let vacuum = make_kernel(&KernelState::Vacuum, &rho, &chi, &cfg).unwrap();
    let base = solve_ide(&vacuum, &p, &g, Method::Trapezoid).unwrap();
    for r in [0.0, 0.5, 1.0] {
        let sq = SqueezeParams::real(r, q, d).unwrap();
        let conc = sq.clone().with_amplitude(concentrated_amplitude(sigma, q));
        let env = concentrated_envelope(&conc, &chi);
        let kc = make_kernel(&KernelState::SqueezedConcentrated(conc), &rho, &chi, &cfg).unwrap();
        let kg = make_kernel(&KernelState::SqueezedGeneral(sq.with_gaussian(sigma).unwrap()), &rho, &chi, &cfg).unwrap();
        let sc = solve_ide(&kc, &p, &g, Method::Trapezoid).unwrap();
        let sg = solve_ide(&kg, &p, &g, Method::Trapezoid).unwrap();
        println!(
            "r = {r}: |dS| envelope {env:.3e}; max |c - c_vac|: concentrated {:.3e}, gaussian {:.3e}; gaussian vs concentrated {:.3e}; max|c| {:.12}",
            sc.max_deviation(&base).unwrap(),
            sg.max_deviation(&base).unwrap(),
            sg.max_deviation(&sc).unwrap(),
            sg.max_abs()
        );
    }
}
