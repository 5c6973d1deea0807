//! Rate table over the coupling, as produced by `qedvolterra sweep`.

use qedvolterra::cli::{sweep_csv, Mode, Settings};

fn main() {
    let mut s = Settings::default();
    for pair in [
        "sweep_axis=alpha",
        "sweep_values=0.001,0.003,0.01,0.03,0.1",
    ] {
        s.set_pair(pair).unwrap();
    }
    let cfg = s.into_config(Mode::Sweep).unwrap();
    print!("{}", sweep_csv(&cfg).unwrap());
}
