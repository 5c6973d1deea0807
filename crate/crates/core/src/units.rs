//! Dimensionless units.
//!
//! Energies are measured in units of the electron rest energy `m_e c^2`,
//! lengths in reduced Compton wavelengths `hbar / (m_e c)` and times in
//! `hbar / (m_e c^2)`. The fine-structure constant is the only coupling that
//! survives the rescaling.

use std::fmt::Write;

/// Electron rest energy in eV (CODATA 2018).
pub const ELECTRON_REST_ENERGY_EV: f64 = 510_998.950;
/// Reduced Planck constant in eV s (CODATA 2018).
pub const HBAR_EV_S: f64 = 6.582_119_569e-16;
/// Reduced Planck constant in J s (CODATA 2018).
pub const HBAR_J_S: f64 = 1.054_571_817e-34;
/// Elementary charge in C (exact).
pub const ELEMENTARY_CHARGE_C: f64 = 1.602_176_634e-19;
/// Speed of light in m/s (exact).
pub const SPEED_OF_LIGHT_M_S: f64 = 299_792_458.0;
/// Default fine-structure constant.
pub const FINE_STRUCTURE: f64 = 1.0 / 137.035_999;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitSystem {
    pub electron_rest_energy_ev: f64,
    pub compton_time_s: f64,
    pub compton_length_m: f64,
    pub fine_structure_default: f64,
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self::codata2018()
    }
}

impl UnitSystem {
    pub fn codata2018() -> Self {
        let compton_time_s = HBAR_EV_S / ELECTRON_REST_ENERGY_EV;
        Self {
            electron_rest_energy_ev: ELECTRON_REST_ENERGY_EV,
            compton_time_s,
            compton_length_m: SPEED_OF_LIGHT_M_S * compton_time_s,
            fine_structure_default: FINE_STRUCTURE,
        }
    }

    /// Electron rest energy in joules.
    pub fn electron_rest_energy_j(&self) -> f64 {
        self.electron_rest_energy_ev * ELEMENTARY_CHARGE_C
    }

    /// Unit of momentum `m_e c` in kg m/s.
    pub fn momentum_unit_si(&self) -> f64 {
        self.electron_rest_energy_j() / SPEED_OF_LIGHT_M_S
    }

    pub fn time_to_si(&self, t: f64) -> f64 {
        t * self.compton_time_s
    }

    pub fn time_from_si(&self, seconds: f64) -> f64 {
        seconds / self.compton_time_s
    }

    pub fn energy_to_ev(&self, e: f64) -> f64 {
        e * self.electron_rest_energy_ev
    }

    pub fn energy_from_ev(&self, ev: f64) -> f64 {
        ev / self.electron_rest_energy_ev
    }

    pub fn length_to_si(&self, x: f64) -> f64 {
        x * self.compton_length_m
    }

    pub fn length_from_si(&self, meters: f64) -> f64 {
        meters / self.compton_length_m
    }

    pub fn momentum_to_si(&self, p: f64) -> f64 {
        p * self.momentum_unit_si()
    }

    pub fn momentum_from_si(&self, kg_m_s: f64) -> f64 {
        kg_m_s / self.momentum_unit_si()
    }

    /// A rate (inverse dimensionless time) in 1/s.
    pub fn rate_to_si(&self, gamma: f64) -> f64 {
        gamma / self.compton_time_s
    }

    pub fn rate_from_si(&self, per_second: f64) -> f64 {
        per_second * self.compton_time_s
    }

    /// Markdown table of the constants and derived conversion factors.
    pub fn reference_table(&self) -> String {
        let rows = [
            ("electron rest energy m_e c^2", self.electron_rest_energy_ev, "eV"),
            ("time unit hbar/(m_e c^2)", self.compton_time_s, "s"),
            ("length unit hbar/(m_e c)", self.compton_length_m, "m"),
            ("momentum unit m_e c", self.momentum_unit_si(), "kg m/s"),
            ("reduced Planck constant", HBAR_J_S, "J s"),
            ("elementary charge", ELEMENTARY_CHARGE_C, "C"),
            ("speed of light", SPEED_OF_LIGHT_M_S, "m/s"),
            ("fine-structure constant (default)", self.fine_structure_default, "1"),
        ];
        let mut out = String::from("| quantity | value | unit |\n|---|---|---|\n");
        for (name, value, unit) in rows {
            let _ = writeln!(out, "| {name} | {value:.9e} | {unit} |");
        }
        out
    }
}

/// Dimensionless time to seconds with the CODATA 2018 constants.
pub fn time_to_si(t: f64) -> f64 {
    UnitSystem::codata2018().time_to_si(t)
}

/// Dimensionless energy to eV with the CODATA 2018 constants.
pub fn energy_to_ev(e: f64) -> f64 {
    UnitSystem::codata2018().energy_to_ev(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn constants_positive() {
        let u = UnitSystem::codata2018();
        assert!(u.electron_rest_energy_ev > 0.0);
        assert!(u.compton_time_s > 0.0);
        assert!(u.compton_length_m > 0.0);
        assert!(u.fine_structure_default > 0.0);
    }

    #[test]
    fn compton_time_times_rest_energy_is_hbar() {
        let u = UnitSystem::codata2018();
        let hbar = u.compton_time_s * u.electron_rest_energy_j();
        assert!(rel(hbar, HBAR_J_S) < 5e-7, "{hbar}");
    }

    #[test]
    fn time_unit_is_about_1_25e_minus_21_seconds() {
        // CODATA gives 1.288e-21 s; the commonly quoted rounded figure is 1.25e-21 s.
        let t = time_to_si(1.0);
        assert!(rel(t, 1.25e-21) < 0.05, "{t}");
        assert!(rel(t, 1.288_088_67e-21) < 1e-8, "{t}");
        assert_eq!(time_to_si(0.0), 0.0);
        assert!(rel(time_to_si(8.0e20), 1.0) < 0.05);
    }

    #[test]
    fn energy_examples() {
        assert!(rel(energy_to_ev(1.0), 510_998.95) < 1e-12);
        assert_eq!(energy_to_ev(0.0), 0.0);
        assert!((energy_to_ev(1.99693e-5) - 10.20).abs() < 0.01);
    }

    #[test]
    fn reference_table_lists_every_constant() {
        let table = UnitSystem::codata2018().reference_table();
        assert_eq!(table.lines().count(), 10);
        assert!(table.contains("5.109989500e5"));
    }

    proptest! {
        #[test]
        fn round_trips(x in -1e30f64..1e30) {
            let u = UnitSystem::codata2018();
            let tol = 1e-12 * x.abs().max(f64::MIN_POSITIVE);
            prop_assert!((u.time_from_si(u.time_to_si(x)) - x).abs() <= tol);
            prop_assert!((u.energy_from_ev(u.energy_to_ev(x)) - x).abs() <= tol);
            prop_assert!((u.length_from_si(u.length_to_si(x)) - x).abs() <= tol);
            prop_assert!((u.momentum_from_si(u.momentum_to_si(x)) - x).abs() <= tol);
            prop_assert!((u.rate_from_si(u.rate_to_si(x)) - x).abs() <= tol);
        }

        #[test]
        fn linear(a in -1e3f64..1e3, x in -1e3f64..1e3) {
            let u = UnitSystem::codata2018();
            let lhs = u.time_to_si(a * x);
            let rhs = a * u.time_to_si(x);
            prop_assert!((lhs - rhs).abs() <= 1e-14 * rhs.abs().max(1e-300));
            let lhs = u.energy_to_ev(a * x);
            let rhs = a * u.energy_to_ev(x);
            prop_assert!((lhs - rhs).abs() <= 1e-14 * rhs.abs().max(1e-300));
        }
    }
}
