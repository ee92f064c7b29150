//! Physical constants and unit conversions.
//!
//! Internally every frequency and rate is an angular frequency in rad·MHz
//! (equivalently rad/μs). Josephson and charging energies are kept as E/h in
//! GHz, capacitances in fF and flux in units of the flux quantum.

use std::f64::consts::PI;

/// Planck constant (J·s, exact SI value).
pub const PLANCK: f64 = 6.626_070_15e-34;

/// Elementary charge (C, exact SI value).
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;

pub const TWO_PI: f64 = 2.0 * PI;

/// Linear frequency in MHz to angular rad·MHz.
pub fn mhz(linear: f64) -> f64 {
    TWO_PI * linear
}

/// Linear frequency in GHz to angular rad·MHz.
pub fn ghz(linear: f64) -> f64 {
    TWO_PI * 1e3 * linear
}

/// Angular rad·MHz back to linear MHz.
pub fn to_linear_mhz(angular: f64) -> f64 {
    angular / TWO_PI
}

/// Angular rad·MHz back to linear GHz.
pub fn to_linear_ghz(angular: f64) -> f64 {
    angular / (TWO_PI * 1e3)
}

/// Capacitance (fF) whose single-electron charging energy `e²/2C` equals
/// `energy_ghz · h`.
pub fn capacitance_from_charging_energy(energy_ghz: f64) -> f64 {
    let joules = energy_ghz * 1e9 * PLANCK;
    ELEMENTARY_CHARGE * ELEMENTARY_CHARGE / (2.0 * joules) * 1e15
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coupler_capacitance_from_200_mhz() {
        let c = capacitance_from_charging_energy(0.2);
        assert!((c - 96.85).abs() < 0.01, "C_c = {c}");
    }

    #[test]
    fn round_trips() {
        assert!((to_linear_ghz(ghz(7.0)) - 7.0).abs() < 1e-12);
        assert!((to_linear_mhz(mhz(0.5)) - 0.5).abs() < 1e-15);
    }
}
