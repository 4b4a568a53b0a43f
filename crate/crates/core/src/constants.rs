//! CODATA 2018 constants in SI units.

use std::f64::consts::PI;

pub const HBAR: f64 = 1.054_571_817e-34;
pub const PLANCK: f64 = 6.626_070_15e-34;
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
pub const BOHR_MAGNETON: f64 = 9.274_010_078_3e-24;
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// One debye in C·m.
pub const DEBYE: f64 = 1e-21 / SPEED_OF_LIGHT;

/// Angular frequency (rad/s) of a photon with the given energy in eV.
pub fn ev_to_angular(ev: f64) -> f64 {
    ev * ELEMENTARY_CHARGE / HBAR
}

pub fn angular_to_ev(omega: f64) -> f64 {
    omega * HBAR / ELEMENTARY_CHARGE
}

/// Cyclic frequency (Hz) to angular frequency (rad/s).
pub fn hz_to_angular(f: f64) -> f64 {
    2.0 * PI * f
}
