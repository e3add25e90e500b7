//! Physical constants (CODATA 2018, SI) and the unit conversions used at the
//! crate's interfaces. Everything inside the crate is SI unless a name says
//! otherwise.

use std::f64::consts::PI;

pub const PLANCK: f64 = 6.626_070_15e-34;
/// h / 2π, kept exact so wavenumber and energy conversions agree.
pub const HBAR: f64 = PLANCK / (2.0 * PI);
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
pub const ELECTRON_MASS: f64 = 9.109_383_701_5e-31;
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
pub const BOHR_RADIUS: f64 = 5.291_772_109_03e-11;
pub const HARTREE: f64 = 4.359_744_722_207_1e-18;
/// 1 D = 10⁻²¹ / c  C·m.
pub const DEBYE: f64 = 1e-21 / SPEED_OF_LIGHT;

/// Angular frequency (rad/s) of a wavenumber given in cm⁻¹.
pub fn wavenumber_to_angular(nu_cm: f64) -> f64 {
    2.0 * PI * SPEED_OF_LIGHT * 100.0 * nu_cm
}

pub fn angular_to_wavenumber(omega: f64) -> f64 {
    omega / (2.0 * PI * SPEED_OF_LIGHT * 100.0)
}

/// Wavevector magnitude (rad/m) of light with the given wavenumber in cm⁻¹.
pub fn wavenumber_to_k(nu_cm: f64) -> f64 {
    2.0 * PI * 100.0 * nu_cm
}

pub fn joule_to_wavenumber(energy: f64) -> f64 {
    angular_to_wavenumber(energy / HBAR)
}

pub fn hartree_to_wavenumber(energy: f64) -> f64 {
    joule_to_wavenumber(energy * HARTREE)
}

pub fn amu_to_kg(mass: f64) -> f64 {
    mass * ATOMIC_MASS_UNIT
}

/// Average intensity in W/cm² to W/m².
pub fn w_per_cm2_to_si(intensity: f64) -> f64 {
    intensity * 1e4
}
