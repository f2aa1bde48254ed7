//! Physical constants and reference values.

/// Earth angular velocity, rad/s.
pub const EARTH_OMEGA: f64 = 7.29e-5;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Reduced speed of the CMB rest frame relative to Earth.
pub const CMB_BETA: f64 = 1.3e-3;

/// Orientation angle of the CMB frame velocity, degrees.
pub const CMB_CHI_DEG: f64 = 83.6;

/// Sidereal period implied by [`EARTH_OMEGA`], seconds.
pub fn sidereal_period(omega: f64) -> f64 {
    std::f64::consts::TAU / omega
}
