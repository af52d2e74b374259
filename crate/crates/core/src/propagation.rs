//! Free-space scalar Green's function and probe-dipole field.
//!
//! The kernel between two points separated by `d` is
//! `G = exp(-j k0 d) / (4π d)`; a unit probe dipole at `r_s` produces
//! `E(r) = j ω μ0 G(k0, r, r_s)`. Fields are scalar amplitudes throughout.
//! All phases are reported in `(-π, π]`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{FrequencySpec, Point3, MIN_STANDOFF};

/// Complex field sample (V/m for fields, 1/m for bare kernel values).
pub type ComplexField = Complex64;

/// Wraps an angle into `(-π, π]`.
pub fn wrap_phase(angle: f64) -> f64 {
    let r = angle.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Wrapped phase of a complex value.
pub fn phase(z: Complex64) -> f64 {
    wrap_phase(z.im.atan2(z.re))
}

/// Signed angular distance `a - b`, wrapped into `(-π, π]`.
pub fn phase_difference(a: f64, b: f64) -> f64 {
    wrap_phase(a - b)
}

/// Kernel value for a known separation. Caller guarantees `d >= MIN_STANDOFF`.
#[inline]
pub(crate) fn green_at_distance(k0: f64, d: f64) -> Complex64 {
    let (s, c) = (k0 * d).sin_cos();
    let mag = 1.0 / (4.0 * PI * d);
    Complex64::new(mag * c, -mag * s)
}

fn checked_distance(r1: Point3, r2: Point3) -> Result<f64> {
    let d = r1.distance(r2);
    if d < MIN_STANDOFF || !d.is_finite() {
        return Err(Error::Singularity {
            distance: d,
            min: MIN_STANDOFF,
        });
    }
    Ok(d)
}

/// Free-space scalar Green's function between `r1` and `r2`.
pub fn scalar_green(k0: f64, r1: Point3, r2: Point3) -> Result<ComplexField> {
    let d = checked_distance(r1, r2)?;
    Ok(green_at_distance(k0, d))
}

/// Field at `r_obs` radiated by a unit probe dipole placed at `r_s`.
pub fn dipole_field(freq: &FrequencySpec, r_s: Point3, r_obs: Point3) -> Result<ComplexField> {
    let g = scalar_green(freq.wavenumber(), r_obs, r_s)?;
    Ok(Complex64::new(0.0, freq.omega() * freq.mu0()) * g)
}

/// Phase of a dipole field value at separation `d`, for reference.
pub fn dipole_phase_at(k0: f64, d: f64) -> f64 {
    wrap_phase(FRAC_PI_2 - k0 * d)
}
