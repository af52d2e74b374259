//! Per-element excitation phases.
//!
//! Three methods are provided:
//!
//! * **Time reversal**: a probe dipole at the focal point is evaluated at each
//!   element phase centre and the received field is conjugated; the phase of
//!   the conjugate is the element excitation.
//! * **Ray optic**: the element phase compensates the geometric path length
//!   `k0 · |p_n - r_s|`.
//! * **Far field**: a linear progressive phase that steers a plane wave in the
//!   direction of the target, ignoring wavefront curvature.
//!
//! Time reversal and ray optic differ by the constant `-π/2` of the dipole's
//! `j` factor, so they coincide once normalized to a reference element.

use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ArrayLayout, FrequencySpec, Point3, MIN_STANDOFF};
use crate::propagation::{dipole_field, phase, wrap_phase};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Tr,
    RayOptic,
    FarField,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Tr, Method::RayOptic, Method::FarField];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Tr => "tr",
            Method::RayOptic => "ray-optic",
            Method::FarField => "far-field",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Complex excitation of every element.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExcitationSet {
    pub method: Method,
    /// Radians, wrapped to `(-π, π]`.
    pub phases: Vec<f64>,
    pub amplitudes: Vec<f64>,
    /// Element used as the zero-phase reference by [`ExcitationSet::normalized`].
    pub reference_index: usize,
}

impl ExcitationSet {
    /// Unit-amplitude set from raw phases; phases are wrapped.
    pub fn phase_only(method: Method, phases: impl IntoIterator<Item = f64>) -> Self {
        let phases: Vec<f64> = phases.into_iter().map(wrap_phase).collect();
        let amplitudes = vec![1.0; phases.len()];
        Self {
            method,
            phases,
            amplitudes,
            reference_index: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    pub fn validate(&self, n_columns: usize) -> Result<()> {
        if self.phases.len() != n_columns || self.amplitudes.len() != n_columns {
            return Err(Error::invalid(format!(
                "ExcitationSet: expected {n_columns} phases and amplitudes, got {} and {}",
                self.phases.len(),
                self.amplitudes.len()
            )));
        }
        if let Some(a) = self.amplitudes.iter().find(|a| !(a.is_finite() && **a >= 0.0)) {
            return Err(Error::invalid(format!(
                "ExcitationSet: amplitudes must be finite and non-negative, got {a}"
            )));
        }
        if self.phases.iter().any(|p| !p.is_finite()) {
            return Err(Error::invalid("ExcitationSet: phases must be finite"));
        }
        Ok(())
    }

    /// Complex weights `a_n · exp(j φ_n)`.
    pub fn weights(&self) -> Vec<Complex64> {
        self.phases
            .iter()
            .zip(&self.amplitudes)
            .map(|(&p, &a)| Complex64::from_polar(a, p))
            .collect()
    }

    /// Phases relative to element `reference_index`, re-wrapped.
    pub fn normalized(&self, reference_index: usize) -> Result<Self> {
        let reference = *self.phases.get(reference_index).ok_or_else(|| {
            Error::invalid(format!(
                "normalize: reference index {reference_index} out of range for {} elements",
                self.phases.len()
            ))
        })?;
        Ok(Self {
            method: self.method,
            phases: self.phases.iter().map(|p| wrap_phase(p - reference)).collect(),
            amplitudes: self.amplitudes.clone(),
            reference_index,
        })
    }

    /// Snaps each phase to the nearest multiple of `2π / 2^bits`, ties
    /// rounded away from zero.
    pub fn quantized(&self, bits: u32) -> Result<Self> {
        if !(1..=16).contains(&bits) {
            return Err(Error::invalid(format!(
                "quantize: bits must be in 1..=16, got {bits}"
            )));
        }
        let step = TAU / f64::from(1u32 << bits);
        Ok(Self {
            phases: self
                .phases
                .iter()
                .map(|p| wrap_phase((p / step).round() * step))
                .collect(),
            ..self.clone()
        })
    }
}

fn check_standoff(layout: &ArrayLayout, target: Point3) -> Result<()> {
    if !target.is_finite() {
        return Err(Error::invalid(format!("target must be finite, got {target}")));
    }
    for p in layout.element_centers() {
        let d = p.distance(target);
        if d < MIN_STANDOFF {
            return Err(Error::Singularity {
                distance: d,
                min: MIN_STANDOFF,
            });
        }
    }
    Ok(())
}

/// Time-reversal phases: conjugate of the probe-dipole field received at
/// each element phase centre.
pub fn tr_phases(layout: &ArrayLayout, target: Point3, freq: &FrequencySpec) -> Result<ExcitationSet> {
    check_standoff(layout, target)?;
    let phases = layout
        .element_centers()
        .iter()
        .map(|&p| dipole_field(freq, target, p).map(|e| phase(e.conj())))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExcitationSet::phase_only(Method::Tr, phases))
}

/// Path-length compensation `k0 · |p_n - r_s|`.
pub fn ray_optic_phases(
    layout: &ArrayLayout,
    target: Point3,
    freq: &FrequencySpec,
) -> Result<ExcitationSet> {
    check_standoff(layout, target)?;
    let k0 = freq.wavenumber();
    Ok(ExcitationSet::phase_only(
        Method::RayOptic,
        layout.element_centers().iter().map(|p| k0 * p.distance(target)),
    ))
}

/// Progressive phase `-k0 · (û · p_n)` toward `û = r_s / |r_s|`.
pub fn far_field_phases(
    layout: &ArrayLayout,
    target: Point3,
    freq: &FrequencySpec,
) -> Result<ExcitationSet> {
    let norm = target.norm();
    if !(norm.is_finite() && norm > 0.0) {
        return Err(Error::invalid(format!(
            "far-field synthesis needs a non-zero finite direction, got {target}"
        )));
    }
    let u = target * (1.0 / norm);
    let k0 = freq.wavenumber();
    Ok(ExcitationSet::phase_only(
        Method::FarField,
        layout.element_centers().iter().map(|&p| -k0 * u.dot(p)),
    ))
}

pub fn synthesize(
    method: Method,
    layout: &ArrayLayout,
    target: Point3,
    freq: &FrequencySpec,
) -> Result<ExcitationSet> {
    match method {
        Method::Tr => tr_phases(layout, target, freq),
        Method::RayOptic => ray_optic_phases(layout, target, freq),
        Method::FarField => far_field_phases(layout, target, freq),
    }
}

/// Largest element-wise wrapped phase difference between two sets.
pub fn max_phase_delta(a: &ExcitationSet, b: &ExcitationSet) -> f64 {
    a.phases
        .iter()
        .zip(&b.phases)
        .map(|(x, y)| wrap_phase(x - y).abs())
        .fold(0.0, f64::max)
}
