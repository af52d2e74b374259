//! Frequency, array lattice and observation grids.
//!
//! Coordinate frame: the array lies in the `z = 0` plane and radiates toward
//! `+z`. Each waveguide column runs along `x` (H-plane is `x–z`) and columns
//! are stacked along `y` (E-plane is `y–z`). Every layout is centred on the
//! origin when built with [`ArrayLayout::new`].

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Vacuum permeability, H/m (classical 4π·10⁻⁷ value).
pub const MU0: f64 = 4.0e-7 * PI;

/// Minimum separation between a source and an observation point, m.
pub const MIN_STANDOFF: f64 = 1e-6;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const ORIGIN: Point3 = Point3::new(0.0, 0.0, 0.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, other: Point3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(self, other: Point3) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn component(self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.x,
            Axis::Y => self.y,
            Axis::Z => self.z,
        }
    }

    fn with_component(mut self, axis: Axis, value: f64) -> Self {
        match axis {
            Axis::X => self.x = value,
            Axis::Y => self.y = value,
            Axis::Z => self.z = value,
        }
        self
    }
}

impl Add for Point3 {
    type Output = Point3;
    fn add(self, o: Point3) -> Point3 {
        Point3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Point3 {
    type Output = Point3;
    fn sub(self, o: Point3) -> Point3 {
        Point3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Point3 {
    type Output = Point3;
    fn neg(self) -> Point3 {
        Point3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Point3 {
    type Output = Point3;
    fn mul(self, s: f64) -> Point3 {
        Point3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl fmt::Display for Point3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

/// Operating frequency and the free-space quantities derived from it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FrequencySpec {
    f: f64,
    lambda0: f64,
    k0: f64,
    omega: f64,
}

impl FrequencySpec {
    pub fn new(f: f64) -> Result<Self> {
        if !(f.is_finite() && f > 0.0) {
            return Err(Error::invalid(format!(
                "FrequencySpec: frequency must be positive and finite, got {f}"
            )));
        }
        let lambda0 = SPEED_OF_LIGHT / f;
        Ok(Self {
            f,
            lambda0,
            k0: 2.0 * PI / lambda0,
            omega: 2.0 * PI * f,
        })
    }

    /// Frequency in Hz.
    pub fn hz(&self) -> f64 {
        self.f
    }

    /// Free-space wavelength in m.
    pub fn wavelength(&self) -> f64 {
        self.lambda0
    }

    /// Free-space wavenumber in rad/m.
    pub fn wavenumber(&self) -> f64 {
        self.k0
    }

    /// Angular frequency in rad/s.
    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn c(&self) -> f64 {
        SPEED_OF_LIGHT
    }

    pub fn mu0(&self) -> f64 {
        MU0
    }
}

/// Geometry of one slotted waveguide column. Lengths in metres.
///
/// Defaults describe the 5.8 GHz WR-159-class guide with ten broad-wall slots.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SlotColumnSpec {
    pub n_slots: usize,
    #[serde(rename = "slot_pitch_m")]
    pub slot_pitch: f64,
    #[serde(rename = "slot_length_m")]
    pub slot_length: f64,
    #[serde(rename = "slot_width_m")]
    pub slot_width: f64,
    #[serde(rename = "guide_width_m")]
    pub guide_width_a: f64,
    #[serde(rename = "guide_height_m")]
    pub guide_height_b: f64,
    #[serde(rename = "end_gap_m")]
    pub end_gap: f64,
    #[serde(rename = "sidewall_offset_m")]
    pub sidewall_offset: f64,
}

impl Default for SlotColumnSpec {
    fn default() -> Self {
        Self {
            n_slots: 10,
            slot_pitch: 0.032,
            slot_length: 0.0224,
            slot_width: 0.004,
            guide_width_a: 0.0404,
            guide_height_b: 0.0198,
            end_gap: 0.010,
            sidewall_offset: 0.011,
        }
    }
}

impl SlotColumnSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_slots == 0 {
            return Err(Error::invalid("SlotColumnSpec: n_slots must be at least 1"));
        }
        let lengths = [
            ("slot_pitch", self.slot_pitch),
            ("slot_length", self.slot_length),
            ("slot_width", self.slot_width),
            ("guide_width_a", self.guide_width_a),
            ("guide_height_b", self.guide_height_b),
            ("end_gap", self.end_gap),
            ("sidewall_offset", self.sidewall_offset),
        ];
        for (name, v) in lengths {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(format!(
                    "SlotColumnSpec: {name} must be positive and finite, got {v}"
                )));
            }
        }
        if self.slot_length >= self.guide_width_a {
            return Err(Error::invalid(format!(
                "SlotColumnSpec: slot_length ({}) must be shorter than guide_width_a ({})",
                self.slot_length, self.guide_width_a
            )));
        }
        Ok(())
    }
}

/// Positions of the phase-controlled columns and their slot sub-sources.
///
/// One column is one element: a single phase shifter feeds the whole
/// waveguide, so the element phase centre is the centroid of its slot line.
/// Slot transverse offsets are collapsed onto the column axis.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ArrayLayout {
    n_columns: usize,
    column_pitch: f64,
    column_spec: SlotColumnSpec,
    element_centers: Vec<Point3>,
    slot_centers: Vec<Vec<Point3>>,
}

/// Offset of index `i` from the centre of `n` evenly spaced samples.
fn centred_offset(i: usize, n: usize, pitch: f64) -> f64 {
    (i as f64 - (n - 1) as f64 / 2.0) * pitch
}

impl ArrayLayout {
    pub fn new(n_columns: usize, column_pitch: f64, spec: SlotColumnSpec) -> Result<Self> {
        if n_columns == 0 {
            return Err(Error::invalid("ArrayLayout: n_columns must be at least 1"));
        }
        if !(column_pitch.is_finite() && column_pitch > 0.0) {
            return Err(Error::invalid(format!(
                "ArrayLayout: column_pitch must be positive and finite, got {column_pitch}"
            )));
        }
        spec.validate()?;

        let element_centers: Vec<Point3> = (0..n_columns)
            .map(|m| Point3::new(0.0, centred_offset(m, n_columns, column_pitch), 0.0))
            .collect();
        let slot_centers = element_centers
            .iter()
            .map(|c| {
                (0..spec.n_slots)
                    .map(|s| Point3::new(centred_offset(s, spec.n_slots, spec.slot_pitch), c.y, c.z))
                    .collect()
            })
            .collect();

        Ok(Self {
            n_columns,
            column_pitch,
            column_spec: spec,
            element_centers,
            slot_centers,
        })
    }

    /// Default eight-column array with 20.8 mm stacking pitch.
    pub fn default_array() -> Self {
        Self::new(8, 0.0208, SlotColumnSpec::default()).expect("default layout is valid")
    }

    pub fn n_columns(&self) -> usize {
        self.n_columns
    }

    pub fn column_pitch(&self) -> f64 {
        self.column_pitch
    }

    pub fn column_spec(&self) -> &SlotColumnSpec {
        &self.column_spec
    }

    pub fn element_centers(&self) -> &[Point3] {
        &self.element_centers
    }

    pub fn slot_centers(&self, column: usize) -> &[Point3] {
        &self.slot_centers[column]
    }

    pub fn centroid(&self) -> Point3 {
        let sum = self
            .element_centers
            .iter()
            .fold(Point3::ORIGIN, |acc, &p| acc + p);
        sum * (1.0 / self.n_columns as f64)
    }

    /// Rigidly shifted copy. The result is no longer centred on the origin.
    pub fn translated(&self, offset: Point3) -> Self {
        let mut out = self.clone();
        for p in &mut out.element_centers {
            *p = *p + offset;
        }
        for col in &mut out.slot_centers {
            for p in col {
                *p = *p + offset;
            }
        }
        out
    }

    /// Largest aperture extent: the slot-line span along `x` or the column
    /// span along `y`, whichever is larger.
    pub fn aperture_size(&self) -> f64 {
        let span = |vals: &mut dyn Iterator<Item = f64>| {
            let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            });
            hi - lo
        };
        let x_span = span(&mut self.slot_centers.iter().flatten().map(|p| p.x));
        let y_span = span(&mut self.element_centers.iter().map(|p| p.y));
        x_span.max(y_span)
    }

    /// `2 D² / λ0`, the conventional boundary of the radiating near field.
    pub fn fraunhofer_distance(&self, freq: &FrequencySpec) -> f64 {
        let d = self.aperture_size();
        2.0 * d * d / freq.wavelength()
    }

    /// Short hex digest of the source coordinates, for tagging outputs.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.n_columns as u64).to_le_bytes());
        h.update((self.column_spec.n_slots as u64).to_le_bytes());
        let mut push = |p: &Point3| {
            for v in [p.x, p.y, p.z] {
                h.update(v.to_bits().to_le_bytes());
            }
        };
        self.element_centers.iter().for_each(&mut push);
        self.slot_centers.iter().flatten().for_each(&mut push);
        h.finalize()[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Desired focal point; must lie in front of the aperture.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FocalTarget(Point3);

impl FocalTarget {
    pub fn new(r_s: Point3) -> Result<Self> {
        if !r_s.is_finite() || r_s.z <= 0.0 {
            return Err(Error::invalid(format!(
                "FocalTarget: target must be finite with z > 0, got {r_s}"
            )));
        }
        Ok(Self(r_s))
    }

    pub fn position(&self) -> Point3 {
        self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Principal cut through the array centre.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CutPlane {
    /// `y–z` plane at `x = 0`.
    EPlane,
    /// `x–z` plane at `y = 0`.
    HPlane,
}

impl CutPlane {
    pub fn lateral_axis(self) -> Axis {
        match self {
            CutPlane::EPlane => Axis::Y,
            CutPlane::HPlane => Axis::X,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum GridKind {
    AxialLine,
    PlaneCut { plane: CutPlane },
    Box,
}

/// One sampled coordinate axis: `count` points from `lo` to `hi` inclusive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridAxis {
    pub axis: Axis,
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl GridAxis {
    /// Sample coordinate. Written as a two-sided blend so that a range
    /// symmetric about zero yields exactly mirrored samples.
    pub fn coord(&self, i: usize) -> f64 {
        if self.count == 1 {
            return self.lo;
        }
        let last = (self.count - 1) as f64;
        self.lo * ((self.count - 1 - i) as f64 / last) + self.hi * (i as f64 / last)
    }

    pub fn step(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.hi - self.lo) / (self.count - 1) as f64
        }
    }

    pub fn extent(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_swept(&self) -> bool {
        self.count > 1
    }
}

/// Structured set of observation points, scanned fastest axis first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservationGrid {
    pub kind: GridKind,
    /// Coordinates of the axes not listed in `axes`.
    pub anchor: Point3,
    pub axes: Vec<GridAxis>,
}

impl ObservationGrid {
    /// Line along `z` through `(x, y)`.
    pub fn axial_line(x: f64, y: f64, z_min: f64, z_max: f64, samples: usize) -> Result<Self> {
        let grid = Self {
            kind: GridKind::AxialLine,
            anchor: Point3::new(x, y, 0.0),
            axes: vec![GridAxis {
                axis: Axis::Z,
                lo: z_min,
                hi: z_max,
                count: samples,
            }],
        };
        grid.validate()?;
        Ok(grid)
    }

    /// Principal-plane cut through the array centre; the lateral axis is
    /// the fast scan axis.
    pub fn plane_cut(
        plane: CutPlane,
        lateral: (f64, f64),
        z: (f64, f64),
        samples: (usize, usize),
    ) -> Result<Self> {
        let grid = Self {
            kind: GridKind::PlaneCut { plane },
            anchor: Point3::ORIGIN,
            axes: vec![
                GridAxis {
                    axis: plane.lateral_axis(),
                    lo: lateral.0,
                    hi: lateral.1,
                    count: samples.0,
                },
                GridAxis {
                    axis: Axis::Z,
                    lo: z.0,
                    hi: z.1,
                    count: samples.1,
                },
            ],
        };
        grid.validate()?;
        Ok(grid)
    }

    /// Axis-aligned box. An axis with one sample must have `min == max`.
    pub fn boxed(min: Point3, max: Point3, samples: [usize; 3]) -> Result<Self> {
        let axes = [Axis::X, Axis::Y, Axis::Z]
            .into_iter()
            .zip(samples)
            .map(|(axis, count)| GridAxis {
                axis,
                lo: min.component(axis),
                hi: max.component(axis),
                count,
            })
            .collect();
        let grid = Self {
            kind: GridKind::Box,
            anchor: Point3::ORIGIN,
            axes,
        };
        grid.validate()?;
        Ok(grid)
    }

    /// Single observation point.
    pub fn point(p: Point3) -> Result<Self> {
        Self::boxed(p, p, [1, 1, 1])
    }

    pub fn validate(&self) -> Result<()> {
        if !self.anchor.is_finite() {
            return Err(Error::invalid("ObservationGrid: anchor must be finite"));
        }
        let min_count = match self.kind {
            GridKind::Box => 1,
            _ => 2,
        };
        for a in &self.axes {
            if !(a.lo.is_finite() && a.hi.is_finite()) {
                return Err(Error::invalid(format!(
                    "ObservationGrid: {:?} extent must be finite",
                    a.axis
                )));
            }
            if a.count < min_count {
                return Err(Error::invalid(format!(
                    "ObservationGrid: {:?} axis needs at least {min_count} samples, got {}",
                    a.axis, a.count
                )));
            }
            if a.count == 1 && a.lo != a.hi {
                return Err(Error::invalid(format!(
                    "ObservationGrid: single-sample {:?} axis must have min == max",
                    a.axis
                )));
            }
            if a.count > 1 && a.hi <= a.lo {
                return Err(Error::invalid(format!(
                    "ObservationGrid: {:?} extent must be positive ({} .. {})",
                    a.axis, a.lo, a.hi
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Per-axis sample indices of scan index `index`.
    pub fn unravel(&self, mut index: usize) -> Vec<usize> {
        self.axes
            .iter()
            .map(|a| {
                let i = index % a.count;
                index /= a.count;
                i
            })
            .collect()
    }

    /// Scan index of per-axis sample indices.
    pub fn ravel(&self, idx: &[usize]) -> usize {
        self.axes
            .iter()
            .zip(idx)
            .rev()
            .fold(0, |acc, (a, &i)| acc * a.count + i)
    }

    pub fn point_at(&self, index: usize) -> Point3 {
        let mut p = self.anchor;
        let mut rest = index;
        for a in &self.axes {
            let i = rest % a.count;
            rest /= a.count;
            p = p.with_component(a.axis, a.coord(i));
        }
        p
    }

    pub fn points(&self) -> impl Iterator<Item = Point3> + '_ {
        (0..self.len()).map(move |i| self.point_at(i))
    }

    /// Position of `axis` within `axes`, if sampled.
    pub fn axis_position(&self, axis: Axis) -> Option<usize> {
        self.axes.iter().position(|a| a.axis == axis)
    }
}
