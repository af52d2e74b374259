//! Superposition of element contributions over observation grids.
//!
//! Each grid point is evaluated independently. Within a point, slot terms of
//! an element are accumulated in ascending slot order and element terms are
//! combined by a pairwise reduction over a fixed index tree, so the result is
//! bit-identical for any number of worker threads.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ArrayLayout, CutPlane, FrequencySpec, ObservationGrid, Point3, MIN_STANDOFF};
use crate::propagation::{green_at_distance, ComplexField};
use crate::synthesis::{ExcitationSet, Method};

/// Radiation model of a single column.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ElementModel {
    /// Point source at the phase centre; radiates into both hemispheres.
    Isotropic,
    /// Point source with `cos^q θ` pattern, zero behind the aperture.
    CosineQ {
        #[serde(default = "default_cosine_q")]
        q: f64,
    },
    /// In-phase line of slot point sources with weights `1/n_slots`. Each slot
    /// carries a `cos^q θ` pattern (`q = 0` leaves only the back-hemisphere clamp).
    SlotSubarray {
        #[serde(default)]
        q: f64,
    },
}

fn default_cosine_q() -> f64 {
    1.0
}

impl Default for ElementModel {
    fn default() -> Self {
        ElementModel::SlotSubarray { q: 0.0 }
    }
}

impl ElementModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ElementModel::Isotropic => Ok(()),
            ElementModel::CosineQ { q } | ElementModel::SlotSubarray { q } => {
                if q.is_finite() && q >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::invalid(format!(
                        "ElementModel: exponent q must be finite and >= 0, got {q}"
                    )))
                }
            }
        }
    }

    /// Pattern factor at a point displaced by `delta` from the source.
    #[inline]
    fn pattern(&self, delta: Point3, d: f64) -> f64 {
        match *self {
            ElementModel::Isotropic => 1.0,
            ElementModel::CosineQ { q } | ElementModel::SlotSubarray { q } => {
                let cos_theta = delta.z / d;
                if cos_theta <= 0.0 {
                    0.0
                } else if q == 0.0 {
                    1.0
                } else {
                    cos_theta.powf(q)
                }
            }
        }
    }

    fn source_points<'a>(&self, layout: &'a ArrayLayout, n: usize) -> &'a [Point3] {
        match self {
            ElementModel::SlotSubarray { .. } => layout.slot_centers(n),
            _ => std::slice::from_ref(&layout.element_centers()[n]),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldMeta {
    pub frequency_hz: f64,
    pub method: Option<Method>,
    pub layout_hash: String,
    pub model: ElementModel,
    /// Point-source kernel evaluations performed (grid points × sources).
    pub kernel_evaluations: u64,
}

/// Complex field samples in grid scan order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldMap {
    pub grid: ObservationGrid,
    pub values: Vec<ComplexField>,
    pub meta: FieldMeta,
}

impl FieldMap {
    pub fn magnitudes(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    pub fn point(&self, index: usize) -> Point3 {
        self.grid.point_at(index)
    }
}

/// Sources of one element. `mirror[j]` names an earlier source sharing `y`
/// and `z` with source `j`; when the observation point is equidistant in `x`
/// from both, the kernel value of the earlier one is reused.
struct ElementSources {
    weight: Complex64,
    points: Vec<Point3>,
    mirror: Vec<Option<usize>>,
}

/// Flattened source description shared by every grid point.
struct Sources {
    /// The weight already includes the `1/n_slots` sub-array factor.
    elements: Vec<ElementSources>,
    model: ElementModel,
    k0: f64,
}

/// Value and kernel-evaluation count, or the offending distance.
type Eval = std::result::Result<(Complex64, u64), f64>;

impl Sources {
    fn new(layout: &ArrayLayout, exc: &ExcitationSet, model: ElementModel, freq: &FrequencySpec) -> Result<Self> {
        model.validate()?;
        exc.validate(layout.n_columns())?;
        let elements = exc
            .weights()
            .into_iter()
            .enumerate()
            .map(|(n, w)| {
                let points = model.source_points(layout, n).to_vec();
                let len = points.len();
                let mirror = (0..len)
                    .map(|j| {
                        let i = len - 1 - j;
                        (i < j && points[i].y == points[j].y && points[i].z == points[j].z).then_some(i)
                    })
                    .collect();
                ElementSources {
                    weight: w * (1.0 / len as f64),
                    points,
                    mirror,
                }
            })
            .collect();
        Ok(Self {
            elements,
            model,
            k0: freq.wavenumber(),
        })
    }

    /// Element `n` at `r`.
    #[inline]
    fn element_at(&self, n: usize, r: Point3) -> Eval {
        let e = &self.elements[n];
        let mut kernels: Vec<Complex64> = Vec::with_capacity(e.points.len());
        let mut evals = 0;
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, &s) in e.points.iter().enumerate() {
            let delta = r - s;
            let k = match e.mirror[j] {
                Some(i) if (r.x - e.points[i].x).abs() == delta.x.abs() => kernels[i],
                _ => {
                    let d = delta.norm();
                    if d < MIN_STANDOFF || !d.is_finite() {
                        return Err(d);
                    }
                    evals += 1;
                    green_at_distance(self.k0, d) * self.model.pattern(delta, d)
                }
            };
            kernels.push(k);
            acc += k;
        }
        Ok((e.weight * acc, evals))
    }

    fn pairwise(&self, lo: usize, hi: usize, r: Point3) -> Eval {
        if hi - lo == 1 {
            return self.element_at(lo, r);
        }
        let mid = lo + (hi - lo) / 2;
        let (a, na) = self.pairwise(lo, mid, r)?;
        let (b, nb) = self.pairwise(mid, hi, r)?;
        Ok((a + b, na + nb))
    }

    fn total_at(&self, r: Point3) -> Eval {
        if self.elements.is_empty() {
            return Ok((Complex64::new(0.0, 0.0), 0));
        }
        self.pairwise(0, self.elements.len(), r)
    }
}

/// Field of element `n` alone at `r_obs`.
pub fn element_contribution(
    layout: &ArrayLayout,
    n: usize,
    exc: &ExcitationSet,
    model: ElementModel,
    r_obs: Point3,
    freq: &FrequencySpec,
) -> Result<ComplexField> {
    if n >= layout.n_columns() {
        return Err(Error::invalid(format!(
            "element index {n} out of range for {} columns",
            layout.n_columns()
        )));
    }
    let sources = Sources::new(layout, exc, model, freq)?;
    sources
        .element_at(n, r_obs)
        .map(|(v, _)| v)
        .map_err(|d| Error::Singularity {
            distance: d,
            min: MIN_STANDOFF,
        })
}

/// Total field on every grid point. Parallelism comes from the ambient rayon
/// pool; results do not depend on its size.
pub fn total_field(
    layout: &ArrayLayout,
    exc: &ExcitationSet,
    model: ElementModel,
    grid: &ObservationGrid,
    freq: &FrequencySpec,
) -> Result<FieldMap> {
    grid.validate()?;
    let sources = Sources::new(layout, exc, model, freq)?;
    let raw: Vec<Eval> = (0..grid.len())
        .into_par_iter()
        .with_min_len(64)
        .map(|i| sources.total_at(grid.point_at(i)))
        .collect();

    let mut values = Vec::with_capacity(raw.len());
    let mut kernel_evaluations = 0;
    for (index, v) in raw.into_iter().enumerate() {
        match v {
            Ok((v, n)) => {
                values.push(v);
                kernel_evaluations += n;
            }
            Err(distance) => {
                return Err(Error::GridStandoff {
                    index,
                    point: grid.point_at(index),
                    distance,
                    min: MIN_STANDOFF,
                })
            }
        }
    }

    Ok(FieldMap {
        grid: grid.clone(),
        values,
        meta: FieldMeta {
            frequency_hz: freq.hz(),
            method: Some(exc.method),
            layout_hash: layout.hash(),
            model,
            kernel_evaluations,
        },
    })
}

/// Field along a `z` line through `(x, y)`.
#[allow(clippy::too_many_arguments)]
pub fn axial_profile(
    layout: &ArrayLayout,
    exc: &ExcitationSet,
    model: ElementModel,
    freq: &FrequencySpec,
    z_min: f64,
    z_max: f64,
    n_samples: usize,
    lateral_offset: (f64, f64),
) -> Result<FieldMap> {
    if z_min.is_nan() || z_min <= 0.0 {
        return Err(Error::invalid(format!("axial profile needs z_min > 0, got {z_min}")));
    }
    let grid = ObservationGrid::axial_line(lateral_offset.0, lateral_offset.1, z_min, z_max, n_samples)?;
    total_field(layout, exc, model, &grid, freq)
}

/// Field on a principal-plane cut through the array centre.
#[allow(clippy::too_many_arguments)]
pub fn plane_cut(
    layout: &ArrayLayout,
    exc: &ExcitationSet,
    model: ElementModel,
    freq: &FrequencySpec,
    plane: CutPlane,
    lateral: (f64, f64),
    z: (f64, f64),
    samples: (usize, usize),
) -> Result<FieldMap> {
    let grid = ObservationGrid::plane_cut(plane, lateral, z, samples)?;
    total_field(layout, exc, model, &grid, freq)
}
