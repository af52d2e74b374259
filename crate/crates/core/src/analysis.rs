//! Focal metrics, method comparison and steering sweeps.
//!
//! Spot size is the width of the contiguous region around the peak where
//! `|E| >= peak / √2` (−3 dB in field), with linear interpolation between the
//! bracketing samples. Peaks are reported at grid resolution.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field_engine::{total_field, ElementModel, FieldMap};
use crate::geometry::{ArrayLayout, Axis, FocalTarget, FrequencySpec, ObservationGrid, Point3};
use crate::propagation::{phase, scalar_green};
use crate::synthesis::{max_phase_delta, synthesize, ExcitationSet, Method};

/// Field ratio defining the spot boundary.
pub const SPOT_THRESHOLD: f64 = FRAC_1_SQRT_2;

/// Normalized TR and ray-optic phases must agree to this many radians.
pub const EQUIVALENCE_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub index: usize,
    pub position: Point3,
    pub magnitude: f64,
}

/// Grid sample of largest `|E|`; ties go to the smallest scan index.
pub fn find_peak(map: &FieldMap) -> Result<Peak> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in map.values.iter().enumerate() {
        let m = v.norm();
        if best.is_none_or(|(_, b)| m > b) {
            best = Some((i, m));
        }
    }
    let (index, magnitude) = best.ok_or_else(|| Error::invalid("find_peak: empty field map"))?;
    Ok(Peak {
        index,
        position: map.point(index),
        magnitude,
    })
}

/// −3 dB extent along one grid axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Width {
    pub width_m: f64,
    /// The contour left the grid; `width_m` is then the full axis extent.
    pub truncated: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpotSize {
    pub axial: Option<Width>,
    pub lateral: Option<Width>,
}

/// Width along grid axis `pos` through the sample `peak_idx`.
fn axis_width(map: &FieldMap, pos: usize, peak_idx: &[usize], peak_mag: f64) -> Width {
    let axis = map.grid.axes[pos];
    let threshold = peak_mag * SPOT_THRESHOLD;
    let mut idx = peak_idx.to_vec();
    let mut mag_at = |i: usize| {
        idx[pos] = i;
        map.values[map.grid.ravel(&idx)].norm()
    };
    let samples: Vec<f64> = (0..axis.count).map(&mut mag_at).collect();
    let centre = peak_idx[pos];

    // Walk outward while the samples stay above threshold.
    let mut lo = centre;
    while lo > 0 && samples[lo - 1] >= threshold {
        lo -= 1;
    }
    let mut hi = centre;
    while hi + 1 < axis.count && samples[hi + 1] >= threshold {
        hi += 1;
    }
    if lo == 0 || hi + 1 == axis.count {
        return Width {
            width_m: axis.extent(),
            truncated: true,
        };
    }

    let crossing = |inside: usize, outside: usize| {
        let (a, b) = (samples[inside], samples[outside]);
        let t = (a - threshold) / (a - b);
        let (xa, xb) = (axis.coord(inside), axis.coord(outside));
        xa + t * (xb - xa)
    };
    let width = crossing(hi, hi + 1) - crossing(lo, lo - 1);
    Width {
        width_m: width.max(axis.step()),
        truncated: false,
    }
}

/// Axial (`z`) and lateral −3 dB widths through `peak`. The lateral axis is
/// the first swept axis other than `z`.
pub fn spot_size(map: &FieldMap, peak: &Peak) -> Result<SpotSize> {
    if map.values.len() != map.grid.len() || peak.index >= map.values.len() {
        return Err(Error::invalid("spot_size: peak does not belong to this map"));
    }
    let peak_idx = map.grid.unravel(peak.index);
    let swept = |pos: &usize| map.grid.axes[*pos].is_swept();
    let axial_pos = map.grid.axis_position(Axis::Z).filter(swept);
    let lateral_pos = (0..map.grid.axes.len()).find(|p| map.grid.axes[*p].axis != Axis::Z && swept(p));
    if axial_pos.is_none() && lateral_pos.is_none() {
        return Err(Error::invalid("spot_size: grid has no swept axis"));
    }
    let width = |pos: Option<usize>| pos.map(|p| axis_width(map, p, &peak_idx, peak.magnitude));
    Ok(SpotSize {
        axial: width(axial_pos),
        lateral: width(lateral_pos),
    })
}

/// Angular range of the per-element contribution phases at the target,
/// taking the smallest arc containing all of them.
pub fn phase_alignment_check(
    layout: &ArrayLayout,
    exc: &ExcitationSet,
    target: Point3,
    freq: &FrequencySpec,
) -> Result<f64> {
    exc.validate(layout.n_columns())?;
    let mut phases = Vec::with_capacity(exc.len());
    for (w, &p) in exc.weights().iter().zip(layout.element_centers()) {
        let c = w * scalar_green(freq.wavenumber(), p, target)?;
        if c.norm() > 0.0 {
            phases.push(phase(c));
        }
    }
    Ok(circular_spread(&mut phases))
}

fn circular_spread(phases: &mut [f64]) -> f64 {
    if phases.len() < 2 {
        return 0.0;
    }
    phases.sort_by(f64::total_cmp);
    let wrap_gap = phases[0] + TAU - phases[phases.len() - 1];
    let largest_gap = phases
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(wrap_gap, f64::max);
    (TAU - largest_gap).max(0.0)
}

/// Focal metrics of one field map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FocalReport {
    pub method: Method,
    pub target: Point3,
    pub peak_position: Point3,
    pub peak_magnitude: f64,
    pub axial_width_3db: Option<Width>,
    pub lateral_width_3db: Option<Width>,
    /// `|r_s|` minus the peak's projection on the centre→target ray;
    /// positive when the peak sits closer to the aperture.
    pub focal_shift: f64,
    /// Distance between peak and target in the aperture (`x–y`) plane.
    pub lateral_peak_error: f64,
    pub alignment_spread: f64,
}

/// Synthesizes `method` phases, evaluates the grid and reduces to a report.
pub fn focal_report(
    layout: &ArrayLayout,
    exc: &ExcitationSet,
    target: &FocalTarget,
    freq: &FrequencySpec,
    model: ElementModel,
    grid: &ObservationGrid,
) -> Result<(FieldMap, FocalReport)> {
    let map = total_field(layout, exc, model, grid, freq)?;
    let peak = find_peak(&map)?;
    let spot = spot_size(&map, &peak)?;
    let r_s = target.position();
    let centre = layout.centroid();
    let ray = (r_s - centre) * (1.0 / (r_s - centre).norm());
    let report = FocalReport {
        method: exc.method,
        target: r_s,
        peak_position: peak.position,
        peak_magnitude: peak.magnitude,
        axial_width_3db: spot.axial,
        lateral_width_3db: spot.lateral,
        focal_shift: (r_s - centre).norm() - (peak.position - centre).dot(ray),
        lateral_peak_error: ((peak.position.x - r_s.x).powi(2) + (peak.position.y - r_s.y).powi(2)).sqrt(),
        alignment_spread: phase_alignment_check(layout, exc, r_s, freq)?,
    };
    Ok((map, report))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairDelta {
    pub a: Method,
    pub b: Method,
    /// Max element-wise wrapped difference of the normalized phase sets.
    pub max_phase_delta: f64,
    pub peak_position_delta: f64,
    pub peak_magnitude_delta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonChecks {
    pub tr_matches_ray_optic: bool,
    pub tr_peak_not_farther: bool,
    pub tr_peak_not_weaker: bool,
}

impl ComparisonChecks {
    pub fn all(&self) -> bool {
        self.tr_matches_ray_optic && self.tr_peak_not_farther && self.tr_peak_not_weaker
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub target: Point3,
    pub reports: Vec<FocalReport>,
    pub deltas: Vec<PairDelta>,
    pub checks: ComparisonChecks,
}

impl ComparisonReport {
    pub fn report(&self, method: Method) -> Option<&FocalReport> {
        self.reports.iter().find(|r| r.method == method)
    }
}

#[derive(Clone, Debug)]
pub struct Comparison {
    pub report: ComparisonReport,
    pub excitations: Vec<ExcitationSet>,
    pub maps: Vec<FieldMap>,
}

/// Runs time-reversal, ray-optic and far-field synthesis for one target and
/// compares the resulting focal spots.
pub fn compare_methods(
    layout: &ArrayLayout,
    target: &FocalTarget,
    freq: &FrequencySpec,
    model: ElementModel,
    grid: &ObservationGrid,
) -> Result<Comparison> {
    let mut excitations = Vec::new();
    let mut maps = Vec::new();
    let mut reports = Vec::new();
    for method in Method::ALL {
        let exc = synthesize(method, layout, target.position(), freq)?;
        let (map, report) = focal_report(layout, &exc, target, freq, model, grid)?;
        excitations.push(exc);
        maps.push(map);
        reports.push(report);
    }

    let mut deltas = Vec::new();
    for i in 0..reports.len() {
        for j in i + 1..reports.len() {
            let na = excitations[i].normalized(0)?;
            let nb = excitations[j].normalized(0)?;
            deltas.push(PairDelta {
                a: reports[i].method,
                b: reports[j].method,
                max_phase_delta: max_phase_delta(&na, &nb),
                peak_position_delta: reports[i].peak_position.distance(reports[j].peak_position),
                peak_magnitude_delta: (reports[i].peak_magnitude - reports[j].peak_magnitude).abs(),
            });
        }
    }

    let find = |m: Method| reports.iter().position(|r| r.method == m).expect("all methods run");
    let (tr, ff) = (&reports[find(Method::Tr)], &reports[find(Method::FarField)]);
    let tr_ro = deltas
        .iter()
        .find(|d| (d.a, d.b) == (Method::Tr, Method::RayOptic))
        .expect("pair present");
    let checks = ComparisonChecks {
        tr_matches_ray_optic: tr_ro.max_phase_delta < EQUIVALENCE_TOLERANCE,
        tr_peak_not_farther: tr.peak_position.z <= ff.peak_position.z,
        tr_peak_not_weaker: tr.peak_magnitude >= ff.peak_magnitude,
    };

    Ok(Comparison {
        report: ComparisonReport {
            target: target.position(),
            reports,
            deltas,
            checks,
        },
        excitations,
        maps,
    })
}

/// Time-reversal focus for each target, evaluated in parallel; output order
/// follows `targets`.
pub fn steer_sweep(
    layout: &ArrayLayout,
    targets: &[FocalTarget],
    freq: &FrequencySpec,
    model: ElementModel,
    grid: &ObservationGrid,
) -> Result<Vec<(FieldMap, FocalReport)>> {
    if targets.is_empty() {
        return Err(Error::invalid("steer_sweep: at least one target required"));
    }
    targets
        .par_iter()
        .map(|t| {
            let exc = synthesize(Method::Tr, layout, t.position(), freq)?;
            focal_report(layout, &exc, t, freq, model, grid)
        })
        .collect()
}

/// Sum of per-element contribution magnitudes at `r` (isotropic elements):
/// the upper bound on `|E(r)|` for the given amplitudes.
pub fn coherent_bound(layout: &ArrayLayout, exc: &ExcitationSet, r: Point3, freq: &FrequencySpec) -> Result<f64> {
    exc.validate(layout.n_columns())?;
    let mut total = 0.0;
    for (w, &p) in exc.weights().iter().zip(layout.element_centers()) {
        total += (w * scalar_green(freq.wavenumber(), p, r)?).norm();
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field_engine::{axial_profile, FieldMeta};
    use crate::geometry::{CutPlane, SlotColumnSpec};
    use crate::synthesis::{far_field_phases, tr_phases};
    use num_complex::Complex64;

    fn f58() -> FrequencySpec {
        FrequencySpec::new(5.8e9).unwrap()
    }

    fn synthetic(grid: ObservationGrid, mags: &[f64]) -> FieldMap {
        assert_eq!(grid.len(), mags.len());
        FieldMap {
            grid,
            values: mags.iter().map(|&m| Complex64::new(m, 0.0)).collect(),
            meta: FieldMeta {
                frequency_hz: 5.8e9,
                method: None,
                layout_hash: String::new(),
                model: ElementModel::Isotropic,
                kernel_evaluations: 0,
            },
        }
    }

    #[test]
    fn single_nonzero_sample() {
        let grid = ObservationGrid::axial_line(0.0, 0.0, 0.1, 1.0, 10).unwrap();
        let mut mags = vec![0.0; 10];
        mags[6] = 2.5;
        let p = find_peak(&synthetic(grid, &mags)).unwrap();
        assert_eq!(p.index, 6);
        assert_eq!(p.magnitude, 2.5);
    }

    #[test]
    fn ties_break_to_first_index() {
        let grid = ObservationGrid::axial_line(0.0, 0.0, 0.1, 1.0, 5).unwrap();
        let p = find_peak(&synthetic(grid, &[1.0, 3.0, 2.0, 3.0, 3.0])).unwrap();
        assert_eq!(p.index, 1);
    }

    #[test]
    fn empty_map_rejected() {
        let grid = ObservationGrid::axial_line(0.0, 0.0, 0.1, 1.0, 5).unwrap();
        let mut m = synthetic(grid, &[1.0; 5]);
        m.values.clear();
        assert!(matches!(find_peak(&m), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn triangle_width() {
        // |E|(z) = max(0, 1 - |z - z0| / w); the 1/√2 crossings lie at
        // z0 ± w (1 - 1/√2), and linear interpolation is exact on a ramp.
        let (z0, w) = (0.5, 0.2);
        let grid = ObservationGrid::axial_line(0.0, 0.0, 0.0, 1.0, 101).unwrap();
        let mags: Vec<f64> = grid.points().map(|p| (1.0 - (p.z - z0).abs() / w).max(0.0)).collect();
        let map = synthetic(grid, &mags);
        let peak = find_peak(&map).unwrap();
        assert!((peak.position.z - z0).abs() < 1e-12);
        let spot = spot_size(&map, &peak).unwrap();
        let axial = spot.axial.unwrap();
        assert!(!axial.truncated);
        let expected = 2.0 * w * (1.0 - SPOT_THRESHOLD);
        assert!((axial.width_m - expected).abs() < 1e-12, "{} vs {expected}", axial.width_m);
        assert!(spot.lateral.is_none());
    }

    #[test]
    fn uniform_map_truncated() {
        let grid = ObservationGrid::plane_cut(CutPlane::EPlane, (-0.2, 0.2), (0.1, 0.9), (5, 9)).unwrap();
        let map = synthetic(grid, &[1.0; 45]);
        let peak = find_peak(&map).unwrap();
        let spot = spot_size(&map, &peak).unwrap();
        let (a, l) = (spot.axial.unwrap(), spot.lateral.unwrap());
        assert!(a.truncated && l.truncated);
        assert!((a.width_m - 0.8).abs() < 1e-12);
        assert!((l.width_m - 0.4).abs() < 1e-12);
    }

    #[test]
    fn spot_size_scale_invariant() {
        let l = ArrayLayout::default_array();
        let exc = tr_phases(&l, Point3::new(0.0, 0.0, 0.5), &f58()).unwrap();
        let grid = ObservationGrid::plane_cut(CutPlane::EPlane, (-0.3, 0.3), (0.25, 1.0), (61, 76)).unwrap();
        let map = total_field(&l, &exc, ElementModel::default(), &grid, &f58()).unwrap();
        let peak = find_peak(&map).unwrap();
        let base = spot_size(&map, &peak).unwrap();
        for s in [1e-6, 0.37, 42.0, 1e9] {
            let mut scaled = map.clone();
            scaled.values.iter_mut().for_each(|v| *v *= s);
            let p = find_peak(&scaled).unwrap();
            assert_eq!(p.index, peak.index);
            let got = spot_size(&scaled, &p).unwrap();
            let close = |a: Option<Width>, b: Option<Width>| {
                let (a, b) = (a.unwrap(), b.unwrap());
                a.truncated == b.truncated && (a.width_m - b.width_m).abs() < 1e-12
            };
            assert!(close(base.axial, got.axial) && close(base.lateral, got.lateral));
        }
    }

    #[test]
    fn spot_needs_swept_axis() {
        let grid = ObservationGrid::point(Point3::new(0.0, 0.0, 0.5)).unwrap();
        let map = synthetic(grid, &[1.0]);
        let peak = find_peak(&map).unwrap();
        assert!(spot_size(&map, &peak).is_err());
    }

    #[test]
    fn lateral_width_shrinks_with_more_columns() {
        let f = f58();
        let t = FocalTarget::new(Point3::new(0.0, 0.0, 0.5)).unwrap();
        let grid = ObservationGrid::plane_cut(CutPlane::EPlane, (-0.5, 0.5), (0.25, 1.0), (201, 61)).unwrap();
        let mut widths = Vec::new();
        for n in [4, 8, 16] {
            let l = ArrayLayout::new(n, 0.0208, SlotColumnSpec::default()).unwrap();
            let exc = tr_phases(&l, t.position(), &f).unwrap();
            let (_, r) = focal_report(&l, &exc, &t, &f, ElementModel::default(), &grid).unwrap();
            let w = r.lateral_width_3db.unwrap();
            assert!(!w.truncated, "{n} columns");
            widths.push(w.width_m);
        }
        assert!(widths[0] >= widths[1] && widths[1] >= widths[2], "{widths:?}");
    }

    #[test]
    fn alignment_spread_values() {
        let l = ArrayLayout::default_array();
        let t = Point3::new(0.0, 0.0, 0.5);
        let tr = tr_phases(&l, t, &f58()).unwrap();
        assert!(phase_alignment_check(&l, &tr, t, &f58()).unwrap() < 1e-9);
        let ff = far_field_phases(&l, t, &f58()).unwrap();
        assert!(phase_alignment_check(&l, &ff, t, &f58()).unwrap() > 0.1);

        let one = ArrayLayout::new(1, 0.02, SlotColumnSpec::default()).unwrap();
        let exc = ExcitationSet::phase_only(Method::FarField, [1.3]);
        assert_eq!(phase_alignment_check(&one, &exc, t, &f58()).unwrap(), 0.0);

        let on_element = l.element_centers()[0];
        assert!(matches!(
            phase_alignment_check(&l, &tr, on_element, &f58()),
            Err(Error::Singularity { .. })
        ));
    }

    #[test]
    fn circular_spread_across_branch_cut() {
        // 3.0 .. 3.1 .. (-3.1 + 2π): one short arc across ±π.
        let mut p = [3.1, -3.1, 3.0];
        let s = circular_spread(&mut p);
        assert!((s - (-3.1 + TAU - 3.0)).abs() < 1e-12);
    }

    #[test]
    fn default_comparison() {
        let l = ArrayLayout::default_array();
        let t = FocalTarget::new(Point3::new(0.0, 0.0, 0.5)).unwrap();
        let grid = ObservationGrid::axial_line(0.0, 0.0, 0.1, 1.5, 561).unwrap();
        let c = compare_methods(&l, &t, &f58(), ElementModel::default(), &grid).unwrap();
        assert!(c.report.checks.all(), "{:?}", c.report.checks);
        let tr = c.report.report(Method::Tr).unwrap();
        let ff = c.report.report(Method::FarField).unwrap();
        assert!(ff.peak_position.z > tr.peak_position.z);
        assert!(ff.peak_magnitude < tr.peak_magnitude);
        assert_eq!(c.report.deltas.len(), 3);
        assert!(c.report.deltas[0].max_phase_delta < 1e-9);
    }

    #[test]
    fn default_axial_profile_peaks() {
        // The global maximum is the near-aperture Fresnel ripple of the slot
        // line; the focal lobe is the last local maximum.
        let l = ArrayLayout::default_array();
        let exc = tr_phases(&l, Point3::new(0.0, 0.0, 0.5), &f58()).unwrap();
        let map = axial_profile(&l, &exc, ElementModel::default(), &f58(), 0.1, 1.5, 561, (0.0, 0.0)).unwrap();
        let peak = find_peak(&map).unwrap();
        assert!(peak.position.z < 0.5);
        let m = map.magnitudes();
        let last_local_max = (1..m.len() - 1).rev().find(|&i| m[i] > m[i - 1] && m[i] >= m[i + 1]).unwrap();
        let z = map.point(last_local_max).z;
        assert!((0.3..=0.5).contains(&z), "focal lobe at {z}");
    }

    #[test]
    fn steering_reports() {
        let l = ArrayLayout::default_array();
        let grid = ObservationGrid::plane_cut(CutPlane::EPlane, (-0.3, 0.3), (0.25, 1.0), (61, 76)).unwrap();
        let targets: Vec<FocalTarget> = [-0.1, 0.0, 0.1]
            .iter()
            .map(|&y| FocalTarget::new(Point3::new(0.0, y, 0.5)).unwrap())
            .collect();
        let out = steer_sweep(&l, &targets, &f58(), ElementModel::default(), &grid).unwrap();
        let ys: Vec<f64> = out.iter().map(|(_, r)| r.peak_position.y).collect();
        assert!(ys[0] < ys[1] && ys[1] < ys[2], "{ys:?}");
        assert!(out[1].1.lateral_peak_error <= grid.axes[0].step());
        let (a, b) = (&out[0].1, &out[2].1);
        assert!((a.peak_magnitude - b.peak_magnitude).abs() <= 1e-9 * a.peak_magnitude);
        assert_eq!(a.peak_position.y, -b.peak_position.y);
        assert!(steer_sweep(&l, &[], &f58(), ElementModel::default(), &grid).is_err());
    }
}
