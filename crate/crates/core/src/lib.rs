//! Near-field focusing for phased slotted-waveguide arrays.
//!
//! The crate synthesizes per-column excitation phases by time reversal
//! (conjugating the field of a probe dipole placed at the focal point), by
//! ray-optic path compensation, or by a far-field progressive phase, then
//! superposes free-space Green's function contributions over observation
//! grids and measures the resulting focal spot.
//!
//! ```
//! use nffbeam::{analysis, field_engine, geometry, synthesis};
//!
//! let freq = geometry::FrequencySpec::new(5.8e9).unwrap();
//! let layout = geometry::ArrayLayout::default_array();
//! let target = geometry::Point3::new(0.0, 0.0, 0.5);
//! let exc = synthesis::tr_phases(&layout, target, &freq).unwrap();
//! let spread = analysis::phase_alignment_check(&layout, &exc, target, &freq).unwrap();
//! assert!(spread < 1e-9);
//!
//! let grid = geometry::ObservationGrid::axial_line(0.0, 0.0, 0.1, 1.5, 141).unwrap();
//! let map = field_engine::total_field(&layout, &exc, Default::default(), &grid, &freq).unwrap();
//! let peak = analysis::find_peak(&map).unwrap();
//! assert!(peak.position.z < 0.5);
//! ```

pub mod analysis;
pub mod cli_io;
pub mod error;
pub mod field_engine;
pub mod geometry;
pub mod propagation;
pub mod synthesis;

pub use error::{Error, Result};
