//! Pseudo-spectral time-domain Maxwell solver with stretched-coordinate
//! absorbing layers and plane-wave injection.

mod grid;
mod reflection;
mod snapshot;
mod solver;
mod source;
pub mod spectral;

pub use grid::{FieldGrid, PmlConfig, VectorField};
pub use reflection::{pml_reflection_test, ReflectionReport, ReflectionTest};
pub use snapshot::{extract_plane, read_snapshot, record_snapshot, write_snapshot, FieldComponent, Plane, SnapshotMeta};
pub use solver::{spectral_curl, stable_dt, PstdSolver};
pub use source::{Ramp, SourcePlane};
