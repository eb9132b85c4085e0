//! The coupled Maxwell-Liouville loop over an ensemble of emitters.

pub mod checkpoint;
mod config;
mod geometry;
mod run;
mod sim;
mod steady;

pub use config::{
    DriveConfig, EmitterConfig, EnsembleConfig, GeometryConfig, GridConfig, ProbeConfig,
    ProbeQuantity, RunConfig, Shape, SnapshotConfig, SourceConfig, SteadyStateConfig,
};
pub use geometry::{default_center, rasterize, rasterize_sphere, EnsembleGeometry};
pub use run::{run, RunOptions, RunOutput};
pub use sim::{Ensemble, AVERAGE_COLUMNS, ENERGY_COLUMNS};
pub use steady::steady_state_check;
