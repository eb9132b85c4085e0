//! Density-matrix dynamics of one cell's emitters in the directional basis
//! `(|g>, |e_x>, |e_y>, |e_z>)`.

mod current;
mod density;
mod hamiltonian;
mod lindblad;

pub use current::free_current;
pub use density::{excited, hermitize, DensityMatrix4, Matrix4c, GROUND};
pub use hamiltonian::{build_hamiltonian, DirectionalHamiltonian};
pub use lindblad::{
    lindblad_rhs, lindblad_rhs_angular, rk4, rk4_step, spontaneous_channels, LindbladChannel,
    RhsContext, TRACE_TOLERANCE,
};
