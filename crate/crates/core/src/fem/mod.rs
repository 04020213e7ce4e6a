//! P1 finite elements for the wave equation with kinetic boundary conditions
//! on the unit disc.

mod assembly;
mod kinetic;
pub mod mesh;

pub use assembly::{assemble_boundary, assemble_domain, edge_matrices, element_gradient, element_mass};
pub use kinetic::{build_kinetic_dae, error_norm, gaussian_pulse, initial_condition, FemBlocks, Norm};
pub use mesh::{make_disc_mesh, Mesh};
