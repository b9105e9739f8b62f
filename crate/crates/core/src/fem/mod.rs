//! Structured P1 finite elements on the unit square with homogeneous
//! Dirichlet conditions.

mod assembly;
mod mesh;
mod sparse;

pub use assembly::{
    assemble_load, assemble_stiffness, assemble_stiffness_all_vertices, inner_product_matrix,
    norm_squared, Field,
};
pub use mesh::{build_mesh, Mesh};
pub use sparse::{solve_spd, solve_with_factor, BandedCholesky, SparseSymMatrix, SOLVE_RTOL};
