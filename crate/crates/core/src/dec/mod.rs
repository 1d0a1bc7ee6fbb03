//! Simplicial complexes, cochains, and the discrete exterior calculus on them.

mod cochain;
mod complex;
mod solver;

pub use cochain::{coboundary, cup, cup_with, integrate_top, Cochain, CochainDump, CupProduct};
pub use complex::{
    build_circle_mesh, build_cone_mesh, build_sphere2_mesh, build_sphere3_mesh, build_square_mesh,
    ConeMesh, MeshFile, SimplexTable, SimplicialComplex, MAX_TOP_SIMPLICES, MESH_FORMAT,
    MESH_VERSION,
};
pub use solver::{
    closedness, gauge_shift, harmonic_defects, harmonic_dimension, hodge_decompose,
    solve_primitive, solve_primitive_with, HodgeSplit, Primitive, PrimitiveOptions,
    DEFAULT_SOLVER_TOL,
};
