//! Full-wave solution of the Dirichlet Helmholtz problem: the wall through
//! the image Green function, the arc through a single-layer density.

mod arc;
mod circle;
mod field;
mod kernel;
mod spectrum;

pub use arc::{
    nodes_for, solve_arc_density, solve_with_rule, ArcSolution, ChebyshevRule, Proximity, CONDITION_LIMIT,
    MIN_NODES_PER_WAVELENGTH,
};
pub use circle::{exact_circle_scattered, solve_circle, CircleSolution};
pub use field::{field_grid, write_rows, FieldMap, Grid, Quantity};
pub use kernel::{free_green, half_plane_green, s11_from_site_green, transmission, wall_only_site_green};
pub use spectrum::{s11_quantum, ComplexSpectrum, SweepKind};
