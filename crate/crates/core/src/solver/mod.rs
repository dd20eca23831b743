//! Numerical solution of the Beltrami equation on the plane and the disk.

mod disk;
mod fft;
mod kernels;
mod map;
mod ops;
mod plane;
mod transforms;

pub use disk::{solve_disk, solve_disk_with, solve_half_plane, symmetry_defect, SYMMETRY_TOL};
pub use map::{Annulus, Jet, Normalization, QuasiconformalMap, SolveDiagnostics};
pub use ops::{
    chain_rule, chain_rule_at, compose, dilatation, dilatation_of_samples, dilatation_on, invert,
    sampling_spec,
};
pub use plane::{solve_plane, solve_plane_with, SolverOptions};
pub use transforms::{beurling_transform, cauchy_transform};
