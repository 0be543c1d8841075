//! Time-harmonic scattering by a bump on a sound-soft or sound-hard half-plane,
//! solved with second-kind boundary integral equations built on image Green's
//! functions.

pub mod bie;
pub mod geometry;
pub mod kernels;
pub mod postprocess;
pub mod quadrature;
pub mod special;

pub use bie::{
    assemble_operator, build_rhs, density_at, solve, solve_with, BieError, BieProblem, DensitySolution, Excitation,
    OperatorKind, OperatorMatrix, SolveMethod, SolverOptions,
};
pub use geometry::{BoundaryMesh, BoundaryProfile, GeometryError, MeshOptions, MollifiedFamily, Point};
pub use kernels::{BoundaryCondition, Field, KernelError, PlaneWave, PointSource, Wavenumber};
pub use num_complex::Complex64;
pub use postprocess::{eval_field, FieldSample, PostprocessError, TotalField};
pub use special::SpecialError;
