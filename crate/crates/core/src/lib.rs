//! Vibration spectrum of two immiscible dissipative fluids in a rigid
//! rectangular cavity.
//!
//! The displacement field is discretized with lowest-order Raviart-Thomas
//! elements, which turns the problem into the quadratic eigenvalue problem
//! `(λ²M + λK₁ + K₂)u = 0`. The pieces are:
//!
//! * [`mesh`]: structured triangulations with the fluid interface on a mesh line.
//! * [`assembly`]: RT0 element matrices and global assembly over interior edges.
//! * [`linalg`]: sparse storage, direct factorizations, dense Schur and Arnoldi.
//! * [`solver`]: linearization, shift-invert Krylov-Schur, residual checks,
//!   essential-band filtering and convergence-order fits.
//! * [`oracle`]: the separable dispersion relation for the rectangle and its roots.
//! * [`study`], [`config`], [`export`]: the driver layer used by the CLI.

pub mod assembly;
pub mod config;
pub mod error;
pub mod export;
pub mod linalg;
pub mod mesh;
pub mod oracle;
pub mod solver;
pub mod study;

pub use num_complex::Complex64;

pub use assembly::{assemble_global, FluidProperties, GlobalMatrices, MaterialConfig};
pub use error::{Error, Result};
pub use mesh::{
    build_rect_mesh, build_rect_mesh_with, DiagonalPattern, GeometryConfig, Mesh, MeshStats,
};
pub use solver::{EigenPair, QuadraticPencil, SolveOptions};
