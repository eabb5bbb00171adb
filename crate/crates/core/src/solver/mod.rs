//! Quadratic eigenvalue solver for the assembled pencil.

pub mod band;
pub mod convergence;
pub mod pencil;
pub mod qep;

pub use band::{
    essential_band, filter_spurious, is_zero_frequency, stiffness_quotient, FilteredPairs,
    SpectralBand, ZERO_MODE_TOL,
};
pub use convergence::fit_convergence_order;
pub use pencil::{QuadraticPencil, ShiftInvert};
pub use qep::{
    check_eigenpair, solve_qep, EigenBlock, EigenPair, QepSolution, ResidualReport, SolveOptions,
    MAX_KRYLOV_DIM,
};
