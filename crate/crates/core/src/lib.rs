//! Driven tight-binding chains with localized loss.
//!
//! A single particle hops on an open chain of `N` sites, the two end sites
//! are driven sinusoidally and the interior even sites leak population at
//! rates `α_n`. The crate provides direct propagation of the amplitudes,
//! Floquet analysis of one drive period, the high-frequency closed forms for
//! three sites, and the numerical experiments built on top of them.

// `!(x > 0.0)` is the NaN-rejecting form of a positivity check; the
// integrator indexes several stage buffers by site in one loop.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bessel;
pub mod experiments;
pub mod floquet;
pub mod format;
pub mod hfa;
pub mod linalg;
pub mod model;
pub mod propagate;

pub use bessel::bessel_j0;
pub use floquet::{
    dark_decay_rate, dark_state, floquet_modes, modes_for, monodromy, quasienergy_spectrum,
    DarkDecay, DarkState, DecayMeasurement, FloquetError, FloquetMode, Monodromy, Quasienergy,
};
pub use hfa::{
    analytic_populations, asymptotic_populations, damping_class, effective_model,
    projection_coefficients, DampingClass, HfaError, ThreeSiteAnalytic, ThreeSitePopulations,
};
pub use linalg::{eigendecompose, eigenvalues, EigenDecomposition, EigenError};
pub use model::{hamiltonian_at, HamiltonianMatrix, Lattice, LatticeSpec, ModelError};
pub use propagate::{
    equilibrium_average, evolve, integrate, loss_rate_residual, AmplitudeState, EquilibriumAverage,
    PropagateError, StepSize, TimeGrid, Trajectory,
};
