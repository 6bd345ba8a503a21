//! Construction, verification and simulation of minimal purity/overlap
//! measurement schemes on qudits.
//!
//! A minimal scheme measures the purity `tr rho^2` of an unknown state (or
//! the overlap `tr rho sigma` of two states) from two copies, using one
//! unitary interaction followed by a single local yes-no measurement and an
//! affine readout of the outcome probability. Whether such a scheme exists
//! at all depends on the parity of the Hilbert-space dimension: odd
//! dimensions admit one, even dimensions do not (though a two-body local
//! measurement always works).
//!
//! The crate provides:
//!
//! - dense complex linear algebra ([`matrix`]) and the basic two-copy
//!   functionals ([`state`]);
//! - the swap-conjugation decomposition of Hermitian operator space into
//!   symmetric and antisymmetric subspaces ([`subspace`]);
//! - explicit gate-level constructions of the odd-dimension minimal scheme
//!   and the even-dimension two-body scheme ([`circuit`]);
//! - exact and finite-shot simulation of the yes-no measurement with affine
//!   recovery ([`sim`]);
//! - the feasibility machinery: rank enumeration, the eigenvalue-peeling
//!   parity certificate, and a numerical residual optimizer exhibiting the
//!   odd/even dichotomy ([`feasibility`]).
//!
//! Batch work (optimizer restarts, shot sweeps) runs through [`exec`],
//! which is rayon-parallel under the default `parallel` feature and plain
//! sequential without it.

pub mod circuit;
pub mod error;
pub mod exec;
pub mod feasibility;
pub mod matrix;
pub mod sim;
pub mod state;
pub mod subspace;

pub use circuit::{
    build_even_scheme, build_odd_scheme, qubit_fixture, qutrit_fixture, verify_scheme,
    MeasurementScheme, SchemeVariant,
};
pub use error::{Error, Result};
pub use feasibility::{
    minimize_residual, parity_certificate, rank_solver, residual_objective, OptimizerReport,
    Parity, ParityCertificate, RankSolution,
};
pub use matrix::{herm_eig, kron, ComplexMatrix};
pub use sim::{
    affine_recovery_fit, recover, sample_shots, yes_probability, AffineFit, EstimateReport,
};
pub use state::{
    expm_ihermitian, functional_via_swap, overlap, purity, random_density, random_pure,
    swap_operator, DensityOperator, Projector, UnitaryOperator,
};
pub use subspace::{
    build_bases, expand_product, expand_symmetric, pos_neg_parts, prop2_check, split_sym_asym,
    swap_map, OperatorSplit, SubspaceBasis,
};
