//! Additive feature attributions as closed-form minimizers of a
//! kernel-weighted local least-squares surrogate.
//!
//! A prediction model, a background dataset, and an instance define a
//! characteristic-function game over feature coalitions ([`model`]). A
//! symmetric kernel ([`kernels`]) weighs coalitions by size, and the
//! surrogate fit under that kernel has an explicit solution ([`solver`]).
//! Dense least-squares oracles ([`oracle`]) and kernel-free reference
//! attributions ([`reference`]) cross-check the closed forms.

pub mod cli;
pub mod error;
pub mod game;
pub mod io;
pub mod kernels;
mod linalg;
pub mod model;
pub mod oracle;
pub mod reference;
pub mod solver;
pub mod verify;

pub use error::{AfaError, ErrorClass, Result};
pub use game::{
    grand_gap, is_additive, make_game, marginal_to_grand, AdditivityCertificate, Coalition,
    CoalitionGame,
};
pub use kernels::{KernelSpec, SymmetricKernel};
pub use model::{estimate_value_function, feature_means, predict, Dataset, InstanceRef, PredictionModel};
pub use oracle::{wls_oracle_constrained, wls_oracle_unconstrained};
pub use reference::{es, fesp_raw, linear_model_attribution, ls_prenucleolus_oracle, shapley, shapley_permutation_oracle};
pub use solver::{solve_constrained, solve_unconstrained, Attribution, SolverDiagnostics};
