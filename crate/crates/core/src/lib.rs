//! Contextual probability calculus for pairs of dichotomic observables.
//!
//! - [`calculus`]: forward and inverse transformation, classification, stochasticity checks
//! - [`lift`]: complex amplitudes from trigonometric statistics
//! - [`oracles`]: Kolmogorov, qubit and synthetic ground-truth models
//! - [`sampling`]: finite-ensemble simulation and bootstrap inference
//! - [`io`]: experiment files, analysis reports, sweep tables

pub mod calculus;
pub mod error;
pub mod io;
pub mod lift;
pub mod oracles;
pub mod rng;
pub mod sampling;

pub use calculus::{
    check_double_stochastic, check_row_stochastic, classify_theory, lambda_from_statistics, normalization_residual,
    phase_parametrization, predict_outcome, total_probability, BalanceReport, ContextStatistics, DegeneracyPolicy,
    DichotomicObservable, LambdaPair, Phase, PhasePair, ProbabilityPair, RowReport, Sign, TheoryClass,
    TransitionMatrix, EPS_CLASS_DEFAULT, TOL_DEGENERATE, TOL_EXACT,
};
pub use error::{Error, Result};
pub use lift::{balance_phase_constraint, born_residual, lift_to_amplitudes, AmplitudePair, PhaseConstraint};
pub use oracles::{
    classical_statistics, qubit_statistics, random_model, synthesize_statistics, ElementaryEvent, KolmogorovModel,
    ModelDescriptor, ModelKind, QubitModel, SyntheticModel,
};
pub use sampling::{
    convergence_study, estimate_lambda, estimate_statistics, simulate_counts, ConvergenceRow, CountsRecord,
    EstimatedStatistics, LambdaEstimate, SampleSizes,
};
