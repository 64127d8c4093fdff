//! Bell-correlation witnesses for many-body spin systems and the statistics
//! needed to certify them from a finite number of experimental runs.
//!
//! - [`inequality`]: the permutation-invariant Bell inequality and exact
//!   enumeration of its local bound.
//! - [`witness`]: witnesses built from collective spin moments and their
//!   critical curves.
//! - [`squeezing`]: squeezing requirements for finite numbers of spins.
//! - [`bounds`]: concentration bounds, run counts and setting optimisation.
//! - [`simulate`]: Monte Carlo sampling of the round-by-round estimator.

pub mod bounds;
pub mod error;
pub mod inequality;
pub mod numeric;
pub mod simulate;
pub mod squeezing;
pub mod witness;

pub use bounds::{
    bound_report, crossover_epsilon, crossover_epsilon_for_ratio, estimator_config,
    estimator_config_with, optimize_nu, p_value, runs_required, three_peak_ratio,
    worst_case_variance, BoundKind, BoundReport, EstimatorConfig, NuOptimum, SupportMode,
};
pub use error::{BellError, Result};
pub use inequality::{
    brute_force_minimum, classical_bound, inequality_value, BellScenario, CorrelatorSet,
    DeterministicStrategy, StrategyCounts,
};
pub use simulate::{
    counterexample_demo, empirical_pvalue, run_experiment, sample_round, GaussianPoint,
    SourceModel, TrialRecord,
};
pub use squeezing::{
    lambert_w_lower, max_violation_point, min_zeta_finite_runs, min_zeta_spin_constraint,
    z_star_asymptotic, SqueezingBound,
};
pub use witness::{
    critical_zeta, limit_constants, optimal_witness, solve_lambda, violation_nu, w_stat,
    witness_value, AngleSet, Settings, WitnessPoint,
};
