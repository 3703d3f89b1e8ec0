//! Simulation and model-reduction toolkit for an activator–repressor
//! circadian oscillator.
//!
//! The crate integrates the nine-species mass-action system, its
//! delay-free quasi-steady-state reduction, and three delayed reductions
//! in which fast species are evaluated at lagged times, then quantifies
//! each reduction by its oscillation period and by the relative L2
//! distance of the rescaled, peak-aligned trajectories.

pub mod analysis;
pub mod delay;
pub mod history;
pub mod model;
pub mod solver;

pub use analysis::{
    align_scale, build_table1, detect_period, error_report, rel_err_l2, reconstruct_delayed,
    reconstruct_qss, simulate_nine, AnalysisError, ErrorReport, PeriodEstimate, Table1,
};
pub use delay::{
    constant_rule_weight, delayed_aux_at, delayed_derivative, delayed_rhs, delays_at,
    exact_tau_w, limit_tau_w, DelayError, DelayVariant, DelayedAux, Delays, QuadratureRule,
};
pub use history::{Channel, HistoryError, HistoryStore, Sample};
pub use model::{
    a_tilde_s, full_rhs, reduced_rhs, steady_da, steady_dr, steady_ma, steady_mr, FullState,
    InvalidRate, RateConstants, ReducedState, FULL_COMPONENTS, REDUCED_COMPONENTS,
};
pub use solver::{
    integrate_dde, integrate_full, integrate_ode, integrate_reduced, DdeSolution,
    ParseSystemError, SolverConfig, SolverError, SystemId, Trajectory, TrajectoryMeta,
};
