//! Experiment harness: normalized-MSE metric, parameter sweeps, best-α
//! curves and equivalence certification.

mod certify;
mod experiments;
mod grid;
mod metric;
mod sweep;

pub use crate::oracle::Weighting;
pub use certify::{certify_equivalence, EquivalencePair, EquivalenceReport, EQUIVALENCE_TOLERANCE};
pub use experiments::{
    accumulate_closed_form, asymptotic_rms, closed_form_checks, one_state_average_rms, one_state_episode,
    one_state_final_value, random_walk_curves, rms_error, true_online_closed_form, Asymptote, ClosedFormCheck,
    ConvergenceRule, LearningCurves, EPISODE_CAP,
};
pub use grid::{standard_alpha_grid, standard_lambda_grid};
pub use metric::{normalized_mse, MseEvaluator};
pub use sweep::{
    best_overall, best_per_lambda, cell_seed, format_float, run_sweep, BestCell, BestPoint, CellResult, EnvSpec,
    SweepConfig, SweepResult, CSV_HEADER, DIVERGENCE_THRESHOLD,
};
