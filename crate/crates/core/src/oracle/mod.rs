//! Forward-view reference algorithms. They favour transparency over speed:
//! every horizon rebuilds its targets and replays all updates.

mod diagnostics;
mod forward;
mod lms;

pub use diagnostics::{
    accumulating_trace_nonrecursive, prop2_condition_holds, theorem1_diagnostics, theorem1_ratio, TheoremOneDiagnostics,
};
pub use forward::{
    concat_histories, interim_lambda_return, n_step_return, offline_lambda_return, offline_lambda_return_algorithm,
    offline_lambda_return_history, online_lambda_return_algorithm, online_lambda_return_episodes,
    watkins_forward_run, watkins_interim_target, FixedTheta, ForwardViewRun, ThetaLookup,
};
pub use lms::{lms_solution, lms_with, state_weights, Weighting};
