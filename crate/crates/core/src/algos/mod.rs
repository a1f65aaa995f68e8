//! Incremental learners. Every step costs O(n) in the number of features.

mod control;
mod episode;
mod prediction;

pub use control::{
    action_values, argmax, epsilon_greedy, greedy_action_preferring, ControlLearner, ControlVariant,
};
pub use episode::{
    replay_control, replay_prediction, run_control_episode, run_prediction_episode, sample_steps, sample_trajectory,
    ThetaHistory,
};
pub use prediction::{dutch_visit, replay_transitions, PredictionLearner, PredictionVariant, StepSize};
