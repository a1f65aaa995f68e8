//! TD(λ)-family learners and the forward-view algorithms they are checked
//! against.
//!
//! * [`features`]: feature/weight vectors and action-feature stacking.
//! * [`envs`]: random MRPs/MDPs, canonical tasks and representations.
//! * [`algos`]: incremental backward-view learners (accumulate, replace,
//!   true online, time-dependent step-size, tabular, Sarsa and Watkins Q).
//! * [`oracle`]: brute-force forward views (λ-returns, the online λ-return
//!   algorithm) and diagnostics.
//! * [`harness`]: metrics, parameter sweeps and equivalence certification.

pub mod algos;
pub mod envs;
pub mod error;
pub mod features;
pub mod harness;
pub mod oracle;
pub mod rng;
pub mod trajectory;

pub use algos::{ControlLearner, ControlVariant, PredictionLearner, PredictionVariant, StepSize};
pub use envs::{CanonicalTask, Mdp, Mrp, Representation, RepresentationKind};
pub use error::{Result, TdError};
pub use features::{dot, stack_action_features, FeatureVector, WeightVector};
pub use rng::{mix64, SplitMix64};
pub use trajectory::{ActionRecord, Trajectory, Transition};
