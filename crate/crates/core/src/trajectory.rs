use serde::{Deserialize, Serialize};

use crate::error::{Result, TdError};
use crate::features::{stack_action_features, FeatureVector};

/// One observed step: `φ_t`, `R_{t+1}`, `φ_{t+1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub phi: FeatureVector,
    pub reward: f64,
    pub phi_next: FeatureVector,
    pub gamma: f64,
    pub terminal: bool,
}

impl Transition {
    /// A transition into a terminal state; `φ_{t+1}` is the zero vector.
    pub fn terminal(phi: FeatureVector, reward: f64, gamma: f64) -> Self {
        let n = phi.dim();
        Transition { phi, reward, phi_next: FeatureVector::zeros(n), gamma, terminal: true }
    }

    pub fn new(phi: FeatureVector, reward: f64, phi_next: FeatureVector, gamma: f64) -> Self {
        Transition { phi, reward, phi_next, gamma, terminal: false }
    }
}

/// Action bookkeeping for a control step `t`: `A_t`, and `A_{t+1}` with
/// whether it attained the maximum action value when it was selected.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionRecord {
    pub action: usize,
    pub next_action: Option<usize>,
    pub next_greedy: bool,
}

/// A single episode, or a segment of a continuing task.
///
/// Holds at most one terminal transition and only as the last step.
/// Control trajectories carry one [`ActionRecord`] per step; the state
/// features in each [`Transition`] are then expanded to action features
/// with [`stack_action_features`].
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub steps: Vec<Transition>,
    pub actions: Option<Vec<ActionRecord>>,
    pub num_actions: usize,
}

impl Trajectory {
    pub fn prediction(steps: Vec<Transition>) -> Result<Self> {
        let t = Trajectory { steps, actions: None, num_actions: 1 };
        t.validate()?;
        Ok(t)
    }

    pub fn control(steps: Vec<Transition>, actions: Vec<ActionRecord>, num_actions: usize) -> Result<Self> {
        if actions.len() != steps.len() {
            return Err(TdError::InvalidConfig(format!(
                "{} action records for {} steps",
                actions.len(),
                steps.len()
            )));
        }
        let t = Trajectory { steps, actions: Some(actions), num_actions };
        t.validate()?;
        Ok(t)
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn is_terminated(&self) -> bool {
        self.steps.last().is_some_and(|s| s.terminal)
    }

    pub fn gamma(&self) -> f64 {
        self.steps.first().map_or(1.0, |s| s.gamma)
    }

    pub fn feature_dim(&self) -> Option<usize> {
        self.steps.first().map(|s| s.phi.dim())
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.feature_dim().unwrap_or(0);
        let gamma = self.gamma();
        for (t, s) in self.steps.iter().enumerate() {
            if s.phi.dim() != n || s.phi_next.dim() != n {
                return Err(TdError::DimensionMismatch { expected: n, actual: s.phi.dim().max(s.phi_next.dim()) });
            }
            if s.gamma != gamma {
                return Err(TdError::InvalidConfig("discount must be constant within a trajectory".into()));
            }
            if s.terminal {
                if t + 1 != self.steps.len() {
                    return Err(TdError::InvalidConfig(format!("terminal transition at step {t} is not the last")));
                }
                if !s.phi_next.is_zero() {
                    return Err(TdError::InvalidConfig("terminal transition must have zero next features".into()));
                }
            }
        }
        if let Some(actions) = &self.actions {
            for (t, a) in actions.iter().enumerate() {
                if a.action >= self.num_actions || a.next_action.is_some_and(|b| b >= self.num_actions) {
                    return Err(TdError::ActionOutOfRange { action: a.action, num_actions: self.num_actions });
                }
                if let Some(next) = actions.get(t + 1) {
                    if a.next_action != Some(next.action) {
                        return Err(TdError::InvalidConfig(format!("action record {t} disagrees with step {}", t + 1)));
                    }
                }
            }
        }
        Ok(())
    }

    /// Greedy-flag of the action taken at step `t` (`t ≥ 1`).
    pub fn greedy_at(&self, t: usize) -> Result<bool> {
        let actions = self.actions.as_ref().ok_or(TdError::MissingAnnotation("greedy flags"))?;
        Ok(actions[t - 1].next_greedy)
    }

    /// The trajectory seen through action features ψ(S_t, A_t): a plain
    /// prediction trajectory on the state-action chain.
    pub fn action_feature_view(&self) -> Result<Trajectory> {
        let actions = self.actions.as_ref().ok_or(TdError::MissingAnnotation("actions"))?;
        let steps = self
            .steps
            .iter()
            .zip(actions)
            .map(|(s, a)| {
                let psi = stack_action_features(&s.phi, a.action, self.num_actions)?;
                let psi_next = match (s.terminal, a.next_action) {
                    (true, _) => FeatureVector::zeros(psi.dim()),
                    (false, Some(b)) => stack_action_features(&s.phi_next, b, self.num_actions)?,
                    (false, None) => return Err(TdError::MissingAnnotation("next action of a non-terminal step")),
                };
                Ok(Transition { phi: psi, reward: s.reward, phi_next: psi_next, gamma: s.gamma, terminal: s.terminal })
            })
            .collect::<Result<Vec<_>>>()?;
        Trajectory::prediction(steps)
    }
}
