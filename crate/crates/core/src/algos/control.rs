use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::algos::prediction::{check_unit_interval, StepSize};
use crate::error::{check_dim, Result, TdError};
use crate::features::{FeatureVector, WeightVector};
use crate::rng::SplitMix64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ControlVariant {
    SarsaAccumulate,
    SarsaReplace,
    TrueOnlineSarsa,
    TrueOnlineWatkins,
}

impl ControlVariant {
    pub const ALL: [ControlVariant; 4] = [
        ControlVariant::SarsaAccumulate,
        ControlVariant::SarsaReplace,
        ControlVariant::TrueOnlineSarsa,
        ControlVariant::TrueOnlineWatkins,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ControlVariant::SarsaAccumulate => "sarsa-accumulate",
            ControlVariant::SarsaReplace => "sarsa-replace",
            ControlVariant::TrueOnlineSarsa => "true-online-sarsa",
            ControlVariant::TrueOnlineWatkins => "true-online-watkins-q",
        }
    }
}

impl fmt::Display for ControlVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ControlVariant {
    type Err = TdError;
    fn from_str(s: &str) -> Result<Self> {
        ControlVariant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| TdError::InvalidConfig(format!("unknown control variant `{s}`")))
    }
}

/// `θᵀψ(s, a)` for every action, where `θ` is laid out in `num_actions`
/// blocks of `φ.dim()` weights.
pub fn action_values(theta: &WeightVector, phi: &FeatureVector, num_actions: usize) -> Result<Vec<f64>> {
    let n = phi.dim();
    check_dim(n * num_actions, theta.len())?;
    let mut q = vec![0.0; num_actions];
    phi.for_each(|i, x| {
        for (a, qa) in q.iter_mut().enumerate() {
            *qa += theta[a * n + i] * x;
        }
    });
    Ok(q)
}

/// Lowest index attaining the maximum of `q`.
pub fn argmax(q: &[f64]) -> usize {
    let mut best = 0;
    for (a, &v) in q.iter().enumerate().skip(1) {
        if v > q[best] {
            best = a;
        }
    }
    best
}

/// `A* = argmax_a q[a]`, except that `preferred` wins whenever it ties for
/// the maximum.
pub fn greedy_action_preferring(q: &[f64], preferred: usize) -> usize {
    let best = argmax(q);
    if q[preferred] == q[best] {
        preferred
    } else {
        best
    }
}

/// ε-greedy selection. Returns the action and whether it attains the
/// maximum action value. One uniform is always drawn for the coin, and a
/// second one only when exploring.
pub fn epsilon_greedy(
    theta: &WeightVector,
    phi_s: &FeatureVector,
    num_actions: usize,
    epsilon: f64,
    rng: &mut SplitMix64,
) -> Result<(usize, bool)> {
    check_unit_interval("epsilon", epsilon)?;
    let q = action_values(theta, phi_s, num_actions)?;
    let best = argmax(&q);
    let action = if rng.next_f64() < epsilon { rng.below(num_actions) } else { best };
    Ok((action, q[action] == q[best]))
}

/// Backward-view action-value learner over action features ψ.
#[derive(Clone, Debug)]
pub struct ControlLearner {
    variant: ControlVariant,
    theta: WeightVector,
    trace: WeightVector,
    q_old: f64,
    alpha: StepSize,
    lambda: f64,
    gamma: f64,
    epsilon: f64,
    num_actions: usize,
    t: u64,
}

impl ControlLearner {
    /// `state_dim` is the size of φ; θ has `state_dim · num_actions` entries.
    pub fn new(
        variant: ControlVariant,
        state_dim: usize,
        num_actions: usize,
        alpha: impl Into<StepSize>,
        lambda: f64,
        gamma: f64,
        epsilon: f64,
    ) -> Result<Self> {
        check_unit_interval("lambda", lambda)?;
        check_unit_interval("gamma", gamma)?;
        check_unit_interval("epsilon", epsilon)?;
        if num_actions == 0 {
            return Err(TdError::InvalidConfig("at least one action is required".into()));
        }
        let dim = state_dim * num_actions;
        Ok(ControlLearner {
            variant,
            theta: WeightVector::zeros(dim),
            trace: WeightVector::zeros(dim),
            q_old: 0.0,
            alpha: alpha.into(),
            lambda,
            gamma,
            epsilon,
            num_actions,
            t: 0,
        })
    }

    pub fn with_theta(mut self, theta: WeightVector) -> Result<Self> {
        check_dim(self.theta.len(), theta.len())?;
        self.theta = theta;
        Ok(self)
    }

    pub fn variant(&self) -> ControlVariant {
        self.variant
    }

    pub fn theta(&self) -> &WeightVector {
        &self.theta
    }

    pub fn trace(&self) -> &WeightVector {
        &self.trace
    }

    pub fn q_old(&self) -> f64 {
        self.q_old
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn dim(&self) -> usize {
        self.theta.len()
    }

    pub fn begin_episode(&mut self) {
        self.trace.fill_zero();
        self.q_old = 0.0;
    }

    pub fn select_action(&self, phi_s: &FeatureVector, rng: &mut SplitMix64) -> Result<(usize, bool)> {
        epsilon_greedy(&self.theta, phi_s, self.num_actions, self.epsilon, rng)
    }

    fn check(&self, psi: &FeatureVector, psi_next: &FeatureVector) -> Result<()> {
        check_dim(self.dim(), psi.dim())?;
        check_dim(self.dim(), psi_next.dim())
    }

    /// One Sarsa(λ) step on `ψ = ψ(S, A)` and `ψ′ = ψ(S′, A′)` (zero when
    /// `S′` is terminal).
    pub fn sarsa_step(&mut self, psi: &FeatureVector, psi_next: &FeatureVector, reward: f64) -> Result<()> {
        self.check(psi, psi_next)?;
        let alpha = self.alpha.at(self.t);
        let gl = self.gamma * self.lambda;
        let q = self.theta.dot_unchecked(psi);
        let q_next = self.theta.dot_unchecked(psi_next);
        let delta = reward + self.gamma * q_next - q;
        match self.variant {
            ControlVariant::SarsaAccumulate => {
                self.trace.scale(gl);
                self.trace.add_scaled_features(1.0, psi);
                self.theta.add_scaled(alpha * delta, &self.trace);
            }
            ControlVariant::SarsaReplace => {
                if let Some((index, value)) = psi.first_non_binary() {
                    return Err(TdError::NonBinaryFeature { index, value });
                }
                self.trace.scale(gl);
                psi.for_each(|i, x| {
                    if x == 1.0 {
                        self.trace[i] = 1.0;
                    }
                });
                self.theta.add_scaled(alpha * delta, &self.trace);
            }
            ControlVariant::TrueOnlineSarsa => self.dutch_update(psi, q, q_next, delta, alpha),
            ControlVariant::TrueOnlineWatkins => {
                return Err(TdError::InvalidConfig("use watkins_step for the Watkins learner".into()))
            }
        }
        self.t += 1;
        Ok(())
    }

    /// One step of true online Watkins's Q(λ).
    ///
    /// `psi_star_next` is `ψ(S′, A*)` (zero when `S′` is terminal) and
    /// `next_action_greedy` tells whether the action that will actually be
    /// taken in `S′` equals `A*`; the trace is cleared when it does not.
    /// The caller passes `ψ(S′, A′)` of the executed action as `psi` on the
    /// following step.
    pub fn watkins_step(
        &mut self,
        psi: &FeatureVector,
        psi_star_next: &FeatureVector,
        reward: f64,
        next_action_greedy: bool,
    ) -> Result<()> {
        if self.variant != ControlVariant::TrueOnlineWatkins {
            return Err(TdError::InvalidConfig(format!("watkins_step called on a {} learner", self.variant)));
        }
        self.check(psi, psi_star_next)?;
        let alpha = self.alpha.at(self.t);
        let q = self.theta.dot_unchecked(psi);
        let q_next = self.theta.dot_unchecked(psi_star_next);
        let delta = reward + self.gamma * q_next - q;
        self.dutch_update(psi, q, q_next, delta, alpha);
        if !next_action_greedy {
            self.trace.fill_zero();
        }
        self.t += 1;
        Ok(())
    }

    fn dutch_update(&mut self, psi: &FeatureVector, q: f64, q_next: f64, delta: f64, alpha: f64) {
        let gl = self.gamma * self.lambda;
        let e_psi = self.trace.dot_unchecked(psi);
        self.trace.scale(gl);
        self.trace.add_scaled_features(1.0 - alpha * gl * e_psi, psi);
        let dq = q - self.q_old;
        self.theta.add_scaled(alpha * (delta + dq), &self.trace);
        self.theta.add_scaled_features(-alpha * dq, psi);
        self.q_old = q_next;
    }
}
