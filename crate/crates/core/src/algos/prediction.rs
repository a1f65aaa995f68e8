use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{check_dim, Result, TdError};
use crate::features::WeightVector;
use crate::trajectory::Transition;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PredictionVariant {
    Accumulate,
    Replace,
    TrueOnline,
    TrueOnlineAlphaT,
    TabularTrueOnline,
}

impl PredictionVariant {
    pub const ALL: [PredictionVariant; 5] = [
        PredictionVariant::Accumulate,
        PredictionVariant::Replace,
        PredictionVariant::TrueOnline,
        PredictionVariant::TrueOnlineAlphaT,
        PredictionVariant::TabularTrueOnline,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PredictionVariant::Accumulate => "accumulate",
            PredictionVariant::Replace => "replace",
            PredictionVariant::TrueOnline => "true-online",
            PredictionVariant::TrueOnlineAlphaT => "true-online-alpha-t",
            PredictionVariant::TabularTrueOnline => "tabular-true-online",
        }
    }
}

impl fmt::Display for PredictionVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PredictionVariant {
    type Err = TdError;
    fn from_str(s: &str) -> Result<Self> {
        PredictionVariant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| TdError::InvalidConfig(format!("unknown prediction variant `{s}`")))
    }
}

/// Step size: a constant, or `α_t` as a pure function of the global step
/// counter (`t = 0` on the first step ever taken).
#[derive(Clone)]
pub enum StepSize {
    Constant(f64),
    Schedule(Arc<dyn Fn(u64) -> f64 + Send + Sync>),
}

impl StepSize {
    pub fn schedule(f: impl Fn(u64) -> f64 + Send + Sync + 'static) -> Self {
        StepSize::Schedule(Arc::new(f))
    }

    pub fn at(&self, t: u64) -> f64 {
        match self {
            StepSize::Constant(a) => *a,
            StepSize::Schedule(f) => f(t),
        }
    }
}

impl fmt::Debug for StepSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepSize::Constant(a) => write!(f, "Constant({a})"),
            StepSize::Schedule(_) => f.write_str("Schedule(..)"),
        }
    }
}

impl From<f64> for StepSize {
    fn from(a: f64) -> Self {
        StepSize::Constant(a)
    }
}

pub(crate) fn check_unit_interval(name: &str, x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(TdError::InvalidConfig(format!("{name} must lie in [0, 1], got {x}")))
    }
}

/// Backward-view state-value learner.
///
/// The trace holds `e` for every variant except `TrueOnlineAlphaT`, where it
/// holds `e⁺` (the step size folded in), and `TabularTrueOnline`, where it
/// holds the trace already decayed by `γλ` for the next visit.
#[derive(Clone, Debug)]
pub struct PredictionLearner {
    variant: PredictionVariant,
    theta: WeightVector,
    trace: WeightVector,
    v_old: f64,
    alpha: StepSize,
    lambda: f64,
    gamma: f64,
    t: u64,
}

impl PredictionLearner {
    pub fn new(variant: PredictionVariant, dim: usize, alpha: impl Into<StepSize>, lambda: f64, gamma: f64) -> Result<Self> {
        check_unit_interval("lambda", lambda)?;
        check_unit_interval("gamma", gamma)?;
        Ok(PredictionLearner {
            variant,
            theta: WeightVector::zeros(dim),
            trace: WeightVector::zeros(dim),
            v_old: 0.0,
            alpha: alpha.into(),
            lambda,
            gamma,
            t: 0,
        })
    }

    pub fn with_theta(mut self, theta: WeightVector) -> Result<Self> {
        check_dim(self.theta.len(), theta.len())?;
        self.theta = theta;
        Ok(self)
    }

    pub fn variant(&self) -> PredictionVariant {
        self.variant
    }

    pub fn theta(&self) -> &WeightVector {
        &self.theta
    }

    pub fn trace(&self) -> &WeightVector {
        &self.trace
    }

    pub fn v_old(&self) -> f64 {
        self.v_old
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn steps_taken(&self) -> u64 {
        self.t
    }

    pub fn dim(&self) -> usize {
        self.theta.len()
    }

    /// Step size that the next call to [`step`](Self::step) will use.
    pub fn current_alpha(&self) -> f64 {
        self.alpha.at(self.t)
    }

    pub fn begin_episode(&mut self) {
        self.trace.fill_zero();
        self.v_old = 0.0;
    }

    pub fn step(&mut self, tr: &Transition) -> Result<()> {
        check_dim(self.dim(), tr.phi.dim())?;
        check_dim(self.dim(), tr.phi_next.dim())?;
        let alpha = self.current_alpha();
        match self.variant {
            PredictionVariant::Accumulate => self.accumulate(tr, alpha),
            PredictionVariant::Replace => self.replace(tr, alpha)?,
            PredictionVariant::TrueOnline => self.true_online(tr, alpha),
            PredictionVariant::TrueOnlineAlphaT => self.true_online_alpha_t(tr, alpha),
            PredictionVariant::TabularTrueOnline => {
                let s = tr
                    .phi
                    .one_hot_index()
                    .ok_or_else(|| TdError::InvalidConfig("tabular learner needs one-hot features".into()))?;
                let next = if tr.phi_next.is_zero() {
                    None
                } else {
                    Some(tr.phi_next.one_hot_index().ok_or_else(|| {
                        TdError::InvalidConfig("tabular learner needs one-hot features".into())
                    })?)
                };
                self.tabular(s, tr.reward, next, alpha)
            }
        }
        self.t += 1;
        Ok(())
    }

    /// `e ← γλe + φ`, `θ ← θ + αδe`.
    fn accumulate(&mut self, tr: &Transition, alpha: f64) {
        let delta = tr.reward + self.gamma * self.theta.dot_unchecked(&tr.phi_next) - self.theta.dot_unchecked(&tr.phi);
        self.trace.scale(self.gamma * self.lambda);
        self.trace.add_scaled_features(1.0, &tr.phi);
        self.theta.add_scaled(alpha * delta, &self.trace);
    }

    fn replace(&mut self, tr: &Transition, alpha: f64) -> Result<()> {
        if let Some((index, value)) = tr.phi.first_non_binary() {
            return Err(TdError::NonBinaryFeature { index, value });
        }
        let delta = tr.reward + self.gamma * self.theta.dot_unchecked(&tr.phi_next) - self.theta.dot_unchecked(&tr.phi);
        self.trace.scale(self.gamma * self.lambda);
        tr.phi.for_each(|i, x| {
            if x == 1.0 {
                self.trace[i] = 1.0;
            }
        });
        self.theta.add_scaled(alpha * delta, &self.trace);
        Ok(())
    }

    fn true_online(&mut self, tr: &Transition, alpha: f64) {
        let v = self.theta.dot_unchecked(&tr.phi);
        let v_next = self.theta.dot_unchecked(&tr.phi_next);
        let delta = tr.reward + self.gamma * v_next - v;
        let gl = self.gamma * self.lambda;
        let e_phi = self.trace.dot_unchecked(&tr.phi);
        self.trace.scale(gl);
        self.trace.add_scaled_features(1.0 - alpha * gl * e_phi, &tr.phi);
        let dv = v - self.v_old;
        self.theta.add_scaled(alpha * (delta + dv), &self.trace);
        self.theta.add_scaled_features(-alpha * dv, &tr.phi);
        self.v_old = v_next;
    }

    fn true_online_alpha_t(&mut self, tr: &Transition, alpha: f64) {
        let v = self.theta.dot_unchecked(&tr.phi);
        let v_next = self.theta.dot_unchecked(&tr.phi_next);
        let delta_mod = tr.reward + self.gamma * v_next - self.v_old;
        let gl = self.gamma * self.lambda;
        let e_phi = self.trace.dot_unchecked(&tr.phi);
        self.trace.scale(gl);
        self.trace.add_scaled_features(alpha - alpha * gl * e_phi, &tr.phi);
        self.theta.add_scaled(delta_mod, &self.trace);
        self.theta.add_scaled_features(-alpha * (v - self.v_old), &tr.phi);
        self.v_old = v_next;
    }

    fn tabular(&mut self, s: usize, reward: f64, next: Option<usize>, alpha: f64) {
        let v_next = next.map_or(0.0, |j| self.theta[j]);
        let dv = self.theta[s] - self.v_old;
        self.v_old = v_next;
        let delta = reward + self.gamma * v_next - self.theta[s];
        self.trace[s] = dutch_visit(self.trace[s], alpha);
        let scale = alpha * (delta + dv);
        let gl = self.gamma * self.lambda;
        for (v, e) in self.theta.as_mut_slice().iter_mut().zip(self.trace.as_mut_slice()) {
            *v += scale * *e;
            *e *= gl;
        }
        self.theta[s] -= alpha * dv;
    }
}

/// Trace of a visited state in the tabular dutch update: `(1 − α)e + 1`.
pub fn dutch_visit(e: f64, alpha: f64) -> f64 {
    (1.0 - alpha) * e + 1.0
}

/// Runs `learner` over consecutive transitions and returns `θ` before the
/// first step followed by `θ` after each step.
pub fn replay_transitions<'a>(
    learner: &mut PredictionLearner,
    steps: impl IntoIterator<Item = &'a Transition>,
) -> Result<Vec<WeightVector>> {
    let mut history = vec![learner.theta().clone()];
    for tr in steps {
        learner.step(tr)?;
        history.push(learner.theta().clone());
    }
    Ok(history)
}
