use crate::envs::{Mrp, Representation};
use crate::error::{Result, TdError};
use crate::features::{FeatureVector, WeightVector};
use crate::oracle::{lms_solution, state_weights, Weighting};

/// Weighted squared distance of a value estimate from the LMS solution,
/// `Σ_s w(s)(θᵀφ(s) − θ*ᵀφ(s))²`, normalized by its value at `θ₀`.
#[derive(Clone, Debug)]
pub struct MseEvaluator {
    weights: Vec<f64>,
    features: Vec<FeatureVector>,
    targets: Vec<f64>,
    base: f64,
}

impl MseEvaluator {
    pub fn new(mrp: &Mrp, rep: &Representation, weighting: Weighting, theta0: &WeightVector) -> Result<Self> {
        let w = state_weights(mrp, weighting)?;
        let (theta_star, _) = lms_solution(mrp, rep, weighting)?;
        let mut ev = MseEvaluator { weights: Vec::new(), features: Vec::new(), targets: Vec::new(), base: 1.0 };
        for (s, phi) in rep.table().iter().enumerate() {
            if w[s] > 0.0 {
                ev.weights.push(w[s]);
                ev.targets.push(theta_star.dot(phi)?);
                ev.features.push(phi.clone());
            }
        }
        ev.base = ev.error(theta0);
        if ev.base == 0.0 {
            return Err(TdError::Degenerate("the initial weights already give the LMS values".into()));
        }
        Ok(ev)
    }

    /// Unnormalized weighted error of `theta`.
    pub fn error(&self, theta: &WeightVector) -> f64 {
        self.features
            .iter()
            .zip(&self.weights)
            .zip(&self.targets)
            .map(|((phi, w), target)| w * (theta.dot_unchecked(phi) - target).powi(2))
            .sum()
    }

    pub fn initial_error(&self) -> f64 {
        self.base
    }

    /// Mean of `error(θ_t) / error(θ₀)` over `t = 1..=horizon`.
    pub fn normalized(&self, history: &[WeightVector], horizon: usize) -> Result<f64> {
        if horizon == 0 || horizon >= history.len() {
            return Err(TdError::HorizonBeyondData { requested: horizon, available: history.len().saturating_sub(1) });
        }
        let total: f64 = history[1..=horizon].iter().map(|t| self.error(t)).sum();
        Ok(total / horizon as f64 / self.base)
    }
}

/// Normalized MSE of `history` (entry 0 is `θ₀`) over its first `horizon`
/// updates.
pub fn normalized_mse(
    history: &[WeightVector],
    mrp: &Mrp,
    rep: &Representation,
    horizon: usize,
    weighting: Weighting,
) -> Result<f64> {
    let theta0 = history.first().ok_or(TdError::HorizonBeyondData { requested: horizon, available: 0 })?;
    MseEvaluator::new(mrp, rep, weighting, theta0)?.normalized(history, horizon)
}
