use crate::algos::{replay_prediction, PredictionLearner, PredictionVariant};
use crate::error::{Result, TdError};
use crate::features::WeightVector;
use crate::oracle::forward::{interim_lambda_return, online_lambda_return_algorithm, FixedTheta};
use crate::trajectory::Trajectory;

/// `Σ_{k=0}^{t−1} (γλ)^{t−1−k} φ_k`, summed directly.
pub fn accumulating_trace_nonrecursive(traj: &Trajectory, t: usize, lambda: f64) -> Result<WeightVector> {
    if t > traj.len() {
        return Err(TdError::HorizonBeyondData { requested: t, available: traj.len() });
    }
    let n = traj.feature_dim().unwrap_or(0);
    let gl = traj.gamma() * lambda;
    let mut e = WeightVector::zeros(n);
    for k in 0..t {
        e.add_scaled_features(gl.powi((t - 1 - k) as i32), &traj.steps[k].phi);
    }
    Ok(e)
}

/// Whether `e_{t−1}[i] · φ_t[i] = 0` holds exactly for every feature and
/// step, `e` being the accumulating trace.
pub fn prop2_condition_holds(traj: &Trajectory, lambda: f64) -> bool {
    let n = traj.feature_dim().unwrap_or(0);
    let gl = traj.gamma() * lambda;
    let mut e = WeightVector::zeros(n);
    for (t, step) in traj.steps.iter().enumerate() {
        if t > 0 {
            let mut clash = false;
            step.phi.for_each(|i, x| clash |= e[i] * x != 0.0);
            if clash {
                return false;
            }
        }
        e.scale(gl);
        e.add_scaled_features(1.0, &step.phi);
    }
    true
}

#[derive(Clone, Debug)]
pub struct TheoremOneDiagnostics {
    /// `Δ_i^T = (Ḡ_i^{λ|T} − θ₀ᵀφ_i) φ_i` with every bootstrap using `θ₀`.
    pub delta_terms: Vec<WeightVector>,
    pub delta_sum: WeightVector,
    pub theta_td: WeightVector,
    pub theta_lambda: WeightVector,
    /// `‖θ_td − θ_λ‖ / ‖θ_td − θ₀‖` (Euclidean) at the final step.
    pub ratio: f64,
}

/// Compares accumulate TD(λ) with the online λ-return algorithm on one
/// trajectory, both started from `θ₀`.
pub fn theorem1_diagnostics(
    traj: &Trajectory,
    alpha: f64,
    lambda: f64,
    theta_init: &WeightVector,
) -> Result<TheoremOneDiagnostics> {
    let big_t = traj.len();
    if big_t == 0 {
        return Err(TdError::Degenerate("empty trajectory".into()));
    }
    let fixed = FixedTheta(theta_init);
    let mut delta_sum = WeightVector::zeros(theta_init.len());
    let mut delta_terms = Vec::with_capacity(big_t);
    for i in 0..big_t {
        let phi = &traj.steps[i].phi;
        let g = interim_lambda_return(traj, i, big_t, lambda, &fixed)?;
        let mut d = WeightVector::zeros(theta_init.len());
        d.add_scaled_features(g - theta_init.dot(phi)?, phi);
        delta_sum.add_scaled(1.0, &d);
        delta_terms.push(d);
    }
    if delta_sum.is_all_zero() {
        return Err(TdError::Degenerate("the Δ terms sum to zero".into()));
    }
    let mut learner = PredictionLearner::new(PredictionVariant::Accumulate, theta_init.len(), alpha, lambda, traj.gamma())?
        .with_theta(theta_init.clone())?;
    let theta_td = replay_prediction(&mut learner, std::slice::from_ref(traj))?.pop().expect("non-empty");
    let theta_lambda = online_lambda_return_algorithm(traj, alpha, lambda, theta_init)?.final_theta().clone();
    let denom = theta_td.sub(theta_init).norm();
    if denom == 0.0 {
        return Err(TdError::Degenerate("accumulate TD(λ) left the weights unchanged".into()));
    }
    let ratio = theta_td.sub(&theta_lambda).norm() / denom;
    Ok(TheoremOneDiagnostics { delta_terms, delta_sum, theta_td, theta_lambda, ratio })
}

pub fn theorem1_ratio(traj: &Trajectory, alpha: f64, lambda: f64, theta_init: &WeightVector) -> Result<f64> {
    Ok(theorem1_diagnostics(traj, alpha, lambda, theta_init)?.ratio)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureVector;
    use crate::rng::SplitMix64;
    use crate::trajectory::Transition;

    fn traj_from(phis: Vec<FeatureVector>, gamma: f64, seed: u64) -> Trajectory {
        let mut rng = SplitMix64::new(seed);
        let len = phis.len();
        let steps = (0..len)
            .map(|t| {
                if t + 1 == len {
                    Transition::terminal(phis[t].clone(), rng.normal(), gamma)
                } else {
                    Transition::new(phis[t].clone(), rng.normal(), phis[t + 1].clone(), gamma)
                }
            })
            .collect();
        Trajectory::prediction(steps).unwrap()
    }

    #[test]
    fn nonrecursive_trace_edge_cases() {
        let phis: Vec<_> = (0..5).map(|i| FeatureVector::one_hot(5, i)).collect();
        let traj = traj_from(phis.clone(), 0.9, 1);
        assert_eq!(accumulating_trace_nonrecursive(&traj, 1, 0.7).unwrap().as_slice(), phis[0].to_dense().as_slice());
        assert_eq!(accumulating_trace_nonrecursive(&traj, 4, 0.0).unwrap().as_slice(), phis[3].to_dense().as_slice());
    }

    #[test]
    fn prop2_cases() {
        let disjoint: Vec<_> = (0..6).map(|i| FeatureVector::one_hot(6, i)).collect();
        assert!(prop2_condition_holds(&traj_from(disjoint, 0.9, 2), 0.8));
        let always = vec![FeatureVector::dense(vec![1.0]); 4];
        assert!(!prop2_condition_holds(&traj_from(always, 1.0, 3), 0.5));
        let revisit: Vec<_> = [0, 1, 0].iter().map(|&i| FeatureVector::one_hot(2, i)).collect();
        assert!(!prop2_condition_holds(&traj_from(revisit.clone(), 0.9, 4), 0.5));
        // with λ = 0 the trace forgets everything but the current step
        assert!(prop2_condition_holds(&traj_from(revisit, 0.9, 4), 0.0));
    }

    #[test]
    fn random_sparse_disjoint_activations() {
        let mut rng = SplitMix64::new(77);
        for _ in 0..20 {
            let order = rng.sample_distinct(40, 20);
            let phis: Vec<_> = order
                .chunks(2)
                .map(|c| FeatureVector::sparse(40, c.iter().map(|&i| (i, 1.0 + rng.next_f64()))).unwrap())
                .collect();
            assert!(prop2_condition_holds(&traj_from(phis, 0.95, rng.next_u64()), 0.9));
        }
    }

    #[test]
    fn ratio_zero_at_lambda_zero() {
        let phis: Vec<_> = [0, 1, 2, 1, 0, 2].iter().map(|&i| FeatureVector::one_hot(3, i)).collect();
        let traj = traj_from(phis, 1.0, 5);
        let r = theorem1_ratio(&traj, 0.1, 0.0, &WeightVector::zeros(3)).unwrap();
        assert!(r.abs() < 1e-12, "{r}");
    }

    #[test]
    fn zero_alpha_is_degenerate() {
        let phis: Vec<_> = [0, 1].iter().map(|&i| FeatureVector::one_hot(2, i)).collect();
        let traj = traj_from(phis, 1.0, 6);
        assert!(matches!(theorem1_ratio(&traj, 0.0, 0.5, &WeightVector::zeros(2)), Err(TdError::Degenerate(_))));
    }
}
