use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::algos::{replay_control, replay_prediction, ControlLearner, ControlVariant, PredictionLearner, PredictionVariant, StepSize};
use crate::error::{Result, TdError};
use crate::features::WeightVector;
use crate::oracle::{online_lambda_return_algorithm, watkins_forward_run};
use crate::trajectory::Trajectory;

pub const EQUIVALENCE_TOLERANCE: f64 = 1e-8;

/// Two computations that are run on the same recorded trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EquivalencePair {
    TrueOnlineVsOracle,
    /// Expected to differ; kept as a reference point.
    AccumulateVsOracle,
    SarsaVsOracle,
    WatkinsVsTruncatedOracle,
    AlphaTConstantVsTrueOnline,
    TabularVsOneHotTrueOnline,
    /// Two incremental prediction learners.
    Learners(PredictionVariant, PredictionVariant),
}

impl EquivalencePair {
    pub const NAMED: [EquivalencePair; 6] = [
        EquivalencePair::TrueOnlineVsOracle,
        EquivalencePair::AccumulateVsOracle,
        EquivalencePair::SarsaVsOracle,
        EquivalencePair::WatkinsVsTruncatedOracle,
        EquivalencePair::AlphaTConstantVsTrueOnline,
        EquivalencePair::TabularVsOneHotTrueOnline,
    ];

    pub fn needs_actions(self) -> bool {
        matches!(self, EquivalencePair::SarsaVsOracle | EquivalencePair::WatkinsVsTruncatedOracle)
    }
}

impl fmt::Display for EquivalencePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EquivalencePair::TrueOnlineVsOracle => f.write_str("true-online-vs-oracle"),
            EquivalencePair::AccumulateVsOracle => f.write_str("accumulate-vs-oracle"),
            EquivalencePair::SarsaVsOracle => f.write_str("sarsa-vs-oracle"),
            EquivalencePair::WatkinsVsTruncatedOracle => f.write_str("watkins-vs-truncated-oracle"),
            EquivalencePair::AlphaTConstantVsTrueOnline => f.write_str("alpha-t-constant-vs-true-online"),
            EquivalencePair::TabularVsOneHotTrueOnline => f.write_str("tabular-vs-one-hot-true-online"),
            EquivalencePair::Learners(a, b) => write!(f, "{a}-vs-{b}"),
        }
    }
}

impl FromStr for EquivalencePair {
    type Err = TdError;
    fn from_str(s: &str) -> Result<Self> {
        if let Some(p) = EquivalencePair::NAMED.into_iter().find(|p| p.to_string() == s) {
            return Ok(p);
        }
        for a in PredictionVariant::ALL {
            if let Some(rest) = s.strip_prefix(a.name()).and_then(|r| r.strip_prefix("-vs-")) {
                if let Ok(b) = rest.parse() {
                    return Ok(EquivalencePair::Learners(a, b));
                }
            }
        }
        Err(TdError::InvalidConfig(format!("unknown equivalence pair `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub pair: EquivalencePair,
    /// `max_t ‖θ_A(t) − θ_B(t)‖∞ / (1 + ‖θ_B(t)‖∞)`.
    pub max_rel_diff: f64,
    /// Step at which the maximum occurs.
    pub worst_step: usize,
    pub steps: usize,
    pub passed: bool,
}

fn prediction_history(variant: PredictionVariant, alpha: impl Into<StepSize>, lambda: f64, traj: &Trajectory, init: &WeightVector) -> Result<Vec<WeightVector>> {
    let mut l = PredictionLearner::new(variant, init.len(), alpha, lambda, traj.gamma())?.with_theta(init.clone())?;
    replay_prediction(&mut l, std::slice::from_ref(traj))
}

fn control_history(variant: ControlVariant, alpha: f64, lambda: f64, traj: &Trajectory, init: &WeightVector) -> Result<Vec<WeightVector>> {
    let state_dim = traj.feature_dim().unwrap_or(0);
    let mut l = ControlLearner::new(variant, state_dim, traj.num_actions, alpha, lambda, traj.gamma(), 0.0)?
        .with_theta(init.clone())?;
    replay_control(&mut l, traj)
}

/// Runs both sides of `pair` on `traj` from `theta_init` and compares the
/// weight sequences step by step.
pub fn certify_equivalence(
    traj: &Trajectory,
    alpha: f64,
    lambda: f64,
    theta_init: &WeightVector,
    pair: EquivalencePair,
) -> Result<EquivalenceReport> {
    if pair.needs_actions() && traj.actions.is_none() {
        return Err(TdError::MissingAnnotation("actions and greedy flags"));
    }
    let (a, b) = match pair {
        EquivalencePair::TrueOnlineVsOracle => (
            prediction_history(PredictionVariant::TrueOnline, alpha, lambda, traj, theta_init)?,
            online_lambda_return_algorithm(traj, alpha, lambda, theta_init)?.theta_history,
        ),
        EquivalencePair::AccumulateVsOracle => (
            prediction_history(PredictionVariant::Accumulate, alpha, lambda, traj, theta_init)?,
            online_lambda_return_algorithm(traj, alpha, lambda, theta_init)?.theta_history,
        ),
        EquivalencePair::SarsaVsOracle => {
            let psi = traj.action_feature_view()?;
            (
                control_history(ControlVariant::TrueOnlineSarsa, alpha, lambda, traj, theta_init)?,
                online_lambda_return_algorithm(&psi, alpha, lambda, theta_init)?.theta_history,
            )
        }
        EquivalencePair::WatkinsVsTruncatedOracle => (
            control_history(ControlVariant::TrueOnlineWatkins, alpha, lambda, traj, theta_init)?,
            watkins_forward_run(traj, alpha, lambda, theta_init)?.theta_history,
        ),
        EquivalencePair::AlphaTConstantVsTrueOnline => (
            prediction_history(PredictionVariant::TrueOnlineAlphaT, StepSize::schedule(move |_| alpha), lambda, traj, theta_init)?,
            prediction_history(PredictionVariant::TrueOnline, alpha, lambda, traj, theta_init)?,
        ),
        EquivalencePair::TabularVsOneHotTrueOnline => (
            prediction_history(PredictionVariant::TabularTrueOnline, alpha, lambda, traj, theta_init)?,
            prediction_history(PredictionVariant::TrueOnline, alpha, lambda, traj, theta_init)?,
        ),
        EquivalencePair::Learners(x, y) => (
            prediction_history(x, alpha, lambda, traj, theta_init)?,
            prediction_history(y, alpha, lambda, traj, theta_init)?,
        ),
    };
    let (worst_step, max_rel_diff) = a
        .iter()
        .zip(&b)
        .map(|(x, y)| x.relative_diff(y))
        .enumerate()
        .fold((0, 0.0), |(bi, bd), (i, d)| if d > bd || d.is_nan() && !bd.is_nan() { (i, d) } else { (bi, bd) });
    Ok(EquivalenceReport {
        pair,
        max_rel_diff,
        worst_step,
        steps: traj.len(),
        passed: max_rel_diff <= EQUIVALENCE_TOLERANCE,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algos::{run_control_episode, sample_trajectory};
    use crate::envs::{build_mdp_representation, build_representation, generate_mdp, generate_mrp, RepresentationKind};
    use crate::rng::SplitMix64;

    fn mrp_traj(kind: RepresentationKind, seed: u64) -> Trajectory {
        let mrp = generate_mrp(10, 3, 0.1, 0.99, seed).unwrap();
        let rep = build_representation(kind, &mrp, seed).unwrap();
        sample_trajectory(&mrp, &rep, 200, &mut SplitMix64::new(seed)).unwrap()
    }

    #[test]
    fn true_online_passes_accumulate_does_not() {
        let traj = mrp_traj(RepresentationKind::Binary, 4);
        let init = WeightVector::zeros(traj.feature_dim().unwrap());
        let ok = certify_equivalence(&traj, 0.7, 0.95, &init, EquivalencePair::TrueOnlineVsOracle).unwrap();
        assert!(ok.passed, "{ok:?}");
        let bad = certify_equivalence(&traj, 0.7, 0.95, &init, EquivalencePair::AccumulateVsOracle).unwrap();
        assert!(!bad.passed && bad.max_rel_diff > 1e-3, "{bad:?}");
    }

    #[test]
    fn lambda_zero_learner_pairs() {
        let traj = mrp_traj(RepresentationKind::Tabular, 8);
        let init = WeightVector::zeros(10);
        for a in PredictionVariant::ALL {
            for b in PredictionVariant::ALL {
                let r = certify_equivalence(&traj, 0.3, 0.0, &init, EquivalencePair::Learners(a, b)).unwrap();
                assert!(r.max_rel_diff <= 1e-12, "{a} vs {b}: {}", r.max_rel_diff);
            }
        }
    }

    #[test]
    fn control_pairs_need_annotations() {
        let traj = mrp_traj(RepresentationKind::Tabular, 8);
        let init = WeightVector::zeros(10);
        let err = certify_equivalence(&traj, 0.3, 0.5, &init, EquivalencePair::WatkinsVsTruncatedOracle).unwrap_err();
        assert!(matches!(err, TdError::MissingAnnotation(_)));
    }

    #[test]
    fn control_pairs_pass() {
        let mdp = generate_mdp(6, 3, 3, 0.2, 0.9, 1).unwrap();
        let rep = build_mdp_representation(RepresentationKind::Binary, &mdp, 0).unwrap();
        for (variant, pair) in [
            (ControlVariant::TrueOnlineSarsa, EquivalencePair::SarsaVsOracle),
            (ControlVariant::TrueOnlineWatkins, EquivalencePair::WatkinsVsTruncatedOracle),
        ] {
            let mut l = ControlLearner::new(variant, rep.dim(), 3, 0.2, 0.9, 0.9, 0.25).unwrap();
            let (traj, _) = run_control_episode(&mut l, &mdp, &rep, 80, &mut SplitMix64::new(2)).unwrap();
            let r = certify_equivalence(&traj, 0.2, 0.9, &WeightVector::zeros(rep.dim() * 3), pair).unwrap();
            assert!(r.passed, "{r:?}");
        }
    }

    #[test]
    fn pair_names_round_trip() {
        for p in EquivalencePair::NAMED {
            assert_eq!(p.to_string().parse::<EquivalencePair>().unwrap(), p);
        }
        let p = EquivalencePair::Learners(PredictionVariant::TrueOnline, PredictionVariant::TrueOnlineAlphaT);
        assert_eq!(p.to_string().parse::<EquivalencePair>().unwrap(), p);
    }
}
