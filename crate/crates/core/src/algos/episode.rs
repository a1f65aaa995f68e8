//! Drivers that step an environment together with a learner and record the
//! resulting [`Trajectory`].

use crate::algos::control::{action_values, greedy_action_preferring, ControlLearner, ControlVariant};
use crate::algos::prediction::PredictionLearner;
use crate::envs::{Mdp, Mrp, Representation};
use crate::error::{check_dim, Result, TdError};
use crate::features::{stack_action_features, FeatureVector, WeightVector};
use crate::rng::SplitMix64;
use crate::trajectory::{ActionRecord, Trajectory, Transition};

/// Weight vectors observed during a run: the one in effect before the first
/// step, then one after every step.
pub type ThetaHistory = Vec<WeightVector>;

fn check_gamma(learner_gamma: f64, env_gamma: f64) -> Result<()> {
    if learner_gamma != env_gamma {
        return Err(TdError::InvalidConfig(format!(
            "learner discount {learner_gamma} differs from environment discount {env_gamma}"
        )));
    }
    Ok(())
}

/// Samples one episode, or `cap` steps of a continuing task, without
/// learning.
pub fn sample_trajectory(mrp: &Mrp, rep: &Representation, cap: usize, rng: &mut SplitMix64) -> Result<Trajectory> {
    let mut s = mrp.sample_initial(rng);
    let mut steps = Vec::new();
    loop {
        if steps.len() == cap {
            if mrp.is_episodic() {
                return Err(TdError::StepCapExceeded(cap));
            }
            break;
        }
        let (next, reward) = mrp.sample_step(s, rng)?;
        let mut tr = Transition::new(rep.phi(s).clone(), reward, rep.phi(next).clone(), mrp.gamma());
        tr.terminal = mrp.is_terminal(next);
        let done = tr.terminal;
        steps.push(tr);
        if done {
            break;
        }
        s = next;
    }
    Trajectory::prediction(steps)
}

/// Samples consecutive episodes until `budget` transitions have been
/// collected; the last episode is cut short when the budget runs out.
/// Continuing tasks yield a single segment.
pub fn sample_steps(mrp: &Mrp, rep: &Representation, budget: usize, rng: &mut SplitMix64) -> Result<Vec<Trajectory>> {
    let mut out = Vec::new();
    let mut remaining = budget;
    while remaining > 0 {
        let mut s = mrp.sample_initial(rng);
        let mut steps = Vec::new();
        while remaining > 0 {
            let (next, reward) = mrp.sample_step(s, rng)?;
            let mut tr = Transition::new(rep.phi(s).clone(), reward, rep.phi(next).clone(), mrp.gamma());
            tr.terminal = mrp.is_terminal(next);
            let done = tr.terminal;
            steps.push(tr);
            remaining -= 1;
            if done {
                break;
            }
            s = next;
        }
        out.push(Trajectory::prediction(steps)?);
    }
    Ok(out)
}

/// Runs one episode (or `cap` steps of a continuing task) with learning.
pub fn run_prediction_episode(
    learner: &mut PredictionLearner,
    mrp: &Mrp,
    rep: &Representation,
    cap: usize,
    rng: &mut SplitMix64,
) -> Result<(Trajectory, ThetaHistory)> {
    check_dim(learner.dim(), rep.dim())?;
    check_gamma(learner.gamma(), mrp.gamma())?;
    let traj = sample_trajectory(mrp, rep, cap, rng)?;
    let history = replay_prediction(learner, std::slice::from_ref(&traj))?;
    Ok((traj, history))
}

/// Feeds recorded episodes to `learner`, starting a new episode (trace and
/// `V_old` cleared) at the start of each.
pub fn replay_prediction(learner: &mut PredictionLearner, episodes: &[Trajectory]) -> Result<ThetaHistory> {
    let mut history = vec![learner.theta().clone()];
    for ep in episodes {
        learner.begin_episode();
        for tr in &ep.steps {
            learner.step(tr)?;
            history.push(learner.theta().clone());
        }
    }
    Ok(history)
}

/// Runs one control episode (or `cap` steps of a continuing task) with
/// ε-greedy behaviour, recording actions and greedy flags.
///
/// Watkins learners bootstrap from `ψ(S′, A*)` but the next step is taken
/// from `ψ(S′, A′)`, the action actually executed.
pub fn run_control_episode(
    learner: &mut ControlLearner,
    mdp: &Mdp,
    rep: &Representation,
    cap: usize,
    rng: &mut SplitMix64,
) -> Result<(Trajectory, ThetaHistory)> {
    let na = learner.num_actions();
    check_dim(learner.dim(), rep.dim() * na)?;
    check_gamma(learner.gamma(), mdp.gamma())?;
    if mdp.num_actions() != na {
        return Err(TdError::DimensionMismatch { expected: na, actual: mdp.num_actions() });
    }
    learner.begin_episode();
    let mut history = vec![learner.theta().clone()];
    let mut steps = Vec::new();
    let mut records = Vec::new();
    let mut s = mdp.sample_initial(rng);
    let (mut a, _) = learner.select_action(rep.phi(s), rng)?;
    loop {
        if steps.len() == cap {
            if mdp.is_episodic() {
                return Err(TdError::StepCapExceeded(cap));
            }
            break;
        }
        let (next, reward) = mdp.sample_step(s, a, rng)?;
        let terminal = mdp.is_terminal(next);
        let phi = rep.phi(s);
        let phi_next = rep.phi(next);
        let psi = stack_action_features(phi, a, na)?;
        let (next_action, next_greedy) = if terminal {
            (None, true)
        } else {
            let (b, greedy) = learner.select_action(phi_next, rng)?;
            (Some(b), greedy)
        };
        match learner.variant() {
            ControlVariant::TrueOnlineWatkins => {
                let psi_star = match next_action {
                    None => FeatureVector::zeros(psi.dim()),
                    Some(b) => {
                        let q = action_values(learner.theta(), phi_next, na)?;
                        stack_action_features(phi_next, greedy_action_preferring(&q, b), na)?
                    }
                };
                learner.watkins_step(&psi, &psi_star, reward, next_greedy)?;
            }
            _ => {
                let psi_next = match next_action {
                    None => FeatureVector::zeros(psi.dim()),
                    Some(b) => stack_action_features(phi_next, b, na)?,
                };
                learner.sarsa_step(&psi, &psi_next, reward)?;
            }
        }
        history.push(learner.theta().clone());
        let mut tr = Transition::new(phi.clone(), reward, phi_next.clone(), mdp.gamma());
        tr.terminal = terminal;
        steps.push(tr);
        records.push(ActionRecord { action: a, next_action, next_greedy });
        match next_action {
            None => break,
            Some(b) => {
                s = next;
                a = b;
            }
        }
    }
    Ok((Trajectory::control(steps, records, na)?, history))
}

/// Replays a recorded control episode through `learner`.
///
/// For Watkins learners `A*` is recomputed from the current weights, and the
/// recorded greedy flags must agree with it.
pub fn replay_control(learner: &mut ControlLearner, traj: &Trajectory) -> Result<ThetaHistory> {
    let actions = traj.actions.as_ref().ok_or(TdError::MissingAnnotation("actions"))?;
    let na = traj.num_actions;
    if na != learner.num_actions() {
        return Err(TdError::DimensionMismatch { expected: learner.num_actions(), actual: na });
    }
    learner.begin_episode();
    let mut history = vec![learner.theta().clone()];
    for (t, (tr, rec)) in traj.steps.iter().zip(actions).enumerate() {
        let psi = stack_action_features(&tr.phi, rec.action, na)?;
        match learner.variant() {
            ControlVariant::TrueOnlineWatkins => {
                let (psi_star, greedy) = match rec.next_action {
                    None => (FeatureVector::zeros(psi.dim()), true),
                    Some(b) => {
                        let q = action_values(learner.theta(), &tr.phi_next, na)?;
                        let star = greedy_action_preferring(&q, b);
                        (stack_action_features(&tr.phi_next, star, na)?, star == b)
                    }
                };
                if rec.next_action.is_some() && greedy != rec.next_greedy {
                    return Err(TdError::InvalidConfig(format!(
                        "greedy flag recorded at step {t} disagrees with the replayed weights"
                    )));
                }
                learner.watkins_step(&psi, &psi_star, tr.reward, greedy)?;
            }
            _ => {
                let psi_next = match rec.next_action {
                    None => FeatureVector::zeros(psi.dim()),
                    Some(b) => stack_action_features(&tr.phi_next, b, na)?,
                };
                learner.sarsa_step(&psi, &psi_next, tr.reward)?;
            }
        }
        history.push(learner.theta().clone());
    }
    Ok(history)
}
