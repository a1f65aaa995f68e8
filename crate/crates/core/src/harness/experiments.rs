//! Small fixed experiments on the canonical tasks: the one-state closed
//! forms, the two-state asymptotes, and the data behind the learning-curve
//! figures.

use serde::{Deserialize, Serialize};

use crate::algos::{replay_prediction, sample_trajectory, PredictionLearner, PredictionVariant};
use crate::envs::{canonical_task, true_values, CanonicalTask, Mrp, Representation};
use crate::error::{Result, TdError};
use crate::features::{FeatureVector, WeightVector};
use crate::oracle::{offline_lambda_return_history, online_lambda_return_algorithm};
use crate::rng::SplitMix64;
use crate::trajectory::{Trajectory, Transition};

/// Episode cap for sampling the canonical episodic tasks.
pub const EPISODE_CAP: usize = 100_000;

/// A one-state episode of exactly `len` steps: reward 0 on every self-loop
/// and reward 1 on the final exit, with the single feature always 1.
pub fn one_state_episode(len: usize) -> Result<Trajectory> {
    if len == 0 {
        return Err(TdError::Degenerate("episode length must be at least 1".into()));
    }
    let one = || FeatureVector::dense(vec![1.0]);
    let mut steps: Vec<Transition> = (0..len - 1).map(|_| Transition::new(one(), 0.0, one(), 1.0)).collect();
    steps.push(Transition::terminal(one(), 1.0, 1.0));
    Trajectory::prediction(steps)
}

/// Accumulate TD(1) after one episode of length `len`.
pub fn accumulate_closed_form(v0: f64, alpha: f64, len: usize) -> f64 {
    v0 + len as f64 * alpha * (1.0 - v0)
}

/// True online TD(1) after one episode of length `len`.
pub fn true_online_closed_form(v0: f64, alpha: f64, len: usize) -> f64 {
    v0 + (1.0 - (1.0 - alpha).powi(len as i32)) * (1.0 - v0)
}

/// Final one-state value of `variant` at λ = 1 after one episode.
pub fn one_state_final_value(variant: PredictionVariant, v0: f64, alpha: f64, len: usize) -> Result<f64> {
    let traj = one_state_episode(len)?;
    let mut l = PredictionLearner::new(variant, 1, alpha, 1.0, 1.0)?.with_theta(WeightVector::from_vec(vec![v0]))?;
    let hist = replay_prediction(&mut l, std::slice::from_ref(&traj))?;
    Ok(hist.last().expect("non-empty").as_slice()[0])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormCheck {
    pub v0: f64,
    pub alpha: f64,
    pub len: usize,
    pub accumulate_error: f64,
    pub true_online_error: f64,
}

/// Both closed forms on a `V₀ × α × T` grid.
pub fn closed_form_checks(v0s: &[f64], alphas: &[f64], lens: &[usize]) -> Result<Vec<ClosedFormCheck>> {
    let mut out = Vec::new();
    for &v0 in v0s {
        for &alpha in alphas {
            for &len in lens {
                let acc = one_state_final_value(PredictionVariant::Accumulate, v0, alpha, len)?;
                let to = one_state_final_value(PredictionVariant::TrueOnline, v0, alpha, len)?;
                out.push(ClosedFormCheck {
                    v0,
                    alpha,
                    len,
                    accumulate_error: (acc - accumulate_closed_form(v0, alpha, len)).abs(),
                    true_online_error: (to - true_online_closed_form(v0, alpha, len)).abs(),
                });
            }
        }
    }
    Ok(out)
}

/// Uniformly weighted RMS distance from the true values over live states.
pub fn rms_error(theta: &WeightVector, mrp: &Mrp, rep: &Representation, v_true: &[f64]) -> Result<f64> {
    let live = mrp.non_terminal_states();
    let mut total = 0.0;
    for &s in &live {
        total += (theta.dot(rep.phi(s))? - v_true[s]).powi(2);
    }
    Ok((total / live.len() as f64).sqrt())
}

/// Convergence rule for asymptotic error: every episode-boundary error within
/// the last `window` steps lies within `tolerance` (relative) of the latest
/// one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRule {
    pub window: usize,
    pub tolerance: f64,
    pub max_steps: usize,
}

impl Default for ConvergenceRule {
    fn default() -> Self {
        ConvergenceRule { window: 100, tolerance: 0.01, max_steps: 2_000_000 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Asymptote {
    pub rms: f64,
    pub steps: usize,
    pub converged: bool,
}

/// Runs `variant` on a canonical episodic task from `θ = 0` until the RMS
/// error satisfies `rule`, and reports the mean per-step RMS over the final
/// window. `seed` only matters for stochastic tasks.
pub fn asymptotic_rms(
    task: CanonicalTask,
    variant: PredictionVariant,
    alpha: f64,
    lambda: f64,
    rule: ConvergenceRule,
    seed: u64,
) -> Result<Asymptote> {
    let (mrp, rep) = canonical_task(task)?;
    let v_true = true_values(&mrp)?;
    let mut rng = SplitMix64::new(seed);
    let mut learner = PredictionLearner::new(variant, rep.dim(), alpha, lambda, mrp.gamma())?;
    let mut errors = vec![rms_error(learner.theta(), &mrp, &rep, &v_true)?];
    // Episode-boundary errors, compared at the same within-episode phase.
    let mut boundaries = vec![(0usize, errors[0])];
    loop {
        let ep = sample_trajectory(&mrp, &rep, EPISODE_CAP, &mut rng)?;
        learner.begin_episode();
        for tr in &ep.steps {
            learner.step(tr)?;
            errors.push(rms_error(learner.theta(), &mrp, &rep, &v_true)?);
        }
        let n = errors.len() - 1;
        let now = errors[n];
        boundaries.push((n, now));
        if n >= rule.window {
            let first = boundaries.iter().rposition(|&(s, _)| s <= n - rule.window).unwrap_or(0);
            let settled = boundaries[first..].iter().all(|&(_, e)| (e - now).abs() <= rule.tolerance * now.abs());
            if settled {
                let tail = &errors[n + 1 - rule.window..];
                let rms = tail.iter().sum::<f64>() / tail.len() as f64;
                return Ok(Asymptote { rms, steps: n, converged: true });
            }
        }
        if n >= rule.max_steps {
            return Ok(Asymptote { rms: now, steps: n, converged: false });
        }
    }
}

/// Per-step RMS curves over consecutive random-walk episodes for the offline
/// λ-return algorithm, the online λ-return algorithm and accumulate TD(λ),
/// each normalized by the initial RMS.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearningCurves {
    pub episode: Vec<usize>,
    pub offline: Vec<f64>,
    pub online: Vec<f64>,
    pub accumulate: Vec<f64>,
}

pub fn random_walk_curves(episodes: usize, alpha: f64, lambda: f64, seed: u64) -> Result<LearningCurves> {
    let (mrp, rep) = canonical_task(CanonicalTask::RandomWalk10)?;
    let v_true = true_values(&mrp)?;
    let mut rng = SplitMix64::new(seed);
    let eps: Vec<Trajectory> =
        (0..episodes).map(|_| sample_trajectory(&mrp, &rep, EPISODE_CAP, &mut rng)).collect::<Result<_>>()?;
    let theta0 = WeightVector::zeros(rep.dim());
    let base = rms_error(&theta0, &mrp, &rep, &v_true)?;
    let norm = |t: &WeightVector| rms_error(t, &mrp, &rep, &v_true).map(|e| e / base);

    let mut curves = LearningCurves { episode: vec![0], offline: vec![1.0], online: vec![1.0], accumulate: vec![1.0] };
    let (mut th_off, mut th_on) = (theta0.clone(), theta0.clone());
    let mut acc = PredictionLearner::new(PredictionVariant::Accumulate, rep.dim(), alpha, lambda, mrp.gamma())?;
    for (i, ep) in eps.iter().enumerate() {
        let off = offline_lambda_return_history(ep, alpha, lambda, &th_off)?;
        let on = online_lambda_return_algorithm(ep, alpha, lambda, &th_on)?.theta_history;
        let acc_hist = replay_prediction(&mut acc, std::slice::from_ref(ep))?;
        for t in 1..=ep.len() {
            curves.episode.push(i);
            curves.offline.push(norm(&off[t])?);
            curves.online.push(norm(&on[t])?);
            curves.accumulate.push(norm(&acc_hist[t])?);
        }
        th_off = off.last().expect("non-empty").clone();
        th_on = on.last().expect("non-empty").clone();
    }
    Ok(curves)
}

/// Mean one-state RMS over the first `episodes` sampled episodes at λ = 1,
/// measured after each episode.
pub fn one_state_average_rms(variant: PredictionVariant, alpha: f64, episodes: usize, runs: usize, seed: u64) -> Result<f64> {
    let (mrp, rep) = canonical_task(CanonicalTask::OneState)?;
    let v_true = true_values(&mrp)?;
    let mut rng = SplitMix64::new(seed);
    let mut total = 0.0;
    for _ in 0..runs {
        let mut l = PredictionLearner::new(variant, 1, alpha, 1.0, 1.0)?;
        let mut run_rng = rng.split();
        for _ in 0..episodes {
            let ep = sample_trajectory(&mrp, &rep, EPISODE_CAP, &mut run_rng)?;
            replay_prediction(&mut l, std::slice::from_ref(&ep))?;
            total += rms_error(l.theta(), &mrp, &rep, &v_true)?;
        }
    }
    Ok(total / (episodes * runs) as f64)
}
