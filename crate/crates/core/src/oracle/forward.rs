//! Forward-view targets and the λ-return algorithms built on them.
//!
//! Step `j` of a trajectory holds `φ_j`, `R_{j+1}` and `φ_{j+1}`. Bootstrap
//! weights are looked up by index through [`ThetaLookup`]; the online
//! algorithm uses its own history, `θ_j := θ_j^j`.

use crate::algos::action_values;
use crate::error::{Result, TdError};
use crate::features::WeightVector;
use crate::trajectory::Trajectory;

/// Source of the bootstrap weights `θ_j`.
pub trait ThetaLookup {
    fn theta(&self, j: usize) -> &WeightVector;
}

/// `θ_j` is `history[j]`.
impl ThetaLookup for [WeightVector] {
    fn theta(&self, j: usize) -> &WeightVector {
        &self[j]
    }
}

impl ThetaLookup for Vec<WeightVector> {
    fn theta(&self, j: usize) -> &WeightVector {
        &self[j]
    }
}

/// The same weights for every index.
#[derive(Clone, Copy, Debug)]
pub struct FixedTheta<'a>(pub &'a WeightVector);

impl ThetaLookup for FixedTheta<'_> {
    fn theta(&self, _j: usize) -> &WeightVector {
        self.0
    }
}

fn bootstrap_value(traj: &Trajectory, j: usize, lookup: &(impl ThetaLookup + ?Sized)) -> Result<f64> {
    lookup.theta(j).dot(&traj.steps[j].phi_next)
}

/// `G_t^{(n)} = Σ_{k=1..n} γ^{k−1} R_{t+k} + γⁿ θ_{t+n−1}ᵀ φ_{t+n}`.
///
/// On a terminated trajectory `n` may run past the end; the return is then
/// the full return from `t`.
pub fn n_step_return(traj: &Trajectory, t: usize, n: usize, lookup: &(impl ThetaLookup + ?Sized)) -> Result<f64> {
    let len = traj.len();
    if n == 0 {
        return Err(TdError::InvalidConfig("an n-step return needs n >= 1".into()));
    }
    let n = if t + n > len && traj.is_terminated() && t < len { len - t } else { n };
    if t + n > len {
        return Err(TdError::HorizonBeyondData { requested: t + n, available: len });
    }
    let gamma = traj.gamma();
    let mut g = 0.0;
    let mut disc = 1.0;
    for k in 1..=n {
        g += disc * traj.steps[t + k - 1].reward;
        disc *= gamma;
    }
    Ok(g + disc * bootstrap_value(traj, t + n - 1, lookup)?)
}

/// Interim λ-return of `k` at horizon `h` from per-step rewards and
/// bootstrap values `b[j] = θ_jᵀφ_{j+1}` (only `j < h` is read).
fn interim_from_parts(rewards: &[f64], boot: &[f64], gamma: f64, lambda: f64, k: usize, h: usize) -> f64 {
    let mut total = 0.0;
    let mut rew = 0.0;
    let mut disc = 1.0;
    let mut lam = 1.0;
    for n in 1..=h - k {
        rew += disc * rewards[k + n - 1];
        disc *= gamma;
        let g = rew + disc * boot[k + n - 1];
        if n < h - k {
            total += (1.0 - lambda) * lam * g;
            lam *= lambda;
        } else {
            total += lam * g;
        }
    }
    total
}

fn check_horizon(traj: &Trajectory, k: usize, h: usize) -> Result<()> {
    if h <= k {
        return Err(TdError::InvalidConfig(format!("horizon {h} must exceed step {k}")));
    }
    if h > traj.len() {
        return Err(TdError::HorizonBeyondData { requested: h, available: traj.len() });
    }
    Ok(())
}

/// `G_k^{λ|h} = (1−λ) Σ_{n=1}^{h−k−1} λ^{n−1} G_k^{(n)} + λ^{h−k−1} G_k^{(h−k)}`.
pub fn interim_lambda_return(
    traj: &Trajectory,
    k: usize,
    h: usize,
    lambda: f64,
    lookup: &(impl ThetaLookup + ?Sized),
) -> Result<f64> {
    check_horizon(traj, k, h)?;
    let rewards: Vec<f64> = traj.steps[..h].iter().map(|s| s.reward).collect();
    let boot = (0..h).map(|j| if j < k { Ok(0.0) } else { bootstrap_value(traj, j, lookup) }).collect::<Result<Vec<_>>>()?;
    Ok(interim_from_parts(&rewards, &boot, traj.gamma(), lambda, k, h))
}

/// λ-return of step `t` in a complete episode.
pub fn offline_lambda_return(
    traj: &Trajectory,
    t: usize,
    lambda: f64,
    lookup: &(impl ThetaLookup + ?Sized),
) -> Result<f64> {
    if !traj.is_terminated() {
        return Err(TdError::InvalidConfig("the offline λ-return needs a complete episode".into()));
    }
    interim_lambda_return(traj, t, traj.len(), lambda, lookup)
}

/// Result of the online λ-return algorithm on one trajectory.
#[derive(Clone, Debug)]
pub struct ForwardViewRun<'a> {
    /// `θ_t := θ_t^t` for `t = 0..=T`; entry 0 is `θ_init`.
    pub theta_history: Vec<WeightVector>,
    pub trajectory: &'a Trajectory,
    pub alpha: f64,
    pub lambda: f64,
    pub gamma: f64,
    targets: TargetKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum TargetKind {
    LambdaReturn,
    Watkins,
}

impl ForwardViewRun<'_> {
    pub fn final_theta(&self) -> &WeightVector {
        self.theta_history.last().expect("history holds at least θ_init")
    }

    /// `θ_k^t`: the `k`-th vector of the update sequence at horizon `t`.
    pub fn intermediate(&self, k: usize, t: usize) -> Result<WeightVector> {
        if k > t || t > self.trajectory.len() {
            return Err(TdError::HorizonBeyondData { requested: t, available: self.trajectory.len() });
        }
        let engine = Engine::new(self.trajectory, self.alpha, self.lambda, self.targets)?;
        let mut theta = self.theta_history[0].clone();
        let targets = engine.targets(t, &self.theta_history)?;
        for (j, target) in targets.iter().enumerate().take(k) {
            engine.apply(&mut theta, j, *target);
        }
        Ok(theta)
    }
}

/// Shared replay machinery: for each horizon the targets of every step are
/// rebuilt from scratch and the whole update sequence is replayed from
/// `θ_init`.
struct Engine<'a> {
    /// Trajectory whose `phi` fields are the features being updated
    /// (action features for control).
    updates: Trajectory,
    source: &'a Trajectory,
    alpha: f64,
    lambda: f64,
    kind: TargetKind,
}

impl<'a> Engine<'a> {
    fn new(traj: &'a Trajectory, alpha: f64, lambda: f64, kind: TargetKind) -> Result<Self> {
        let updates = match kind {
            TargetKind::LambdaReturn => traj.clone(),
            TargetKind::Watkins => traj.action_feature_view()?,
        };
        if kind == TargetKind::Watkins {
            traj.actions.as_ref().ok_or(TdError::MissingAnnotation("greedy flags"))?;
        }
        Ok(Engine { updates, source: traj, alpha, lambda, kind })
    }

    /// Bootstrap value `b_j` from `θ_j`.
    fn bootstrap(&self, j: usize, theta_j: &WeightVector) -> Result<f64> {
        match self.kind {
            TargetKind::LambdaReturn => theta_j.dot(&self.updates.steps[j].phi_next),
            TargetKind::Watkins => max_bootstrap(self.source, j, theta_j),
        }
    }

    /// Horizon actually used by the target of step `k` at horizon `h`.
    fn effective_horizon(&self, k: usize, h: usize) -> usize {
        match self.kind {
            TargetKind::LambdaReturn => h,
            TargetKind::Watkins => h.min(first_non_greedy_after(self.source, k).unwrap_or(usize::MAX)),
        }
    }

    fn targets(&self, h: usize, history: &[WeightVector]) -> Result<Vec<f64>> {
        let rewards: Vec<f64> = self.updates.steps[..h].iter().map(|s| s.reward).collect();
        let boot = (0..h).map(|j| self.bootstrap(j, &history[j])).collect::<Result<Vec<_>>>()?;
        let gamma = self.updates.gamma();
        Ok((0..h)
            .map(|k| interim_from_parts(&rewards, &boot, gamma, self.lambda, k, self.effective_horizon(k, h)))
            .collect())
    }

    fn apply(&self, theta: &mut WeightVector, k: usize, target: f64) {
        let phi = &self.updates.steps[k].phi;
        let err = target - theta.dot_unchecked(phi);
        theta.add_scaled_features(self.alpha * err, phi);
    }

    fn run(self, theta_init: &WeightVector) -> Result<ForwardViewRun<'a>> {
        if let Some(n) = self.updates.feature_dim() {
            crate::error::check_dim(theta_init.len(), n)?;
        }
        let mut history = vec![theta_init.clone()];
        for h in 1..=self.updates.len() {
            let targets = self.targets(h, &history)?;
            let mut theta = theta_init.clone();
            for (k, target) in targets.into_iter().enumerate() {
                self.apply(&mut theta, k, target);
            }
            history.push(theta);
        }
        Ok(ForwardViewRun {
            theta_history: history,
            trajectory: self.source,
            alpha: self.alpha,
            lambda: self.lambda,
            gamma: self.updates.gamma(),
            targets: self.kind,
        })
    }
}

/// The online λ-return algorithm: at every horizon `t` the updates
/// `θ_{k+1}^t = θ_k^t + α(G_k^{λ|t} − θ_k^tᵀφ_k)φ_k` are replayed for all
/// `k < t` from `θ_init`. O(t²) work per step.
pub fn online_lambda_return_algorithm<'a>(
    traj: &'a Trajectory,
    alpha: f64,
    lambda: f64,
    theta_init: &WeightVector,
) -> Result<ForwardViewRun<'a>> {
    Engine::new(traj, alpha, lambda, TargetKind::LambdaReturn)?.run(theta_init)
}

/// Runs the online λ-return algorithm on consecutive episodes, each one
/// starting from the final weights of the previous one.
pub fn online_lambda_return_episodes<'a>(
    episodes: &'a [Trajectory],
    alpha: f64,
    lambda: f64,
    theta_init: &WeightVector,
) -> Result<Vec<ForwardViewRun<'a>>> {
    let mut runs: Vec<ForwardViewRun<'a>> = Vec::with_capacity(episodes.len());
    for ep in episodes {
        let start = runs.last().map_or_else(|| theta_init.clone(), |r| r.final_theta().clone());
        runs.push(online_lambda_return_algorithm(ep, alpha, lambda, &start)?);
    }
    Ok(runs)
}

/// Flattens per-episode histories into one sequence: `θ_init`, then the
/// weights after every step.
pub fn concat_histories(runs: &[ForwardViewRun<'_>]) -> Vec<WeightVector> {
    let mut out = Vec::new();
    for (i, run) in runs.iter().enumerate() {
        let skip = usize::from(i > 0);
        out.extend(run.theta_history.iter().skip(skip).cloned());
    }
    out
}

/// Weights of the offline λ-return algorithm over a complete episode: they
/// stay at `θ_init` until the end, where the updates toward the λ-returns
/// (bootstrapping from `θ_init`) are applied in order.
pub fn offline_lambda_return_history(
    episode: &Trajectory,
    alpha: f64,
    lambda: f64,
    theta_init: &WeightVector,
) -> Result<Vec<WeightVector>> {
    let lookup = FixedTheta(theta_init);
    let mut theta = theta_init.clone();
    for t in 0..episode.len() {
        let g = offline_lambda_return(episode, t, lambda, &lookup)?;
        let phi = &episode.steps[t].phi;
        let err = g - theta.dot(phi)?;
        theta.add_scaled_features(alpha * err, phi);
    }
    let mut history = vec![theta_init.clone(); episode.len()];
    history.push(theta);
    Ok(history)
}

pub fn offline_lambda_return_algorithm(
    episode: &Trajectory,
    alpha: f64,
    lambda: f64,
    theta_init: &WeightVector,
) -> Result<WeightVector> {
    let mut history = offline_lambda_return_history(episode, alpha, lambda, theta_init)?;
    Ok(history.pop().expect("non-empty history"))
}

/// `max_a θᵀψ(S_{j+1}, a)`, zero for a terminal successor.
fn max_bootstrap(traj: &Trajectory, j: usize, theta: &WeightVector) -> Result<f64> {
    let step = &traj.steps[j];
    if step.terminal {
        return Ok(0.0);
    }
    let q = action_values(theta, &step.phi_next, traj.num_actions)?;
    Ok(q.into_iter().fold(f64::NEG_INFINITY, f64::max))
}

/// `τ`: the first step after `t` whose action was not greedy.
fn first_non_greedy_after(traj: &Trajectory, t: usize) -> Option<usize> {
    let actions = traj.actions.as_ref()?;
    (t + 1..=traj.len().min(actions.len())).find(|&s| !actions[s - 1].next_greedy)
}

/// Watkins target `U_t^h`: the interim λ-return with max bootstraps, cut at
/// `z = min{h, τ}`.
pub fn watkins_interim_target(
    traj: &Trajectory,
    t: usize,
    h: usize,
    lambda: f64,
    lookup: &(impl ThetaLookup + ?Sized),
) -> Result<f64> {
    traj.actions.as_ref().ok_or(TdError::MissingAnnotation("greedy flags"))?;
    check_horizon(traj, t, h)?;
    let z = h.min(first_non_greedy_after(traj, t).unwrap_or(usize::MAX));
    let rewards: Vec<f64> = traj.steps[..z].iter().map(|s| s.reward).collect();
    let boot = (0..z).map(|j| if j < t { Ok(0.0) } else { max_bootstrap(traj, j, lookup.theta(j)) }).collect::<Result<Vec<_>>>()?;
    Ok(interim_from_parts(&rewards, &boot, traj.gamma(), lambda, t, z))
}

/// Forward view of Watkins's Q(λ): the online algorithm over action features
/// `ψ(S_k, A_k)` with targets `U_k^h`.
pub fn watkins_forward_run<'a>(
    traj: &'a Trajectory,
    alpha: f64,
    lambda: f64,
    theta_init: &WeightVector,
) -> Result<ForwardViewRun<'a>> {
    Engine::new(traj, alpha, lambda, TargetKind::Watkins)?.run(theta_init)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureVector;
    use crate::rng::SplitMix64;
    use crate::trajectory::Transition;

    fn random_traj(len: usize, dim: usize, gamma: f64, terminal: bool, seed: u64) -> Trajectory {
        let mut rng = SplitMix64::new(seed);
        let mut phis: Vec<FeatureVector> =
            (0..=len).map(|_| FeatureVector::dense((0..dim).map(|_| rng.normal()).collect())).collect();
        if terminal {
            phis[len] = FeatureVector::zeros(dim);
        }
        let steps = (0..len)
            .map(|t| {
                let mut tr = Transition::new(phis[t].clone(), rng.normal(), phis[t + 1].clone(), gamma);
                tr.terminal = terminal && t + 1 == len;
                tr
            })
            .collect();
        Trajectory::prediction(steps).unwrap()
    }

    fn random_history(len: usize, dim: usize, seed: u64) -> Vec<WeightVector> {
        let mut rng = SplitMix64::new(seed);
        (0..=len).map(|_| WeightVector::from_vec((0..dim).map(|_| rng.normal()).collect())).collect()
    }

    #[test]
    fn one_step_return() {
        let traj = random_traj(6, 3, 0.9, false, 1);
        let hist = random_history(6, 3, 2);
        let g = n_step_return(&traj, 2, 1, &hist).unwrap();
        let manual = traj.steps[2].reward + 0.9 * hist[2].dot(&traj.steps[3].phi).unwrap();
        assert!((g - manual).abs() < 1e-12);
    }

    #[test]
    fn three_step_return_by_hand() {
        let traj = random_traj(8, 4, 0.8, false, 3);
        let hist = random_history(8, 4, 4);
        let t = 2;
        let r = |i: usize| traj.steps[i - 1].reward;
        let manual = r(t + 1) + 0.8 * r(t + 2) + 0.64 * r(t + 3) + 0.512 * hist[t + 2].dot(&traj.steps[t + 3].phi).unwrap();
        assert!((n_step_return(&traj, t, 3, &hist).unwrap() - manual).abs() < 1e-12);
    }

    #[test]
    fn terminal_bootstrap_is_zero() {
        let traj = random_traj(4, 2, 0.9, true, 5);
        let hist = random_history(4, 2, 6);
        let g = n_step_return(&traj, 2, 2, &hist).unwrap();
        let manual = traj.steps[2].reward + 0.9 * traj.steps[3].reward;
        assert!((g - manual).abs() < 1e-12);
        assert_eq!(n_step_return(&traj, 2, 9, &hist).unwrap(), g);
    }

    #[test]
    fn horizon_beyond_data() {
        let traj = random_traj(4, 2, 0.9, false, 5);
        let hist = random_history(4, 2, 6);
        assert!(matches!(n_step_return(&traj, 2, 3, &hist), Err(TdError::HorizonBeyondData { .. })));
        assert!(interim_lambda_return(&traj, 2, 2, 0.5, &hist).is_err());
    }

    #[test]
    fn interim_collapses() {
        let traj = random_traj(10, 3, 0.95, false, 7);
        let hist = random_history(10, 3, 8);
        let one = interim_lambda_return(&traj, 4, 5, 0.7, &hist).unwrap();
        assert!((one - n_step_return(&traj, 4, 1, &hist).unwrap()).abs() < 1e-12);
        let full = interim_lambda_return(&traj, 1, 9, 1.0, &hist).unwrap();
        assert_eq!(full, n_step_return(&traj, 1, 8, &hist).unwrap());
    }

    #[test]
    fn interim_matches_definition_sum() {
        let traj = random_traj(12, 3, 0.9, false, 9);
        let hist = random_history(12, 3, 10);
        let (k, h, lambda) = (3, 11, 0.6_f64);
        let mut manual = 0.0;
        for n in 1..h - k {
            manual += (1.0 - lambda) * lambda.powi(n as i32 - 1) * n_step_return(&traj, k, n, &hist).unwrap();
        }
        manual += lambda.powi((h - k - 1) as i32) * n_step_return(&traj, k, h - k, &hist).unwrap();
        assert!((interim_lambda_return(&traj, k, h, lambda, &hist).unwrap() - manual).abs() < 1e-12);
    }

    #[test]
    fn offline_needs_complete_episode() {
        let traj = random_traj(5, 2, 1.0, false, 1);
        let theta = WeightVector::zeros(2);
        assert!(offline_lambda_return(&traj, 0, 0.5, &FixedTheta(&theta)).is_err());
    }

    #[test]
    fn offline_lambda_limits() {
        let traj = random_traj(7, 3, 0.9, true, 11);
        let theta = WeightVector::from_vec(vec![0.3, -0.2, 0.5]);
        let look = FixedTheta(&theta);
        let g0 = offline_lambda_return(&traj, 2, 0.0, &look).unwrap();
        assert!((g0 - n_step_return(&traj, 2, 1, &look).unwrap()).abs() < 1e-12);
        let g1 = offline_lambda_return(&traj, 2, 1.0, &look).unwrap();
        let mc: f64 = (2..7).map(|i| 0.9f64.powi(i as i32 - 2) * traj.steps[i].reward).sum();
        assert!((g1 - mc).abs() < 1e-12);
    }

    #[test]
    fn first_horizon_is_single_update() {
        let traj = random_traj(5, 3, 0.9, false, 12);
        let init = WeightVector::from_vec(vec![0.1, 0.2, 0.3]);
        let run = online_lambda_return_algorithm(&traj, 0.3, 0.8, &init).unwrap();
        let g = traj.steps[0].reward + 0.9 * init.dot(&traj.steps[0].phi_next).unwrap();
        let mut expected = init.clone();
        let phi = &traj.steps[0].phi;
        expected.add_scaled_features(0.3 * (g - init.dot(phi).unwrap()), phi);
        assert_eq!(run.theta_history.len(), 6);
        assert_eq!(run.theta_history[0], init);
        assert!(run.theta_history[1].relative_diff(&expected) < 1e-14);
        assert_eq!(run.intermediate(1, 1).unwrap(), run.theta_history[1]);
        assert_eq!(run.intermediate(0, 4).unwrap(), init);
        assert_eq!(run.intermediate(5, 5).unwrap(), *run.final_theta());
    }

    #[test]
    fn offline_history_frozen_mid_episode() {
        let traj = random_traj(6, 2, 1.0, true, 13);
        let init = WeightVector::from_vec(vec![0.5, -0.5]);
        let hist = offline_lambda_return_history(&traj, 0.1, 0.7, &init).unwrap();
        assert_eq!(hist.len(), 7);
        assert!(hist[..6].iter().all(|h| *h == init));
        assert_ne!(hist[6], init);
    }

    #[test]
    fn online_equals_offline_at_lambda_one() {
        for seed in 0..5 {
            let traj = random_traj(9, 3, 0.95, true, 20 + seed);
            let init = WeightVector::from_vec(vec![0.2, 0.0, -0.1]);
            let online = online_lambda_return_algorithm(&traj, 0.05, 1.0, &init).unwrap();
            let offline = offline_lambda_return_algorithm(&traj, 0.05, 1.0, &init).unwrap();
            assert!(online.final_theta().relative_diff(&offline) < 1e-12);
        }
    }
}
