use anyhow::Result;
use serde::Serialize;

use tdlab_core::algos::{
    replay_prediction, run_control_episode, sample_trajectory, ControlLearner, ControlVariant, PredictionLearner,
    PredictionVariant,
};
use tdlab_core::envs::{
    build_mdp_representation, build_representation, canonical_task, generate_mdp, generate_mrp, CanonicalTask,
    Representation, RepresentationKind,
};
use tdlab_core::harness::{certify_equivalence, closed_form_checks, EquivalencePair, EQUIVALENCE_TOLERANCE};
use tdlab_core::oracle::theorem1_ratio;
use tdlab_core::{FeatureVector, SplitMix64, Trajectory, Transition, WeightVector};

use crate::Suite;

/// Machine-readable line printed after each check.
#[derive(Serialize)]
struct Summary<'a> {
    check: &'a str,
    passed: bool,
    trials: usize,
    failures: usize,
    worst: f64,
    tolerance: f64,
}

fn report(check: &str, trials: usize, failures: usize, worst: f64, tolerance: f64) -> bool {
    let passed = failures == 0;
    let summary = Summary { check, passed, trials, failures, worst, tolerance };
    println!("{}", serde_json::to_string(&summary).expect("summary serializes"));
    passed
}

pub fn run(suite: Suite, trials: usize, seed: u64) -> Result<bool> {
    let mut ok = true;
    if matches!(suite, Suite::Equivalence | Suite::All) {
        ok &= equivalence(trials, seed)?;
    }
    if matches!(suite, Suite::Theorem1 | Suite::All) {
        ok &= theorem1(seed)?;
    }
    if matches!(suite, Suite::ClosedForms | Suite::All) {
        ok &= closed_forms()?;
    }
    if matches!(suite, Suite::Propositions | Suite::All) {
        ok &= propositions(seed)?;
    }
    Ok(ok)
}

fn max_norm_sq(rep: &Representation) -> f64 {
    rep.table().iter().map(FeatureVector::norm_squared).fold(0.0, f64::max)
}

const PAIRS: [EquivalencePair; 5] = [
    EquivalencePair::TrueOnlineVsOracle,
    EquivalencePair::SarsaVsOracle,
    EquivalencePair::WatkinsVsTruncatedOracle,
    EquivalencePair::AlphaTConstantVsTrueOnline,
    EquivalencePair::TabularVsOneHotTrueOnline,
];

/// One random trial: the pair cycles with the trial index; α is drawn so
/// that `α‖φ‖² ≤ 1` for the sampled representation.
fn equivalence_trial(i: usize, rng: &mut SplitMix64) -> Result<(EquivalencePair, f64, f64, f64)> {
    let pair = PAIRS[i % PAIRS.len()];
    let env_seed = rng.next_u64();
    let lambda = rng.next_f64();
    let kind = match pair {
        EquivalencePair::TabularVsOneHotTrueOnline => RepresentationKind::Tabular,
        _ => [RepresentationKind::Tabular, RepresentationKind::Binary, RepresentationKind::RandomNormalized][rng.below(3)],
    };
    let scale = 0.01 + 0.99 * rng.next_f64();
    let (traj, alpha) = if pair.needs_actions() {
        let mdp = generate_mdp(6, 3, 3, 0.2, 0.95, env_seed)?;
        let rep = build_mdp_representation(kind, &mdp, env_seed)?;
        let alpha = scale / max_norm_sq(&rep);
        let variant = match pair {
            EquivalencePair::SarsaVsOracle => ControlVariant::TrueOnlineSarsa,
            _ => ControlVariant::TrueOnlineWatkins,
        };
        let mut l = ControlLearner::new(variant, rep.dim(), 3, alpha, lambda, 0.95, 0.2)?;
        (run_control_episode(&mut l, &mdp, &rep, 100, rng)?.0, alpha)
    } else {
        let mrp = if rng.below(2) == 0 {
            generate_mrp(10, 3, 0.1, 0.99, env_seed)?
        } else {
            canonical_task(CanonicalTask::RandomWalk10)?.0
        };
        let rep = build_representation(kind, &mrp, env_seed)?;
        (sample_trajectory(&mrp, &rep, 100, rng).or_else(|_| sample_trajectory(&mrp, &rep, 100_000, rng))?, scale / max_norm_sq(&rep))
    };
    let dim = traj.feature_dim().unwrap_or(0) * if pair.needs_actions() { traj.num_actions } else { 1 };
    let r = certify_equivalence(&traj, alpha, lambda, &WeightVector::zeros(dim), pair)?;
    Ok((pair, alpha, lambda, r.max_rel_diff))
}

fn equivalence(trials: usize, seed: u64) -> Result<bool> {
    let mut rng = SplitMix64::new(seed);
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    for i in 0..trials {
        let (pair, alpha, lambda, diff) = equivalence_trial(i, &mut rng)?;
        if !(diff <= EQUIVALENCE_TOLERANCE) {
            failures += 1;
            println!("equivalence trial {i}: {pair} α={alpha:.4} λ={lambda:.4} differs by {diff:e}");
        }
        worst = if diff.is_nan() { f64::NAN } else { worst.max(diff) };
    }
    println!(
        "equivalence: {}/{trials} pass at {EQUIVALENCE_TOLERANCE:e} (worst {worst:.2e})",
        trials - failures
    );
    Ok(report("equivalence", trials, failures, worst, EQUIVALENCE_TOLERANCE))
}

fn theorem1(seed: u64) -> Result<bool> {
    let (mrp, rep) = canonical_task(CanonicalTask::RandomWalk10)?;
    let mut rng = SplitMix64::new(seed);
    let traj = loop {
        let t = sample_trajectory(&mrp, &rep, 100_000, &mut rng)?;
        if t.len() >= 20 {
            break t;
        }
    };
    let init = WeightVector::zeros(rep.dim());
    let alphas = [1e-1, 1e-2, 1e-3, 1e-4];
    println!("theorem1: random-walk-10, λ = 0.9, episode of {} steps", traj.len());
    println!("{:>10}  {:>12}  {:>10}", "alpha", "ratio", "step");
    let mut ratios = Vec::new();
    for &a in &alphas {
        let r = theorem1_ratio(&traj, a, 0.9, &init)?;
        let step = ratios.last().map_or(String::new(), |p: &f64| format!("{:.4}", r / p));
        println!("{a:>10.0e}  {r:>12.4e}  {step:>10}");
        ratios.push(r);
    }
    let failures = ratios.windows(2).filter(|w| !(w[1] < w[0])).count();
    let last = *ratios.last().expect("four ratios");
    Ok(report("theorem1", alphas.len(), failures, last, 0.0))
}

fn closed_forms() -> Result<bool> {
    let checks = closed_form_checks(&[-1.0, 0.0, 0.3, 0.5, 2.0], &[0.01, 0.05, 0.1, 0.3, 0.5], &[1, 2, 5, 10, 20])?;
    let tol = 1e-12;
    let worst = checks.iter().map(|c| c.accumulate_error.max(c.true_online_error)).fold(0.0, f64::max);
    let failures = checks.iter().filter(|c| !(c.accumulate_error <= tol && c.true_online_error <= tol)).count();
    println!("closed-forms: {}/{} one-state grid points within {tol:e} (worst {worst:.2e})", checks.len() - failures, checks.len());
    Ok(report("closed-forms", checks.len(), failures, worst, tol))
}

fn histories_agree(traj: &Trajectory, alpha: f64, lambda: f64) -> Result<f64> {
    let dim = traj.feature_dim().unwrap_or(0);
    let run = |v: PredictionVariant| -> Result<Vec<WeightVector>> {
        let mut l = PredictionLearner::new(v, dim, alpha, lambda, traj.gamma())?;
        Ok(replay_prediction(&mut l, std::slice::from_ref(traj))?)
    };
    let base = run(PredictionVariant::Accumulate)?;
    let mut worst: f64 = 0.0;
    for v in PredictionVariant::ALL {
        for (a, b) in base.iter().zip(&run(v)?) {
            worst = worst.max(a.relative_diff(b));
        }
    }
    Ok(worst)
}

fn propositions(seed: u64) -> Result<bool> {
    let tol = 1e-12;
    let mut rng = SplitMix64::new(seed);
    let (mut trials, mut failures, mut worst) = (0, 0, 0.0f64);
    for _ in 0..20 {
        let env_seed = rng.next_u64();
        let mrp = generate_mrp(10, 3, 0.1, 0.99, env_seed)?;
        let rep = build_representation(RepresentationKind::Tabular, &mrp, env_seed)?;
        let traj = sample_trajectory(&mrp, &rep, 200, &mut rng)?;
        let d = histories_agree(&traj, 0.05 + rng.next_f64(), 0.0)?;
        trials += 1;
        failures += usize::from(!(d <= tol));
        worst = worst.max(d);
    }
    for _ in 0..20 {
        let len = 5 + rng.below(20);
        let order = rng.sample_distinct(len, len);
        let steps = (0..len)
            .map(|t| {
                let phi = FeatureVector::one_hot(len, order[t]);
                if t + 1 == len {
                    Transition::terminal(phi, rng.normal(), 0.9)
                } else {
                    Transition::new(phi, rng.normal(), FeatureVector::one_hot(len, order[t + 1]), 0.9)
                }
            })
            .collect();
        let traj = Trajectory::prediction(steps)?;
        let d = histories_agree(&traj, 0.05 + 0.9 * rng.next_f64(), rng.next_f64())?;
        trials += 1;
        failures += usize::from(!(d <= tol));
        worst = worst.max(d);
    }
    println!("propositions: {}/{trials} λ=0 and no-revisit sequences identical across variants (worst {worst:.2e})", trials - failures);
    Ok(report("propositions", trials, failures, worst, tol))
}
