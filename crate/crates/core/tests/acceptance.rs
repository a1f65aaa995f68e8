//! Acceptance suite. Each criterion prints one `PASS`/`FAIL` line; the
//! process exits non-zero if any criterion fails.

use std::time::{Duration, Instant};

use tdlab_core::algos::{
    replay_control, replay_prediction, run_control_episode, sample_steps, sample_trajectory, ControlLearner,
    ControlVariant, PredictionLearner, PredictionVariant,
};
use tdlab_core::envs::{
    build_mdp_representation, build_representation, canonical_task, generate_mdp, generate_mrp, CanonicalTask,
    RepresentationKind,
};
use tdlab_core::harness::{
    asymptotic_rms, best_overall, best_per_lambda, certify_equivalence, closed_form_checks, standard_alpha_grid,
    standard_lambda_grid, run_sweep, ConvergenceRule, EnvSpec, EquivalencePair, SweepConfig, SweepResult, Weighting,
};
use tdlab_core::oracle::{lms_solution, online_lambda_return_episodes, concat_histories, prop2_condition_holds, theorem1_ratio};
use tdlab_core::{FeatureVector, SplitMix64, Trajectory, Transition, WeightVector};

type Outcome = Result<String, String>;

fn max_rel(a: &[WeightVector], b: &[WeightVector]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.relative_diff(y)).fold(0.0, |m, d| if d.is_nan() { f64::NAN } else { m.max(d) })
}

fn within_budget(start: Instant, budget: Duration) -> Result<(), String> {
    let took = start.elapsed();
    if took > budget {
        return Err(format!("took {took:.1?}, budget {budget:?}"));
    }
    Ok(())
}

fn exactness() -> Outcome {
    let start = Instant::now();
    let alphas = [0.01, 0.1, 0.5, 1.0, 2.0];
    let lambdas = [0.0, 0.3, 0.7, 0.9, 0.95, 1.0];
    let kinds = [RepresentationKind::Tabular, RepresentationKind::Binary, RepresentationKind::RandomNormalized];
    let mut rng = SplitMix64::new(0xACCE_0001);
    let mut worst_finite: f64 = 0.0;
    let mut failures = Vec::new();
    for setting in 0..100 {
        let kind = kinds[rng.below(3)];
        let alpha = alphas[rng.below(alphas.len())];
        let lambda = lambdas[rng.below(lambdas.len())];
        let seed = rng.next_u64();
        let mrp = if setting % 2 == 0 {
            generate_mrp(10, 3, 0.1, 0.99, seed).unwrap()
        } else {
            canonical_task(CanonicalTask::RandomWalk10).unwrap().0
        };
        let rep = build_representation(kind, &mrp, seed).unwrap();
        let episodes = sample_steps(&mrp, &rep, 200, &mut SplitMix64::new(seed)).unwrap();
        let init = WeightVector::zeros(rep.dim());
        let mut learner = PredictionLearner::new(PredictionVariant::TrueOnline, rep.dim(), alpha, lambda, mrp.gamma()).unwrap();
        let backward = replay_prediction(&mut learner, &episodes).unwrap();
        let forward = concat_histories(&online_lambda_return_episodes(&episodes, alpha, lambda, &init).unwrap());
        let diff = max_rel(&backward, &forward);
        let finite: Vec<usize> = (0..backward.len())
            .filter(|&t| backward[t].as_slice().iter().chain(forward[t].as_slice()).all(|x| x.is_finite()))
            .collect();
        for &t in &finite {
            worst_finite = worst_finite.max(backward[t].relative_diff(&forward[t]));
        }
        if !(diff <= 1e-8) {
            let peak = finite.iter().map(|&t| backward[t].max_abs()).fold(0.0, f64::max);
            failures.push(format!(
                "#{setting} {kind} α={alpha} λ={lambda}: {diff:e} ({} of {} steps finite, peak |θ| {peak:.1e})",
                finite.len(),
                backward.len()
            ));
        }
    }
    if !failures.is_empty() {
        return Err(format!(
            "{} of 100 settings exceed 1e-8; worst difference over finite steps {worst_finite:.1e}; {}",
            failures.len(),
            failures.join("; ")
        ));
    }
    within_budget(start, Duration::from_secs(60))?;
    Ok(format!("100 settings, worst max relative difference {worst_finite:.2e}, {:.1?}", start.elapsed()))
}

fn one_state_closed_forms() -> Outcome {
    let start = Instant::now();
    let checks = closed_form_checks(&[-1.0, 0.0, 0.3, 0.5, 2.0], &[0.01, 0.05, 0.1, 0.3, 0.5], &[1, 2, 5, 10, 20]).map_err(|e| e.to_string())?;
    let worst_acc = checks.iter().map(|c| c.accumulate_error).fold(0.0, f64::max);
    let worst_to = checks.iter().map(|c| c.true_online_error).fold(0.0, f64::max);
    if checks.len() != 125 || !(worst_acc <= 1e-12 && worst_to <= 1e-12) {
        return Err(format!("worst errors: accumulate {worst_acc:e}, true online {worst_to:e}"));
    }
    within_budget(start, Duration::from_secs(10))?;
    Ok(format!("125 grid points, worst errors {worst_acc:.1e} / {worst_to:.1e}"))
}

fn two_state_asymptotes() -> Outcome {
    let start = Instant::now();
    let (mrp, rep) = canonical_task(CanonicalTask::TwoState).unwrap();
    let (_, lms_mse) = lms_solution(&mrp, &rep, Weighting::Uniform).unwrap();
    let lms_rms = lms_mse.sqrt();
    let rule = ConvergenceRule::default();
    let acc = asymptotic_rms(CanonicalTask::TwoState, PredictionVariant::Accumulate, 0.01, 1.0, rule, 0).unwrap();
    if !acc.converged || acc.rms > 1.02 * lms_rms {
        return Err(format!("accumulate TD(1) asymptote {acc:?}, LMS RMS {lms_rms}"));
    }
    let td0 = asymptotic_rms(CanonicalTask::TwoState, PredictionVariant::Accumulate, 0.01, 0.0, rule, 0).unwrap();
    let mut worst: f64 = 0.0;
    for lambda in standard_lambda_grid() {
        let r = asymptotic_rms(CanonicalTask::TwoState, PredictionVariant::Replace, 0.01, lambda, rule, 0).unwrap();
        let rel = (r.rms - td0.rms).abs() / td0.rms;
        if !r.converged || rel > 0.02 {
            return Err(format!("replace λ={lambda}: {r:?} vs TD(0) {td0:?}"));
        }
        worst = worst.max(rel);
    }
    within_budget(start, Duration::from_secs(60))?;
    Ok(format!(
        "accumulate TD(1) {:.4} (LMS {lms_rms:.4}); replace within {:.1e} of TD(0) {:.4} over 20 λ",
        acc.rms, worst, td0.rms
    ))
}

fn no_revisit_episode(len: usize, seed: u64) -> Trajectory {
    let mut rng = SplitMix64::new(seed);
    let order = rng.sample_distinct(len + 1, len + 1);
    let steps = (0..len)
        .map(|t| {
            let phi = FeatureVector::one_hot(len + 1, order[t]);
            if t + 1 == len {
                Transition::terminal(phi, rng.normal(), 0.9)
            } else {
                Transition::new(phi, rng.normal(), FeatureVector::one_hot(len + 1, order[t + 1]), 0.9)
            }
        })
        .collect();
    Trajectory::prediction(steps).unwrap()
}

fn propositions() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut compare_all = |traj: &Trajectory, alpha: f64, lambda: f64| -> Result<(), String> {
        let dim = traj.feature_dim().unwrap();
        let init = WeightVector::zeros(dim);
        let hist = |v: PredictionVariant| {
            let mut l = PredictionLearner::new(v, dim, alpha, lambda, traj.gamma()).unwrap().with_theta(init.clone()).unwrap();
            replay_prediction(&mut l, std::slice::from_ref(traj)).unwrap()
        };
        let base = hist(PredictionVariant::Accumulate);
        for v in PredictionVariant::ALL {
            let d = max_rel(&base, &hist(v));
            if !(d <= 1e-12) {
                return Err(format!("{v} at α={alpha}, λ={lambda}: {d:e}"));
            }
            worst = worst.max(d);
        }
        Ok(())
    };
    for seed in 0..20 {
        let mrp = generate_mrp(10, 3, 0.1, 0.99, seed).unwrap();
        let rep = build_representation(RepresentationKind::Tabular, &mrp, seed).unwrap();
        let traj = sample_trajectory(&mrp, &rep, 200, &mut SplitMix64::new(seed)).unwrap();
        compare_all(&traj, [0.05, 0.3, 1.0, 1.7][seed as usize % 4], 0.0)?;
    }
    for seed in 0..20 {
        let traj = no_revisit_episode(15, seed);
        assert!(prop2_condition_holds(&traj, 0.9));
        for lambda in [0.3, 0.9, 1.0] {
            compare_all(&traj, [0.05, 0.3, 0.9][seed as usize % 3], lambda)?;
        }
    }
    within_budget(start, Duration::from_secs(10))?;
    Ok(format!("λ=0 and no-revisit sequences agree across all five variants, worst {worst:.1e}"))
}

fn ratio_limit() -> Outcome {
    let start = Instant::now();
    let (mrp, rep) = canonical_task(CanonicalTask::RandomWalk10).unwrap();
    let mut rng = SplitMix64::new(0xACCE_0005);
    let traj = loop {
        let t = sample_trajectory(&mrp, &rep, 100_000, &mut rng).unwrap();
        if t.len() >= 20 {
            break t;
        }
    };
    let init = WeightVector::zeros(rep.dim());
    let ratios: Vec<f64> =
        [1e-1, 1e-2, 1e-3, 1e-4].iter().map(|&a| theorem1_ratio(&traj, a, 0.9, &init).unwrap()).collect();
    let table = ratios.iter().map(|r| format!("{r:.3e}")).collect::<Vec<_>>().join(", ");
    if !ratios.windows(2).all(|w| w[1] < w[0]) {
        return Err(format!("ratios not strictly decreasing: {table}"));
    }
    for i in 1..3 {
        let step = ratios[i + 1] / ratios[i];
        if !(0.03..=0.3).contains(&step) {
            return Err(format!("ratio step {step:.3} outside [0.03, 0.3]: {table}"));
        }
    }
    within_budget(start, Duration::from_secs(10))?;
    Ok(format!("episode of {} steps, ratios {table}", traj.len()))
}

fn variant_cross_checks() -> Outcome {
    let start = Instant::now();
    let mut worst = [0.0f64; 4];
    for seed in 0..10 {
        let mrp = generate_mrp(10, 3, 0.1, 0.99, seed).unwrap();
        let tab = build_representation(RepresentationKind::Tabular, &mrp, seed).unwrap();
        let traj = sample_trajectory(&mrp, &tab, 200, &mut SplitMix64::new(seed)).unwrap();
        let init = WeightVector::zeros(10);
        for pair in [EquivalencePair::AlphaTConstantVsTrueOnline, EquivalencePair::TabularVsOneHotTrueOnline] {
            let r = certify_equivalence(&traj, 0.4, 0.9, &init, pair).unwrap();
            let slot = if pair == EquivalencePair::AlphaTConstantVsTrueOnline { 0 } else { 1 };
            if !(r.max_rel_diff <= 1e-12) {
                return Err(format!("{pair}: {:e}", r.max_rel_diff));
            }
            worst[slot] = worst[slot].max(r.max_rel_diff);
        }

        let mdp = generate_mdp(8, 3, 3, 0.2, 0.95, seed).unwrap();
        let rep = build_mdp_representation(RepresentationKind::Binary, &mdp, seed).unwrap();
        let mut greedy = ControlLearner::new(ControlVariant::TrueOnlineWatkins, rep.dim(), 3, 0.1, 0.9, 0.95, 0.0).unwrap();
        let (gt, ghist) = run_control_episode(&mut greedy, &mdp, &rep, 150, &mut SplitMix64::new(seed)).unwrap();
        let mut sarsa = ControlLearner::new(ControlVariant::TrueOnlineSarsa, rep.dim(), 3, 0.1, 0.9, 0.95, 0.0).unwrap();
        let d = max_rel(&ghist, &replay_control(&mut sarsa, &gt).unwrap());
        if !(d <= 1e-12) {
            return Err(format!("ε=0 Watkins vs Sarsa: {d:e}"));
        }
        worst[2] = worst[2].max(d);

        let mut explore = ControlLearner::new(ControlVariant::TrueOnlineWatkins, rep.dim(), 3, 0.1, 0.9, 0.95, 0.3).unwrap();
        let (et, _) = run_control_episode(&mut explore, &mdp, &rep, 150, &mut SplitMix64::new(seed)).unwrap();
        let r = certify_equivalence(&et, 0.1, 0.9, &WeightVector::zeros(rep.dim() * 3), EquivalencePair::WatkinsVsTruncatedOracle).unwrap();
        if !r.passed {
            return Err(format!("Watkins vs truncated forward view: {:e}", r.max_rel_diff));
        }
        worst[3] = worst[3].max(r.max_rel_diff);
    }
    within_budget(start, Duration::from_secs(20))?;
    Ok(format!(
        "α_t ≡ true online {:.1e}, tabular ≡ one-hot {:.1e}, ε=0 Watkins ≡ Sarsa {:.1e}, Watkins ≡ truncated {:.1e}",
        worst[0], worst[1], worst[2], worst[3]
    ))
}

fn sweep_config(kind: RepresentationKind, variants: Vec<PredictionVariant>) -> SweepConfig {
    SweepConfig {
        env: EnvSpec::Random { k: 10, b: 3, sigma: 0.1, gamma: 0.99 },
        representation: kind,
        variants,
        alphas: standard_alpha_grid(),
        lambdas: standard_lambda_grid(),
        steps: 100,
        runs: 50,
        master_seed: 2015,
        weighting: Weighting::DPi,
    }
}

fn dominance(sweeps: &[(RepresentationKind, SweepResult)], elapsed: Duration) -> Outcome {
    let mut notes = Vec::new();
    for (kind, result) in sweeps {
        let (to_lambda, to) = best_overall(result, PredictionVariant::TrueOnline).ok_or("true online has no eligible cell")?;
        let mut comparators = vec![PredictionVariant::Accumulate];
        if kind.is_binary() {
            comparators.push(PredictionVariant::Replace);
        }
        for v in comparators {
            let (_, other) = best_overall(result, v).ok_or(format!("{v} has no eligible cell"))?;
            let bound = other.metric_mean + 2.0 * other.metric_se;
            if !(to.metric_mean <= bound) {
                return Err(format!(
                    "{kind}: true online {:.5} (α={}, λ={to_lambda}) > {v} {:.5} + 2·{:.5}",
                    to.metric_mean, to.alpha, other.metric_mean, other.metric_se
                ));
            }
        }
        if *kind == RepresentationKind::RandomNormalized {
            let at_zero = best_per_lambda(result)
                .into_iter()
                .find(|p| p.variant == PredictionVariant::TrueOnline && p.lambda == 0.0)
                .and_then(|p| p.best)
                .ok_or("no λ=0 point")?;
            if !(to.metric_mean < 0.95 * at_zero.metric_mean) {
                return Err(format!(
                    "random-normalized: best {:.5} not below 0.95 × λ=0 value {:.5}",
                    to.metric_mean, at_zero.metric_mean
                ));
            }
        }
        notes.push(format!("{kind} {:.4}@(α={},λ={to_lambda})", to.metric_mean, to.alpha));
    }
    if elapsed > Duration::from_secs(600) {
        return Err(format!("sweeps took {elapsed:.1?}"));
    }
    Ok(format!("true online best: {}; sweeps {elapsed:.1?}", notes.join(", ")))
}

fn divergence(tabular: &SweepResult) -> Outcome {
    let acc = tabular.cell(PredictionVariant::Accumulate, 2.0, 1.0).ok_or("missing accumulate (2, 1) cell")?;
    if acc.diverged == 0 {
        let peak = acc.run_metrics.iter().cloned().fold(0.0, f64::max);
        return Err(format!(
            "accumulate at α=2, λ=1: 0 of {} runs crossed |θ| > 1e100 within {} steps (largest normalized MSE {peak:.2e})",
            acc.runs, tabular.config.steps
        ));
    }
    let bad: Vec<_> = tabular
        .cells
        .iter()
        .filter(|c| c.variant == PredictionVariant::TrueOnline && c.alpha <= 1.0 && c.diverged > 0)
        .map(|c| format!("(α={}, λ={})", c.alpha, c.lambda))
        .collect();
    if !bad.is_empty() {
        return Err(format!("true online diverged at {}", bad.join(" ")));
    }
    let to_cells = tabular.cells.iter().filter(|c| c.variant == PredictionVariant::TrueOnline && c.alpha <= 1.0).count();
    Ok(format!("accumulate (2, 1): {}/{} diverged; true online 0 diverged over {to_cells} cells", acc.diverged, acc.runs))
}

fn main() {
    let mut failed = 0;
    let mut report = |n: u32, name: &str, outcome: Outcome| {
        match outcome {
            Ok(msg) => println!("PASS criterion {n} ({name}): {msg}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {n} ({name}): {msg}");
            }
        }
    };
    report(1, "exactness", exactness());
    report(2, "one-state closed forms", one_state_closed_forms());
    report(3, "two-state asymptotes", two_state_asymptotes());
    report(4, "propositions", propositions());
    report(5, "step-size ratio limit", ratio_limit());
    report(6, "variant cross-checks", variant_cross_checks());

    let start = Instant::now();
    use PredictionVariant::{Accumulate, Replace, TrueOnline};
    let sweeps: Vec<(RepresentationKind, SweepResult)> = [
        (RepresentationKind::Tabular, vec![Accumulate, Replace, TrueOnline]),
        (RepresentationKind::Binary, vec![Accumulate, Replace, TrueOnline]),
        (RepresentationKind::RandomNormalized, vec![Accumulate, TrueOnline]),
    ]
    .into_iter()
    .map(|(kind, variants)| (kind, run_sweep(&sweep_config(kind, variants)).expect("sweep runs")))
    .collect();
    report(7, "desk-scale dominance", dominance(&sweeps, start.elapsed()));
    report(8, "divergence realism", divergence(&sweeps[0].1));

    println!("acceptance: {} of 8 criteria passed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
