use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

use crate::algos::{sample_steps, PredictionLearner, PredictionVariant};
use crate::envs::{build_representation, canonical_task, generate_mrp, CanonicalTask, Mrp, Representation, RepresentationKind};
use crate::error::{Result, TdError};
use crate::features::WeightVector;
use crate::harness::metric::MseEvaluator;
use crate::oracle::Weighting;
use crate::rng::{mix64, SplitMix64};
use crate::trajectory::Trajectory;

/// Weights beyond this magnitude (or non-finite) mark a run as diverged.
pub const DIVERGENCE_THRESHOLD: f64 = 1e100;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum EnvSpec {
    /// A fresh random MRP per run, seeded from the run's stream.
    Random { k: usize, b: usize, sigma: f64, gamma: f64 },
    Canonical { task: CanonicalTask },
    /// The same chain for every run.
    Fixed { mrp: Box<Mrp> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub env: EnvSpec,
    pub representation: RepresentationKind,
    pub variants: Vec<PredictionVariant>,
    pub alphas: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub steps: usize,
    pub runs: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub weighting: Weighting,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(TdError::InvalidConfig(m.to_string()));
        if self.variants.is_empty() || self.alphas.is_empty() || self.lambdas.is_empty() {
            return bad("variants, alpha grid and lambda grid must be non-empty");
        }
        if self.runs == 0 || self.steps == 0 {
            return bad("runs and steps must be at least 1");
        }
        if self.alphas.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
            return bad("step sizes must be finite and non-negative");
        }
        if self.lambdas.iter().any(|l| !(0.0..=1.0).contains(l)) {
            return bad("trace decays must lie in [0, 1]");
        }
        if self.variants.contains(&PredictionVariant::Replace) && !self.representation.is_binary() {
            return bad("replacing traces need binary features; drop `replace` for this representation");
        }
        if self.variants.contains(&PredictionVariant::TabularTrueOnline) && self.representation != RepresentationKind::Tabular {
            return bad("the tabular learner needs the tabular representation");
        }
        if let EnvSpec::Random { k, b, .. } = self.env {
            if b == 0 || b > k {
                return Err(TdError::InvalidConfig(format!("branching factor exceeds states (b = {b} > k = {k})")));
            }
        }
        Ok(())
    }

    fn sorted_grids(&self) -> (Vec<f64>, Vec<f64>) {
        let mut a = self.alphas.clone();
        let mut l = self.lambdas.clone();
        a.sort_by(f64::total_cmp);
        a.dedup();
        l.sort_by(f64::total_cmp);
        l.dedup();
        (a, l)
    }

    pub fn num_cells(&self) -> usize {
        let (a, l) = self.sorted_grids();
        a.len() * l.len()
    }
}

/// Seed of grid cell `cell_index` (`λ index · #α + α index` over the sorted
/// grids): `mix64(master_seed ^ cell_index)`.
pub fn cell_seed(master_seed: u64, cell_index: usize) -> u64 {
    mix64(master_seed ^ cell_index as u64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub variant: PredictionVariant,
    pub alpha: f64,
    pub lambda: f64,
    /// Mean over the runs that did not diverge (NaN when none completed).
    pub metric_mean: f64,
    /// Standard error of that mean over runs (0 for a single run).
    pub metric_se: f64,
    pub runs: usize,
    pub diverged: usize,
    /// Raw per-run metric, including diverged runs.
    pub run_metrics: Vec<f64>,
    pub run_diverged: Vec<bool>,
}

impl CellResult {
    pub fn completed(&self) -> usize {
        self.runs - self.diverged
    }

    /// A cell where more than half the runs diverged.
    pub fn mostly_diverged(&self) -> bool {
        2 * self.diverged > self.runs
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub config: SweepConfig,
    /// Variant-major (in config order), then λ ascending, then α ascending.
    pub cells: Vec<CellResult>,
}

/// Everything a run shares between variants.
struct RunContext {
    rep: Representation,
    gamma: f64,
    episodes: Vec<Trajectory>,
    evaluator: MseEvaluator,
}

fn build_run(config: &SweepConfig, rng: &mut SplitMix64) -> Result<RunContext> {
    let env_seed = rng.next_u64();
    let rep_seed = rng.next_u64();
    let mrp = match &config.env {
        EnvSpec::Random { k, b, sigma, gamma } => generate_mrp(*k, *b, *sigma, *gamma, env_seed)?,
        EnvSpec::Canonical { task } => canonical_task(*task)?.0,
        EnvSpec::Fixed { mrp } => (**mrp).clone(),
    };
    let rep = build_representation(config.representation, &mrp, rep_seed)?;
    let episodes = sample_steps(&mrp, &rep, config.steps, rng)?;
    let evaluator = MseEvaluator::new(&mrp, &rep, config.weighting, &WeightVector::zeros(rep.dim()))?;
    Ok(RunContext { gamma: mrp.gamma(), rep, episodes, evaluator })
}

fn is_diverged(theta: &WeightVector) -> bool {
    theta.as_slice().iter().any(|x| !x.is_finite() || x.abs() > DIVERGENCE_THRESHOLD)
}

/// Runs one learner over a run's steps. Returns the normalized MSE and
/// whether the weights diverged.
fn evaluate_run(ctx: &RunContext, variant: PredictionVariant, alpha: f64, lambda: f64) -> Result<(f64, bool)> {
    let mut learner = PredictionLearner::new(variant, ctx.rep.dim(), alpha, lambda, ctx.gamma)?;
    let mut total = 0.0;
    let mut steps = 0usize;
    let mut diverged = false;
    for ep in &ctx.episodes {
        learner.begin_episode();
        for tr in &ep.steps {
            learner.step(tr)?;
            diverged |= is_diverged(learner.theta());
            total += ctx.evaluator.error(learner.theta());
            steps += 1;
        }
    }
    Ok((total / steps as f64 / ctx.evaluator.initial_error(), diverged))
}

fn aggregate(variant: PredictionVariant, alpha: f64, lambda: f64, runs: Vec<(f64, bool)>) -> CellResult {
    let done: Vec<f64> = runs.iter().filter(|r| !r.1).map(|r| r.0).collect();
    let n = done.len();
    let mean = if n == 0 { f64::NAN } else { done.iter().sum::<f64>() / n as f64 };
    let se = if n < 2 {
        if n == 1 { 0.0 } else { f64::NAN }
    } else {
        let var = done.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        (var / n as f64).sqrt()
    };
    CellResult {
        variant,
        alpha,
        lambda,
        metric_mean: mean,
        metric_se: se,
        runs: runs.len(),
        diverged: runs.iter().filter(|r| r.1).count(),
        run_metrics: runs.iter().map(|r| r.0).collect(),
        run_diverged: runs.iter().map(|r| r.1).collect(),
    }
}

/// Runs every (variant, α, λ) cell. Cells execute in parallel; each run
/// draws its environment, features and trajectory from the cell's seed,
/// and all variants of a cell see the same runs.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepResult> {
    config.validate()?;
    let (alphas, lambdas) = config.sorted_grids();
    let n_alpha = alphas.len();
    let per_cell: Vec<Vec<CellResult>> = (0..alphas.len() * lambdas.len())
        .into_par_iter()
        .map(|cell| {
            let (li, ai) = (cell / n_alpha, cell % n_alpha);
            let (alpha, lambda) = (alphas[ai], lambdas[li]);
            let mut rng = SplitMix64::new(cell_seed(config.master_seed, cell));
            let contexts = (0..config.runs)
                .map(|_| build_run(config, &mut rng.split()))
                .collect::<Result<Vec<_>>>()?;
            config
                .variants
                .iter()
                .map(|&variant| {
                    let runs = contexts
                        .iter()
                        .map(|ctx| evaluate_run(ctx, variant, alpha, lambda))
                        .collect::<Result<Vec<_>>>()?;
                    Ok(aggregate(variant, alpha, lambda, runs))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut cells = Vec::with_capacity(per_cell.len() * config.variants.len());
    for vi in 0..config.variants.len() {
        cells.extend(per_cell.iter().map(|c| c[vi].clone()));
    }
    Ok(SweepResult { config: config.clone(), cells })
}

pub const CSV_HEADER: [&str; 7] = ["variant", "alpha", "lambda", "metric_mean", "metric_se", "runs", "diverged"];

/// Formats a float with 17 significant digits.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

impl SweepResult {
    /// Writes the CSV table, preceded by `preamble` lines (each prefixed
    /// with `# `).
    pub fn write_csv<W: Write>(&self, mut out: W, preamble: &[String]) -> Result<()> {
        for line in preamble {
            writeln!(out, "# {line}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        for c in &self.cells {
            w.write_record([
                c.variant.name().to_string(),
                format_float(c.alpha),
                format_float(c.lambda),
                format_float(c.metric_mean),
                format_float(c.metric_se),
                c.runs.to_string(),
                c.diverged.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self, preamble: &[String]) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf, preamble)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    pub fn cell(&self, variant: PredictionVariant, alpha: f64, lambda: f64) -> Option<&CellResult> {
        self.cells.iter().find(|c| c.variant == variant && c.alpha == alpha && c.lambda == lambda)
    }
}

/// Best step size for one (variant, λ) pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BestPoint {
    pub variant: PredictionVariant,
    pub lambda: f64,
    /// `None` when every α cell for this λ is ineligible.
    pub best: Option<BestCell>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BestCell {
    pub alpha: f64,
    pub metric_mean: f64,
    pub metric_se: f64,
}

/// For every (variant, λ), the α with the lowest mean metric. Cells where
/// more than half the runs diverged are skipped, NaN counts as +∞, and ties
/// go to the smaller α.
pub fn best_per_lambda(result: &SweepResult) -> Vec<BestPoint> {
    let mut out: Vec<BestPoint> = Vec::new();
    for c in &result.cells {
        let idx = match out.iter().position(|p| p.variant == c.variant && p.lambda == c.lambda) {
            Some(i) => i,
            None => {
                out.push(BestPoint { variant: c.variant, lambda: c.lambda, best: None });
                out.len() - 1
            }
        };
        if c.mostly_diverged() {
            continue;
        }
        let key = |m: f64| if m.is_nan() { f64::INFINITY } else { m };
        let candidate = BestCell { alpha: c.alpha, metric_mean: c.metric_mean, metric_se: c.metric_se };
        let slot = &mut out[idx].best;
        let better = match slot {
            None => true,
            Some(b) => key(c.metric_mean) < key(b.metric_mean) || (key(c.metric_mean) == key(b.metric_mean) && c.alpha < b.alpha),
        };
        if better {
            *slot = Some(candidate);
        }
    }
    out
}

/// Best cell over the whole (α, λ) grid for `variant`, by the same rules as
/// [`best_per_lambda`].
pub fn best_overall(result: &SweepResult, variant: PredictionVariant) -> Option<(f64, BestCell)> {
    let key = |m: f64| if m.is_nan() { f64::INFINITY } else { m };
    best_per_lambda(result)
        .into_iter()
        .filter(|p| p.variant == variant)
        .filter_map(|p| p.best.map(|b| (p.lambda, b)))
        .fold(None, |acc: Option<(f64, BestCell)>, (l, b)| match acc {
            Some((_, a)) if key(a.metric_mean) <= key(b.metric_mean) => acc,
            _ => Some((l, b)),
        })
}
