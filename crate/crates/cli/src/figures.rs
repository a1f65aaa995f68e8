use anyhow::{bail, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write;

use tdlab_core::envs::{CanonicalTask, RepresentationKind};
use tdlab_core::harness::{
    asymptotic_rms, best_per_lambda, format_float, one_state_average_rms, standard_alpha_grid, standard_lambda_grid,
    random_walk_curves, run_sweep, ConvergenceRule, EnvSpec, SweepConfig, Weighting,
};
use tdlab_core::PredictionVariant;

use crate::manifest::Manifest;

pub const FIGURE_MANIFEST: &str = "figure-manifest";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FigureSpec {
    pub figure: u8,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
}

impl FigureSpec {
    /// Fills in per-figure defaults; figures that take no runs or steps
    /// drop them.
    pub fn resolve(figure: u8, runs: Option<usize>, steps: Option<usize>, seed: u64) -> Result<Self> {
        let (runs, steps) = match figure {
            1 | 3 => (None, None),
            2 => (Some(runs.unwrap_or(100)), None),
            4 => (Some(runs.unwrap_or(50)), Some(steps.unwrap_or(100))),
            other => bail!("unknown figure {other}; expected 1, 2, 3 or 4"),
        };
        if runs == Some(0) || steps == Some(0) {
            bail!("runs and steps must be at least 1");
        }
        Ok(FigureSpec { figure, seed, runs, steps })
    }
}

/// CSV text for `spec`, starting with its manifest line.
pub fn render(spec: &FigureSpec) -> Result<String> {
    let mut out = format!("# {}\n", Manifest::new(spec.clone()).preamble(FIGURE_MANIFEST)?);
    match spec.figure {
        1 => fig1(spec, &mut out)?,
        2 => fig2(spec, &mut out)?,
        3 => fig3(&mut out)?,
        4 => fig4(spec, &mut out)?,
        other => bail!("unknown figure {other}"),
    }
    Ok(out)
}

fn fig1(spec: &FigureSpec, out: &mut String) -> Result<()> {
    let c = random_walk_curves(3, 0.2, 1.0, spec.seed)?;
    out.push_str("step,episode,offline,online,accumulate\n");
    for t in 0..c.episode.len() {
        writeln!(
            out,
            "{t},{},{},{},{}",
            c.episode[t],
            format_float(c.offline[t]),
            format_float(c.online[t]),
            format_float(c.accumulate[t])
        )?;
    }
    Ok(())
}

fn fig2(spec: &FigureSpec, out: &mut String) -> Result<()> {
    let runs = spec.runs.unwrap_or(100);
    let alphas: Vec<f64> = (1..=20).map(|j| j as f64 / 20.0).collect();
    let rows = alphas
        .par_iter()
        .map(|&a| {
            Ok((
                a,
                one_state_average_rms(PredictionVariant::Accumulate, a, 10, runs, spec.seed)?,
                one_state_average_rms(PredictionVariant::TrueOnline, a, 10, runs, spec.seed)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    out.push_str("alpha,accumulate,true_online\n");
    for (a, acc, to) in rows {
        writeln!(out, "{},{},{}", format_float(a), format_float(acc), format_float(to))?;
    }
    Ok(())
}

fn fig3(out: &mut String) -> Result<()> {
    let rule = ConvergenceRule::default();
    let variants = [PredictionVariant::Accumulate, PredictionVariant::Replace, PredictionVariant::TrueOnline];
    let lambdas = standard_lambda_grid();
    let cells: Vec<(PredictionVariant, f64)> =
        variants.iter().flat_map(|&v| lambdas.iter().map(move |&l| (v, l))).collect();
    let rows = cells
        .par_iter()
        .map(|&(v, l)| Ok((v, l, asymptotic_rms(CanonicalTask::TwoState, v, 0.01, l, rule, 0)?)))
        .collect::<Result<Vec<_>>>()?;
    out.push_str("variant,lambda,rms,steps,converged\n");
    for (v, l, a) in rows {
        writeln!(out, "{v},{},{},{},{}", format_float(l), format_float(a.rms), a.steps, a.converged)?;
    }
    Ok(())
}

fn fig4(spec: &FigureSpec, out: &mut String) -> Result<()> {
    use PredictionVariant::{Accumulate, Replace, TrueOnline};
    out.push_str("representation,variant,lambda,alpha,metric_mean,metric_se\n");
    for (kind, variants) in [
        (RepresentationKind::Tabular, vec![Accumulate, Replace, TrueOnline]),
        (RepresentationKind::Binary, vec![Accumulate, Replace, TrueOnline]),
        (RepresentationKind::RandomNormalized, vec![Accumulate, TrueOnline]),
    ] {
        let config = SweepConfig {
            env: EnvSpec::Random { k: 10, b: 3, sigma: 0.1, gamma: 0.99 },
            representation: kind,
            variants,
            alphas: standard_alpha_grid(),
            lambdas: standard_lambda_grid(),
            steps: spec.steps.unwrap_or(100),
            runs: spec.runs.unwrap_or(50),
            master_seed: spec.seed,
            weighting: Weighting::DPi,
        };
        for p in best_per_lambda(&run_sweep(&config)?) {
            match p.best {
                Some(b) => writeln!(
                    out,
                    "{kind},{},{},{},{},{}",
                    p.variant,
                    format_float(p.lambda),
                    format_float(b.alpha),
                    format_float(b.metric_mean),
                    format_float(b.metric_se)
                )?,
                None => writeln!(out, "{kind},{},{},,,", p.variant, format_float(p.lambda))?,
            }
        }
    }
    Ok(())
}
