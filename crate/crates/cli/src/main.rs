use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use tdlab_core::envs::{generate_mrp, RepresentationKind};
use tdlab_core::harness::{standard_alpha_grid, standard_lambda_grid, run_sweep, SweepConfig, Weighting};
use tdlab_core::PredictionVariant;

mod figures;
mod manifest;
mod task;
mod verify;

use manifest::{sha256_hex, Manifest};

pub const SEED_ENV: &str = "TDLAB_SEED";

#[derive(Parser)]
#[command(name = "tdlab", version, about = "TD(λ) learners, forward-view oracles and reproducible sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random MRP and write it as a versioned environment file.
    GenMrp(GenMrpArgs),
    /// Run an (α, λ) sweep and emit the CSV table.
    Sweep(SweepArgs),
    /// Run the built-in correctness checks.
    Verify(VerifyArgs),
    /// Emit the data behind one of the learning-curve figures as CSV.
    Figures(FigureArgs),
}

#[derive(Args)]
struct GenMrpArgs {
    #[arg(long)]
    k: usize,
    #[arg(long)]
    b: usize,
    #[arg(long)]
    sigma: f64,
    #[arg(long, default_value_t = task::DEFAULT_GAMMA)]
    gamma: f64,
    /// Overridden by TDLAB_SEED when set.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// `mrp(k,b,sigma)`, `random-walk-10`, `one-state` or `two-state`.
    #[arg(long, conflicts_with = "env")]
    task: Option<String>,
    /// Environment file written by `gen-mrp`.
    #[arg(long)]
    env: Option<PathBuf>,
    /// Manifest to replay: a manifest file or a CSV produced by `sweep`.
    /// Explicit flags take precedence over its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "repr")]
    representation: Option<RepresentationKind>,
    #[arg(long, value_delimiter = ',')]
    variants: Option<Vec<PredictionVariant>>,
    #[arg(long, value_delimiter = ',', conflicts_with = "paper_grid")]
    alphas: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', conflicts_with = "paper_grid")]
    lambdas: Option<Vec<f64>>,
    /// Use the standard 30-point α grid and 20-point λ grid.
    #[arg(long)]
    paper_grid: bool,
    #[arg(long)]
    runs: Option<usize>,
    /// Steps per run; defaults to 10·k for random MRPs and 100 otherwise.
    #[arg(long)]
    steps: Option<usize>,
    /// Discount for `mrp(...)` tasks.
    #[arg(long)]
    gamma: Option<f64>,
    /// Overridden by TDLAB_SEED when set.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    weighting: Option<Weighting>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Equivalence,
    Theorem1,
    ClosedForms,
    Propositions,
    All,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Suite::All)]
    suite: Suite,
    /// Randomized trials for the equivalence suite.
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Overridden by TDLAB_SEED when set.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct FigureArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
    figure: Option<u8>,
    /// Manifest to replay: a manifest file or a CSV produced by `figures`.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Runs averaged for figures 2 and 4.
    #[arg(long)]
    runs: Option<usize>,
    /// Steps per run for figure 4.
    #[arg(long)]
    steps: Option<usize>,
    /// Overridden by TDLAB_SEED when set.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// `TDLAB_SEED` wins over `--seed`.
pub fn resolve_seed(flag: Option<u64>) -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| anyhow!("{SEED_ENV} must be an unsigned integer, got `{v}`")),
        Err(std::env::VarError::NotPresent) => Ok(flag),
        Err(e) => Err(anyhow!("{SEED_ENV}: {e}")),
    }
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display())),
        None => {
            std::io::stdout().lock().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn gen_mrp(args: GenMrpArgs) -> Result<bool> {
    let seed = resolve_seed(args.seed)?.unwrap_or(0);
    let mrp = generate_mrp(args.k, args.b, args.sigma, args.gamma, seed)?;
    let text = mrp.to_text()?;
    write_output(args.out.as_deref(), &text)?;
    let summary = format!(
        "k={} b={} sigma={} gamma={} seed={seed} sha256={}",
        args.k,
        args.b,
        args.sigma,
        args.gamma,
        sha256_hex(text.as_bytes())
    );
    if args.out.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct SweepManifest {
    sweep: SweepConfig,
}

const SWEEP_MANIFEST: &str = "sweep-manifest";

fn sweep_config(args: &SweepArgs) -> Result<SweepConfig> {
    let base = match &args.config {
        Some(path) => Some(Manifest::<SweepManifest>::load(path, SWEEP_MANIFEST)?.body.sweep),
        None => None,
    };
    let gamma = args.gamma.unwrap_or(task::DEFAULT_GAMMA);
    let env = match (&args.task, &args.env, &base) {
        (Some(t), _, _) => task::parse_task(t, gamma)?,
        (None, Some(path), _) => task::load_env_file(path)?,
        (None, None, Some(b)) => b.env.clone(),
        (None, None, None) => return Err(anyhow!("missing environment: pass --task, --env or --config")),
    };
    let representation = args
        .representation
        .or(base.as_ref().map(|b| b.representation))
        .unwrap_or(RepresentationKind::Tabular);
    let variants = match (&args.variants, &base) {
        (Some(v), _) => v.clone(),
        (None, Some(b)) => b.variants.clone(),
        (None, None) if representation.is_binary() => {
            vec![PredictionVariant::Accumulate, PredictionVariant::Replace, PredictionVariant::TrueOnline]
        }
        (None, None) => vec![PredictionVariant::Accumulate, PredictionVariant::TrueOnline],
    };
    let (alphas, lambdas) = if args.paper_grid {
        (standard_alpha_grid(), standard_lambda_grid())
    } else {
        (
            args.alphas.clone().or(base.as_ref().map(|b| b.alphas.clone())).unwrap_or_else(standard_alpha_grid),
            args.lambdas.clone().or(base.as_ref().map(|b| b.lambdas.clone())).unwrap_or_else(standard_lambda_grid),
        )
    };
    let default_steps = task::env_size(&env).map_or(100, |k| 10 * k);
    let config = SweepConfig {
        steps: args.steps.or(base.as_ref().map(|b| b.steps)).unwrap_or(default_steps),
        runs: args.runs.or(base.as_ref().map(|b| b.runs)).unwrap_or(50),
        master_seed: resolve_seed(args.seed)?.or(base.as_ref().map(|b| b.master_seed)).unwrap_or(0),
        weighting: args.weighting.or(base.as_ref().map(|b| b.weighting)).unwrap_or_default(),
        env,
        representation,
        variants,
        alphas,
        lambdas,
    };
    config.validate()?;
    Ok(config)
}

fn sweep(args: SweepArgs) -> Result<bool> {
    let config = sweep_config(&args)?;
    let manifest = Manifest::new(SweepManifest { sweep: config.clone() });
    let result = run_sweep(&config)?;
    let text = result.to_csv_string(&[manifest.preamble(SWEEP_MANIFEST)?])?;
    write_output(args.out.as_deref(), &text)?;
    let diverged: usize = result.cells.iter().map(|c| c.diverged).sum();
    eprintln!("{} rows, {diverged} diverged runs, sha256={}", result.cells.len(), sha256_hex(text.as_bytes()));
    Ok(true)
}

fn figures(args: FigureArgs) -> Result<bool> {
    let base = match &args.config {
        Some(path) => Some(Manifest::<figures::FigureSpec>::load(path, figures::FIGURE_MANIFEST)?.body),
        None => None,
    };
    let figure = args
        .figure
        .or(base.as_ref().map(|b| b.figure))
        .ok_or_else(|| anyhow!("missing figure: pass --figure or --config"))?;
    let spec = figures::FigureSpec::resolve(
        figure,
        args.runs.or(base.as_ref().and_then(|b| b.runs)),
        args.steps.or(base.as_ref().and_then(|b| b.steps)),
        resolve_seed(args.seed)?.or(base.as_ref().map(|b| b.seed)).unwrap_or(0),
    )?;
    let text = figures::render(&spec)?;
    write_output(args.out.as_deref(), &text)?;
    eprintln!("figure {} sha256={}", spec.figure, sha256_hex(text.as_bytes()));
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::GenMrp(a) => gen_mrp(a),
        Command::Sweep(a) => sweep(a),
        Command::Verify(a) => resolve_seed(a.seed).and_then(|seed| verify::run(a.suite, a.trials, seed.unwrap_or(0))),
        Command::Figures(a) => figures(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
