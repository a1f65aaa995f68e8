use anyhow::{bail, Context, Result};
use std::path::Path;

use tdlab_core::envs::{CanonicalTask, Mrp};
use tdlab_core::harness::EnvSpec;

/// Discount used for `mrp(k,b,sigma)` tasks when `--gamma` is absent.
pub const DEFAULT_GAMMA: f64 = 0.99;

/// Parses `mrp(k,b,sigma)` or a canonical task name.
pub fn parse_task(text: &str, gamma: f64) -> Result<EnvSpec> {
    let t = text.trim();
    if let Some(inner) = t.strip_prefix("mrp(").and_then(|r| r.strip_suffix(')')) {
        let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            bail!("expected mrp(k,b,sigma), got `{text}`");
        }
        let k = parts[0].parse().with_context(|| format!("bad k in `{text}`"))?;
        let b = parts[1].parse().with_context(|| format!("bad b in `{text}`"))?;
        let sigma = parts[2].parse().with_context(|| format!("bad sigma in `{text}`"))?;
        return Ok(EnvSpec::Random { k, b, sigma, gamma });
    }
    let task: CanonicalTask = t.parse()?;
    Ok(EnvSpec::Canonical { task })
}

pub fn load_env_file(path: &Path) -> Result<EnvSpec> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mrp = Mrp::from_text(&text).with_context(|| format!("cannot load {}", path.display()))?;
    Ok(EnvSpec::Fixed { mrp: Box::new(mrp) })
}

/// Number of states a sweep's environment has, when known up front.
pub fn env_size(env: &EnvSpec) -> Option<usize> {
    match env {
        EnvSpec::Random { k, .. } => Some(*k),
        EnvSpec::Fixed { mrp } => Some(mrp.num_states()),
        EnvSpec::Canonical { .. } => None,
    }
}
