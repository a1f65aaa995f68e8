//! Manifests record everything needed to regenerate an artifact. They are
//! embedded as the first line of every CSV (`# manifest: {...}`) and can be
//! fed back through `--config`.

use anyhow::{anyhow, Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::Path;

use tdlab_core::envs::{envelope_kind, Envelope};

pub const TOOL: &str = "tdlab";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const PREFIX: &str = "manifest: ";

#[derive(Clone, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct Manifest<T> {
    pub tool: String,
    pub tool_version: String,
    #[serde(flatten)]
    pub body: T,
}

impl<T: Serialize + DeserializeOwned> Manifest<T> {
    pub fn new(body: T) -> Self {
        Manifest { tool: TOOL.into(), tool_version: TOOL_VERSION.into(), body }
    }

    /// The single preamble line (without the `# ` comment marker).
    pub fn preamble(&self, kind: &str) -> Result<String>
    where
        T: Clone,
    {
        let env = Envelope::wrap(kind, self.clone());
        Ok(format!("{PREFIX}{}", serde_json::to_string(&env)?))
    }

    /// Reads a manifest from an envelope file or from the first line of a
    /// CSV artifact.
    pub fn load(path: &Path, kind: &str) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        let body = match text.lines().next().and_then(|l| l.strip_prefix("# ")).and_then(|l| l.strip_prefix(PREFIX)) {
            Some(json) => json.to_string(),
            None => text,
        };
        let found = envelope_kind(&body).with_context(|| format!("{} holds no manifest", path.display()))?;
        if found != kind {
            return Err(anyhow!("{} holds a `{found}` manifest, expected `{kind}`", path.display()));
        }
        Ok(Envelope::parse(&body, kind)?)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
