//! Versioned text envelope for environment and configuration files.
//!
//! Every file is a JSON object:
//!
//! ```json
//! { "format": "tdlab", "version": 1, "kind": "mrp", "data": { ... } }
//! ```
//!
//! `kind` names the payload (`mrp`, `mdp`, or a configuration kind defined by
//! the caller) and `data` holds it. Floats are written in shortest round-trip
//! form, so reading a file back reproduces the values exactly.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::envs::mrp::{Mdp, Mrp};
use crate::error::{Result, TdError};

pub const FORMAT_NAME: &str = "tdlab";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub format: String,
    pub version: u32,
    pub kind: String,
    pub data: T,
}

impl<T: Serialize + DeserializeOwned> Envelope<T> {
    pub fn wrap(kind: &str, data: T) -> Self {
        Envelope { format: FORMAT_NAME.into(), version: FORMAT_VERSION, kind: kind.into(), data }
    }

    pub fn to_text(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn parse(text: &str, expected_kind: &str) -> Result<T> {
        let header: Envelope<serde_json::Value> = serde_json::from_str(text)?;
        if header.format != FORMAT_NAME {
            return Err(TdError::Format(format!("unexpected format `{}`", header.format)));
        }
        if header.version != FORMAT_VERSION {
            return Err(TdError::Format(format!("unsupported version {}", header.version)));
        }
        if header.kind != expected_kind {
            return Err(TdError::Format(format!("expected kind `{expected_kind}`, found `{}`", header.kind)));
        }
        Ok(serde_json::from_value(header.data)?)
    }
}

/// Peeks at the `kind` field of an envelope.
pub fn envelope_kind(text: &str) -> Result<String> {
    let header: Envelope<serde_json::Value> = serde_json::from_str(text)?;
    Ok(header.kind)
}

impl Mrp {
    pub fn to_text(&self) -> Result<String> {
        Envelope::wrap("mrp", self.clone()).to_text()
    }

    pub fn from_text(text: &str) -> Result<Mrp> {
        let mrp: Mrp = Envelope::parse(text, "mrp")?;
        mrp.validate()?;
        Ok(mrp)
    }
}

impl Mdp {
    pub fn to_text(&self) -> Result<String> {
        Envelope::wrap("mdp", self.clone()).to_text()
    }

    pub fn from_text(text: &str) -> Result<Mdp> {
        let mdp: Mdp = Envelope::parse(text, "mdp")?;
        mdp.validate()?;
        Ok(mdp)
    }
}
