//! Hashed tile coding.
//!
//! Each signal is normalized to `[0, 1]` (clipped) and scaled to
//! `u = x · bins · num_tilings`. Tiling `i` is shifted by `i / num_tilings`
//! of a bin, so its coordinate along a signal is
//! `floor((floor(u) + i) / num_tilings)`. The coordinates of a tiling are
//! folded into one hash with [`mix64`]:
//!
//! ```text
//! h = mix64(i + 1)
//! h = mix64(h ^ (coord_j as u64).wrapping_mul(0x9E3779B97F4A7C15))   for each signal j
//! ```
//!
//! The hash space is split into `num_tilings` equal blocks and tiling `i`
//! lands in block `i` at offset `h mod block`, so the tilings never collide
//! with each other and every encoding has exactly `num_tilings` active
//! features (plus the bias unit, stored last, when enabled).

use serde::{Deserialize, Serialize};

use crate::error::{Result, TdError};
use crate::features::FeatureVector;
use crate::rng::mix64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TileCoderConfig {
    pub num_tilings: usize,
    pub bins_per_signal: usize,
    pub signal_ranges: Vec<(f64, f64)>,
    pub hash_size: usize,
    pub bias_unit: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TileCoder {
    config: TileCoderConfig,
    block: usize,
}

impl TileCoder {
    pub fn new(config: TileCoderConfig) -> Result<Self> {
        if config.num_tilings == 0 || config.bins_per_signal == 0 {
            return Err(TdError::InvalidConfig("tile coding needs at least one tiling and one bin".into()));
        }
        if config.hash_size < config.num_tilings {
            return Err(TdError::InvalidConfig(format!(
                "hash size {} is smaller than the number of tilings {}",
                config.hash_size, config.num_tilings
            )));
        }
        if config.signal_ranges.iter().any(|&(lo, hi)| !(hi > lo)) {
            return Err(TdError::InvalidConfig("every signal range needs hi > lo".into()));
        }
        let block = config.hash_size / config.num_tilings;
        Ok(TileCoder { config, block })
    }

    pub fn config(&self) -> &TileCoderConfig {
        &self.config
    }

    pub fn dim(&self) -> usize {
        self.config.hash_size + usize::from(self.config.bias_unit)
    }

    pub fn active_count(&self) -> usize {
        self.config.num_tilings + usize::from(self.config.bias_unit)
    }

    pub fn encode(&self, signals: &[f64]) -> Result<FeatureVector> {
        let cfg = &self.config;
        if signals.len() != cfg.signal_ranges.len() {
            return Err(TdError::DimensionMismatch { expected: cfg.signal_ranges.len(), actual: signals.len() });
        }
        let tilings = cfg.num_tilings as i64;
        let scaled: Vec<i64> = signals
            .iter()
            .zip(&cfg.signal_ranges)
            .map(|(&s, &(lo, hi))| {
                let x = if s.is_nan() { 0.0 } else { ((s - lo) / (hi - lo)).clamp(0.0, 1.0) };
                (x * (cfg.bins_per_signal as f64) * (cfg.num_tilings as f64)).floor() as i64
            })
            .collect();
        let mut entries = Vec::with_capacity(self.active_count());
        for i in 0..cfg.num_tilings {
            let mut h = mix64(i as u64 + 1);
            for &u in &scaled {
                let coord = (u + i as i64).div_euclid(tilings);
                h = mix64(h ^ (coord as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            }
            entries.push((i * self.block + (h % self.block as u64) as usize, 1.0));
        }
        if cfg.bias_unit {
            entries.push((cfg.hash_size, 1.0));
        }
        FeatureVector::sparse(self.dim(), entries)
    }
}

/// Encodes `signals` with a coder built from `config`.
pub fn tile_code(signals: &[f64], config: &TileCoderConfig) -> Result<FeatureVector> {
    TileCoder::new(config.clone())?.encode(signals)
}
