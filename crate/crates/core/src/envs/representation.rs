use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::envs::mrp::{Mdp, Mrp};
use crate::error::{Result, TdError};
use crate::features::FeatureVector;
use crate::rng::SplitMix64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RepresentationKind {
    /// One standard basis vector per non-terminal state.
    Tabular,
    /// Binary code of the (1-based) state index, most significant bit first.
    Binary,
    /// Five standard-normal features per state, scaled to unit length.
    RandomNormalized,
    /// A single feature that is 1 in every non-terminal state.
    Constant,
    /// Hashed tile coding of continuous signals; see [`crate::envs::TileCoder`].
    TileCoding,
}

impl RepresentationKind {
    pub fn name(self) -> &'static str {
        match self {
            RepresentationKind::Tabular => "tabular",
            RepresentationKind::Binary => "binary",
            RepresentationKind::RandomNormalized => "random-normalized",
            RepresentationKind::Constant => "constant",
            RepresentationKind::TileCoding => "tile-coding",
        }
    }

    pub fn is_binary(self) -> bool {
        !matches!(self, RepresentationKind::RandomNormalized)
    }
}

impl fmt::Display for RepresentationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RepresentationKind {
    type Err = TdError;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "tabular" => RepresentationKind::Tabular,
            "binary" => RepresentationKind::Binary,
            "random-normalized" | "normalized" => RepresentationKind::RandomNormalized,
            "constant" => RepresentationKind::Constant,
            "tile-coding" => RepresentationKind::TileCoding,
            other => return Err(TdError::InvalidConfig(format!("unknown representation `{other}`"))),
        })
    }
}

pub const RANDOM_NORMALIZED_DIM: usize = 5;

/// Per-state feature table. Terminal states map to the zero vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Representation {
    kind: RepresentationKind,
    dim: usize,
    table: Vec<FeatureVector>,
}

impl Representation {
    pub fn kind(&self) -> RepresentationKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn phi(&self, state: usize) -> &FeatureVector {
        &self.table[state]
    }

    pub fn table(&self) -> &[FeatureVector] {
        &self.table
    }

    pub fn num_states(&self) -> usize {
        self.table.len()
    }
}

/// Number of bits needed for the codes `1..=k`.
pub fn binary_code_length(k: usize) -> usize {
    // ⌈log₂(k + 1)⌉, computed exactly
    (usize::BITS - k.leading_zeros()) as usize
}

/// Builds the feature table for `mrp`. `seed` only matters for the
/// random-normalized kind.
pub fn build_representation(kind: RepresentationKind, mrp: &Mrp, seed: u64) -> Result<Representation> {
    build_table(kind, mrp.num_states(), &mrp.non_terminal_states(), seed)
}

/// State features for an MDP; action features are formed from these with
/// [`crate::features::stack_action_features`].
pub fn build_mdp_representation(kind: RepresentationKind, mdp: &Mdp, seed: u64) -> Result<Representation> {
    build_table(kind, mdp.num_states(), &mdp.non_terminal_states(), seed)
}

fn build_table(kind: RepresentationKind, num_states: usize, live: &[usize], seed: u64) -> Result<Representation> {
    let k = live.len();
    let mut rank = vec![None; num_states];
    for (i, &s) in live.iter().enumerate() {
        rank[s] = Some(i);
    }
    let dim = match kind {
        RepresentationKind::Tabular => k,
        RepresentationKind::Binary => binary_code_length(k),
        RepresentationKind::RandomNormalized => RANDOM_NORMALIZED_DIM,
        RepresentationKind::Constant => 1,
        RepresentationKind::TileCoding => {
            return Err(TdError::InvalidConfig(
                "tile coding encodes continuous signals and does not apply to discrete MRPs".into(),
            ))
        }
    };
    let mut rng = SplitMix64::new(seed);
    let table = rank
        .iter()
        .map(|r| match r {
            None => FeatureVector::zeros(dim),
            Some(i) => match kind {
                RepresentationKind::Tabular => FeatureVector::one_hot(dim, *i),
                RepresentationKind::Binary => {
                    let code = i + 1;
                    FeatureVector::dense((0..dim).map(|bit| ((code >> (dim - 1 - bit)) & 1) as f64).collect())
                }
                RepresentationKind::RandomNormalized => {
                    let raw: Vec<f64> = (0..dim).map(|_| rng.normal()).collect();
                    let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
                    FeatureVector::dense(raw.into_iter().map(|x| x / norm).collect())
                }
                RepresentationKind::Constant => FeatureVector::dense(vec![1.0]),
                RepresentationKind::TileCoding => unreachable!(),
            },
        })
        .collect();
    Ok(Representation { kind, dim, table })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::generate_mrp;

    #[test]
    fn binary_codes_follow_one_based_index() {
        let mrp = generate_mrp(10, 3, 0.1, 0.99, 1).unwrap();
        let rep = build_representation(RepresentationKind::Binary, &mrp, 0).unwrap();
        assert_eq!(rep.dim(), 4);
        // states 1, 2, 3 in 1-based numbering
        assert_eq!(rep.phi(0).to_dense(), vec![0.0, 0.0, 0.0, 1.0]);
        assert_eq!(rep.phi(1).to_dense(), vec![0.0, 0.0, 1.0, 0.0]);
        assert_eq!(rep.phi(2).to_dense(), vec![0.0, 0.0, 1.0, 1.0]);
        assert_eq!(rep.phi(9).to_dense(), vec![1.0, 0.0, 1.0, 0.0]);
        assert!(rep.table().iter().all(|phi| !phi.is_zero()));
    }

    #[test]
    fn binary_length() {
        assert_eq!(binary_code_length(10), 4);
        assert_eq!(binary_code_length(100), 7);
        assert_eq!(binary_code_length(1), 1);
        assert_eq!(binary_code_length(7), 3);
        assert_eq!(binary_code_length(8), 4);
    }

    #[test]
    fn random_normalized_has_unit_rows() {
        let mrp = generate_mrp(10, 3, 0.1, 0.99, 1).unwrap();
        let rep = build_representation(RepresentationKind::RandomNormalized, &mrp, 99).unwrap();
        assert_eq!(rep.dim(), 5);
        for phi in rep.table() {
            assert!((phi.norm() - 1.0).abs() <= 1e-12);
        }
        assert_eq!(rep, build_representation(RepresentationKind::RandomNormalized, &mrp, 99).unwrap());
        assert_ne!(rep, build_representation(RepresentationKind::RandomNormalized, &mrp, 98).unwrap());
    }

    #[test]
    fn tabular_is_identity() {
        let mrp = generate_mrp(6, 2, 0.1, 0.99, 4).unwrap();
        let rep = build_representation(RepresentationKind::Tabular, &mrp, 0).unwrap();
        for s in 0..6 {
            assert_eq!(rep.phi(s).one_hot_index(), Some(s));
        }
    }

    #[test]
    fn tile_coding_rejected_for_mrps() {
        let mrp = generate_mrp(6, 2, 0.1, 0.99, 4).unwrap();
        assert!(build_representation(RepresentationKind::TileCoding, &mrp, 0).is_err());
    }
}
