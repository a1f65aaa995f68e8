//! Environments: random MRPs/MDPs, the canonical small tasks, feature
//! representations, and the linear-algebra helpers that give their ground
//! truth.

mod canonical;
mod mrp;
mod representation;
mod serial;
mod solve;
mod tiles;

pub use canonical::{canonical_task, CanonicalTask, ONE_STATE_CONTINUE_PROB};
pub use mrp::{generate_mdp, generate_mrp, GeneratorParams, InitialState, Mdp, Mrp};
pub use representation::{
    binary_code_length, build_mdp_representation, build_representation, Representation, RepresentationKind, RANDOM_NORMALIZED_DIM,
};
pub use serial::{envelope_kind, Envelope, FORMAT_NAME, FORMAT_VERSION};
pub use solve::{stationary_distribution, true_values};
pub use tiles::{tile_code, TileCoder, TileCoderConfig};
