//! Fixtures shared by the benchmarks.

use tdlab_core::algos::sample_steps;
use tdlab_core::envs::{build_representation, generate_mrp, RepresentationKind};
use tdlab_core::{FeatureVector, SplitMix64, Trajectory, Transition};

/// `steps` transitions of a random `(k, 3, 0.1)` MRP under `kind` features.
pub fn mrp_trajectory(k: usize, kind: RepresentationKind, steps: usize, seed: u64) -> Trajectory {
    let mrp = generate_mrp(k, 3.min(k), 0.1, 0.99, seed).expect("valid generator arguments");
    let rep = build_representation(kind, &mrp, seed).expect("representation builds");
    let mut episodes = sample_steps(&mrp, &rep, steps, &mut SplitMix64::new(seed)).expect("sampling succeeds");
    episodes.pop().expect("one continuing segment")
}

/// A cycle of `len` transitions over dense random features of size `n`.
pub fn dense_cycle(n: usize, len: usize, seed: u64) -> Vec<Transition> {
    let mut rng = SplitMix64::new(seed);
    let phis: Vec<FeatureVector> =
        (0..len).map(|_| FeatureVector::dense((0..n).map(|_| rng.normal() / (n as f64).sqrt()).collect())).collect();
    (0..len).map(|i| Transition::new(phis[i].clone(), rng.normal(), phis[(i + 1) % len].clone(), 0.99)).collect()
}
