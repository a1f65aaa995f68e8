//! The small hand-built tasks: a ten-state random walk and the one- and
//! two-state examples used to contrast trace types.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::envs::mrp::{InitialState, Mrp};
use crate::envs::representation::{build_representation, Representation, RepresentationKind};
use crate::error::{Result, TdError};

/// Probability that the one-state task stays in its state for another step.
pub const ONE_STATE_CONTINUE_PROB: f64 = 0.9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CanonicalTask {
    RandomWalk10,
    OneState,
    TwoState,
}

impl CanonicalTask {
    pub fn name(self) -> &'static str {
        match self {
            CanonicalTask::RandomWalk10 => "random-walk-10",
            CanonicalTask::OneState => "one-state",
            CanonicalTask::TwoState => "two-state",
        }
    }
}

impl fmt::Display for CanonicalTask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CanonicalTask {
    type Err = TdError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random-walk-10" => Ok(CanonicalTask::RandomWalk10),
            "one-state" => Ok(CanonicalTask::OneState),
            "two-state" => Ok(CanonicalTask::TwoState),
            other => Err(TdError::UnknownTask(other.to_string())),
        }
    }
}

pub fn canonical_task(task: CanonicalTask) -> Result<(Mrp, Representation)> {
    match task {
        CanonicalTask::RandomWalk10 => random_walk_10(),
        CanonicalTask::OneState => one_state(),
        CanonicalTask::TwoState => two_state(),
    }
}

/// States 0..=9 left to right, state 10 terminal (left of state 0).
/// 70% left, 30% right; the rightmost state stays put on a right move.
/// Every reward is 1, γ = 1, episodes start in state 9.
fn random_walk_10() -> Result<(Mrp, Representation)> {
    const N: usize = 10;
    const TERMINAL: usize = N;
    let mut p = vec![vec![0.0; N + 1]; N + 1];
    let mut r = vec![vec![0.0; N + 1]; N + 1];
    for s in 0..N {
        let left = if s == 0 { TERMINAL } else { s - 1 };
        let right = if s == N - 1 { s } else { s + 1 };
        p[s][left] += 0.7;
        p[s][right] += 0.3;
        r[s][left] = 1.0;
        r[s][right] = 1.0;
    }
    p[TERMINAL][TERMINAL] = 1.0;
    let mrp = Mrp::new(p, r, 0.0, 1.0, vec![TERMINAL], InitialState::Fixed(N - 1))?;
    let rep = build_representation(RepresentationKind::Tabular, &mrp, 0)?;
    Ok((mrp, rep))
}

/// State 0 loops on itself with reward 0, or exits to terminal state 1 with
/// reward 1, so every episode returns exactly 1.
fn one_state() -> Result<(Mrp, Representation)> {
    let q = ONE_STATE_CONTINUE_PROB;
    let mrp = Mrp::new(
        vec![vec![q, 1.0 - q], vec![0.0, 1.0]],
        vec![vec![0.0, 1.0], vec![0.0, 0.0]],
        0.0,
        1.0,
        vec![1],
        InitialState::Fixed(0),
    )?;
    let rep = build_representation(RepresentationKind::Tabular, &mrp, 0)?;
    Ok((mrp, rep))
}

/// Left state 0 → right state 1 (reward 2) → terminal 2 (reward 0), one
/// feature that is 1 in both live states. True values (2, 0).
fn two_state() -> Result<(Mrp, Representation)> {
    let mrp = Mrp::new(
        vec![vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0], vec![0.0, 0.0, 1.0]],
        vec![vec![0.0, 2.0, 0.0], vec![0.0, 0.0, 0.0], vec![0.0, 0.0, 0.0]],
        0.0,
        1.0,
        vec![2],
        InitialState::Fixed(0),
    )?;
    let rep = build_representation(RepresentationKind::Constant, &mrp, 0)?;
    Ok((mrp, rep))
}
