use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::envs::{stationary_distribution, true_values, InitialState, Mrp, Representation};
use crate::error::{check_dim, Result, TdError};
use crate::features::WeightVector;

/// State weighting for value errors.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Weighting {
    /// On-policy distribution: the stationary distribution of a continuing
    /// chain, or the normalized expected visit counts of an episodic one.
    #[default]
    DPi,
    /// Equal weight on every non-terminal state.
    Uniform,
}

impl fmt::Display for Weighting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Weighting::DPi => "d-pi",
            Weighting::Uniform => "uniform",
        })
    }
}

impl FromStr for Weighting {
    type Err = TdError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "d-pi" | "dpi" | "stationary" => Ok(Weighting::DPi),
            "uniform" => Ok(Weighting::Uniform),
            other => Err(TdError::InvalidConfig(format!("unknown weighting `{other}`"))),
        }
    }
}

/// Per-state weights summing to 1, zero on terminal states.
pub fn state_weights(mrp: &Mrp, weighting: Weighting) -> Result<Vec<f64>> {
    let k = mrp.num_states();
    let live = mrp.non_terminal_states();
    if live.is_empty() {
        return Err(TdError::Degenerate("the chain has no non-terminal states".into()));
    }
    match weighting {
        Weighting::Uniform => {
            let mut w = vec![0.0; k];
            for &s in &live {
                w[s] = 1.0 / live.len() as f64;
            }
            Ok(w)
        }
        Weighting::DPi if !mrp.is_episodic() => stationary_distribution(mrp),
        Weighting::DPi => episodic_visit_distribution(mrp, &live),
    }
}

/// Solves `η = h + ηP` over the non-terminal states and normalizes.
fn episodic_visit_distribution(mrp: &Mrp, live: &[usize]) -> Result<Vec<f64>> {
    let m = live.len();
    let p = mrp.transitions();
    let mut a = DMatrix::<f64>::identity(m, m);
    for (i, &s) in live.iter().enumerate() {
        for (j, &sp) in live.iter().enumerate() {
            // transposed system: (I − P_nnᵀ) η = h
            a[(j, i)] -= p[s][sp];
        }
    }
    let mut h = DVector::<f64>::zeros(m);
    match *mrp.initial_state() {
        InitialState::Fixed(s0) => {
            let i = live.iter().position(|&s| s == s0).ok_or(TdError::TerminalState(s0))?;
            h[i] = 1.0;
        }
        InitialState::Uniform => h.fill(1.0 / m as f64),
    }
    let eta = a
        .lu()
        .solve(&h)
        .ok_or_else(|| TdError::SingularSystem("episodes do not terminate with probability 1".into()))?;
    let total: f64 = eta.iter().sum();
    let mut w = vec![0.0; mrp.num_states()];
    for (i, &s) in live.iter().enumerate() {
        w[s] = eta[i] / total;
    }
    Ok(w)
}

/// Weighted least-squares fit of the true values:
/// `θ* = argmin Σ_s w(s)(v(s) − θᵀφ(s))²`, with the minimized error.
///
/// Solves the normal equations by Cholesky and falls back to an SVD
/// pseudo-inverse when they are rank deficient.
pub fn lms_solution(mrp: &Mrp, rep: &Representation, weighting: Weighting) -> Result<(WeightVector, f64)> {
    check_dim(mrp.num_states(), rep.num_states())?;
    let w = state_weights(mrp, weighting)?;
    let v = true_values(mrp)?;
    lms_with(&w, &v, rep)
}

/// [`lms_solution`] for explicit weights and target values.
pub fn lms_with(w: &[f64], v: &[f64], rep: &Representation) -> Result<(WeightVector, f64)> {
    let n = rep.dim();
    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut b = DVector::<f64>::zeros(n);
    for (s, phi) in rep.table().iter().enumerate() {
        if w[s] == 0.0 {
            continue;
        }
        let dense = phi.to_dense();
        for i in 0..n {
            if dense[i] == 0.0 {
                continue;
            }
            b[i] += w[s] * v[s] * dense[i];
            for j in 0..n {
                a[(i, j)] += w[s] * dense[i] * dense[j];
            }
        }
    }
    let theta = match a.clone().cholesky() {
        Some(c) => c.solve(&b),
        None => {
            let pinv = a.svd(true, true).pseudo_inverse(1e-12).map_err(|e| TdError::SingularSystem(e.to_string()))?;
            pinv * b
        }
    };
    let theta = WeightVector::from_vec(theta.iter().copied().collect());
    let mse = rep
        .table()
        .iter()
        .enumerate()
        .map(|(s, phi)| w[s] * (v[s] - theta.dot_unchecked(phi)).powi(2))
        .sum();
    Ok((theta, mse))
}
