use nalgebra::{DMatrix, DVector};

use crate::envs::mrp::Mrp;
use crate::error::{Result, TdError};

const STATIONARY_TOL: f64 = 1e-12;
const STATIONARY_MAX_ITERS: usize = 1_000_000;

/// Solves the Bellman system `(I − γP)v = r̄`, with `v = 0` pinned on
/// terminal states.
pub fn true_values(mrp: &Mrp) -> Result<Vec<f64>> {
    let k = mrp.num_states();
    let gamma = mrp.gamma();
    let rbar = mrp.expected_rewards();
    let mut a = DMatrix::<f64>::zeros(k, k);
    let mut rhs = DVector::<f64>::zeros(k);
    for s in 0..k {
        if mrp.is_terminal(s) {
            a[(s, s)] = 1.0;
            continue;
        }
        for (j, &p) in mrp.transitions()[s].iter().enumerate() {
            a[(s, j)] -= gamma * p;
        }
        a[(s, s)] += 1.0;
        rhs[s] = rbar[s];
    }
    let v = a
        .clone()
        .lu()
        .solve(&rhs)
        .ok_or_else(|| TdError::SingularSystem("(I - γP) is not invertible; is the chain proper?".into()))?;
    if v.iter().any(|x| !x.is_finite()) {
        return Err(TdError::SingularSystem("value solve produced non-finite entries".into()));
    }
    Ok(v.iter().copied().collect())
}

/// Stationary distribution `dᵀP = dᵀ` by power iteration on the lazy chain
/// `(I + P)/2`, which shares its fixed points with `P` and is aperiodic.
pub fn stationary_distribution(mrp: &Mrp) -> Result<Vec<f64>> {
    let k = mrp.num_states();
    let p = mrp.transitions();
    let mut d = vec![1.0 / k as f64; k];
    let mut next = vec![0.0; k];
    let mut residual = f64::INFINITY;
    for _ in 0..STATIONARY_MAX_ITERS {
        next.iter_mut().for_each(|x| *x = 0.0);
        for (s, row) in p.iter().enumerate() {
            let ds = d[s];
            if ds == 0.0 {
                continue;
            }
            for (j, &pj) in row.iter().enumerate() {
                next[j] += ds * pj;
            }
        }
        residual = next.iter().zip(&d).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if residual <= STATIONARY_TOL {
            let total: f64 = d.iter().sum();
            return Ok(d.into_iter().map(|x| x / total).collect());
        }
        for (x, n) in d.iter_mut().zip(&next) {
            *x = 0.5 * (*x + n);
        }
    }
    Err(TdError::NoConvergence { iterations: STATIONARY_MAX_ITERS, residual })
}
