//! Feature and weight vectors.
//!
//! A [`FeatureVector`] is either dense or sparse (sorted, unique indices).
//! Both storages expose the same observations: the sparse dot product visits
//! the nonzero entries in ascending index order, which is the order the dense
//! dot product adds them in, so the two agree bit for bit.

use serde::{Deserialize, Serialize};
use std::ops::{Index, IndexMut};

use crate::error::{check_dim, Result, TdError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum FeatureVector {
    Dense(Vec<f64>),
    Sparse { dim: usize, indices: Vec<usize>, values: Vec<f64> },
}

impl FeatureVector {
    pub fn dense(values: Vec<f64>) -> Self {
        FeatureVector::Dense(values)
    }

    /// Builds a sparse vector; entries are sorted and duplicate indices summed.
    pub fn sparse(dim: usize, entries: impl IntoIterator<Item = (usize, f64)>) -> Result<Self> {
        let mut entries: Vec<(usize, f64)> = entries.into_iter().collect();
        entries.sort_by_key(|&(i, _)| i);
        let mut indices: Vec<usize> = Vec::with_capacity(entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(entries.len());
        for (i, v) in entries {
            if i >= dim {
                return Err(TdError::DimensionMismatch { expected: dim, actual: i + 1 });
            }
            if indices.last() == Some(&i) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(i);
                values.push(v);
            }
        }
        Ok(FeatureVector::Sparse { dim, indices, values })
    }

    pub fn zeros(dim: usize) -> Self {
        FeatureVector::Dense(vec![0.0; dim])
    }

    /// The `i`-th standard basis vector of length `dim`.
    pub fn one_hot(dim: usize, i: usize) -> Self {
        let mut v = vec![0.0; dim];
        v[i] = 1.0;
        FeatureVector::Dense(v)
    }

    pub fn dim(&self) -> usize {
        match self {
            FeatureVector::Dense(v) => v.len(),
            FeatureVector::Sparse { dim, .. } => *dim,
        }
    }

    pub fn get(&self, i: usize) -> f64 {
        match self {
            FeatureVector::Dense(v) => v[i],
            FeatureVector::Sparse { indices, values, .. } => match indices.binary_search(&i) {
                Ok(pos) => values[pos],
                Err(_) => 0.0,
            },
        }
    }

    /// Calls `f(i, value)` for every stored entry in ascending index order.
    /// Dense storage reports every entry, including zeros.
    #[inline]
    pub fn for_each(&self, mut f: impl FnMut(usize, f64)) {
        match self {
            FeatureVector::Dense(v) => v.iter().enumerate().for_each(|(i, &x)| f(i, x)),
            FeatureVector::Sparse { indices, values, .. } => {
                indices.iter().zip(values).for_each(|(&i, &x)| f(i, x))
            }
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.for_each(|i, x| out[i] = x);
        out
    }

    pub fn to_sparse(&self) -> FeatureVector {
        let dim = self.dim();
        let mut indices = Vec::new();
        let mut values = Vec::new();
        self.for_each(|i, x| {
            if x != 0.0 {
                indices.push(i);
                values.push(x);
            }
        });
        FeatureVector::Sparse { dim, indices, values }
    }

    pub fn is_zero(&self) -> bool {
        let mut zero = true;
        self.for_each(|_, x| zero &= x == 0.0);
        zero
    }

    /// First entry that is neither 0 nor 1, if any.
    pub fn first_non_binary(&self) -> Option<(usize, f64)> {
        let mut bad = None;
        self.for_each(|i, x| {
            if bad.is_none() && x != 0.0 && x != 1.0 {
                bad = Some((i, x));
            }
        });
        bad
    }

    pub fn norm_squared(&self) -> f64 {
        let mut s = 0.0;
        self.for_each(|_, x| s += x * x);
        s
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    /// Index of the single unit entry of a one-hot vector.
    pub fn one_hot_index(&self) -> Option<usize> {
        let mut found = None;
        let mut ok = true;
        self.for_each(|i, x| {
            if x == 1.0 {
                ok &= found.is_none();
                found = Some(i);
            } else if x != 0.0 {
                ok = false;
            }
        });
        if ok {
            found
        } else {
            None
        }
    }

    /// `self · other`, both feature vectors.
    pub fn dot_features(&self, other: &FeatureVector) -> Result<f64> {
        check_dim(self.dim(), other.dim())?;
        let dense = other.to_dense();
        let mut s = 0.0;
        self.for_each(|i, x| s += x * dense[i]);
        Ok(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn zeros(n: usize) -> Self {
        WeightVector(vec![0.0; n])
    }

    pub fn from_vec(v: Vec<f64>) -> Self {
        WeightVector(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// `θᵀφ` without the dimension check; callers validate once per step.
    #[inline]
    pub(crate) fn dot_unchecked(&self, phi: &FeatureVector) -> f64 {
        let mut s = 0.0;
        phi.for_each(|i, x| s += self.0[i] * x);
        s
    }

    pub fn dot(&self, phi: &FeatureVector) -> Result<f64> {
        check_dim(self.len(), phi.dim())?;
        Ok(self.dot_unchecked(phi))
    }

    pub fn dot_weights(&self, other: &WeightVector) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    /// `self += scale · φ`
    #[inline]
    pub(crate) fn add_scaled_features(&mut self, scale: f64, phi: &FeatureVector) {
        phi.for_each(|i, x| self.0[i] += scale * x);
    }

    /// `self += scale · other`
    #[inline]
    pub(crate) fn add_scaled(&mut self, scale: f64, other: &WeightVector) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += scale * b;
        }
    }

    pub(crate) fn scale(&mut self, factor: f64) {
        self.0.iter_mut().for_each(|a| *a *= factor);
    }

    pub(crate) fn fill_zero(&mut self) {
        self.0.iter_mut().for_each(|a| *a = 0.0);
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, x| if x.abs() > m || x.is_nan() { x.abs() } else { m })
    }

    pub fn is_all_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0.0)
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn sub(&self, other: &WeightVector) -> WeightVector {
        WeightVector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    /// `‖self − other‖∞ / (1 + ‖other‖∞)`
    pub fn relative_diff(&self, other: &WeightVector) -> f64 {
        self.sub(other).max_abs() / (1.0 + other.max_abs())
    }
}

impl Index<usize> for WeightVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for WeightVector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

/// Linear value estimate `Σᵢ w[i]·φ[i]`.
pub fn dot(w: &WeightVector, phi: &FeatureVector) -> Result<f64> {
    w.dot(phi)
}

/// Action-feature vector ψ(s, a): `num_actions` blocks of `φ.dim()` features,
/// block `action` holding φ and every other block zero.
pub fn stack_action_features(phi: &FeatureVector, action: usize, num_actions: usize) -> Result<FeatureVector> {
    if action >= num_actions {
        return Err(TdError::ActionOutOfRange { action, num_actions });
    }
    let n = phi.dim();
    let offset = action * n;
    Ok(match phi {
        FeatureVector::Dense(v) => {
            let mut out = vec![0.0; n * num_actions];
            out[offset..offset + n].copy_from_slice(v);
            FeatureVector::Dense(out)
        }
        FeatureVector::Sparse { indices, values, .. } => FeatureVector::Sparse {
            dim: n * num_actions,
            indices: indices.iter().map(|i| i + offset).collect(),
            values: values.clone(),
        },
    })
}
