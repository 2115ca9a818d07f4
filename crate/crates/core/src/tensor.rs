//! Coordinate-format nonnegative tensors and the multilinear kernels the
//! solvers are built on.

use std::collections::HashSet;

use thiserror::Error;

use crate::linalg::Matrix;
use crate::scalar::{norm1, norm2, Scalar};

pub mod format;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TensorError {
    #[error("tensor order must be ≥ 2 and dimension ≥ 1 (got m = {order}, n = {dim})")]
    BadShape { order: usize, dim: usize },
    #[error("entry {index:?} has negative value {value}")]
    NegativeEntry { index: Vec<usize>, value: f64 },
    #[error("entry {index:?} has non-finite value")]
    NonFiniteEntry { index: Vec<usize> },
    #[error("index {index:?} out of range 1..={dim}")]
    IndexOutOfRange { index: Vec<usize>, dim: usize },
    #[error("duplicate index tuple {index:?}")]
    DuplicateIndexTuple { index: Vec<usize> },
    #[error("index tuple {index:?} has {got} indices, tensor order is {order}")]
    BadArity {
        index: Vec<usize>,
        order: usize,
        got: usize,
    },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("zero vector")]
    ZeroVector,
    #[error("extended ratio bounds need nonnegative inputs")]
    NegativeInput,
}

/// Nonnegative order-`m`, dimension-`n` tensor in coordinate storage.
///
/// Indices are 1-based at the API boundary and 0-based internally.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor<T> {
    order: usize,
    dim: usize,
    /// `nnz * order` zero-based indices, entry-major.
    indices: Vec<usize>,
    values: Vec<T>,
}

impl<T: Scalar> Tensor<T> {
    /// Validates and stores the listed entries; unlisted entries are zero.
    pub fn new<I>(order: usize, dim: usize, entries: I) -> Result<Self, TensorError>
    where
        I: IntoIterator<Item = (Vec<usize>, T)>,
    {
        if order < 2 || dim < 1 {
            return Err(TensorError::BadShape { order, dim });
        }
        let mut seen = HashSet::new();
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for (index, value) in entries {
            if index.len() != order {
                return Err(TensorError::BadArity {
                    got: index.len(),
                    index,
                    order,
                });
            }
            if index.iter().any(|&i| i < 1 || i > dim) {
                return Err(TensorError::IndexOutOfRange { index, dim });
            }
            if !value.is_finite() {
                return Err(TensorError::NonFiniteEntry { index });
            }
            if value < T::zero() {
                return Err(TensorError::NegativeEntry {
                    value: value.to_f64().unwrap_or(f64::NAN),
                    index,
                });
            }
            if !seen.insert(index.clone()) {
                return Err(TensorError::DuplicateIndexTuple { index });
            }
            indices.extend(index.iter().map(|i| i - 1));
            values.push(value);
        }
        Ok(Self {
            order,
            dim,
            indices,
            values,
        })
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of stored entries.
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Stored entries with 1-based index tuples.
    pub fn entries(&self) -> impl Iterator<Item = (Vec<usize>, T)> + '_ {
        self.raw_entries()
            .map(|(idx, v)| (idx.iter().map(|i| i + 1).collect(), v))
    }

    fn raw_entries(&self) -> impl Iterator<Item = (&[usize], T)> + '_ {
        self.indices
            .chunks_exact(self.order)
            .zip(self.values.iter().copied())
    }

    fn check_len(&self, x: &[T]) -> Result<(), TensorError> {
        if x.len() != self.dim {
            return Err(TensorError::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// `(A x^{m−1})_i = Σ A_{i i₂…i_m} x_{i₂}⋯x_{i_m}`.
    pub fn apply(&self, x: &[T]) -> Result<Vec<T>, TensorError> {
        self.check_len(x)?;
        let mut out = vec![T::zero(); self.dim];
        for (idx, a) in self.raw_entries() {
            let prod = idx[1..].iter().fold(a, |acc, &j| acc * x[j]);
            out[idx[0]] += prod;
        }
        Ok(out)
    }

    /// Exact Jacobian `T(x)_{ij} = ∂(A x^{m−1})_i / ∂x_j`.
    pub fn jacobian(&self, x: &[T]) -> Result<Matrix<T>, TensorError> {
        self.check_len(x)?;
        let mut t = Matrix::zeros(self.dim);
        for (idx, a) in self.raw_entries() {
            let tail = &idx[1..];
            for p in 0..tail.len() {
                let prod = tail
                    .iter()
                    .enumerate()
                    .filter(|&(q, _)| q != p)
                    .fold(a, |acc, (_, &j)| acc * x[j]);
                t[(idx[0], tail[p])] += prod;
            }
        }
        Ok(t)
    }

    /// `‖A x^{m−1} − λ x‖₁`.
    pub fn residual(&self, x: &[T], lambda: T) -> Result<T, TensorError> {
        let ax = self.apply(x)?;
        Ok(ax
            .iter()
            .zip(x)
            .map(|(&a, &xi)| (a - lambda * xi).abs())
            .sum())
    }

    /// Ratio interval `(min, max)` of `A x^{m−1} / x`.
    pub fn ratio_bounds(&self, x: &[T]) -> Result<(T, T), TensorError> {
        ratio_bounds(&self.apply(x)?, x)
    }
}

/// Current approximation `(x, λ)` with its cached residual.
#[derive(Clone, Debug, PartialEq)]
pub struct Iterate<T> {
    pub x: Vec<T>,
    pub lambda: T,
    /// `‖A x^{m−1} − λ x‖₁`.
    pub residual: T,
}

impl<T: Scalar> Iterate<T> {
    pub fn new(tensor: &Tensor<T>, x: Vec<T>, lambda: T) -> Result<Self, TensorError> {
        let residual = tensor.residual(&x, lambda)?;
        Ok(Self {
            x,
            lambda,
            residual,
        })
    }
}

/// Relative size below which a component counts as zero in [`ratio_bounds`].
pub const RATIO_ZERO_TOL: f64 = 1e-14;

/// Lower and upper bounds `min(w/v)`, `max(w/v)`.
///
/// For `v > 0` these are the plain componentwise extremes of `w_i / v_i`.
/// Otherwise, with `S₁`/`S₂` the supports of `w`/`v`, components in
/// `S₁ ∖ S₂` pull the lower bound to zero and enter the upper bound as
/// bare `w_i`.
pub fn ratio_bounds<T: Scalar>(w: &[T], v: &[T]) -> Result<(T, T), TensorError> {
    if w.len() != v.len() {
        return Err(TensorError::DimensionMismatch {
            expected: v.len(),
            got: w.len(),
        });
    }
    let v_norm = norm1(v);
    if v_norm == T::zero() || !v_norm.is_finite() {
        return Err(TensorError::ZeroVector);
    }
    let v_tol = T::lit(RATIO_ZERO_TOL) * v_norm;
    let positive = v.iter().all(|&vi| vi >= v_tol && vi > T::zero());

    if positive {
        let (lo, hi) = w
            .iter()
            .zip(v)
            .map(|(&wi, &vi)| wi / vi)
            .fold((T::infinity(), T::neg_infinity()), |(lo, hi), r| {
                (lo.min(r), hi.max(r))
            });
        return Ok((lo, hi));
    }

    if w.iter().chain(v).any(|&c| c < T::zero()) {
        return Err(TensorError::NegativeInput);
    }
    let w_tol = T::lit(RATIO_ZERO_TOL) * norm1(w);
    let mut lo = T::infinity();
    let mut hi = T::neg_infinity();
    let mut outside = false;
    for (&wi, &vi) in w.iter().zip(v) {
        if vi >= v_tol && vi > T::zero() {
            let r = wi / vi;
            lo = lo.min(r);
            hi = hi.max(r);
        } else if wi > w_tol {
            outside = true;
            hi = hi.max(wi);
        }
    }
    if outside {
        lo = T::zero();
    }
    Ok((lo, hi))
}

/// Converts a 1-norm eigenpair into the equivalent 2-norm eigenpair
/// `(x / ‖x‖₂, λ / ‖x‖₂^{m−2})`.
pub fn z1_to_z2<T: Scalar>(x: &[T], lambda: T, order: usize) -> Result<(Vec<T>, T), TensorError> {
    let nrm = norm2(x);
    if nrm == T::zero() {
        return Err(TensorError::ZeroVector);
    }
    let y = x.iter().map(|&xi| xi / nrm).collect();
    let mu = lambda / nrm.powi(order as i32 - 2);
    Ok((y, mu))
}
