//! LU factorization with partial pivoting and a 1-norm condition estimate.

use super::matrix::Matrix;
use crate::scalar::{norm1, Scalar};

/// `P A = L U` with unit lower-triangular `L`, both packed into one buffer.
#[derive(Clone, Debug)]
pub struct Lu<T> {
    n: usize,
    lu: Vec<T>,
    /// `perm[i]` is the row of `A` that ended up in row `i`.
    perm: Vec<usize>,
    parity: T,
    zero_pivot: bool,
}

impl<T: Scalar> Lu<T> {
    pub fn factor(a: &Matrix<T>) -> Self {
        let n = a.dim();
        let mut lu = a.as_slice().to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut parity = T::one();
        let mut zero_pivot = false;

        for k in 0..n {
            let (p, pmax) =
                (k..n)
                    .map(|i| (i, lu[i * n + k].abs()))
                    .fold(
                        (k, -T::one()),
                        |best, cur| if cur.1 > best.1 { cur } else { best },
                    );
            if pmax == T::zero() || !pmax.is_finite() {
                zero_pivot = true;
                continue;
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                parity = -parity;
            }
            let pivot = lu[k * n + k];
            for i in k + 1..n {
                let l = lu[i * n + k] / pivot;
                lu[i * n + k] = l;
                if l != T::zero() {
                    for j in k + 1..n {
                        let u = lu[k * n + j];
                        lu[i * n + j] -= l * u;
                    }
                }
            }
        }

        Self {
            n,
            lu,
            perm,
            parity,
            zero_pivot,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// True when elimination met an exactly zero pivot column.
    pub fn has_zero_pivot(&self) -> bool {
        self.zero_pivot
    }

    pub fn determinant(&self) -> T {
        if self.zero_pivot {
            return T::zero();
        }
        (0..self.n).fold(self.parity, |acc, i| acc * self.lu[i * self.n + i])
    }

    /// Solves `A x = b`. Meaningless if the factorization has a zero pivot.
    #[allow(clippy::needless_range_loop)]
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s / self.lu[i * n + i];
        }
        x
    }

    /// Solves `Aᵀ x = b`.
    #[allow(clippy::needless_range_loop)]
    pub fn solve_transpose(&self, b: &[T]) -> Vec<T> {
        let n = self.n;
        assert_eq!(b.len(), n);
        // Aᵀ = Uᵀ Lᵀ P
        let mut z = b.to_vec();
        for i in 0..n {
            let mut s = z[i];
            for j in 0..i {
                s -= self.lu[j * n + i] * z[j];
            }
            z[i] = s / self.lu[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = z[i];
            for j in i + 1..n {
                s -= self.lu[j * n + i] * z[j];
            }
            z[i] = s;
        }
        let mut x = vec![T::zero(); n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = z[i];
        }
        x
    }

    /// Hager/Higham estimate of `‖A⁻¹‖₁`.
    pub fn inverse_norm1_estimate(&self) -> T {
        let n = self.n;
        if n == 0 {
            return T::zero();
        }
        if self.zero_pivot {
            return T::infinity();
        }
        let mut x = vec![T::one() / T::from_count(n); n];
        let mut est = T::zero();
        for iter in 0..5 {
            let y = self.solve(&x);
            let y_norm = norm1(&y);
            if !y_norm.is_finite() {
                return T::infinity();
            }
            if iter > 0 && y_norm <= est {
                break;
            }
            est = y_norm;
            let signs: Vec<T> = y
                .iter()
                .map(|&v| if v < T::zero() { -T::one() } else { T::one() })
                .collect();
            let z = self.solve_transpose(&signs);
            let (j, zmax) = z.iter().enumerate().fold((0, -T::one()), |best, (i, v)| {
                if v.abs() > best.1 {
                    (i, v.abs())
                } else {
                    best
                }
            });
            let ztx: T = z.iter().zip(&x).map(|(&a, &b)| a * b).sum();
            if iter > 0 && zmax <= ztx {
                break;
            }
            x = vec![T::zero(); n];
            x[j] = T::one();
        }

        // Alternating-sign probe guards against the estimator's known blind spots.
        let denom = if n > 1 {
            T::from_count(n - 1)
        } else {
            T::one()
        };
        let alt: Vec<T> = (0..n)
            .map(|i| {
                let mag = T::one() + T::from_count(i) / denom;
                if i % 2 == 0 {
                    mag
                } else {
                    -mag
                }
            })
            .collect();
        let alt_est = T::lit(2.0) * norm1(&self.solve(&alt)) / (T::lit(3.0) * T::from_count(n));
        if !alt_est.is_finite() {
            return T::infinity();
        }
        est.max(alt_est)
    }

    /// Reciprocal 1-norm condition estimate in `[0, 1]`; `anorm` is `‖A‖₁`.
    pub fn rcond(&self, anorm: T) -> T {
        if self.zero_pivot || anorm == T::zero() || !anorm.is_finite() {
            return T::zero();
        }
        let inv = self.inverse_norm1_estimate();
        if !inv.is_finite() || inv == T::zero() {
            return T::zero();
        }
        (T::one() / (anorm * inv)).min(T::one())
    }
}
