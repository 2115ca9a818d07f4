//! Dense kernels for the shifted system `(λI − T) w = b` and the bordered
//! Newton system `[[λI − T, x], [eᵀ, 0]] [d; δ] = [r; s]`.
//!
//! Singularity is judged by a 1-norm reciprocal condition estimate taken
//! from the LU factors. A bordered matrix that is flagged singular can be
//! repaired by shifting λ upward: with `eᵀx = 1` its determinant is a
//! polynomial of degree `n − 1` in λ, so only finitely many shifts fail.

mod lu;
mod matrix;

pub use lu::Lu;
pub use matrix::Matrix;

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("shifted matrix λI − T is singular or nearly singular (rcond = {rcond:e})")]
    SingularShift { rcond: f64 },
    #[error("bordered Newton matrix is singular or nearly singular (rcond = {rcond:e})")]
    SingularBordered { rcond: f64 },
    #[error("no λ perturbation in the schedule made the bordered matrix nonsingular (last λ = {last_lambda}, rcond = {rcond:e})")]
    PerturbationExhausted { last_lambda: f64, rcond: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Singularity threshold and λ-perturbation schedule.
#[derive(Clone, Debug, PartialEq)]
pub struct BorderConfig<T> {
    /// A matrix whose reciprocal condition estimate falls below this is singular.
    pub rcond_threshold: T,
    /// Perturbations are `max(1, |λ|) · epsilon_base · 2^j`.
    pub epsilon_base: T,
    /// Largest `j` tried before giving up.
    pub max_escalations: u32,
}

impl<T: Scalar> Default for BorderConfig<T> {
    fn default() -> Self {
        Self {
            rcond_threshold: T::at_least_eps(1e-12, 100.0),
            epsilon_base: T::at_least_eps(1e-8, 16.0),
            max_escalations: 40,
        }
    }
}

impl<T: Scalar> BorderConfig<T> {
    /// The `j`-th upward perturbation for a given λ.
    pub fn epsilon(&self, lambda: T, j: u32) -> T {
        T::one().max(lambda.abs()) * self.epsilon_base * T::lit(2.0).powi(j as i32)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveDiagnostics<T> {
    /// Reciprocal 1-norm condition estimate, in `[0, 1]`.
    pub rcond: T,
    pub singular: bool,
    /// Amount added to λ before the matrix was accepted.
    pub perturbation: T,
}

impl<T: Scalar> SolveDiagnostics<T> {
    fn from_rcond(rcond: T, cfg: &BorderConfig<T>) -> Self {
        Self {
            rcond,
            singular: !(rcond >= cfg.rcond_threshold),
            perturbation: T::zero(),
        }
    }
}

/// The `(n+1)×(n+1)` matrix `[[λI − T, x], [eᵀ, 0]]`.
#[derive(Clone, Debug)]
pub struct BorderedSystem<'a, T> {
    pub lambda: T,
    pub t: &'a Matrix<T>,
    pub x: &'a [T],
}

impl<'a, T: Scalar> BorderedSystem<'a, T> {
    pub fn new(lambda: T, t: &'a Matrix<T>, x: &'a [T]) -> Result<Self, LinalgError> {
        check_dim(t.dim(), x.len())?;
        Ok(Self { lambda, t, x })
    }

    pub fn assemble(&self) -> Matrix<T> {
        let n = self.t.dim();
        let mut out = Matrix::zeros(n + 1);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = -self.t[(i, j)];
            }
            out[(i, i)] += self.lambda;
            out[(i, n)] = self.x[i];
            out[(n, i)] = T::one();
        }
        out
    }

    pub fn determinant(&self) -> T {
        Lu::factor(&self.assemble()).determinant()
    }

    fn factor(&self) -> (Lu<T>, Matrix<T>) {
        let a = self.assemble();
        (Lu::factor(&a), a)
    }
}

fn check_dim(expected: usize, got: usize) -> Result<(), LinalgError> {
    if expected != got {
        return Err(LinalgError::DimensionMismatch { expected, got });
    }
    Ok(())
}

fn to_f64<T: Scalar>(v: T) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

/// Factors `λI − T` and reports its reciprocal condition estimate.
pub fn shift_diagnostics<T: Scalar>(
    lambda: T,
    t: &Matrix<T>,
    cfg: &BorderConfig<T>,
) -> (Lu<T>, SolveDiagnostics<T>) {
    let a = t.shifted_negation(lambda);
    let lu = Lu::factor(&a);
    let rcond = lu.rcond(a.norm1());
    (lu, SolveDiagnostics::from_rcond(rcond, cfg))
}

/// Solves `(λI − T) w = b`.
pub fn solve_shifted<T: Scalar>(
    lambda: T,
    t: &Matrix<T>,
    b: &[T],
    cfg: &BorderConfig<T>,
) -> Result<(Vec<T>, SolveDiagnostics<T>), LinalgError> {
    check_dim(t.dim(), b.len())?;
    let (lu, diag) = shift_diagnostics(lambda, t, cfg);
    if diag.singular {
        return Err(LinalgError::SingularShift {
            rcond: to_f64(diag.rcond),
        });
    }
    Ok((lu.solve(b), diag))
}

/// Reciprocal condition estimate of the bordered matrix at `λ`.
pub fn bordered_diagnostics<T: Scalar>(
    lambda: T,
    t: &Matrix<T>,
    x: &[T],
    cfg: &BorderConfig<T>,
) -> Result<SolveDiagnostics<T>, LinalgError> {
    let (lu, a) = BorderedSystem::new(lambda, t, x)?.factor();
    Ok(SolveDiagnostics::from_rcond(lu.rcond(a.norm1()), cfg))
}

/// Solves the bordered Newton system, returning `(d, δ)`.
pub fn solve_bordered<T: Scalar>(
    lambda: T,
    t: &Matrix<T>,
    x: &[T],
    r: &[T],
    s: T,
    cfg: &BorderConfig<T>,
) -> Result<(Vec<T>, T, SolveDiagnostics<T>), LinalgError> {
    let n = t.dim();
    check_dim(n, r.len())?;
    let (lu, a) = BorderedSystem::new(lambda, t, x)?.factor();
    let diag = SolveDiagnostics::from_rcond(lu.rcond(a.norm1()), cfg);
    if diag.singular {
        return Err(LinalgError::SingularBordered {
            rcond: to_f64(diag.rcond),
        });
    }
    let mut rhs = r.to_vec();
    rhs.push(s);
    let mut sol = lu.solve(&rhs);
    let delta = sol.pop().expect("bordered solution has n + 1 entries");
    Ok((sol, delta, diag))
}

/// Returns a λ' ≥ λ whose bordered matrix is not flagged singular.
///
/// Tries λ itself, then `λ + ε_j` for `j = 0..=max_escalations`.
pub fn ensure_bordered_nonsingular<T: Scalar>(
    lambda: T,
    t: &Matrix<T>,
    x: &[T],
    cfg: &BorderConfig<T>,
) -> Result<(T, SolveDiagnostics<T>), LinalgError> {
    let diag = bordered_diagnostics(lambda, t, x, cfg)?;
    if !diag.singular {
        return Ok((lambda, diag));
    }
    let mut last = diag;
    let mut last_lambda = lambda;
    for j in 0..=cfg.max_escalations {
        let eps = cfg.epsilon(lambda, j);
        let candidate = lambda + eps;
        let diag = bordered_diagnostics(candidate, t, x, cfg)?;
        if !diag.singular {
            return Ok((
                candidate,
                SolveDiagnostics {
                    perturbation: eps,
                    ..diag
                },
            ));
        }
        last = diag;
        last_lambda = candidate;
    }
    Err(LinalgError::PerturbationExhausted {
        last_lambda: to_f64(last_lambda),
        rcond: to_f64(last.rcond),
    })
}
