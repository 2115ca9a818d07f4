use crate::linalg::{solve_bordered, solve_shifted, BorderConfig, Matrix, SolveDiagnostics};
use crate::scalar::{norm1, sum, Scalar};
use crate::tensor::Tensor;

use super::{SolverError, ZERO_SUM_TOL};

#[derive(Clone, Debug, PartialEq)]
pub struct BorderedStep<T> {
    pub x_hat: Vec<T>,
    pub lambda_hat: T,
    pub diagnostics: SolveDiagnostics<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClosedStep<T> {
    pub x_hat: Vec<T>,
    pub lambda_hat: T,
    /// `(λI − T(x))⁻¹ x`.
    pub w_hat: Vec<T>,
}

/// One Newton step through the bordered system:
/// `x̂ = x − d`, `λ̂ = λ − δ`.
pub fn newton_step_bordered<T: Scalar>(
    tensor: &Tensor<T>,
    x: &[T],
    lambda: T,
    cfg: &BorderConfig<T>,
) -> Result<BorderedStep<T>, SolverError> {
    let t = tensor.jacobian(x)?;
    bordered_step_with(tensor, &t, x, lambda, cfg)
}

pub(crate) fn bordered_step_with<T: Scalar>(
    tensor: &Tensor<T>,
    t: &Matrix<T>,
    x: &[T],
    lambda: T,
    cfg: &BorderConfig<T>,
) -> Result<BorderedStep<T>, SolverError> {
    let ax = tensor.apply(x)?;
    let r: Vec<T> = x.iter().zip(&ax).map(|(&xi, &a)| lambda * xi - a).collect();
    let s = sum(x) - T::one();
    let (d, delta, diagnostics) = solve_bordered(lambda, t, x, &r, s, cfg)?;
    Ok(BorderedStep {
        x_hat: x.iter().zip(&d).map(|(&xi, &di)| xi - di).collect(),
        lambda_hat: lambda - delta,
        diagnostics,
    })
}

/// The same Newton step in closed form through `ŵ = (λI − T(x))⁻¹ x`:
/// `x̂ = ((m−2)x + ŵ/eᵀŵ)/(m−1)`, `λ̂ = (λ − 1/eᵀŵ)/(m−1)`.
///
/// Requires `eᵀx = 1`.
pub fn newton_step_closed<T: Scalar>(
    tensor: &Tensor<T>,
    x: &[T],
    lambda: T,
    cfg: &BorderConfig<T>,
) -> Result<ClosedStep<T>, SolverError> {
    let t = tensor.jacobian(x)?;
    let (w_hat, _) = solve_shifted(lambda, &t, x, cfg)?;
    let s = sum(&w_hat);
    if !(s.abs() >= T::lit(ZERO_SUM_TOL) * norm1(&w_hat)) || s == T::zero() {
        return Err(SolverError::ZeroDenominator);
    }
    let m1 = T::from_count(tensor.order() - 1);
    let m2 = T::from_count(tensor.order() - 2);
    let x_hat = x
        .iter()
        .zip(&w_hat)
        .map(|(&xi, &wi)| (m2 * xi + wi / s) / m1)
        .collect();
    let lambda_hat = (lambda - T::one() / s) / m1;
    Ok(ClosedStep {
        x_hat,
        lambda_hat,
        w_hat,
    })
}

/// Keeps the dominant-sign part of `ŵ`: `max(ŵ, 0)` if `|max ŵ| > |min ŵ|`,
/// otherwise `min(ŵ, 0)`. Ties between signs go to the negative part; an
/// input that is already one-signed is returned unchanged.
pub fn project_sign_dominant<T: Scalar>(w_hat: &[T]) -> Vec<T> {
    let hi = w_hat.iter().copied().fold(T::neg_infinity(), T::max);
    let lo = w_hat.iter().copied().fold(T::infinity(), T::min);
    if lo >= T::zero() || hi.abs() > lo.abs() && hi > T::zero() {
        w_hat.iter().map(|&v| v.max(T::zero())).collect()
    } else {
        w_hat.iter().map(|&v| v.min(T::zero())).collect()
    }
}

/// `max(x̂, 0) / ‖max(x̂, 0)‖₁`.
pub fn proj_simplex<T: Scalar>(x_hat: &[T]) -> Result<Vec<T>, SolverError> {
    let pos: Vec<T> = x_hat.iter().map(|&v| v.max(T::zero())).collect();
    let s = sum(&pos);
    if !(s > T::zero()) || !s.is_finite() {
        return Err(SolverError::ProjectionEmpty);
    }
    Ok(pos.into_iter().map(|v| v / s).collect())
}

/// MNI's default λ: clamp λ̂ into `[low, high]`; `None` (eᵀŵ = 0) picks `high`.
pub fn mni_select_lambda<T: Scalar>(lambda_hat: Option<T>, low: T, high: T) -> T {
    match lambda_hat {
        None => high,
        Some(l) if l > high => high,
        Some(l) if l < low => low,
        Some(l) => l,
    }
}

/// PNI's λ: move λ̂ by a fraction β toward the far end of `[low, high]`.
pub fn pni_select_lambda<T: Scalar>(lambda_hat: T, low: T, high: T, beta: T) -> T {
    if lambda_hat <= (low + high) / T::lit(2.0) {
        lambda_hat + beta * (high - lambda_hat)
    } else {
        lambda_hat + beta * (low - lambda_hat)
    }
}
