use crate::linalg::{ensure_bordered_nonsingular, LinalgError};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

use super::steps::{bordered_step_with, proj_simplex};
use super::{
    normalized_start, positive_start, Check, Method, Run, SolveReport, SolverConfig, SolverError,
    Status, StepFlags,
};

/// Modified projected Newton iteration from a positive start `x0` on the
/// simplex, with `λ0 = max(A x0^{m−1} / x0)`.
pub fn run_mpni<T: Scalar>(
    tensor: &Tensor<T>,
    x0: &[T],
    config: &SolverConfig<T>,
) -> Result<SolveReport<T>, SolverError> {
    let x0 = positive_start(tensor, x0)?;
    let (_, lambda0) = tensor.ratio_bounds(&x0)?;
    newton_loop(tensor, x0, lambda0, config, true)
}

/// MPNI seeded with an arbitrary pair `(x, λ)`, `x ≥ 0` on the simplex.
///
/// Used to continue a converged run to a tighter tolerance, or to start
/// directly at a known eigenpair.
pub fn run_mpni_from<T: Scalar>(
    tensor: &Tensor<T>,
    x: &[T],
    lambda: T,
    config: &SolverConfig<T>,
) -> Result<SolveReport<T>, SolverError> {
    if x.iter().any(|&v| v < T::zero()) {
        return Err(SolverError::InvalidStart(
            "entries must be nonnegative".into(),
        ));
    }
    check_len(tensor, x)?;
    let x = normalized_start(x)?;
    newton_loop(tensor, x, lambda, config, true)
}

/// Plain Newton on `f(x, λ) = [λx − A x^{m−1}; eᵀx − 1]` without projection.
/// `x0` only needs `eᵀx0 = 1`.
pub fn run_newton<T: Scalar>(
    tensor: &Tensor<T>,
    x0: &[T],
    lambda0: T,
    config: &SolverConfig<T>,
) -> Result<SolveReport<T>, SolverError> {
    check_len(tensor, x0)?;
    if x0.iter().any(|v| !v.is_finite()) || !lambda0.is_finite() {
        return Err(SolverError::InvalidStart("non-finite start".into()));
    }
    let x0 = normalized_start(x0)?;
    newton_loop(tensor, x0, lambda0, config, false)
}

fn check_len<T: Scalar>(tensor: &Tensor<T>, x: &[T]) -> Result<(), SolverError> {
    if x.len() != tensor.dim() {
        return Err(crate::tensor::TensorError::DimensionMismatch {
            expected: tensor.dim(),
            got: x.len(),
        }
        .into());
    }
    Ok(())
}

fn newton_loop<T: Scalar>(
    tensor: &Tensor<T>,
    mut x: Vec<T>,
    mut lambda: T,
    config: &SolverConfig<T>,
    projected: bool,
) -> Result<SolveReport<T>, SolverError> {
    let method = if projected {
        Method::Mpni
    } else {
        Method::Newton
    };
    let mut run = Run::new(tensor, config)?;
    let mut lambda_hat = None;
    let mut flags = StepFlags::default();
    let mut k = 0;
    loop {
        if let Check::Stop(status) = run.record(k, &x, lambda, lambda_hat, flags, None)? {
            return Ok(run.finish(method, status));
        }
        let t = tensor.jacobian(&x)?;
        let lambda_used = match ensure_bordered_nonsingular(lambda, &t, &x, &config.border) {
            Ok((l, diag)) => {
                run.mark_perturbation(diag.perturbation);
                l
            }
            Err(LinalgError::PerturbationExhausted { .. }) => {
                return Ok(run.finish(method, Status::PerturbationExhausted))
            }
            Err(e) => return Err(e.into()),
        };
        let step = match bordered_step_with(tensor, &t, &x, lambda_used, &config.border) {
            Ok(s) => s,
            Err(SolverError::Linalg(LinalgError::SingularBordered { .. })) => {
                return Ok(run.finish(method, Status::PerturbationExhausted))
            }
            Err(e) => return Err(e),
        };

        flags = StepFlags::default();
        lambda_hat = Some(step.lambda_hat);
        if projected {
            flags.projected = step.x_hat.iter().any(|&v| v < T::zero());
            x = match proj_simplex(&step.x_hat) {
                Ok(p) => p,
                Err(_) => return Ok(run.finish(method, Status::ProjectionEmpty)),
            };
            flags.lambda_clamped = step.lambda_hat < T::zero();
            lambda = step.lambda_hat.max(T::zero());
        } else {
            x = step.x_hat;
            lambda = step.lambda_hat;
        }
        k += 1;
    }
}
