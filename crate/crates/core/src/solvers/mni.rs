use crate::linalg::{shift_diagnostics, solve_shifted, LinalgError, Matrix};
use crate::scalar::{norm1, sum, Scalar};
use crate::tensor::Tensor;

use super::steps::{mni_select_lambda, project_sign_dominant};
use super::{
    positive_start, Check, Method, Run, SolveReport, SolverConfig, SolverError, Status, StepFlags,
    ZERO_SUM_TOL,
};

/// Moves `lambda` inside `[low, high]` until `λI − T` is no longer flagged
/// singular. Candidates halve the distance from the far endpoint back
/// toward `lambda`. Returns `None` when every attempt fails.
pub(crate) fn adjust_in_interval<T: Scalar>(
    lambda: T,
    low: T,
    high: T,
    t: &Matrix<T>,
    config: &SolverConfig<T>,
) -> Option<T> {
    if !shift_diagnostics(lambda, t, &config.border).1.singular {
        return Some(lambda);
    }
    let target = if (high - lambda).abs() >= (lambda - low).abs() {
        high
    } else {
        low
    };
    let mut step = target - lambda;
    for _ in 0..config.lambda_adjust_attempts {
        step /= T::lit(2.0);
        if step == T::zero() {
            break;
        }
        let candidate = lambda + step;
        if !shift_diagnostics(candidate, t, &config.border).1.singular {
            return Some(candidate);
        }
    }
    None
}

/// Modified Newton iteration: the shifted solution `ŵ` is cut to its
/// dominant-sign part before forming the next iterate, and λ is kept in
/// the ratio interval.
pub fn run_mni<T: Scalar>(
    tensor: &Tensor<T>,
    x0: &[T],
    config: &SolverConfig<T>,
) -> Result<SolveReport<T>, SolverError> {
    let mut x = positive_start(tensor, x0)?;
    let mut run = Run::new(tensor, config)?;
    let m = tensor.order();
    let m1 = T::from_count(m - 1);
    let m2 = T::from_count(m - 2);

    let (low, high) = tensor.ratio_bounds(&x)?;
    let mut t = tensor.jacobian(&x)?;
    let mut flags = StepFlags::default();
    let mut lambda = match adjust_in_interval(high, low, high, &t, config) {
        Some(l) => {
            flags.lambda_adjusted = l != high;
            l
        }
        None => {
            let status = match run.record(0, &x, high, None, flags, None)? {
                Check::Stop(status) => status,
                Check::Continue => Status::SingularShift,
            };
            return Ok(run.finish(Method::Mni, status));
        }
    };
    let mut lambda_hat = None;
    let mut k = 0;
    loop {
        if let Check::Stop(status) = run.record(k, &x, lambda, lambda_hat, flags, None)? {
            return Ok(run.finish(Method::Mni, status));
        }
        let w_hat = match solve_shifted(lambda, &t, &x, &config.border) {
            Ok((w, _)) => w,
            Err(LinalgError::SingularShift { .. }) => {
                return Ok(run.finish(Method::Mni, Status::SingularShift))
            }
            Err(e) => return Err(e.into()),
        };
        flags = StepFlags::default();

        // λ̂ uses the unprojected ŵ
        let s_hat = sum(&w_hat);
        let zero_den = !(s_hat.abs() >= T::lit(ZERO_SUM_TOL) * norm1(&w_hat)) || s_hat == T::zero();
        flags.zero_denominator = zero_den;
        lambda_hat = if zero_den {
            None
        } else {
            Some((lambda - T::one() / s_hat) / m1)
        };

        let w = project_sign_dominant(&w_hat);
        flags.projected = w != w_hat;
        let s = sum(&w);
        let x_tilde: Vec<T> = x
            .iter()
            .zip(&w)
            .map(|(&xi, &wi)| m2 * xi + wi / s)
            .collect();
        let norm = norm1(&x_tilde);
        x = x_tilde.into_iter().map(|v| v / norm).collect();
        if !crate::scalar::all_finite(&x) {
            run.record(k + 1, &x, lambda, lambda_hat, flags, None)?;
            return Ok(run.finish(Method::Mni, Status::Diverged));
        }

        let (low, high) = tensor.ratio_bounds(&x)?;
        let chosen = mni_select_lambda(lambda_hat, low, high);
        t = tensor.jacobian(&x)?;
        lambda = match adjust_in_interval(chosen, low, high, &t, config) {
            Some(l) => {
                flags.lambda_adjusted = l != chosen;
                l
            }
            None => {
                let status = match run.record(k + 1, &x, chosen, lambda_hat, flags, None)? {
                    Check::Stop(status) => status,
                    Check::Continue => Status::SingularShift,
                };
                return Ok(run.finish(Method::Mni, status));
            }
        };
        k += 1;
    }
}
