use crate::linalg::{shift_diagnostics, solve_shifted, LinalgError};
use crate::scalar::{norm1, sum, Scalar};
use crate::tensor::Tensor;

use super::mni::adjust_in_interval;
use super::steps::pni_select_lambda;
use super::{
    positive_start, Check, Method, Run, SolveReport, SolverConfig, SolverError, Status, StepFlags,
    ZERO_SUM_TOL,
};

/// β values tried after the scheduled one when the shift is singular.
fn fallback_betas<T: Scalar>() -> impl Iterator<Item = T> {
    (0..=10).map(|i| T::lit(i as f64 / 10.0))
}

/// Projected Newton iteration: negative components of the candidate
/// iterate are zeroed, ratio bounds use the support-aware definition and
/// λ is damped toward the ratio interval by β.
///
/// Local convergence of this scheme is only known under a bound on β that
/// involves the unknown eigenpair; it is not checked. Runs that use β > 0
/// say so in [`SolveReport::notes`].
pub fn run_pni<T: Scalar>(
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
            return Ok(run.finish(Method::Pni, status));
        }
    };
    let mut lambda_hat = None;
    let mut beta = None;
    let mut positive_beta_used = false;
    let mut k = 0;
    loop {
        if let Check::Stop(status) = run.record(k, &x, lambda, lambda_hat, flags, beta)? {
            if positive_beta_used {
                run.notes.push(
                    "β > 0 was used; the β bound required for local quadratic convergence \
                     depends on the unknown eigenpair and was not verified"
                        .into(),
                );
            }
            return Ok(run.finish(Method::Pni, status));
        }
        let w_hat = match solve_shifted(lambda, &t, &x, &config.border) {
            Ok((w, _)) => w,
            Err(LinalgError::SingularShift { .. }) => {
                return Ok(run.finish(Method::Pni, Status::SingularShift))
            }
            Err(e) => return Err(e.into()),
        };
        flags = StepFlags::default();
        let s = sum(&w_hat);
        if !(s.abs() >= T::lit(ZERO_SUM_TOL) * norm1(&w_hat)) || s == T::zero() {
            return Ok(run.finish(Method::Pni, Status::ZeroDenominator));
        }
        let l_hat = (lambda - T::one() / s) / m1;
        lambda_hat = Some(l_hat);

        let x_tilde: Vec<T> = x
            .iter()
            .zip(&w_hat)
            .map(|(&xi, &wi)| m2 * xi + wi / s)
            .collect();
        flags.projected = x_tilde.iter().any(|&v| v < T::zero());
        let x_tilde: Vec<T> = x_tilde.into_iter().map(|v| v.max(T::zero())).collect();
        let norm = norm1(&x_tilde);
        x = x_tilde.into_iter().map(|v| v / norm).collect();
        if !crate::scalar::all_finite(&x) {
            run.record(k + 1, &x, l_hat, lambda_hat, flags, None)?;
            return Ok(run.finish(Method::Pni, Status::Diverged));
        }

        let (low, high) = tensor.ratio_bounds(&x)?;
        t = tensor.jacobian(&x)?;
        let scheduled = config.beta(k + 1);
        let chosen = std::iter::once(scheduled)
            .chain(fallback_betas())
            .enumerate()
            .map(|(i, b)| (i, b, pni_select_lambda(l_hat, low, high, b)))
            .find(|&(_, _, l)| !shift_diagnostics(l, &t, &config.border).1.singular);
        match chosen {
            Some((i, b, l)) => {
                flags.lambda_adjusted = i > 0;
                positive_beta_used |= b > T::zero();
                beta = Some(b);
                lambda = l;
            }
            None => {
                let status =
                    match run.record(k + 1, &x, l_hat, lambda_hat, flags, Some(scheduled))? {
                        Check::Stop(status) => status,
                        Check::Continue => Status::SingularShift,
                    };
                return Ok(run.finish(Method::Pni, status));
            }
        }
        k += 1;
    }
}
