//! Newton-type iterations for nonnegative Z₁-eigenpairs.
//!
//! * [`run_newton`]: plain Newton on the bordered system, no safeguards.
//! * [`run_mni`]: shifted solve, sign-dominant projection of `ŵ`, λ kept in
//!   the ratio interval.
//! * [`run_pni`]: shifted solve, negative parts of the candidate iterate
//!   zeroed, λ damped toward the ratio interval by β.
//! * [`run_mpni`]: bordered Newton step, then simplex projection of `x̂`
//!   and `λ = max(λ̂, 0)`.
//!
//! Every run records a full [`IterationTrace`]. Numerical breakdowns
//! (singular matrices, divergence, iteration limit) end the run with a
//! [`Status`] instead of an error; `Err` is reserved for invalid input.

use serde::Serialize;
use thiserror::Error;

use crate::linalg::{BorderConfig, LinalgError};
use crate::scalar::{sum, Scalar};
use crate::tensor::{Iterate, Tensor, TensorError};

mod mni;
mod mpni;
mod pni;
mod steps;

pub use mni::run_mni;
pub use mpni::{run_mpni, run_mpni_from, run_newton};
pub use pni::run_pni;
pub use steps::{
    mni_select_lambda, newton_step_bordered, newton_step_closed, pni_select_lambda, proj_simplex,
    project_sign_dominant, BorderedStep, ClosedStep,
};

/// `|eᵀŵ| < ZERO_SUM_TOL · ‖ŵ‖₁` counts as `eᵀŵ = 0`.
pub const ZERO_SUM_TOL: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid starting vector: {0}")]
    InvalidStart(String),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("eᵀŵ = 0: the bordered matrix is singular")]
    ZeroDenominator,
    #[error("projection onto the simplex is empty: no positive component")]
    ProjectionEmpty,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Newton,
    Mni,
    Pni,
    Mpni,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Newton => "newton",
            Method::Mni => "mni",
            Method::Pni => "pni",
            Method::Mpni => "mpni",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig<T> {
    pub method: Method,
    /// Stop when `‖A x^{m−1} − λx‖₁ < tol`.
    pub tol: T,
    pub max_iter: usize,
    /// β used by PNI at step k is `beta_schedule[k − 1]`; the last entry
    /// repeats, an empty schedule means β ≡ 0.
    pub beta_schedule: Vec<T>,
    pub border: BorderConfig<T>,
    /// Residuals above this (or any non-finite value) end the run as diverged.
    pub divergence_bound: T,
    /// Attempts for MNI's in-interval λ adjustment.
    pub lambda_adjust_attempts: u32,
}

impl<T: Scalar> Default for SolverConfig<T> {
    fn default() -> Self {
        Self {
            method: Method::Mpni,
            tol: T::at_least_eps(1e-12, 100.0),
            max_iter: 100,
            beta_schedule: Vec::new(),
            border: BorderConfig::default(),
            divergence_bound: T::lit(1e8),
            lambda_adjust_attempts: 40,
        }
    }
}

impl<T: Scalar> SolverConfig<T> {
    pub fn with_method(method: Method) -> Self {
        Self {
            method,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.tol > T::zero()) {
            return Err(SolverError::InvalidConfig(format!(
                "tol must be > 0, got {}",
                self.tol
            )));
        }
        if let Some(b) = self
            .beta_schedule
            .iter()
            .find(|&&b| !(b >= T::zero() && b <= T::one()))
        {
            return Err(SolverError::InvalidConfig(format!(
                "β must lie in [0, 1], got {b}"
            )));
        }
        if !(self.border.rcond_threshold >= T::zero()) || !(self.border.epsilon_base > T::zero()) {
            return Err(SolverError::InvalidConfig(
                "singularity threshold must be ≥ 0 and ε base > 0".into(),
            ));
        }
        if !(self.divergence_bound > T::zero()) {
            return Err(SolverError::InvalidConfig(
                "divergence bound must be > 0".into(),
            ));
        }
        Ok(())
    }

    /// β for the step producing iterate `k` (`k ≥ 1`).
    pub fn beta(&self, k: usize) -> T {
        match self.beta_schedule.len() {
            0 => T::zero(),
            len => self.beta_schedule[(k.max(1) - 1).min(len - 1)],
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct StepFlags {
    /// λ was shifted by ε before the bordered solve at this iterate.
    pub lambda_perturbed: bool,
    /// The projection producing this iterate changed a component's sign.
    pub projected: bool,
    /// `eᵀŵ = 0` branch taken when choosing this λ (MNI).
    pub zero_denominator: bool,
    /// λ̂ < 0 was clamped to zero (MPNI).
    pub lambda_clamped: bool,
    /// λ was moved away from the default choice to avoid a singular shift.
    pub lambda_adjusted: bool,
}

impl StepFlags {
    pub fn any(&self) -> bool {
        self.lambda_perturbed
            || self.projected
            || self.zero_denominator
            || self.lambda_clamped
            || self.lambda_adjusted
    }

    /// Short `|`-separated names of the raised flags.
    pub fn labels(&self) -> String {
        let names = [
            (self.lambda_perturbed, "perturbed"),
            (self.projected, "projected"),
            (self.zero_denominator, "zero_denominator"),
            (self.lambda_clamped, "clamped"),
            (self.lambda_adjusted, "adjusted"),
        ];
        names
            .iter()
            .filter(|(on, _)| *on)
            .map(|(_, n)| *n)
            .collect::<Vec<_>>()
            .join("|")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord<T> {
    pub k: usize,
    pub x: Vec<T>,
    pub lambda: T,
    /// Newton value λ̂_k before projection or clamping (absent at k = 0).
    pub lambda_hat: Option<T>,
    /// Ratio interval at `x_k`, when defined.
    pub interval: Option<(T, T)>,
    pub residual: T,
    pub flags: StepFlags,
    /// ε added to λ_k before the bordered solve from this iterate.
    pub perturbation: T,
    /// β used to choose λ_k (PNI).
    pub beta: Option<T>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct IterationTrace<T> {
    pub steps: Vec<StepRecord<T>>,
}

impl<T: Scalar> IterationTrace<T> {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, StepRecord<T>> {
        self.steps.iter()
    }

    pub fn last(&self) -> Option<&StepRecord<T>> {
        self.steps.last()
    }

    /// True if any record carries a flag.
    pub fn any_flag(&self) -> bool {
        self.steps.iter().any(|s| s.flags.any())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    MaxIter,
    Diverged,
    PerturbationExhausted,
    ProjectionEmpty,
    SingularShift,
    ZeroDenominator,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::MaxIter => "max_iter",
            Status::Diverged => "diverged",
            Status::PerturbationExhausted => "perturbation_exhausted",
            Status::ProjectionEmpty => "projection_empty",
            Status::SingularShift => "singular_shift",
            Status::ZeroDenominator => "zero_denominator",
        }
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport<T> {
    pub method: Method,
    pub status: Status,
    /// Last iterate reached (the eigenpair when converged).
    pub iterate: Iterate<T>,
    /// Number of steps taken.
    pub iterations: usize,
    pub trace: IterationTrace<T>,
    /// Estimated local convergence order, when the run converged and the
    /// tail is long enough to fit.
    pub order: Option<T>,
    pub notes: Vec<String>,
}

impl<T: Scalar> SolveReport<T> {
    pub fn converged(&self) -> bool {
        self.status == Status::Converged
    }
}

/// Runs the configured method from `x0`.
///
/// `lambda0` is only used by plain Newton; it defaults to the upper ratio
/// bound at `x0`. The other methods always start from that bound.
pub fn solve<T: Scalar>(
    tensor: &Tensor<T>,
    x0: &[T],
    lambda0: Option<T>,
    config: &SolverConfig<T>,
) -> Result<SolveReport<T>, SolverError> {
    match config.method {
        Method::Newton => {
            let lambda0 = match lambda0 {
                Some(l) => l,
                None => tensor.ratio_bounds(x0)?.1,
            };
            run_newton(tensor, x0, lambda0, config)
        }
        Method::Mni => run_mni(tensor, x0, config),
        Method::Pni => run_pni(tensor, x0, config),
        Method::Mpni => run_mpni(tensor, x0, config),
    }
}

/// Absolute tolerance for `‖x‖₁ = 1` checks.
pub const SIMPLEX_TOL: f64 = 1e-12;

/// Checks `x0 > 0`, `‖x0‖₁ = 1` and rescales away the rounding in the sum.
pub(crate) fn positive_start<T: Scalar>(
    tensor: &Tensor<T>,
    x0: &[T],
) -> Result<Vec<T>, SolverError> {
    if x0.len() != tensor.dim() {
        return Err(TensorError::DimensionMismatch {
            expected: tensor.dim(),
            got: x0.len(),
        }
        .into());
    }
    if let Some(v) = x0.iter().find(|&&v| !(v > T::zero()) || !v.is_finite()) {
        return Err(SolverError::InvalidStart(format!(
            "entries must be positive and finite, found {v}"
        )));
    }
    normalized_start(x0)
}

pub(crate) fn normalized_start<T: Scalar>(x0: &[T]) -> Result<Vec<T>, SolverError> {
    let s = sum(x0);
    if !((s - T::one()).abs() <= T::at_least_eps(SIMPLEX_TOL, 64.0)) {
        return Err(SolverError::InvalidStart(format!(
            "entries must sum to 1, sum is {s}"
        )));
    }
    Ok(x0.iter().map(|&v| v / s).collect())
}

/// Shared bookkeeping for the iteration loops.
pub(crate) struct Run<'a, T> {
    tensor: &'a Tensor<T>,
    config: &'a SolverConfig<T>,
    pub trace: IterationTrace<T>,
    pub notes: Vec<String>,
}

pub(crate) enum Check {
    Continue,
    Stop(Status),
}

impl<'a, T: Scalar> Run<'a, T> {
    pub fn new(tensor: &'a Tensor<T>, config: &'a SolverConfig<T>) -> Result<Self, SolverError> {
        config.validate()?;
        Ok(Self {
            tensor,
            config,
            trace: IterationTrace::default(),
            notes: Vec::new(),
        })
    }

    /// Records iterate `k` and applies the divergence, stop and iteration-limit tests.
    pub fn record(
        &mut self,
        k: usize,
        x: &[T],
        lambda: T,
        lambda_hat: Option<T>,
        flags: StepFlags,
        beta: Option<T>,
    ) -> Result<Check, SolverError> {
        let residual = self.tensor.residual(x, lambda)?;
        let interval = if crate::scalar::all_finite(x) {
            self.tensor.ratio_bounds(x).ok()
        } else {
            None
        };
        self.trace.steps.push(StepRecord {
            k,
            x: x.to_vec(),
            lambda,
            lambda_hat,
            interval,
            residual,
            flags,
            perturbation: T::zero(),
            beta,
        });
        let finite = residual.is_finite() && lambda.is_finite() && crate::scalar::all_finite(x);
        if !finite || residual > self.config.divergence_bound {
            return Ok(Check::Stop(Status::Diverged));
        }
        if residual < self.config.tol {
            return Ok(Check::Stop(Status::Converged));
        }
        if k >= self.config.max_iter {
            return Ok(Check::Stop(Status::MaxIter));
        }
        Ok(Check::Continue)
    }

    pub fn mark_perturbation(&mut self, eps: T) {
        if let Some(last) = self.trace.steps.last_mut() {
            last.perturbation = eps;
            last.flags.lambda_perturbed = eps > T::zero();
        }
    }

    pub fn finish(self, method: Method, status: Status) -> SolveReport<T> {
        let last = self
            .trace
            .steps
            .last()
            .expect("a run records at least the starting iterate");
        let iterate = Iterate {
            x: last.x.clone(),
            lambda: last.lambda,
            residual: last.residual,
        };
        SolveReport {
            method,
            status,
            iterations: last.k,
            iterate,
            trace: self.trace,
            order: None,
            notes: self.notes,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        let mut c = SolverConfig::<f64>::default();
        assert!(c.validate().is_ok());
        assert_eq!(c.tol, 1e-12);
        assert_eq!(c.max_iter, 100);
        assert_eq!(c.method, Method::Mpni);
        c.tol = 0.0;
        assert!(c.validate().is_err());
        let c = SolverConfig {
            beta_schedule: vec![0.5, 1.5],
            ..SolverConfig::<f64>::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn beta_schedule_repeats_last() {
        let c = SolverConfig {
            beta_schedule: vec![0.5, 0.25],
            ..SolverConfig::<f64>::default()
        };
        assert_eq!(c.beta(1), 0.5);
        assert_eq!(c.beta(2), 0.25);
        assert_eq!(c.beta(9), 0.25);
        assert_eq!(SolverConfig::<f64>::default().beta(3), 0.0);
    }

    #[test]
    fn flag_labels() {
        let f = StepFlags {
            projected: true,
            lambda_clamped: true,
            ..StepFlags::default()
        };
        assert_eq!(f.labels(), "projected|clamped");
        assert!(!StepFlags::default().any());
    }
}
