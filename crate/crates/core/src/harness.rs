//! Experiment helpers: multi-start enumeration, eigenpair deduplication,
//! convergence-order estimation, random tensors and a finite-difference
//! Jacobian check.

use std::cmp::Ordering;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::scalar::{dist1, norm_inf, sum, Scalar};
use crate::solvers::{self, Method, SolveReport, SolverConfig, SolverError, Status};
use crate::tensor::{Iterate, Tensor};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HarnessError {
    #[error("not enough usable error points to fit an order ({usable} < 3)")]
    InsufficientData { usable: usize },
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// Errors inside this window are used for order fitting.
pub const ORDER_WINDOW: (f64, f64) = (1e-13, 1e-2);

/// Default clustering tolerances for [`dedup`]. [`multi_start`] raises
/// them to `1000 ε` for scalars too coarse to resolve them.
pub const DEDUP_X_TOL: f64 = 1e-8;
pub const DEDUP_LAMBDA_TOL: f64 = 1e-8;
const DEDUP_EPS_MULTIPLE: f64 = 1e3;

#[derive(Clone, Debug, PartialEq)]
pub struct Eigenpair<T> {
    pub x: Vec<T>,
    pub lambda: T,
    pub residual: T,
    /// Start vector that led here.
    pub witness: Vec<T>,
    pub method: Method,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StartOutcome<T> {
    pub index: usize,
    pub x0: Vec<T>,
    pub status: Status,
    pub iterations: usize,
    pub lambda: T,
    /// Why a converged run was still excluded, if it was.
    pub rejected: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EigenpairSet<T> {
    /// Distinct eigenpairs, sorted by eigenvalue.
    pub pairs: Vec<Eigenpair<T>>,
    /// One entry per start, in start order.
    pub starts: Vec<StartOutcome<T>>,
}

impl<T> EigenpairSet<T> {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

type StartRun<T> = (Vec<T>, Result<SolveReport<T>, SolverError>);

/// Start vectors drawn uniformly from the open simplex (normalized
/// exponential draws).
pub fn simplex_starts<T: Scalar>(n: usize, count: usize, seed: u64) -> Vec<Vec<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let draws: Vec<f64> = (0..n)
                .map(|_| {
                    let e: f64 = rng.sample(Exp1);
                    e.max(f64::MIN_POSITIVE)
                })
                .collect();
            let s: f64 = draws.iter().sum();
            draws.into_iter().map(|d| T::lit(d / s)).collect()
        })
        .collect()
}

/// Solves from `num_starts` random simplex starts and keeps the distinct
/// nonnegative eigenpairs found. Deterministic for a given seed.
pub fn multi_start<T: Scalar>(
    tensor: &Tensor<T>,
    num_starts: usize,
    seed: u64,
    config: &SolverConfig<T>,
) -> EigenpairSet<T> {
    let starts = simplex_starts::<T>(tensor.dim(), num_starts, seed);
    let runs: Vec<StartRun<T>> = starts
        .into_par_iter()
        .map(|x0| {
            let rep = solvers::solve(tensor, &x0, None, config);
            (x0, rep)
        })
        .collect();

    let mut candidates = Vec::new();
    let mut outcomes = Vec::with_capacity(runs.len());
    for (index, (x0, rep)) in runs.into_iter().enumerate() {
        let rep = match rep {
            Ok(r) => r,
            Err(e) => {
                outcomes.push(StartOutcome {
                    index,
                    x0,
                    status: Status::Diverged,
                    iterations: 0,
                    lambda: T::nan(),
                    rejected: Some(e.to_string()),
                });
                continue;
            }
        };
        let rejected = if rep.status != Status::Converged {
            None
        } else {
            admissible(&rep.iterate, config.tol)
        };
        if rep.status == Status::Converged && rejected.is_none() {
            candidates.push(Eigenpair {
                x: rep.iterate.x.clone(),
                lambda: rep.iterate.lambda,
                residual: rep.iterate.residual,
                witness: x0.clone(),
                method: rep.method,
            });
        }
        outcomes.push(StartOutcome {
            index,
            x0,
            status: rep.status,
            iterations: rep.iterations,
            lambda: rep.iterate.lambda,
            rejected,
        });
    }

    EigenpairSet {
        pairs: dedup(
            candidates,
            T::at_least_eps(DEDUP_X_TOL, DEDUP_EPS_MULTIPLE),
            T::at_least_eps(DEDUP_LAMBDA_TOL, DEDUP_EPS_MULTIPLE),
        ),
        starts: outcomes,
    }
}

fn admissible<T: Scalar>(it: &Iterate<T>, tol: T) -> Option<String> {
    if it.x.iter().any(|&v| v < T::zero()) {
        return Some("eigenvector has negative components".into());
    }
    if it.lambda < T::zero() {
        return Some("negative eigenvalue".into());
    }
    if (sum(&it.x) - T::one()).abs() > T::at_least_eps(solvers::SIMPLEX_TOL, 64.0) {
        return Some("eigenvector not on the simplex".into());
    }
    if !(it.residual < tol) {
        return Some("residual above tolerance".into());
    }
    None
}

fn total_cmp<T: Scalar>(a: T, b: T) -> Ordering {
    a.partial_cmp(&b)
        .unwrap_or_else(|| a.is_nan().cmp(&b.is_nan()))
}

fn lex_cmp<T: Scalar>(a: &[T], b: &[T]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(&p, &q)| total_cmp(p, q))
        .find(|o| o.is_ne())
        .unwrap_or(a.len().cmp(&b.len()))
}

/// Clusters pairs with `‖x − x'‖₁ < x_tol` and `|λ − λ'| < lambda_tol`,
/// keeping the lowest-residual member of each cluster. The result is
/// sorted by eigenvalue and does not depend on the input order.
pub fn dedup<T: Scalar>(
    mut pairs: Vec<Eigenpair<T>>,
    x_tol: T,
    lambda_tol: T,
) -> Vec<Eigenpair<T>> {
    pairs.sort_by(|a, b| {
        total_cmp(a.residual, b.residual)
            .then_with(|| total_cmp(a.lambda, b.lambda))
            .then_with(|| lex_cmp(&a.x, &b.x))
            .then_with(|| lex_cmp(&a.witness, &b.witness))
    });
    let mut kept: Vec<Eigenpair<T>> = Vec::new();
    for p in pairs {
        let dup = kept
            .iter()
            .any(|k| dist1(&k.x, &p.x) < x_tol && (k.lambda - p.lambda).abs() < lambda_tol);
        if !dup {
            kept.push(p);
        }
    }
    kept.sort_by(|a, b| total_cmp(a.lambda, b.lambda).then_with(|| lex_cmp(&a.x, &b.x)));
    kept
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceEstimate<T> {
    /// `e_k = ‖x_k − x*‖₁ + |λ_k − λ*|` for every traced step.
    pub errors: Vec<T>,
    /// Fitted order `p` in `log e_{k+1} ≈ p log e_k + c`.
    pub order: T,
    /// Number of errors inside [`ORDER_WINDOW`] used in the fit.
    pub usable: usize,
}

/// Fits the convergence order of a trace against a reference eigenpair.
pub fn estimate_order<T: Scalar>(
    trace: &solvers::IterationTrace<T>,
    reference: &Iterate<T>,
) -> Result<ConvergenceEstimate<T>, HarnessError> {
    let errors: Vec<T> = trace
        .iter()
        .map(|s| dist1(&s.x, &reference.x) + (s.lambda - reference.lambda).abs())
        .collect();
    let (order, usable) = fit_order(&errors)?;
    Ok(ConvergenceEstimate {
        errors,
        order,
        usable,
    })
}

/// Least-squares order fit over consecutive errors inside [`ORDER_WINDOW`].
pub fn fit_order<T: Scalar>(errors: &[T]) -> Result<(T, usize), HarnessError> {
    let (lo, hi) = (T::lit(ORDER_WINDOW.0), T::lit(ORDER_WINDOW.1));
    let inside = |e: T| e > lo && e < hi;
    let usable = errors.iter().filter(|&&e| inside(e)).count();
    let pairs: Vec<(T, T)> = errors
        .windows(2)
        .filter(|w| inside(w[0]) && inside(w[1]))
        .map(|w| (w[0].ln(), w[1].ln()))
        .collect();
    if usable < 3 || pairs.len() < 2 {
        return Err(HarnessError::InsufficientData { usable });
    }
    let n = T::from_count(pairs.len());
    let mx = pairs.iter().map(|p| p.0).sum::<T>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<T>() / n;
    let sxy: T = pairs.iter().map(|&(a, b)| (a - mx) * (b - my)).sum();
    let sxx: T = pairs.iter().map(|&(a, _)| (a - mx) * (a - mx)).sum();
    if sxx == T::zero() {
        return Err(HarnessError::InsufficientData { usable });
    }
    Ok((sxy / sxx, usable))
}

/// A reference eigenpair for order estimation: the run's own final iterate,
/// continued with MPNI until its residual drops below the order window.
pub fn converged_reference<T: Scalar>(
    tensor: &Tensor<T>,
    report: &SolveReport<T>,
    config: &SolverConfig<T>,
) -> Result<Iterate<T>, HarnessError> {
    let floor = T::lit(ORDER_WINDOW.0);
    if report.iterate.residual < floor {
        return Ok(report.iterate.clone());
    }
    let polish = SolverConfig {
        method: Method::Mpni,
        tol: floor,
        max_iter: 10,
        ..config.clone()
    };
    let x: Vec<T> = report.iterate.x.iter().map(|&v| v.max(T::zero())).collect();
    let rep = solvers::run_mpni_from(tensor, &x, report.iterate.lambda.max(T::zero()), &polish)?;
    if rep.iterate.residual < report.iterate.residual {
        Ok(rep.iterate)
    } else {
        Ok(report.iterate.clone())
    }
}

/// Fills `report.order` for converged runs when the tail supports a fit.
pub fn attach_order<T: Scalar>(
    tensor: &Tensor<T>,
    report: &mut SolveReport<T>,
    config: &SolverConfig<T>,
) {
    if !report.converged() {
        return;
    }
    if let Ok(reference) = converged_reference(tensor, report, config) {
        report.order = estimate_order(&report.trace, &reference)
            .ok()
            .map(|e| e.order);
    }
}

/// Tensor with `round(density · n^m)` (at least one) entries drawn uniform
/// on `[0, 1)` at distinct, uniformly chosen index tuples.
pub fn random_tensor<T: Scalar>(order: usize, dim: usize, density: f64, seed: u64) -> Tensor<T> {
    assert!(
        order >= 2 && dim >= 1,
        "order ≥ 2 and dimension ≥ 1 required"
    );
    assert!(
        density > 0.0 && density <= 1.0,
        "density must lie in (0, 1]"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = dim.pow(order as u32);
    let nnz = ((density * total as f64).round() as usize).clamp(1, total);
    let mut positions = sample(&mut rng, total, nnz).into_vec();
    positions.sort_unstable();
    let entries = positions.into_iter().map(|mut p| {
        let mut idx = vec![0; order];
        for slot in idx.iter_mut().rev() {
            *slot = p % dim + 1;
            p /= dim;
        }
        (idx, T::lit(rng.random::<f64>()))
    });
    Tensor::new(order, dim, entries).expect("generated entries are valid")
}

/// Largest column error between the analytic Jacobian and central
/// differences of `apply` with step `h · max(1, |x_j|)`.
///
/// Column errors are relative to the column's largest entry, floored at
/// 1e-3 of the Jacobian's largest entry so near-zero columns do not
/// amplify rounding noise.
pub fn fd_check<T: Scalar>(tensor: &Tensor<T>, x: &[T], h: T) -> Result<T, SolverError> {
    let t = tensor.jacobian(x)?;
    let scale = t.max_abs();
    let mut worst = T::zero();
    for j in 0..x.len() {
        let step = h * T::one().max(x[j].abs());
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[j] += step;
        xm[j] -= step;
        let fp = tensor.apply(&xp)?;
        let fm = tensor.apply(&xm)?;
        let width = xp[j] - xm[j];
        let fd: Vec<T> = fp.iter().zip(&fm).map(|(&a, &b)| (a - b) / width).collect();
        let col = t.column(j);
        let diff: Vec<T> = fd.iter().zip(&col).map(|(&a, &b)| a - b).collect();
        let denom = norm_inf(&col)
            .max(T::lit(1e-3) * scale)
            .max(T::min_positive_value());
        worst = worst.max(norm_inf(&diff) / denom);
    }
    Ok(worst)
}
