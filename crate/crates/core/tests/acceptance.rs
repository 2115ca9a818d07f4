//! Acceptance checks. Runs without the libtest harness so every criterion
//! prints its own line; exits nonzero if any criterion fails.
//!
//!     cargo test -p zeig --test acceptance

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

use std::path::Path;
use std::process::ExitCode;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zeig::harness::{self, HarnessError};
use zeig::linalg::{bordered_diagnostics, shift_diagnostics, BorderConfig, BorderedSystem, Matrix};
use zeig::solvers::{self, newton_step_bordered, newton_step_closed, proj_simplex};
use zeig::tensor::format;
use zeig::{SolverConfig64, Status, Tensor64};

fn fixture(name: &str) -> Tensor64 {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name);
    format::read(&path).expect("fixture parses")
}

fn dist1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q).abs()).sum()
}

fn random_simplex(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let e: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

enum Verdict {
    Pass(String),
    Fail(String),
    /// The criterion cannot be met as worded; the detail says why. Only
    /// returned after asserting the exact circumstance that blocks it.
    Unattainable(String),
}

type Check = Result<Verdict, String>;
type Criterion = (&'static str, fn() -> Check);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !($cond) {
            return Ok(Verdict::Fail(format!($($msg)+)));
        }
    };
}

fn interval_regression() -> Check {
    let a = fixture("ex1.tns");
    let cases = [
        ([0.19_f64, 0.81], (0.7774, 0.7873)),
        ([0.187, 0.813], (0.7932, 0.7949)),
        ([0.1875, 0.8125], (0.7919, 0.7922)),
    ];
    let mut worst = 0.0_f64;
    for (x, (lo, hi)) in cases {
        // closed form of A x³ for this tensor
        let (x1, x2) = (x[0], x[1]);
        let f1 = 1.1 * x1.powi(3) + 0.25 * x1 * x1 * x2 + 0.25 * x2.powi(3);
        let f2 = 1.2 * x2.powi(3);
        let oracle = ((f1 / x1).min(f2 / x2), (f1 / x1).max(f2 / x2));
        let got = a.ratio_bounds(&x).map_err(|e| e.to_string())?;
        ensure!(
            (got.0 - oracle.0).abs() < 1e-14 && (got.1 - oracle.1).abs() < 1e-14,
            "x = {x:?}: {got:?} disagrees with closed form {oracle:?}"
        );
        let err = (got.0 - lo).abs().max((got.1 - hi).abs());
        ensure!(
            err <= 5e-5,
            "x = {x:?}: [{:.6}, {:.6}] vs [{lo}, {hi}]",
            got.0,
            got.1
        );
        worst = worst.max(err);
    }
    Ok(Verdict::Pass(format!(
        "three intervals, worst endpoint error {worst:.2e} ≤ 5e-5"
    )))
}

fn example_one_run() -> Result<zeig::SolveReport64, String> {
    let cfg = SolverConfig64 {
        tol: 1e-12,
        ..SolverConfig64::default()
    };
    solvers::run_mpni(&fixture("ex1.tns"), &[0.2, 0.8], &cfg).map_err(|e| e.to_string())
}

fn example_two_run() -> Result<zeig::SolveReport64, String> {
    let cfg = SolverConfig64 {
        tol: 1e-12,
        ..SolverConfig64::default()
    };
    solvers::run_mpni(&fixture("ex2.tns"), &[0.98, 0.01, 0.01], &cfg).map_err(|e| e.to_string())
}

fn eigenpair_regression() -> Check {
    let rep = example_one_run()?;
    ensure!(rep.status == Status::Converged, "status {}", rep.status);
    ensure!(rep.iterations <= 15, "{} iterations", rep.iterations);
    let dl = (rep.iterate.lambda - 0.7923).abs();
    let dx = dist1(&rep.iterate.x, &[0.1874, 0.8126]);
    ensure!(dl <= 5e-5, "|λ − 0.7923| = {dl:.2e}");
    ensure!(dx <= 1e-4, "‖x − x_ref‖₁ = {dx:.2e}");
    Ok(Verdict::Pass(format!(
        "{} iterations, λ = {:.6}, |Δλ| = {dl:.1e}, ‖Δx‖₁ = {dx:.1e}",
        rep.iterations, rep.iterate.lambda
    )))
}

fn singular_shift_case() -> Check {
    let a = fixture("ex2.tns");
    let x = [1.0, 0.0, 0.0];
    let cfg = BorderConfig::default();
    let t = a.jacobian(&x).map_err(|e| e.to_string())?;
    let shift = shift_diagnostics(0.0, &t, &cfg).1;
    ensure!(
        shift.singular,
        "shift not flagged singular (rcond {:e})",
        shift.rcond
    );

    let expected = Matrix::from_rows(&[
        [0.0, 0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0, 0.0],
        [0.0, -1.0, -1.0, 0.0],
        [1.0, 1.0, 1.0, 0.0],
    ]);
    let jf = BorderedSystem::new(0.0, &t, &x)
        .map_err(|e| e.to_string())?
        .assemble();
    ensure!(jf == expected, "bordered matrix {:?}", jf.to_rows());
    let bordered = bordered_diagnostics(0.0, &t, &x, &cfg).map_err(|e| e.to_string())?;
    ensure!(!bordered.singular, "bordered matrix flagged singular");

    let rep = example_two_run()?;
    ensure!(rep.status == Status::Converged, "status {}", rep.status);
    ensure!(
        rep.iterate.residual < 1e-12,
        "residual {:e}",
        rep.iterate.residual
    );
    let dx = dist1(&rep.iterate.x, &x);
    ensure!(
        dx < 1e-10 && rep.iterate.lambda.abs() < 1e-10,
        "ended at {:?}",
        rep.iterate
    );
    Ok(Verdict::Pass(format!(
        "shift rcond {:.1e}, bordered rcond {:.2}, MPNI residual {:.1e} after {} iterations",
        shift.rcond, bordered.rcond, rep.iterate.residual, rep.iterations
    )))
}

fn eigenvalue_outside_interval() -> Check {
    let (lo, hi) = fixture("ex1.tns")
        .ratio_bounds(&[0.1875, 0.8125])
        .map_err(|e| e.to_string())?;
    ensure!(hi < 0.7923, "λ_high = {hi}");
    ensure!(!(lo..=hi).contains(&0.7923), "0.7923 inside [{lo}, {hi}]");
    let lambda = example_one_run()?.iterate.lambda;
    ensure!(hi < lambda, "converged λ {lambda} not above λ_high {hi}");
    Ok(Verdict::Pass(format!(
        "[{lo:.6}, {hi:.6}] excludes 0.7923 (converged λ = {lambda:.6})"
    )))
}

/// Roots of 0.6t³ − 3.4t² + 1.95t − 0.25 in (0, 1) by scan and bisection.
fn cubic_roots() -> Vec<f64> {
    let p = |t: f64| ((0.6 * t - 3.4) * t + 1.95) * t - 0.25;
    let grid = 1000;
    let mut roots = Vec::new();
    for i in 0..grid {
        let (mut a, mut b) = (i as f64 / grid as f64, (i + 1) as f64 / grid as f64);
        if p(a) * p(b) > 0.0 {
            continue;
        }
        for _ in 0..200 {
            let c = 0.5 * (a + b);
            if p(a) * p(c) <= 0.0 {
                b = c;
            } else {
                a = c;
            }
        }
        roots.push(0.5 * (a + b));
    }
    roots
}

fn enumeration() -> Check {
    let set = harness::multi_start(&fixture("ex1.tns"), 50, 7, &SolverConfig64::default());
    ensure!(set.len() == 3, "{} eigenpairs found", set.len());
    for p in &set.pairs {
        ensure!(
            p.x.iter().all(|&v| v >= 0.0) && p.lambda >= 0.0,
            "pair not nonnegative: {:?}",
            p
        );
    }
    // x = [t, 1 − t] with t ∈ (0, 1) reduces to the cubic; x₂ = 0 gives ([1, 0], 1.1)
    let mut oracle: Vec<(Vec<f64>, f64)> = cubic_roots()
        .into_iter()
        .map(|t| (vec![t, 1.0 - t], 1.2 * (1.0 - t) * (1.0 - t)))
        .collect();
    oracle.push((vec![1.0, 0.0], 1.1));
    ensure!(oracle.len() == 3, "oracle found {} pairs", oracle.len());

    let mut worst = 0.0_f64;
    for (x, lambda) in &oracle {
        let nearest = set
            .pairs
            .iter()
            .map(|p| dist1(&p.x, x).max((p.lambda - lambda).abs()))
            .fold(f64::INFINITY, f64::min);
        ensure!(nearest <= 1e-3, "oracle pair ({x:?}, {lambda}) not found");
        worst = worst.max(nearest);
    }
    let reference_pair = set
        .pairs
        .iter()
        .any(|p| (p.lambda - 0.7923).abs() <= 5e-5 && dist1(&p.x, &[0.1874, 0.8126]) <= 1e-4);
    ensure!(reference_pair, "four-digit reference pair missing");
    let lambdas: Vec<String> = set
        .pairs
        .iter()
        .map(|p| format!("{:.4}", p.lambda))
        .collect();
    Ok(Verdict::Pass(format!(
        "3 pairs, λ = {}, worst oracle distance {worst:.1e}",
        lambdas.join(", ")
    )))
}

fn step_form_equivalence() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let cfg = BorderConfig::default();
    let (mut accepted, mut tried) = (0, 0);
    let mut worst = 0.0_f64;
    while accepted < 200 {
        tried += 1;
        ensure!(tried < 20_000, "only {accepted} well-conditioned instances");
        let m = if rng.random::<bool>() { 3 } else { 4 };
        let n = rng.random_range(2..=6);
        let a: Tensor64 = harness::random_tensor(m, n, 0.5, rng.random());
        let x = random_simplex(&mut rng, n);
        let (_, high) = a.ratio_bounds(&x).map_err(|e| e.to_string())?;
        let lambda = (m - 1) as f64 * high * (0.25 + 1.5 * rng.random::<f64>());
        let t = a.jacobian(&x).map_err(|e| e.to_string())?;
        let (_, sd) = shift_diagnostics(lambda, &t, &cfg);
        let bd = bordered_diagnostics(lambda, &t, &x, &cfg).map_err(|e| e.to_string())?;
        if sd.rcond < 1e-3 || bd.rcond < 1e-3 {
            continue;
        }
        accepted += 1;
        let b = newton_step_bordered(&a, &x, lambda, &cfg).map_err(|e| e.to_string())?;
        let c = newton_step_closed(&a, &x, lambda, &cfg).map_err(|e| e.to_string())?;
        let dx = b
            .x_hat
            .iter()
            .zip(&c.x_hat)
            .map(|(p, q)| (p - q).abs())
            .fold(0.0, f64::max);
        let dl = (b.lambda_hat - c.lambda_hat).abs();
        ensure!(
            dx <= 1e-10 && dl <= 1e-10,
            "m={m} n={n} λ={lambda}: Δx {dx:e}, Δλ {dl:e}"
        );
        worst = worst.max(dx).max(dl);
    }
    Ok(Verdict::Pass(format!(
        "200 instances (rcond ≥ 1e-3, {tried} drawn), worst difference {worst:.1e} ≤ 1e-10"
    )))
}

fn jacobian_property() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut worst_fd, mut worst_euler) = (0.0_f64, 0.0_f64);
    for _ in 0..100 {
        let m = rng.random_range(2..=4);
        let n = rng.random_range(1..=6);
        let a: Tensor64 = harness::random_tensor(m, n, 0.6, rng.random());
        let x = random_simplex(&mut rng, n);
        let fd = harness::fd_check(&a, &x, 1e-6).map_err(|e| e.to_string())?;
        ensure!(fd <= 1e-6, "m={m} n={n}: fd error {fd:e}");
        worst_fd = worst_fd.max(fd);

        let t = a.jacobian(&x).map_err(|e| e.to_string())?;
        let lhs = t.matvec(&x);
        let ax = a.apply(&x).map_err(|e| e.to_string())?;
        let scale = ax.iter().fold(0.0_f64, |s, v| s.max(v.abs())) * (m - 1) as f64;
        let err = lhs
            .iter()
            .zip(&ax)
            .map(|(l, r)| (l - (m - 1) as f64 * r).abs())
            .fold(0.0, f64::max);
        let rel = if scale > 0.0 { err / scale } else { err };
        ensure!(rel <= 1e-12, "m={m} n={n}: Euler identity off by {rel:e}");
        worst_euler = worst_euler.max(rel);
    }
    Ok(Verdict::Pass(format!(
        "100 instances, fd error ≤ {worst_fd:.1e}, Euler identity ≤ {worst_euler:.1e}"
    )))
}

fn quadratic_order() -> Check {
    let cfg = SolverConfig64::default();
    let rep1 = example_one_run()?;
    let reference = harness::converged_reference(&fixture("ex1.tns"), &rep1, &cfg)
        .map_err(|e| e.to_string())?;
    let est = harness::estimate_order(&rep1.trace, &reference).map_err(|e| e.to_string())?;
    ensure!(est.order >= 1.8, "example 1: p = {}", est.order);
    let first = format!(
        "example 1 p = {:.3} ({} usable errors)",
        est.order, est.usable
    );

    let ex2 = fixture("ex2.tns");
    let rep2 = example_two_run()?;
    let reference = harness::converged_reference(&ex2, &rep2, &cfg).map_err(|e| e.to_string())?;
    match harness::estimate_order(&rep2.trace, &reference) {
        Ok(e) => {
            ensure!(e.order >= 1.8, "{first}; example 2: p = {}", e.order);
            Ok(Verdict::Pass(format!(
                "{first}; example 2 p = {:.3}",
                e.order
            )))
        }
        Err(HarnessError::InsufficientData { usable }) => {
            // Blocked only if the run hit the eigenpair exactly: the last error
            // is zero and the one before it is still outside the fit window.
            let errs: Vec<f64> = rep2
                .trace
                .iter()
                .map(|s| dist1(&s.x, &reference.x) + (s.lambda - reference.lambda).abs())
                .collect();
            let k = errs.len();
            ensure!(
                k >= 2 && errs[k - 1] == 0.0 && errs[k - 2] >= harness::ORDER_WINDOW.1,
                "{first}; example 2: insufficient data without exact termination, errors {errs:?}"
            );
            Ok(Verdict::Unattainable(format!(
                "{first}; example 2 MPNI lands exactly on ([1,0,0], 0) at k = {}, errors {:?} leave {usable} points in the fit window",
                k - 1,
                errs.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>()
            )))
        }
        Err(e) => Ok(Verdict::Fail(format!("{first}; example 2: {e}"))),
    }
}

fn improvement_property() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..200 {
        let n = rng.random_range(1..=8);
        let u: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..2.0)).collect();
        let shift = (u.iter().sum::<f64>() - 1.0) / n as f64;
        let x_hat: Vec<f64> = u.iter().map(|v| v - shift).collect();
        // targets on the simplex, some with zero components
        let mut target = random_simplex(&mut rng, n);
        if n > 1 && rng.random::<bool>() {
            target[rng.random_range(0..n)] = 0.0;
            let s: f64 = target.iter().sum();
            target.iter_mut().for_each(|v| *v /= s);
        }
        let p = proj_simplex(&x_hat).map_err(|e| e.to_string())?;
        // a few ulps of slack: when x̂ > 0 the projection only divides by eᵀx̂ = 1 ± ulp
        let (before, after) = (dist1(&x_hat, &target), dist1(&p, &target));
        ensure!(
            after <= before + 8.0 * f64::EPSILON * before.max(1.0),
            "x̂ = {x_hat:?}, x* = {target:?}: {after} > {before}"
        );

        let lambda_hat: f64 = rng.random_range(-3.0..3.0);
        let lambda_star: f64 = rng.random_range(0.0..3.0);
        let clamped: f64 = lambda_hat.max(0.0);
        ensure!(
            (clamped - lambda_star).abs() <= (lambda_hat - lambda_star).abs(),
            "λ̂ = {lambda_hat}, λ* = {lambda_star}"
        );
    }
    Ok(Verdict::Pass(
        "200 instances, neither projection increases the error (8 ulp rounding allowance)".into(),
    ))
}

/// Least-squares residual ‖V c − d‖₂ / ‖d‖₂ via Householder QR of the
/// Vandermonde matrix `V` (columns 1, s, …, s^degree).
fn polyfit_residual(s: &[f64], d: &[f64], degree: usize) -> f64 {
    let (rows, cols) = (s.len(), degree + 1);
    let mut a: Vec<Vec<f64>> = s
        .iter()
        .map(|&v| (0..cols).map(|j| v.powi(j as i32)).collect())
        .collect();
    let mut b = d.to_vec();
    for j in 0..cols {
        let norm = (j..rows).map(|i| a[i][j] * a[i][j]).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if a[j][j] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (j..rows).map(|i| a[i][j]).collect();
        v[0] -= alpha;
        let vv: f64 = v.iter().map(|x| x * x).sum();
        if vv == 0.0 {
            continue;
        }
        for c in j..cols {
            let dot: f64 = (j..rows).map(|i| v[i - j] * a[i][c]).sum();
            for i in j..rows {
                a[i][c] -= 2.0 * dot / vv * v[i - j];
            }
        }
        let dot: f64 = (j..rows).map(|i| v[i - j] * b[i]).sum();
        for i in j..rows {
            b[i] -= 2.0 * dot / vv * v[i - j];
        }
    }
    // the residual lives in the trailing rows of Qᵀd
    let res = b[cols..].iter().map(|x| x * x).sum::<f64>().sqrt();
    let norm = d.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        res
    } else {
        res / norm
    }
}

fn determinant_degree() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst = 0.0_f64;
    for _ in 0..50 {
        let n = rng.random_range(1..=7);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let t = Matrix::from_rows(&rows);
        let x = random_simplex(&mut rng, n);
        // Chebyshev nodes on [−2, 2]
        let k = n + 2;
        let nodes: Vec<f64> = (0..k)
            .map(|i| 2.0 * ((2 * i + 1) as f64 * std::f64::consts::PI / (2 * k) as f64).cos())
            .collect();
        let dets: Vec<f64> = nodes
            .iter()
            .map(|&l| BorderedSystem::new(l, &t, &x).map(|b| b.determinant()))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        let res = polyfit_residual(&nodes, &dets, n - 1);
        ensure!(res <= 1e-8, "n = {n}: relative residual {res:e}");
        worst = worst.max(res);
    }
    Ok(Verdict::Pass(format!(
        "50 instances, worst relative residual of the degree n−1 fit {worst:.1e}"
    )))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("interval regression", interval_regression),
        ("eigenpair regression", eigenpair_regression),
        ("singular shift case", singular_shift_case),
        ("eigenvalue outside interval", eigenvalue_outside_interval),
        ("enumeration", enumeration),
        ("step-form equivalence", step_form_equivalence),
        ("jacobian property", jacobian_property),
        ("quadratic order", quadratic_order),
        ("improvement property", improvement_property),
        ("determinant degree", determinant_degree),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let (tag, detail) = match check() {
            Ok(Verdict::Pass(d)) => ("PASS", d),
            Ok(Verdict::Unattainable(d)) => ("UNATTAINABLE", d),
            Ok(Verdict::Fail(d)) => {
                failures += 1;
                ("FAIL", d)
            }
            Err(e) => {
                failures += 1;
                ("FAIL", format!("error: {e}"))
            }
        };
        println!("criterion {:>2} {tag:<12} {name}: {detail}", i + 1);
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}
