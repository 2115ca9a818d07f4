//! The `zeig` command line.
//!
//! Exit codes: 0 when the run converged (or the check passed), 1 for input
//! errors, 2 when a solver ran but did not converge.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::harness::{attach_order, multi_start, simplex_starts};
use crate::report;
use crate::solvers::{self, Method, SolverConfig, SolverError};
use crate::tensor::format;
use crate::tensor::Tensor;

#[derive(Debug, Parser)]
#[command(
    name = "zeig",
    version,
    about = "Nonnegative Z-eigenpairs of nonnegative tensors"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one solver from one start.
    Solve(SolveArgs),
    /// Run many random starts and list the distinct eigenpairs found.
    Sweep(SweepArgs),
    /// Validate a tensor file and print its shape and ratio bounds.
    Check(CheckArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Tensor file.
    #[arg(long)]
    pub tensor: PathBuf,
    #[arg(long, value_enum, default_value_t = Method::Mpni)]
    pub method: Method,
    /// Residual tolerance.
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[arg(long, default_value_t = 100)]
    pub max_iter: usize,
    /// PNI β schedule; the last value repeats.
    #[arg(long, value_delimiter = ',')]
    pub beta: Vec<f64>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub common: Common,
    /// Start vector: comma-separated entries, `uniform`, or `random:<seed>`.
    #[arg(long, default_value = "uniform")]
    pub x0: String,
    /// Initial λ for plain Newton (defaults to the upper ratio bound).
    #[arg(long, allow_negative_numbers = true)]
    pub lambda0: Option<f64>,
    /// Include the per-step trace.
    #[arg(long)]
    pub trace: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub starts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub tensor: PathBuf,
}

/// What a command produced: an exit code and the two output streams.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(code: i32, stdout: String) -> Self {
        Outcome {
            code,
            stdout,
            stderr: String::new(),
        }
    }

    fn input_error(message: impl std::fmt::Display) -> Self {
        Outcome {
            code: 1,
            stdout: String::new(),
            stderr: format!("error: {message}\n"),
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, S>(args: I) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    code: 1,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Outcome::ok(0, text)
            };
        }
    };
    match cli.command {
        Command::Solve(a) => cmd_solve(&a),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::Check(a) => cmd_check(&a),
    }
}

fn load(path: &PathBuf) -> Result<Tensor<f64>, Outcome> {
    format::read::<f64>(path).map_err(|e| Outcome::input_error(format!("{}: {e}", path.display())))
}

fn config(c: &Common) -> Result<SolverConfig<f64>, Outcome> {
    let cfg = SolverConfig {
        method: c.method,
        tol: c.tol,
        max_iter: c.max_iter,
        beta_schedule: c.beta.clone(),
        ..SolverConfig::default()
    };
    cfg.validate().map_err(Outcome::input_error)?;
    Ok(cfg)
}

/// Resolves the `--x0` argument for a tensor of dimension `n`.
pub fn parse_start(arg: &str, n: usize) -> Result<Vec<f64>, String> {
    if arg == "uniform" {
        return Ok(vec![1.0 / n as f64; n]);
    }
    if let Some(seed) = arg.strip_prefix("random:") {
        let seed: u64 = seed
            .parse()
            .map_err(|_| format!("bad seed in `--x0 {arg}`"))?;
        return Ok(simplex_starts::<f64>(n, 1, seed).remove(0));
    }
    let x = arg
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| format!("bad entry `{t}` in --x0"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if x.len() != n {
        return Err(format!(
            "--x0 has {} entries, tensor dimension is {n}",
            x.len()
        ));
    }
    Ok(x)
}

fn is_input_error(e: &SolverError) -> bool {
    matches!(
        e,
        SolverError::InvalidConfig(_) | SolverError::InvalidStart(_) | SolverError::Tensor(_)
    )
}

fn cmd_solve(a: &SolveArgs) -> Outcome {
    let (tensor, cfg) = match load(&a.common.tensor).and_then(|t| Ok((t, config(&a.common)?))) {
        Ok(v) => v,
        Err(o) => return o,
    };
    let x0 = match parse_start(&a.x0, tensor.dim()) {
        Ok(x) => x,
        Err(e) => return Outcome::input_error(e),
    };
    let mut rep = match solvers::solve(&tensor, &x0, a.lambda0, &cfg) {
        Ok(r) => r,
        Err(e) if is_input_error(&e) => return Outcome::input_error(e),
        Err(e) => {
            return Outcome {
                code: 2,
                stdout: String::new(),
                stderr: format!("error: {e}\n"),
            }
        }
    };
    attach_order(&tensor, &mut rep, &cfg);
    let body = match a.common.format {
        Format::Json => pretty(&report::solve_json(&rep, a.trace)),
        Format::Csv => report::trace_csv(&rep),
        Format::Text => report::solve_text(&rep, a.trace),
    };
    Outcome::ok(if rep.converged() { 0 } else { 2 }, body)
}

fn cmd_sweep(a: &SweepArgs) -> Outcome {
    if a.starts == 0 {
        return Outcome::input_error("--starts must be at least 1");
    }
    let (tensor, cfg) = match load(&a.common.tensor).and_then(|t| Ok((t, config(&a.common)?))) {
        Ok(v) => v,
        Err(o) => return o,
    };
    let set = multi_start(&tensor, a.starts, a.seed, &cfg);
    let body = match a.common.format {
        Format::Json => pretty(&report::sweep_json(&set, a.seed)),
        Format::Csv => report::sweep_csv(&set),
        Format::Text => report::sweep_text(&set),
    };
    Outcome::ok(if set.is_empty() { 2 } else { 0 }, body)
}

fn cmd_check(a: &CheckArgs) -> Outcome {
    let tensor = match load(&a.tensor) {
        Ok(t) => t,
        Err(o) => return o,
    };
    let n = tensor.dim();
    let x = vec![1.0 / n as f64; n];
    let (low, high) = match tensor.ratio_bounds(&x) {
        Ok(b) => b,
        Err(e) => return Outcome::input_error(e),
    };
    let out = format!(
        "m={} n={} nnz={}\nratio bounds at uniform x: [{:.16e}, {:.16e}]\n",
        tensor.order(),
        n,
        tensor.nnz(),
        low,
        high,
    );
    Outcome::ok(0, out)
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}
