//! The `nonosc` command line.
//!
//! ```text
//! nonosc build    --problem simple --lambda 1e3 [--intervals 10] [--order 15] -o phase.pfn
//! nonosc eval     --phase phase.pfn --ivp 0,1000 --random 1000 --seed 7 [--format csv|json]
//! nonosc bench    --suite bessel --orders 1e2,1e4 [--jsonl rows.jsonl]
//! nonosc plotdata --phase phase.pfn [--what r,alpha,alpha-ct --c 1e5] [--samples 1000] --out-dir plots
//! ```
//!
//! Exit codes: 0 success, 2 bad input, 3 numerical failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::{format_table, run_suite, BenchOptions, Suite};
use crate::kummer::{build_phase, uniform_partition, CoefficientProblem, PhaseFunction, PhaseOptions};
use crate::phasefile::{read_phase, write_phase};
use crate::rng::random_points;
use crate::solve::{bvp_with_phase, from_initial_data, BoundaryConditions, Solution};
use crate::specfun::{
    bessel_problem, chebyshev_problem, legendre_problem, prolate_problem, simple_problem, DEFAULT_ORDER,
};
use crate::tabulated::TabulatedCoefficient;
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_BAD_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "nonosc", version, about = "Phase-function solver for y'' + lambda^2 q(t) y = 0")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Construct a phase function and write it to a phase file.
    Build(BuildArgs),
    /// Evaluate a solution given by initial or boundary conditions.
    Eval(EvalArgs),
    /// Run a benchmark suite.
    Bench(BenchArgs),
    /// Write sample grids of r, alpha and alpha - c t as CSV.
    Plotdata(PlotArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProblemArg {
    Simple,
    Chebyshev,
    Bessel,
    Legendre,
    Prolate,
    /// q = 1 on [a, b].
    Constant,
    /// q from --coef-file.
    Table,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[arg(long, value_enum)]
    pub problem: ProblemArg,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    /// Order for bessel and legendre.
    #[arg(long, allow_negative_numbers = true)]
    pub nu: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub c: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub chi: Option<f64>,
    /// Two-column `t q` table for `--problem table`.
    #[arg(long)]
    pub coef_file: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    pub a: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub b: Option<f64>,
    /// Use this many equispaced intervals instead of the problem's mesh.
    #[arg(long)]
    pub intervals: Option<usize>,
    #[arg(long)]
    pub order: Option<usize>,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub phase: PathBuf,
    /// `y,y'` at the left end (or at --t0).
    #[arg(long, allow_hyphen_values = true, value_delimiter = ',')]
    pub ivp: Option<Vec<f64>>,
    #[arg(long, allow_negative_numbers = true, requires = "ivp")]
    pub t0: Option<f64>,
    /// `y(a),y(b)`.
    #[arg(long, allow_hyphen_values = true, value_delimiter = ',', conflicts_with = "ivp")]
    pub dirichlet: Option<Vec<f64>>,
    /// `c1,c2,c3,c4,rhs_a,rhs_b` for `c1 y(a) + c2 y'(a) = rhs_a`, `c3 y(b) + c4 y'(b) = rhs_b`.
    #[arg(long, allow_hyphen_values = true, value_delimiter = ',', conflicts_with_all = ["ivp", "dirichlet"])]
    pub bc: Option<Vec<f64>>,
    /// Evaluation points, one per line.
    #[arg(long)]
    pub points: Option<PathBuf>,
    /// Evaluation points inline.
    #[arg(long, allow_hyphen_values = true, value_delimiter = ',', conflicts_with = "points")]
    pub t: Option<Vec<f64>>,
    /// Number of uniform random points.
    #[arg(long, conflicts_with_all = ["points", "t"])]
    pub random: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub suite: String,
    /// Comma list; `a..b` expands to decades.
    #[arg(long)]
    pub lambdas: Option<String>,
    #[arg(long)]
    pub orders: Option<String>,
    #[arg(long)]
    pub c: Option<String>,
    #[arg(long)]
    pub chi: Option<String>,
    #[arg(long, default_value_t = 1000)]
    pub points: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 100_000)]
    pub timing_evals: usize,
    /// Also write JSON lines here.
    #[arg(long)]
    pub jsonl: Option<PathBuf>,
    /// Print JSON lines instead of the table.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[arg(long)]
    pub phase: PathBuf,
    /// Any of r, alpha, alpha-ct.
    #[arg(long, value_delimiter = ',', default_value = "r,alpha")]
    pub what: Vec<String>,
    /// Slope for alpha-ct; defaults to lambda.
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

/// Failure with an exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = if e.is_numerical() { EXIT_NUMERICAL } else { EXIT_BAD_INPUT };
        CliError { code, message: e.to_string() }
    }
}

fn bad(message: impl Into<String>) -> CliError {
    CliError { code: EXIT_BAD_INPUT, message: message.into() }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `args` (program name first), runs the command and returns the exit
/// code. Diagnostics go to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                EXIT_BAD_INPUT
            } else {
                let _ = write!(out, "{}", e.render());
                EXIT_OK
            };
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Build(a) => cmd_build(&a, out),
        Command::Eval(a) => cmd_eval(&a, out),
        Command::Bench(a) => cmd_bench(&a, out),
        Command::Plotdata(a) => cmd_plotdata(&a, out),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.code
        }
    }
}

fn need(v: Option<f64>, name: &str, problem: &str) -> CliResult<f64> {
    v.ok_or_else(|| bad(format!("--{name} is required for --problem {problem}")))
}

fn check_lambda(lambda: f64) -> CliResult<f64> {
    if lambda.is_finite() && lambda > 0.0 {
        Ok(lambda)
    } else {
        Err(bad(format!("lambda must be positive, got {lambda}")))
    }
}

/// The coefficient problem and the default partition for `args`.
pub fn problem_from_args(args: &BuildArgs) -> CliResult<(CoefficientProblem, Vec<f64>, usize)> {
    let lambda = args.lambda.map(check_lambda).transpose()?;
    let nu = || args.nu.or(args.lambda).ok_or_else(|| bad("--nu is required"));
    let spec = match args.problem {
        ProblemArg::Simple => Some(simple_problem(need(lambda, "lambda", "simple")?)?),
        ProblemArg::Chebyshev => Some(chebyshev_problem(need(lambda, "lambda", "chebyshev")?)?),
        ProblemArg::Bessel => Some(bessel_problem(nu()?)?),
        ProblemArg::Legendre => Some(legendre_problem(nu()?)?),
        ProblemArg::Prolate => {
            Some(prolate_problem(need(args.c, "c", "prolate")?, need(args.chi, "chi", "prolate")?)?)
        }
        ProblemArg::Constant | ProblemArg::Table => None,
    };
    if let Some(spec) = spec {
        if args.a.is_some() || args.b.is_some() {
            return Err(bad("--a/--b only apply to --problem constant and table"));
        }
        return Ok((spec.problem, spec.breakpoints, spec.order));
    }
    let lambda = need(lambda, "lambda", "constant/table")?;
    let prob = if args.problem == ProblemArg::Constant {
        let (a, b) = (args.a.unwrap_or(0.0), args.b.unwrap_or(1.0));
        CoefficientProblem::new(|_| 1.0, lambda, a, b)?
    } else {
        let path = args.coef_file.as_ref().ok_or_else(|| bad("--coef-file is required for --problem table"))?;
        let table = TabulatedCoefficient::from_file(path)?;
        let (a, b) = (args.a.unwrap_or(table.a()), args.b.unwrap_or(table.b()));
        if a < table.a() || b > table.b() {
            return Err(bad(format!("[{a}, {b}] is not covered by the table [{}, {}]", table.a(), table.b())));
        }
        CoefficientProblem::new(move |t| table.eval(t), lambda, a, b)?
    };
    let bp = uniform_partition(prob.a(), prob.b(), 10);
    Ok((prob, bp, DEFAULT_ORDER))
}

pub fn cmd_build(args: &BuildArgs, out: &mut dyn Write) -> CliResult<()> {
    let (prob, mut breakpoints, mut order) = problem_from_args(args)?;
    if let Some(n) = args.intervals {
        if n == 0 {
            return Err(bad("--intervals must be positive"));
        }
        breakpoints = uniform_partition(prob.a(), prob.b(), n);
    }
    if let Some(m) = args.order {
        order = m;
    }
    let start = Instant::now();
    let phase = build_phase(&prob, &PhaseOptions::new(breakpoints, order))?;
    let secs = start.elapsed().as_secs_f64();
    write_phase(&args.output, &phase)?;
    let _ = writeln!(
        out,
        "wrote {} ({} intervals, order {}, lambda {:e}, [{:e}, {:e}], {} rhs evaluations, {:.3e} s)",
        args.output.display(),
        phase.breakpoints().len() - 1,
        phase.order(),
        phase.lambda(),
        phase.a(),
        phase.b(),
        phase.rhs_evals,
        secs
    );
    Ok(())
}

fn read_points(path: &Path) -> CliResult<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .map(|(i, l)| (i, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .map(|(i, l)| l.parse::<f64>().map_err(|_| bad(format!("{}:{}: not a number: {l:?}", path.display(), i + 1))))
        .collect()
}

fn values(v: &[f64], n: usize, flag: &str) -> CliResult<()> {
    if v.len() == n {
        Ok(())
    } else {
        Err(bad(format!("--{flag} takes {n} comma-separated values, got {}", v.len())))
    }
}

fn solution_for(args: &EvalArgs, phase: Arc<PhaseFunction>) -> CliResult<Solution> {
    if let Some(v) = &args.ivp {
        values(v, 2, "ivp")?;
        let t0 = args.t0.unwrap_or(phase.a());
        return Ok(from_initial_data(phase, t0, v[0], v[1])?);
    }
    let bc = if let Some(v) = &args.dirichlet {
        values(v, 2, "dirichlet")?;
        BoundaryConditions::dirichlet(v[0], v[1])
    } else if let Some(v) = &args.bc {
        values(v, 6, "bc")?;
        BoundaryConditions { c1: v[0], c2: v[1], c3: v[2], c4: v[3], rhs_a: v[4], rhs_b: v[5] }
    } else {
        return Err(bad("one of --ivp, --dirichlet or --bc is required"));
    };
    Ok(bvp_with_phase(phase, &bc)?)
}

pub fn cmd_eval(args: &EvalArgs, out: &mut dyn Write) -> CliResult<()> {
    let phase = Arc::new(read_phase(&args.phase)?);
    let mut points = if let Some(p) = &args.points {
        read_points(p)?
    } else if let Some(t) = &args.t {
        t.clone()
    } else if let Some(n) = args.random {
        random_points(args.seed, n, phase.a(), phase.b())
    } else {
        return Err(bad("one of --points, --t or --random is required"));
    };
    let sol = solution_for(args, phase)?;
    points.sort_by(f64::total_cmp);
    let rows: Vec<(f64, f64, f64)> = points
        .iter()
        .map(|&t| sol.eval(t).map(|(y, yp)| (t, y, yp)))
        .collect::<Result<_>>()?;
    let mut text = String::new();
    match args.format {
        Format::Csv => {
            text.push_str("t,y,yprime\n");
            for (t, y, yp) in &rows {
                let _ = writeln!(text, "{t:e},{y:e},{yp:e}");
            }
        }
        Format::Json => {
            let v: Vec<serde_json::Value> =
                rows.iter().map(|&(t, y, yp)| serde_json::json!({"t": t, "y": y, "yprime": yp})).collect();
            text = serde_json::to_string(&v).expect("rows serialize");
            text.push('\n');
        }
    }
    emit(&args.output, out, &text)
}

fn emit(path: &Option<PathBuf>, out: &mut dyn Write, text: &str) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::io(p, e).into()),
        None => out.write_all(text.as_bytes()).map_err(|e| bad(e.to_string())),
    }
}

/// Comma-separated numbers; `a..b` stands for `a, 10a, 100a, ...` up to `b`.
pub fn parse_list(s: &str) -> CliResult<Vec<f64>> {
    let num = |x: &str| x.trim().parse::<f64>().map_err(|_| bad(format!("not a number: {x:?}")));
    let mut out = Vec::new();
    for item in s.split(',').filter(|x| !x.trim().is_empty()) {
        if let Some((lo, hi)) = item.split_once("..") {
            let (lo, hi) = (num(lo)?, num(hi)?);
            if !(lo > 0.0 && hi >= lo) {
                return Err(bad(format!("bad range {item:?}")));
            }
            let mut k = 0;
            loop {
                let v = lo * 10f64.powi(k);
                if v > hi * (1.0 + 1e-12) {
                    break;
                }
                out.push(v);
                k += 1;
            }
        } else {
            out.push(num(item)?);
        }
    }
    if out.is_empty() {
        return Err(bad("empty parameter list"));
    }
    Ok(out)
}

pub fn cmd_bench(args: &BenchArgs, out: &mut dyn Write) -> CliResult<()> {
    let suite = Suite::parse(&args.suite).ok_or_else(|| {
        bad(format!("unknown suite {:?} (simple, chebyshev, bessel, legendre, prolate)", args.suite))
    })?;
    let (params, chis) = match suite {
        Suite::Simple | Suite::Chebyshev => {
            (parse_list(args.lambdas.as_deref().ok_or_else(|| bad("--lambdas is required"))?)?, vec![])
        }
        Suite::Bessel | Suite::Legendre => {
            (parse_list(args.orders.as_deref().ok_or_else(|| bad("--orders is required"))?)?, vec![])
        }
        Suite::Prolate => {
            let c = parse_list(args.c.as_deref().ok_or_else(|| bad("--c is required"))?)?;
            let chi = parse_list(args.chi.as_deref().ok_or_else(|| bad("--chi is required"))?)?;
            if c.len() != chi.len() {
                return Err(bad("--c and --chi need the same number of values"));
            }
            (c, chi)
        }
    };
    let opts = BenchOptions { points: args.points, seed: args.seed, timing_evals: args.timing_evals };
    let rows = run_suite(suite, &params, &chis, &opts);
    let lines: String = rows.iter().map(|r| r.to_json_line() + "\n").collect();
    if let Some(p) = &args.jsonl {
        std::fs::write(p, &lines).map_err(|e| Error::io(p, e))?;
    }
    let text = if args.json { lines } else { format_table(&rows) };
    out.write_all(text.as_bytes()).map_err(|e| bad(e.to_string()))?;
    if rows.iter().any(|r| r.failed()) {
        return Err(CliError { code: EXIT_NUMERICAL, message: "some rows failed".into() });
    }
    Ok(())
}

pub fn cmd_plotdata(args: &PlotArgs, out: &mut dyn Write) -> CliResult<()> {
    let phase = read_phase(&args.phase)?;
    if args.samples < 2 {
        return Err(bad("--samples must be at least 2"));
    }
    for w in &args.what {
        if !["r", "alpha", "alpha-ct"].contains(&w.as_str()) {
            return Err(bad(format!("unknown quantity {w:?} (r, alpha, alpha-ct)")));
        }
    }
    let grid = uniform_partition(phase.a(), phase.b(), args.samples - 1);
    let c = args.c.unwrap_or(phase.lambda());
    std::fs::create_dir_all(&args.out_dir).map_err(|e| Error::io(&args.out_dir, e))?;
    for w in &args.what {
        let (file, column) = match w.as_str() {
            "r" => ("r.csv", "r"),
            "alpha" => ("alpha.csv", "alpha"),
            _ => ("alpha_minus_ct.csv", "alpha_minus_ct"),
        };
        let mut text = format!("t,{column}\n");
        for &t in &grid {
            let v = match w.as_str() {
                "r" => phase.r().eval(t)?,
                "alpha" => phase.eval(t)?.alpha,
                _ => phase.eval(t)?.alpha - c * t,
            };
            let _ = writeln!(text, "{t:e},{v:e}");
        }
        let path = args.out_dir.join(file);
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        let _ = writeln!(out, "wrote {}", path.display());
    }
    Ok(())
}
