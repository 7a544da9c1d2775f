//! Benchmark suites: build a phase, time it, evaluate at seeded random
//! points and compare with an oracle that does not use phase functions.
//!
//! | suite     | parameter | points        | oracle                                  | error column                  |
//! |-----------|-----------|---------------|-----------------------------------------|-------------------------------|
//! | simple    | `λ`       | `[-1, 1]`     | direct collocation march of `y, y'`     | max abs error of `y`          |
//! | chebyshev | `λ`       | whole domain  | `λ (arccos a - arccos t)`               | sup relative phase difference |
//! | bessel    | `n`       | whole domain  | Miller recurrence                       | max abs error of `J_n`        |
//! | legendre  | `n`       | `[-0.9, 0.9]` | three-term recurrence                   | max abs error of `P_n`        |
//! | prolate   | `(c, χ)`  | whole domain  | none                                    | relative Kummer residual      |

use std::fmt::Write as _;
use std::hint::black_box;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::chebcore::PiecewiseChebyshev;
use crate::kummer::{phase_residual, uniform_partition, PhaseFunction};
use crate::rng::random_points;
use crate::solve::{from_initial_data, Solution};
use crate::specfun::{
    bessel_problem, bessel_reference, chebyshev_exact_phase, chebyshev_problem, legendre_problem,
    legendre_reference, prolate_problem, simple_coefficient, simple_problem, zero_count_estimate, BesselEvaluator,
    LegendreEvaluator, ProblemSpec,
};
use crate::stiffode::{march, Direction, IvpConfig, SystemFn};
use crate::{Error, Result};

/// Largest `λ` for which the simple suite marches its oracle.
pub const SIMPLE_ORACLE_MAX_LAMBDA: f64 = 1e4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Simple,
    Chebyshev,
    Bessel,
    Legendre,
    Prolate,
}

impl Suite {
    pub fn name(&self) -> &'static str {
        match self {
            Suite::Simple => "simple",
            Suite::Chebyshev => "chebyshev",
            Suite::Bessel => "bessel",
            Suite::Legendre => "legendre",
            Suite::Prolate => "prolate",
        }
    }

    pub fn parse(s: &str) -> Option<Suite> {
        [Suite::Simple, Suite::Chebyshev, Suite::Bessel, Suite::Legendre, Suite::Prolate]
            .into_iter()
            .find(|x| x.name() == s)
    }

    pub fn metric(&self) -> &'static str {
        match self {
            Suite::Chebyshev => "rel_phase_diff",
            Suite::Prolate => "rel_residual",
            _ => "max_abs_error",
        }
    }
}

/// One benchmark row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub problem: String,
    /// `λ`, `n`, or `c` for the prolate suite.
    pub parameter: f64,
    pub construction_secs: f64,
    /// Average time of one phase evaluation.
    pub eval_secs: f64,
    pub metric: String,
    /// `None` when no oracle was run.
    pub error: Option<f64>,
    pub points: usize,
    pub partition: String,
    pub rhs_evals: usize,
    /// Average time of one oracle evaluation (bessel and legendre).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub oracle_secs: Option<f64>,
    /// `(α(b) - α(a))/π` (prolate).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub zero_count: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

impl BenchReport {
    fn empty(suite: Suite, parameter: f64, points: usize) -> Self {
        BenchReport {
            problem: suite.name().into(),
            parameter,
            construction_secs: 0.0,
            eval_secs: 0.0,
            metric: suite.metric().into(),
            error: None,
            points,
            partition: String::new(),
            rhs_evals: 0,
            oracle_secs: None,
            zero_count: None,
            note: None,
        }
    }

    pub fn failed(&self) -> bool {
        self.note.as_deref().is_some_and(|n| n.starts_with("failed"))
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchOptions {
    pub points: usize,
    pub seed: u64,
    /// Evaluations per timing measurement, at least.
    pub timing_evals: usize,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions { points: 1000, seed: 42, timing_evals: 100_000 }
    }
}

/// Average seconds per call of `f` over `points`, cycling through them until
/// `at_least` calls have been made.
pub fn time_per_eval(points: &[f64], at_least: usize, mut f: impl FnMut(f64) -> f64) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    let rounds = at_least.div_ceil(points.len()).max(1);
    let start = Instant::now();
    for _ in 0..rounds {
        for &t in points {
            black_box(f(black_box(t)));
        }
    }
    start.elapsed().as_secs_f64() / (rounds * points.len()) as f64
}

fn timed<T>(f: impl FnOnce() -> Result<T>) -> Result<(T, f64)> {
    let start = Instant::now();
    let v = f()?;
    Ok((v, start.elapsed().as_secs_f64()))
}

fn build(spec: &ProblemSpec, row: &mut BenchReport) -> Result<Arc<PhaseFunction>> {
    let (phase, secs) = timed(|| spec.build_phase())?;
    row.construction_secs = secs;
    row.partition = spec.partition_description();
    row.rhs_evals = phase.rhs_evals;
    Ok(Arc::new(phase))
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// `y` of `y'' + λ² q y = 0`, `y(-1) = 0`, `y'(-1) = λ` with the simple
/// coefficient, by marching the oscillatory first-order system directly on
/// `max(10, 2λ)` intervals of order 15.
pub fn simple_reference(lambda: f64) -> Result<PiecewiseChebyshev> {
    let intervals = (2.0 * lambda).ceil().max(10.0) as usize;
    let bp = uniform_partition(-1.0, 1.0, intervals);
    let l2 = lambda * lambda;
    let f = SystemFn::new(2, move |t: f64, y: &[f64], dy: &mut [f64]| {
        dy[0] = y[1];
        dy[1] = -l2 * simple_coefficient(t) * y[0];
    });
    let sol = march(&f, &bp, 15, &[0.0, lambda], Direction::Forward, &IvpConfig::for_order(15))?;
    Ok(sol.components.into_iter().next().expect("two components"))
}

/// The simple-suite initial value problem solved through `phase`.
pub fn simple_solution(phase: Arc<PhaseFunction>) -> Result<Solution> {
    let lambda = phase.lambda();
    from_initial_data(phase, -1.0, 0.0, lambda)
}

fn simple_row(lambda: f64, opts: &BenchOptions, row: &mut BenchReport) -> Result<()> {
    let spec = simple_problem(lambda)?;
    let phase = build(&spec, row)?;
    let sol = simple_solution(phase.clone())?;
    let pts = random_points(opts.seed, opts.points, -1.0, 1.0);
    let ys: Vec<f64> = pts.iter().map(|&t| sol.eval(t).map(|v| v.0)).collect::<Result<_>>()?;
    row.eval_secs = time_per_eval(&pts, opts.timing_evals, |t| sol.eval(t).map(|v| v.0).unwrap_or(f64::NAN));
    if lambda <= SIMPLE_ORACLE_MAX_LAMBDA {
        let oracle = simple_reference(lambda)?;
        let want: Vec<f64> = pts.iter().map(|&t| oracle.eval(t)).collect::<Result<_>>()?;
        row.error = Some(max_abs_diff(&ys, &want));
    } else {
        row.note = Some(format!("oracle skipped above lambda = {SIMPLE_ORACLE_MAX_LAMBDA:e}"));
    }
    Ok(())
}

/// `max |α - α_exact| / max |α_exact|` over `points`.
pub fn chebyshev_phase_difference(phase: &PhaseFunction, points: &[f64]) -> Result<f64> {
    let (a, lambda) = (phase.a(), phase.lambda());
    let (mut num, mut den) = (0.0f64, 0.0f64);
    for &t in points {
        let exact = chebyshev_exact_phase(lambda, a, t);
        num = num.max((phase.eval(t)?.alpha - exact).abs());
        den = den.max(exact.abs());
    }
    Ok(num / den)
}

fn chebyshev_row(lambda: f64, opts: &BenchOptions, row: &mut BenchReport) -> Result<()> {
    let spec = chebyshev_problem(lambda)?;
    let phase = build(&spec, row)?;
    let pts = random_points(opts.seed, opts.points, phase.a(), phase.b());
    row.eval_secs = time_per_eval(&pts, opts.timing_evals, |t| phase.eval(t).map(|v| v.alpha).unwrap_or(f64::NAN));
    row.error = Some(chebyshev_phase_difference(&phase, &pts)?);
    Ok(())
}

fn order_of(v: f64) -> Result<usize> {
    if v.is_finite() && v >= 0.0 && v.fract() == 0.0 {
        Ok(v as usize)
    } else {
        Err(Error::InvalidOrder(format!("{v} is not a nonnegative integer")))
    }
}

fn bessel_row(nu: f64, opts: &BenchOptions, row: &mut BenchReport) -> Result<()> {
    let n = order_of(nu)?;
    let spec = bessel_problem(nu)?;
    let phase = build(&spec, row)?;
    let ev = BesselEvaluator::from_phase(n, phase)?;
    let (lo, hi) = ev.domain();
    let pts = random_points(opts.seed, opts.points, lo, hi);
    let got: Vec<f64> = pts.iter().map(|&t| ev.eval(t)).collect::<Result<_>>()?;
    let want: Vec<f64> = pts.iter().map(|&t| bessel_reference(n, t)).collect::<Result<_>>()?;
    row.error = Some(max_abs_diff(&got, &want));
    row.eval_secs = time_per_eval(&pts, opts.timing_evals, |t| ev.eval(t).unwrap_or(f64::NAN));
    row.oracle_secs = Some(time_per_eval(&pts, 1, |t| bessel_reference(n, t).unwrap_or(f64::NAN)));
    Ok(())
}

fn legendre_row(nu: f64, opts: &BenchOptions, row: &mut BenchReport) -> Result<()> {
    let n = order_of(nu)?;
    let spec = legendre_problem(nu)?;
    let phase = build(&spec, row)?;
    let ev = LegendreEvaluator::from_phase(n, phase)?;
    let pts = random_points(opts.seed, opts.points, -0.9, 0.9);
    let got: Vec<f64> = pts.iter().map(|&t| ev.eval(t)).collect::<Result<_>>()?;
    let want: Vec<f64> = pts.iter().map(|&t| legendre_reference(n, t)).collect();
    row.error = Some(max_abs_diff(&got, &want));
    row.eval_secs = time_per_eval(&pts, opts.timing_evals, |t| ev.eval(t).unwrap_or(f64::NAN));
    row.oracle_secs = Some(time_per_eval(&pts, 1, |t| legendre_reference(n, t)));
    Ok(())
}

fn prolate_row(c: f64, chi: f64, opts: &BenchOptions, row: &mut BenchReport) -> Result<()> {
    let spec = prolate_problem(c, chi)?;
    let phase = build(&spec, row)?;
    let pts = random_points(opts.seed, opts.points, phase.a(), phase.b());
    let (res, scale) = phase_residual(&spec.problem, &phase, &pts)?;
    row.error = Some(res / scale);
    row.zero_count = Some(zero_count_estimate(&phase)?);
    row.eval_secs = time_per_eval(&pts, opts.timing_evals, |t| phase.eval(t).map(|v| v.alpha).unwrap_or(f64::NAN));
    Ok(())
}

/// Runs one row. Failures are recorded in `note` rather than returned.
pub fn run_row(suite: Suite, parameter: f64, chi: Option<f64>, opts: &BenchOptions) -> BenchReport {
    let mut row = BenchReport::empty(suite, parameter, opts.points);
    let outcome = match suite {
        Suite::Simple => simple_row(parameter, opts, &mut row),
        Suite::Chebyshev => chebyshev_row(parameter, opts, &mut row),
        Suite::Bessel => bessel_row(parameter, opts, &mut row),
        Suite::Legendre => legendre_row(parameter, opts, &mut row),
        Suite::Prolate => match chi {
            Some(chi) => prolate_row(parameter, chi, opts, &mut row),
            None => Err(Error::InvalidParameters("prolate rows need chi".into())),
        },
    };
    if let Err(e) = outcome {
        row.note = Some(format!("failed: {e}"));
    }
    row
}

/// Runs every parameter of a suite. For the prolate suite `chis[i]` goes
/// with `params[i]`.
pub fn run_suite(suite: Suite, params: &[f64], chis: &[f64], opts: &BenchOptions) -> Vec<BenchReport> {
    params
        .iter()
        .enumerate()
        .map(|(i, &p)| run_row(suite, p, chis.get(i).copied(), opts))
        .collect()
}

fn sci(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x:.3e}"))
}

/// Aligned plain-text table.
pub fn format_table(rows: &[BenchReport]) -> String {
    let header = [
        "problem", "parameter", "build (s)", "eval (s)", "oracle (s)", "metric", "error", "points", "partition",
        "note",
    ];
    let body: Vec<[String; 10]> = rows
        .iter()
        .map(|r| {
            [
                r.problem.clone(),
                format!("{:e}", r.parameter),
                format!("{:.3e}", r.construction_secs),
                format!("{:.3e}", r.eval_secs),
                sci(r.oracle_secs),
                r.metric.clone(),
                sci(r.error),
                r.points.to_string(),
                r.partition.clone(),
                match (r.zero_count, &r.note) {
                    (_, Some(n)) => n.clone(),
                    (Some(z), None) => format!("zeros ~ {z:.2}"),
                    (None, None) => String::new(),
                },
            ]
        })
        .collect();
    let mut width = header.map(str::len);
    for row in &body {
        for (w, cell) in width.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let mut line = |cells: &[String]| {
        let mut s = String::new();
        for (i, (cell, w)) in cells.iter().zip(&width).enumerate() {
            if i > 0 {
                s.push_str("  ");
            }
            let _ = write!(s, "{cell:<w$}");
        }
        out.push_str(s.trim_end());
        out.push('\n');
    };
    line(&header.map(String::from));
    for row in &body {
        line(row);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> BenchOptions {
        BenchOptions { points: 50, seed: 3, timing_evals: 100 }
    }

    #[test]
    fn suite_names_round_trip() {
        for s in ["simple", "chebyshev", "bessel", "legendre", "prolate"] {
            assert_eq!(Suite::parse(s).unwrap().name(), s);
        }
        assert_eq!(Suite::parse("airy"), None);
    }

    #[test]
    fn simple_row_small_lambda() {
        let row = run_row(Suite::Simple, 10.0, None, &quick());
        assert!(row.note.is_none(), "{row:?}");
        assert!(row.error.unwrap() <= 1e-11);
        assert!(row.construction_secs > 0.0 && row.eval_secs > 0.0);
        assert_eq!(row.points, 50);
    }

    #[test]
    fn failures_are_annotated() {
        let row = run_row(Suite::Bessel, 12.5, None, &quick());
        assert!(row.failed());
        let row = run_row(Suite::Prolate, 1e4, Some(1e7), &quick());
        assert!(row.failed());
    }

    #[test]
    fn json_and_table() {
        let row = run_row(Suite::Chebyshev, 100.0, None, &quick());
        let back: BenchReport = serde_json::from_str(&row.to_json_line()).unwrap();
        assert_eq!(back, row);
        let table = format_table(&[row.clone(), row]);
        assert_eq!(table.lines().count(), 3);
        assert!(table.starts_with("problem"));
    }
}
