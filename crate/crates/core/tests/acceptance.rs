//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero on failure.

use std::process::ExitCode;
use std::time::Instant;

use nonosc::bench::{run_row, BenchOptions, BenchReport, Suite};
use nonosc::chebcore::{barycentric_eval, cheb_grid, spectral_integration_matrix};
use nonosc::kummer::{build_phase, CoefficientProblem, PhaseFunction, PhaseOptions};
use nonosc::rng::random_points;
use nonosc::solve::basis_eval;
use nonosc::specfun::{bessel_problem, chebyshev_problem, legendre_problem, simple_problem};
use nonosc::stiffode::{march, solve_ivp_interval, Direction, IvpConfig, SystemFn};

struct Report {
    failures: usize,
}

impl Report {
    fn line(&mut self, id: u32, name: &str, pass: bool, detail: String) {
        if !pass {
            self.failures += 1;
        }
        println!("[{}] {id}. {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    }
}

fn opts() -> BenchOptions {
    BenchOptions { points: 1000, seed: 42, timing_evals: 100_000 }
}

fn row_error(row: &BenchReport) -> f64 {
    match (&row.note, row.error) {
        (Some(n), _) if row.failed() => {
            println!("    {} {}: {n}", row.problem, row.parameter);
            f64::INFINITY
        }
        (_, Some(e)) => e,
        _ => f64::INFINITY,
    }
}

fn simple_accuracy(rep: &mut Report) {
    let errs: Vec<f64> = [10.0, 100.0, 1000.0].iter().map(|&l| row_error(&run_row(Suite::Simple, l, None, &opts()))).collect();
    let pass = errs.iter().all(|&e| e <= 1e-11);
    rep.line(1, "simple problem vs direct march, lambda 1e1..1e3 (<= 1e-11)", pass, list(&errs));
}

fn list(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| format!("{x:.2e}")).collect();
    format!("[{}]", items.join(", "))
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn frequency_independence(rep: &mut Report) {
    let time = |lambda: f64| {
        let spec = simple_problem(lambda).unwrap();
        let mut evals = 0;
        let secs = median(
            (0..7)
                .map(|_| {
                    let start = Instant::now();
                    let phase = spec.build_phase().unwrap();
                    evals = phase.rhs_evals;
                    start.elapsed().as_secs_f64()
                })
                .collect(),
        );
        (secs, evals)
    };
    time(10.0);
    let (t1, e1) = time(10.0);
    let (t7, e7) = time(1e7);
    let ratio = t7 / t1;
    let pass = ratio <= 2.0 && e1 == e7;
    rep.line(
        2,
        "construction time lambda 1e7 vs 1e1 (ratio <= 2, equal rhs counts)",
        pass,
        format!("{t1:.3e} s vs {t7:.3e} s, ratio {ratio:.2}, rhs evals {e1} / {e7}"),
    );
}

fn chebyshev(rep: &mut Report) {
    let d: Vec<f64> = [10.0, 100.0, 1000.0].iter().map(|&l| row_error(&run_row(Suite::Chebyshev, l, None, &opts()))).collect();
    let pass = d[0] <= 1e-4 && d.windows(2).all(|w| w[1] < w[0]) && d[2] <= 1e-9;
    rep.line(3, "chebyshev relative phase difference (1e-4 at 10, decreasing, 1e-9 at 1000)", pass, list(&d));
}

fn bessel(rep: &mut Report) {
    let rows: Vec<BenchReport> = [1e2, 1e3, 1e4].iter().map(|&n| run_row(Suite::Bessel, n, None, &opts())).collect();
    let errs: Vec<f64> = rows.iter().map(row_error).collect();
    let last = &rows[2];
    let speedup = last.oracle_secs.unwrap_or(0.0) / last.eval_secs;
    let pass = errs.iter().all(|&e| e <= 1e-11) && speedup >= 100.0;
    rep.line(
        4,
        "bessel n = 1e2..1e4 (<= 1e-11, >= 100x faster than recurrence at 1e4)",
        pass,
        format!("{}, eval {:.2e} s vs recurrence {:.2e} s ({speedup:.0}x)", list(&errs), last.eval_secs, last.oracle_secs.unwrap_or(0.0)),
    );
}

fn legendre(rep: &mut Report) {
    let errs: Vec<f64> = [31416.0, 314159.0].iter().map(|&n| row_error(&run_row(Suite::Legendre, n, None, &opts()))).collect();
    let pass = errs.iter().all(|&e| e <= 1e-10);
    rep.line(5, "legendre n = 31416, 314159 on [-0.9, 0.9] (<= 1e-10)", pass, list(&errs));
}

fn prolate(rep: &mut Report) {
    let row = run_row(Suite::Prolate, 1e4, Some(2.18416195669669e8), &opts());
    let res = row_error(&row);
    let zeros = row.zero_count.unwrap_or(f64::NAN);
    let pass = !row.failed() && res <= 1e-8 && (zeros - 12904.0).abs() <= 5.0;
    rep.line(
        6,
        "prolate c = 1e4 (builds, residual <= 1e-8 of max coefficient, 12904 +- 5 zeros)",
        pass,
        format!("relative residual {res:.2e}, zero count {zeros:.2}"),
    );
}

fn phase_checks(phase: &PhaseFunction, seed: u64) -> (f64, bool, f64) {
    let mut wronskian: f64 = 0.0;
    let mut monotone = phase.alpha_prime().values().iter().all(|&v| v > 0.0);
    for t in random_points(seed, 1000, phase.a(), phase.b()) {
        let b = basis_eval(phase, t).unwrap();
        wronskian = wronskian.max((b.wronskian() - 1.0).abs());
        monotone &= phase.eval(t).unwrap().alpha_prime > 0.0;
    }
    let mut jump: f64 = 0.0;
    for part in [phase.alpha(), phase.alpha_prime()] {
        let m = part.order();
        for j in 0..part.intervals() - 1 {
            let (l, r) = (part.interval_values(j)[m], part.interval_values(j + 1)[0]);
            jump = jump.max((l - r).abs() / (1.0 + l.abs()));
        }
    }
    (wronskian, monotone, jump)
}

fn invariants(rep: &mut Report) {
    let start = Instant::now();
    let phases = [
        simple_problem(1e3).unwrap().build_phase().unwrap(),
        chebyshev_problem(1e3).unwrap().build_phase().unwrap(),
        bessel_problem(1e3).unwrap().build_phase().unwrap(),
        legendre_problem(1e4).unwrap().build_phase().unwrap(),
    ];
    let (mut w, mut mono, mut jump) = (0.0f64, true, 0.0f64);
    for (i, p) in phases.iter().enumerate() {
        let (a, b, c) = phase_checks(p, i as u64);
        w = w.max(a);
        mono &= b;
        jump = jump.max(c);
    }

    let mut unit: f64 = 0.0;
    for lambda in [1.0, 1e3, 1e6] {
        let prob = CoefficientProblem::new(|_| 1.0, lambda, -1.0, 2.0).unwrap();
        let phase = build_phase(&prob, &PhaseOptions::uniform(-1.0, 2.0, 5, 15)).unwrap();
        for t in random_points(9, 1000, -1.0, 2.0) {
            let exact = lambda * (t + 1.0);
            unit = unit.max((phase.eval(t).unwrap().alpha - exact).abs() / exact.max(1.0));
        }
    }

    let mut poly: f64 = 0.0;
    for m in 1..=20 {
        let grid = cheb_grid(m, -1.0, 1.0).unwrap();
        let s = spectral_integration_matrix(m).unwrap();
        for k in 0..=m as i32 {
            let vals: Vec<f64> = grid.nodes().iter().map(|x| x.powi(k)).collect();
            for x in random_points(k as u64, 100, -1.0, 1.0) {
                poly = poly.max((barycentric_eval(&grid, &vals, x).unwrap() - x.powi(k)).abs());
            }
            for (x, v) in grid.nodes().iter().zip(s.apply(&vals, 1.0)) {
                poly = poly.max((v - (x.powi(k + 1) - (-1f64).powi(k + 1)) / (k + 1) as f64).abs());
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = w <= 1e-11 && mono && jump <= 1e-12 && unit <= 1e-12 && poly <= 1e-12 && secs < 60.0;
    rep.line(
        7,
        "invariant suite (wronskian, monotone, continuity, q = 1, polynomial exactness, < 1 min)",
        pass,
        format!("wronskian {w:.1e}, monotone {mono}, jump {jump:.1e}, q=1 {unit:.1e}, poly {poly:.1e}, {secs:.2} s"),
    );
}

fn stiff(rep: &mut Report) {
    let cfg = IvpConfig::for_order(16);
    let mut notes = Vec::new();
    let mut pass = true;

    let grid = cheb_grid(16, 0.0, 1.0).unwrap();
    let zero = SystemFn::new(1, |_t: f64, _y: &[f64], dy: &mut [f64]| dy[0] = 0.0);
    let sol = solve_ivp_interval(&zero, &grid, &[3.0], &cfg).unwrap();
    let ok = sol.component(0).iter().all(|&v| v == 3.0) && sol.residual == 0.0;
    pass &= ok;
    notes.push(format!("y'=0 exact {ok}"));

    let exp = SystemFn::new(1, |_t: f64, y: &[f64], dy: &mut [f64]| dy[0] = y[0]);
    let sol = solve_ivp_interval(&exp, &grid, &[1.0], &cfg).unwrap();
    let e = grid.nodes().iter().zip(sol.component(0)).map(|(t, y)| (y - t.exp()).abs()).fold(0.0, f64::max);
    pass &= e <= 1e-13;
    notes.push(format!("y'=y {e:.1e}"));

    let relax = SystemFn::new(1, |t: f64, y: &[f64], dy: &mut [f64]| dy[0] = -1e3 * (y[0] - t.cos()) - t.sin());
    let sol = solve_ivp_interval(&relax, &grid, &[1.0], &cfg).unwrap();
    let e = grid.nodes().iter().zip(sol.component(0)).map(|(t, y)| (y - t.cos()).abs()).fold(0.0, f64::max);
    pass &= e <= 1e-10;
    notes.push(format!("stiff relaxation {e:.1e}"));

    let osc = SystemFn::new(2, |t: f64, y: &[f64], dy: &mut [f64]| {
        dy[0] = y[1];
        dy[1] = -(1.0 + t * t) * y[0];
    });
    let bp = [0.0, 0.5, 1.25, 2.0, 3.0];
    let y0 = [0.3, -1.1];
    let fwd = march(&osc, &bp, 16, &y0, Direction::Forward, &cfg).unwrap();
    let end: Vec<f64> = fwd.components.iter().map(|c| c.eval(3.0).unwrap()).collect();
    let back = march(&osc, &bp, 16, &end, Direction::Backward, &cfg).unwrap();
    let rt = back.components.iter().zip(y0).map(|(c, v)| (c.eval(0.0).unwrap() - v).abs()).fold(0.0, f64::max);
    pass &= rt <= 10.0 * cfg.residual_tol;
    notes.push(format!("round trip {rt:.1e}"));

    rep.line(8, "stiff solver examples and forward/backward round trip", pass, notes.join(", "));
}

fn main() -> ExitCode {
    let mut rep = Report { failures: 0 };
    let start = Instant::now();
    simple_accuracy(&mut rep);
    frequency_independence(&mut rep);
    chebyshev(&mut rep);
    bessel(&mut rep);
    legendre(&mut rep);
    prolate(&mut rep);
    invariants(&mut rep);
    stiff(&mut rep);
    println!("{} failed, {:.1} s", rep.failures, start.elapsed().as_secs_f64());
    if rep.failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
