//! Test problems from classical special-function equations, with independent
//! reference evaluators.
//!
//! | problem   | `λ`     | `λ² q(t)`                                     | domain                      |
//! |-----------|---------|-----------------------------------------------|-----------------------------|
//! | simple    | given   | `λ² (1 - t² cos 3t)`                          | `[-1, 1]`                   |
//! | chebyshev | given   | `(2 + t² + 4λ²(1-t²)) / (4 (1-t²)²)`          | `±(1 - 2⁻²⁰)`               |
//! | bessel    | `ν`     | `ν² - (ν² - 1/4) / x²`, `x = t/ν`             | `[(1+ν^(-2/3)) t₀/ν, 10]`   |
//! | legendre  | `ν`     | `1/(1-t²)² + ν(ν+1)/(1-t²)`                   | `±(1 - 2⁻⁵⁰)`               |
//! | prolate   | `√χ`    | `1/(1-t²)² + (χ - c²t²)/(1-t²)`               | `±(1 - 2⁻⁵⁰)`               |
//!
//! `t₀ = √(4ν² - 1)/2` is the Bessel turning point.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::kummer::{build_phase, uniform_partition, CoefficientProblem, PhaseFunction, PhaseOptions};
use crate::solve::{from_initial_data, Solution};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProblemKind {
    Simple { lambda: f64 },
    Chebyshev { lambda: f64 },
    Bessel { nu: f64 },
    Legendre { nu: f64 },
    Prolate { c: f64, chi: f64 },
}

impl ProblemKind {
    pub fn name(&self) -> &'static str {
        match self {
            ProblemKind::Simple { .. } => "simple",
            ProblemKind::Chebyshev { .. } => "chebyshev",
            ProblemKind::Bessel { .. } => "bessel",
            ProblemKind::Legendre { .. } => "legendre",
            ProblemKind::Prolate { .. } => "prolate",
        }
    }
}

/// A coefficient problem together with its recommended partition and order.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    pub problem: CoefficientProblem,
    pub breakpoints: Vec<f64>,
    pub order: usize,
}

impl ProblemSpec {
    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn phase_options(&self) -> PhaseOptions {
        PhaseOptions::new(self.breakpoints.clone(), self.order)
    }

    pub fn build_phase(&self) -> Result<PhaseFunction> {
        build_phase(&self.problem, &self.phase_options())
    }

    /// Short human-readable description of the partition.
    pub fn partition_description(&self) -> String {
        let kind = match self.kind {
            ProblemKind::Simple { .. } => "uniform",
            ProblemKind::Bessel { .. } => "graded+uniform",
            _ => "graded",
        };
        format!("{} intervals ({kind}), order {}", self.breakpoints.len() - 1, self.order)
    }
}

pub const DEFAULT_ORDER: usize = 15;

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameters(format!("{name} must be positive, got {v}")))
    }
}

/// `1 - t²` as `(1 - t)(1 + t)`, exact near `±1`.
#[inline]
fn one_minus_sq(t: f64) -> f64 {
    (1.0 - t) * (1.0 + t)
}

/// Breakpoints `±(1 - 2^-j)`, `j = 0..=k`: `2k` intervals.
pub fn dyadic_graded_mesh(k: usize) -> Vec<f64> {
    let mut right: Vec<f64> = (0..=k).map(|j| 1.0 - (-(j as f64)).exp2()).collect();
    let mut bp: Vec<f64> = right.iter().skip(1).rev().map(|x| -x).collect();
    bp.append(&mut right);
    bp
}

pub fn simple_coefficient(t: f64) -> f64 {
    1.0 - t * t * (3.0 * t).cos()
}

pub fn simple_problem(lambda: f64) -> Result<ProblemSpec> {
    positive("lambda", lambda)?;
    Ok(ProblemSpec {
        kind: ProblemKind::Simple { lambda },
        problem: CoefficientProblem::new(simple_coefficient, lambda, -1.0, 1.0)?,
        breakpoints: uniform_partition(-1.0, 1.0, 10),
        order: DEFAULT_ORDER,
    })
}

/// Grading depth of the Chebyshev mesh; the domain is `±(1 - 2^-CHEBYSHEV_DEPTH)`.
pub const CHEBYSHEV_DEPTH: usize = 20;

pub fn chebyshev_coefficient(lambda: f64) -> impl Fn(f64) -> f64 + Clone + Send + Sync {
    let l2 = lambda * lambda;
    move |t: f64| {
        let s = one_minus_sq(t);
        (2.0 + t * t) / (4.0 * l2 * s * s) + 1.0 / s
    }
}

pub fn chebyshev_problem(lambda: f64) -> Result<ProblemSpec> {
    positive("lambda", lambda)?;
    let breakpoints = dyadic_graded_mesh(CHEBYSHEV_DEPTH);
    let b = *breakpoints.last().unwrap();
    Ok(ProblemSpec {
        kind: ProblemKind::Chebyshev { lambda },
        problem: CoefficientProblem::new(chebyshev_coefficient(lambda), lambda, -b, b)?,
        breakpoints,
        order: DEFAULT_ORDER,
    })
}

/// The phase `λ (arccos a - arccos t)` of the Chebyshev problem, normalized
/// to vanish at `a`.
pub fn chebyshev_exact_phase(lambda: f64, a: f64, t: f64) -> f64 {
    lambda * (a.acos() - t.acos())
}

pub fn bessel_turning_point(nu: f64) -> f64 {
    0.5 * (4.0 * nu * nu - 1.0).sqrt()
}

/// Number of Bessel intervals.
pub const BESSEL_INTERVALS: usize = 30;

/// Grows the graded Bessel intervals by this ratio.
const BESSEL_GRADING: f64 = 1.5;

/// Breakpoints in `t`: `t₀ + δ·1.5^k` from `a = t₀ + δ`, `δ = t₀ ν^(-2/3)`,
/// up to about `2ν`, then uniform to `10ν`; 30 intervals in total.
pub fn bessel_mesh(nu: f64) -> Vec<f64> {
    let tp = bessel_turning_point(nu);
    let delta = tp * nu.powf(-2.0 / 3.0);
    let a = tp + delta;
    let b = 10.0 * nu;
    let graded = (((2.0 / 3.0) * nu.ln() / BESSEL_GRADING.ln()).ceil() as usize).clamp(1, BESSEL_INTERVALS - 1);
    let mut bp: Vec<f64> = (0..=graded).map(|k| tp + delta * BESSEL_GRADING.powi(k as i32)).collect();
    bp[0] = a;
    let split = *bp.last().unwrap();
    let tail = BESSEL_INTERVALS - graded;
    bp.extend((1..=tail).map(|i| split + (b - split) * i as f64 / tail as f64));
    *bp.last_mut().unwrap() = b;
    bp
}

/// `q(x) = 1 - (ν² - 1/4) / (ν x)²`. With `ψ(x) = √t J_ν(t)` at `t = νx`,
/// `ψ'' + ν² q ψ = 0` in `x`.
pub fn bessel_coefficient(nu: f64) -> impl Fn(f64) -> f64 + Clone + Send + Sync {
    let eps = 0.25 / (nu * nu);
    move |x: f64| ((x - 1.0) * (x + 1.0) + eps) / (x * x)
}

/// The Bessel problem in the scaled variable `x = t/ν`, so that `q` stays of
/// order one and the window blends comparable values.
pub fn bessel_problem(nu: f64) -> Result<ProblemSpec> {
    if !(nu.is_finite() && nu >= 10.0) {
        return Err(Error::InvalidOrder(format!("Bessel order must be at least 10, got {nu}")));
    }
    let breakpoints: Vec<f64> = bessel_mesh(nu).iter().map(|t| t / nu).collect();
    let (a, b) = (breakpoints[0], *breakpoints.last().unwrap());
    Ok(ProblemSpec {
        kind: ProblemKind::Bessel { nu },
        problem: CoefficientProblem::new(bessel_coefficient(nu), nu, a, b)?,
        breakpoints,
        order: DEFAULT_ORDER,
    })
}

/// Grading depth of the Legendre and prolate meshes.
pub const LEGENDRE_DEPTH: usize = 50;

pub fn legendre_coefficient(nu: f64) -> impl Fn(f64) -> f64 + Clone + Send + Sync {
    let n1 = nu * (nu + 1.0);
    let nu2 = nu * nu;
    move |t: f64| {
        let s = one_minus_sq(t);
        (1.0 + n1 * s) / (nu2 * s * s)
    }
}

pub fn legendre_problem(nu: f64) -> Result<ProblemSpec> {
    positive("nu", nu)?;
    let breakpoints = dyadic_graded_mesh(LEGENDRE_DEPTH);
    let b = *breakpoints.last().unwrap();
    Ok(ProblemSpec {
        kind: ProblemKind::Legendre { nu },
        problem: CoefficientProblem::new(legendre_coefficient(nu), nu, -b, b)?,
        breakpoints,
        order: DEFAULT_ORDER,
    })
}

pub fn prolate_coefficient(c: f64, chi: f64) -> impl Fn(f64) -> f64 + Clone + Send + Sync {
    let c2 = c * c;
    move |t: f64| {
        let s = one_minus_sq(t);
        (1.0 + (chi - c2 * t * t) * s) / (chi * s * s)
    }
}

pub fn prolate_problem(c: f64, chi: f64) -> Result<ProblemSpec> {
    positive("c", c)?;
    if !(chi.is_finite() && chi > c * c) {
        return Err(Error::InvalidParameters(format!("chi must exceed c^2 = {}, got {chi}", c * c)));
    }
    let breakpoints = dyadic_graded_mesh(LEGENDRE_DEPTH);
    let b = *breakpoints.last().unwrap();
    Ok(ProblemSpec {
        kind: ProblemKind::Prolate { c, chi },
        problem: CoefficientProblem::new(prolate_coefficient(c, chi), chi.sqrt(), -b, b)?,
        breakpoints,
        order: DEFAULT_ORDER,
    })
}

/// `(J_{n-1}(t), J_n(t), J_{n+1}(t))` by Miller's downward recurrence,
/// normalized with `J₀ + 2 Σ J_{2k} = 1`. `J_{-1} = -J_1`.
pub fn bessel_reference_triple(n: usize, t: f64) -> Result<(f64, f64, f64)> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidParameters(format!("Bessel argument must be nonnegative, got {t}")));
    }
    if t == 0.0 {
        let j = |k: usize| if k == 0 { 1.0 } else { 0.0 };
        return Ok((if n == 0 { 0.0 } else { j(n - 1) }, j(n), j(n + 1)));
    }
    // start well above both n and t; the excess covers the decay region
    let start = n.max(t.ceil() as usize) + 40 + (10.0 * t.cbrt()).ceil() as usize;
    let start = start + (start & 1);
    let (mut above, mut cur) = (0.0f64, 1e-300f64);
    let mut sum = 0.0;
    let (mut jm1, mut j0, mut jp1) = (0.0, 0.0, 0.0);
    for k in (0..=start).rev() {
        if k == n + 1 {
            jp1 = cur;
        } else if k == n {
            j0 = cur;
        } else if n > 0 && k == n - 1 {
            jm1 = cur;
        }
        if k % 2 == 0 {
            sum += if k == 0 { cur } else { 2.0 * cur };
        }
        if k == 0 {
            break;
        }
        let next = (2.0 * k as f64 / t) * cur - above;
        above = cur;
        cur = next;
        if cur.abs() > 1e250 {
            let s = 1e-250;
            cur *= s;
            above *= s;
            sum *= s;
            jm1 *= s;
            j0 *= s;
            jp1 *= s;
        }
    }
    if n == 0 {
        jm1 = -jp1;
    }
    Ok((jm1 / sum, j0 / sum, jp1 / sum))
}

/// `J_n(t)` by downward recurrence.
pub fn bessel_reference(n: usize, t: f64) -> Result<f64> {
    bessel_reference_triple(n, t).map(|(_, j, _)| j)
}

/// `(J_n(t), J_n'(t))` with `J_n' = (J_{n-1} - J_{n+1}) / 2`.
pub fn bessel_reference_with_derivative(n: usize, t: f64) -> Result<(f64, f64)> {
    let (jm, j, jp) = bessel_reference_triple(n, t)?;
    Ok((j, 0.5 * (jm - jp)))
}

/// Phase-based evaluator of `J_ν` on the Bessel problem domain.
#[derive(Debug, Clone)]
pub struct BesselEvaluator {
    pub nu: usize,
    pub solution: Solution,
}

impl BesselEvaluator {
    /// Builds the phase and pins `ψ = √t J_ν` by value and derivative at `t = 10ν`.
    pub fn new(nu: usize) -> Result<Self> {
        let phase = bessel_problem(nu as f64)?.build_phase()?;
        Self::from_phase(nu, Arc::new(phase))
    }

    /// Pins `J_ν` using an already built phase of `bessel_problem(ν)`.
    pub fn from_phase(nu: usize, phase: Arc<PhaseFunction>) -> Result<Self> {
        let nuf = nu as f64;
        let xb = phase.b();
        let ts = xb * nuf;
        let (j, jp) = bessel_reference_with_derivative(nu, ts)?;
        let st = ts.sqrt();
        // d/dx = ν d/dt
        let solution = from_initial_data(phase, xb, st * j, nuf * (j / (2.0 * st) + st * jp))?;
        Ok(BesselEvaluator { nu, solution })
    }

    /// The domain in `t`.
    pub fn domain(&self) -> (f64, f64) {
        let nu = self.nu as f64;
        (self.solution.phase.a() * nu, self.solution.phase.b() * nu)
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        Ok(self.solution.eval(t / self.nu as f64)?.0 / t.sqrt())
    }
}

/// `J_ν` at each point via a freshly built phase.
pub fn bessel_eval_via_phase(nu: usize, points: &[f64]) -> Result<Vec<f64>> {
    let ev = BesselEvaluator::new(nu)?;
    points.iter().map(|&t| ev.eval(t)).collect()
}

/// `P_n(t)` by the three-term recurrence.
pub fn legendre_reference(n: usize, t: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, t);
    if n == 0 {
        return p0;
    }
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * t * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// `(P_n(0), P_n'(0))` from `P_{2k}(0) = (-1)^k (2k-1)!!/(2k)!!` and
/// `P_n'(0) = n P_{n-1}(0)`.
pub fn legendre_at_zero(n: usize) -> (f64, f64) {
    let even = |m: usize| {
        let k = m / 2;
        let p: f64 = (1..=k).map(|j| (2 * j - 1) as f64 / (2 * j) as f64).product();
        if k % 2 == 0 { p } else { -p }
    };
    if n % 2 == 0 {
        (even(n), 0.0)
    } else {
        (0.0, n as f64 * even(n - 1))
    }
}

/// Phase-based evaluator of `P_n` for integer `n`.
#[derive(Debug, Clone)]
pub struct LegendreEvaluator {
    pub n: usize,
    pub solution: Solution,
}

impl LegendreEvaluator {
    /// Builds the phase and pins `ψ = √(1-t²) P_n` at `t = 0`.
    pub fn new(n: usize) -> Result<Self> {
        let phase = legendre_problem(n as f64)?.build_phase()?;
        Self::from_phase(n, Arc::new(phase))
    }

    /// Pins `P_n` using an already built phase of `legendre_problem(n)`.
    pub fn from_phase(n: usize, phase: Arc<PhaseFunction>) -> Result<Self> {
        let (p, pp) = legendre_at_zero(n);
        let solution = from_initial_data(phase, 0.0, p, pp)?;
        Ok(LegendreEvaluator { n, solution })
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        Ok(self.solution.eval(t)?.0 / one_minus_sq(t).sqrt())
    }
}

/// `(α(b) - α(a)) / π`, the number of zeros of a solution up to ±1.
pub fn zero_count_estimate(phase: &PhaseFunction) -> Result<f64> {
    let a = phase.eval(phase.a())?.alpha;
    let b = phase.eval(phase.b())?.alpha;
    Ok((b - a) / std::f64::consts::PI)
}
