//! Nonoscillatory phase functions for `y'' + λ² q(t) y = 0`.
//!
//! The phase is obtained from the logarithm form of Kummer's equation
//!
//! ```text
//! r'' - (r')²/4 + 4λ² (exp(r) - q) = 0,        α' = λ exp(r / 2),
//! ```
//!
//! in four steps:
//!
//! 1. `q` is blended with the constant 1 by an erfc window, giving `q̃ ≈ 1`
//!    near `a` and `q̃ ≈ q` near `b`.
//! 2. With `q̃` in place of `q`, zero initial data at `a` is (to machine
//!    precision) the data of the nonoscillatory solution; the windowed
//!    equation is marched forward to `b`.
//! 3. The true equation is marched backward from `b` with the terminal data
//!    produced by step 2.
//! 4. `α'` is formed from `r`, integrated interval by interval with the
//!    spectral integration matrix and glued so that `α` is continuous and
//!    `α(a) = 0`.
//!
//! The cost of every step depends on the partition and the grid order only,
//! never on `λ`.

use std::fmt;
use std::sync::Arc;

use crate::chebcore::{partition_nodes, spectral_integration_matrix, validate_breakpoints, PiecewiseChebyshev};
use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use crate::stiffode::{march, Direction, IvpConfig, Schedule, SystemFn};

pub type Coefficient = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// `y'' + λ² q(t) y = 0` on `[a, b]`.
#[derive(Clone)]
pub struct CoefficientProblem {
    q: Coefficient,
    lambda: f64,
    a: f64,
    b: f64,
}

impl fmt::Debug for CoefficientProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientProblem")
            .field("lambda", &self.lambda)
            .field("a", &self.a)
            .field("b", &self.b)
            .finish_non_exhaustive()
    }
}

impl CoefficientProblem {
    pub fn new(q: impl Fn(f64) -> f64 + Send + Sync + 'static, lambda: f64, a: f64, b: f64) -> Result<Self> {
        Self::from_arc(Arc::new(q), lambda, a, b)
    }

    pub fn from_arc(q: Coefficient, lambda: f64, a: f64, b: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidParameters(format!("lambda must be positive, got {lambda}")));
        }
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidInterval { a, b });
        }
        Ok(CoefficientProblem { q, lambda, a, b })
    }

    #[inline]
    pub fn q(&self, t: f64) -> f64 {
        (self.q)(t)
    }

    pub fn coefficient(&self) -> &Coefficient {
        &self.q
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }
}

/// Steepness of the erfc window. 13 is the smallest integer whose tails at
/// the endpoints fall below machine precision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowSpec {
    pub steepness: f64,
}

pub const DEFAULT_WINDOW_STEEPNESS: f64 = 13.0;

impl Default for WindowSpec {
    fn default() -> Self {
        WindowSpec { steepness: DEFAULT_WINDOW_STEEPNESS }
    }
}

impl WindowSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.steepness >= DEFAULT_WINDOW_STEEPNESS && self.steepness.is_finite()) {
            return Err(Error::InvalidParameters(format!(
                "window steepness must be at least 13, got {}",
                self.steepness
            )));
        }
        Ok(())
    }

    fn argument(&self, t: f64, a: f64, b: f64) -> f64 {
        self.steepness / (b - a) * (t - 0.5 * (a + b))
    }
}

/// `ψ(t) = (1 - erf(c (t - (a+b)/2) / (b - a))) / 2`, computed as `erfc/2`.
pub fn window_function(t: f64, a: f64, b: f64, spec: WindowSpec) -> f64 {
    0.5 * libm::erfc(spec.argument(t, a, b))
}

/// `1 - ψ(t)`, accurate in the left tail where `ψ` rounds to 1.
pub fn window_complement(t: f64, a: f64, b: f64, spec: WindowSpec) -> f64 {
    0.5 * libm::erfc(-spec.argument(t, a, b))
}

/// `q̃ = ψ + (1 - ψ) q`. Written as `q + ψ (1 - q)` where `ψ ≤ 1/2` and as
/// `1 + (1 - ψ)(q - 1)` elsewhere, so that `q ≡ 1` stays exactly 1 and large
/// `q` near the left end does not cancel.
pub fn windowed_coefficient(prob: &CoefficientProblem, spec: WindowSpec) -> impl Fn(f64) -> f64 + Clone {
    let q = Arc::clone(&prob.q);
    let (a, b) = (prob.a, prob.b);
    move |t| {
        let qt = q(t);
        let psi = window_function(t, a, b, spec);
        if psi <= 0.5 {
            qt + psi * (1.0 - qt)
        } else {
            1.0 + window_complement(t, a, b, spec) * (qt - 1.0)
        }
    }
}

/// `r'' - (r')²/4 + 4λ²(exp(r) - q)`.
pub fn kummer_residual(r: f64, rp: f64, rpp: f64, q: f64, lambda: f64) -> f64 {
    rpp - 0.25 * rp * rp + 4.0 * lambda * lambda * (r.exp() - q)
}

fn log_form_system<Q: Fn(f64) -> f64>(
    lambda: f64,
    q: Q,
) -> SystemFn<impl Fn(f64, &[f64], &mut [f64])> {
    let four_lambda2 = 4.0 * lambda * lambda;
    SystemFn::new(2, move |t: f64, y: &[f64], dy: &mut [f64]| {
        dy[0] = y[1];
        dy[1] = 0.25 * y[1] * y[1] - four_lambda2 * (y[0].exp() - q(t));
    })
}

/// A solution `(r, r')` of the logarithm form on a partition.
#[derive(Debug, Clone)]
pub struct LogFormSolution {
    pub r: PiecewiseChebyshev,
    pub rp: PiecewiseChebyshev,
    pub rhs_evals: usize,
    pub max_correction: f64,
}

impl LogFormSolution {
    /// `(r(b), r'(b))`.
    pub fn terminal(&self) -> (f64, f64) {
        let last = |f: &PiecewiseChebyshev| *f.values().last().unwrap();
        (last(&self.r), last(&self.rp))
    }

    /// `(r(a), r'(a))`.
    pub fn initial(&self) -> (f64, f64) {
        (self.r.values()[0], self.rp.values()[0])
    }
}

fn check_partition(prob: &CoefficientProblem, breakpoints: &[f64]) -> Result<()> {
    validate_breakpoints(breakpoints)?;
    let (first, last) = (breakpoints[0], *breakpoints.last().unwrap());
    if first != prob.a || last != prob.b {
        return Err(Error::InvalidPartition(format!(
            "partition covers [{first}, {last}] but the problem is posed on [{}, {}]",
            prob.a, prob.b
        )));
    }
    Ok(())
}

/// Forward solve of the windowed problem from `r(a) = r'(a) = 0`.
pub fn solve_windowed(
    prob: &CoefficientProblem,
    spec: WindowSpec,
    breakpoints: &[f64],
    m: usize,
    cfg: &IvpConfig,
) -> Result<LogFormSolution> {
    spec.validate()?;
    check_partition(prob, breakpoints)?;
    let qt = windowed_coefficient(prob, spec);
    for &t in &partition_nodes(breakpoints, m) {
        let v = qt(t);
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::CoefficientNonpositive { t, value: v });
        }
    }
    let system = log_form_system(prob.lambda, qt);
    let sol = march(&system, breakpoints, m, &[0.0, 0.0], Direction::Forward, cfg)?;
    into_log_form(sol)
}

/// Backward solve of the original problem from `(r(b), r'(b)) = r1_terminal`.
pub fn solve_original(
    prob: &CoefficientProblem,
    breakpoints: &[f64],
    m: usize,
    r1_terminal: (f64, f64),
    cfg: &IvpConfig,
) -> Result<LogFormSolution> {
    check_partition(prob, breakpoints)?;
    let q = Arc::clone(&prob.q);
    let system = log_form_system(prob.lambda, move |t| q(t));
    let start = [r1_terminal.0, r1_terminal.1];
    let sol = march(&system, breakpoints, m, &start, Direction::Backward, cfg)?;
    into_log_form(sol)
}

fn into_log_form(sol: crate::stiffode::MarchSolution) -> Result<LogFormSolution> {
    let mut components = sol.components.into_iter();
    Ok(LogFormSolution {
        r: components.next().unwrap(),
        rp: components.next().unwrap(),
        rhs_evals: sol.rhs_evals,
        max_correction: sol.max_correction,
    })
}

/// `α`, `α'` and `α''` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseValues {
    pub alpha: f64,
    pub alpha_prime: f64,
    pub alpha_second: f64,
}

/// A nonoscillatory phase function, tabulated on a partition.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseFunction {
    lambda: f64,
    alpha: PiecewiseChebyshev,
    alpha_prime: PiecewiseChebyshev,
    alpha_second: PiecewiseChebyshev,
    r: PiecewiseChebyshev,
    rp: PiecewiseChebyshev,
    /// Right-hand-side evaluations spent constructing the phase.
    pub rhs_evals: usize,
}

impl PhaseFunction {
    /// Reassembles a phase from stored tables; all parts must share one
    /// partition and order.
    pub fn from_parts(
        lambda: f64,
        alpha: PiecewiseChebyshev,
        alpha_prime: PiecewiseChebyshev,
        alpha_second: PiecewiseChebyshev,
        r: PiecewiseChebyshev,
        rp: PiecewiseChebyshev,
    ) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidParameters(format!("lambda must be positive, got {lambda}")));
        }
        for part in [&alpha_prime, &alpha_second, &r, &rp] {
            if part.breakpoints() != alpha.breakpoints() || part.order() != alpha.order() {
                return Err(Error::InvalidPartition("phase tables disagree on the partition".into()));
            }
        }
        Ok(PhaseFunction { lambda, alpha, alpha_prime, alpha_second, r, rp, rhs_evals: 0 })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn a(&self) -> f64 {
        self.alpha.a()
    }

    pub fn b(&self) -> f64 {
        self.alpha.b()
    }

    pub fn breakpoints(&self) -> &[f64] {
        self.alpha.breakpoints()
    }

    pub fn order(&self) -> usize {
        self.alpha.order()
    }

    pub fn alpha(&self) -> &PiecewiseChebyshev {
        &self.alpha
    }

    pub fn alpha_prime(&self) -> &PiecewiseChebyshev {
        &self.alpha_prime
    }

    pub fn alpha_second(&self) -> &PiecewiseChebyshev {
        &self.alpha_second
    }

    pub fn r(&self) -> &PiecewiseChebyshev {
        &self.r
    }

    pub fn r_prime(&self) -> &PiecewiseChebyshev {
        &self.rp
    }

    /// Evaluates `α, α', α''` at `t`, sharing the interpolation weights.
    pub fn eval(&self, t: f64) -> Result<PhaseValues> {
        let (j, w) = self.alpha.weights_at(t)?;
        Ok(PhaseValues {
            alpha: w.apply(self.alpha.interval_values(j)),
            alpha_prime: w.apply(self.alpha_prime.interval_values(j)),
            alpha_second: w.apply(self.alpha_second.interval_values(j)),
        })
    }
}

/// Builds `α, α', α''` from `(r, r')` on the full partition, with `α(a) = 0`.
pub fn assemble_phase(prob: &CoefficientProblem, r2: &LogFormSolution) -> Result<PhaseFunction> {
    let (r, rp) = (&r2.r, &r2.rp);
    let m = r.order();
    let n = m + 1;
    let s = spectral_integration_matrix(m)?;
    let lambda = prob.lambda;

    let mut alpha_prime = Vec::with_capacity(r.values().len());
    for (t, &rv) in r.nodes().iter().zip(r.values()) {
        let ap = lambda * (0.5 * rv).exp();
        if !(ap > 0.0 && ap.is_finite()) {
            return Err(Error::NonpositiveDerivative { t: *t });
        }
        alpha_prime.push(ap);
    }

    let mut alpha = Vec::with_capacity(alpha_prime.len());
    let mut offset = 0.0;
    for (j, w) in r.breakpoints().windows(2).enumerate() {
        let local = s.apply(&alpha_prime[j * n..(j + 1) * n], 0.5 * (w[1] - w[0]));
        // local[0] is exactly zero, so the first node inherits the offset
        alpha.extend(local.iter().map(|v| v + offset));
        offset = *alpha.last().unwrap();
    }

    let alpha_second: Vec<f64> = alpha_prime.iter().zip(rp.values()).map(|(ap, rpv)| 0.5 * ap * rpv).collect();
    let bp = r.breakpoints().to_vec();
    Ok(PhaseFunction {
        lambda,
        alpha: PiecewiseChebyshev::new(bp.clone(), m, alpha)?,
        alpha_prime: PiecewiseChebyshev::new(bp.clone(), m, alpha_prime)?,
        alpha_second: PiecewiseChebyshev::new(bp, m, alpha_second)?,
        r: r.clone(),
        rp: rp.clone(),
        rhs_evals: r2.rhs_evals,
    })
}

/// Partition, grid order, window and stiff-solver settings for a phase build.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseOptions {
    pub breakpoints: Vec<f64>,
    pub order: usize,
    pub window: WindowSpec,
    pub ivp: IvpConfig,
    /// Extra random positivity samples of `q` per interval.
    pub positivity_samples: usize,
}

impl PhaseOptions {
    /// Fixed-work stiff solves, so that construction cost does not depend
    /// on `λ`.
    pub fn new(breakpoints: Vec<f64>, order: usize) -> Self {
        PhaseOptions {
            breakpoints,
            order,
            window: WindowSpec::default(),
            ivp: IvpConfig::for_order(order).with_schedule(Schedule::FixedWork),
            positivity_samples: 10,
        }
    }

    /// `intervals` equispaced subintervals of `[a, b]`.
    pub fn uniform(a: f64, b: f64, intervals: usize, order: usize) -> Self {
        Self::new(uniform_partition(a, b, intervals), order)
    }
}

/// Equispaced partition with exact endpoints.
pub fn uniform_partition(a: f64, b: f64, intervals: usize) -> Vec<f64> {
    let intervals = intervals.max(1);
    let mut bp: Vec<f64> = (0..=intervals)
        .map(|i| a + (b - a) * i as f64 / intervals as f64)
        .collect();
    bp[intervals] = b;
    bp
}

/// Output of a phase build, with the intermediate windowed solution kept
/// for diagnostics.
#[derive(Debug, Clone)]
pub struct PhaseConstruction {
    pub phase: PhaseFunction,
    pub windowed: LogFormSolution,
    pub original: LogFormSolution,
}

/// Rejects coefficients that are not strictly positive at the collocation
/// nodes or at a few random points per interval.
pub fn check_positivity(prob: &CoefficientProblem, breakpoints: &[f64], m: usize, samples: usize) -> Result<()> {
    let check = |t: f64| {
        let v = prob.q(t);
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(Error::CoefficientNonpositive { t, value: v })
        }
    };
    partition_nodes(breakpoints, m).into_iter().try_for_each(check)?;
    let mut rng = SplitMix64::new(0x5eed_0f_9);
    for w in breakpoints.windows(2) {
        for _ in 0..samples {
            check(rng.uniform(w[0], w[1]))?;
        }
    }
    Ok(())
}

/// Runs all four steps and keeps the intermediate solutions.
pub fn construct_phase(prob: &CoefficientProblem, opts: &PhaseOptions) -> Result<PhaseConstruction> {
    check_partition(prob, &opts.breakpoints)?;
    check_positivity(prob, &opts.breakpoints, opts.order, opts.positivity_samples)?;
    let windowed = solve_windowed(prob, opts.window, &opts.breakpoints, opts.order, &opts.ivp)?;
    let original = solve_original(prob, &opts.breakpoints, opts.order, windowed.terminal(), &opts.ivp)?;
    let mut phase = assemble_phase(prob, &original)?;
    phase.rhs_evals = windowed.rhs_evals + original.rhs_evals;
    Ok(PhaseConstruction { phase, windowed, original })
}

/// Largest logarithm-form residual of a phase at `points`, with `r''` taken
/// from the differentiated `r'` interpolant, together with the scale
/// `λ² max |q|` over the same points.
pub fn phase_residual(prob: &CoefficientProblem, phase: &PhaseFunction, points: &[f64]) -> Result<(f64, f64)> {
    let rpp = phase.r_prime().derivative();
    let lambda = phase.lambda();
    let (mut worst, mut scale) = (0.0f64, 0.0f64);
    for &t in points {
        let q = prob.q(t);
        let res = kummer_residual(phase.r().eval(t)?, phase.r_prime().eval(t)?, rpp.eval(t)?, q, lambda);
        worst = worst.max(res.abs());
        scale = scale.max(lambda * lambda * q.abs());
    }
    Ok((worst, scale))
}

/// Builds the nonoscillatory phase function of `prob`.
pub fn build_phase(prob: &CoefficientProblem, opts: &PhaseOptions) -> Result<PhaseFunction> {
    construct_phase(prob, opts).map(|c| c.phase)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// erfc by its continued fraction, for the far tail only.
    fn erfc_cf(x: f64) -> f64 {
        let mut f = x;
        for k in (1..200).rev() {
            f = x + (k as f64 / 2.0) / f;
        }
        (-x * x).exp() / (std::f64::consts::PI.sqrt() * f)
    }

    #[test]
    fn window_values() {
        let spec = WindowSpec::default();
        assert_eq!(window_function(0.5, 0.0, 1.0, spec), 0.5);
        for t in [-0.9, -0.2, 0.1, 0.77] {
            let s = window_function(t, -1.0, 1.0, spec) + window_function(-t, -1.0, 1.0, spec);
            assert!((s - 1.0).abs() < 1e-15);
        }
        let tail = window_complement(-1.0, -1.0, 1.0, spec);
        let expected = 0.5 * erfc_cf(6.5);
        assert!((tail - expected).abs() <= 1e-13 * expected, "{tail} vs {expected}");
        assert!(tail < f64::EPSILON && tail > 1e-20);
        assert!((window_function(1.0, -1.0, 1.0, spec) - tail).abs() <= 1e-13 * tail);
    }

    #[test]
    fn window_is_decreasing() {
        let spec = WindowSpec::default();
        let mut prev = f64::INFINITY;
        for i in 0..=200 {
            let t = -1.0 + i as f64 / 100.0;
            let v = window_function(t, -1.0, 1.0, spec);
            assert!(v <= prev && (0.0..=1.0).contains(&v));
            prev = v;
        }
    }

    #[test]
    fn steepness_below_13_rejected() {
        assert!(WindowSpec { steepness: 12.0 }.validate().is_err());
        assert!(WindowSpec { steepness: 20.0 }.validate().is_ok());
    }

    #[test]
    fn windowed_coefficient_examples() {
        let spec = WindowSpec::default();
        let ones = CoefficientProblem::new(|_| 1.0, 5.0, 0.0, 3.0).unwrap();
        let qt = windowed_coefficient(&ones, spec);
        for t in [0.0, 0.3, 1.5, 2.9, 3.0] {
            assert_eq!(qt(t), 1.0);
        }
        let simple = CoefficientProblem::new(|t: f64| 1.0 - t * t * (3.0 * t).cos(), 10.0, -1.0, 1.0).unwrap();
        let qt = windowed_coefficient(&simple, spec);
        assert!((qt(-1.0) - 1.0).abs() <= 1e-15);
        let qb = simple.q(1.0);
        assert!((qt(1.0) - qb).abs() <= 2e-20 * (1.0 - qb).abs() + f64::EPSILON * qb);
    }

    #[test]
    fn residual_examples() {
        assert_eq!(kummer_residual(0.0, 0.0, 0.0, 1.0, 3.0), 0.0);
        assert!(kummer_residual(4f64.ln(), 0.0, 0.0, 4.0, 7.0).abs() < 1e-12);
        assert_eq!(kummer_residual(0.0, 0.0, 1.0, 1.0, 10.0), 1.0);
    }

    #[test]
    fn problem_validation() {
        assert!(CoefficientProblem::new(|_| 1.0, 0.0, 0.0, 1.0).is_err());
        assert!(CoefficientProblem::new(|_| 1.0, -2.0, 0.0, 1.0).is_err());
        assert!(CoefficientProblem::new(|_| 1.0, 2.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn unit_coefficient_phase_is_linear() {
        let prob = CoefficientProblem::new(|_| 1.0, 50.0, 0.0, 2.0).unwrap();
        let c = construct_phase(&prob, &PhaseOptions::uniform(0.0, 2.0, 4, 15)).unwrap();
        assert!(c.windowed.r.values().iter().all(|&v| v == 0.0));
        assert!(c.windowed.rp.values().iter().all(|&v| v == 0.0));
        assert!(c.original.r.values().iter().all(|&v| v == 0.0));
        let p = c.phase;
        for i in 0..=40 {
            let t = 2.0 * i as f64 / 40.0;
            let v = p.eval(t).unwrap();
            assert!((v.alpha - 50.0 * t).abs() <= 1e-12 * (1.0 + 50.0 * t));
            assert!((v.alpha_prime - 50.0).abs() <= 1e-13);
            assert_eq!(v.alpha_second, 0.0);
        }
    }

    #[test]
    fn nonpositive_coefficient_rejected() {
        let prob = CoefficientProblem::new(|t: f64| t, 10.0, -1.0, 1.0).unwrap();
        let err = build_phase(&prob, &PhaseOptions::uniform(-1.0, 1.0, 4, 8)).unwrap_err();
        assert!(matches!(err, Error::CoefficientNonpositive { .. }));
        // positive at every node but not in between
        let prob = CoefficientProblem::new(|t: f64| if (0.11..0.12).contains(&t) { -1.0 } else { 1.0 }, 10.0, 0.0, 1.0)
            .unwrap();
        let mut opts = PhaseOptions::uniform(0.0, 1.0, 1, 4);
        opts.positivity_samples = 2000;
        assert!(matches!(build_phase(&prob, &opts), Err(Error::CoefficientNonpositive { .. })));
    }

    #[test]
    fn partition_must_match_problem() {
        let prob = CoefficientProblem::new(|_| 1.0, 10.0, 0.0, 1.0).unwrap();
        let opts = PhaseOptions::uniform(0.0, 2.0, 4, 8);
        assert!(matches!(build_phase(&prob, &opts), Err(Error::InvalidPartition(_))));
    }
}
