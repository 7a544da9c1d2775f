//! Solutions of `y'' + λ² q y = 0` expressed through a phase function:
//! `y = d₁ u + d₂ v` with `u = cos α / √α'`, `v = sin α / √α'`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::kummer::{build_phase, CoefficientProblem, PhaseFunction, PhaseOptions};

/// `c₁ y(a) + c₂ y'(a) = rhs_a`, `c₃ y(b) + c₄ y'(b) = rhs_b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryConditions {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub rhs_a: f64,
    pub rhs_b: f64,
}

impl BoundaryConditions {
    pub fn dirichlet(y_a: f64, y_b: f64) -> Self {
        BoundaryConditions { c1: 1.0, c2: 0.0, c3: 1.0, c4: 0.0, rhs_a: y_a, rhs_b: y_b }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.c1, self.c2, self.c3, self.c4, self.rhs_a, self.rhs_b];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameters("boundary data must be finite".into()));
        }
        if (self.c1 == 0.0 && self.c2 == 0.0) || (self.c3 == 0.0 && self.c4 == 0.0) {
            return Err(Error::InvalidParameters("each boundary condition needs a nonzero coefficient".into()));
        }
        Ok(())
    }
}

/// The basis `u, v` and derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Basis {
    pub u: f64,
    pub v: f64,
    pub up: f64,
    pub vp: f64,
}

impl Basis {
    pub fn wronskian(&self) -> f64 {
        self.u * self.vp - self.v * self.up
    }
}

pub fn basis_eval(phase: &PhaseFunction, t: f64) -> Result<Basis> {
    let p = phase.eval(t)?;
    if !(p.alpha_prime > 0.0) {
        return Err(Error::DegeneratePhase { t, alpha_prime: p.alpha_prime });
    }
    let (s, c) = p.alpha.sin_cos();
    let sq = p.alpha_prime.sqrt();
    let k = p.alpha_second / (2.0 * p.alpha_prime * sq);
    Ok(Basis {
        u: c / sq,
        v: s / sq,
        up: -sq * s - k * c,
        vp: sq * c - k * s,
    })
}

/// `d₁ u + d₂ v` over a shared phase.
#[derive(Debug, Clone)]
pub struct Solution {
    pub d1: f64,
    pub d2: f64,
    pub phase: Arc<PhaseFunction>,
}

impl Solution {
    pub fn new(d1: f64, d2: f64, phase: Arc<PhaseFunction>) -> Result<Self> {
        if !(d1.is_finite() && d2.is_finite()) {
            return Err(Error::InvalidParameters("solution coefficients must be finite".into()));
        }
        Ok(Solution { d1, d2, phase })
    }

    /// `(y(t), y'(t))`.
    pub fn eval(&self, t: f64) -> Result<(f64, f64)> {
        eval_solution(self, t)
    }
}

pub fn eval_solution(sol: &Solution, t: f64) -> Result<(f64, f64)> {
    let b = basis_eval(&sol.phase, t)?;
    Ok((sol.d1 * b.u + sol.d2 * b.v, sol.d1 * b.up + sol.d2 * b.vp))
}

/// Solves the 2×2 system by elimination with full pivoting.
fn solve2(m: [[f64; 2]; 2], rhs: [f64; 2]) -> Result<[f64; 2]> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let norm = |r: [f64; 2]| r[0].hypot(r[1]);
    let scale = norm(m[0]) * norm(m[1]);
    let relative_det = if scale > 0.0 { det.abs() / scale } else { 0.0 };
    if !(relative_det > 1e-13) {
        return Err(Error::SingularSystem { relative_det });
    }

    let (mut pr, mut pc) = (0, 0);
    for i in 0..2 {
        for j in 0..2 {
            if m[i][j].abs() > m[pr][pc].abs() {
                (pr, pc) = (i, j);
            }
        }
    }
    let (or, oc) = (1 - pr, 1 - pc);
    let l = m[or][pc] / m[pr][pc];
    let x_oc = (rhs[or] - l * rhs[pr]) / (m[or][oc] - l * m[pr][oc]);
    let x_pc = (rhs[pr] - m[pr][oc] * x_oc) / m[pr][pc];
    let mut x = [0.0; 2];
    x[pc] = x_pc;
    x[oc] = x_oc;
    Ok(x)
}

/// Imposes boundary conditions on an existing phase.
pub fn bvp_with_phase(phase: Arc<PhaseFunction>, bc: &BoundaryConditions) -> Result<Solution> {
    bc.validate()?;
    let ba = basis_eval(&phase, phase.a())?;
    let bb = basis_eval(&phase, phase.b())?;
    let m = [
        [bc.c1 * ba.u + bc.c2 * ba.up, bc.c1 * ba.v + bc.c2 * ba.vp],
        [bc.c3 * bb.u + bc.c4 * bb.up, bc.c3 * bb.v + bc.c4 * bb.vp],
    ];
    let [d1, d2] = solve2(m, [bc.rhs_a, bc.rhs_b])?;
    Solution::new(d1, d2, phase)
}

/// The solution with `y(t0) = y`, `y'(t0) = yp`.
pub fn from_initial_data(phase: Arc<PhaseFunction>, t0: f64, y: f64, yp: f64) -> Result<Solution> {
    if !(y.is_finite() && yp.is_finite()) {
        return Err(Error::InvalidParameters("initial data must be finite".into()));
    }
    let b = basis_eval(&phase, t0)?;
    let w = b.wronskian();
    let d1 = (y * b.vp - yp * b.v) / w;
    let d2 = (yp * b.u - y * b.up) / w;
    Solution::new(d1, d2, phase)
}

pub fn solve_bvp(prob: &CoefficientProblem, bc: &BoundaryConditions, opts: &PhaseOptions) -> Result<Solution> {
    bc.validate()?;
    let phase = build_phase(prob, opts)?;
    bvp_with_phase(Arc::new(phase), bc)
}

pub fn solve_ivp(prob: &CoefficientProblem, y_a: f64, yp_a: f64, opts: &PhaseOptions) -> Result<Solution> {
    let phase = build_phase(prob, opts)?;
    from_initial_data(Arc::new(phase), prob.a(), y_a, yp_a)
}
