//! Two-point boundary value problems for y'' + λ² (1 + t²) y = 0 on [0, 1].

use std::sync::Arc;

use nonosc::kummer::{build_phase, CoefficientProblem, PhaseOptions};
use nonosc::solve::{bvp_with_phase, BoundaryConditions};
use nonosc::Error;

fn main() -> nonosc::Result<()> {
    let lambda = 1e4;
    let prob = CoefficientProblem::new(|t| 1.0 + t * t, lambda, 0.0, 1.0)?;
    let phase = Arc::new(build_phase(&prob, &PhaseOptions::uniform(0.0, 1.0, 8, 15))?);

    let sol = bvp_with_phase(phase.clone(), &BoundaryConditions::dirichlet(1.0, -1.0))?;
    println!("Dirichlet y(0) = 1, y(1) = -1:");
    for t in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let (y, yp) = sol.eval(t)?;
        println!("  t = {t:.2}  y = {y:+.15e}  y' = {yp:+.6e}");
    }

    // y'(0) = lambda, y(1) + y'(1)/lambda = 0
    let robin = BoundaryConditions { c1: 0.0, c2: 1.0, c3: 1.0, c4: 1.0 / lambda, rhs_a: lambda, rhs_b: 0.0 };
    let sol = bvp_with_phase(phase.clone(), &robin)?;
    let (y1, yp1) = sol.eval(1.0)?;
    println!("Robin: y(1) + y'(1)/lambda = {:.3e}", y1 + yp1 / lambda);

    // Dirichlet data at a zero of every solution vanishing at 0 is resonant
    let prob = CoefficientProblem::new(|_| 1.0, 10.0, 0.0, std::f64::consts::PI / 10.0)?;
    let phase = Arc::new(build_phase(&prob, &PhaseOptions::uniform(prob.a(), prob.b(), 4, 15))?);
    match bvp_with_phase(phase, &BoundaryConditions::dirichlet(0.0, 1.0)) {
        Err(e @ Error::SingularSystem { .. }) => println!("resonant case: {e}"),
        other => println!("resonant case unexpectedly gave {other:?}"),
    }
    Ok(())
}
