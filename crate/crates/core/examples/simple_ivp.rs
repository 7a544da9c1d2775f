//! y'' + λ² (1 - t² cos 3t) y = 0, y(-1) = 0, y'(-1) = λ, for λ from 10 to 10⁷.
//! Construction cost stays flat while the solution gets λ/π zeros.

use std::sync::Arc;
use std::time::Instant;

use nonosc::bench::simple_solution;
use nonosc::specfun::simple_problem;

fn main() -> nonosc::Result<()> {
    println!("{:>8}  {:>10}  {:>10}  {:>22}  {:>22}", "lambda", "build (s)", "rhs evals", "y(0.5)", "y'(0.5)");
    for k in 1..=7 {
        let lambda = 10f64.powi(k);
        let spec = simple_problem(lambda)?;
        let start = Instant::now();
        let phase = spec.build_phase()?;
        let secs = start.elapsed().as_secs_f64();
        let evals = phase.rhs_evals;
        let sol = simple_solution(Arc::new(phase))?;
        let (y, yp) = sol.eval(0.5)?;
        println!("{lambda:>8.0e}  {secs:>10.3e}  {evals:>10}  {y:>22.15e}  {yp:>22.15e}");
    }
    Ok(())
}
