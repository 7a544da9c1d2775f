//! J_n(t) for large n through a phase function, against Miller's backward
//! recurrence.

use std::time::Instant;

use nonosc::bench::time_per_eval;
use nonosc::rng::random_points;
use nonosc::specfun::{bessel_reference, BesselEvaluator};

fn main() -> nonosc::Result<()> {
    for n in [100usize, 1000, 10_000, 100_000] {
        let start = Instant::now();
        let ev = BesselEvaluator::new(n)?;
        let build = start.elapsed().as_secs_f64();
        let (lo, hi) = ev.domain();
        let pts = random_points(7, 200, lo, hi);
        let mut err = 0.0f64;
        for &t in &pts {
            err = err.max((ev.eval(t)? - bessel_reference(n, t)?).abs());
        }
        let fast = time_per_eval(&pts, 100_000, |t| ev.eval(t).unwrap());
        let slow = time_per_eval(&pts, 1, |t| bessel_reference(n, t).unwrap());
        println!(
            "n = {n:>6}: t in [{lo:.2}, {hi:.0}], build {build:.2e} s, eval {fast:.2e} s, recurrence {slow:.2e} s, max error {err:.2e}"
        );
    }
    Ok(())
}
