//! P_n(t) for n in the hundreds of thousands, checked against the three-term
//! recurrence on [-0.9, 0.9].

use nonosc::rng::random_points;
use nonosc::specfun::{legendre_reference, LegendreEvaluator};

fn main() -> nonosc::Result<()> {
    for n in [1000usize, 31_416, 314_159] {
        let ev = LegendreEvaluator::new(n)?;
        let pts = random_points(11, 500, -0.9, 0.9);
        let mut err = 0.0f64;
        for &t in &pts {
            err = err.max((ev.eval(t)? - legendre_reference(n, t)).abs());
        }
        println!("n = {n:>6}: P_n(0.3) = {:+.15e}, max error {err:.2e}", ev.eval(0.3)?);
    }
    Ok(())
}
