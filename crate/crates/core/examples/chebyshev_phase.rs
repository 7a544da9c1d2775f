//! The phase of Chebyshev's equation is λ arccos t up to a constant. The
//! computed phase approaches it quickly as λ grows.

use nonosc::bench::chebyshev_phase_difference;
use nonosc::rng::random_points;
use nonosc::specfun::{chebyshev_exact_phase, chebyshev_problem};

fn main() -> nonosc::Result<()> {
    for lambda in [10.0, 100.0, 1000.0, 1e5] {
        let spec = chebyshev_problem(lambda)?;
        let phase = spec.build_phase()?;
        let pts = random_points(1, 1000, phase.a(), phase.b());
        let diff = chebyshev_phase_difference(&phase, &pts)?;
        let mid = phase.eval(0.0)?.alpha;
        println!(
            "lambda {lambda:>7.0e}: sup rel difference {diff:.3e}, alpha(0) = {mid:.15e} (arccos: {:.15e})",
            chebyshev_exact_phase(lambda, phase.a(), 0.0)
        );
    }
    Ok(())
}
