//! A coefficient known only from samples: 400 values of q(t) = 2 + sin 2t
//! are splined and the resulting phase compared with one built from q itself.

use nonosc::kummer::{build_phase, CoefficientProblem, PhaseOptions};
use nonosc::tabulated::TabulatedCoefficient;

fn main() -> nonosc::Result<()> {
    let q = |t: f64| 2.0 + (2.0 * t).sin();
    let t: Vec<f64> = (0..400).map(|i| 3.0 * i as f64 / 399.0).collect();
    let samples = t.iter().map(|&x| q(x)).collect();
    let table = TabulatedCoefficient::new(t, samples)?;

    let lambda = 1e5;
    let opts = PhaseOptions::uniform(0.0, 3.0, 12, 15);
    let exact = build_phase(&CoefficientProblem::new(q, lambda, 0.0, 3.0)?, &opts)?;
    let splined = build_phase(&CoefficientProblem::new(move |x| table.eval(x), lambda, 0.0, 3.0)?, &opts)?;
    for x in [0.5, 1.5, 3.0] {
        let (e, s) = (exact.eval(x)?.alpha, splined.eval(x)?.alpha);
        println!("alpha({x}) = {e:.10e}, from the table {s:.10e}, relative difference {:.1e}", (e - s).abs() / e);
    }
    Ok(())
}
