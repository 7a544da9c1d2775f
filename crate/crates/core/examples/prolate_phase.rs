//! Phase of the prolate spheroidal wave equation for c = 10⁴ and a known
//! eigenvalue χ. The phase span divided by π counts the zeros of the
//! eigenfunction on (-1, 1).

use nonosc::kummer::phase_residual;
use nonosc::rng::random_points;
use nonosc::specfun::{prolate_problem, zero_count_estimate};

fn main() -> nonosc::Result<()> {
    let (c, chi) = (1e4, 2.18416195669669e8);
    let spec = prolate_problem(c, chi)?;
    let phase = spec.build_phase()?;
    let pts = random_points(5, 100, phase.a(), phase.b());
    let (res, scale) = phase_residual(&spec.problem, &phase, &pts)?;
    println!("c = {c:e}, chi = {chi:e}: {}", spec.partition_description());
    println!("zero count ~ {:.3} (eigenfunction index 12904)", zero_count_estimate(&phase)?);
    println!("Kummer residual {res:.3e} against lambda^2 max q = {scale:.3e}");
    Ok(())
}
