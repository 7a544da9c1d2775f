//! The stiff collocation solver on its own: a relaxation problem, a marched
//! oscillator and a forward/backward round trip.

use nonosc::chebcore::ChebGrid;
use nonosc::kummer::uniform_partition;
use nonosc::stiffode::{march, solve_ivp_interval, Direction, IvpConfig, SystemFn};

fn main() -> nonosc::Result<()> {
    // y' = -10⁶ (y - cos t) - sin t has the slow solution cos t
    let f = SystemFn::new(1, |t: f64, y: &[f64], dy: &mut [f64]| dy[0] = -1e6 * (y[0] - t.cos()) - t.sin());
    let grid = ChebGrid::new(15, 0.0, 1.0)?;
    let sol = solve_ivp_interval(&f, &grid, &[1.0], &IvpConfig::default())?;
    println!(
        "relaxation: y(1) - cos 1 = {:.2e}, {} sweeps, {} rhs evaluations",
        sol.terminal()[0] - 1f64.cos(),
        sol.sweeps,
        sol.rhs_evals
    );

    // harmonic oscillator over 20 periods
    let osc = SystemFn::new(2, |_t: f64, y: &[f64], dy: &mut [f64]| {
        dy[0] = y[1];
        dy[1] = -y[0];
    });
    let tau = 40.0 * std::f64::consts::PI;
    let bp = uniform_partition(0.0, tau, 40);
    let cfg = IvpConfig::default();
    let fwd = march(&osc, &bp, 15, &[0.0, 1.0], Direction::Forward, &cfg)?;
    let end = [fwd.components[0].eval(tau)?, fwd.components[1].eval(tau)?];
    println!("oscillator: y(40 pi) = {:+.2e}, y'(40 pi) - 1 = {:+.2e}", end[0], end[1] - 1.0);

    let back = march(&osc, &bp, 15, &end, Direction::Backward, &cfg)?;
    println!(
        "round trip: |y(0)| = {:.2e}, |y'(0) - 1| = {:.2e}",
        back.components[0].eval(0.0)?.abs(),
        (back.components[1].eval(0.0)? - 1.0).abs()
    );
    Ok(())
}
