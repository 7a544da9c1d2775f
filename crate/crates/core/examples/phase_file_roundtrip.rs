//! Writes a phase to disk, reads it back and checks that evaluation is
//! bit-for-bit unchanged.

use std::sync::Arc;

use nonosc::phasefile::{read_meta, read_phase, write_phase};
use nonosc::rng::random_points;
use nonosc::solve::from_initial_data;
use nonosc::specfun::simple_problem;

fn main() -> nonosc::Result<()> {
    let phase = Arc::new(simple_problem(1e6)?.build_phase()?);
    let dir = std::env::temp_dir().join(format!("nonosc-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("temp dir");
    let path = dir.join("simple.pfn");
    write_phase(&path, &phase)?;
    let meta = read_meta(&path)?;
    println!("{}: {} bytes, {} intervals of order {}", path.display(), meta.bytes, meta.intervals, meta.order);

    let back = Arc::new(read_phase(&path)?);
    let a = from_initial_data(phase, -1.0, 0.0, 1e6)?;
    let b = from_initial_data(back, -1.0, 0.0, 1e6)?;
    let same = random_points(3, 10_000, -1.0, 1.0)
        .into_iter()
        .all(|t| a.eval(t).unwrap().0.to_bits() == b.eval(t).unwrap().0.to_bits());
    println!("identical values at 10000 points: {same}");
    std::fs::remove_dir_all(&dir).ok();
    Ok(())
}
