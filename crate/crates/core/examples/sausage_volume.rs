//! Expected volume swept by a box riding a random walk, with and without
//! a deterministic drift.

use moving_targets::sausage::{compare_drift_exact, compare_drift_mc, LatticeTrajectory};

fn main() -> moving_targets::Result<()> {
    for t in 0..=5 {
        let c = compare_drift_exact(1, &LatticeTrajectory::linear(&[1], t))?;
        println!("d=1 n=1 t={t}: drifted {:>8} vs centred {:>10}", c.drifted, c.centred);
    }
    let mc = compare_drift_mc(1, &LatticeTrajectory::linear(&[1, 0], 20), 20_000, 3)?;
    println!(
        "d=2 n=1 t=20: drifted {:.2} ± {:.2}, centred {:.2} ± {:.2}",
        mc.drifted.mean, mc.drifted.std_error, mc.centred.mean, mc.centred.std_error
    );
    Ok(())
}
