//! Worst-start distance to stationarity on a lazy cycle, exactly.

use moving_targets::chain::{mixing_profile, t_mix};
use moving_targets::scalar::rational;
use moving_targets::torus::lazy_torus_kernel;
use moving_targets::Scalar;

fn main() -> moving_targets::Result<()> {
    let chain = lazy_torus_kernel(8, 1)?;
    let quarter = rational(1, 4);
    let t = t_mix(&chain, &quarter, 1_000)?;
    let profile = mixing_profile(&chain, t, &[quarter])?;
    for (s, d) in profile.values.iter().enumerate() {
        println!("d({s:>2}) = {:<14} ~ {:.4}", d.to_text(), d.to_f64());
    }
    println!("t_mix(1/4) on the lazy 8-cycle: {t}");
    Ok(())
}
