//! A target that runs away from the walker is hit later than any fixed one.
//! The exact expectation is cross-checked by seeded Monte Carlo.

use moving_targets::adversary::RotatingInterval;
use moving_targets::chain::biased_cycle;
use moving_targets::hitting::{monte_carlo_hitting, moving_hitting, static_hitting};
use moving_targets::scalar::rational;
use moving_targets::{Scalar, SetSequence, StateSet};

fn main() -> moving_targets::Result<()> {
    let n = 12;
    let chain = biased_cycle(n, &rational(3, 4))?.lazify();
    let fixed = StateSet::interval(n, 6, 3);
    let h = static_hitting(&chain, &fixed)?;
    println!("fixed interval {fixed:?}: E_0[tau] = {} ~ {:.3}", h[0].to_text(), h[0].to_f64());

    // drifts clockwise at the walk's mean speed (2p - 1)/2 = 1/4 per step
    let rotating = RotatingInterval::new(n, 3, 6, (1, 4), 400).materialize();
    let exact = moving_hitting(&chain.map_scalar(|p| p.to_f64())?, 0, &rotating)?;
    let mc = monte_carlo_hitting(&chain, 0, &rotating, 20_000, 7);
    println!("rotating interval: E_0[tau] ~ {exact:.3}, Monte Carlo {:.3} ± {:.3}", mc.mean, mc.std_error);

    let hop = SetSequence::trajectory(n, &[6, 6, 9], 0);
    println!("target at 6, 6, 9 then 0: E_0[tau] = {}", moving_hitting(&chain, 0, &hop)?.to_text());
    Ok(())
}
