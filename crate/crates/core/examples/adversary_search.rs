//! Lower bounds on the moving-target hitting time: exhaustive search over
//! short sequences, the slow-set gadget, and the tripwire that no
//! admissible sequence may exceed.

use moving_targets::adversary::{
    build_gadget, default_epsilon, find_slow_witness, t_mov_lower_bound, SequenceFamily, UpperBound, DEFAULT_SEARCH_BUDGET,
};
use moving_targets::chain::biased_cycle;
use moving_targets::hitting::{t_hit, SetFamily};
use moving_targets::scalar::rational;
use moving_targets::Scalar;

fn main() -> moving_targets::Result<()> {
    let chain = biased_cycle(9, &rational(3, 4))?.lazify();
    let alpha = rational(1, 4);
    let mut tripwire = UpperBound::new(&chain, &alpha, 10_000)?;

    let fixed = t_hit(&chain, &alpha, SetFamily::Intervals)?;
    let family = SequenceFamily::Sets(SetFamily::Intervals);
    let moving = t_mov_lower_bound(&chain, &alpha, 3, &family, DEFAULT_SEARCH_BUDGET, Some(&mut tripwire))?;
    println!("t_H(1/4) = {}", fixed.value.to_text());
    println!("best sequence of 3 intervals then a fixed one: {} from {}", moving.value.to_text(), moving.start);
    println!("  {:?}", moving.sequence);

    let eps = default_epsilon(&alpha);
    for t in [2, 4, 8] {
        if let Some((x, set)) = find_slow_witness(&chain, &alpha, &eps, t)? {
            let cert = build_gadget(&chain, &alpha, &eps, t, x, &set)?;
            tripwire.check(&cert.achieved, 1, || format!("gadget t={t}"));
            println!("gadget t={t}: max E[tau_B] = {} >= theta t = {}", cert.achieved.to_text(), cert.threshold().to_text());
        }
    }
    println!(
        "tripwire: {} sequences checked against {}, {} violations",
        tripwire.checked,
        tripwire.bound.to_text(),
        tripwire.violations.len()
    );
    Ok(())
}
