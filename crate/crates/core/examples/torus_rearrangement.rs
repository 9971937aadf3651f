//! Hiding from a lazy walk on a small torus: brute force over all target
//! trajectories, and the two-point inequalities behind the answer.

use moving_targets::torus::{survival_monotone_suite, antipode_bruteforce, two_point_suite};

fn main() -> moving_targets::Result<()> {
    for (n, d, t) in [(4, 1, 5), (5, 1, 4), (3, 2, 3)] {
        let r = antipode_bruteforce(n, d, t, true)?;
        println!(
            "Z_{n}^{d}, t = {t}: best survival {} over {} trajectories, antipode {} (optimal: {})",
            r.max_survival, r.evaluated, r.antipode_survival, r.antipode_is_maximizer
        );
    }
    let plain = antipode_bruteforce(4, 1, 3, false)?;
    println!("without laziness on Z_4: best {} vs antipode {}", plain.max_survival, plain.antipode_survival);

    let two_point = two_point_suite(2_000, 5, 1);
    let monotone = survival_monotone_suite(300, 2)?;
    println!("two-point inequality: {} instances, {} failures", two_point.checked, two_point.failures.len());
    println!("survival monotonicity: {} instances, {} failures", monotone.checked, monotone.failures.len());
    Ok(())
}
