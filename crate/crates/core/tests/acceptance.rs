//! End-to-end acceptance criteria. Each criterion prints one PASS/FAIL line
//! with the values it compared; the test fails if any criterion fails.

use std::time::{Duration, Instant};

use moving_targets::adversary::{
    build_gadget, default_epsilon, find_slow_witness, separation_demo, t_mov_lower_bound, SequenceFamily, UpperBound,
    DEFAULT_SEARCH_BUDGET,
};
use moving_targets::chain::{biased_cycle, random_chain};
use moving_targets::gnm::{
    build_gnm, certify_counterexample, check_transitivity, tabulated_cluster_chain, shuttle_expectation, LongEdgeRule, TrajectorySearch,
};
use moving_targets::hitting::{monte_carlo_hitting, moving_hitting, run_rng, static_hitting, SetFamily};
use moving_targets::sausage::{compare_drift_exact, compare_drift_mc, LatticeTrajectory};
use moving_targets::scalar::rational;
use moving_targets::torus::{interval_search_check, survival_monotone_suite, antipode_bruteforce, two_point_suite};
use moving_targets::{MarkovChain, Rational, Scalar, SetSequence, StateSet};
use rand::Rng;

const MC_SIGMAS: f64 = 3.0;
const ORACLE_MC_RUNS: u64 = 100_000;
const SAUSAGE_MC_RUNS: u64 = 100_000;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

/// Shared tripwire tally for the upper-bound criterion.
#[derive(Default)]
struct Tally {
    checked: u64,
    chains: u64,
    violations: Vec<String>,
}

impl Tally {
    fn absorb(&mut self, tw: &UpperBound<Rational>) {
        self.checked += tw.checked;
        self.chains += 1;
        self.violations.extend(tw.violations.iter().cloned());
    }
}

fn six_state_chains() -> Vec<MarkovChain<Rational>> {
    let mut rng = run_rng(6, 0);
    (0..5).map(|_| random_chain(&mut rng, 6, 4)).collect()
}

fn tabulated_values() -> Outcome {
    let cc = tabulated_cluster_chain(12).unwrap();
    let h = cc.hitting_from_zero().unwrap();
    let want: Vec<Rational> = [10, 13, 13, 15, 16, 16].iter().map(|&k| rational(k, 1)).collect();
    let s = shuttle_expectation(&cc).unwrap();
    let pass = h[1..=6] == want[..]
        && s.a1 == rational(72, 5)
        && s.a2 == rational(53, 5)
        && s.accounting == rational(104, 7)
        && s.accounting < rational(16, 1);
    let shown: Vec<String> = h[1..=6].iter().map(Scalar::to_text).collect();
    outcome(
        pass,
        format!("h = ({}), A1 = {}, A2 = {}, E[T] = {} < 16", shown.join(", "), s.a1.to_text(), s.a2.to_text(), s.accounting.to_text()),
    )
}

fn counterexample() -> Outcome {
    let g = build_gnm(2, 12, LongEdgeRule::Literal).unwrap();
    let r = certify_counterexample::<Rational>(&g, true, &TrajectorySearch::full(&g, 4)).unwrap();
    let reference = r.reference.as_ref().map_or(String::new(), |c| format!("; reference {} = {}", c.trajectory, c.value.to_text()));
    outcome(
        r.margin > rational(0, 1),
        format!(
            "static max {} at {}, best moving {} ({}), margin {}{reference}",
            r.static_max.to_text(),
            r.static_argmax.join(" "),
            r.best_moving.to_text(),
            r.best_trajectory,
            r.margin.to_text()
        ),
    )
}

fn transitivity() -> Outcome {
    let g = build_gnm(2, 12, LongEdgeRule::Literal).unwrap();
    let r = check_transitivity(&g);
    outcome(r.pass && r.pairs_checked == 48 * 48, format!("{} ordered pairs, failure {:?}", r.pairs_checked, r.failure))
}

fn antipode_optimality() -> Outcome {
    let mut cases = 0;
    let mut failures = Vec::new();
    for (n, d, t_max) in [(3, 1, 6), (4, 1, 6), (5, 1, 5), (3, 2, 3)] {
        for t in 1..=t_max {
            let r = antipode_bruteforce(n, d, t, true).unwrap();
            cases += 1;
            if !r.pass {
                failures.push(format!("Z_{n}^{d} t={t}: max {} vs antipode {}", r.max_survival, r.antipode_survival));
            }
        }
    }
    outcome(failures.is_empty(), format!("{cases} cases exhaustive, failures {failures:?}"))
}

fn rearrangement_suites() -> Outcome {
    let two_point = two_point_suite(10_000, 5, 4);
    let monotone = survival_monotone_suite(1_000, 5).unwrap();
    outcome(
        two_point.pass() && monotone.pass(),
        format!(
            "two-point {} instances, {} failures; survival {} instances, {} failures",
            two_point.checked,
            two_point.failures.len(),
            monotone.checked,
            monotone.failures.len()
        ),
    )
}

fn gadgets(tally: &mut Tally) -> Outcome {
    let mut chains = vec![("Z_16 biased".to_string(), biased_cycle(16, &rational(3, 4)).unwrap())];
    chains.extend(six_state_chains().into_iter().enumerate().map(|(i, c)| (format!("random #{i}"), c)));
    let mut certificates = 0;
    let mut failures = Vec::new();
    for (name, chain) in &chains {
        for alpha in [rational(1, 10), rational(1, 5)] {
            let eps = default_epsilon(&alpha);
            let mut tw = UpperBound::new(chain, &alpha, 10_000).ok();
            for t in 1..=32 {
                let Some((x, set)) = find_slow_witness(chain, &alpha, &eps, t).unwrap() else { break };
                match build_gadget(chain, &alpha, &eps, t, x, &set) {
                    Ok(c) if c.min_prefix_mass >= alpha && c.achieved >= c.threshold() => {
                        certificates += 1;
                        if let Some(tw) = tw.as_mut() {
                            tw.check(&c.achieved, 1, || format!("{name} gadget t={t}"));
                        }
                    }
                    Ok(c) => failures.push(format!("{name} α={} t={t}: {} < {}", alpha.to_text(), c.achieved, c.threshold())),
                    Err(e) => failures.push(format!("{name} α={} t={t}: {e}", alpha.to_text())),
                }
            }
            if let Some(tw) = &tw {
                tally.absorb(tw);
            }
        }
    }
    outcome(failures.is_empty() && certificates > 0, format!("{certificates} certificates, falsified {failures:?}"))
}

fn upper_bound_sweep(tally: &mut Tally) -> Outcome {
    for chain in six_state_chains() {
        for alpha in [rational(1, 10), rational(1, 5), rational(1, 3)] {
            let mut tw = UpperBound::new(&chain, &alpha, 10_000).unwrap();
            t_mov_lower_bound(&chain, &alpha, 2, &SequenceFamily::Sets(SetFamily::Minimal), DEFAULT_SEARCH_BUDGET, Some(&mut tw)).unwrap();
            tally.absorb(&tw);
        }
    }
    for n in [5, 7, 9] {
        let chain = biased_cycle(n, &rational(3, 4)).unwrap().lazify();
        let alpha = rational(1, 4);
        let mut tw = UpperBound::new(&chain, &alpha, 10_000).unwrap();
        let len = (n + 3) / 4;
        t_mov_lower_bound(&chain, &alpha, 3 * n, &SequenceFamily::Rotating { len, speed: (1, 2) }, DEFAULT_SEARCH_BUDGET, Some(&mut tw))
            .unwrap();
        tally.absorb(&tw);
    }
    outcome(
        tally.violations.is_empty() && tally.checked > 0,
        format!("{} sequences on {} (chain, α) pairs, violations {:?}", tally.checked, tally.chains, tally.violations),
    )
}

fn interval_search(tally: &mut Tally) -> Outcome {
    let mut rows = Vec::new();
    let mut pass = true;
    for n in [4usize, 5, 6] {
        for k in [1, 2] {
            let alpha = rational(k, n as i64);
            let chain = moving_targets::torus::lazy_torus_kernel(n, 1).unwrap();
            let mut tw = UpperBound::new(&chain, &alpha, 10_000).unwrap();
            let c = interval_search_check(n, &alpha, 5, Some(&mut tw)).unwrap();
            tally.absorb(&tw);
            pass &= c.pass;
            rows.push(format!("n={n} α={}: {} vs t_H {}", c.alpha, c.t_mov_search, c.t_hit));
        }
    }
    outcome(pass, rows.join("; "))
}

fn sausage() -> Outcome {
    let mut rows = Vec::new();
    let mut pass = true;
    for n in [0, 1] {
        for speed in [1, 2] {
            for t in 0..=5 {
                let c = compare_drift_exact(n, &LatticeTrajectory::linear(&[speed], t)).unwrap();
                pass &= c.pass;
                if t == 5 {
                    rows.push(format!("n={n} f(s)={speed}s t=5: {} >= {}", c.drifted, c.centred));
                }
            }
        }
    }
    let mc = compare_drift_mc(1, &LatticeTrajectory::linear(&[1, 0], 20), SAUSAGE_MC_RUNS, 11).unwrap();
    pass &= mc.pass;
    rows.push(format!(
        "d=2 mc: {:.3} ± {:.3} vs {:.3} ± {:.3}",
        mc.drifted.mean, mc.drifted.std_error, mc.centred.mean, mc.centred.std_error
    ));
    outcome(pass, rows.join("; "))
}

fn random_set(rng: &mut impl Rng, n: usize) -> StateSet {
    loop {
        let s = StateSet::from_indices(n, (0..n).filter(|_| rng.gen_bool(0.4)));
        if !s.is_empty() {
            return s;
        }
    }
}

fn random_sequence(rng: &mut impl Rng, n: usize) -> SetSequence {
    let prefix_len = rng.gen_range(0..=4);
    let prefix = (0..prefix_len).map(|_| random_set(rng, n)).collect();
    SetSequence::new(prefix, random_set(rng, n)).unwrap()
}

fn oracle_consistency() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut disagreements = Vec::new();
    for i in 0..20u64 {
        let mut rng = run_rng(10, i);
        let n = rng.gen_range(3..=6);
        let chain = random_chain(&mut rng, n, 5);
        let seq = random_sequence(&mut rng, n);
        let start = rng.gen_range(0..n);
        let exact = moving_hitting(&chain, start, &seq).unwrap().to_f64();
        let mc = monte_carlo_hitting(&chain, start, &seq, ORACLE_MC_RUNS, 1000 + i);
        let z = (mc.mean - exact).abs() / mc.std_error.max(f64::MIN_POSITIVE);
        worst = worst.max(z);
        if !mc.agrees_with(exact, MC_SIGMAS) {
            disagreements.push(format!("#{i}: {exact} vs {} ± {}", mc.mean, mc.std_error));
        }
    }
    let mut lazy_failures = 0;
    for i in 0..10u64 {
        let mut rng = run_rng(20, i);
        let n = rng.gen_range(3..=7);
        let chain = random_chain(&mut rng, n, 5);
        let target = StateSet::from_indices(n, [rng.gen_range(0..n)]);
        let plain = static_hitting(&chain, &target).unwrap();
        let lazy = static_hitting(&chain.lazify(), &target).unwrap();
        if lazy.iter().zip(&plain).any(|(l, p)| *l != p.clone() * rational(2, 1)) {
            lazy_failures += 1;
        }
    }
    outcome(
        disagreements.is_empty() && lazy_failures == 0,
        format!("20 MC instances, worst |z| = {worst:.2}, disagreements {disagreements:?}; lazy = 2 x plain failures {lazy_failures}/10"),
    )
}

fn separation() -> Outcome {
    let r = separation_demo(&[16, 32, 64], &rational(3, 4), &rational(1, 4)).unwrap();
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(", ");
    outcome(
        r.passes,
        format!("t_mix ratios [{}], rotating [{}], t_H [{}]", fmt(&r.t_mix_ratios), fmt(&r.rotating_ratios), fmt(&r.t_hit_ratios)),
    )
}

fn timed(id: u32, name: &str, limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let o = f();
    let elapsed = start.elapsed();
    let in_time = limit.map_or(true, |l| elapsed <= l);
    let pass = o.pass && in_time;
    let budget = limit.map_or(String::new(), |l| format!(" / limit {:.0}s", l.as_secs_f64()));
    println!("{} {id:>2} {name}: {} [{:.2}s{budget}]", if pass { "PASS" } else { "FAIL" }, o.detail, elapsed.as_secs_f64());
    pass
}

#[test]
fn acceptance() {
    println!();
    let secs = |s: u64| Some(Duration::from_secs(s));
    let mut tally = Tally::default();
    let results = [
        timed(1, "tabulated cluster values", secs(1), tabulated_values),
        timed(2, "counterexample certification", secs(300), counterexample),
        timed(3, "transitivity of G(2,12)", secs(60), transitivity),
        timed(4, "antipode optimality by brute force", secs(600), antipode_optimality),
        timed(5, "two-point and survival suites", secs(300), rearrangement_suites),
        timed(6, "slow-set gadgets", secs(120), || gadgets(&mut tally)),
        timed(8, "interval search equals t_H on the lazy cycle", None, || interval_search(&mut tally)),
        timed(7, "upper-bound tripwire", None, || upper_bound_sweep(&mut tally)),
        timed(9, "drift enlarges the sausage", secs(300), sausage),
        timed(10, "oracle consistency", None, oracle_consistency),
        timed(11, "separation growth rates", secs(120), separation),
    ];
    let failed = results.iter().filter(|p| !**p).count();
    assert_eq!(failed, 0, "{failed} acceptance criteria failed");
}
