//! Adversarial target sequences: lower bounds on the moving-target hitting
//! time, the slow-set gadget that forces long hitting times before mixing,
//! and the geometric-domination upper bound used as a tripwire.

use rayon::prelude::*;
use serde::Serialize;

use crate::chain::{self, MarkovChain, MatrixPowers};
use crate::error::{Error, Result};
use crate::hitting::{self, enumerate_family, static_hitting, SetFamily, SetSequence, StateSet, SurvivalVector, TargetSchedule};
use crate::scalar::{Rational, Scalar};

/// `(1/2 − α) / 2`, the midpoint keeping `α + ε < 1/2`.
pub fn default_epsilon<S: Scalar>(alpha: &S) -> S {
    (S::from_ratio(1, 2) - alpha.clone()) / S::from_int(2)
}

/// Smallest `k ≥ 0` with `2^k · α ≥ 1`, i.e. `⌈log₂(1/α)⌉`.
pub fn ceil_log2_inv<S: Scalar>(alpha: &S) -> u32 {
    let mut k = 0;
    let mut scaled = alpha.clone();
    while scaled < S::one() {
        scaled = scaled * S::from_int(2);
        k += 1;
    }
    k
}

/// Tripwire for `E_x[τ_A] ≤ (2⌈log₂(1/α)⌉/α) · t_mix(1/4)` over sequences in `𝒜(α)`.
#[derive(Debug, Clone)]
pub struct UpperBound<S: Scalar> {
    pub alpha: S,
    pub t_mix: usize,
    pub bound: S,
    pub checked: u64,
    pub violations: Vec<String>,
}

impl<S: Scalar> UpperBound<S> {
    pub fn new(chain: &MarkovChain<S>, alpha: &S, cap: usize) -> Result<Self> {
        let t_mix = chain::t_mix(chain, &S::from_ratio(1, 4), cap)?;
        let k = ceil_log2_inv(alpha);
        let bound = S::from_int(2 * k as i64) / alpha.clone() * S::from_int(t_mix as i64);
        Ok(Self { alpha: alpha.clone(), t_mix, bound, checked: 0, violations: Vec::new() })
    }

    /// Records one evaluated sequence (or the maximum over `count` of them).
    pub fn check(&mut self, value: &S, count: u64, context: impl FnOnce() -> String) -> bool {
        self.checked += count;
        let ok = *value <= self.bound.clone() + S::slack();
        if !ok {
            self.violations.push(format!("{}: {} > {}", context(), value.to_text(), self.bound.to_text()));
        }
        ok
    }

    pub fn merge(&mut self, other: &UpperBound<S>) {
        self.checked += other.checked;
        self.violations.extend(other.violations.iter().cloned());
    }
}

/// Searches for `x` with `P^t(x, A_x) < π(A_x) − (α + ε)` where
/// `A_x = {y : P^t(x,y) < π(y)}` is the set realising the TV distance.
pub fn find_slow_witness<S: Scalar>(chain: &MarkovChain<S>, alpha: &S, epsilon: &S, t: usize) -> Result<Option<(usize, StateSet)>> {
    let level = alpha.clone() + epsilon.clone();
    if level >= S::from_ratio(1, 2) || !alpha.is_positive() || !epsilon.is_positive() {
        return Err(Error::InvalidParams(format!("need α, ε > 0 and α + ε < 1/2, got {alpha} + {epsilon}")));
    }
    let pi = chain.stationary()?.masses().to_vec();
    let mut powers = MatrixPowers::new(chain);
    while powers.time() < t {
        powers.advance();
    }
    let n = chain.n_states();
    for (x, row) in powers.matrix().iter().enumerate() {
        let set = StateSet::from_indices(n, (0..n).filter(|&y| row[y] < pi[y]));
        let hit: S = set.members().map(|y| row[y].clone()).sum();
        if hit + S::slack() < set.measure(&pi) - level.clone() {
            return Ok(Some((x, set)));
        }
    }
    Ok(None)
}

/// The slow-set sequence `B_s = {y : P^{t−s}(y,A) > π(A) − α}` for `s < t`,
/// `B_s = Ω` afterwards, with every inequality it must satisfy.
#[derive(Debug, Clone)]
pub struct GadgetCertificate<S: Scalar> {
    pub t: usize,
    pub x: usize,
    pub set: StateSet,
    pub alpha: S,
    pub epsilon: S,
    pub sequence: SetSequence,
    /// `π(A) − (α+ε) − P^t(x,A)`, strictly positive.
    pub deficit: S,
    /// `min_s π(B_s)`.
    pub min_prefix_mass: S,
    /// `θ = ε / (π(A) − α)`.
    pub theta: S,
    /// `max_z E_z[τ_B]`.
    pub achieved: S,
    pub achieved_at_witness: S,
}

impl<S: Scalar> GadgetCertificate<S> {
    pub fn threshold(&self) -> S {
        self.theta.clone() * S::from_int(self.t as i64)
    }
}

pub fn build_gadget<S: Scalar>(
    chain: &MarkovChain<S>,
    alpha: &S,
    epsilon: &S,
    t: usize,
    x: usize,
    set: &StateSet,
) -> Result<GadgetCertificate<S>> {
    if t == 0 {
        return Err(Error::InvalidParams("gadget needs t ≥ 1".into()));
    }
    let n = chain.n_states();
    let pi = chain.stationary()?.masses().to_vec();
    let mass_a = set.measure(&pi);
    let level = mass_a.clone() - alpha.clone();

    // reach[k][y] = P^k(y, A)
    let mut reach = vec![set.mask().iter().map(|&b| if b { S::one() } else { S::zero() }).collect::<Vec<S>>()];
    for k in 1..=t {
        let prev = &reach[k - 1];
        let next = (0..n)
            .map(|y| chain.support(y).iter().map(|(z, p)| p.clone() * prev[*z].clone()).sum())
            .collect();
        reach.push(next);
    }

    let deficit = mass_a.clone() - alpha.clone() - epsilon.clone() - reach[t][x].clone();
    if !(deficit > S::slack()) {
        return Err(Error::GadgetFalsified(format!("({x}, {set:?}, t={t}) is not a slow witness: deficit {deficit}")));
    }

    let prefix: Vec<StateSet> = (0..t)
        .map(|s| StateSet::from_indices(n, (0..n).filter(|&y| reach[t - s][y] > level)))
        .collect();
    let min_prefix_mass = prefix
        .iter()
        .map(|b| b.measure(&pi))
        .fold(S::one(), |a, b| if b < a { b } else { a });
    if min_prefix_mass.clone() + S::slack() < *alpha {
        return Err(Error::GadgetFalsified(format!("π(B_s) = {min_prefix_mass} < α = {alpha}")));
    }

    let sequence = SetSequence::new(prefix, StateSet::full(n))?;
    let times = moving_hitting_all_starts(chain, &sequence, &vec![S::zero(); n]);
    let (_, achieved) = hitting::argmax(&times);
    let achieved_at_witness = times[x].clone();
    let theta = epsilon.clone() / level;
    let threshold = theta.clone() * S::from_int(t as i64);
    if achieved.clone() + S::slack() < threshold {
        return Err(Error::GadgetFalsified(format!("max_z E_z[τ_B] = {achieved} < θt = {threshold}")));
    }
    if !(achieved_at_witness.clone() + S::slack() > threshold) {
        return Err(Error::GadgetFalsified(format!("E_x[τ_B] = {achieved_at_witness} ≤ θt = {threshold}")));
    }
    if achieved > S::from_int(t as i64) + S::slack() {
        return Err(Error::GadgetFalsified(format!("E[τ_B] = {achieved} exceeds t = {t} despite B_t = Ω")));
    }

    Ok(GadgetCertificate {
        t,
        x,
        set: set.clone(),
        alpha: alpha.clone(),
        epsilon: epsilon.clone(),
        sequence,
        deficit,
        min_prefix_mass,
        theta,
        achieved,
        achieved_at_witness,
    })
}

/// `E_x[τ_A]` for every start at once, by the backward recursion
/// `u_t(y) = 1(y ∉ A_t) (1 + Σ_z P(y,z) u_{t+1}(z))`, `u_T = E_·[τ_tail]`.
pub fn moving_hitting_all_starts<S: Scalar>(chain: &MarkovChain<S>, schedule: &impl TargetSchedule, tail_times: &[S]) -> Vec<S> {
    let n = chain.n_states();
    let horizon = schedule.horizon();
    let mut u: Vec<S> = (0..n)
        .map(|y| if schedule.contains(horizon, y) { S::zero() } else { tail_times[y].clone() })
        .collect();
    for t in (0..horizon).rev() {
        u = (0..n)
            .map(|y| {
                if schedule.contains(t, y) {
                    S::zero()
                } else {
                    S::one() + chain.support(y).iter().map(|(z, p)| p.clone() * u[*z].clone()).sum::<S>()
                }
            })
            .collect();
    }
    u
}

/// Interval of fixed length advancing by `⌊t · num / den⌋`, frozen at the horizon.
#[derive(Debug, Clone)]
pub struct RotatingInterval {
    n: usize,
    len: usize,
    phase: usize,
    speed: (usize, usize),
    horizon: usize,
    tail: StateSet,
}

impl RotatingInterval {
    pub fn new(n: usize, len: usize, phase: usize, speed: (usize, usize), horizon: usize) -> Self {
        assert!(speed.1 > 0, "speed denominator must be positive");
        let offset = phase + horizon * speed.0 / speed.1;
        Self { n, len, phase, speed, horizon, tail: StateSet::interval(n, offset, len) }
    }

    fn offset(&self, t: usize) -> usize {
        (self.phase + t.min(self.horizon) * self.speed.0 / self.speed.1) % self.n
    }

    pub fn materialize(&self) -> SetSequence {
        let prefix = (0..self.horizon).map(|t| StateSet::interval(self.n, self.offset(t), self.len)).collect();
        SetSequence::new(prefix, self.tail.clone()).expect("nonempty interval")
    }
}

impl TargetSchedule for RotatingInterval {
    fn n_states(&self) -> usize {
        self.n
    }

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn contains(&self, t: usize, x: usize) -> bool {
        (x + self.n - self.offset(t)) % self.n < self.len
    }

    fn tail(&self) -> &StateSet {
        &self.tail
    }
}

/// Which sequences the `t_mov` search ranges over.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SequenceFamily {
    /// Every prefix step and the tail drawn from a set family.
    Sets(SetFamily),
    /// Intervals of the given length rotating at `num/den` states per step,
    /// over every phase.
    Rotating { len: usize, speed: (usize, usize) },
}

#[derive(Debug, Clone)]
pub struct TmovBound<S: Scalar> {
    pub value: S,
    pub start: usize,
    pub sequence: SetSequence,
    pub evaluated: u128,
}

pub const DEFAULT_SEARCH_BUDGET: u128 = 20_000_000;

/// Exhaustive maximum of `E_x[τ_A]` over starts and over sequences from
/// `family` with a prefix of length `horizon`; a certified lower bound on
/// `t_mov(α)`. Ties go to the lexicographically smallest `(x, sequence)`.
pub fn t_mov_lower_bound<S: Scalar>(
    chain: &MarkovChain<S>,
    alpha: &S,
    horizon: usize,
    family: &SequenceFamily,
    budget: u128,
    mut tripwire: Option<&mut UpperBound<S>>,
) -> Result<TmovBound<S>> {
    let n = chain.n_states();
    let pi = chain.stationary()?.masses().to_vec();
    let best = match family {
        SequenceFamily::Sets(set_family) => {
            let sets = enumerate_family(&pi, alpha, *set_family)?;
            let f = sets.len() as u128;
            let size = (n as u128).saturating_mul(f.saturating_pow(horizon as u32 + 1));
            if size > budget {
                return Err(Error::SearchSpaceExceeded { size, budget });
            }
            let tails = sets.par_iter().map(|s| static_hitting(chain, s)).collect::<Result<Vec<_>>>()?;
            let search = SetSearch { chain, sets: &sets, tails: &tails, horizon };
            let results: Vec<(S, Vec<usize>, u128, S)> = (0..n).into_par_iter().map(|x| search.run(x)).collect();
            let mut best: Option<TmovBound<S>> = None;
            let mut leaves = 0u128;
            for (x, (value, choice, count, max_leaf)) in results.into_iter().enumerate() {
                leaves += count;
                if let Some(wire) = tripwire.as_deref_mut() {
                    wire.check(&max_leaf, count as u64, || format!("set search from {x}"));
                }
                if best.as_ref().map_or(true, |b| value > b.value) {
                    let prefix = choice[..horizon].iter().map(|&k| sets[k].clone()).collect();
                    let sequence = SetSequence::new(prefix, sets[choice[horizon]].clone())?;
                    best = Some(TmovBound { value, start: x, sequence, evaluated: 0 });
                }
            }
            let mut best = best.ok_or_else(|| Error::InvalidParams("no qualifying set".into()))?;
            best.evaluated = leaves;
            best
        }
        SequenceFamily::Rotating { len, speed } => {
            let size = (n as u128) * (horizon as u128 + 1);
            if size > budget {
                return Err(Error::SearchSpaceExceeded { size, budget });
            }
            let probe = StateSet::interval(n, 0, *len);
            if (0..n).any(|s| StateSet::interval(n, s, *len).measure(&pi) + S::slack() < *alpha) || probe.is_empty() {
                return Err(Error::InvalidParams(format!("intervals of length {len} do not all carry mass α")));
            }
            let results = (0..n)
                .into_par_iter()
                .map(|phase| {
                    let schedule = RotatingInterval::new(n, *len, phase, *speed, horizon);
                    let tail = static_hitting(chain, schedule.tail())?;
                    let times = moving_hitting_all_starts(chain, &schedule, &tail);
                    let (x, value) = hitting::argmax(&times);
                    Ok((value, x, schedule))
                })
                .collect::<Result<Vec<_>>>()?;
            let mut best: Option<(S, usize, RotatingInterval)> = None;
            for (value, x, schedule) in results {
                if let Some(wire) = tripwire.as_deref_mut() {
                    wire.check(&value, n as u64, || format!("rotating phase {}", schedule.phase));
                }
                if best.as_ref().map_or(true, |b| value > b.0) {
                    best = Some((value, x, schedule));
                }
            }
            let (value, start, schedule) = best.expect("n ≥ 1 phases");
            TmovBound { value, start, sequence: schedule.materialize(), evaluated: (n * n) as u128 }
        }
    };
    Ok(best)
}

struct SetSearch<'a, S: Scalar> {
    chain: &'a MarkovChain<S>,
    sets: &'a [StateSet],
    tails: &'a [Vec<S>],
    horizon: usize,
}

impl<S: Scalar> SetSearch<'_, S> {
    /// Returns `(best value, choice indices, leaves evaluated, best value)`.
    fn run(&self, x: usize) -> (S, Vec<usize>, u128, S) {
        let n = self.chain.n_states();
        let mut best: Option<(S, Vec<usize>)> = None;
        let mut leaves = 0u128;
        let mut choice = Vec::with_capacity(self.horizon + 1);
        if self.horizon == 0 {
            for (k, h) in self.tails.iter().enumerate() {
                leaves += 1;
                let value = h[x].clone();
                if best.as_ref().map_or(true, |b| value > b.0) {
                    best = Some((value, vec![k]));
                }
            }
        } else {
            for (k, set) in self.sets.iter().enumerate() {
                let v = SurvivalVector::start(n, x, |y| set.contains(y));
                choice.push(k);
                self.descend(v, S::zero(), &mut choice, &mut best, &mut leaves);
                choice.pop();
            }
        }
        let (value, choice) = best.expect("nonempty family");
        (value.clone(), choice, leaves, value)
    }

    fn descend(
        &self,
        v: SurvivalVector<S>,
        acc: S,
        choice: &mut Vec<usize>,
        best: &mut Option<(S, Vec<usize>)>,
        leaves: &mut u128,
    ) {
        let acc = acc + v.total();
        let pushed = SurvivalVector { masses: self.chain.push_forward(&v.masses), time: v.time + 1 };
        let masked = |set: &StateSet| {
            let masses = pushed
                .masses
                .iter()
                .enumerate()
                .map(|(y, m)| if set.contains(y) { S::zero() } else { m.clone() })
                .collect();
            SurvivalVector { masses, time: pushed.time }
        };
        if choice.len() == self.horizon {
            for (k, set) in self.sets.iter().enumerate() {
                *leaves += 1;
                let tail_term: S = pushed
                    .masses
                    .iter()
                    .enumerate()
                    .filter(|(y, _)| !set.contains(*y))
                    .map(|(y, m)| m.clone() * self.tails[k][y].clone())
                    .sum();
                let value = acc.clone() + tail_term;
                if best.as_ref().map_or(true, |b| value > b.0) {
                    choice.push(k);
                    *best = Some((value, choice.clone()));
                    choice.pop();
                }
            }
            return;
        }
        for (k, set) in self.sets.iter().enumerate() {
            choice.push(k);
            self.descend(masked(set), acc.clone(), choice, best, leaves);
            choice.pop();
        }
    }
}

/// One row of the biased-cycle separation table.
#[derive(Debug, Clone, Serialize)]
pub struct SeparationRow {
    pub n: usize,
    pub t_mix_lazy: usize,
    pub t_hit: String,
    pub t_hit_f64: f64,
    pub rotating: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SeparationReport {
    pub bias: String,
    pub alpha: String,
    pub rows: Vec<SeparationRow>,
    pub t_mix_ratios: Vec<f64>,
    pub t_hit_ratios: Vec<f64>,
    pub rotating_ratios: Vec<f64>,
    pub passes: bool,
}

pub const QUADRATIC_RATIO_BAND: (f64, f64) = (2.5, 5.5);
pub const LINEAR_RATIO_BAND: (f64, f64) = (1.4, 2.8);

/// Biased walk on `Z_n`: the lazy mixing time and the rotating-target
/// expectation grow like `n²`, the static `t_H(α)` only like `n`.
///
/// `t_H` is solved exactly; the mixing scan and the rotating target (moving
/// at the walk's drift `2p − 1`, horizon `20 n²`) run in floating point.
pub fn separation_demo(n_values: &[usize], bias: &Rational, alpha: &Rational) -> Result<SeparationReport> {
    if n_values.windows(2).any(|w| w[1] != 2 * w[0]) {
        return Err(Error::InvalidParams("n values must double at each step".into()));
    }
    let drift = bias.clone() * Rational::from_int(2) - Rational::from_int(1);
    let (num, den) = (drift.numer().clone(), drift.denom().clone());
    let speed = (
        usize::try_from(num).map_err(|_| Error::InvalidParams("bias must be at least 1/2".into()))?,
        usize::try_from(den).map_err(|_| Error::InvalidParams("bias denominator too large".into()))?,
    );
    let mut rows = Vec::new();
    for &n in n_values {
        let exact = chain::biased_cycle(n, bias)?;
        let t_hit = hitting::t_hit(&exact, alpha, SetFamily::Intervals)?;
        let float = exact.map_scalar(|p| p.to_f64())?;
        let t_mix_lazy = chain::t_mix(&float.lazify(), &0.25, 50 * n * n)?;
        let len = t_hit.set.len();
        let alpha_f = alpha.to_f64();
        let rotating = t_mov_lower_bound(
            &float,
            &alpha_f,
            20 * n * n,
            &SequenceFamily::Rotating { len, speed },
            DEFAULT_SEARCH_BUDGET,
            None,
        )?;
        rows.push(SeparationRow { n, t_mix_lazy, t_hit: t_hit.value.to_text(), t_hit_f64: t_hit.value.to_f64(), rotating: rotating.value });
    }
    let ratios = |f: &dyn Fn(&SeparationRow) -> f64| rows.windows(2).map(|w| f(&w[1]) / f(&w[0])).collect::<Vec<_>>();
    let t_mix_ratios = ratios(&|r| r.t_mix_lazy as f64);
    let t_hit_ratios = ratios(&|r| r.t_hit_f64);
    let rotating_ratios = ratios(&|r| r.rotating);
    let within = |v: &[f64], band: (f64, f64)| v.iter().all(|r| (band.0..=band.1).contains(r));
    let passes = within(&t_mix_ratios, QUADRATIC_RATIO_BAND)
        && within(&rotating_ratios, QUADRATIC_RATIO_BAND)
        && within(&t_hit_ratios, LINEAR_RATIO_BAND);
    Ok(SeparationReport {
        bias: bias.to_text(),
        alpha: alpha.to_text(),
        rows,
        t_mix_ratios,
        t_hit_ratios,
        rotating_ratios,
        passes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{biased_cycle, cycle_walk, random_chain};
    use crate::hitting::{moving_hitting, t_hit};
    use crate::scalar::rational;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn half_half() -> MarkovChain<Rational> {
        let h = rational(1, 2);
        MarkovChain::new(vec![vec![h.clone(), h.clone()], vec![h.clone(), h]]).unwrap()
    }

    #[test]
    fn log_ceiling() {
        assert_eq!(ceil_log2_inv(&rational(1, 4)), 2);
        assert_eq!(ceil_log2_inv(&rational(1, 5)), 3);
        assert_eq!(ceil_log2_inv(&rational(1, 10)), 4);
        assert_eq!(ceil_log2_inv(&rational(2, 5)), 2);
        assert_eq!(ceil_log2_inv(&rational(1, 1)), 0);
        assert_eq!(default_epsilon(&rational(1, 5)), rational(3, 20));
    }

    #[test]
    fn witness_examples() {
        let (alpha, eps) = (rational(1, 5), rational(1, 20));
        assert!(find_slow_witness(&half_half(), &alpha, &eps, 1).unwrap().is_none());

        let cycle = biased_cycle(16, &rational(3, 4)).unwrap();
        let (x, set) = find_slow_witness(&cycle, &alpha, &eps, 1).unwrap().expect("t = 1 is far from mixed");
        let pi = cycle.stationary().unwrap().masses().to_vec();
        let hit: Rational = set.members().map(|y| cycle.prob(x, y).clone()).sum();
        assert!(hit < set.measure(&pi) - alpha - eps);

        let lazy = cycle_walk::<Rational>(6).unwrap().lazify();
        let level = rational(1, 4);
        let t = crate::chain::t_mix(&lazy, &level, 200).unwrap();
        assert!(find_slow_witness(&lazy, &rational(1, 5), &rational(1, 20), t).unwrap().is_none());
        assert!(find_slow_witness(&lazy, &rational(1, 5), &rational(1, 20), t - 1).unwrap().is_some());

        assert!(find_slow_witness(&lazy, &rational(2, 5), &rational(1, 5), 1).is_err());
    }

    #[test]
    fn gadget_on_biased_cycle() {
        let cycle = biased_cycle(16, &rational(3, 4)).unwrap();
        let alpha = rational(1, 5);
        let eps = default_epsilon(&alpha);
        for t in 1..=6 {
            let Some((x, set)) = find_slow_witness(&cycle, &alpha, &eps, t).unwrap() else { continue };
            let cert = build_gadget(&cycle, &alpha, &eps, t, x, &set).unwrap();
            assert!(cert.min_prefix_mass >= alpha);
            assert!(cert.achieved >= cert.threshold());
            assert!(cert.achieved <= rational(t as i64, 1));
            assert!(cert.deficit > rational(0, 1));
            assert_eq!(cert.sequence.prefix().len(), t);
            assert!(cert.sequence.tail().is_full());
        }
    }

    #[test]
    fn gadget_rejects_non_witness() {
        let cycle = biased_cycle(8, &rational(3, 4)).unwrap();
        let err = build_gadget(&cycle, &rational(1, 5), &rational(1, 20), 2, 0, &StateSet::singleton(8, 2));
        assert!(matches!(err, Err(Error::GadgetFalsified(_))));
    }

    #[test]
    fn backward_recursion_matches_forward() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let chain = random_chain(&mut rng, 5, 3);
        let seq = SetSequence::new(
            vec![StateSet::from_indices(5, [0]), StateSet::from_indices(5, [3, 4]), StateSet::from_indices(5, [1])],
            StateSet::from_indices(5, [2]),
        )
        .unwrap();
        let tail = static_hitting(&chain, seq.tail()).unwrap();
        let all = moving_hitting_all_starts(&chain, &seq, &tail);
        for x in 0..5 {
            assert_eq!(all[x], moving_hitting(&chain, x, &seq).unwrap());
        }
    }

    #[test]
    fn rotating_schedule_membership() {
        let r = RotatingInterval::new(8, 2, 1, (1, 2), 5);
        assert!(r.contains(0, 1) && r.contains(0, 2) && !r.contains(0, 3));
        assert!(r.contains(2, 2) && r.contains(2, 3));
        assert!(r.contains(100, 3) && r.contains(100, 4));
        assert_eq!(r.materialize().at(3), &StateSet::interval(8, 2, 2));
    }

    #[test]
    fn zero_horizon_equals_t_hit() {
        let lazy = cycle_walk::<Rational>(5).unwrap().lazify();
        let alpha = rational(2, 5);
        let bound = t_mov_lower_bound(&lazy, &alpha, 0, &SequenceFamily::Sets(SetFamily::Intervals), DEFAULT_SEARCH_BUDGET, None).unwrap();
        let th = t_hit(&lazy, &alpha, SetFamily::Intervals).unwrap();
        assert_eq!(bound.value, th.value);
        assert!(bound.sequence.prefix().is_empty());
    }

    #[test]
    fn lazy_cycle_moving_equals_static() {
        let lazy = cycle_walk::<Rational>(6).unwrap().lazify();
        let alpha = rational(1, 3);
        let th = t_hit(&lazy, &alpha, SetFamily::Intervals).unwrap();
        let mut wire = UpperBound::new(&lazy, &alpha, 1000).unwrap();
        for horizon in 0..=4 {
            let bound = t_mov_lower_bound(&lazy, &alpha, horizon, &SequenceFamily::Sets(SetFamily::Intervals), DEFAULT_SEARCH_BUDGET, Some(&mut wire)).unwrap();
            assert_eq!(bound.value, th.value, "horizon {horizon}");
            assert_eq!(moving_hitting(&lazy, bound.start, &bound.sequence).unwrap(), bound.value);
        }
        assert!(wire.violations.is_empty());
        assert!(wire.checked > 0);
    }

    #[test]
    fn search_budget_is_enforced() {
        let lazy = cycle_walk::<Rational>(6).unwrap().lazify();
        let err = t_mov_lower_bound(&lazy, &rational(1, 6), 12, &SequenceFamily::Sets(SetFamily::Intervals), 1000, None);
        assert!(matches!(err, Err(Error::SearchSpaceExceeded { .. })));
    }

    #[test]
    fn rotating_target_beats_static_on_biased_cycle() {
        let cycle = biased_cycle(16, &rational(3, 4)).unwrap();
        let alpha = rational(1, 4);
        let th = t_hit(&cycle, &alpha, SetFamily::Intervals).unwrap();
        let rot = t_mov_lower_bound(&cycle, &alpha, 256, &SequenceFamily::Rotating { len: 4, speed: (1, 2) }, DEFAULT_SEARCH_BUDGET, None).unwrap();
        assert!(rot.sequence.in_family(cycle.stationary().unwrap().masses(), &alpha));
        assert!(rot.value > th.value.clone() * rational(5, 2), "{} vs {}", rot.value.to_f64(), th.value.to_f64());
        let check = moving_hitting(&cycle, rot.start, &rot.sequence).unwrap();
        assert_eq!(check, rot.value);
    }
}
