//! Expected hitting times of static sets and of oblivious, time-varying
//! target sequences.
//!
//! Hitting times count from `t = 0`: a walk that starts inside `A_0` has
//! `τ = 0`. A moving target is evaluated through the survival vector
//! `v_t(y) = P(X_t = y, τ > t)`, and the eventually-constant tail is closed
//! off with one static linear solve.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::MarkovChain;
use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Scalar;

/// A subset of the state space `0..n`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateSet {
    mask: Vec<bool>,
}

impl StateSet {
    pub fn empty(n: usize) -> Self {
        Self { mask: vec![false; n] }
    }

    pub fn full(n: usize) -> Self {
        Self { mask: vec![true; n] }
    }

    pub fn singleton(n: usize, x: usize) -> Self {
        Self::from_indices(n, [x])
    }

    pub fn from_indices(n: usize, members: impl IntoIterator<Item = usize>) -> Self {
        let mut mask = vec![false; n];
        for x in members {
            mask[x] = true;
        }
        Self { mask }
    }

    pub fn from_mask(mask: Vec<bool>) -> Self {
        Self { mask }
    }

    /// Cyclic interval `{start, start+1, …, start+len−1} mod n`.
    pub fn interval(n: usize, start: usize, len: usize) -> Self {
        Self::from_indices(n, (0..len.min(n)).map(|k| (start + k) % n))
    }

    pub fn universe(&self) -> usize {
        self.mask.len()
    }

    pub fn contains(&self, x: usize) -> bool {
        self.mask[x]
    }

    pub fn len(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|&b| b)
    }

    pub fn is_full(&self) -> bool {
        self.mask.iter().all(|&b| b)
    }

    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }

    pub fn complement(&self) -> Self {
        Self { mask: self.mask.iter().map(|b| !b).collect() }
    }

    pub fn is_subset(&self, other: &StateSet) -> bool {
        self.mask.iter().zip(&other.mask).all(|(a, b)| !a || *b)
    }

    pub fn measure<S: Scalar>(&self, pi: &[S]) -> S {
        self.members().map(|x| pi[x].clone()).sum()
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }
}

impl fmt::Debug for StateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.members()).finish()
    }
}

/// Which sets of a time step the walk must avoid. Implemented by
/// [`SetSequence`] and by lazily generated templates.
pub trait TargetSchedule {
    fn n_states(&self) -> usize;
    /// `T` such that `A_t = tail` for every `t ≥ T`.
    fn horizon(&self) -> usize;
    fn contains(&self, t: usize, x: usize) -> bool;
    fn tail(&self) -> &StateSet;
}

/// `A_0, …, A_{T−1}` followed by a constant tail.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SetSequence {
    prefix: Vec<StateSet>,
    tail: StateSet,
}

impl SetSequence {
    pub fn new(prefix: Vec<StateSet>, tail: StateSet) -> Result<Self> {
        if tail.is_empty() {
            return Err(Error::InvalidParams("tail of a target sequence must be nonempty".into()));
        }
        let n = tail.universe();
        if let Some(bad) = prefix.iter().find(|s| s.universe() != n) {
            return Err(Error::LengthMismatch { left: bad.universe(), right: n });
        }
        Ok(Self { prefix, tail })
    }

    pub fn constant(target: StateSet) -> Result<Self> {
        Self::new(Vec::new(), target)
    }

    /// Single-point trajectory `f(0), …, f(T−1)` then `f ≡ tail`.
    pub fn trajectory(n: usize, prefix: &[usize], tail: usize) -> Self {
        Self {
            prefix: prefix.iter().map(|&x| StateSet::singleton(n, x)).collect(),
            tail: StateSet::singleton(n, tail),
        }
    }

    pub fn prefix(&self) -> &[StateSet] {
        &self.prefix
    }

    pub fn at(&self, t: usize) -> &StateSet {
        self.prefix.get(t).unwrap_or(&self.tail)
    }

    /// Membership in `𝒜(α)`: every set carries stationary mass at least `α`
    /// (up to the float slack in float mode).
    pub fn in_family<S: Scalar>(&self, pi: &[S], alpha: &S) -> bool {
        self.prefix.iter().chain(std::iter::once(&self.tail)).all(|s| s.measure(pi) + S::slack() >= *alpha)
    }

    /// The file representation: indices of each set.
    pub fn to_file(&self) -> SetSequenceFile {
        SetSequenceFile {
            prefix: self.prefix.iter().map(|s| s.members().collect()).collect(),
            tail: self.tail.members().collect(),
        }
    }

    pub fn from_file(file: &SetSequenceFile, n: usize) -> Result<Self> {
        let to_set = |idx: &Vec<usize>| -> Result<StateSet> {
            if let Some(&bad) = idx.iter().find(|&&x| x >= n) {
                return Err(Error::InvalidParams(format!("state {bad} out of range for {n} states")));
            }
            Ok(StateSet::from_indices(n, idx.iter().copied()))
        };
        let prefix = file.prefix.iter().map(to_set).collect::<Result<Vec<_>>>()?;
        Self::new(prefix, to_set(&file.tail)?)
    }
}

impl fmt::Debug for SetSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} then {:?} forever", self.prefix, self.tail)
    }
}

impl TargetSchedule for SetSequence {
    fn n_states(&self) -> usize {
        self.tail.universe()
    }

    fn horizon(&self) -> usize {
        self.prefix.len()
    }

    fn contains(&self, t: usize, x: usize) -> bool {
        self.at(t).contains(x)
    }

    fn tail(&self) -> &StateSet {
        &self.tail
    }
}

/// `{"prefix": [[…], …], "tail": […]}`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetSequenceFile {
    pub prefix: Vec<Vec<usize>>,
    pub tail: Vec<usize>,
}

/// Sub-probability vector `v_t(y) = P(X_t = y, τ > t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalVector<S: Scalar> {
    pub masses: Vec<S>,
    pub time: usize,
}

impl<S: Scalar> SurvivalVector<S> {
    /// `δ_start` masked by the time-0 target.
    pub fn start(n: usize, start: usize, initial_target: impl Fn(usize) -> bool) -> Self {
        let mut masses = vec![S::zero(); n];
        if !initial_target(start) {
            masses[start] = S::one();
        }
        Self { masses, time: 0 }
    }

    pub fn total(&self) -> S {
        self.masses.iter().cloned().sum()
    }
}

/// `v'(y) = (Σ_z v(z) P(z,y)) · 1(y ∉ next_target)`.
pub fn survival_step<S: Scalar>(chain: &MarkovChain<S>, v: &SurvivalVector<S>, next_target: &StateSet) -> SurvivalVector<S> {
    survival_step_by(chain, v, |y| next_target.contains(y))
}

pub fn survival_step_by<S: Scalar>(
    chain: &MarkovChain<S>,
    v: &SurvivalVector<S>,
    next_target: impl Fn(usize) -> bool,
) -> SurvivalVector<S> {
    let mut masses = chain.push_forward(&v.masses);
    for (y, m) in masses.iter_mut().enumerate() {
        if next_target(y) {
            *m = S::zero();
        }
    }
    SurvivalVector { masses, time: v.time + 1 }
}

/// `E_x[τ_A]` for every `x`; zero on `A`.
pub fn static_hitting<S: Scalar>(chain: &MarkovChain<S>, target: &StateSet) -> Result<Vec<S>> {
    let n = chain.n_states();
    if target.universe() != n {
        return Err(Error::LengthMismatch { left: target.universe(), right: n });
    }
    if target.is_empty() {
        return Err(Error::InvalidParams("hitting target must be nonempty".into()));
    }
    let outside: Vec<usize> = target.complement().members().collect();
    let mut slot = vec![usize::MAX; n];
    for (k, &x) in outside.iter().enumerate() {
        slot[x] = k;
    }
    // (I − P restricted to Aᶜ) h = 1
    let m = outside.len();
    let mut a = vec![vec![S::zero(); m]; m];
    for (i, &x) in outside.iter().enumerate() {
        a[i][i] = S::one();
        for (y, p) in chain.support(x) {
            if slot[*y] != usize::MAX {
                let j = slot[*y];
                a[i][j] = a[i][j].clone() - p.clone();
            }
        }
    }
    let h = linalg::solve(a, vec![S::one(); m])?;
    let mut out = vec![S::zero(); n];
    for (k, &x) in outside.iter().enumerate() {
        out[x] = h[k].clone();
    }
    Ok(out)
}

/// `H[x][y] = E_x[τ_y]` for every pair from one inversion of the
/// fundamental matrix `Z = (I − P + Π)⁻¹`: `E_x[τ_y] = (Z_yy − Z_xy) / π_y`.
pub fn all_pairs_hitting<S: Scalar>(chain: &MarkovChain<S>) -> Result<Vec<Vec<S>>> {
    let n = chain.n_states();
    let pi = chain.stationary()?.masses().to_vec();
    let a = (0..n)
        .map(|x| {
            (0..n)
                .map(|y| {
                    let id = if x == y { S::one() } else { S::zero() };
                    id - chain.prob(x, y).clone() + pi[y].clone()
                })
                .collect()
        })
        .collect();
    let z = linalg::invert(a)?;
    Ok((0..n)
        .map(|x| (0..n).map(|y| (z[y][y].clone() - z[x][y].clone()) / pi[y].clone()).collect())
        .collect())
}

/// `E_start[τ_A]` for a moving target, given `E_y[τ_tail]` for every `y`.
pub fn moving_hitting_with<S: Scalar>(
    chain: &MarkovChain<S>,
    start: usize,
    schedule: &impl TargetSchedule,
    tail_times: &[S],
) -> S {
    let n = chain.n_states();
    let mut v = SurvivalVector::start(n, start, |y| schedule.contains(0, y));
    let mut acc = S::zero();
    for t in 1..=schedule.horizon() {
        acc = acc + v.total();
        v = survival_step_by(chain, &v, |y| schedule.contains(t, y));
    }
    let tail_term: S = v.masses.iter().zip(tail_times).map(|(m, h)| m.clone() * h.clone()).sum();
    acc + tail_term
}

/// `E_start[τ_A]` for `τ_A = inf{t ≥ 0 : X_t ∈ A_t}`.
pub fn moving_hitting<S: Scalar>(chain: &MarkovChain<S>, start: usize, schedule: &impl TargetSchedule) -> Result<S> {
    let tail_times = static_hitting(chain, schedule.tail())?;
    Ok(moving_hitting_with(chain, start, schedule, &tail_times))
}

/// Survival masses `|v_0|, …, |v_T|` along a schedule.
pub fn survival_masses<S: Scalar>(chain: &MarkovChain<S>, start: usize, schedule: &impl TargetSchedule, steps: usize) -> Vec<S> {
    let n = chain.n_states();
    let mut v = SurvivalVector::start(n, start, |y| schedule.contains(0, y));
    let mut out = vec![v.total()];
    for t in 1..=steps {
        v = survival_step_by(chain, &v, |y| schedule.contains(t, y));
        out.push(v.total());
    }
    out
}

/// Candidate target sets for the max-hitting statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SetFamily {
    /// Every qualifying subset (small chains only).
    All,
    /// Inclusion-minimal qualifying subsets.
    Minimal,
    /// For each start index, the shortest qualifying cyclic interval.
    Intervals,
    /// `Ω ∖ {y}` for each `y`.
    SingletonComplements,
}

impl std::str::FromStr for SetFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(Self::All),
            "minimal" => Ok(Self::Minimal),
            "intervals" => Ok(Self::Intervals),
            "singleton-complements" => Ok(Self::SingletonComplements),
            other => Err(Error::Parse(format!("unknown set family {other:?}"))),
        }
    }
}

pub const ALL_SETS_STATE_LIMIT: usize = 16;
pub const MINIMAL_SETS_STATE_LIMIT: usize = 20;

/// Qualifying sets `π(A) ≥ α` from `family`, in a fixed enumeration order.
pub fn enumerate_family<S: Scalar>(pi: &[S], alpha: &S, family: SetFamily) -> Result<Vec<StateSet>> {
    let n = pi.len();
    let from_bits = |bits: u32| StateSet::from_indices(n, (0..n).filter(|i| bits >> i & 1 == 1));
    let mass_of = |bits: u32| -> S { (0..n).filter(|i| bits >> i & 1 == 1).map(|i| pi[i].clone()).sum() };
    let sets = match family {
        SetFamily::All => {
            if n > ALL_SETS_STATE_LIMIT {
                return Err(Error::StateLimitExceeded { states: n, limit: ALL_SETS_STATE_LIMIT });
            }
            (1u32..1 << n).filter(|&b| mass_of(b) >= *alpha).map(from_bits).collect()
        }
        SetFamily::Minimal => {
            if n > MINIMAL_SETS_STATE_LIMIT {
                return Err(Error::StateLimitExceeded { states: n, limit: MINIMAL_SETS_STATE_LIMIT });
            }
            (1u32..1 << n)
                .filter(|&b| {
                    let m = mass_of(b);
                    m >= *alpha
                        && (0..n).filter(|i| b >> i & 1 == 1).all(|i| m.clone() - pi[i].clone() < *alpha)
                })
                .map(from_bits)
                .collect()
        }
        SetFamily::Intervals => {
            let mut out: Vec<StateSet> = Vec::new();
            for start in 0..n {
                let mut acc = S::zero();
                for len in 1..=n {
                    acc = acc + pi[(start + len - 1) % n].clone();
                    if acc >= *alpha {
                        let set = StateSet::interval(n, start, len);
                        if !out.contains(&set) {
                            out.push(set);
                        }
                        break;
                    }
                }
            }
            out
        }
        SetFamily::SingletonComplements => (0..n)
            .map(|y| StateSet::singleton(n, y).complement())
            .filter(|s| !s.is_empty() && s.measure(pi) >= *alpha)
            .collect(),
    };
    Ok(sets)
}

/// `max_{x, A ∈ family, π(A) ≥ α} E_x[τ_A]` with its maximiser.
#[derive(Debug, Clone)]
pub struct HittingMax<S: Scalar> {
    pub value: S,
    pub start: usize,
    pub set: StateSet,
}

pub fn t_hit<S: Scalar>(chain: &MarkovChain<S>, alpha: &S, family: SetFamily) -> Result<HittingMax<S>> {
    if !(alpha.is_positive() && *alpha <= S::one()) {
        return Err(Error::InvalidParams(format!("alpha must lie in (0,1], got {alpha}")));
    }
    let pi = chain.stationary()?.masses().to_vec();
    let sets = enumerate_family(&pi, alpha, family)?;
    let scored = sets
        .par_iter()
        .map(|set| {
            let h = static_hitting(chain, set)?;
            let (start, value) = argmax(&h);
            Ok((value, start))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut best: Option<HittingMax<S>> = None;
    for ((value, start), set) in scored.into_iter().zip(sets) {
        if best.as_ref().map_or(true, |b| value > b.value) {
            best = Some(HittingMax { value, start, set });
        }
    }
    best.ok_or_else(|| Error::InvalidParams("no qualifying set".into()))
}

/// First index of the maximum.
pub(crate) fn argmax<S: Scalar>(values: &[S]) -> (usize, S) {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    (best, values[best].clone())
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub runs: u64,
}

impl McEstimate {
    pub fn from_samples(samples: &[f64]) -> Self {
        let runs = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / runs;
        let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (runs - 1.0).max(1.0);
        Self { mean, std_error: (var / runs).sqrt(), runs: samples.len() as u64 }
    }

    /// `|mean − exact| ≤ k · std_error`.
    pub fn agrees_with(&self, exact: f64, k: f64) -> bool {
        (self.mean - exact).abs() <= k * self.std_error
    }
}

/// Per-run generator: run `i` always sees the same stream regardless of
/// scheduling.
pub fn run_rng(seed: u64, run: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run);
    rng
}

/// Cumulative row distributions for sampling.
pub(crate) struct Sampler {
    rows: Vec<Vec<(usize, f64)>>,
}

impl Sampler {
    pub fn new<S: Scalar>(chain: &MarkovChain<S>) -> Self {
        let rows = (0..chain.n_states())
            .map(|x| {
                let mut acc = 0.0;
                chain
                    .support(x)
                    .iter()
                    .map(|(y, p)| {
                        acc += p.to_f64();
                        (*y, acc)
                    })
                    .collect()
            })
            .collect();
        Self { rows }
    }

    pub fn step(&self, x: usize, rng: &mut impl Rng) -> usize {
        let row = &self.rows[x];
        let u: f64 = rng.gen::<f64>() * row.last().map_or(1.0, |r| r.1);
        row.iter().find(|(_, c)| u < *c).unwrap_or(row.last().unwrap()).0
    }
}

/// Seeded Monte Carlo estimate of `E_start[τ_A]`; a cross-check oracle for
/// [`moving_hitting`].
pub fn monte_carlo_hitting<S: Scalar>(
    chain: &MarkovChain<S>,
    start: usize,
    schedule: &(impl TargetSchedule + Sync),
    runs: u64,
    seed: u64,
) -> McEstimate {
    let sampler = Sampler::new(chain);
    let samples: Vec<f64> = (0..runs)
        .into_par_iter()
        .map(|run| {
            let mut rng = run_rng(seed, run);
            let mut x = start;
            let mut t = 0usize;
            while !schedule.contains(t, x) {
                x = sampler.step(x, &mut rng);
                t += 1;
            }
            t as f64
        })
        .collect();
    McEstimate::from_samples(&samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{cycle_walk, random_chain};
    use crate::scalar::{rational, Rational};
    use num_traits::Zero;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cycle_hitting_matches_gambler_ruin() {
        for n in [5usize, 7, 9] {
            let chain = cycle_walk::<Rational>(n).unwrap();
            for k in 0..n {
                let h = static_hitting(&chain, &StateSet::singleton(n, k)).unwrap();
                assert_eq!(h[0], rational((k * (n - k)) as i64, 1), "n={n} k={k}");
                assert!(h[k].is_zero());
            }
        }
    }

    #[test]
    fn lazy_hitting_doubles() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let chain = random_chain(&mut rng, 5, 3);
            let lazy = chain.lazify();
            let target = StateSet::from_indices(5, [1, 3]);
            let plain = static_hitting(&chain, &target).unwrap();
            let doubled = static_hitting(&lazy, &target).unwrap();
            for (a, b) in plain.iter().zip(&doubled) {
                assert_eq!(a.clone() * rational(2, 1), *b);
            }
        }
    }

    #[test]
    fn fundamental_matrix_matches_linear_solves() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..5 {
            let chain = random_chain(&mut rng, 6, 4);
            let all = all_pairs_hitting(&chain).unwrap();
            for y in 0..6 {
                let col = static_hitting(&chain, &StateSet::singleton(6, y)).unwrap();
                for x in 0..6 {
                    assert_eq!(all[x][y], col[x]);
                }
            }
        }
    }

    #[test]
    fn empty_target_rejected() {
        let chain = cycle_walk::<Rational>(4).unwrap();
        assert!(static_hitting(&chain, &StateSet::empty(4)).is_err());
        assert!(SetSequence::new(vec![], StateSet::empty(4)).is_err());
    }

    #[test]
    fn survival_step_examples() {
        let chain = cycle_walk::<Rational>(3).unwrap().lazify();
        let v = SurvivalVector::start(3, 0, |_| false);
        let all = survival_step(&chain, &v, &StateSet::full(3));
        assert!(all.total().is_zero());
        let none = survival_step(&chain, &v, &StateSet::empty(3));
        assert_eq!(none.total(), v.total());
        let masked = survival_step(&chain, &v, &StateSet::singleton(3, 1));
        assert_eq!(masked.masses, vec![rational(1, 2), rational(0, 1), rational(1, 4)]);
        assert_eq!(masked.time, 1);
    }

    #[test]
    fn constant_sequence_reduces_to_static() {
        let chain = cycle_walk::<Rational>(6).unwrap().lazify();
        let target = StateSet::from_indices(6, [2, 3]);
        let h = static_hitting(&chain, &target).unwrap();
        let seq = SetSequence::constant(target.clone()).unwrap();
        for x in 0..6 {
            assert_eq!(moving_hitting(&chain, x, &seq).unwrap(), h[x]);
        }
        // Start inside A_0.
        let seq = SetSequence::new(vec![StateSet::singleton(6, 4)], target).unwrap();
        assert!(moving_hitting(&chain, 4, &seq).unwrap().is_zero());
    }

    #[test]
    fn unreachable_prefix_points_do_not_matter() {
        // Lazy Z_10 from 0: states 4..=6 are unreachable before time 4.
        let chain = cycle_walk::<Rational>(10).unwrap().lazify();
        let seq = SetSequence::trajectory(10, &[4, 6, 5, 4], 3);
        let h3 = static_hitting(&chain, &StateSet::singleton(10, 3)).unwrap();
        assert!(moving_hitting(&chain, 0, &seq).unwrap() >= rational(0, 1));
        // 3 itself is reachable at time 3, so only compare a far tail.
        let far = SetSequence::trajectory(10, &[4, 6, 4], 5);
        let h5 = static_hitting(&chain, &StateSet::singleton(10, 5)).unwrap();
        assert_eq!(moving_hitting(&chain, 0, &far).unwrap(), h5[0]);
        assert!(h3[0] > rational(0, 1));
    }

    #[test]
    fn survival_mass_is_non_increasing() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let chain = random_chain(&mut rng, 6, 4);
        let seq = SetSequence::new(
            vec![StateSet::from_indices(6, [1]), StateSet::from_indices(6, [2, 4]), StateSet::from_indices(6, [0])],
            StateSet::from_indices(6, [5]),
        )
        .unwrap();
        let masses = survival_masses(&chain, 3, &seq, 12);
        for w in masses.windows(2) {
            assert!(w[1] <= w[0]);
        }
    }

    #[test]
    fn t_hit_examples() {
        let lazy8 = cycle_walk::<Rational>(8).unwrap().lazify();
        let best = t_hit(&lazy8, &rational(1, 8), SetFamily::Intervals).unwrap();
        assert_eq!(best.value, rational(32, 1));
        assert_eq!(best.set.len(), 1);
        let target = best.set.members().next().unwrap();
        assert_eq!((target + 8 - best.start) % 8, 4);

        let whole = t_hit(&lazy8, &rational(1, 1), SetFamily::Intervals).unwrap();
        assert!(whole.value.is_zero());

        let lazy6 = cycle_walk::<Rational>(6).unwrap().lazify();
        let all = t_hit(&lazy6, &rational(1, 3), SetFamily::All).unwrap();
        let minimal = t_hit(&lazy6, &rational(1, 3), SetFamily::Minimal).unwrap();
        assert_eq!(all.value, minimal.value);
        assert!(t_hit(&lazy6, &rational(0, 1), SetFamily::All).is_err());
    }

    #[test]
    fn family_guards() {
        let pi = vec![1.0 / 17.0; 17];
        assert!(matches!(
            enumerate_family(&pi, &0.1, SetFamily::All),
            Err(Error::StateLimitExceeded { .. })
        ));
        let pi = vec![rational(1, 4); 4];
        let comps = enumerate_family(&pi, &rational(1, 2), SetFamily::SingletonComplements).unwrap();
        assert_eq!(comps.len(), 4);
        let minimal = enumerate_family(&pi, &rational(1, 2), SetFamily::Minimal).unwrap();
        assert!(minimal.iter().all(|s| s.len() == 2));
        assert_eq!(minimal.len(), 6);
    }

    #[test]
    fn monte_carlo_matches_exact_on_small_instance() {
        let chain = cycle_walk::<Rational>(5).unwrap().lazify();
        let seq = SetSequence::new(vec![StateSet::singleton(5, 2), StateSet::singleton(5, 3)], StateSet::singleton(5, 4)).unwrap();
        let exact = moving_hitting(&chain, 0, &seq).unwrap().to_f64();
        let mc = monte_carlo_hitting(&chain, 0, &seq, 20_000, 7);
        assert!(mc.agrees_with(exact, 4.0), "{mc:?} vs {exact}");
        assert_eq!(mc, monte_carlo_hitting(&chain, 0, &seq, 20_000, 7));
    }

    #[test]
    fn sequence_file_round_trip() {
        let seq = SetSequence::new(vec![StateSet::from_indices(4, [0, 2])], StateSet::singleton(4, 3)).unwrap();
        let file = seq.to_file();
        let json = serde_json::to_string(&file).unwrap();
        assert_eq!(json, r#"{"prefix":[[0,2]],"tail":[3]}"#);
        let back: SetSequenceFile = serde_json::from_str(&json).unwrap();
        assert_eq!(SetSequence::from_file(&back, 4).unwrap(), seq);
        assert!(SetSequence::from_file(&back, 3).is_err());
    }
}
