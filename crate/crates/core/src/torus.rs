//! Walks on the discrete torus `Z_n^d`, reflections and two-point
//! rearrangements, and exhaustive checks that a constant target at the
//! antipode is the hardest single-point trajectory to avoid.

use num_traits::{Signed, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::adversary::{t_mov_lower_bound, SequenceFamily, UpperBound, DEFAULT_SEARCH_BUDGET};
use crate::chain::MarkovChain;
use crate::error::{Error, Result};
use crate::hitting::{run_rng, t_hit, SetFamily, StateSet};
use crate::scalar::{rational, Rational, Scalar};

pub const TORUS_STATE_LIMIT: usize = 4096;
pub const TRAJECTORY_BUDGET: u128 = 10_000_000;
/// Maximizing trajectories kept verbatim in a brute-force result.
pub const MAXIMIZERS_KEPT: usize = 256;

/// Shape of `Z_n^d`. Points are indexed little-endian: `Σ_k x_k n^k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Torus {
    pub n: usize,
    pub d: usize,
}

impl Torus {
    pub fn new(n: usize, d: usize) -> Result<Self> {
        if n < 3 || d < 1 {
            return Err(Error::InvalidParams(format!("torus needs n ≥ 3 and d ≥ 1, got n={n}, d={d}")));
        }
        let size = (n as u128).checked_pow(d as u32).unwrap_or(u128::MAX);
        if size > TORUS_STATE_LIMIT as u128 {
            return Err(Error::StateLimitExceeded { states: size.min(usize::MAX as u128) as usize, limit: TORUS_STATE_LIMIT });
        }
        Ok(Self { n, d })
    }

    pub fn size(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    pub fn coords(&self, mut x: usize) -> Vec<usize> {
        (0..self.d)
            .map(|_| {
                let c = x % self.n;
                x /= self.n;
                c
            })
            .collect()
    }

    pub fn index(&self, coords: &[usize]) -> usize {
        coords.iter().rev().fold(0, |acc, &c| acc * self.n + c % self.n)
    }

    /// Graph distance: sum of per-coordinate cycle distances.
    pub fn distance(&self, x: usize, y: usize) -> usize {
        self.coords(x)
            .into_iter()
            .zip(self.coords(y))
            .map(|(a, b)| {
                let diff = a.abs_diff(b);
                diff.min(self.n - diff)
            })
            .sum()
    }

    /// `(⌊n/2⌋, …, ⌊n/2⌋)`
    pub fn antipode(&self) -> usize {
        self.index(&vec![self.n / 2; self.d])
    }

    pub fn neighbors(&self, x: usize) -> Vec<usize> {
        let c = self.coords(x);
        let mut out = Vec::with_capacity(2 * self.d);
        for k in 0..self.d {
            for step in [1, self.n - 1] {
                let mut y = c.clone();
                y[k] = (y[k] + step) % self.n;
                out.push(self.index(&y));
            }
        }
        out
    }

    pub fn label(&self, x: usize) -> String {
        let c = self.coords(x);
        if self.d == 1 {
            c[0].to_string()
        } else {
            format!("({})", c.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","))
        }
    }
}

/// `p(x,x) = 1/2`, `p(x,y) = 1/(4d)` for each of the `2d` neighbours.
pub fn lazy_torus_kernel(n: usize, d: usize) -> Result<MarkovChain<Rational>> {
    torus_kernel(Torus::new(n, d)?, true)
}

/// Simple random walk without holding: `1/(2d)` per neighbour.
pub fn plain_torus_kernel(n: usize, d: usize) -> Result<MarkovChain<Rational>> {
    torus_kernel(Torus::new(n, d)?, false)
}

fn torus_kernel(torus: Torus, lazy: bool) -> Result<MarkovChain<Rational>> {
    let size = torus.size();
    let (hold, step) = if lazy {
        (rational(1, 2), rational(1, 4 * torus.d as i64))
    } else {
        (rational(0, 1), rational(1, 2 * torus.d as i64))
    };
    let rows = (0..size)
        .map(|x| {
            let mut row = vec![rational(0, 1); size];
            row[x] = hold.clone();
            for y in torus.neighbors(x) {
                row[y] += step.clone();
            }
            row
        })
        .collect();
    MarkovChain::new(rows)
}

/// An involutive isometry with half-spaces `H⁺`, `H⁻ = σH⁺` and fixed set `H⁰`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reflection {
    pub torus: Torus,
    pub map: Vec<usize>,
    pub h_plus: StateSet,
    pub h_minus: StateSet,
    pub h_zero: StateSet,
}

impl Reflection {
    /// Builds `H⁻ = σH⁺`, `H⁰ = Fix σ` and validates every invariant exhaustively.
    pub fn from_parts(torus: Torus, map: Vec<usize>, h_plus: StateSet) -> Result<Self> {
        let size = torus.size();
        if map.len() != size || h_plus.universe() != size {
            return Err(Error::LengthMismatch { left: map.len(), right: size });
        }
        let h_zero = StateSet::from_indices(size, (0..size).filter(|&x| map.get(x) == Some(&x)));
        let h_minus = StateSet::from_indices(size, h_plus.members().filter_map(|x| map.get(x).copied()));
        let sigma = Self { torus, map, h_plus, h_minus, h_zero };
        sigma.validate()?;
        Ok(sigma)
    }

    pub fn identity(torus: Torus) -> Self {
        let size = torus.size();
        Self::from_parts(torus, (0..size).collect(), StateSet::empty(size)).expect("identity is a reflection")
    }

    /// `σ(x) = (c − x) mod n` on `Z_n`, with `H⁺` the points strictly
    /// closer to `p` than to `σp`.
    pub fn on_cycle(n: usize, c: usize, p: usize) -> Result<Self> {
        let torus = Torus::new(n, 1)?;
        let map: Vec<usize> = (0..n).map(|x| (c % n + n - x) % n).collect();
        if map[p % n] == p % n {
            return Err(Error::InvalidCase(format!("p = {p} is fixed by x ↦ {c} − x on Z_{n}")));
        }
        let sp = map[p % n];
        let h_plus = StateSet::from_indices(n, (0..n).filter(|&x| torus.distance(x, p % n) < torus.distance(x, sp)));
        Self::from_parts(torus, map, h_plus)
    }

    /// Acts as `base` on coordinate `axis` and as the identity elsewhere.
    pub fn lift(base: &Reflection, torus: Torus, axis: usize) -> Result<Self> {
        if base.torus.d != 1 || base.torus.n != torus.n || axis >= torus.d {
            return Err(Error::InvalidParams(format!("cannot lift a reflection of Z_{} to axis {axis} of Z_{}^{}", base.torus.n, torus.n, torus.d)));
        }
        let size = torus.size();
        let mut map = Vec::with_capacity(size);
        let mut plus = Vec::new();
        for x in 0..size {
            let mut c = torus.coords(x);
            if base.h_plus.contains(c[axis]) {
                plus.push(x);
            }
            c[axis] = base.map[c[axis]];
            map.push(torus.index(&c));
        }
        Self::from_parts(torus, map, StateSet::from_indices(size, plus))
    }

    pub fn apply(&self, x: usize) -> usize {
        self.map[x]
    }

    pub fn validate(&self) -> Result<()> {
        let size = self.torus.size();
        let bad = |why: String| Err(Error::InvalidCase(why));
        for x in 0..size {
            if self.map[x] >= size || self.map[self.map[x]] != x {
                return bad(format!("σ is not an involution at {}", self.torus.label(x)));
            }
        }
        for x in 0..size {
            for y in 0..size {
                if self.torus.distance(x, y) != self.torus.distance(self.map[x], self.map[y]) {
                    return bad(format!("σ is not an isometry on ({}, {})", self.torus.label(x), self.torus.label(y)));
                }
            }
        }
        for x in 0..size {
            let parts = [&self.h_plus, &self.h_minus, &self.h_zero].iter().filter(|s| s.contains(x)).count();
            if parts != 1 {
                return bad(format!("{} lies in {parts} of H⁺, H⁻, H⁰", self.torus.label(x)));
            }
        }
        for x in self.h_plus.members() {
            for y in self.h_plus.members() {
                if self.torus.distance(x, y) >= self.torus.distance(x, self.map[y]) {
                    return bad(format!("d({0},{1}) ≥ d({0},σ{1}) inside H⁺", self.torus.label(x), self.torus.label(y)));
                }
            }
        }
        Ok(())
    }

    /// `{b}^σ`: points of `H⁻` move to their mirror image.
    pub fn polarize_point(&self, b: usize) -> usize {
        if self.h_minus.contains(b) {
            self.map[b]
        } else {
            b
        }
    }
}

/// `A^σ ∩ H⁺ = (A ∪ σA) ∩ H⁺`, `A^σ ∩ H⁻ = (A ∩ σA) ∩ H⁻`, `H⁰` unchanged.
pub fn polarize_set(set: &StateSet, sigma: &Reflection) -> StateSet {
    let size = sigma.torus.size();
    StateSet::from_indices(
        size,
        (0..size).filter(|&x| {
            let (here, mirror) = (set.contains(x), set.contains(sigma.map[x]));
            if sigma.h_plus.contains(x) {
                here || mirror
            } else if sigma.h_minus.contains(x) {
                here && mirror
            } else {
                here
            }
        }),
    )
}

/// Reflection of `Z_n` taking `Z_n ∖ {target}` to `Z_n ∖ {a}` while fixing `{0}`.
///
/// `σ(x) = (a + target − x) mod n` with `H⁺` the points closer to `target`
/// than to `a`; `target = a` gives the identity.
pub fn antipode_reflection(n: usize, target: usize, a: usize) -> Result<Reflection> {
    let torus = Torus::new(n, 1)?;
    if target >= n || a >= n {
        return Err(Error::InvalidParams(format!("points must lie in Z_{n}")));
    }
    if target == a {
        return Ok(Reflection::identity(torus));
    }
    let sigma = Reflection::on_cycle(n, a + target, target)?;
    let punctured = |p: usize| StateSet::singleton(n, p).complement();
    if polarize_set(&punctured(target), &sigma) != punctured(a) {
        return Err(Error::InvalidCase(format!("Z_{n} ∖ {{{target}}} does not polarize to Z_{n} ∖ {{{a}}}")));
    }
    if polarize_set(&StateSet::singleton(n, 0), &sigma) != StateSet::singleton(n, 0) {
        return Err(Error::InvalidCase(format!("{{0}} moves under the reflection for target {target}")));
    }
    if polarize_set(&punctured(a), &sigma) != punctured(a) {
        return Err(Error::InvalidCase(format!("Z_{n} ∖ {{{a}}} is not fixed")));
    }
    Ok(sigma)
}

/// `J = Σ_ε Π_i φ_i(ε_i) Π_{i≤j} k_ij(ε_i, ε_j)` with
/// `k_ij(ε,ε') = a_ij + b_ij·1(ε = ε')`. Index 0 is `+`, index 1 is `−`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoPointInstance {
    #[serde(serialize_with = "ser_pairs")]
    pub phi: Vec<[Rational; 2]>,
    #[serde(serialize_with = "ser_matrix")]
    pub a: Vec<Vec<Rational>>,
    #[serde(serialize_with = "ser_matrix")]
    pub b: Vec<Vec<Rational>>,
}

fn ser_pairs<S: serde::Serializer>(v: &[[Rational; 2]], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|p| [p[0].to_text(), p[1].to_text()]))
}

fn ser_matrix<S: serde::Serializer>(m: &[Vec<Rational>], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(m.iter().map(|row| row.iter().map(Scalar::to_text).collect::<Vec<_>>()))
}

pub const TWO_POINT_FUNCTION_LIMIT: usize = 20;

impl TwoPointInstance {
    pub fn new(phi: Vec<[Rational; 2]>, a: Vec<Vec<Rational>>, b: Vec<Vec<Rational>>) -> Result<Self> {
        let n = phi.len();
        if n > TWO_POINT_FUNCTION_LIMIT {
            return Err(Error::StateLimitExceeded { states: n, limit: TWO_POINT_FUNCTION_LIMIT });
        }
        for m in [&a, &b] {
            if m.len() != n || m.iter().any(|row| row.len() != n) {
                return Err(Error::LengthMismatch { left: m.len(), right: n });
            }
        }
        let negative = phi.iter().flatten().chain(a.iter().flatten()).chain(b.iter().flatten()).any(|v| v.is_negative());
        if negative {
            return Err(Error::InvalidParams("two-point instance needs nonnegative φ, a and b".into()));
        }
        Ok(Self { phi, a, b })
    }

    pub fn n_funcs(&self) -> usize {
        self.phi.len()
    }

    /// `φ^σ(+) = max`, `φ^σ(−) = min`.
    pub fn rearranged(&self) -> Self {
        let phi = self
            .phi
            .iter()
            .map(|[p, m]| if p >= m { [p.clone(), m.clone()] } else { [m.clone(), p.clone()] })
            .collect();
        Self { phi, a: self.a.clone(), b: self.b.clone() }
    }

    pub fn random(rng: &mut impl Rng, n_funcs: usize, max_num: i64) -> Self {
        let r = |rng: &mut dyn rand::RngCore| rational(rng.gen_range(0..=max_num), rng.gen_range(1..=max_num.max(1)));
        let phi = (0..n_funcs).map(|_| [r(rng), r(rng)]).collect();
        let a = (0..n_funcs).map(|_| (0..n_funcs).map(|_| r(rng)).collect()).collect();
        let b = (0..n_funcs).map(|_| (0..n_funcs).map(|_| r(rng)).collect()).collect();
        Self { phi, a, b }
    }
}

pub fn two_point_j(instance: &TwoPointInstance) -> Rational {
    let n = instance.n_funcs();
    (0u32..1 << n)
        .map(|signs| {
            // bit set = `−`
            let eps = |i: usize| (signs >> i & 1) as usize;
            let mut term = rational(1, 1);
            for i in 0..n {
                term *= instance.phi[i][eps(i)].clone();
                if term.is_zero() {
                    return term;
                }
            }
            for i in 0..n {
                for j in i..n {
                    let mut k = instance.a[i][j].clone();
                    if eps(i) == eps(j) {
                        k += instance.b[i][j].clone();
                    }
                    term *= k;
                }
            }
            term
        })
        .sum()
}


/// `P_start(X_1 ∈ D_1, …, X_t ∈ D_t)` by the masked forward recursion.
pub fn confined_probability(chain: &MarkovChain<Rational>, start: usize, sets: &[StateSet]) -> Rational {
    let mut v = vec![rational(0, 1); chain.n_states()];
    v[start] = rational(1, 1);
    for set in sets {
        v = chain.push_forward(&v);
        for (y, m) in v.iter_mut().enumerate() {
            if !set.contains(y) {
                *m = rational(0, 1);
            }
        }
    }
    v.into_iter().sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotoneCheck {
    pub lhs: String,
    pub rhs: String,
    pub pass: bool,
}

/// Compares `P_b(X_s ∈ D_s, s ≤ t)` with `P_{b^σ}(X_s ∈ D_s^σ, s ≤ t)` on the lazy walk.
pub fn check_survival_monotone(chain: &MarkovChain<Rational>, b: usize, sets: &[StateSet], sigma: &Reflection) -> MonotoneCheck {
    let lhs = confined_probability(chain, b, sets);
    let polarized: Vec<StateSet> = sets.iter().map(|s| polarize_set(s, sigma)).collect();
    let rhs = confined_probability(chain, sigma.polarize_point(b), &polarized);
    MonotoneCheck { pass: lhs <= rhs, lhs: lhs.to_text(), rhs: rhs.to_text() }
}

#[derive(Debug, Clone, Serialize)]
pub struct AntipodeSearch {
    pub n: usize,
    pub d: usize,
    pub t: usize,
    pub lazy: bool,
    pub max_survival: String,
    pub antipode_survival: String,
    /// Trajectories `f(1), …, f(t)` attaining the maximum, as point labels.
    pub maximizers: Vec<Vec<String>>,
    pub maximizer_count: u64,
    pub evaluated: u64,
    pub antipode_is_maximizer: bool,
    pub pass: bool,
}

/// Exhaustive `max_f P_0(X_s ≠ f(s), 1 ≤ s ≤ t)` over all trajectories.
pub fn antipode_bruteforce(n: usize, d: usize, t: usize, lazy: bool) -> Result<AntipodeSearch> {
    let torus = Torus::new(n, d)?;
    let size = torus.size();
    let space = (size as u128).checked_pow(t as u32).unwrap_or(u128::MAX);
    if space > TRAJECTORY_BUDGET {
        return Err(Error::SearchSpaceExceeded { size: space, budget: TRAJECTORY_BUDGET });
    }
    let chain = torus_kernel(torus, lazy)?;
    let a = torus.antipode();
    let antipode = confined_probability(&chain, 0, &vec![StateSet::singleton(size, a).complement(); t]);

    let mut start = vec![rational(0, 1); size];
    start[0] = rational(1, 1);
    let best = if t == 0 {
        Best { value: rational(1, 1), trajectories: vec![Vec::new()], count: 1, evaluated: 1 }
    } else {
        let first = chain.push_forward(&start);
        (0..size)
            .into_par_iter()
            .map(|y| {
                let mut v = first.clone();
                v[y] = rational(0, 1);
                let mut best = Best::default();
                let mut path = vec![y];
                dodge(&chain, v, t, &mut path, &mut best);
                best
            })
            .reduce(Best::default, Best::merge)
    };
    let maximizers = best.trajectories.iter().map(|f| f.iter().map(|&x| torus.label(x)).collect()).collect();
    let antipode_is_maximizer = best.value == antipode;
    Ok(AntipodeSearch {
        n,
        d,
        t,
        lazy,
        max_survival: best.value.to_text(),
        antipode_survival: antipode.to_text(),
        maximizers,
        maximizer_count: best.count,
        evaluated: best.evaluated,
        antipode_is_maximizer,
        pass: antipode_is_maximizer,
    })
}

#[derive(Debug, Clone, Default)]
struct Best {
    value: Rational,
    trajectories: Vec<Vec<usize>>,
    count: u64,
    evaluated: u64,
}

impl Best {
    fn offer(&mut self, value: Rational, path: &[usize]) {
        self.evaluated += 1;
        if self.count == 0 || value > self.value {
            self.value = value;
            self.trajectories = vec![path.to_vec()];
            self.count = 1;
        } else if value == self.value {
            self.count += 1;
            if self.trajectories.len() < MAXIMIZERS_KEPT {
                self.trajectories.push(path.to_vec());
            }
        }
    }

    /// Order-independent: keeps the lexicographically smallest maximizers.
    fn merge(mut self, other: Best) -> Best {
        let evaluated = self.evaluated + other.evaluated;
        if other.count > 0 && (self.count == 0 || other.value > self.value) {
            self = other;
        } else if other.count > 0 && other.value == self.value {
            self.count += other.count;
            self.trajectories.extend(other.trajectories);
            self.trajectories.sort();
            self.trajectories.truncate(MAXIMIZERS_KEPT);
        }
        self.evaluated = evaluated;
        self
    }
}

fn dodge(chain: &MarkovChain<Rational>, v: Vec<Rational>, t: usize, path: &mut Vec<usize>, best: &mut Best) {
    if path.len() == t {
        best.offer(v.into_iter().sum(), path);
        return;
    }
    let pushed = chain.push_forward(&v);
    if path.len() + 1 == t {
        let total: Rational = pushed.iter().cloned().sum();
        for (y, m) in pushed.iter().enumerate() {
            path.push(y);
            best.offer(total.clone() - m.clone(), path);
            path.pop();
        }
        return;
    }
    for y in 0..pushed.len() {
        let mut next = pushed.clone();
        next[y] = rational(0, 1);
        path.push(y);
        dodge(chain, next, t, path, best);
        path.pop();
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteResult {
    pub checked: u64,
    pub failures: Vec<String>,
}

impl SuiteResult {
    pub fn pass(&self) -> bool {
        self.failures.is_empty()
    }
}

/// `J(φ) ≤ J(φ^σ)` on random rational instances with up to `max_funcs` functions.
pub fn two_point_suite(count: u64, max_funcs: usize, seed: u64) -> SuiteResult {
    let failures: Vec<String> = (0..count)
        .into_par_iter()
        .filter_map(|run| {
            let mut rng = run_rng(seed, run);
            let n_funcs = rng.gen_range(1..=max_funcs);
            let instance = TwoPointInstance::random(&mut rng, n_funcs, 9);
            let (lhs, rhs) = (two_point_j(&instance), two_point_j(&instance.rearranged()));
            (lhs > rhs).then(|| {
                format!("{}: J = {} > J^σ = {}", serde_json::to_string(&instance).unwrap_or_default(), lhs.to_text(), rhs.to_text())
            })
        })
        .collect();
    SuiteResult { checked: count, failures }
}

/// A random reflection of `Z_n` lifted to a random axis.
pub fn random_reflection(rng: &mut impl Rng, torus: Torus) -> Result<Reflection> {
    let n = torus.n;
    loop {
        let c = rng.gen_range(0..n);
        let p = rng.gen_range(0..n);
        if (2 * p) % n == c {
            continue;
        }
        let base = Reflection::on_cycle(n, c, p)?;
        return Reflection::lift(&base, torus, rng.gen_range(0..torus.d));
    }
}

/// Survival monotonicity on random instances: `d = 1`, `n ∈ 3..=5`, `t ≤ 4`
/// for most runs, `Z_3^2` with `t ≤ 3` for every fourth.
pub fn survival_monotone_suite(count: u64, seed: u64) -> Result<SuiteResult> {
    let kernels = [lazy_torus_kernel(3, 1)?, lazy_torus_kernel(4, 1)?, lazy_torus_kernel(5, 1)?, lazy_torus_kernel(3, 2)?];
    let results = (0..count)
        .into_par_iter()
        .map(|run| -> Result<Option<String>> {
            let mut rng = run_rng(seed, run);
            let (which, t_max) = if run % 4 == 3 { (3, 3) } else { (rng.gen_range(0..3), 4) };
            let chain = &kernels[which];
            let torus = if which == 3 { Torus::new(3, 2)? } else { Torus::new(which + 3, 1)? };
            let size = torus.size();
            let t = rng.gen_range(1..=t_max);
            let sets: Vec<StateSet> = (0..t)
                .map(|_| {
                    if rng.gen_bool(0.5) {
                        StateSet::singleton(size, rng.gen_range(0..size)).complement()
                    } else {
                        StateSet::from_indices(size, (0..size).filter(|_| rng.gen_bool(0.6)))
                    }
                })
                .collect();
            let b = rng.gen_range(0..size);
            let sigma = random_reflection(&mut rng, torus)?;
            let check = check_survival_monotone(chain, b, &sets, &sigma);
            Ok((!check.pass).then(|| format!("Z_{}^{} b={b} σ={:?} D={sets:?}: {} > {}", torus.n, torus.d, sigma.map, check.lhs, check.rhs)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SuiteResult { checked: count, failures: results.into_iter().flatten().collect() })
}

#[derive(Debug, Clone, Serialize)]
pub struct IntervalSearchCheck {
    pub n: usize,
    pub alpha: String,
    pub horizon: usize,
    pub t_hit: String,
    pub t_mov_search: String,
    pub evaluated: u128,
    pub pass: bool,
}

/// On the lazy cycle the interval-sequence search must return exactly `t_H(α)`.
pub fn interval_search_check(n: usize, alpha: &Rational, horizon: usize, tripwire: Option<&mut UpperBound<Rational>>) -> Result<IntervalSearchCheck> {
    let chain = lazy_torus_kernel(n, 1)?;
    let th = t_hit(&chain, alpha, SetFamily::Intervals)?;
    let mov = t_mov_lower_bound(&chain, alpha, horizon, &SequenceFamily::Sets(SetFamily::Intervals), DEFAULT_SEARCH_BUDGET, tripwire)?;
    Ok(IntervalSearchCheck {
        n,
        alpha: alpha.to_text(),
        horizon,
        t_hit: th.value.to_text(),
        t_mov_search: mov.value.to_text(),
        evaluated: mov.evaluated,
        pass: mov.value == th.value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_entries() {
        let k = lazy_torus_kernel(3, 1).unwrap();
        assert_eq!(k.prob(0, 0), &rational(1, 2));
        assert_eq!(k.prob(0, 1), &rational(1, 4));
        assert_eq!(k.prob(0, 2), &rational(1, 4));
        let k = lazy_torus_kernel(4, 2).unwrap();
        for x in 0..16 {
            let row = &k.rows()[x];
            assert_eq!(row[x], rational(1, 2));
            assert_eq!(row.iter().filter(|p| **p == rational(1, 8)).count(), 4);
            assert_eq!(row.iter().cloned().sum::<Rational>(), rational(1, 1));
        }
        assert!(k.stationary().unwrap().masses().iter().all(|p| *p == rational(1, 16)));
        assert!(matches!(lazy_torus_kernel(100, 3), Err(Error::StateLimitExceeded { .. })));
    }

    #[test]
    fn lazy_z3_is_the_lazy_cycle() {
        let cycle = crate::chain::cycle_walk::<Rational>(3).unwrap().lazify();
        assert_eq!(cycle.rows(), lazy_torus_kernel(3, 1).unwrap().rows());
    }

    #[test]
    fn reflection_example_on_z9() {
        let sigma = antipode_reflection(9, 6, 4).unwrap();
        assert_eq!(sigma.map, (0..9).map(|x| (10 - x) % 9).collect::<Vec<_>>());
        assert_eq!(sigma.h_plus, StateSet::from_indices(9, [6, 7, 8, 0]));
        assert_eq!(sigma.h_minus, StateSet::from_indices(9, [1, 2, 3, 4]));
        assert_eq!(sigma.h_zero, StateSet::from_indices(9, [5]));
        assert_eq!(polarize_set(&StateSet::singleton(9, 0), &sigma), StateSet::singleton(9, 0));
        assert_eq!(polarize_set(&StateSet::singleton(9, 6).complement(), &sigma), StateSet::singleton(9, 4).complement());
    }

    #[test]
    fn antipode_reflection_every_case() {
        for n in 3..=11 {
            let a = n / 2;
            for target in 0..n {
                let sigma = antipode_reflection(n, target, a).unwrap_or_else(|e| panic!("n={n} target={target}: {e}"));
                assert_eq!(polarize_set(&StateSet::singleton(n, target).complement(), &sigma), StateSet::singleton(n, a).complement());
            }
        }
    }

    #[test]
    fn symmetric_sets_are_fixed_and_sizes_kept() {
        let sigma = Reflection::on_cycle(8, 3, 0).unwrap();
        let sym = StateSet::from_indices(8, [0, 3, 5, 6]);
        assert_eq!(polarize_set(&sym, &sigma), sym);
        let mut rng = run_rng(5, 0);
        for _ in 0..1000 {
            let torus = if rng.gen_bool(0.5) { Torus::new(rng.gen_range(3..=9), 1).unwrap() } else { Torus::new(4, 2).unwrap() };
            let sigma = random_reflection(&mut rng, torus).unwrap();
            let set = StateSet::from_indices(torus.size(), (0..torus.size()).filter(|_| rng.gen_bool(0.5)));
            assert_eq!(polarize_set(&set, &sigma).len(), set.len());
        }
    }

    #[test]
    fn invalid_reflections_are_rejected() {
        assert!(matches!(Reflection::on_cycle(8, 4, 2), Err(Error::InvalidCase(_))));
        let torus = Torus::new(5, 1).unwrap();
        // Not an involution.
        assert!(Reflection::from_parts(torus, vec![1, 2, 3, 4, 0], StateSet::empty(5)).is_err());
    }

    #[test]
    fn lifted_reflection_is_valid() {
        let base = Reflection::on_cycle(4, 1, 0).unwrap();
        let torus = Torus::new(4, 2).unwrap();
        let lifted = Reflection::lift(&base, torus, 1).unwrap();
        assert_eq!(lifted.apply(torus.index(&[2, 0])), torus.index(&[2, 1]));
        assert_eq!(lifted.h_plus.len(), 8);
    }

    #[test]
    fn two_point_examples() {
        let ones = TwoPointInstance::new(vec![[rational(1, 1), rational(1, 1)]; 3], vec![vec![rational(1, 1); 3]; 3], vec![vec![rational(0, 1); 3]; 3]).unwrap();
        assert_eq!(two_point_j(&ones), rational(8, 1));
        let sorted = TwoPointInstance::new(
            vec![[rational(3, 1), rational(1, 2)], [rational(2, 1), rational(2, 1)]],
            vec![vec![rational(1, 3); 2]; 2],
            vec![vec![rational(2, 1); 2]; 2],
        )
        .unwrap();
        assert_eq!(sorted.rearranged(), sorted);
        assert!(TwoPointInstance::new(vec![[rational(-1, 1), rational(0, 1)]], vec![vec![rational(0, 1)]], vec![vec![rational(0, 1)]]).is_err());
        let mut rng = run_rng(9, 0);
        for _ in 0..50 {
            let inst = TwoPointInstance::random(&mut rng, 2, 7);
            assert!(two_point_j(&inst) <= two_point_j(&inst.rearranged()));
        }
    }

    #[test]
    fn two_point_by_hand() {
        // n = 1: J = φ(+)(a+b) + φ(−)(a+b), invariant under sorting.
        let inst = TwoPointInstance::new(vec![[rational(1, 1), rational(3, 1)]], vec![vec![rational(2, 1)]], vec![vec![rational(1, 1)]]).unwrap();
        assert_eq!(two_point_j(&inst), rational(12, 1));
        assert_eq!(two_point_j(&inst.rearranged()), rational(12, 1));
    }

    #[test]
    fn survival_monotone_examples() {
        let chain = lazy_torus_kernel(5, 1).unwrap();
        let sigma = Reflection::on_cycle(5, 1, 0).unwrap();
        let full = vec![StateSet::full(5); 3];
        let check = check_survival_monotone(&chain, 2, &full, &sigma);
        assert_eq!((check.lhs.as_str(), check.rhs.as_str()), ("1", "1"));
        // σ(x) = 4 − x fixes 2; {1,3} ∪ {2} is symmetric.
        let sigma = Reflection::on_cycle(5, 4, 0).unwrap();
        let sym = vec![StateSet::from_indices(5, [1, 2, 3]); 3];
        let check = check_survival_monotone(&chain, 2, &sym, &sigma);
        assert_eq!(check.lhs, check.rhs);
        let suite = survival_monotone_suite(200, 1).unwrap();
        assert!(suite.pass(), "{:?}", suite.failures);
    }

    #[test]
    fn antipode_small_cases() {
        let r = antipode_bruteforce(3, 1, 1, true).unwrap();
        assert_eq!(r.max_survival, "3/4");
        assert_eq!(r.maximizers, vec![vec!["1".to_string()], vec!["2".to_string()]]);
        assert!(r.pass);
        for t in 0..=6 {
            let r = antipode_bruteforce(4, 1, t, true).unwrap();
            assert!(r.pass, "n=4 t={t}: {} vs {}", r.max_survival, r.antipode_survival);
            assert!(t == 0 || r.maximizers.contains(&vec!["2".to_string(); t]));
        }
        assert!(matches!(antipode_bruteforce(5, 2, 6, true), Err(Error::SearchSpaceExceeded { .. })));
    }

    #[test]
    fn laziness_is_needed() {
        let r = antipode_bruteforce(4, 1, 3, false).unwrap();
        assert_eq!(r.max_survival, "1");
        assert!(!r.pass);
    }

    #[test]
    fn interval_search_small() {
        let mut wire = UpperBound::new(&lazy_torus_kernel(4, 1).unwrap(), &rational(1, 4), 500).unwrap();
        let c = interval_search_check(4, &rational(1, 4), 3, Some(&mut wire)).unwrap();
        assert!(c.pass, "{c:?}");
        assert!(wire.violations.is_empty());
    }
}
