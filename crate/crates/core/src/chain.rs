//! Finite irreducible Markov chains: stationary distributions, total
//! variation distance and mixing times.

use std::collections::VecDeque;
use std::sync::OnceLock;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::{NumericMode, Rational, Scalar};

/// Row-stochastic transition matrix on `0..n`, checked irreducible at
/// construction. Immutable once built.
#[derive(Debug, Clone)]
pub struct MarkovChain<S: Scalar> {
    rows: Vec<Vec<S>>,
    support: Vec<Vec<(usize, S)>>,
    stationary: OnceLock<Distribution<S>>,
}

/// A probability vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution<S: Scalar> {
    masses: Vec<S>,
}

impl<S: Scalar> Distribution<S> {
    pub fn new(masses: Vec<S>) -> Result<Self> {
        if masses.iter().any(|m| m.is_negative()) {
            return Err(Error::InvalidChain("negative probability mass".into()));
        }
        let total: S = masses.iter().cloned().sum();
        if (total.clone() - S::one()).abs() > S::sum_tolerance() {
            return Err(Error::InvalidChain(format!("masses sum to {total}")));
        }
        Ok(Self { masses })
    }

    pub fn point_mass(n: usize, x: usize) -> Self {
        let mut masses = vec![S::zero(); n];
        masses[x] = S::one();
        Self { masses }
    }

    pub fn uniform(n: usize) -> Self {
        Self { masses: vec![S::from_ratio(1, n as i64); n] }
    }

    pub fn masses(&self) -> &[S] {
        &self.masses
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    /// π(A) for a set given by a membership predicate.
    pub fn mass_of(&self, mut member: impl FnMut(usize) -> bool) -> S {
        self.masses
            .iter()
            .enumerate()
            .filter(|(i, _)| member(*i))
            .map(|(_, m)| m.clone())
            .sum()
    }
}

impl<S: Scalar> MarkovChain<S> {
    pub fn new(rows: Vec<Vec<S>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidChain("no states".into()));
        }
        for (x, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidChain(format!("row {x} has {} entries, expected {n}", row.len())));
            }
            if row.iter().any(|p| p.is_negative()) {
                return Err(Error::InvalidChain(format!("row {x} has a negative entry")));
            }
            let total: S = row.iter().cloned().sum();
            if (total.clone() - S::one()).abs() > S::sum_tolerance() {
                return Err(Error::InvalidChain(format!("row {x} sums to {total}")));
            }
        }
        let support: Vec<Vec<(usize, S)>> = rows
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(_, p)| !p.is_zero())
                    .map(|(y, p)| (y, p.clone()))
                    .collect()
            })
            .collect();
        if !strongly_connected(&support) {
            return Err(Error::InvalidChain("transition graph is not strongly connected".into()));
        }
        Ok(Self { rows, support, stationary: OnceLock::new() })
    }

    pub fn n_states(&self) -> usize {
        self.rows.len()
    }

    pub fn mode(&self) -> NumericMode {
        S::MODE
    }

    pub fn prob(&self, x: usize, y: usize) -> &S {
        &self.rows[x][y]
    }

    pub fn rows(&self) -> &[Vec<S>] {
        &self.rows
    }

    /// Nonzero entries of row `x`.
    pub fn support(&self, x: usize) -> &[(usize, S)] {
        &self.support[x]
    }

    /// `μ ↦ μP` for an arbitrary (sub-)probability row vector.
    pub fn push_forward(&self, mu: &[S]) -> Vec<S> {
        let mut out = vec![S::zero(); self.n_states()];
        for (z, mass) in mu.iter().enumerate() {
            if mass.is_zero() {
                continue;
            }
            for (y, p) in &self.support[z] {
                out[*y] = out[*y].clone() + mass.clone() * p.clone();
            }
        }
        out
    }

    /// `(P + I) / 2`.
    pub fn lazify(&self) -> Self {
        let half = S::from_ratio(1, 2);
        let rows = self
            .rows
            .iter()
            .enumerate()
            .map(|(x, row)| {
                row.iter()
                    .enumerate()
                    .map(|(y, p)| {
                        let diag = if x == y { S::one() } else { S::zero() };
                        (p.clone() + diag) * half.clone()
                    })
                    .collect()
            })
            .collect();
        Self::new(rows).expect("lazification preserves validity")
    }

    /// Unique solution of `πP = π`, `Σπ = 1`; cached.
    pub fn stationary(&self) -> Result<&Distribution<S>> {
        if let Some(pi) = self.stationary.get() {
            return Ok(pi);
        }
        let pi = solve_stationary(self)?;
        Ok(self.stationary.get_or_init(|| pi))
    }

    pub fn map_scalar<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Result<MarkovChain<T>> {
        MarkovChain::new(self.rows.iter().map(|row| row.iter().map(&f).collect()).collect())
    }

    /// Maximum absolute row-sum error; zero in exact mode.
    pub fn max_row_error(&self) -> S {
        self.rows
            .iter()
            .map(|row| (row.iter().cloned().sum::<S>() - S::one()).abs())
            .fold(S::zero(), |a, b| if b > a { b } else { a })
    }
}

fn strongly_connected<S>(support: &[Vec<(usize, S)>]) -> bool {
    let n = support.len();
    let mut reverse = vec![Vec::new(); n];
    for (x, row) in support.iter().enumerate() {
        for (y, _) in row {
            reverse[*y].push(x);
        }
    }
    let forward: Vec<Vec<usize>> = support.iter().map(|r| r.iter().map(|(y, _)| *y).collect()).collect();
    reaches_all(&forward) && reaches_all(&reverse)
}

fn reaches_all(adj: &[Vec<usize>]) -> bool {
    let mut seen = vec![false; adj.len()];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    while let Some(x) = queue.pop_front() {
        for &y in &adj[x] {
            if !seen[y] {
                seen[y] = true;
                queue.push_back(y);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

fn solve_stationary<S: Scalar>(chain: &MarkovChain<S>) -> Result<Distribution<S>> {
    let n = chain.n_states();
    // (Pᵀ − I) π = 0 with the last equation replaced by Σπ = 1.
    let mut a: Vec<Vec<S>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let diag = if i == j { S::one() } else { S::zero() };
                    chain.prob(j, i).clone() - diag
                })
                .collect()
        })
        .collect();
    a[n - 1] = vec![S::one(); n];
    let mut b = vec![S::zero(); n];
    b[n - 1] = S::one();
    let mut masses = linalg::solve(a, b)?;
    if !S::is_exact() {
        // Clamp round-off below zero and renormalise.
        for m in masses.iter_mut() {
            if m.is_negative() {
                *m = S::zero();
            }
        }
        let total: S = masses.iter().cloned().sum();
        for m in masses.iter_mut() {
            *m = m.clone() / total.clone();
        }
    }
    Distribution::new(masses).map_err(|_| Error::SingularSystem)
}

/// `½ Σ |μᵢ − νᵢ|`.
pub fn tv_distance<S: Scalar>(mu: &[S], nu: &[S]) -> Result<S> {
    if mu.len() != nu.len() {
        return Err(Error::LengthMismatch { left: mu.len(), right: nu.len() });
    }
    let total: S = mu.iter().zip(nu).map(|(a, b)| (a.clone() - b.clone()).abs()).sum();
    Ok(total / S::from_int(2))
}

/// Iterates `P⁰, P¹, P², …`, each obtained from the previous one by a single
/// sparse right-multiplication.
pub struct MatrixPowers<'a, S: Scalar> {
    chain: &'a MarkovChain<S>,
    current: Vec<Vec<S>>,
    t: usize,
}

impl<'a, S: Scalar> MatrixPowers<'a, S> {
    pub fn new(chain: &'a MarkovChain<S>) -> Self {
        let n = chain.n_states();
        let current = (0..n).map(|x| Distribution::<S>::point_mass(n, x).masses).collect();
        Self { chain, current, t: 0 }
    }

    pub fn time(&self) -> usize {
        self.t
    }

    pub fn matrix(&self) -> &[Vec<S>] {
        &self.current
    }

    pub fn advance(&mut self) {
        let chain = self.chain;
        self.current = self.current.par_iter().map(|row| chain.push_forward(row)).collect();
        self.t += 1;
    }

    /// `max_x ‖Pᵗ(x,·) − π‖_TV` for the current power.
    pub fn worst_case_tv(&self, pi: &Distribution<S>) -> S {
        self.current
            .par_iter()
            .map(|row| tv_distance(row, pi.masses()).expect("square matrix"))
            .collect::<Vec<_>>()
            .into_iter()
            .fold(S::zero(), |a, b| if b > a { b } else { a })
    }
}

/// `d(t)`.
pub fn worst_case_tv<S: Scalar>(chain: &MarkovChain<S>, t: usize) -> Result<S> {
    let pi = chain.stationary()?;
    let mut powers = MatrixPowers::new(chain);
    while powers.time() < t {
        powers.advance();
    }
    Ok(powers.worst_case_tv(pi))
}

/// `d(0), …, d(T)` together with the mixing times it resolves.
#[derive(Debug, Clone)]
pub struct MixingProfile<S: Scalar> {
    pub values: Vec<S>,
    pub thresholds: Vec<(S, Option<usize>)>,
}

impl<S: Scalar> MixingProfile<S> {
    pub fn t_mix(&self, epsilon: &S) -> Option<usize> {
        self.values.iter().position(|d| d <= epsilon)
    }
}

fn check_step<S: Scalar>(t: usize, before: &S, after: &S) -> Result<()> {
    if after.clone() > before.clone() + S::sum_tolerance() {
        return Err(Error::MonotonicityViolation { t, before: before.to_text(), after: after.to_text() });
    }
    Ok(())
}

/// `d(t)` for `t ≤ horizon`, asserting TV contraction along the way.
pub fn mixing_profile<S: Scalar>(chain: &MarkovChain<S>, horizon: usize, epsilons: &[S]) -> Result<MixingProfile<S>> {
    let pi = chain.stationary()?;
    let mut powers = MatrixPowers::new(chain);
    let mut values = vec![powers.worst_case_tv(pi)];
    while powers.time() < horizon {
        powers.advance();
        let d = powers.worst_case_tv(pi);
        check_step(powers.time(), values.last().unwrap(), &d)?;
        values.push(d);
    }
    let mut profile = MixingProfile { values, thresholds: Vec::new() };
    profile.thresholds = epsilons.iter().map(|e| (e.clone(), profile.t_mix(e))).collect();
    Ok(profile)
}

/// Period of the (irreducible) chain: gcd of `level(x) + 1 − level(y)`
/// over edges `x → y`, with levels from a breadth-first search at 0.
pub fn period<S: Scalar>(chain: &MarkovChain<S>) -> usize {
    let n = chain.n_states();
    let mut level = vec![usize::MAX; n];
    level[0] = 0;
    let mut queue = std::collections::VecDeque::from([0]);
    while let Some(x) = queue.pop_front() {
        for (y, _) in chain.support(x) {
            if level[*y] == usize::MAX {
                level[*y] = level[x] + 1;
                queue.push_back(*y);
            }
        }
    }
    let gcd = |mut a: usize, mut b: usize| {
        while b != 0 {
            (a, b) = (b, a % b);
        }
        a
    };
    let mut g = 0;
    for x in (0..n).filter(|&x| level[x] != usize::MAX) {
        for (y, p) in chain.support(x) {
            if p.is_positive() && level[*y] != usize::MAX {
                g = gcd(g, (level[x] + 1).abs_diff(level[*y]));
            }
        }
    }
    g.max(1)
}

/// `min{t ≥ 0 : d(t) ≤ ε}`, scanning up to `cap`. A chain of period `k`
/// keeps `d(t) ≥ 1 − 1/k` forever, which is reported without scanning.
pub fn t_mix<S: Scalar>(chain: &MarkovChain<S>, epsilon: &S, cap: usize) -> Result<usize> {
    if !(epsilon.is_positive() && *epsilon < S::one()) {
        return Err(Error::InvalidParams(format!("epsilon must lie in (0,1), got {epsilon}")));
    }
    let pi = chain.stationary()?;
    let k = period(chain);
    let floor = S::one() - S::from_ratio(1, k as i64);
    if k > 1 && *epsilon < floor {
        return Err(Error::Periodic { period: k, floor: floor.to_text() });
    }
    let mut powers = MatrixPowers::new(chain);
    let mut d = powers.worst_case_tv(pi);
    loop {
        if d <= *epsilon {
            return Ok(powers.time());
        }
        if powers.time() >= cap {
            return Err(Error::CapExceeded { cap, value: d.to_text() });
        }
        powers.advance();
        let next = powers.worst_case_tv(pi);
        check_step(powers.time(), &d, &next)?;
        d = next;
    }
}

/// Nearest-neighbour walk on `Z_n` stepping `+1` with probability `p`.
pub fn biased_cycle<S: Scalar>(n: usize, p: &S) -> Result<MarkovChain<S>> {
    if n < 2 {
        return Err(Error::InvalidParams("cycle needs at least two states".into()));
    }
    let mut rows = vec![vec![S::zero(); n]; n];
    for (x, row) in rows.iter_mut().enumerate() {
        row[(x + 1) % n] = row[(x + 1) % n].clone() + p.clone();
        row[(x + n - 1) % n] = row[(x + n - 1) % n].clone() + (S::one() - p.clone());
    }
    MarkovChain::new(rows)
}

/// Simple random walk on `Z_n` (not lazy).
pub fn cycle_walk<S: Scalar>(n: usize) -> Result<MarkovChain<S>> {
    biased_cycle(n, &S::from_ratio(1, 2))
}

/// Random irreducible chain with small-denominator rational entries.
///
/// Each row draws weights in `0..=max_weight`; a directed Hamiltonian cycle
/// gets weight at least one so the result is always irreducible.
pub fn random_chain(rng: &mut impl Rng, n: usize, max_weight: i64) -> MarkovChain<Rational> {
    let rows = (0..n)
        .map(|x| {
            let mut w: Vec<i64> = (0..n).map(|_| rng.gen_range(0..=max_weight)).collect();
            w[(x + 1) % n] = w[(x + 1) % n].max(1);
            let total: i64 = w.iter().sum();
            w.into_iter().map(|k| Rational::from_ratio(k, total)).collect()
        })
        .collect();
    MarkovChain::new(rows).expect("cycle edges make the chain irreducible")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational;
    use num_traits::Zero;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn half_half() -> MarkovChain<Rational> {
        let h = rational(1, 2);
        MarkovChain::new(vec![vec![h.clone(), h.clone()], vec![h.clone(), h]]).unwrap()
    }

    #[test]
    fn rejects_invalid_rows() {
        let bad_sum = MarkovChain::new(vec![vec![rational(1, 2), rational(1, 3)], vec![rational(1, 2), rational(1, 2)]]);
        assert!(matches!(bad_sum, Err(Error::InvalidChain(_))));
        let negative = MarkovChain::new(vec![vec![rational(3, 2), rational(-1, 2)], vec![rational(1, 2), rational(1, 2)]]);
        assert!(negative.is_err());
        let reducible = MarkovChain::new(vec![vec![1.0, 0.0], vec![0.5, 0.5]]);
        assert!(matches!(reducible, Err(Error::InvalidChain(_))));
        let ragged = MarkovChain::<f64>::new(vec![vec![1.0], vec![0.5, 0.5]]);
        assert!(ragged.is_err());
    }

    #[test]
    fn float_rows_within_tolerance() {
        let ok = MarkovChain::new(vec![vec![0.5, 0.5 + 1e-13], vec![1.0, 0.0]]);
        assert!(ok.is_ok());
        let off = MarkovChain::new(vec![vec![0.5, 0.5 + 1e-9], vec![1.0, 0.0]]);
        assert!(off.is_err());
    }

    #[test]
    fn stationary_examples() {
        let pi = half_half().stationary().unwrap().clone();
        assert_eq!(pi.masses(), &[rational(1, 2), rational(1, 2)]);

        let chain = biased_cycle(7, &rational(2, 3)).unwrap();
        let pi = chain.stationary().unwrap();
        assert!(pi.masses().iter().all(|m| *m == rational(1, 7)));
    }

    #[test]
    fn random_chain_stationary_matches_power_iteration() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let chain = random_chain(&mut rng, 5, 4).map_scalar(|p| p.to_f64()).unwrap();
        let pi = chain.stationary().unwrap().masses().to_vec();
        let residual = chain
            .push_forward(&pi)
            .iter()
            .zip(&pi)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(residual < 1e-10);
        // Oracle: row of P^1000.
        let mut mu = Distribution::<f64>::point_mass(5, 0).masses().to_vec();
        for _ in 0..1000 {
            mu = chain.push_forward(&mu);
        }
        for (a, b) in mu.iter().zip(&pi) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn exact_stationary_is_a_fixed_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let chain = random_chain(&mut rng, 6, 3);
            let pi = chain.stationary().unwrap().masses().to_vec();
            assert_eq!(chain.push_forward(&pi), pi);
            assert_eq!(pi.iter().cloned().sum::<Rational>(), rational(1, 1));
        }
    }

    #[test]
    fn tv_examples() {
        let u = [rational(1, 2), rational(1, 2)];
        let d0 = [rational(1, 1), rational(0, 1)];
        let d1 = [rational(0, 1), rational(1, 1)];
        assert!(tv_distance(&u, &u).unwrap().is_zero());
        assert_eq!(tv_distance(&d0, &u).unwrap(), rational(1, 2));
        assert_eq!(tv_distance(&d0, &d1).unwrap(), rational(1, 1));
        assert!(matches!(tv_distance(&d0, &[rational(1, 1)]), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn worst_case_tv_examples() {
        let c = half_half();
        assert_eq!(worst_case_tv(&c, 0).unwrap(), rational(1, 2));
        assert!(worst_case_tv(&c, 1).unwrap().is_zero());

        // Lazy SRW on Z_4: p(0,·) = (1/2, 1/4, 0, 1/4) against uniform.
        let lazy = cycle_walk::<Rational>(4).unwrap().lazify();
        assert_eq!(worst_case_tv(&lazy, 1).unwrap(), rational(1, 4));
    }

    #[test]
    fn t_mix_examples() {
        assert_eq!(t_mix(&half_half(), &rational(1, 4), 10).unwrap(), 1);
        let periodic = cycle_walk::<Rational>(4).unwrap();
        assert!(matches!(t_mix(&periodic, &rational(1, 4), 50), Err(Error::Periodic { period: 2, .. })));
        assert_eq!(period(&periodic), 2);
        assert_eq!(period(&periodic.lazify()), 1);
        assert_eq!(period(&biased_cycle::<Rational>(5, &rational(3, 4)).unwrap()), 1);
        assert_eq!(period(&cycle_walk::<Rational>(6).unwrap()), 2);
        assert!(t_mix(&half_half(), &rational(0, 1), 10).is_err());
    }

    #[test]
    fn lazy_cycle_mixing_is_diffusive() {
        let times: Vec<usize> = [8, 16, 32]
            .iter()
            .map(|&n| t_mix(&cycle_walk::<f64>(n).unwrap().lazify(), &0.25, 100_000).unwrap())
            .collect();
        for w in times.windows(2) {
            let ratio = w[1] as f64 / w[0] as f64;
            assert!((3.0..=5.0).contains(&ratio), "{times:?}");
        }
    }

    #[test]
    fn lazify_examples() {
        let flip = MarkovChain::new(vec![vec![rational(0, 1), rational(1, 1)], vec![rational(1, 1), rational(0, 1)]]).unwrap();
        let lazy = flip.lazify();
        assert!(lazy.rows().iter().flatten().all(|p| *p == rational(1, 2)));
        let twice = flip.lazify().lazify();
        for x in 0..2 {
            assert!(*twice.prob(x, x) >= rational(3, 4));
        }
    }

    #[test]
    fn profile_is_monotone_with_thresholds() {
        let chain = biased_cycle(6, &rational(3, 4)).unwrap().lazify();
        let profile = mixing_profile(&chain, 30, &[rational(1, 4), rational(1, 8)]).unwrap();
        for w in profile.values.windows(2) {
            assert!(w[1] <= w[0]);
        }
        assert!(profile.values.iter().all(|d| *d >= rational(0, 1) && *d <= rational(1, 1)));
        let t = t_mix(&chain, &rational(1, 4), 100).unwrap();
        assert_eq!(profile.thresholds[0], (rational(1, 4), Some(t)));
    }
}
