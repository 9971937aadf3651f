//! The clustered graphs `G_{n,m}`: construction, vertex-transitivity, the
//! cluster chain, the shuttle computation, and the exact search for a
//! wait-then-move target that beats every static one.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::MarkovChain;
use crate::error::{Error, Result};
use crate::hitting::{all_pairs_hitting, moving_hitting, static_hitting, SetSequence, StateSet};
use crate::linalg;
use crate::scalar::{as_text, rational, Rational, Scalar};

/// Which long edges join cluster `i` to `i ± m/4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum LongEdgeRule {
    /// The five rules as written: even clusters reach `+m/4` along columns
    /// (`b` changes) and `−m/4` along rows (`a` changes); odd clusters the reverse.
    #[default]
    Literal,
    /// Both row and column pairs towards `i ± m/4` from every cluster.
    Both,
}

impl FromStr for LongEdgeRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "literal" => Ok(Self::Literal),
            "both" => Ok(Self::Both),
            other => Err(Error::Parse(format!("unknown long-edge rule {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    Short,
    Long,
}

impl fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Short => "short",
            Self::Long => "long",
        })
    }
}

/// `n²m` vertices `i(a,b)`, indexed `i·n² + a·n + b`.
#[derive(Debug, Clone)]
pub struct GnmGraph {
    pub n: usize,
    pub m: usize,
    pub rule: LongEdgeRule,
    adjacency: Vec<Vec<usize>>,
    edges: Vec<(usize, usize, EdgeKind)>,
}

impl GnmGraph {
    pub fn vertex(&self, i: usize, a: usize, b: usize) -> usize {
        (i % self.m) * self.n * self.n + (a % self.n) * self.n + b % self.n
    }

    /// `(cluster, a, b)`
    pub fn coords(&self, v: usize) -> (usize, usize, usize) {
        let nn = self.n * self.n;
        (v / nn, (v % nn) / self.n, v % self.n)
    }

    pub fn cluster(&self, v: usize) -> usize {
        v / (self.n * self.n)
    }

    pub fn n_vertices(&self) -> usize {
        self.n * self.n * self.m
    }

    pub fn label(&self, v: usize) -> String {
        let (i, a, b) = self.coords(v);
        format!("{i}({a},{b})")
    }

    pub fn parse_label(&self, label: &str) -> Result<usize> {
        let bad = || Error::Parse(format!("vertex label {label:?} is not of the form i(a,b)"));
        let (i, rest) = label.trim().split_once('(').ok_or_else(bad)?;
        let (a, b) = rest.strip_suffix(')').ok_or_else(bad)?.split_once(',').ok_or_else(bad)?;
        let parse = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
        let (i, a, b) = (parse(i)?, parse(a)?, parse(b)?);
        if i >= self.m || a >= self.n || b >= self.n {
            return Err(Error::InvalidParams(format!("vertex {label} outside G_{{{},{}}}", self.n, self.m)));
        }
        Ok(self.vertex(i, a, b))
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].binary_search(&v).is_ok()
    }

    /// Undirected edges `(u, v, kind)` with `u < v`.
    pub fn edges(&self) -> &[(usize, usize, EdgeKind)] {
        &self.edges
    }

    pub fn cluster_members(&self, i: usize) -> impl Iterator<Item = usize> {
        let nn = self.n * self.n;
        (i * nn)..((i + 1) * nn)
    }

    /// One `"i(a,b) j(c,d) kind"` line per edge.
    pub fn edge_list(&self) -> String {
        self.edges.iter().map(|(u, v, k)| format!("{} {} {k}\n", self.label(*u), self.label(*v))).collect()
    }

    pub fn is_regular(&self) -> bool {
        self.adjacency.iter().all(|a| a.len() == self.adjacency[0].len())
    }

    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n_vertices()];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(x) = queue.pop_front() {
            for &y in &self.adjacency[x] {
                if !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

pub fn build_gnm(n: usize, m: usize, rule: LongEdgeRule) -> Result<GnmGraph> {
    if n < 2 || m % 4 != 0 || m < 8 {
        return Err(Error::InvalidParams(format!("G_{{n,m}} needs n ≥ 2 and m a multiple of 4 with m ≥ 8, got n={n}, m={m}")));
    }
    let q = m / 4;
    let mut g = GnmGraph { n, m, rule, adjacency: vec![Vec::new(); n * n * m], edges: Vec::new() };
    let mut pairs: Vec<(usize, usize, EdgeKind)> = Vec::new();
    let mut add = |x: usize, y: usize, kind: EdgeKind| pairs.push((x.min(y), x.max(y), kind));
    for i in 0..m {
        for a in 0..n {
            for b in 0..n {
                let x = g.vertex(i, a, b);
                // (1) every pair in adjacent clusters
                for c in 0..n {
                    for d in 0..n {
                        add(x, g.vertex(i + 1, c, d), EdgeKind::Short);
                    }
                }
                let up = (i + q) % m;
                let down = (i + m - q) % m;
                let column = |j: usize| (0..n).filter(move |&d| d != b).map(move |d| (j, a, d));
                let row = |j: usize| (0..n).filter(move |&c| c != a).map(move |c| (j, c, b));
                let targets: Vec<(usize, usize, usize)> = match (rule, i % 2 == 0) {
                    // (2) and (3); (4) and (5) for odd clusters
                    (LongEdgeRule::Literal, true) => column(up).chain(row(down)).collect(),
                    (LongEdgeRule::Literal, false) => row(up).chain(column(down)).collect(),
                    (LongEdgeRule::Both, _) => column(up).chain(row(up)).chain(column(down)).chain(row(down)).collect(),
                };
                for (j, c, d) in targets {
                    add(x, g.vertex(j, c, d), EdgeKind::Long);
                }
            }
        }
    }
    pairs.sort();
    pairs.dedup();
    for w in pairs.windows(2) {
        if (w[0].0, w[0].1) == (w[1].0, w[1].1) {
            return Err(Error::InvalidParams(format!("edge {}-{} is both short and long", g.label(w[0].0), g.label(w[0].1))));
        }
    }
    for &(x, y, _) in &pairs {
        g.adjacency[x].push(y);
        g.adjacency[y].push(x);
    }
    for adj in &mut g.adjacency {
        adj.sort_unstable();
    }
    g.edges = pairs;
    Ok(g)
}

/// Simple random walk, optionally made lazy.
pub fn walk_chain<S: Scalar>(g: &GnmGraph, lazy: bool) -> Result<MarkovChain<S>> {
    let size = g.n_vertices();
    let rows = (0..size)
        .map(|x| {
            let mut row = vec![S::zero(); size];
            let p = S::from_ratio(1, g.degree(x) as i64);
            for &y in g.neighbors(x) {
                row[y] = p.clone();
            }
            row
        })
        .collect();
    let chain = MarkovChain::new(rows)?;
    Ok(if lazy { chain.lazify() } else { chain })
}

/// `φ(k(u,v)) = (k + j − i)(u + c − a, v + d − b)` for even `j − i`, with the
/// coordinates swapped, `(v + c − b, u + d − a)`, for odd `j − i`.
pub fn transitivity_map(g: &GnmGraph, from: usize, to: usize) -> Vec<usize> {
    let (i, a, b) = g.coords(from);
    let (j, c, d) = g.coords(to);
    let (n, m) = (g.n, g.m);
    let shift = (j + m - i) % m;
    (0..g.n_vertices())
        .map(|x| {
            let (k, u, v) = g.coords(x);
            if shift % 2 == 0 {
                g.vertex(k + shift, u + c + n - a, v + d + n - b)
            } else {
                g.vertex(k + shift, v + c + n - b, u + d + n - a)
            }
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct TransitivityReport {
    pub pairs_checked: u64,
    pub edges_per_map: usize,
    /// First failing ordered pair and the reason.
    pub failure: Option<(String, String, String)>,
    pub pass: bool,
}

fn check_map(g: &GnmGraph, from: usize, to: usize) -> Option<String> {
    let phi = transitivity_map(g, from, to);
    if phi[from] != to {
        return Some(format!("φ({}) = {}", g.label(from), g.label(phi[from])));
    }
    let mut hit = vec![false; phi.len()];
    for &y in &phi {
        if std::mem::replace(&mut hit[y], true) {
            return Some(format!("φ is not injective at {}", g.label(y)));
        }
    }
    g.edges
        .iter()
        .find(|(x, y, _)| !g.has_edge(phi[*x], phi[*y]))
        .map(|(x, y, _)| format!("edge {}-{} maps to non-edge {}-{}", g.label(*x), g.label(*y), g.label(phi[*x]), g.label(phi[*y])))
}

/// Checks the explicit automorphism for each listed ordered pair; reports
/// the first failure in list order.
pub fn check_transitivity_pairs(g: &GnmGraph, pairs: &[(usize, usize)]) -> TransitivityReport {
    let failure = pairs
        .par_iter()
        .map(|&(x, y)| check_map(g, x, y).map(|why| (g.label(x), g.label(y), why)))
        .find_first(|f| f.is_some())
        .flatten();
    TransitivityReport { pairs_checked: pairs.len() as u64, edges_per_map: g.edges.len(), pass: failure.is_none(), failure }
}

/// Every ordered vertex pair.
pub fn check_transitivity(g: &GnmGraph) -> TransitivityReport {
    let size = g.n_vertices();
    let pairs: Vec<(usize, usize)> = (0..size).flat_map(|x| (0..size).map(move |y| (x, y))).collect();
    check_transitivity_pairs(g, &pairs)
}

/// Circulant walk on `Z_m` given by its step law `law[k] = q(+k)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClusterChain {
    pub m: usize,
    #[serde(serialize_with = "crate::scalar::vec_as_text")]
    pub law: Vec<Rational>,
}

impl ClusterChain {
    pub fn new(m: usize, law: Vec<Rational>) -> Result<Self> {
        if law.len() != m {
            return Err(Error::LengthMismatch { left: law.len(), right: m });
        }
        if law.iter().any(|p| p < &rational(0, 1)) || law.iter().cloned().sum::<Rational>() != rational(1, 1) {
            return Err(Error::InvalidChain("cluster step law must be a probability vector".into()));
        }
        Ok(Self { m, law })
    }

    pub fn q(&self, step: isize) -> &Rational {
        &self.law[step.rem_euclid(self.m as isize) as usize]
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.m).all(|k| self.law[k] == self.law[(self.m - k) % self.m])
    }

    pub fn chain(&self) -> Result<MarkovChain<Rational>> {
        let rows = (0..self.m)
            .map(|i| (0..self.m).map(|j| self.law[(j + self.m - i) % self.m].clone()).collect())
            .collect();
        MarkovChain::new(rows)
    }

    /// `h(i) = E[0 → i]` for `i = 0, …, m−1`.
    pub fn hitting_from_zero(&self) -> Result<Vec<Rational>> {
        let chain = self.chain()?;
        (0..self.m)
            .into_par_iter()
            .map(|i| Ok(static_hitting(&chain, &StateSet::singleton(self.m, i))?[0].clone()))
            .collect()
    }
}

/// `q(±1) = 1/3`, `q(±m/4) = 1/6`: the circulant law matching the shuttle
/// probability `1/6` and the exit weights `(2/5, 2/5, 1/5)`.
pub fn tabulated_cluster_chain(m: usize) -> Result<ClusterChain> {
    if m % 4 != 0 || m < 8 {
        return Err(Error::InvalidParams(format!("cluster chain needs m a multiple of 4, m ≥ 8, got {m}")));
    }
    let mut law = vec![rational(0, 1); m];
    law[1] = rational(1, 3);
    law[m - 1] = rational(1, 3);
    law[m / 4] = rational(1, 6);
    law[m - m / 4] = rational(1, 6);
    ClusterChain::new(m, law)
}

/// Projects the simple walk on `g` to cluster indices, verifying strong
/// lumpability and circulance rather than assuming them.
pub fn lump_to_clusters(g: &GnmGraph) -> Result<ClusterChain> {
    let m = g.m;
    let law_of = |x: usize| -> Vec<Rational> {
        let mut law = vec![rational(0, 1); m];
        let here = g.cluster(x);
        for &y in g.neighbors(x) {
            law[(g.cluster(y) + m - here) % m] += rational(1, g.degree(x) as i64);
        }
        law
    };
    let reference = law_of(0);
    for x in 1..g.n_vertices() {
        if law_of(x) != reference {
            return Err(Error::NotLumpable { first: g.label(0), second: g.label(x) });
        }
    }
    ClusterChain::new(m, reference)
}

/// The two cluster laws side by side, with the offsets where they differ.
#[derive(Debug, Clone, Serialize)]
pub struct ClusterComparison {
    pub literal: ClusterChain,
    pub tabulated: ClusterChain,
    pub differing_steps: Vec<usize>,
    #[serde(serialize_with = "crate::scalar::vec_as_text")]
    pub literal_h: Vec<Rational>,
    #[serde(serialize_with = "crate::scalar::vec_as_text")]
    pub tabulated_h: Vec<Rational>,
}

pub fn compare_cluster_chains(g: &GnmGraph) -> Result<ClusterComparison> {
    let literal = lump_to_clusters(g)?;
    let tabulated = tabulated_cluster_chain(g.m)?;
    let differing_steps = (0..g.m).filter(|&k| literal.law[k] != tabulated.law[k]).collect();
    Ok(ClusterComparison {
        literal_h: literal.hitting_from_zero()?,
        tabulated_h: tabulated.hitting_from_zero()?,
        literal,
        tabulated,
        differing_steps,
    })
}

/// First hitting of cluster `s = m/4` by the cluster chain from 0 when
/// arrivals along the long step between the current shuttle endpoint and
/// its partner do not count.
#[derive(Debug, Clone, Serialize)]
pub struct ShuttleReport {
    #[serde(serialize_with = "as_text")]
    pub p_shuttle: Rational,
    #[serde(serialize_with = "as_text")]
    pub odd_mass: Rational,
    #[serde(serialize_with = "as_text")]
    pub even_mass: Rational,
    #[serde(serialize_with = "as_text")]
    pub mean_shuttle_steps: Rational,
    #[serde(serialize_with = "as_text")]
    pub a1: Rational,
    #[serde(serialize_with = "as_text")]
    pub a2: Rational,
    /// `1 + P(X odd)·A₁ + P(X even)·A₂`
    #[serde(serialize_with = "as_text")]
    pub accounting: Rational,
    /// `E[X] + P(X odd)·A₁ + P(X even)·A₂`
    #[serde(serialize_with = "as_text")]
    pub accounting_with_mean: Rational,
    /// Absorbing chain on {shuttle at 0, shuttle at s, off-shuttle clusters}.
    #[serde(serialize_with = "as_text")]
    pub direct: Rational,
    /// `h(m/2)`, the value every variant must stay below.
    #[serde(serialize_with = "as_text")]
    pub far_hitting: Rational,
}

pub fn shuttle_expectation(cc: &ClusterChain) -> Result<ShuttleReport> {
    let m = cc.m;
    let s = m / 4;
    if m % 4 != 0 || m < 8 || !cc.q(0).is_zero() || !cc.is_symmetric() {
        return Err(Error::InvalidParams("shuttle needs a symmetric cluster law without holding and m ≥ 8, 4 | m".into()));
    }
    let h = cc.hitting_from_zero()?;
    // E[c → s] = h(s − c) by circulance
    let to_s = |c: usize| h[(s + m - c % m) % m].clone();
    let p = cc.q(s as isize).clone();
    let leave = rational(1, 1) - p.clone();
    let (up, down, long) = (cc.q(1).clone(), cc.q(-1).clone(), cc.q(s as isize).clone());
    let a1 = (up.clone() * to_s(1) + down.clone() * to_s(m - 1) + long.clone() * to_s(m - s)) / leave.clone();
    let a2 = (up * to_s(s + 1) + down * to_s(s + m - 1) + long * to_s(2 * s)) / leave.clone();
    let one = rational(1, 1);
    let odd_mass = one.clone() / (one.clone() + p.clone());
    let even_mass = p.clone() / (one.clone() + p.clone());
    let mean_shuttle_steps = one.clone() / leave;
    let tail = odd_mass.clone() * a1.clone() + even_mass.clone() * a2.clone();

    // 0: shuttle at 0, 1: shuttle at s, 2 + k: off-shuttle at the k-th cluster ≠ s
    let off: Vec<usize> = (0..m).filter(|&c| c != s).collect();
    let slot = |c: usize| 2 + off.iter().position(|&o| o == c).expect("cluster ≠ s");
    let size = 2 + off.len();
    let mut a = vec![vec![rational(0, 1); size]; size];
    for (r, row) in a.iter_mut().enumerate() {
        row[r] = one.clone();
    }
    for k in 0..m {
        let q = cc.law[k].clone();
        if q.is_zero() {
            continue;
        }
        // from the shuttle endpoints
        let dest0 = k % m;
        if dest0 == s {
            a[0][1] -= q.clone();
        } else {
            a[0][slot(dest0)] -= q.clone();
        }
        let dest1 = (s + k) % m;
        if dest1 == 0 && k == m - s {
            a[1][0] -= q.clone();
        } else if dest1 != s {
            a[1][slot(dest1)] -= q.clone();
        }
        for &c in &off {
            let d = (c + k) % m;
            if d != s {
                a[slot(c)][slot(d)] -= q.clone();
            }
        }
    }
    let e = linalg::solve(a, vec![one.clone(); size])?;
    Ok(ShuttleReport {
        accounting: one + tail.clone(),
        accounting_with_mean: mean_shuttle_steps.clone() + tail,
        direct: e[0].clone(),
        far_hitting: h[m / 2].clone(),
        p_shuttle: p,
        odd_mass,
        even_mass,
        mean_shuttle_steps,
        a1,
        a2,
    })
}

/// `(A₁, A₂, 1 + P(X odd)·A₁ + P(X even)·A₂)` from a symmetric step law
/// and `h[i] = E[0 → i]`, in any numeric mode.
pub fn shuttle_accounting<S: Scalar>(law: &[S], h: &[S]) -> (S, S, S) {
    let m = law.len();
    let s = m / 4;
    let q = |k: usize| law[k % m].clone();
    let to_s = |c: usize| h[(s + m - c % m) % m].clone();
    let p = q(s);
    let leave = S::one() - p.clone();
    let a1 = (q(1) * to_s(1) + q(m - 1) * to_s(m - 1) + q(s) * to_s(m - s)) / leave.clone();
    let a2 = (q(1) * to_s(s + 1) + q(m - 1) * to_s(s + m - 1) + q(s) * to_s(2 * s)) / leave;
    let odd = S::one() / (S::one() + p.clone());
    let even = p.clone() / (S::one() + p);
    let accounting = S::one() + odd * a1.clone() + even * a2.clone();
    (a1, a2, accounting)
}

/// `E_{U_i}[τ_y]` for each `y` in cluster `i`, from the uniform law on cluster `i`.
#[derive(Debug, Clone, Serialize)]
pub struct UniformClusterHitting {
    pub cluster: usize,
    pub targets: Vec<String>,
    #[serde(serialize_with = "crate::scalar::vec_as_text")]
    pub values: Vec<Rational>,
    pub constant: bool,
}

pub fn uniform_cluster_hitting(g: &GnmGraph, hitting: &[Vec<Rational>], cluster: usize) -> UniformClusterHitting {
    let members: Vec<usize> = g.cluster_members(cluster).collect();
    let size = rational(members.len() as i64, 1);
    let values: Vec<Rational> = members
        .iter()
        .map(|&y| members.iter().map(|&x| hitting[x][y].clone()).sum::<Rational>() / size.clone())
        .collect();
    UniformClusterHitting {
        cluster,
        targets: members.iter().map(|&y| g.label(y)).collect(),
        constant: values.windows(2).all(|w| w[0] == w[1]),
        values,
    }
}

/// `f(t) = u` for `t ≤ w`, `f(t) = v` afterwards; `w = 0` is the static target `v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct WaitThenMove {
    pub u: usize,
    pub w: usize,
    pub v: usize,
}

impl WaitThenMove {
    pub fn sequence(&self, n_states: usize) -> SetSequence {
        let prefix = if self.w == 0 { Vec::new() } else { vec![self.u; self.w + 1] };
        SetSequence::trajectory(n_states, &prefix, self.v)
    }

    pub fn describe(&self, g: &GnmGraph) -> String {
        if self.w == 0 {
            format!("static {}", g.label(self.v))
        } else {
            format!("{} for t ≤ {}, then {}", g.label(self.u), self.w, g.label(self.v))
        }
    }
}

/// Restricts where the trajectory waits and where it settles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrajectorySearch {
    pub wait_budget: usize,
    pub wait_clusters: Option<Vec<usize>>,
    pub target_clusters: Option<Vec<usize>>,
    pub reference: Option<WaitThenMove>,
}

pub const DEFAULT_WAIT_BUDGET: usize = 4;

impl TrajectorySearch {
    /// Unrestricted search; on `G_{2,12}` also scores `5(1,1)` for `t ≤ 2`, then `6(1,1)`.
    pub fn full(g: &GnmGraph, wait_budget: usize) -> Self {
        let reference = (g.n == 2 && g.m == 12).then(|| WaitThenMove { u: g.vertex(5, 1, 1), w: 2, v: g.vertex(6, 1, 1) });
        Self { wait_budget, wait_clusters: None, target_clusters: None, reference }
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(bound = "")]
pub struct ScoredTrajectory<S: Scalar> {
    pub trajectory: String,
    #[serde(serialize_with = "as_text")]
    pub value: S,
    #[serde(skip)]
    pub raw: WaitThenMove,
}

#[derive(Debug, Clone, Serialize)]
#[serde(bound = "")]
pub struct ReferenceCheck<S: Scalar> {
    pub trajectory: String,
    #[serde(serialize_with = "as_text")]
    pub value: S,
    /// `E_start[τ_v]` for the settling vertex.
    #[serde(serialize_with = "as_text")]
    pub settled_static: S,
    #[serde(serialize_with = "as_text")]
    pub gain_over_settled: S,
    #[serde(serialize_with = "as_text")]
    pub gap_to_static_max: S,
}

#[derive(Debug, Clone, Serialize)]
#[serde(bound = "")]
pub struct CounterexampleReport<S: Scalar> {
    pub n: usize,
    pub m: usize,
    pub rule: LongEdgeRule,
    pub lazy: bool,
    pub wait_budget: usize,
    pub start: String,
    /// `max_{x,y} E_x[τ_y]` over all pairs.
    #[serde(serialize_with = "as_text")]
    pub static_max: S,
    /// Targets `y` attaining the maximum from the start vertex.
    pub static_argmax: Vec<String>,
    /// The row maximum from the start equals the all-pairs maximum.
    pub start_row_attains_max: bool,
    #[serde(serialize_with = "as_text")]
    pub best_moving: S,
    pub best_trajectory: String,
    pub best_sequence: crate::hitting::SetSequenceFile,
    #[serde(serialize_with = "as_text")]
    pub margin: S,
    pub top: Vec<ScoredTrajectory<S>>,
    pub reference: Option<ReferenceCheck<S>>,
    pub evaluated: u64,
    pub pass: bool,
}

pub const TOP_TRAJECTORIES: usize = 10;

/// Exact search over wait-then-move targets from `0(0,0)`; passes iff some
/// trajectory strictly beats the largest static expected hitting time.
pub fn certify_counterexample<S: Scalar>(g: &GnmGraph, lazy: bool, search: &TrajectorySearch) -> Result<CounterexampleReport<S>> {
    let chain: MarkovChain<S> = walk_chain(g, lazy)?;
    let hitting = all_pairs_hitting(&chain)?;
    certify_with(g, &chain, &hitting, lazy, search)
}

/// As [`certify_counterexample`] with precomputed `H[x][y] = E_x[τ_y]`.
pub fn certify_with<S: Scalar>(
    g: &GnmGraph,
    chain: &MarkovChain<S>,
    hitting: &[Vec<S>],
    lazy: bool,
    search: &TrajectorySearch,
) -> Result<CounterexampleReport<S>> {
    let size = g.n_vertices();
    let start = 0;
    let in_clusters = |list: &Option<Vec<usize>>| -> Vec<usize> {
        (0..size).filter(|&v| list.as_ref().map_or(true, |cs| cs.contains(&g.cluster(v)))).collect()
    };
    let waits = in_clusters(&search.wait_clusters);
    let targets = in_clusters(&search.target_clusters);
    if waits.is_empty() || targets.is_empty() {
        return Err(Error::InvalidParams("trajectory search has no candidate vertices".into()));
    }

    let mut static_max = hitting[0][0].clone();
    for row in hitting {
        for h in row {
            if *h > static_max {
                static_max = h.clone();
            }
        }
    }
    let row_max = hitting[start].iter().cloned().fold(S::zero(), |a, b| if b > a { b } else { a });
    let static_argmax = (0..size)
        .filter(|&y| (hitting[start][y].clone() - static_max.clone()).abs() <= S::slack())
        .map(|y| g.label(y))
        .collect();

    let score = |traj: WaitThenMove, prefix: &Option<(S, Vec<S>)>| -> S {
        match prefix {
            None => hitting[start][traj.v].clone(),
            Some((acc, pushed)) => {
                acc.clone() + pushed.iter().zip(hitting).map(|(p, row)| p.clone() * row[traj.v].clone()).sum::<S>()
            }
        }
    };

    // (acc, pushed) for each (u, w): Σ_{t ≤ w} |v_t| and P·v_w unmasked.
    let scored: Vec<Vec<(S, WaitThenMove)>> = waits
        .par_iter()
        .map(|&u| {
            let mut out = Vec::new();
            let mut v = vec![S::zero(); size];
            if u != start {
                v[start] = S::one();
            }
            let mut acc = S::zero();
            for w in 1..=search.wait_budget {
                if w == 1 {
                    acc = acc + v.iter().cloned().sum::<S>();
                }
                let mut next = chain.push_forward(&v);
                next[u] = S::zero();
                acc = acc + next.iter().cloned().sum::<S>();
                v = next;
                let pushed = chain.push_forward(&v);
                let prefix = Some((acc.clone(), pushed));
                for &t in &targets {
                    let traj = WaitThenMove { u, w, v: t };
                    out.push((score(traj, &prefix), traj));
                }
            }
            out
        })
        .collect();
    let mut all: Vec<(S, WaitThenMove)> = targets.iter().map(|&t| (hitting[start][t].clone(), WaitThenMove { u: t, w: 0, v: t })).collect();
    all.extend(scored.into_iter().flatten());
    let evaluated = all.len() as u64;

    let mut best = 0;
    for (k, (value, _)) in all.iter().enumerate() {
        if *value > all[best].0 {
            best = k;
        }
    }
    let (best_moving, best_traj) = all[best].clone();

    // Second route: the winning trajectory through the forward survival recursion.
    let recomputed = moving_hitting(chain, start, &best_traj.sequence(size))?;
    if (recomputed.clone() - best_moving.clone()).abs() > S::slack() {
        return Err(Error::InvalidParams(format!("trajectory value mismatch: {best_moving} vs {recomputed}")));
    }

    let mut order: Vec<usize> = (0..all.len()).collect();
    order.sort_by(|&a, &b| all[b].0.partial_cmp(&all[a].0).unwrap().then(a.cmp(&b)));
    let top = order
        .into_iter()
        .take(TOP_TRAJECTORIES)
        .map(|k| ScoredTrajectory { trajectory: all[k].1.describe(g), value: all[k].0.clone(), raw: all[k].1 })
        .collect();

    let reference = match search.reference {
        Some(r) => {
            let value = moving_hitting(chain, start, &r.sequence(size))?;
            let settled_static = hitting[start][r.v].clone();
            Some(ReferenceCheck {
                trajectory: r.describe(g),
                gain_over_settled: value.clone() - settled_static.clone(),
                gap_to_static_max: value.clone() - static_max.clone(),
                value,
                settled_static,
            })
        }
        None => None,
    };

    let margin = best_moving.clone() - static_max.clone();
    Ok(CounterexampleReport {
        n: g.n,
        m: g.m,
        rule: g.rule,
        lazy,
        wait_budget: search.wait_budget,
        start: g.label(start),
        start_row_attains_max: (row_max - static_max.clone()).abs() <= S::slack(),
        static_argmax,
        pass: margin > S::slack(),
        best_trajectory: best_traj.describe(g),
        best_sequence: best_traj.sequence(size).to_file(),
        static_max,
        best_moving,
        margin,
        top,
        reference,
        evaluated,
    })
}
