//! Expected volume of the box-sausage `∪_s (X_s + f(s) + Q_n)` around a lazy
//! walk on `Z^d`, exactly and by Monte Carlo, plus the reflection step that
//! shows drift can only enlarge it.

use std::collections::HashSet;

use num_traits::Zero;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hitting::{run_rng, McEstimate};
use crate::scalar::{rational, Rational, Scalar};

pub type Point = Vec<i64>;

/// Total work allowed for one exact evaluation: `#x₀ · t · #walk states · (2d+1)`.
pub const EXACT_WORK_BUDGET: u128 = 200_000_000;
pub const MIN_MC_RUNS: u64 = 1000;

/// Offsets `f(0), …, f(t)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LatticeTrajectory {
    pub d: usize,
    pub offsets: Vec<Point>,
}

impl LatticeTrajectory {
    pub fn new(d: usize, offsets: Vec<Point>) -> Result<Self> {
        if d == 0 || offsets.is_empty() {
            return Err(Error::InvalidParams("trajectory needs d ≥ 1 and at least f(0)".into()));
        }
        if let Some(bad) = offsets.iter().find(|p| p.len() != d) {
            return Err(Error::LengthMismatch { left: bad.len(), right: d });
        }
        Ok(Self { d, offsets })
    }

    pub fn zero(d: usize, t: usize) -> Self {
        Self { d, offsets: vec![vec![0; d]; t + 1] }
    }

    /// `f(s) = s · drift`.
    pub fn linear(drift: &[i64], t: usize) -> Self {
        let offsets = (0..=t as i64).map(|s| drift.iter().map(|v| v * s).collect()).collect();
        Self { d: drift.len(), offsets }
    }

    pub fn horizon(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn truncate(&self, t: usize) -> Self {
        Self { d: self.d, offsets: self.offsets[..=t.min(self.horizon())].to_vec() }
    }

    pub fn translate(&self, by: &[i64]) -> Self {
        let offsets = self.offsets.iter().map(|p| p.iter().zip(by).map(|(a, b)| a + b).collect()).collect();
        Self { d: self.d, offsets }
    }
}

/// `Q_n(center) = center + [−n, n]^d`.
pub fn box_points(center: &[i64], n: i64) -> Vec<Point> {
    let mut out: Vec<Point> = vec![Vec::new()];
    for &c in center {
        out = out
            .into_iter()
            .flat_map(|p| {
                (c - n..=c + n).map(move |v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    out
}

/// Axis-aligned box `[lo, hi]` indexed row-major.
#[derive(Debug, Clone)]
struct Grid {
    lo: Vec<i64>,
    side: Vec<usize>,
}

impl Grid {
    fn new(lo: Vec<i64>, hi: &[i64]) -> Self {
        let side = lo.iter().zip(hi).map(|(l, h)| (h - l + 1).max(0) as usize).collect();
        Self { lo, side }
    }

    fn len(&self) -> usize {
        self.side.iter().product()
    }

    fn index(&self, p: &[i64]) -> Option<usize> {
        let mut idx = 0;
        for k in 0..p.len() {
            let off = p[k] - self.lo[k];
            if off < 0 || off as usize >= self.side[k] {
                return None;
            }
            idx = idx * self.side[k] + off as usize;
        }
        Some(idx)
    }

    fn point(&self, mut idx: usize) -> Point {
        let mut p = vec![0; self.side.len()];
        for k in (0..self.side.len()).rev() {
            p[k] = self.lo[k] + (idx % self.side[k]) as i64;
            idx /= self.side[k];
        }
        p
    }
}

/// `E vol ∪_{s ≤ t} (X_s + D_s)` for the lazy walk from the origin, where
/// `sets = [D_0, …, D_t]` are finite.
///
/// Summed over candidate points `x₀` of `P(∃ s: X_s ∈ x₀ − D_s)`, each by a
/// masked survival recursion on the box the walk can reach.
pub fn expected_union_volume(d: usize, sets: &[Vec<Point>]) -> Result<Rational> {
    if sets.is_empty() {
        return Err(Error::InvalidParams("need at least D_0".into()));
    }
    if let Some(bad) = sets.iter().flatten().find(|p| p.len() != d) {
        return Err(Error::LengthMismatch { left: bad.len(), right: d });
    }
    let t = (sets.len() - 1) as i64;
    let all: Vec<&Point> = sets.iter().flatten().collect();
    if all.is_empty() {
        return Ok(rational(0, 1));
    }
    let walk = Grid::new(vec![-t; d], &vec![t; d]);
    let lo: Vec<i64> = (0..d).map(|k| all.iter().map(|p| p[k]).min().unwrap() - t).collect();
    let hi: Vec<i64> = (0..d).map(|k| all.iter().map(|p| p[k]).max().unwrap() + t).collect();
    let candidates = Grid::new(lo, &hi);
    let work = candidates.len() as u128 * (t as u128 + 1) * walk.len() as u128 * (2 * d as u128 + 1);
    if work > EXACT_WORK_BUDGET {
        return Err(Error::BudgetExceeded { work, budget: EXACT_WORK_BUDGET });
    }

    let neighbors: Vec<Vec<usize>> = (0..walk.len())
        .map(|i| {
            let p = walk.point(i);
            let mut out = Vec::with_capacity(2 * d);
            for k in 0..d {
                for step in [-1, 1] {
                    let mut q = p.clone();
                    q[k] += step;
                    if let Some(j) = walk.index(&q) {
                        out.push(j);
                    }
                }
            }
            out
        })
        .collect();
    let (hold, move_p) = (rational(1, 2), rational(1, 4 * d as i64));
    let origin = walk.index(&vec![0; d]).expect("origin in walk box");

    let total: Rational = (0..candidates.len())
        .into_par_iter()
        .map(|c| {
            let x0 = candidates.point(c);
            // blocked[s] = walk positions inside x₀ − D_s
            let blocked: Vec<HashSet<usize>> = sets
                .iter()
                .map(|set| {
                    set.iter()
                        .filter_map(|q| walk.index(&x0.iter().zip(q).map(|(a, b)| a - b).collect::<Vec<_>>()))
                        .collect()
                })
                .collect();
            if blocked[0].contains(&origin) {
                return rational(1, 1);
            }
            let mut v: Vec<Rational> = vec![rational(0, 1); walk.len()];
            v[origin] = rational(1, 1);
            for block in &blocked[1..] {
                let mut next = vec![rational(0, 1); walk.len()];
                for (i, m) in v.iter().enumerate() {
                    if m.is_zero() {
                        continue;
                    }
                    next[i] += m.clone() * hold.clone();
                    let share = m.clone() * move_p.clone();
                    for &j in &neighbors[i] {
                        next[j] += share.clone();
                    }
                }
                for &j in block {
                    next[j] = rational(0, 1);
                }
                v = next;
            }
            rational(1, 1) - v.into_iter().sum::<Rational>()
        })
        .sum();
    Ok(total)
}

fn sausage_sets(n: usize, traj: &LatticeTrajectory) -> Vec<Vec<Point>> {
    traj.offsets.iter().map(|f| box_points(f, n as i64)).collect()
}

pub fn expected_sausage_exact(n: usize, traj: &LatticeTrajectory) -> Result<Rational> {
    expected_union_volume(traj.d, &sausage_sets(n, traj))
}

/// Simulated lazy walks with per-run counter-based streams; identical for
/// a fixed seed regardless of thread count.
pub fn expected_sausage_mc(n: usize, traj: &LatticeTrajectory, runs: u64, seed: u64) -> Result<McEstimate> {
    if runs < MIN_MC_RUNS {
        return Err(Error::InvalidParams(format!("need at least {MIN_MC_RUNS} runs, got {runs}")));
    }
    let d = traj.d;
    let offsets = box_points(&vec![0; d], n as i64);
    let samples: Vec<f64> = (0..runs)
        .into_par_iter()
        .map(|run| {
            let mut rng = run_rng(seed, run);
            let mut x = vec![0i64; d];
            let mut seen: HashSet<Point> = HashSet::new();
            for (s, f) in traj.offsets.iter().enumerate() {
                if s > 0 && rng.gen_bool(0.5) {
                    let k = rng.gen_range(0..d);
                    x[k] += if rng.gen_bool(0.5) { 1 } else { -1 };
                }
                for q in &offsets {
                    seen.insert((0..d).map(|k| x[k] + f[k] + q[k]).collect());
                }
            }
            seen.len() as f64
        })
        .collect();
    Ok(McEstimate::from_samples(&samples))
}

/// `x ↦ c − x` in one coordinate. `H⁺` is the side containing the origin
/// unless `plus_contains_origin` is false; the hyperplane `2x = c` is fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AxisReflection {
    pub axis: usize,
    pub c: i64,
    pub plus_contains_origin: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Plus,
    Minus,
    Fixed,
}

impl AxisReflection {
    pub fn apply(&self, p: &[i64]) -> Point {
        let mut q = p.to_vec();
        q[self.axis] = self.c - q[self.axis];
        q
    }

    fn side(&self, p: &[i64]) -> Side {
        let twice = 2 * p[self.axis];
        if twice == self.c {
            return Side::Fixed;
        }
        let below = twice < self.c;
        // The origin is below iff 0 < c; for c = 0 the origin is fixed and "below" is H⁺.
        let origin_below = self.c >= 0;
        if below == (origin_below == self.plus_contains_origin) {
            Side::Plus
        } else {
            Side::Minus
        }
    }

    /// Two-point rearrangement of a finite set.
    pub fn polarize(&self, set: &[Point]) -> Vec<Point> {
        let members: HashSet<&Point> = set.iter().collect();
        let mut candidates: Vec<Point> = set.iter().cloned().chain(set.iter().map(|p| self.apply(p))).collect();
        candidates.sort();
        candidates.dedup();
        candidates
            .into_iter()
            .filter(|x| {
                let (here, mirror) = (members.contains(x), members.contains(&self.apply(x)));
                match self.side(x) {
                    Side::Plus => here || mirror,
                    Side::Minus => here && mirror,
                    Side::Fixed => here,
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VolumeComparison {
    pub lhs: String,
    pub rhs: String,
    pub pass: bool,
}

/// Symmetric `D_s` against their polarizations: `E vol ∪(X_s + D_s) ≥ E vol ∪(X_s + D_s^σ)`.
pub fn check_prelim_volume(d: usize, sigma: &AxisReflection, sets: &[Vec<Point>]) -> Result<VolumeComparison> {
    for (s, set) in sets.iter().enumerate() {
        let members: HashSet<&Point> = set.iter().collect();
        if let Some(p) = set.iter().find(|p| !members.contains(&p.iter().map(|v| -v).collect::<Vec<_>>())) {
            return Err(Error::SymmetryViolation(format!("D_{s} contains {p:?} but not its negation")));
        }
    }
    if sigma.axis >= d {
        return Err(Error::InvalidParams(format!("axis {} out of range for d = {d}", sigma.axis)));
    }
    let lhs = expected_union_volume(d, sets)?;
    let polarized: Vec<Vec<Point>> = sets.iter().map(|s| sigma.polarize(s)).collect();
    let rhs = expected_union_volume(d, &polarized)?;
    Ok(VolumeComparison { pass: lhs >= rhs, lhs: lhs.to_text(), rhs: rhs.to_text() })
}

/// Drifted against centred sausage, exactly.
#[derive(Debug, Clone, Serialize)]
pub struct DriftComparison {
    pub d: usize,
    pub n: usize,
    pub t: usize,
    pub drifted: String,
    pub centred: String,
    pub pass: bool,
}

pub fn compare_drift_exact(n: usize, traj: &LatticeTrajectory) -> Result<DriftComparison> {
    let drifted = expected_sausage_exact(n, traj)?;
    let centred = expected_sausage_exact(n, &LatticeTrajectory::zero(traj.d, traj.horizon()))?;
    Ok(DriftComparison {
        d: traj.d,
        n,
        t: traj.horizon(),
        pass: drifted >= centred,
        drifted: drifted.to_text(),
        centred: centred.to_text(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DriftComparisonMc {
    pub drifted: McEstimate,
    pub centred: McEstimate,
    /// `drifted − centred + 3·√(se₁² + se₂²)`, nonnegative on pass.
    pub slack: f64,
    pub pass: bool,
}

/// Monte Carlo version; the two sides use independent substreams of `seed`.
pub fn compare_drift_mc(n: usize, traj: &LatticeTrajectory, runs: u64, seed: u64) -> Result<DriftComparisonMc> {
    let drifted = expected_sausage_mc(n, traj, runs, seed.wrapping_mul(2))?;
    let centred = expected_sausage_mc(n, &LatticeTrajectory::zero(traj.d, traj.horizon()), runs, seed.wrapping_mul(2).wrapping_add(1))?;
    let sigma = (drifted.std_error.powi(2) + centred.std_error.powi(2)).sqrt();
    let slack = drifted.mean - centred.mean + 3.0 * sigma;
    Ok(DriftComparisonMc { drifted, centred, slack, pass: slack >= 0.0 })
}
