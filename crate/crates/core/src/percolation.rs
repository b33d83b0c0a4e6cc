//! Bond percolation on square and cubic lattices.
//!
//! Axis 0 is open and used for the spanning test; the transverse axes are
//! periodic. Trials use common random numbers: bond `b` of trial `i` is
//! occupied iff `u_{i,b} < p`, with `u` regenerated from the trial's stream.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::map_indexed;
use crate::rng::{RngStream, StreamTag};

/// Disjoint-set forest with union by rank and path halving.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<u32>,
    rank: Vec<u8>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self { parent: (0..n as u32).collect(), rank: vec![0; n] }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let gp = self.parent[self.parent[x] as usize];
            self.parent[x] = gp;
            x = gp as usize;
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb as u32,
            std::cmp::Ordering::Greater => self.parent[rb] = ra as u32,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra as u32;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

/// Hypercubic bond lattice of side `l` in `dim` dimensions.
#[derive(Clone, Debug)]
pub struct BondLattice {
    dim: usize,
    l: usize,
    bonds: Vec<(u32, u32)>,
}

impl BondLattice {
    pub fn new(dim: usize, l: usize) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(Error::Lattice(format!("dimension must be 2 or 3, got {dim}")));
        }
        if l < 2 {
            return Err(Error::Lattice(format!("side must be at least 2, got {l}")));
        }
        let n = l.pow(dim as u32);
        let stride = |axis: usize| l.pow(axis as u32);
        let coord = |s: usize, axis: usize| (s / stride(axis)) % l;
        let mut bonds = Vec::with_capacity(dim * n);
        for s in 0..n {
            for axis in 0..dim {
                let c = coord(s, axis);
                if axis == 0 {
                    if c + 1 < l {
                        bonds.push((s as u32, (s + 1) as u32));
                    }
                } else if l > 2 || c == 0 {
                    let t = s - c * stride(axis) + ((c + 1) % l) * stride(axis);
                    bonds.push((s as u32, t as u32));
                }
            }
        }
        Ok(Self { dim, l, bonds })
    }

    pub fn n_sites(&self) -> usize {
        self.l.pow(self.dim as u32)
    }

    pub fn bonds(&self) -> &[(u32, u32)] {
        &self.bonds
    }

    pub fn side(&self) -> usize {
        self.l
    }

    fn first_coord(&self, s: usize) -> usize {
        s % self.l
    }

    /// Union-find over the occupied bonds plus two virtual terminals attached to
    /// the `x = 0` and `x = L−1` faces.
    fn clusters(&self, occupied: impl Fn(usize) -> bool) -> (UnionFind, usize, usize) {
        let n = self.n_sites();
        let (lo, hi) = (n, n + 1);
        let mut uf = UnionFind::new(n + 2);
        for (b, &(s, t)) in self.bonds.iter().enumerate() {
            if occupied(b) {
                uf.union(s as usize, t as usize);
            }
        }
        for s in 0..n {
            match self.first_coord(s) {
                0 => {
                    uf.union(s, lo);
                }
                c if c == self.l - 1 => {
                    uf.union(s, hi);
                }
                _ => {}
            }
        }
        (uf, lo, hi)
    }

    /// Whether an occupied cluster connects the two open faces.
    pub fn spans(&self, occupied: impl Fn(usize) -> bool) -> bool {
        let (mut uf, lo, hi) = self.clusters(occupied);
        uf.find(lo) == uf.find(hi)
    }

    /// Number of connected components among the real sites.
    pub fn cluster_count(&self, occupied: impl Fn(usize) -> bool) -> usize {
        let n = self.n_sites();
        let mut uf = UnionFind::new(n);
        for (b, &(s, t)) in self.bonds.iter().enumerate() {
            if occupied(b) {
                uf.union(s as usize, t as usize);
            }
        }
        (0..n).filter(|&s| uf.find(s) == s).count()
    }

    fn trial_uniforms(&self, seed: u64, trial: usize) -> Vec<f32> {
        let mut rng = RngStream::new(seed, trial as u64, StreamTag::Percolation);
        (0..self.bonds.len()).map(|_| rng.gen::<f32>()).collect()
    }
}

/// Fraction of `trials` in which a cluster spans axis 0 at occupation `p`.
pub fn spanning_probability(dim: usize, l: usize, p: f64, trials: usize, seed: u64) -> Result<f64> {
    spanning_probability_with(dim, l, p, trials, seed, None)
}

pub fn spanning_probability_with(
    dim: usize,
    l: usize,
    p: f64,
    trials: usize,
    seed: u64,
    workers: Option<usize>,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Config(format!("p = {p} is outside [0, 1]")));
    }
    if trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    let lat = BondLattice::new(dim, l)?;
    let hits = map_indexed(trials, workers, |i| {
        let u = lat.trial_uniforms(seed, i);
        lat.spans(|b| (u[b] as f64) < p) as usize
    });
    Ok(hits.iter().sum::<usize>() as f64 / trials as f64)
}

/// Smallest occupation at which trial `i` spans: bonds are added in order of
/// their uniform until the terminals connect.
fn trial_threshold(lat: &BondLattice, seed: u64, trial: usize) -> f64 {
    let u = lat.trial_uniforms(seed, trial);
    let mut order: Vec<u32> = (0..u.len() as u32).collect();
    order.sort_unstable_by(|&a, &b| u[a as usize].total_cmp(&u[b as usize]));
    let n = lat.n_sites();
    let (lo, hi) = (n, n + 1);
    let mut uf = UnionFind::new(n + 2);
    for s in 0..n {
        let c = lat.first_coord(s);
        if c == 0 {
            uf.union(s, lo);
        } else if c == lat.l - 1 {
            uf.union(s, hi);
        }
    }
    for &b in &order {
        let (s, t) = lat.bonds[b as usize];
        uf.union(s as usize, t as usize);
        if uf.find(lo) == uf.find(hi) {
            return u[b as usize] as f64;
        }
    }
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEstimate {
    pub p_hat: f64,
    pub stderr: f64,
    pub trials: usize,
    pub sizes: Vec<usize>,
    /// `(L, p_{0.5}(L))` crossing at each size, largest last.
    pub drift: Vec<(usize, f64)>,
}

/// Spanning curve `R_L(p)` evaluated with common random numbers: the exact
/// per-trial spanning thresholds, sorted.
#[derive(Clone, Debug)]
pub struct SpanningCurve {
    pub l: usize,
    thresholds: Vec<f64>,
}

impl SpanningCurve {
    pub fn sample(dim: usize, l: usize, trials: usize, seed: u64, workers: Option<usize>) -> Result<Self> {
        if trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        let lat = BondLattice::new(dim, l)?;
        let mut thresholds = map_indexed(trials, workers, |i| trial_threshold(&lat, seed, i));
        thresholds.sort_unstable_by(f64::total_cmp);
        Ok(Self { l, thresholds })
    }

    /// `R_L(p)`: fraction of trials that span at occupation `p`.
    pub fn at(&self, p: f64) -> f64 {
        let k = self.thresholds.partition_point(|&t| t < p);
        k as f64 / self.thresholds.len() as f64
    }

    pub fn trials(&self) -> usize {
        self.thresholds.len()
    }

    /// Bisection for `R_L(p) = 1/2`.
    pub fn crossing(&self, max_iter: usize, tol: f64) -> Result<f64> {
        let (mut a, mut b) = (0.0f64, 1.0f64);
        for _ in 0..max_iter {
            let m = 0.5 * (a + b);
            if self.at(m) < 0.5 {
                a = m;
            } else {
                b = m;
            }
            if b - a < tol {
                return Ok(0.5 * (a + b));
            }
        }
        Err(Error::Analysis(format!("bisection did not converge in {max_iter} steps")))
    }

    /// Bisection for `R_self(p) = R_other(p)` inside the central part of
    /// `self`'s transition, where the larger system's curve is the steeper one.
    pub fn crossing_with(&self, other: &SpanningCurve, max_iter: usize, tol: f64) -> Result<f64> {
        let (mut a, mut b) = (self.at_quantile(0.1), self.at_quantile(0.9));
        let sign = |p: f64| self.at(p) - other.at(p);
        if sign(a) > 0.0 || sign(b) < 0.0 {
            return Err(Error::Analysis("spanning curves do not cross inside the bracket".into()));
        }
        for _ in 0..max_iter {
            let m = 0.5 * (a + b);
            if sign(m) < 0.0 {
                a = m;
            } else {
                b = m;
            }
            if b - a < tol {
                return Ok(0.5 * (a + b));
            }
        }
        Ok(0.5 * (a + b))
    }

    fn at_quantile(&self, q: f64) -> f64 {
        let n = self.thresholds.len();
        let i = ((q.clamp(0.0, 1.0)) * (n - 1) as f64).round() as usize;
        self.thresholds[i]
    }
}

/// Threshold from the crossing `R_L(p) = R_{L'}(p)` of the two largest sizes,
/// located by bisection. The `R_L(p) = 1/2` crossing of every size is reported
/// as finite-size drift.
pub fn estimate_threshold(dim: usize, sizes: &[usize], trials: usize, seed: u64) -> Result<ThresholdEstimate> {
    estimate_threshold_with(dim, sizes, trials, seed, None)
}

pub fn estimate_threshold_with(
    dim: usize,
    sizes: &[usize],
    trials: usize,
    seed: u64,
    workers: Option<usize>,
) -> Result<ThresholdEstimate> {
    if sizes.len() < 2 {
        return Err(Error::Config("threshold estimation needs at least two sizes".into()));
    }
    let mut sorted = sizes.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() < 2 {
        return Err(Error::Config("threshold estimation needs two distinct sizes".into()));
    }
    let mut curves = Vec::with_capacity(sorted.len());
    let mut drift = Vec::with_capacity(sorted.len());
    for &l in &sorted {
        let curve = SpanningCurve::sample(dim, l, trials, size_seed(seed, l), workers)?;
        drift.push((l, curve.crossing(60, 1e-9)?));
        curves.push(curve);
    }
    let big = &curves[curves.len() - 1];
    let small = &curves[curves.len() - 2];
    let p_hat = big.crossing_with(small, 60, 1e-9)?;
    let h = 0.1 * (big.at_quantile(0.9) - big.at_quantile(0.1)).max(1e-6);
    let slope = |c: &SpanningCurve| (c.at(p_hat + h) - c.at(p_hat - h)) / (2.0 * h);
    let var = |c: &SpanningCurve| {
        let r = c.at(p_hat).clamp(0.05, 0.95);
        r * (1.0 - r) / c.trials() as f64
    };
    let dslope = (slope(big) - slope(small)).abs().max(f64::EPSILON);
    let stderr = (var(big) + var(small)).sqrt() / dslope;
    Ok(ThresholdEstimate { p_hat, stderr, trials, sizes: sorted, drift })
}

/// Seed of the spanning curve for size `l` within an estimate seeded by `seed`.
pub fn size_seed(seed: u64, l: usize) -> u64 {
    seed ^ (l as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

/// Homological threshold of the dual surface model: `1 − p̂`.
pub fn surface_threshold_from_duality(bond: &ThresholdEstimate) -> ThresholdEstimate {
    ThresholdEstimate {
        p_hat: 1.0 - bond.p_hat,
        stderr: bond.stderr,
        trials: bond.trials,
        sizes: bond.sizes.clone(),
        drift: bond.drift.iter().map(|&(l, p)| (l, 1.0 - p)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::VecDeque;

    fn bfs_components(lat: &BondLattice, occ: &[bool]) -> usize {
        let n = lat.n_sites();
        let mut adj = vec![Vec::new(); n];
        for (b, &(s, t)) in lat.bonds().iter().enumerate() {
            if occ[b] {
                adj[s as usize].push(t as usize);
                adj[t as usize].push(s as usize);
            }
        }
        let mut seen = vec![false; n];
        let mut count = 0;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            count += 1;
            seen[start] = true;
            let mut q = VecDeque::from([start]);
            while let Some(v) = q.pop_front() {
                for &w in &adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        q.push_back(w);
                    }
                }
            }
        }
        count
    }

    #[test]
    fn bond_counts() {
        assert_eq!(BondLattice::new(2, 8).unwrap().bonds().len(), 7 * 8 + 8 * 8);
        assert_eq!(BondLattice::new(3, 5).unwrap().bonds().len(), 4 * 25 + 2 * 125);
        assert!(BondLattice::new(4, 5).is_err());
    }

    #[test]
    fn union_find_matches_bfs() {
        let mut rng = RngStream::new(3, 0, StreamTag::Percolation);
        for dim in [2, 3] {
            for l in 2..=8 {
                if dim == 3 && l > 6 {
                    continue;
                }
                let lat = BondLattice::new(dim, l).unwrap();
                for _ in 0..10 {
                    let p: f64 = rng.gen();
                    let occ: Vec<bool> = (0..lat.bonds().len()).map(|_| rng.gen::<f64>() < p).collect();
                    assert_eq!(lat.cluster_count(|b| occ[b]), bfs_components(&lat, &occ));
                }
            }
        }
    }

    #[test]
    fn find_is_idempotent() {
        let mut uf = UnionFind::new(10);
        uf.union(1, 2);
        uf.union(3, 2);
        uf.union(7, 9);
        for x in 0..10 {
            let r = uf.find(x);
            assert_eq!(uf.find(r), r);
        }
    }

    #[test]
    fn spanning_extremes() {
        for dim in [2, 3] {
            assert_eq!(spanning_probability(dim, 6, 0.0, 20, 1).unwrap(), 0.0);
            assert_eq!(spanning_probability(dim, 6, 1.0, 20, 1).unwrap(), 1.0);
        }
    }

    #[test]
    fn spanning_is_monotone_and_matches_curve() {
        let mut prev = 0.0;
        for k in 0..=20 {
            let p = k as f64 / 20.0;
            let r = spanning_probability(2, 12, p, 200, 5).unwrap();
            assert!(r >= prev);
            prev = r;
        }
        let curve = SpanningCurve::sample(2, 12, 200, 5, None).unwrap();
        for k in 0..20 {
            let p = k as f64 / 20.0 + 0.013;
            let direct = spanning_probability(2, 12, p, 200, 5).unwrap();
            assert!((curve.at(p) - direct).abs() < 1e-12, "p={p}");
        }
    }

    #[test]
    fn duality_map() {
        let est = ThresholdEstimate { p_hat: 0.2488, stderr: 0.001, trials: 10, sizes: vec![8, 16], drift: vec![] };
        let s = surface_threshold_from_duality(&est);
        assert!((s.p_hat - 0.7512).abs() < 1e-12);
        assert_eq!(s.stderr, est.stderr);
        let half = ThresholdEstimate { p_hat: 0.5, ..est };
        assert_eq!(surface_threshold_from_duality(&half).p_hat, 0.5);
    }

    #[test]
    fn single_size_rejected() {
        assert!(estimate_threshold(2, &[8], 10, 0).is_err());
    }
}
