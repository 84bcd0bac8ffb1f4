//! Seeded Lloyd's K-means over the cost columns.
//!
//! Restart `r` is seeded with `seed + r`, initialised by greedy k-means++ and
//! iterated until assignments stop changing or [`KMEANS_MAX_ITERATIONS`] is
//! reached. Empty clusters are repaired by moving in the point farthest from
//! its centroid. The restart with the smallest `Σ ‖c − μ‖₂` wins (lowest
//! restart index on ties), so the result does not depend on scheduling.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::CostMatrix;
use crate::rng;

pub const KMEANS_MAX_ITERATIONS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    /// Cluster of each column, numbered in order of first appearance.
    pub labels: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    /// `Σ_i Σ_{c ∈ C_i} ‖c − μ_i‖₂`.
    pub score: f64,
}

impl Clustering {
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.centroids.len()];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }
}

/// Partitions the columns of `c` into `kbar` nonempty clusters.
pub fn kmeans_cluster(c: &CostMatrix, kbar: usize, seed: u64, restarts: usize) -> Result<Clustering> {
    let k = c.k();
    if kbar == 0 || kbar > k {
        return Err(Error::InvalidParameter(format!(
            "cluster count {kbar} must lie in 1..={k}"
        )));
    }
    let points = c.columns();
    let runs: Vec<Clustering> = (0..restarts.max(1) as u64)
        .into_par_iter()
        .map(|r| lloyd(&points, kbar, seed.wrapping_add(r)))
        .collect();
    // strict < keeps the lowest restart index among equal scores
    let best = runs
        .into_iter()
        .reduce(|best, run| if run.score < best.score { run } else { best })
        .expect("at least one restart");
    Ok(best)
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(point: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.iter().enumerate() {
        let d = sq_dist(point, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

/// Greedy k-means++: each step samples `2 + ⌊ln K̄⌋` candidates with
/// probability proportional to `D²` and keeps the one that lowers the total
/// `D²` most.
fn seed_centroids(points: &[Vec<f64>], kbar: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = rng::stream(seed, 0);
    let trials = 2 + (kbar as f64).ln() as usize;
    let mut chosen = vec![rng::index(&mut rng, points.len())];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &points[chosen[0]])).collect();
    while chosen.len() < kbar {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut best: Option<(usize, f64, Vec<f64>)> = None;
            for _ in 0..trials {
                let cand = sample_d2(&d2, total, rng::unit(&mut rng));
                let updated: Vec<f64> = d2
                    .iter()
                    .zip(points)
                    .map(|(&d, p)| d.min(sq_dist(p, &points[cand])))
                    .collect();
                let potential: f64 = updated.iter().sum();
                if best.as_ref().is_none_or(|b| potential < b.1) {
                    best = Some((cand, potential, updated));
                }
            }
            let (cand, _, updated) = best.unwrap();
            d2 = updated;
            cand
        } else {
            // all remaining points coincide with a centroid
            (0..points.len()).find(|i| !chosen.contains(i)).unwrap()
        };
        chosen.push(next);
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, &points[next]));
        }
    }
    chosen.into_iter().map(|i| points[i].clone()).collect()
}

/// Index drawn with probability `d2[i] / total` from a uniform `u ∈ [0, 1)`.
fn sample_d2(d2: &[f64], total: f64, u: f64) -> usize {
    let target = u * total;
    let mut acc = 0.0;
    for (i, &d) in d2.iter().enumerate() {
        acc += d;
        if d > 0.0 && acc > target {
            return i;
        }
    }
    // rounding can leave target ≥ acc; fall back to the last positive weight
    d2.iter().rposition(|&d| d > 0.0).unwrap()
}

fn update_centroids(points: &[Vec<f64>], labels: &[usize], centroids: &mut [Vec<f64>]) {
    let dim = points[0].len();
    let mut counts = vec![0usize; centroids.len()];
    for c in centroids.iter_mut() {
        c.iter_mut().for_each(|v| *v = 0.0);
    }
    for (p, &l) in points.iter().zip(labels) {
        counts[l] += 1;
        for d in 0..dim {
            centroids[l][d] += p[d];
        }
    }
    for (c, &n) in centroids.iter_mut().zip(&counts) {
        if n > 0 {
            c.iter_mut().for_each(|v| *v /= n as f64);
        }
    }
}

fn repair_empty(points: &[Vec<f64>], labels: &mut [usize], centroids: &mut [Vec<f64>]) {
    loop {
        let mut counts = vec![0usize; centroids.len()];
        for &l in labels.iter() {
            counts[l] += 1;
        }
        let Some(empty) = counts.iter().position(|&n| n == 0) else {
            return;
        };
        let mut far: Option<(usize, f64)> = None;
        for (i, p) in points.iter().enumerate() {
            if counts[labels[i]] < 2 {
                continue;
            }
            let d = sq_dist(p, &centroids[labels[i]]);
            if far.is_none_or(|(_, best)| d > best) {
                far = Some((i, d));
            }
        }
        let (i, _) = far.expect("kbar ≤ K leaves a cluster with two members");
        labels[i] = empty;
        centroids[empty] = points[i].clone();
        update_centroids(points, labels, centroids);
    }
}

fn lloyd(points: &[Vec<f64>], kbar: usize, seed: u64) -> Clustering {
    let mut centroids = seed_centroids(points, kbar, seed);
    let mut labels: Vec<usize> = points.iter().map(|p| nearest(p, &centroids).0).collect();
    repair_empty(points, &mut labels, &mut centroids);
    update_centroids(points, &labels, &mut centroids);
    for _ in 0..KMEANS_MAX_ITERATIONS {
        let next: Vec<usize> = points.iter().map(|p| nearest(p, &centroids).0).collect();
        if next == labels {
            break;
        }
        labels = next;
        repair_empty(points, &mut labels, &mut centroids);
        update_centroids(points, &labels, &mut centroids);
    }
    canonical(points, labels, centroids)
}

/// Renumbers clusters by first appearance and computes the score.
fn canonical(points: &[Vec<f64>], labels: Vec<usize>, centroids: Vec<Vec<f64>>) -> Clustering {
    let mut rename = vec![usize::MAX; centroids.len()];
    let mut next = 0;
    for &l in &labels {
        if rename[l] == usize::MAX {
            rename[l] = next;
            next += 1;
        }
    }
    let labels: Vec<usize> = labels.iter().map(|&l| rename[l]).collect();
    let mut ordered = vec![Vec::new(); centroids.len()];
    for (old, c) in centroids.into_iter().enumerate() {
        ordered[rename[old]] = c;
    }
    let score = points
        .iter()
        .zip(&labels)
        .map(|(p, &l)| sq_dist(p, &ordered[l]).sqrt())
        .sum();
    Clustering {
        labels,
        centroids: ordered,
        score,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_item_columns(k: usize) -> CostMatrix {
        let mut cols = vec![vec![1.0, 0.0]];
        cols.extend((1..k).map(|_| vec![0.0, 1.0]));
        CostMatrix::from_columns(&cols).unwrap()
    }

    #[test]
    fn isolates_the_odd_column() {
        for seed in 0..20 {
            let cl = kmeans_cluster(&two_item_columns(10), 2, seed, 1).unwrap();
            let mut expect = vec![1; 10];
            expect[0] = 0;
            assert_eq!(cl.labels, expect, "seed {seed}");
        }
    }

    #[test]
    fn forced_partitions() {
        let c = CostMatrix::from_rows(&[vec![1.0, 4.0, 2.0, 8.0], vec![3.0, 3.0, 0.0, 1.0]]).unwrap();
        let all = kmeans_cluster(&c, 4, 5, 3).unwrap();
        assert_eq!(all.labels, vec![0, 1, 2, 3]);
        assert_eq!(all.score, 0.0);
        let one = kmeans_cluster(&c, 1, 5, 3).unwrap();
        assert_eq!(one.labels, vec![0; 4]);
        assert_eq!(one.centroids[0], vec![3.75, 1.75]);
    }

    #[test]
    fn rejects_bad_cluster_counts() {
        let c = two_item_columns(4);
        assert!(kmeans_cluster(&c, 0, 0, 1).is_err());
        assert!(kmeans_cluster(&c, 5, 0, 1).is_err());
    }

    #[test]
    fn duplicate_columns_still_fill_every_cluster() {
        let c = CostMatrix::from_columns(&vec![vec![2.0, 2.0]; 6]).unwrap();
        let cl = kmeans_cluster(&c, 3, 11, 2).unwrap();
        assert!(cl.sizes().iter().all(|&s| s > 0));
        assert_eq!(cl.sizes().iter().sum::<usize>(), 6);
    }

    #[test]
    fn deterministic_given_seed_and_restarts() {
        let rows: Vec<Vec<f64>> = (0..5)
            .map(|i| (0..12).map(|j| ((i * 7 + j * 13) % 11) as f64).collect())
            .collect();
        let c = CostMatrix::from_rows(&rows).unwrap();
        let a = kmeans_cluster(&c, 4, 42, 8).unwrap();
        let b = kmeans_cluster(&c, 4, 42, 8).unwrap();
        assert_eq!(a, b);
        assert!(a.sizes().iter().all(|&s| s > 0));
        // more restarts can only improve the chosen score
        let more = kmeans_cluster(&c, 4, 42, 16).unwrap();
        assert!(more.score <= a.score);
    }
}
