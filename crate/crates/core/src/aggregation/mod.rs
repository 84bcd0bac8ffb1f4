//! Objective aggregation.
//!
//! Two reductions shrink the number of objectives before solving:
//!
//! - ℓ-block aggregation replaces every run of `ℓ` consecutive cost columns
//!   by their mean and every run of `ℓ` consecutive weights by their sum. For
//!   nonincreasing weights an optimal solution of the reduced problem is a
//!   `ρℓ`-approximation of the original one, where
//!   `ρ = max_k (Σ_{i≤k} w_i) / (Σ_{i≤k} w̄_i)`.
//! - K̄-means aggregation clusters similar columns and replaces each cluster
//!   by its centroid. Weights are split into K̄ blocks as evenly as possible.
//!   There is no a-priori guarantee.
//!
//! [`mean_cost_baseline`] is the single-objective reduction `ĉ_i = OWA_w(c_i·)`
//! whose ratio is `w_1 K`.

mod kmeans;

pub use kmeans::{kmeans_cluster, Clustering, KMEANS_MAX_ITERATIONS};

use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::exact;
use crate::model::{owa_value, CostMatrix, KnapsackInstance, WeightVector};

/// The a-priori approximation ratio `ρℓ` attached to a block aggregation.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub value: f64,
    /// Exact value when every weight is a small-denominator rational.
    pub exact: Option<BigRational>,
}

impl Certificate {
    pub fn exact_string(&self) -> Option<String> {
        self.exact.as_ref().map(exact::format)
    }
}

#[derive(Debug, Clone)]
pub struct AggregationResult {
    pub reduced_costs: CostMatrix,
    pub reduced_weights: WeightVector,
    /// Group of each original objective (dummy objectives included).
    pub assignment: Vec<usize>,
    pub certificate: Option<Certificate>,
}

impl AggregationResult {
    /// Number of objectives after aggregation.
    pub fn reduced_k(&self) -> usize {
        self.reduced_weights.len()
    }

    /// Size of each group, indexed by group.
    pub fn group_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.reduced_k()];
        for &g in &self.assignment {
            sizes[g] += 1;
        }
        sizes
    }
}

/// How columns are ordered before ℓ-blocking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BlockOrder {
    /// Objectives in their given order.
    #[default]
    Given,
    /// Columns regrouped by a K/ℓ-means clustering first, so similar
    /// objectives tend to share a block. The certificate is unaffected.
    Clustered { seed: u64, restarts: usize },
}

/// Number of dummy objectives needed to make `k` a multiple of `l`.
pub fn padding_needed(k: usize, l: usize) -> usize {
    (l - k % l) % l
}

/// Appends all-zero cost columns with weight zero until `K` is a multiple of `l`.
pub fn pad_to_multiple(inst: &KnapsackInstance, l: usize) -> Result<KnapsackInstance> {
    if l == 0 {
        return Err(Error::InvalidParameter("block size must be at least 1".into()));
    }
    let extra = padding_needed(inst.k(), l);
    if extra == 0 {
        return Ok(inst.clone());
    }
    let (costs, weights) = pad_costs(inst.costs(), inst.weights(), extra)?;
    inst.with_costs(costs, weights)
}

fn pad_costs(c: &CostMatrix, w: &WeightVector, extra: usize) -> Result<(CostMatrix, WeightVector)> {
    let k = c.k() + extra;
    let mut entries = Vec::with_capacity(c.n() * k);
    for i in 0..c.n() {
        entries.extend_from_slice(c.row(i));
        entries.extend(std::iter::repeat_n(0.0, extra));
    }
    Ok((CostMatrix::new(c.n(), k, entries)?, w.padded(extra)))
}

fn check_block(k: usize, l: usize) -> Result<()> {
    if l == 0 {
        return Err(Error::InvalidParameter("block size must be at least 1".into()));
    }
    if !k.is_multiple_of(l) {
        return Err(Error::Precondition(format!(
            "K = {k} is not a multiple of ℓ = {l}; pad the instance first"
        )));
    }
    Ok(())
}

/// Block sums `w̄_k = w_{(k−1)ℓ+1} + … + w_{kℓ}`.
pub fn block_weights(w: &[f64], l: usize) -> Vec<f64> {
    w.chunks(l).map(|c| c.iter().sum()).collect()
}

/// `ρ = max_{k ≤ K/ℓ} (Σ_{i≤k} w_i) / (Σ_{i≤k} w̄_i)`, in `[1/ℓ, 1]`.
pub fn rho(w: &WeightVector, l: usize) -> Result<f64> {
    check_block(w.len(), l)?;
    if !w.is_nonincreasing() {
        return Err(Error::Precondition(
            "ρ is only defined for nonincreasing weights".into(),
        ));
    }
    let ws = w.as_slice();
    let aggregated = block_weights(ws, l);
    let mut top = 0.0;
    let mut agg = 0.0;
    let mut best = f64::NEG_INFINITY;
    for (k, wbar) in aggregated.iter().enumerate() {
        top += ws[k];
        agg += wbar;
        // w_1 > 0 for nonincreasing unit-sum weights, so agg > 0 from the start
        best = best.max(top / agg);
    }
    Ok(best)
}

/// Worst-case ratio `ρℓ` of ℓ-block aggregation.
pub fn worst_case_bound(w: &WeightVector, l: usize) -> Result<f64> {
    Ok(rho(w, l)? * l as f64)
}

fn certificate(w: &WeightVector, l: usize) -> Result<Certificate> {
    let value = worst_case_bound(w, l)?;
    let exact = exact::recover_all(w.as_slice())
        .map(|ws| exact::rho(&ws, l) * BigRational::from_integer((l as i64).into()));
    Ok(Certificate { value, exact })
}

/// ℓ-block aggregation of `C` and `w` in the given column order.
///
/// `certificate` is `ρℓ` when `w` is nonincreasing and absent otherwise.
pub fn aggregate_blocks(c: &CostMatrix, w: &WeightVector, l: usize) -> Result<AggregationResult> {
    let order: Vec<usize> = (0..c.k()).collect();
    aggregate_blocks_ordered(c, w, l, &order)
}

/// ℓ-block aggregation after reordering the columns of `C` by `order`
/// (`order[j]` is the original column placed at position `j`). Weights are
/// attached to ranks and are never reordered.
pub fn aggregate_blocks_ordered(
    c: &CostMatrix,
    w: &WeightVector,
    l: usize,
    order: &[usize],
) -> Result<AggregationResult> {
    if w.len() != c.k() {
        return Err(Error::Dimension {
            what: "OWA weights",
            expected: c.k(),
            found: w.len(),
        });
    }
    check_block(c.k(), l)?;
    check_permutation(order, c.k())?;
    let groups = c.k() / l;
    let mut entries = Vec::with_capacity(c.n() * groups);
    for i in 0..c.n() {
        let row = c.row(i);
        for g in 0..groups {
            let sum: f64 = order[g * l..(g + 1) * l].iter().map(|&j| row[j]).sum();
            entries.push(sum / l as f64);
        }
    }
    let mut assignment = vec![0; c.k()];
    for (pos, &j) in order.iter().enumerate() {
        assignment[j] = pos / l;
    }
    let reduced_weights = WeightVector::new(block_weights(w.as_slice(), l))?;
    let certificate = if w.is_nonincreasing() {
        Some(certificate(w, l)?)
    } else {
        None
    };
    Ok(AggregationResult {
        reduced_costs: CostMatrix::new(c.n(), groups, entries)?,
        reduced_weights,
        assignment,
        certificate,
    })
}

fn check_permutation(order: &[usize], k: usize) -> Result<()> {
    let mut seen = vec![false; k];
    if order.len() != k {
        return Err(Error::Dimension {
            what: "column order",
            expected: k,
            found: order.len(),
        });
    }
    for &j in order {
        if j >= k || std::mem::replace(&mut seen[j], true) {
            return Err(Error::InvalidParameter(
                "column order is not a permutation".into(),
            ));
        }
    }
    Ok(())
}

/// Pads to a multiple of `l`, orders columns, and block-aggregates.
pub fn aggregate_instance_blocks(
    inst: &KnapsackInstance,
    l: usize,
    order: BlockOrder,
) -> Result<AggregationResult> {
    let padded = pad_to_multiple(inst, l)?;
    let c = padded.costs();
    let column_order = match order {
        BlockOrder::Given => (0..c.k()).collect(),
        BlockOrder::Clustered { seed, restarts } => {
            let clusters = kmeans_cluster(c, c.k() / l, seed, restarts)?;
            let mut cols: Vec<usize> = (0..c.k()).collect();
            cols.sort_by_key(|&j| clusters.labels[j]);
            cols
        }
    };
    aggregate_blocks_ordered(c, padded.weights(), l, &column_order)
}

/// `ĉ_i = OWA_w(c_i1, …, c_iK)` for every item.
pub fn mean_cost_baseline(c: &CostMatrix, w: &WeightVector) -> Result<Vec<f64>> {
    (0..c.n()).map(|i| owa_value(c.row(i), w)).collect()
}

/// Sizes of the weight blocks for K̄ groups: with `K = aK̄ + b`, the first
/// `b` blocks hold `a + 1` weights and the rest hold `a`.
pub fn even_block_sizes(k: usize, kbar: usize) -> Vec<usize> {
    let (a, b) = (k / kbar, k % kbar);
    (0..kbar).map(|i| if i < b { a + 1 } else { a }).collect()
}

/// K̄-means aggregation: cluster means as reduced columns, evenly split
/// weight blocks as reduced weights (block `i` goes to cluster `i`).
pub fn kmeans_aggregate(
    c: &CostMatrix,
    w: &WeightVector,
    kbar: usize,
    seed: u64,
    restarts: usize,
) -> Result<AggregationResult> {
    if w.len() != c.k() {
        return Err(Error::Dimension {
            what: "OWA weights",
            expected: c.k(),
            found: w.len(),
        });
    }
    let clustering = kmeans_cluster(c, kbar, seed, restarts)?;
    let sizes = clustering.sizes();
    let mut entries = vec![0.0; c.n() * kbar];
    for i in 0..c.n() {
        let row = c.row(i);
        for (j, &g) in clustering.labels.iter().enumerate() {
            entries[i * kbar + g] += row[j];
        }
        for g in 0..kbar {
            entries[i * kbar + g] /= sizes[g] as f64;
        }
    }
    let ws = w.as_slice();
    let mut start = 0;
    let reduced: Vec<f64> = even_block_sizes(c.k(), kbar)
        .into_iter()
        .map(|len| {
            let s = ws[start..start + len].iter().sum();
            start += len;
            s
        })
        .collect();
    Ok(AggregationResult {
        reduced_costs: CostMatrix::new(c.n(), kbar, entries)?,
        reduced_weights: WeightVector::new(reduced)?,
        assignment: clustering.labels,
        certificate: None,
    })
}

/// Aggregation level for a polynomial `εK`-approximation on `K = 2^r` objectives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LevelChoice {
    /// `j̄ = ⌈log₂(1/ε) + 1⌉`.
    pub level: u32,
    /// `ℓ = 2^{r − j̄}`, at least 1.
    pub block_size: usize,
    /// Objectives left after aggregation.
    pub reduced_objectives: usize,
}

pub fn choose_level(k: usize, epsilon: f64) -> Result<LevelChoice> {
    if !k.is_power_of_two() || k < 4 {
        return Err(Error::InvalidParameter(format!(
            "K = {k} must be a power of two 2^r with r > 1; pad the instance first"
        )));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "ε = {epsilon} must lie in (0, 1)"
        )));
    }
    let r = k.trailing_zeros();
    let level = ((1.0 / epsilon).log2() + 1.0).ceil() as u32;
    let block_size = if level >= r { 1 } else { 1usize << (r - level) };
    Ok(LevelChoice {
        level,
        block_size,
        reduced_objectives: k / block_size,
    })
}
