//! Domain types and evaluation of the OWA and Hurwicz criteria.
//!
//! All types are immutable after construction and every evaluation function
//! is pure, so values can be shared freely between threads.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `Σ w_k = 1` accepted when building a [`WeightVector`].
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

/// OWA weights attached to ranks: `weights[0]` multiplies the largest value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    weights: Vec<f64>,
    nonincreasing: bool,
}

impl WeightVector {
    /// Validates `weights` (each nonnegative and at most one, sum within
    /// 1e-9 of one; the upper bound gets the same slack).
    ///
    /// The input is never renormalised; use [`WeightVector::normalized`] for that.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidWeights("empty weight vector".into()));
        }
        for (k, &w) in weights.iter().enumerate() {
            if !w.is_finite() || !(0.0..=1.0 + WEIGHT_SUM_TOLERANCE).contains(&w) {
                return Err(Error::InvalidWeights(format!(
                    "weight {} = {w} is outside [0, 1]",
                    k + 1
                )));
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(Error::InvalidWeights(format!(
                "weights sum to {sum}, expected 1"
            )));
        }
        let nonincreasing = weights.windows(2).all(|p| p[0] >= p[1]);
        Ok(Self {
            weights,
            nonincreasing,
        })
    }

    /// Scales nonnegative `weights` so that they sum to one.
    pub fn normalized(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidWeights(
                "weights must be finite and nonnegative".into(),
            ));
        }
        let sum: f64 = weights.iter().sum();
        if sum <= 0.0 {
            return Err(Error::InvalidWeights("weights sum to zero".into()));
        }
        Self::new(weights.into_iter().map(|w| w / sum).collect())
    }

    /// `w_k = 1/K`: the arithmetic mean.
    pub fn uniform(k: usize) -> Self {
        assert!(k > 0, "uniform weights need at least one objective");
        Self {
            weights: vec![1.0 / k as f64; k],
            nonincreasing: true,
        }
    }

    /// `w_1 = 1`: the maximum (min-max criterion).
    pub fn max(k: usize) -> Self {
        assert!(k > 0, "max weights need at least one objective");
        let mut weights = vec![0.0; k];
        weights[0] = 1.0;
        Self {
            weights,
            nonincreasing: true,
        }
    }

    /// Hurwicz weights `w_1 = λ`, `w_K = 1 − λ`, zero elsewhere.
    ///
    /// For `K = 1` the single weight is 1 regardless of `λ`.
    pub fn hurwicz(k: usize, lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        if k == 0 {
            return Err(Error::InvalidWeights("empty weight vector".into()));
        }
        if k == 1 {
            return Ok(Self::max(1));
        }
        let mut weights = vec![0.0; k];
        weights[0] = lambda;
        weights[k - 1] = 1.0 - lambda;
        Self::new(weights)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    /// `w_1 ≥ w_2 ≥ … ≥ w_K` holds exactly.
    pub fn is_nonincreasing(&self) -> bool {
        self.nonincreasing
    }

    /// The weight of the largest value, `w_1`.
    pub fn first(&self) -> f64 {
        self.weights[0]
    }

    /// Appends `extra` zero weights (dummy objectives).
    pub(crate) fn padded(&self, extra: usize) -> Self {
        let mut weights = self.weights.clone();
        weights.extend(std::iter::repeat_n(0.0, extra));
        let nonincreasing = weights.windows(2).all(|p| p[0] >= p[1]);
        Self {
            weights,
            nonincreasing,
        }
    }
}

/// An `n × K` matrix of nonnegative costs; column `k` is the cost vector `c_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostMatrix {
    n: usize,
    k: usize,
    /// Row-major: entry `(item, objective)` lives at `item * k + objective`.
    entries: Vec<f64>,
}

impl CostMatrix {
    pub fn new(n: usize, k: usize, entries: Vec<f64>) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidInstance("at least one objective is required".into()));
        }
        if entries.len() != n * k {
            return Err(Error::Dimension {
                what: "cost matrix entries",
                expected: n * k,
                found: entries.len(),
            });
        }
        if let Some(pos) = entries.iter().position(|c| !c.is_finite() || *c < 0.0) {
            return Err(Error::InvalidInstance(format!(
                "cost of item {} under objective {} is {} (must be finite and nonnegative)",
                pos / k + 1,
                pos % k + 1,
                entries[pos]
            )));
        }
        Ok(Self { n, k, entries })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let k = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != k) {
            return Err(Error::Dimension {
                what: "cost matrix row",
                expected: k,
                found: bad.len(),
            });
        }
        Self::new(rows.len(), k, rows.concat())
    }

    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let k = columns.len();
        let n = columns.first().map_or(0, Vec::len);
        if let Some(bad) = columns.iter().find(|c| c.len() != n) {
            return Err(Error::Dimension {
                what: "cost matrix column",
                expected: n,
                found: bad.len(),
            });
        }
        let mut entries = Vec::with_capacity(n * k);
        for i in 0..n {
            entries.extend(columns.iter().map(|c| c[i]));
        }
        Self::new(n, k, entries)
    }

    /// Number of items.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of objectives.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn get(&self, item: usize, objective: usize) -> f64 {
        self.entries[item * self.k + objective]
    }

    /// Costs of one item under every objective.
    pub fn row(&self, item: usize) -> &[f64] {
        &self.entries[item * self.k..(item + 1) * self.k]
    }

    pub fn column(&self, objective: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, objective)).collect()
    }

    pub fn columns(&self) -> Vec<Vec<f64>> {
        (0..self.k).map(|k| self.column(k)).collect()
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }
}

/// OWA Min-Knapsack instance: `min OWA_w(F(x))` over
/// `{x ∈ {0,1}^n : demand ≤ bᵀx ≤ capacity}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnapsackInstance {
    name: String,
    item_weights: Vec<f64>,
    demand: f64,
    capacity: Option<f64>,
    costs: CostMatrix,
    weights: WeightVector,
}

impl KnapsackInstance {
    pub fn new(
        item_weights: Vec<f64>,
        demand: f64,
        capacity: Option<f64>,
        costs: CostMatrix,
        weights: WeightVector,
    ) -> Result<Self> {
        if item_weights.len() != costs.n() {
            return Err(Error::Dimension {
                what: "item weights",
                expected: costs.n(),
                found: item_weights.len(),
            });
        }
        if weights.len() != costs.k() {
            return Err(Error::Dimension {
                what: "OWA weights",
                expected: costs.k(),
                found: weights.len(),
            });
        }
        if let Some(i) = item_weights.iter().position(|b| !b.is_finite() || *b < 0.0) {
            return Err(Error::InvalidInstance(format!(
                "item {} has weight {} (must be finite and nonnegative)",
                i + 1,
                item_weights[i]
            )));
        }
        if !demand.is_finite() || demand < 0.0 {
            return Err(Error::InvalidInstance(format!(
                "demand {demand} must be finite and nonnegative"
            )));
        }
        if let Some(cap) = capacity {
            if cap.is_nan() || cap < demand {
                return Err(Error::InvalidInstance(format!(
                    "capacity {cap} is below the demand {demand}"
                )));
            }
        }
        Ok(Self {
            name: String::new(),
            item_weights,
            demand,
            capacity: capacity.filter(|c| c.is_finite()),
            costs,
            weights,
        })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Same items and costs under a different OWA weight vector.
    pub fn with_weights(&self, weights: WeightVector) -> Result<Self> {
        Self::new(
            self.item_weights.clone(),
            self.demand,
            self.capacity,
            self.costs.clone(),
            weights,
        )
        .map(|inst| inst.with_name(self.name.clone()))
    }

    /// Same items and OWA weights under a different cost matrix.
    pub fn with_costs(&self, costs: CostMatrix, weights: WeightVector) -> Result<Self> {
        Self::new(
            self.item_weights.clone(),
            self.demand,
            self.capacity,
            costs,
            weights,
        )
        .map(|inst| inst.with_name(self.name.clone()))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.costs.n()
    }

    pub fn k(&self) -> usize {
        self.costs.k()
    }

    pub fn item_weights(&self) -> &[f64] {
        &self.item_weights
    }

    /// Lower capacity bound `B_lo`.
    pub fn demand(&self) -> f64 {
        self.demand
    }

    /// Upper capacity bound `B_hi`; `None` means unbounded.
    pub fn capacity(&self) -> Option<f64> {
        self.capacity
    }

    pub fn costs(&self) -> &CostMatrix {
        &self.costs
    }

    pub fn weights(&self) -> &WeightVector {
        &self.weights
    }
}

/// A selection together with its objective values `F(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub selection: Vec<bool>,
    pub objective_values: Vec<f64>,
}

impl Solution {
    pub fn new(inst: &KnapsackInstance, selection: Vec<bool>) -> Self {
        let objective_values = objective_values(inst, &selection);
        Self {
            selection,
            objective_values,
        }
    }

    /// Zero-based indices of the selected items, ascending.
    pub fn selected(&self) -> Vec<usize> {
        selected_indices(&self.selection)
    }
}

pub(crate) fn selected_indices(selection: &[bool]) -> Vec<usize> {
    selection
        .iter()
        .enumerate()
        .filter_map(|(i, &s)| s.then_some(i))
        .collect()
}

/// Tie-break order between selections: lexicographic on the ascending list
/// of selected item indices (a proper prefix sorts first).
pub fn selection_cmp(a: &[bool], b: &[bool]) -> Ordering {
    let ia = a.iter().enumerate().filter_map(|(i, &s)| s.then_some(i));
    let ib = b.iter().enumerate().filter_map(|(i, &s)| s.then_some(i));
    ia.cmp(ib)
}

/// `OWA_w(values) = Σ_k w_k · values_σ(k)` with `σ` sorting values nonincreasingly.
pub fn owa_value(values: &[f64], w: &WeightVector) -> Result<f64> {
    if values.len() != w.len() {
        return Err(Error::Dimension {
            what: "OWA values",
            expected: w.len(),
            found: values.len(),
        });
    }
    let mut buf = Vec::with_capacity(values.len());
    Ok(owa_with_buffer(values, w.as_slice(), &mut buf))
}

/// OWA evaluation without the length check; `buf` is scratch space.
pub(crate) fn owa_with_buffer(values: &[f64], weights: &[f64], buf: &mut Vec<f64>) -> f64 {
    debug_assert_eq!(values.len(), weights.len());
    buf.clear();
    buf.extend_from_slice(values);
    buf.sort_by(|a, b| b.total_cmp(a));
    weights.iter().zip(buf.iter()).map(|(w, v)| w * v).sum()
}

/// `λ · max + (1 − λ) · min`.
pub fn hurwicz_value(values: &[f64], lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    if values.is_empty() {
        return Err(Error::Dimension {
            what: "Hurwicz values",
            expected: 1,
            found: 0,
        });
    }
    if values.len() == 1 {
        return Ok(values[0]);
    }
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(lambda * max + (1.0 - lambda) * min)
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidParameter(format!(
            "Hurwicz λ = {lambda} is outside [0, 1]"
        )));
    }
    Ok(())
}

/// `F(x) = (c_1ᵀx, …, c_Kᵀx)`. Feasibility is not checked.
///
/// # Panics
///
/// If `x.len()` differs from the number of items.
pub fn objective_values(inst: &KnapsackInstance, x: &[bool]) -> Vec<f64> {
    assert_eq!(x.len(), inst.n(), "selection length must equal item count");
    let costs = inst.costs();
    let mut values = vec![0.0; costs.k()];
    for (i, _) in x.iter().enumerate().filter(|(_, &s)| s) {
        for (v, c) in values.iter_mut().zip(costs.row(i)) {
            *v += c;
        }
    }
    values
}

/// `B_lo ≤ bᵀx ≤ B_hi`.
pub fn is_feasible(inst: &KnapsackInstance, x: &[bool]) -> bool {
    assert_eq!(x.len(), inst.n(), "selection length must equal item count");
    let load: f64 = inst
        .item_weights()
        .iter()
        .zip(x)
        .filter(|(_, &s)| s)
        .map(|(b, _)| b)
        .sum();
    load >= inst.demand() && inst.capacity().is_none_or(|cap| load <= cap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample_weights() -> WeightVector {
        WeightVector::new(vec![0.2, 0.2, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1]).unwrap()
    }

    /// Four items, eight objectives, exactly two items must be picked.
    fn four_item_instance() -> KnapsackInstance {
        let rows = vec![
            vec![1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0],
            vec![1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0],
        ];
        KnapsackInstance::new(
            vec![1.0; 4],
            2.0,
            Some(2.0),
            CostMatrix::from_rows(&rows).unwrap(),
            sample_weights(),
        )
        .unwrap()
    }

    #[test]
    fn owa_examples() {
        let w = sample_weights();
        let v = owa_value(&[1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0], &w).unwrap();
        assert!((v - 0.6).abs() < 1e-15);
        let v = owa_value(&[2.0, 0.0, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0], &w).unwrap();
        assert!((v - 0.8).abs() < 1e-15);

        let third = WeightVector::uniform(3);
        assert!((owa_value(&[3.0, 1.0, 2.0], &third).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(owa_value(&[3.0, 1.0, 2.0], &WeightVector::max(3)).unwrap(), 3.0);
    }

    #[test]
    fn owa_length_mismatch() {
        let err = owa_value(&[1.0, 2.0], &WeightVector::uniform(3)).unwrap_err();
        assert!(matches!(err, Error::Dimension { .. }));
    }

    #[test]
    fn hurwicz_examples() {
        let v = [4.0, 2.0, 8.0];
        assert_eq!(hurwicz_value(&v, 1.0).unwrap(), 8.0);
        assert_eq!(hurwicz_value(&v, 0.0).unwrap(), 2.0);
        assert_eq!(hurwicz_value(&v, 0.5).unwrap(), 5.0);
        assert_eq!(hurwicz_value(&[7.0], 0.3).unwrap(), 7.0);
        assert!(matches!(
            hurwicz_value(&[], 0.5),
            Err(Error::Dimension { .. })
        ));
        assert!(hurwicz_value(&v, 1.5).is_err());
    }

    #[test]
    fn weight_validation() {
        assert!(WeightVector::new(vec![0.5, 0.4]).is_err());
        assert!(WeightVector::new(vec![1.2, -0.2]).is_err());
        assert!(WeightVector::new(vec![]).is_err());
        let w = WeightVector::new(vec![0.3, 0.7]).unwrap();
        assert!(!w.is_nonincreasing());
        let w = WeightVector::normalized(vec![2.0, 1.0, 1.0]).unwrap();
        assert_eq!(w.as_slice(), &[0.5, 0.25, 0.25]);
        assert!(w.is_nonincreasing());
    }

    #[test]
    fn objective_values_examples() {
        let inst = four_item_instance();
        assert_eq!(objective_values(&inst, &[false; 4]), vec![0.0; 8]);
        assert_eq!(
            objective_values(&inst, &[true, true, false, false]),
            vec![1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0]
        );
        assert_eq!(
            objective_values(&inst, &[false, true, false, false]),
            inst.costs().row(1).to_vec()
        );
    }

    #[test]
    fn feasibility_examples() {
        let inst = four_item_instance();
        assert!(is_feasible(&inst, &[true, true, false, false]));
        assert!(!is_feasible(&inst, &[true, true, true, false]));
        let open = KnapsackInstance::new(
            vec![1.0; 4],
            0.0,
            None,
            inst.costs().clone(),
            sample_weights(),
        )
        .unwrap();
        for mask in 0..16u32 {
            let x: Vec<bool> = (0..4).map(|i| mask >> i & 1 == 1).collect();
            assert!(is_feasible(&open, &x));
        }
    }

    #[test]
    fn instance_validation() {
        let costs = CostMatrix::from_rows(&[vec![1.0, 2.0]]).unwrap();
        let w = WeightVector::uniform(2);
        assert!(KnapsackInstance::new(vec![1.0, 1.0], 1.0, None, costs.clone(), w.clone()).is_err());
        assert!(KnapsackInstance::new(vec![1.0], 2.0, Some(1.0), costs.clone(), w.clone()).is_err());
        assert!(KnapsackInstance::new(vec![1.0], 1.0, None, costs, WeightVector::uniform(3)).is_err());
        assert!(CostMatrix::from_rows(&[vec![1.0, -2.0]]).is_err());
    }

    #[test]
    fn selection_order_prefers_earlier_items() {
        let a = [true, true, false, false];
        let b = [true, false, false, true];
        let c = [false, false, true, true];
        assert_eq!(selection_cmp(&a, &b), Ordering::Less);
        assert_eq!(selection_cmp(&b, &c), Ordering::Less);
        assert_eq!(selection_cmp(&[false, false], &[true, false]), Ordering::Less);
    }

    fn weights_strategy(k: usize) -> impl Strategy<Value = WeightVector> {
        prop::collection::vec(0.0f64..1.0, k).prop_filter_map("zero sum", |mut raw| {
            raw.sort_by(|a, b| b.total_cmp(a));
            WeightVector::normalized(raw).ok()
        })
    }

    fn values_and_weights() -> impl Strategy<Value = (Vec<f64>, WeightVector)> {
        (1usize..12).prop_flat_map(|k| (prop::collection::vec(0.0f64..100.0, k), weights_strategy(k)))
    }

    proptest! {
        #[test]
        fn owa_is_permutation_invariant((values, w) in values_and_weights(), seed in any::<u64>()) {
            let mut shuffled = values.clone();
            // deterministic rotation + reversal as the permutation
            let r = (seed as usize) % shuffled.len();
            shuffled.rotate_left(r);
            if seed % 2 == 0 { shuffled.reverse(); }
            let a = owa_value(&values, &w).unwrap();
            let b = owa_value(&shuffled, &w).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn owa_is_monotone((values, w) in values_and_weights(), bumps in prop::collection::vec(0.0f64..10.0, 12)) {
            let larger: Vec<f64> = values.iter().zip(&bumps).map(|(v, d)| v + d).collect();
            prop_assert!(owa_value(&values, &w).unwrap() <= owa_value(&larger, &w).unwrap() + 1e-12);
        }

        #[test]
        fn owa_is_positively_homogeneous((values, w) in values_and_weights(), t in 0.0f64..50.0) {
            let scaled: Vec<f64> = values.iter().map(|v| t * v).collect();
            let lhs = owa_value(&scaled, &w).unwrap();
            let rhs = t * owa_value(&values, &w).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()));
        }

        #[test]
        fn merging_two_ranks_never_decreases_owa(
            (values, w) in values_and_weights().prop_filter("need two values", |(v, _)| v.len() >= 2),
            picks in (0usize..100, 0usize..100),
        ) {
            let k = values.len();
            let mut order: Vec<usize> = (0..k).collect();
            order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
            let (mut i, mut j) = (picks.0 % k, picks.1 % k);
            if i == j { j = (i + 1) % k; }
            if i > j { std::mem::swap(&mut i, &mut j); }
            let mut merged = values.clone();
            merged[order[i]] += merged[order[j]];
            merged[order[j]] = 0.0;
            prop_assert!(owa_value(&merged, &w).unwrap() >= owa_value(&values, &w).unwrap() - 1e-9);
        }

        #[test]
        fn chebyshev_sum_inequality(
            mut a in prop::collection::vec(-50.0f64..50.0, 1..20),
            seed in prop::collection::vec(-50.0f64..50.0, 20),
        ) {
            let m = a.len();
            let mut w: Vec<f64> = seed[..m].to_vec();
            a.sort_by(|x, y| y.total_cmp(x));
            w.sort_by(|x, y| y.total_cmp(x));
            let lhs = w.iter().sum::<f64>() * a.iter().sum::<f64>();
            let rhs = m as f64 * w.iter().zip(&a).map(|(x, y)| x * y).sum::<f64>();
            prop_assert!(lhs <= rhs + 1e-6 * (1.0 + rhs.abs()));
        }

        #[test]
        fn hurwicz_matches_owa_weights(values in prop::collection::vec(0.0f64..100.0, 2..10), lambda in 0.0f64..=1.0) {
            let w = WeightVector::hurwicz(values.len(), lambda).unwrap();
            let a = hurwicz_value(&values, lambda).unwrap();
            let b = owa_value(&values, &w).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }
    }
}
