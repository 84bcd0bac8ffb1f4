//! Exact and aggregated solvers for OWA Min-Knapsack.
//!
//! The exact path is a depth-first branch-and-bound over the item variables.
//! A node is bounded by evaluating the criterion on per-objective lower
//! bounds `L_k = (fixed cost under k) + (fractional min-knapsack relaxation of
//! the residual demand under c_k)`; since every criterion here is an OWA with
//! nonnegative weights it is componentwise monotone, so `OWA(L)` never
//! exceeds the value of a feasible completion.
//!
//! Ties between equally good selections are broken towards the
//! lexicographically smallest list of selected item indices, by every solver.

use std::cmp::Ordering;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aggregation::{
    aggregate_instance_blocks, kmeans_aggregate, mean_cost_baseline, BlockOrder, Certificate,
};
use crate::error::{Error, Result};
use crate::exact;
use crate::model::{
    hurwicz_value, is_feasible, objective_values, owa_with_buffer, selection_cmp, CostMatrix,
    KnapsackInstance, Solution, WeightVector,
};

/// Largest `n` enumerated by [`solve_brute_force`].
pub const DEFAULT_ENUMERATION_LIMIT: usize = 25;

pub const DEFAULT_TIME_LIMIT: Duration = Duration::from_secs(60);

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Criterion {
    /// OWA with the instance's weight vector.
    Owa,
    /// Maximum over objectives.
    MinMax,
    /// `λ · max + (1 − λ) · min`.
    Hurwicz(f64),
}

impl Criterion {
    /// The rank weights this criterion applies to `inst`.
    pub fn owa_weights(&self, inst: &KnapsackInstance) -> Result<WeightVector> {
        match *self {
            Criterion::Owa => Ok(inst.weights().clone()),
            Criterion::MinMax => Ok(WeightVector::max(inst.k())),
            Criterion::Hurwicz(lambda) => WeightVector::hurwicz(inst.k(), lambda),
        }
    }

    fn evaluator(&self, inst: &KnapsackInstance) -> Result<Evaluator> {
        if let Criterion::Hurwicz(lambda) = *self {
            hurwicz_value(&[0.0], lambda)?;
        }
        Ok(Evaluator {
            criterion: *self,
            weights: self.owa_weights(inst)?.as_slice().to_vec(),
            buf: Vec::with_capacity(inst.k()),
        })
    }
}

/// Evaluates a criterion on objective vectors without reallocating.
struct Evaluator {
    criterion: Criterion,
    weights: Vec<f64>,
    buf: Vec<f64>,
}

impl Evaluator {
    fn value(&mut self, values: &[f64]) -> f64 {
        match self.criterion {
            Criterion::Hurwicz(lambda) => hurwicz_value(values, lambda).expect("validated λ"),
            _ => owa_with_buffer(values, &self.weights, &mut self.buf),
        }
    }

    /// OWA form, used on lower-bound vectors.
    fn bound(&mut self, lower: &[f64]) -> f64 {
        owa_with_buffer(lower, &self.weights, &mut self.buf)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Optimal,
    TimeLimit,
    Infeasible,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Optimal => "optimal",
            Status::TimeLimit => "time_limit",
            Status::Infeasible => "infeasible",
        })
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    /// Absent when infeasible, or when the time limit hit before any incumbent.
    pub solution: Option<Solution>,
    /// Criterion value of `solution` on the instance that was passed in
    /// (`+∞` without a solution).
    pub value: f64,
    pub status: Status,
    /// A-priori ratio guarantee for aggregated solves.
    pub bound_certificate: Option<Certificate>,
    /// Optimal value of the reduced problem for aggregated solves.
    pub reduced_value: Option<f64>,
    /// Objectives in the problem actually solved.
    pub reduced_objectives: usize,
    pub nodes_explored: u64,
    pub elapsed: Duration,
}

impl SolveReport {
    fn empty(status: Status, k: usize) -> Self {
        Self {
            solution: None,
            value: f64::INFINITY,
            status,
            bound_certificate: None,
            reduced_value: None,
            reduced_objectives: k,
            nodes_explored: 0,
            elapsed: Duration::ZERO,
        }
    }
}

fn better(value: f64, sel: &[bool], incumbent: &Option<(f64, Vec<bool>)>) -> bool {
    match incumbent {
        None => true,
        Some((best, best_sel)) => {
            value < *best || (value == *best && selection_cmp(sel, best_sel) == Ordering::Less)
        }
    }
}

fn selection_from_mask(mask: u64, n: usize, out: &mut Vec<bool>) {
    out.clear();
    out.extend((0..n).map(|i| mask >> i & 1 == 1));
}

/// Minimiser of `criterion` by enumerating all `2^n` selections (`n ≤ 25`).
pub fn solve_brute_force(inst: &KnapsackInstance, criterion: Criterion) -> Result<SolveReport> {
    solve_brute_force_with_limit(inst, criterion, DEFAULT_ENUMERATION_LIMIT)
}

pub fn solve_brute_force_with_limit(
    inst: &KnapsackInstance,
    criterion: Criterion,
    max_items: usize,
) -> Result<SolveReport> {
    let start = Instant::now();
    let mut best: Option<(f64, Vec<bool>)> = None;
    let count = enumerate_feasible(inst, criterion, max_items, |value, sel| {
        if better(value, sel, &best) {
            best = Some((value, sel.to_vec()));
        }
    })?;
    let mut report = match best {
        None => SolveReport::empty(Status::Infeasible, inst.k()),
        Some((value, sel)) => SolveReport {
            solution: Some(Solution::new(inst, sel)),
            value,
            ..SolveReport::empty(Status::Optimal, inst.k())
        },
    };
    report.nodes_explored = count;
    report.elapsed = start.elapsed();
    Ok(report)
}

/// Every feasible selection whose value is within `tolerance` of the optimum,
/// in tie-break order, together with the optimum.
pub fn near_optimal_selections(
    inst: &KnapsackInstance,
    criterion: Criterion,
    tolerance: f64,
) -> Result<Option<(f64, Vec<Vec<bool>>)>> {
    let mut all: Vec<(f64, Vec<bool>)> = Vec::new();
    enumerate_feasible(inst, criterion, DEFAULT_ENUMERATION_LIMIT, |value, sel| {
        all.push((value, sel.to_vec()));
    })?;
    let Some(opt) = all.iter().map(|(v, _)| *v).reduce(f64::min) else {
        return Ok(None);
    };
    let mut ties: Vec<Vec<bool>> = all
        .into_iter()
        .filter(|(v, _)| *v <= opt + tolerance)
        .map(|(_, s)| s)
        .collect();
    ties.sort_by(|a, b| selection_cmp(a, b));
    Ok(Some((opt, ties)))
}

fn enumerate_feasible(
    inst: &KnapsackInstance,
    criterion: Criterion,
    max_items: usize,
    mut visit: impl FnMut(f64, &[bool]),
) -> Result<u64> {
    let n = inst.n();
    if n > max_items || n >= 63 {
        return Err(Error::TooLarge { n, limit: max_items });
    }
    let mut eval = criterion.evaluator(inst)?;
    let mut sel = Vec::with_capacity(n);
    let mut count = 0;
    for mask in 0..(1u64 << n) {
        selection_from_mask(mask, n, &mut sel);
        count += 1;
        if !is_feasible(inst, &sel) {
            continue;
        }
        let value = eval.value(&objective_values(inst, &sel));
        visit(value, &sel);
    }
    Ok(count)
}

/// Items with positive weight, per objective, by ascending cost-to-weight ratio.
fn ratio_orders(inst: &KnapsackInstance) -> Vec<Vec<usize>> {
    let b = inst.item_weights();
    let c = inst.costs();
    (0..inst.k())
        .map(|k| {
            let mut items: Vec<usize> = (0..inst.n()).filter(|&i| b[i] > 0.0).collect();
            items.sort_by(|&i, &j| {
                (c.get(i, k) / b[i])
                    .total_cmp(&(c.get(j, k) / b[j]))
                    .then(i.cmp(&j))
            });
            items
        })
        .collect()
}

/// Minimum of `c_kᵀy` over `y ∈ [0,1]` on free items with `bᵀy ≥ residual`,
/// filling greedily by ratio; `+∞` when the free items cannot cover it.
///
/// The greedy solution covers exactly `residual`, so any upper capacity
/// `≥ demand` is respected automatically.
fn fractional_cover(
    inst: &KnapsackInstance,
    k: usize,
    ratio_order: &[usize],
    is_free: impl Fn(usize) -> bool,
    residual: f64,
) -> f64 {
    if residual <= 0.0 {
        return 0.0;
    }
    let b = inst.item_weights();
    let mut left = residual;
    let mut cost = 0.0;
    for &i in ratio_order.iter().filter(|&&i| is_free(i)) {
        let c = inst.costs().get(i, k);
        if b[i] >= left {
            return cost + c * (left / b[i]);
        }
        cost += c;
        left -= b[i];
    }
    if left <= slack(inst) {
        cost
    } else {
        f64::INFINITY
    }
}

/// Absolute tolerance on capacity comparisons of accumulated weights.
fn slack(inst: &KnapsackInstance) -> f64 {
    1e-9 * (1.0 + inst.demand() + inst.item_weights().iter().sum::<f64>())
}

/// Lower bound on the OWA value (instance weights) of any feasible completion
/// of the partial assignment; `+∞` if none can exist.
pub fn lower_bound(inst: &KnapsackInstance, fixed_one: &[usize], fixed_zero: &[usize]) -> Result<f64> {
    let n = inst.n();
    let mut state = vec![None; n];
    for (&i, v) in fixed_one.iter().map(|i| (i, true)).chain(fixed_zero.iter().map(|i| (i, false))) {
        if i >= n {
            return Err(Error::InvalidParameter(format!("item index {i} out of range")));
        }
        if state[i].replace(v).is_some() {
            return Err(Error::Precondition(format!("item {i} is fixed twice")));
        }
    }
    let b = inst.item_weights();
    let load: f64 = fixed_one.iter().map(|&i| b[i]).sum();
    let free_load: f64 = (0..n).filter(|&i| state[i].is_none()).map(|i| b[i]).sum();
    if inst.capacity().is_some_and(|cap| load > cap + slack(inst))
        || load + free_load < inst.demand() - slack(inst)
    {
        return Ok(f64::INFINITY);
    }
    let orders = ratio_orders(inst);
    let mut lower = vec![0.0; inst.k()];
    for (k, l) in lower.iter_mut().enumerate() {
        let fixed: f64 = fixed_one.iter().map(|&i| inst.costs().get(i, k)).sum();
        *l = fixed + fractional_cover(inst, k, &orders[k], |i| state[i].is_none(), inst.demand() - load);
        if l.is_infinite() {
            return Ok(f64::INFINITY);
        }
    }
    let mut buf = Vec::new();
    Ok(owa_with_buffer(&lower, inst.weights().as_slice(), &mut buf))
}

#[derive(Debug, Clone)]
pub struct BnbOptions {
    pub time_limit: Duration,
    /// Bound-based pruning; feasibility pruning is always on.
    pub pruning: bool,
}

impl Default for BnbOptions {
    fn default() -> Self {
        Self {
            time_limit: DEFAULT_TIME_LIMIT,
            pruning: true,
        }
    }
}

/// Exact branch-and-bound.
pub fn solve_bnb(inst: &KnapsackInstance, criterion: Criterion, time_limit: Duration) -> Result<SolveReport> {
    solve_bnb_with(
        inst,
        criterion,
        &BnbOptions {
            time_limit,
            ..BnbOptions::default()
        },
    )
}

pub fn solve_bnb_with(inst: &KnapsackInstance, criterion: Criterion, options: &BnbOptions) -> Result<SolveReport> {
    let start = Instant::now();
    let mut search = Search::new(inst, criterion, options, start)?;
    search.incumbent = search.greedy_incumbent();
    search.visit(0, 0.0);
    let timed_out = search.timed_out;
    let nodes = search.nodes;
    let mut report = match search.incumbent {
        Some((value, sel)) => SolveReport {
            solution: Some(Solution::new(inst, sel)),
            value,
            ..SolveReport::empty(
                if timed_out { Status::TimeLimit } else { Status::Optimal },
                inst.k(),
            )
        },
        None if timed_out => SolveReport::empty(Status::TimeLimit, inst.k()),
        None => SolveReport::empty(Status::Infeasible, inst.k()),
    };
    report.nodes_explored = nodes;
    report.elapsed = start.elapsed();
    Ok(report)
}

struct Search<'a> {
    inst: &'a KnapsackInstance,
    eval: Evaluator,
    pruning: bool,
    deadline: Instant,
    /// Branching order: descending item weight.
    order: Vec<usize>,
    /// Position of each item in `order`.
    position: Vec<usize>,
    /// `Σ b` over `order[d..]`.
    suffix_load: Vec<f64>,
    ratio_orders: Vec<Vec<usize>>,
    selection: Vec<bool>,
    /// Fixed cost per objective, one row per depth.
    fixed: Vec<Vec<f64>>,
    lower: Vec<f64>,
    slack: f64,
    incumbent: Option<(f64, Vec<bool>)>,
    nodes: u64,
    timed_out: bool,
}

impl<'a> Search<'a> {
    fn new(inst: &'a KnapsackInstance, criterion: Criterion, options: &BnbOptions, start: Instant) -> Result<Self> {
        let n = inst.n();
        let b = inst.item_weights();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| b[j].total_cmp(&b[i]).then(i.cmp(&j)));
        let mut position = vec![0; n];
        for (p, &i) in order.iter().enumerate() {
            position[i] = p;
        }
        let mut suffix_load = vec![0.0; n + 1];
        for d in (0..n).rev() {
            suffix_load[d] = suffix_load[d + 1] + b[order[d]];
        }
        Ok(Self {
            inst,
            eval: criterion.evaluator(inst)?,
            pruning: options.pruning,
            deadline: start + options.time_limit,
            order,
            position,
            suffix_load,
            ratio_orders: ratio_orders(inst),
            selection: vec![false; n],
            fixed: vec![vec![0.0; inst.k()]; n + 1],
            lower: vec![0.0; inst.k()],
            slack: slack(inst),
            incumbent: None,
            nodes: 0,
            timed_out: false,
        })
    }

    /// Adds items by ascending mean-cost-to-weight ratio until the demand is met.
    fn greedy_incumbent(&mut self) -> Option<(f64, Vec<bool>)> {
        let inst = self.inst;
        let b = inst.item_weights();
        let mut items: Vec<usize> = (0..inst.n()).filter(|&i| b[i] > 0.0).collect();
        let mean = |i: usize| inst.costs().row(i).iter().sum::<f64>() / inst.k() as f64 / b[i];
        items.sort_by(|&i, &j| mean(i).total_cmp(&mean(j)).then(i.cmp(&j)));
        let mut sel = vec![false; inst.n()];
        let mut load = 0.0;
        for i in items {
            if load >= inst.demand() {
                break;
            }
            sel[i] = true;
            load += b[i];
        }
        is_feasible(inst, &sel).then(|| (self.eval.value(&objective_values(inst, &sel)), sel))
    }

    fn tolerance(value: f64) -> f64 {
        1e-12 * value.abs().max(1.0)
    }

    fn bound(&mut self, depth: usize, load: f64) -> f64 {
        let inst = self.inst;
        let residual = inst.demand() - load;
        for k in 0..inst.k() {
            let position = &self.position;
            let frac = fractional_cover(inst, k, &self.ratio_orders[k], |i| position[i] >= depth, residual);
            if frac.is_infinite() {
                return f64::INFINITY;
            }
            self.lower[k] = self.fixed[depth][k] + frac;
        }
        let lower = std::mem::take(&mut self.lower);
        let bound = self.eval.bound(&lower);
        self.lower = lower;
        bound
    }

    fn visit(&mut self, depth: usize, load: f64) {
        self.nodes += 1;
        if self.nodes % 1024 == 1 && Instant::now() >= self.deadline {
            self.timed_out = true;
        }
        if self.timed_out {
            return;
        }
        let inst = self.inst;
        if inst.capacity().is_some_and(|cap| load > cap + self.slack)
            || load + self.suffix_load[depth] < inst.demand() - self.slack
        {
            return;
        }
        let n = inst.n();
        if depth == n {
            if is_feasible(inst, &self.selection) {
                let value = self.eval.value(&objective_values(inst, &self.selection));
                if better(value, &self.selection, &self.incumbent) {
                    self.incumbent = Some((value, self.selection.clone()));
                }
            }
            return;
        }
        if self.pruning {
            let bound = self.bound(depth, load);
            match &self.incumbent {
                _ if bound.is_infinite() => return,
                Some((best, _)) if bound > best + Self::tolerance(*best) => return,
                _ => {}
            }
        }
        let item = self.order[depth];
        let b = inst.item_weights()[item];

        self.selection[item] = true;
        let (head, tail) = self.fixed.split_at_mut(depth + 1);
        for (next, (cur, c)) in tail[0].iter_mut().zip(head[depth].iter().zip(inst.costs().row(item))) {
            *next = cur + c;
        }
        self.visit(depth + 1, load + b);

        self.selection[item] = false;
        let (head, tail) = self.fixed.split_at_mut(depth + 1);
        tail[0].copy_from_slice(&head[depth]);
        self.visit(depth + 1, load);
    }
}

/// How the objectives are reduced before the exact solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    Exact,
    Blocks { l: usize, order: BlockOrder },
    KMeans { kbar: usize, seed: u64, restarts: usize },
    /// Single objective `ĉ_i = OWA_w(c_i·)`.
    Baseline,
}

impl Method {
    pub fn blocks(l: usize) -> Self {
        Method::Blocks {
            l,
            order: BlockOrder::Given,
        }
    }

    pub fn kmeans(kbar: usize, seed: u64) -> Self {
        Method::KMeans {
            kbar,
            seed,
            restarts: 10,
        }
    }
}

fn integer_certificate(v: i64) -> Certificate {
    Certificate {
        value: v as f64,
        exact: Some(num_rational::BigRational::from_integer(v.into())),
    }
}

/// Reduces the objectives, solves the reduced OWA problem exactly, and
/// re-evaluates the returned selection under the original costs and weights.
pub fn solve_aggregated(inst: &KnapsackInstance, method: Method, time_limit: Duration) -> Result<SolveReport> {
    let start = Instant::now();
    let (reduced, certificate) = match method {
        Method::Exact => (inst.clone(), Some(integer_certificate(1))),
        Method::Blocks { l, order } => {
            let agg = aggregate_instance_blocks(inst, l, order)?;
            (inst.with_costs(agg.reduced_costs, agg.reduced_weights)?, agg.certificate)
        }
        Method::KMeans { kbar, seed, restarts } => {
            let agg = kmeans_aggregate(inst.costs(), inst.weights(), kbar, seed, restarts)?;
            (inst.with_costs(agg.reduced_costs, agg.reduced_weights)?, None)
        }
        Method::Baseline => {
            let c_hat = mean_cost_baseline(inst.costs(), inst.weights())?;
            let costs = CostMatrix::new(inst.n(), 1, c_hat)?;
            let w = inst.weights();
            let certificate = w.is_nonincreasing().then(|| {
                let value = w.first() * inst.k() as f64;
                let exact = exact::recover(w.first())
                    .map(|w1| w1 * num_rational::BigRational::from_integer((inst.k() as i64).into()));
                Certificate { value, exact }
            });
            (inst.with_costs(costs, WeightVector::max(1))?, certificate)
        }
    };
    let inner = solve_bnb(&reduced, Criterion::Owa, time_limit)?;
    let mut eval = Criterion::Owa.evaluator(inst)?;
    let solution = inner
        .solution
        .as_ref()
        .map(|s| Solution::new(inst, s.selection.clone()));
    Ok(SolveReport {
        value: solution
            .as_ref()
            .map_or(f64::INFINITY, |s| eval.value(&s.objective_values)),
        solution,
        status: inner.status,
        bound_certificate: certificate,
        reduced_value: inner.solution.is_some().then_some(inner.value),
        reduced_objectives: reduced.k(),
        nodes_explored: inner.nodes_explored,
        elapsed: start.elapsed(),
    })
}

/// Scenario matrix `{λ c_k + (1 − λ) c_i : k ∈ [K]}` of the `i`-th min-max subproblem.
pub fn hurwicz_subproblem(inst: &KnapsackInstance, lambda: f64, i: usize) -> Result<KnapsackInstance> {
    let c = inst.costs();
    let mut entries = Vec::with_capacity(c.n() * c.k());
    for item in 0..c.n() {
        let row = c.row(item);
        entries.extend(row.iter().map(|ck| lambda * ck + (1.0 - lambda) * row[i]));
    }
    inst.with_costs(CostMatrix::new(c.n(), c.k(), entries)?, WeightVector::max(c.k()))
}

/// Minimises the Hurwicz criterion by solving the `K` min-max subproblems
/// (concurrently, each with the full time limit) and keeping the best winner.
pub fn solve_hurwicz(inst: &KnapsackInstance, lambda: f64, time_limit: Duration) -> Result<SolveReport> {
    let start = Instant::now();
    hurwicz_value(&[0.0], lambda)?;
    let subreports: Vec<SolveReport> = (0..inst.k())
        .into_par_iter()
        .map(|i| solve_bnb(&hurwicz_subproblem(inst, lambda, i)?, Criterion::MinMax, time_limit))
        .collect::<Result<_>>()?;
    let mut best: Option<(f64, Vec<bool>)> = None;
    for sub in &subreports {
        if let Some(sol) = &sub.solution {
            let value = hurwicz_value(&objective_values(inst, &sol.selection), lambda)?;
            if better(value, &sol.selection, &best) {
                best = Some((value, sol.selection.clone()));
            }
        }
    }
    let timed_out = subreports.iter().any(|r| r.status == Status::TimeLimit);
    let mut report = match best {
        Some((value, sel)) => SolveReport {
            solution: Some(Solution::new(inst, sel)),
            value,
            ..SolveReport::empty(
                if timed_out { Status::TimeLimit } else { Status::Optimal },
                inst.k(),
            )
        },
        None if timed_out => SolveReport::empty(Status::TimeLimit, inst.k()),
        None => SolveReport::empty(Status::Infeasible, inst.k()),
    };
    report.nodes_explored = subreports.iter().map(|r| r.nodes_explored).sum();
    report.elapsed = start.elapsed();
    Ok(report)
}

/// Quality of a reported solution relative to the enumerated optimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioOutcome {
    /// `value / optimum`; `+∞` when the optimum is zero and the value is not.
    pub ratio: f64,
    pub value: f64,
    pub optimum: f64,
    /// Zero optimum with a nonzero value.
    pub degenerate: bool,
}

/// Ratio of the report's solution under `criterion` to the brute-force optimum.
pub fn evaluate_ratio(report: &SolveReport, inst: &KnapsackInstance, criterion: Criterion) -> Result<RatioOutcome> {
    let solution = report
        .solution
        .as_ref()
        .ok_or_else(|| Error::Precondition("report carries no solution".into()))?;
    let mut eval = criterion.evaluator(inst)?;
    let value = eval.value(&objective_values(inst, &solution.selection));
    let optimum = solve_brute_force(inst, criterion)?.value;
    let (ratio, degenerate) = if optimum > 0.0 {
        (value / optimum, false)
    } else if value == 0.0 {
        (1.0, false)
    } else {
        (f64::INFINITY, true)
    };
    Ok(RatioOutcome {
        ratio,
        value,
        optimum,
        degenerate,
    })
}
