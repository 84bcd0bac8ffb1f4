//! Aggregation sweep: every instance family × repetition × target objective
//! count, solved by block aggregation, K̄-means, the exact solver and the
//! mean-cost baseline.
//!
//! Cells run in parallel; records are sorted before output so the CSV does
//! not depend on scheduling. Wall-clock times are only written when
//! `record_timings` is set, which keeps repeated runs byte-identical.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aggregation::BlockOrder;
use crate::error::{Error, Result};
use crate::generators::InstanceConfig;
use crate::solvers::{solve_aggregated, Method, SolveReport, Status};

/// Version of the CSV column layout.
pub const CSV_VERSION: u32 = 1;

fn default_repetitions() -> usize {
    1
}

fn default_time_limit() -> f64 {
    60.0
}

fn default_restarts() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub seed: u64,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    pub kbar_grid: Vec<usize>,
    #[serde(default = "default_time_limit")]
    pub time_limit_secs: f64,
    #[serde(default = "default_restarts")]
    pub kmeans_restarts: usize,
    #[serde(default)]
    pub record_timings: bool,
    pub instances: Vec<InstanceConfig>,
}

impl SweepConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("sweep config serialises")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.instances.is_empty() {
            return bad("sweep needs at least one instance family".into());
        }
        if !(self.time_limit_secs >= 0.0 && self.time_limit_secs.is_finite()) {
            return bad(format!("time limit {} must be a finite nonnegative number", self.time_limit_secs));
        }
        let mut names: Vec<&str> = self.instances.iter().map(|c| c.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|p| p[0] == p[1]) {
            return bad("instance family names must be unique".into());
        }
        for c in &self.instances {
            c.weight_vector()?;
            if c.n == 0 || c.k == 0 {
                return bad(format!("{}: n and K must be positive", c.name));
            }
            for &kbar in &self.kbar_grid {
                if kbar == 0 || kbar > c.k {
                    return bad(format!("{}: K̄ = {kbar} must lie in 1..={}", c.name, c.k));
                }
            }
        }
        Ok(())
    }

    pub fn time_limit(&self) -> Duration {
        Duration::from_secs_f64(self.time_limit_secs)
    }

    /// Seed of repetition `rep` of the `index`-th family.
    pub fn instance_seed(&self, index: usize, rep: usize) -> u64 {
        self.seed
            .wrapping_add((index as u64) << 32)
            .wrapping_add(rep as u64)
    }
}

/// The eight `K = 50` families at `n = 20`.
pub fn desk_scale_config(seed: u64) -> SweepConfig {
    let instances = crate::generators::experiment_configs(seed)
        .into_iter()
        .filter(|c| c.k == 50)
        .map(|c| InstanceConfig { n: 20, ..c })
        .collect();
    SweepConfig {
        seed,
        repetitions: 20,
        kbar_grid: vec![1, 2, 5, 10, 25, 50],
        time_limit_secs: 60.0,
        kmeans_restarts: 10,
        record_timings: false,
        instances,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepMethod {
    Baseline,
    Blocks,
    Exact,
    Kmeans,
}

impl fmt::Display for SweepMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepMethod::Baseline => "baseline",
            SweepMethod::Blocks => "blocks",
            SweepMethod::Exact => "exact",
            SweepMethod::Kmeans => "kmeans",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub instance: String,
    pub method: SweepMethod,
    /// Grid value; `K` for exact rows and 1 for the baseline.
    pub target_kbar: usize,
    pub repetition: usize,
    pub seed: u64,
    /// Objectives actually solved (block rows may differ from the target).
    pub reduced_k: usize,
    /// Block size ℓ for block rows.
    pub block_size: Option<usize>,
    /// Original criterion value of the returned solution.
    pub value: Option<f64>,
    pub reduced_value: Option<f64>,
    /// `value / exact value` when both runs are optimal.
    pub ratio: Option<f64>,
    pub certificate: Option<f64>,
    pub certificate_exact: Option<String>,
    pub status: Status,
    pub nodes: u64,
    pub elapsed_s: Option<f64>,
}

impl SweepRecord {
    fn sort_key(&self) -> (&str, SweepMethod, usize, usize) {
        (&self.instance, self.method, self.target_kbar, self.repetition)
    }

    /// Whether `ratio ≤ certificate` holds (up to 1e-9 relative) where both exist.
    pub fn respects_certificate(&self) -> bool {
        match (self.ratio, self.certificate) {
            (Some(r), Some(c)) => r <= c * (1.0 + 1e-9),
            _ => true,
        }
    }
}

struct Cell<'a> {
    family: &'a InstanceConfig,
    index: usize,
    rep: usize,
}

fn record(
    cell: &Cell<'_>,
    seed: u64,
    method: SweepMethod,
    target_kbar: usize,
    block_size: Option<usize>,
    report: &SolveReport,
    timings: bool,
) -> SweepRecord {
    SweepRecord {
        instance: cell.family.name.clone(),
        method,
        target_kbar,
        repetition: cell.rep,
        seed,
        reduced_k: report.reduced_objectives,
        block_size,
        value: report.solution.as_ref().map(|_| report.value),
        reduced_value: report.reduced_value,
        ratio: None,
        certificate: report.bound_certificate.as_ref().map(|c| c.value),
        certificate_exact: report.bound_certificate.as_ref().and_then(|c| c.exact_string()),
        status: report.status,
        nodes: report.nodes_explored,
        elapsed_s: timings.then_some(report.elapsed.as_secs_f64()),
    }
}

fn run_cell(cfg: &SweepConfig, cell: &Cell<'_>) -> Result<Vec<SweepRecord>> {
    let seed = cfg.instance_seed(cell.index, cell.rep);
    let inst = cell.family.generate_with_seed(seed)?;
    let limit = cfg.time_limit();
    let timings = cfg.record_timings;
    let k = inst.k();
    let mut out = Vec::new();

    let exact = solve_aggregated(&inst, Method::Exact, limit)?;
    out.push(record(cell, seed, SweepMethod::Exact, k, None, &exact, timings));
    let baseline = solve_aggregated(&inst, Method::Baseline, limit)?;
    out.push(record(cell, seed, SweepMethod::Baseline, 1, None, &baseline, timings));
    for &kbar in &cfg.kbar_grid {
        let l = k.div_ceil(kbar);
        let blocks = solve_aggregated(&inst, Method::Blocks { l, order: BlockOrder::Given }, limit)?;
        out.push(record(cell, seed, SweepMethod::Blocks, kbar, Some(l), &blocks, timings));
        let km = solve_aggregated(
            &inst,
            Method::KMeans {
                kbar,
                seed,
                restarts: cfg.kmeans_restarts,
            },
            limit,
        )?;
        out.push(record(cell, seed, SweepMethod::Kmeans, kbar, None, &km, timings));
    }

    if exact.status == Status::Optimal {
        for r in out.iter_mut().filter(|r| r.status == Status::Optimal) {
            if let Some(v) = r.value {
                r.ratio = Some(if exact.value > 0.0 {
                    v / exact.value
                } else if v == 0.0 {
                    1.0
                } else {
                    f64::INFINITY
                });
            }
        }
    }
    Ok(out)
}

/// Runs every cell and returns the records sorted by
/// `(instance, method, target K̄, repetition)`.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRecord>> {
    cfg.validate()?;
    let cells: Vec<Cell<'_>> = cfg
        .instances
        .iter()
        .enumerate()
        .flat_map(|(index, family)| (0..cfg.repetitions).map(move |rep| Cell { family, index, rep }))
        .collect();
    let nested: Vec<Vec<SweepRecord>> = cells
        .par_iter()
        .map(|cell| run_cell(cfg, cell))
        .collect::<Result<_>>()?;
    let mut records: Vec<SweepRecord> = nested.into_iter().flatten().collect();
    records.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    Ok(records)
}

/// Means over repetitions for one `(instance, method, target K̄)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanRecord {
    pub instance: String,
    pub method: SweepMethod,
    pub target_kbar: usize,
    pub runs: usize,
    pub optimal_runs: usize,
    /// Mean value over runs that returned a solution.
    pub mean_value: Option<f64>,
    /// Mean value over runs solved to optimality.
    pub mean_value_optimal: Option<f64>,
    pub mean_ratio: Option<f64>,
    pub max_ratio: Option<f64>,
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

pub fn summarize(records: &[SweepRecord]) -> Vec<MeanRecord> {
    let mut groups: BTreeMap<(&str, SweepMethod, usize), Vec<&SweepRecord>> = BTreeMap::new();
    for r in records {
        groups
            .entry((&r.instance, r.method, r.target_kbar))
            .or_default()
            .push(r);
    }
    groups
        .into_iter()
        .map(|((instance, method, target_kbar), rs)| {
            let values: Vec<f64> = rs.iter().filter_map(|r| r.value).collect();
            let optimal: Vec<f64> = rs
                .iter()
                .filter(|r| r.status == Status::Optimal)
                .filter_map(|r| r.value)
                .collect();
            let ratios: Vec<f64> = rs.iter().filter_map(|r| r.ratio).collect();
            MeanRecord {
                instance: instance.to_string(),
                method,
                target_kbar,
                runs: rs.len(),
                optimal_runs: optimal.len(),
                mean_value: mean(&values),
                mean_value_optimal: mean(&optimal),
                mean_ratio: mean(&ratios),
                max_ratio: ratios.iter().copied().reduce(f64::max),
            }
        })
        .collect()
}

fn header_comment(mut out: impl Write, kind: &str, seed: u64) -> Result<()> {
    writeln!(
        out,
        "# owa-knapsack {kind} v{CSV_VERSION} toolkit={} seed={seed}",
        env!("CARGO_PKG_VERSION")
    )?;
    Ok(())
}

/// Per-run CSV preceded by a `#` comment line with layout version and seed.
pub fn write_records_csv(records: &[SweepRecord], seed: u64, mut out: impl Write) -> Result<()> {
    header_comment(&mut out, "sweep", seed)?;
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_means_csv(means: &[MeanRecord], seed: u64, mut out: impl Write) -> Result<()> {
    header_comment(&mut out, "sweep-means", seed)?;
    let mut w = csv::Writer::from_writer(out);
    for m in means {
        w.serialize(m)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{CostMethod, WeightMethod};

    fn small_config() -> SweepConfig {
        SweepConfig {
            seed: 3,
            repetitions: 2,
            kbar_grid: vec![1, 2, 6],
            time_limit_secs: 10.0,
            kmeans_restarts: 3,
            record_timings: false,
            instances: vec![
                InstanceConfig {
                    name: "u".into(),
                    n: 8,
                    k: 6,
                    costs: CostMethod::Uniform,
                    weights: WeightMethod::Alpha(0.1),
                    seed: 0,
                },
                InstanceConfig {
                    name: "p".into(),
                    n: 7,
                    k: 6,
                    costs: CostMethod::Nominal(2),
                    weights: WeightMethod::PCentra(2),
                    seed: 0,
                },
            ],
        }
    }

    #[test]
    fn records_are_sorted_and_complete() {
        let cfg = small_config();
        let records = run_sweep(&cfg).unwrap();
        // per cell: exact + baseline + 2 per grid value
        assert_eq!(records.len(), 2 * 2 * (2 + 2 * 3));
        assert!(records.windows(2).all(|p| p[0].sort_key() <= p[1].sort_key()));
        assert!(records.iter().all(|r| r.respects_certificate()));
        for r in records.iter().filter(|r| r.method == SweepMethod::Exact) {
            assert_eq!(r.reduced_k, 6);
            assert_eq!(r.certificate, Some(1.0));
            assert_eq!(r.ratio, Some(1.0));
        }
        let blocks_full: Vec<_> = records
            .iter()
            .filter(|r| r.method == SweepMethod::Blocks && r.target_kbar == 6)
            .collect();
        assert!(blocks_full.iter().all(|r| r.block_size == Some(1) && r.ratio == Some(1.0)));
    }

    #[test]
    fn csv_is_reproducible() {
        let cfg = small_config();
        let render = || {
            let mut buf = Vec::new();
            write_records_csv(&run_sweep(&cfg).unwrap(), cfg.seed, &mut buf).unwrap();
            String::from_utf8(buf).unwrap()
        };
        let a = render();
        assert_eq!(a, render());
        assert!(a.starts_with("# owa-knapsack sweep v1 "));
        assert!(a.lines().nth(1).unwrap().starts_with("instance,method,target_kbar,repetition,seed,"));
    }

    #[test]
    fn toml_round_trip_and_validation() {
        let cfg = small_config();
        let text = cfg.to_toml();
        assert_eq!(SweepConfig::from_toml(&text).unwrap(), cfg);
        let mut bad = cfg.clone();
        bad.kbar_grid.push(7);
        assert!(bad.validate().is_err());
        assert!(SweepConfig::from_toml("seed = 1\nkbar_grid = [1]\ninstances = []\n").is_err());
        assert!(matches!(SweepConfig::from_toml("seed = ["), Err(Error::Config(_))));
    }

    #[test]
    fn desk_scale_shape() {
        let cfg = desk_scale_config(7);
        assert_eq!(cfg.instances.len(), 8);
        assert!(cfg.instances.iter().all(|c| c.n == 20 && c.k == 50));
        cfg.validate().unwrap();
    }

    #[test]
    fn means_group_by_cell() {
        let records = run_sweep(&small_config()).unwrap();
        let means = summarize(&records);
        assert_eq!(means.len(), 2 * (2 + 2 * 3));
        assert!(means.iter().all(|m| m.runs == 2));
    }
}
