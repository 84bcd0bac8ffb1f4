//! Seeded weight vectors and random Min-Knapsack instances.
//!
//! Draw order (all uniform reals come from [`crate::rng`]):
//!
//! - stream 1: item weights `b_1 … b_n ~ U[0.1, 10]`;
//! - stream 2: cost multipliers. Uniform costs draw `u_ik ~ U[0.5, 1.5]`
//!   row by row (`i` outer, `k` inner). Nominal costs draw the `K'` nominal
//!   columns first (nominal outer, item inner), then for every final scenario
//!   `k` the `n` perturbation factors `U[0.8, 1.2]`;
//! - stream 3: the nominal scenario picked by each final scenario (uniform,
//!   with replacement).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CostMatrix, KnapsackInstance, WeightVector};
use crate::rng;

const ITEM_WEIGHT_STREAM: u64 = 1;
const COST_STREAM: u64 = 2;
const NOMINAL_CHOICE_STREAM: u64 = 3;

/// Weights from the generating function `g_α(z) = (1 − α^z) / (1 − α)`:
/// `w_k = g_α(k/K) − g_α((k−1)/K)`.
///
/// Evaluated as `w_k = α^{(k−1)/K} (1 − α^{1/K}) / (1 − α)`, which is the same
/// quantity but monotone under rounding.
pub fn weights_alpha(k: usize, alpha: f64) -> Result<WeightVector> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("α = {alpha} must lie in (0, 1)")));
    }
    if k == 0 {
        return Err(Error::InvalidParameter("K must be positive".into()));
    }
    let ln_alpha = alpha.ln();
    let kf = k as f64;
    let scale = -(ln_alpha / kf).exp_m1() / (1.0 - alpha);
    let weights = (0..k)
        .map(|j| scale * (ln_alpha * j as f64 / kf).exp())
        .collect();
    WeightVector::new(weights)
}

/// p-centra weights: `1/p` on the `p` largest values.
pub fn weights_pcentra(k: usize, p: usize) -> Result<WeightVector> {
    if p == 0 || p > k {
        return Err(Error::InvalidParameter(format!("p = {p} must lie in 1..={k}")));
    }
    let mut w = vec![0.0; k];
    w[..p].fill(1.0 / p as f64);
    WeightVector::new(w)
}

/// `p = fraction · K` rounded to the nearest integer, at least 1.
pub fn pcentra_count(k: usize, fraction: f64) -> usize {
    ((fraction * k as f64).round() as usize).clamp(1, k.max(1))
}

/// Item weights, demand and costs before OWA weights are attached.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedCosts {
    pub item_weights: Vec<f64>,
    pub demand: f64,
    pub costs: CostMatrix,
    /// For nominal instances: the nominal scenario behind each final scenario.
    pub nominal_of: Option<Vec<usize>>,
}

impl GeneratedCosts {
    pub fn into_instance(self, name: impl Into<String>, weights: WeightVector) -> Result<KnapsackInstance> {
        Ok(KnapsackInstance::new(self.item_weights, self.demand, None, self.costs, weights)?.with_name(name))
    }
}

fn item_weights(n: usize, seed: u64) -> (Vec<f64>, f64) {
    let mut rng = rng::stream(seed, ITEM_WEIGHT_STREAM);
    let b: Vec<f64> = (0..n).map(|_| rng::uniform(&mut rng, 0.1, 10.0)).collect();
    let demand = b.iter().sum::<f64>() / 3.0;
    (b, demand)
}

/// Costs `c_ik = u_ik · b_i` with `u_ik ~ U[0.5, 1.5]`; demand `Σb / 3`.
pub fn instance_uniform(n: usize, k: usize, seed: u64) -> Result<GeneratedCosts> {
    if n == 0 || k == 0 {
        return Err(Error::InvalidParameter("n and K must be positive".into()));
    }
    let (b, demand) = item_weights(n, seed);
    let mut rng = rng::stream(seed, COST_STREAM);
    let mut entries = Vec::with_capacity(n * k);
    for bi in &b {
        for _ in 0..k {
            entries.push(rng::uniform(&mut rng, 0.5, 1.5) * bi);
        }
    }
    Ok(GeneratedCosts {
        item_weights: b,
        demand,
        costs: CostMatrix::new(n, k, entries)?,
        nominal_of: None,
    })
}

/// `K'` nominal scenarios generated like [`instance_uniform`]; each of the
/// `K` scenarios perturbs a random nominal entrywise by `U[0.8, 1.2]`.
pub fn instance_nominal(n: usize, k: usize, kprime: usize, seed: u64) -> Result<GeneratedCosts> {
    if n == 0 || k == 0 {
        return Err(Error::InvalidParameter("n and K must be positive".into()));
    }
    if kprime == 0 || kprime >= k {
        return Err(Error::InvalidParameter(format!(
            "nominal count K' = {kprime} must lie in 1..K (K = {k})"
        )));
    }
    let (b, demand) = item_weights(n, seed);
    let mut cost_rng = rng::stream(seed, COST_STREAM);
    let nominals: Vec<Vec<f64>> = (0..kprime)
        .map(|_| {
            b.iter()
                .map(|bi| rng::uniform(&mut cost_rng, 0.5, 1.5) * bi)
                .collect()
        })
        .collect();
    let mut choice_rng = rng::stream(seed, NOMINAL_CHOICE_STREAM);
    let mut nominal_of = Vec::with_capacity(k);
    let mut columns = Vec::with_capacity(k);
    for _ in 0..k {
        let j = rng::index(&mut choice_rng, kprime);
        nominal_of.push(j);
        columns.push(
            nominals[j]
                .iter()
                .map(|c| c * rng::uniform(&mut cost_rng, 0.8, 1.2))
                .collect::<Vec<f64>>(),
        );
    }
    Ok(GeneratedCosts {
        item_weights: b,
        demand,
        costs: CostMatrix::from_columns(&columns)?,
        nominal_of: Some(nominal_of),
    })
}

/// How scenario costs are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum CostMethod {
    Uniform,
    /// Perturbations of `K'` nominal scenarios.
    Nominal(usize),
}

/// How OWA weights are built.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum WeightMethod {
    Alpha(f64),
    PCentra(usize),
    /// `p = fraction · K`, rounded.
    PCentraFraction(f64),
    Uniform,
}

impl WeightMethod {
    pub fn build(&self, k: usize) -> Result<WeightVector> {
        match *self {
            WeightMethod::Alpha(a) => weights_alpha(k, a),
            WeightMethod::PCentra(p) => weights_pcentra(k, p),
            WeightMethod::PCentraFraction(f) => weights_pcentra(k, pcentra_count(k, f)),
            WeightMethod::Uniform => Ok(WeightVector::uniform(k)),
        }
    }
}

impl fmt::Display for CostMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CostMethod::Uniform => write!(f, "uniform"),
            CostMethod::Nominal(kp) => write!(f, "nominal:{kp}"),
        }
    }
}

impl FromStr for CostMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("unknown cost method `{s}` (uniform | nominal:K')"));
        match s.split_once(':') {
            None if s == "uniform" => Ok(CostMethod::Uniform),
            Some(("nominal", kp)) => kp.parse().map(CostMethod::Nominal).map_err(|_| bad()),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for WeightMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightMethod::Alpha(a) => write!(f, "alpha:{a:e}"),
            WeightMethod::PCentra(p) => write!(f, "pcentra:{p}"),
            WeightMethod::PCentraFraction(x) => write!(f, "pcentra:{x}K"),
            WeightMethod::Uniform => write!(f, "uniform"),
        }
    }
}

impl FromStr for WeightMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            Error::InvalidParameter(format!(
                "unknown weight method `{s}` (alpha:A | pcentra:P | pcentra:FK | uniform)"
            ))
        };
        match s.split_once(':') {
            None if s == "uniform" => Ok(WeightMethod::Uniform),
            Some(("alpha", a)) => a.parse().map(WeightMethod::Alpha).map_err(|_| bad()),
            Some(("pcentra", p)) => match p.strip_suffix('K') {
                Some(frac) => frac.parse().map(WeightMethod::PCentraFraction).map_err(|_| bad()),
                None => p.parse().map(WeightMethod::PCentra).map_err(|_| bad()),
            },
            _ => Err(bad()),
        }
    }
}

macro_rules! string_conversions {
    ($t:ty) => {
        impl TryFrom<String> for $t {
            type Error = Error;
            fn try_from(s: String) -> Result<Self> {
                s.parse()
            }
        }
        impl From<$t> for String {
            fn from(m: $t) -> String {
                m.to_string()
            }
        }
    };
}
string_conversions!(CostMethod);
string_conversions!(WeightMethod);

/// One instance family, e.g. a row of the experiment table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceConfig {
    pub name: String,
    pub n: usize,
    pub k: usize,
    pub costs: CostMethod,
    pub weights: WeightMethod,
    #[serde(default)]
    pub seed: u64,
}

impl InstanceConfig {
    pub fn weight_vector(&self) -> Result<WeightVector> {
        self.weights.build(self.k)
    }

    pub fn generate_costs(&self, seed: u64) -> Result<GeneratedCosts> {
        match self.costs {
            CostMethod::Uniform => instance_uniform(self.n, self.k, seed),
            CostMethod::Nominal(kp) => instance_nominal(self.n, self.k, kp, seed),
        }
    }

    /// The instance for `self.seed`.
    pub fn generate(&self) -> Result<KnapsackInstance> {
        self.generate_with_seed(self.seed)
    }

    pub fn generate_with_seed(&self, seed: u64) -> Result<KnapsackInstance> {
        self.generate_costs(seed)?
            .into_instance(self.name.clone(), self.weight_vector()?)
    }
}

/// The sixteen instance families `I¹₁ … J²₄` (n = 40, K ∈ {50, 200}).
pub fn experiment_configs(seed: u64) -> Vec<InstanceConfig> {
    let weights = [
        WeightMethod::Alpha(1e-1),
        WeightMethod::Alpha(1e-3),
        WeightMethod::PCentraFraction(0.1),
        WeightMethod::PCentraFraction(0.3),
    ];
    let mut out = Vec::new();
    for (family, k) in [("I", 50), ("J", 200)] {
        for (group, costs) in [(1, CostMethod::Uniform), (2, CostMethod::Nominal(10))] {
            for (idx, w) in weights.iter().enumerate() {
                out.push(InstanceConfig {
                    name: format!("{family}{group}_{}", idx + 1),
                    n: 40,
                    k,
                    costs,
                    weights: *w,
                    seed,
                });
            }
        }
    }
    out
}
