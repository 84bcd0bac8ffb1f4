#![allow(dead_code)]

use num_rational::BigRational;
use owa_core::exact;
use owa_core::generators::{instance_uniform, weights_alpha, weights_pcentra};
use owa_core::{is_feasible, objective_values, CostMatrix, KnapsackInstance, WeightVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Alternates the two generators: even `i` → α-weights, odd `i` → p-centra.
pub fn suite_weights(rng: &mut ChaCha8Rng, k: usize, i: usize) -> WeightVector {
    if i.is_multiple_of(2) {
        let alpha = [1e-1, 1e-2, 1e-3, 0.5, 0.9][rng.gen_range(0..5)];
        weights_alpha(k, alpha).unwrap()
    } else {
        weights_pcentra(k, rng.gen_range(1..=k)).unwrap()
    }
}

pub fn suite_instance(rng: &mut ChaCha8Rng, i: usize, n_max: usize, k_max: usize) -> KnapsackInstance {
    let n = rng.gen_range(3..=n_max);
    let k = rng.gen_range(1..=k_max);
    let w = suite_weights(rng, k, i);
    instance_uniform(n, k, rng.gen())
        .unwrap()
        .into_instance(format!("suite{i}"), w)
        .unwrap()
}

/// Sample instance with `x1 + x2 + x3 + x4 = 2`, `K = 8`.
pub fn bad_instance_one() -> KnapsackInstance {
    let rows = vec![
        vec![1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        vec![0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0],
        vec![1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        vec![0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0],
    ];
    let w = WeightVector::new(vec![0.2, 0.2, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1]).unwrap();
    KnapsackInstance::new(vec![1.0; 4], 2.0, Some(2.0), CostMatrix::from_rows(&rows).unwrap(), w).unwrap()
}

/// Sample instance with `x1 + x2 = 1` and uniform weights.
pub fn bad_instance_two(k: usize) -> KnapsackInstance {
    let mut cols = vec![vec![1.0, 0.0]];
    cols.extend((1..k).map(|_| vec![0.0, 1.0]));
    KnapsackInstance::new(
        vec![1.0, 1.0],
        1.0,
        Some(1.0),
        CostMatrix::from_columns(&cols).unwrap(),
        WeightVector::uniform(k),
    )
    .unwrap()
}

pub fn feasible_selections(inst: &KnapsackInstance) -> Vec<Vec<bool>> {
    let n = inst.n();
    (0..1u32 << n)
        .map(|m| (0..n).map(|i| m >> i & 1 == 1).collect::<Vec<bool>>())
        .filter(|x| is_feasible(inst, x))
        .collect()
}

/// OWA value in exact rational arithmetic (inputs must be small-denominator rationals).
pub fn exact_owa(inst: &KnapsackInstance, x: &[bool]) -> BigRational {
    let values = exact::recover_all(&objective_values(inst, x)).expect("rational objective values");
    let weights = exact::recover_all(inst.weights().as_slice()).expect("rational weights");
    exact::owa(&values, &weights)
}

pub fn rational(p: i64, q: i64) -> BigRational {
    BigRational::new(p.into(), q.into())
}
