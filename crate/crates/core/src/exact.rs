//! Exact rational arithmetic for certificates and small worked examples.
//!
//! Floats such as `0.2` are recovered as the small-denominator rational they
//! were written as, when one exists; everything downstream is then exact.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Largest denominator tried when recovering a rational from a float.
pub const MAX_DENOMINATOR: i64 = 1_000_000;

/// The rational `p/q` with `q ≤ MAX_DENOMINATOR` whose nearest float is `x`,
/// if there is one.
pub fn recover(x: f64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    let negative = x < 0.0;
    let target = x.abs();
    // continued-fraction convergents h/k
    let (mut h_prev, mut h) = (0i64, 1i64);
    let (mut k_prev, mut k) = (1i64, 0i64);
    let mut rest = target;
    for _ in 0..64 {
        let a = rest.floor();
        if a > i64::MAX as f64 / 2.0 {
            return None;
        }
        let a = a as i64;
        let h_next = a.checked_mul(h)?.checked_add(h_prev)?;
        let k_next = a.checked_mul(k)?.checked_add(k_prev)?;
        if k_next > MAX_DENOMINATOR {
            return None;
        }
        (h_prev, h) = (h, h_next);
        (k_prev, k) = (k, k_next);
        if h as f64 / k as f64 == target {
            let r = BigRational::new(BigInt::from(h), BigInt::from(k));
            return Some(if negative { -r } else { r });
        }
        let frac = rest - a as f64;
        if frac == 0.0 {
            return None;
        }
        rest = 1.0 / frac;
    }
    None
}

/// Recovers every entry, or `None` if any entry has no small rational form.
pub fn recover_all(xs: &[f64]) -> Option<Vec<BigRational>> {
    xs.iter().map(|&x| recover(x)).collect()
}

/// Exact `OWA_w(values)`.
pub fn owa(values: &[BigRational], weights: &[BigRational]) -> BigRational {
    assert_eq!(values.len(), weights.len(), "OWA dimension mismatch");
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.cmp(a));
    sorted
        .iter()
        .zip(weights)
        .fold(BigRational::zero(), |acc, (v, w)| acc + v * w)
}

/// Exact `ρ = max_k (Σ_{i≤k} w_i) / (Σ_{i≤k} w̄_i)` for blocks of size `block`.
pub fn rho(weights: &[BigRational], block: usize) -> BigRational {
    assert!(block > 0 && weights.len().is_multiple_of(block));
    let groups = weights.len() / block;
    let mut best: Option<BigRational> = None;
    let mut top = BigRational::zero();
    let mut agg = BigRational::zero();
    for k in 0..groups {
        top += &weights[k];
        agg += weights[k * block..(k + 1) * block]
            .iter()
            .fold(BigRational::zero(), |a, w| a + w);
        if agg.is_zero() {
            continue;
        }
        let ratio = &top / &agg;
        if best.as_ref().is_none_or(|b| ratio > *b) {
            best = Some(ratio);
        }
    }
    best.unwrap_or_else(BigRational::one)
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// `"p/q"`, or `"p"` for integers.
pub fn format(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else if r.is_negative() {
        format!("-{}/{}", r.numer().abs(), r.denom())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}
