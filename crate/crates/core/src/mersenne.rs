//! Weight-floor witnesses among the factors of 2^n - 1.
//!
//! Whenever 2^n - 1 has few prime factors (k^omega < n), at least one
//! factor q must have every multiple at Hamming weight k + 1 or more:
//! otherwise the product of the light multiples, expanded, would be a
//! multiple of 2^n - 1 written with fewer than n powers of two. The search
//! here does not rely on that argument: each factor is tested directly by
//! exhausting the sums of up to k - 1 powers of two mod q, which is cheap
//! because ord_q(2) divides n.

use crate::error::{Error, Result};
use crate::modarith::{factorize, pow_mod_u128, FactorMultiset};
use crate::weight::{self, min_weight_multiple};

pub const MAX_N: u32 = 90;
pub const MAX_K: u32 = 6;

const ENUM_BUDGET: u64 = 200_000_000;

#[derive(Debug, Clone)]
pub struct MersenneWitness {
    pub n: u32,
    pub k: u32,
    pub factors: FactorMultiset,
    pub omega: u32,
    /// k^omega < n, compared exactly in integers.
    pub condition_holds: bool,
    /// Smallest prime factor with no multiple of weight <= k, if any.
    pub witness_q: Option<u128>,
    /// k + 1 when a witness verified.
    pub verified_weight_floor: Option<u32>,
}

fn divisors_ascending(n: u32) -> Vec<u32> {
    let mut divs = Vec::new();
    for d in 1..=n {
        if n % d == 0 {
            divs.push(d);
        }
    }
    divs
}

/// ord_q(2) for q | 2^n - 1: the smallest divisor d of n with 2^d = 1.
fn order_of_two(q: u128, n: u32) -> u64 {
    for d in divisors_ascending(n) {
        if pow_mod_u128(2, d as u128, q) == 1 {
            return d as u64;
        }
    }
    unreachable!("q divides 2^n - 1, so the order divides n");
}

/// Exhaustive check that -1 mod q is not a sum of j powers of two for any
/// j <= k - 1, i.e. no multiple of q has weight <= k.
fn is_witness(q: u128, n: u32, k: u32) -> Result<bool> {
    let ord = order_of_two(q, n);
    let mut cost = 0u64;
    for j in 1..k {
        cost = cost.saturating_add(weight::multiset_count(ord, j).unwrap_or(u64::MAX));
    }
    if cost > ENUM_BUDGET {
        return Err(Error::Unsupported(format!(
            "witness check for q={q} would enumerate {cost} multisets"
        )));
    }
    let mut powers = Vec::with_capacity(ord as usize);
    let mut x: u128 = 1;
    for _ in 0..ord {
        powers.push(x);
        x <<= 1;
        if x >= q {
            x -= q;
        }
    }
    for j in 1..k {
        if weight::multiset_sum_hits(&powers, q, q - 1, j) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Factor 2^n - 1, evaluate the k^omega < n condition, and search every
/// prime factor for a verified weight-floor witness. The search runs
/// whether or not the condition holds (the condition is sufficient, not
/// necessary); if the condition holds and no factor verifies, something is
/// deeply wrong and the error says so.
pub fn mersenne_witness(n: u32, k: u32) -> Result<MersenneWitness> {
    if !(2..=MAX_N).contains(&n) {
        return Err(Error::Unsupported(format!("n={n} outside 2..={MAX_N}")));
    }
    if !(2..=MAX_K).contains(&k) {
        return Err(Error::Unsupported(format!("k={k} outside 2..={MAX_K}")));
    }
    let m = (1u128 << n) - 1;
    let factors = factorize(m)?;
    let omega = factors.omega();
    let condition_holds = (k as u128)
        .checked_pow(omega)
        .is_some_and(|v| v < n as u128);
    let mut witness_q = None;
    for q in factors.distinct_primes() {
        if is_witness(q, n, k)? {
            witness_q = Some(q);
            break;
        }
    }
    if condition_holds && witness_q.is_none() {
        return Err(Error::Verification(format!(
            "k^omega = {k}^{omega} < {n} yet every factor of 2^{n}-1 has a weight-{k} multiple"
        )));
    }
    let verified_weight_floor = witness_q.map(|_| k + 1);
    Ok(MersenneWitness {
        n,
        k,
        factors,
        omega,
        condition_holds,
        witness_q,
        verified_weight_floor,
    })
}

/// True when every multiple of q has Hamming weight >= floor, decided by
/// running the minimal-weight search with cap floor - 1 and demanding it
/// come up empty.
pub fn verify_weight_floor(q: u64, floor: u32) -> Result<bool> {
    if floor <= 2 {
        // weight-1 multiples would need 2^a = 0 mod q
        return Ok(true);
    }
    if floor > weight::MAX_WEIGHT_CAP + 1 {
        return Err(Error::Unsupported(format!(
            "floor {floor} beyond the searchable cap"
        )));
    }
    Ok(min_weight_multiple(q, floor - 1)?.is_none())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;

    #[test]
    fn witness_example_n11() {
        let w = mersenne_witness(11, 3).unwrap();
        assert_eq!(w.omega, 2);
        assert!(w.condition_holds); // 3^2 = 9 < 11
        assert_eq!(w.witness_q, Some(89)); // 23 has the weight-3 multiple 529
        assert_eq!(w.verified_weight_floor, Some(4));
    }

    #[test]
    fn witness_example_mersenne_prime() {
        for k in 2..=6 {
            let w = mersenne_witness(13, k).unwrap();
            assert_eq!(w.omega, 1);
            assert!(w.condition_holds);
            assert_eq!(w.witness_q, Some(8191));
        }
    }

    #[test]
    fn witness_example_n6_condition_fails() {
        let w = mersenne_witness(6, 2).unwrap();
        assert_eq!(w.omega, 3); // 63 = 3^2 * 7
        assert!(!w.condition_holds); // 2^3 = 8 >= 6
        // 3 is in T1, but 7 has no weight-2 multiple
        assert_eq!(w.witness_q, Some(7));
        assert_eq!(w.verified_weight_floor, Some(3));
    }

    #[test]
    fn witness_handles_big_factors() {
        // 2^83 - 1 = 167 * (76-bit prime); the big factor has ord 83
        let w = mersenne_witness(83, 2).unwrap();
        assert_eq!(w.omega, 2);
        assert!(w.condition_holds); // 2^2 = 4 < 83
        assert!(w.witness_q.is_some());
    }

    #[test]
    fn verify_floor_examples() {
        assert!(verify_weight_floor(89, 4).unwrap());
        assert!(verify_weight_floor(7, 3).unwrap());
        assert!(!verify_weight_floor(7, 4).unwrap());
        assert!(verify_weight_floor(8191, 13).unwrap());
        assert!(!verify_weight_floor(8191, 14).unwrap());
    }

    #[test]
    fn witness_rejects_out_of_range() {
        assert!(mersenne_witness(1, 3).is_err());
        assert!(mersenne_witness(91, 3).is_err());
        assert!(mersenne_witness(11, 1).is_err());
        assert!(mersenne_witness(11, 7).is_err());
    }

    #[test]
    fn product_replay_small_scale() {
        // when every prime-power factor of 2^n - 1 does have a light
        // multiple, the product of those multiples (raised to the factor
        // multiplicities) is a multiple of 2^n - 1, so its weight is >= n
        for n in 2u32..=20 {
            let m = (1u128 << n) - 1;
            let factors = factorize(m).unwrap();
            let mut product = BigUint::from(1u8);
            let mut all_light = true;
            for &(q, e) in &factors.factors {
                match min_weight_multiple(q as u64, 9).unwrap() {
                    Some(cert) => {
                        for _ in 0..e {
                            product *= &cert.value;
                        }
                    }
                    None => {
                        all_light = false;
                        break;
                    }
                }
            }
            if !all_light {
                continue;
            }
            let m_big = BigUint::from(m);
            assert_eq!(&product % &m_big, BigUint::from(0u8), "n={n}");
            let weight: u64 = product.iter_u64_digits().map(|d| d.count_ones() as u64).sum();
            assert!(weight >= n as u64, "n={n} weight={weight}");
        }
    }
}
