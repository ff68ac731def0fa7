//! Minimal-Hamming-weight multiples of a prime, with integer certificates.
//!
//! A weight-w multiple of p exists exactly when -1 mod p is a sum of w - 1
//! powers of two: divide the multiple by its lowest set bit and the trailing
//! 1 becomes the +1 term. Certificates therefore carry the +1 term as
//! exponent 0 and are re-verified on the full integer, where binary carries
//! from repeated exponents are resolved for real.

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::modarith::{mul_mod, multiplicative_order, pow_mod};
use crate::subgroup::generate_cyclic;
use crate::sumset::{add_sets, reconstruct_exponents};

/// Upper bound on `weight_cap` accepted by [`min_weight_multiple`].
pub const MAX_WEIGHT_CAP: u32 = 24;

/// Above this modulus the dense layered search would need too much memory;
/// the enumeration fallback takes over when the subgroup is small enough.
const DENSE_P_LIMIT: u64 = 1 << 24;

/// Budget for the exhaustive multiset enumeration fallback.
const ENUM_BUDGET: u64 = 200_000_000;

/// An explicit multiple of p of the form sum of 2^a_i, with its weight.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightCertificate {
    pub p: u64,
    /// Exponent multiset, ascending; the +1 term is exponent 0.
    pub exponents: Vec<u32>,
    /// The normalized integer sum (carries applied).
    pub value: BigUint,
    /// popcount(value); repeated exponents can push this below the term count.
    pub weight: u64,
    pub cofactor: BigUint,
}

impl std::fmt::Display for WeightCertificate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "p={} w={} exps=[", self.p, self.weight)?;
        for (i, e) in self.exponents.iter().rev().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, "] value={:#X} cofactor={}", self.value, self.cofactor)
    }
}

fn popcount(v: &BigUint) -> u64 {
    v.iter_u64_digits().map(|d| d.count_ones() as u64).sum()
}

/// Build and verify a certificate from an exponent multiset. The residue
/// sum must vanish mod p; the integer value, its divisibility, and the
/// weight are all recomputed in arbitrary precision.
pub fn normalize_certificate(p: u64, exponents: &[u32]) -> Result<WeightCertificate> {
    if p < 3 || p % 2 == 0 || !crate::modarith::is_prime_u64(p) {
        return Err(Error::NotOddPrime(p));
    }
    if exponents.is_empty() {
        return Err(Error::Unsupported("empty exponent multiset".into()));
    }
    let mut residue = 0u64;
    for &a in exponents {
        residue = (residue + pow_mod(2, a as u64, p)) % p;
    }
    if residue != 0 {
        return Err(Error::NotAMultiple {
            residue,
            modulus: p,
        });
    }
    let mut value = BigUint::from(0u8);
    for &a in exponents {
        value += BigUint::from(1u8) << a;
    }
    if (&value % p) != BigUint::from(0u8) {
        return Err(Error::Verification(format!(
            "residue sum vanished but the integer is not a multiple of {p}"
        )));
    }
    let cofactor = &value / p;
    if &cofactor * p != value {
        return Err(Error::Verification("cofactor reconstruction mismatch".into()));
    }
    let weight = popcount(&value);
    let mut exps = exponents.to_vec();
    exps.sort_unstable();
    Ok(WeightCertificate {
        p,
        exponents: exps,
        value,
        weight,
        cofactor,
    })
}

/// Multisets of size k from n values: C(n + k - 1, k), None on overflow.
pub(crate) fn multiset_count(n: u64, k: u32) -> Option<u64> {
    let mut acc: u128 = 1;
    for i in 0..k as u128 {
        acc = acc.checked_mul(n as u128 + i)?;
        acc /= i + 1;
        if acc > u64::MAX as u128 {
            return None;
        }
    }
    Some(acc as u64)
}

/// Does any multiset of `terms` entries from `powers` sum to `target` mod
/// `modulus`? Plain depth-first enumeration over non-decreasing indices.
pub(crate) fn multiset_sum_hits(
    powers: &[u128],
    modulus: u128,
    target: u128,
    terms: u32,
) -> bool {
    fn rec(powers: &[u128], m: u128, target: u128, remaining: u32, start: usize, sum: u128) -> bool {
        if remaining == 0 {
            return sum == target;
        }
        for i in start..powers.len() {
            let mut ns = sum + powers[i];
            if ns >= m {
                ns -= m;
            }
            if rec(powers, m, target, remaining - 1, i, ns) {
                return true;
            }
        }
        false
    }
    rec(powers, modulus, target, terms, 0, 0)
}

fn sparse_find(powers: &[u64], p: u64, target: u64, terms: u32) -> Option<Vec<u32>> {
    fn rec(
        powers: &[u64],
        p: u64,
        target: u64,
        remaining: u32,
        start: usize,
        sum: u64,
        exps: &mut Vec<u32>,
    ) -> bool {
        if remaining == 0 {
            return sum == target;
        }
        for i in start..powers.len() {
            let mut ns = sum + powers[i];
            if ns >= p {
                ns -= p;
            }
            exps.push(i as u32);
            if rec(powers, p, target, remaining - 1, i, ns, exps) {
                return true;
            }
            exps.pop();
        }
        false
    }
    let mut exps = Vec::with_capacity(terms as usize);
    rec(powers, p, target, terms, 0, 0, &mut exps).then_some(exps)
}

/// Exponent list (without the +1 term) for the smallest k <= k_cap with
/// -1 in kR, via the dense layered search.
fn dense_min_k(p: u64, k_cap: u32) -> Result<Option<Vec<u32>>> {
    let r = generate_cyclic(2, p)?;
    let target = p - 1;
    let mut k_star = None;
    if r.elements.bit(target) {
        k_star = Some(1);
    }
    if k_star.is_none() && k_cap >= 2 {
        for a in r.elements.members() {
            let rem = if target >= a { target - a } else { target + p - a };
            if r.elements.bit(rem) {
                k_star = Some(2);
                break;
            }
        }
    }
    if k_star.is_none() && k_cap >= 3 {
        let mut cur = add_sets(&r.elements, &r.elements)?;
        for k in 3..=k_cap {
            cur = add_sets(&cur, &r.elements)?;
            if cur.bit(target) {
                k_star = Some(k);
                break;
            }
        }
    }
    match k_star {
        None => Ok(None),
        Some(k) => Ok(Some(reconstruct_exponents(&r, target, k)?)),
    }
}

fn sparse_min_k(p: u64, ord: u64, k_cap: u32) -> Result<Option<Vec<u32>>> {
    let mut cost: u64 = 0;
    for j in 1..=k_cap {
        match multiset_count(ord, j) {
            Some(c) => cost = cost.saturating_add(c),
            None => cost = u64::MAX,
        }
    }
    if cost > ENUM_BUDGET {
        return Err(Error::Unsupported(format!(
            "p={p} too large for the dense search and ord={ord} too large to enumerate"
        )));
    }
    let mut powers = Vec::with_capacity(ord as usize);
    let mut x = 1u64;
    for _ in 0..ord {
        powers.push(x);
        x = mul_mod(x, 2, p);
    }
    for j in 1..=k_cap {
        if let Some(exps) = sparse_find(&powers, p, p - 1, j) {
            return Ok(Some(exps));
        }
    }
    Ok(None)
}

/// The lightest multiple of p expressible with at most `weight_cap` binary
/// ones, or None when every multiple needs more. The search runs over
/// -1 in kR for R = <2> mod p; the certificate is rebuilt from explicit
/// exponents and re-verified before being returned.
pub fn min_weight_multiple(p: u64, weight_cap: u32) -> Result<Option<WeightCertificate>> {
    if !(2..=MAX_WEIGHT_CAP).contains(&weight_cap) {
        return Err(Error::WeightCapOutOfRange(weight_cap));
    }
    let profile = multiplicative_order(2, p)?;
    let k_cap = weight_cap - 1;
    let exps = if p <= DENSE_P_LIMIT {
        dense_min_k(p, k_cap)?
    } else {
        sparse_min_k(p, profile.ord, k_cap)?
    };
    let Some(mut exps) = exps else {
        return Ok(None);
    };
    exps.push(0); // the +1 term
    let cert = normalize_certificate(p, &exps)?;
    // carry slack: exponents stay below ord, carries add at most log2(terms)
    let slack = (usize::BITS - (cert.exponents.len() - 1).leading_zeros()) as u64;
    if cert.value.bits() > profile.ord + slack + 1 {
        return Err(Error::Verification(format!(
            "certificate for {p} exceeds the carry-slack bound"
        )));
    }
    Ok(Some(cert))
}

/// popcount(t * (2^n - 1)) >= n. Always true; exposed so the property can
/// be probed directly on chosen inputs.
pub fn stolarsky_check(n: u32, t: u64) -> bool {
    debug_assert!((1..=64).contains(&n));
    debug_assert!((1..=1_000_000).contains(&t));
    let mersenne = (1u128 << n) - 1;
    let product = t as u128 * mersenne;
    product.count_ones() >= n
}
