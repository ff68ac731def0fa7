//! Modular arithmetic, prime generation, factorization, and multiplicative
//! orders. Everything else in the crate sits on top of this module.
//!
//! Moduli handled by the u64 kernels are capped at 2^62 so that products
//! always fit a widening u128 multiply. Factorization accepts u128 inputs
//! (trial division to 10^5, then Brent's cycle method) so that numbers like
//! 2^90 - 1 can be split without arbitrary-precision arithmetic.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Largest modulus accepted by order/subgroup constructors.
pub const MODULUS_CAP: u64 = 1 << 62;

/// Trial division runs over primes up to this bound before Brent's method.
pub const TRIAL_DIVISION_BOUND: u64 = 100_000;

/// base^exp mod modulus by square-and-multiply. Total function; the widening
/// multiply keeps it exact for any modulus below 2^64.
pub fn pow_mod(base: u64, exp: u64, modulus: u64) -> u64 {
    debug_assert!(modulus >= 2);
    let m = modulus as u128;
    let mut acc: u128 = 1 % m;
    let mut b = base as u128 % m;
    let mut e = exp;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    acc as u64
}

/// a*b mod m with a widening multiply.
#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    (a as u128 * b as u128 % m as u128) as u64
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// a*b mod m for u128 operands, double-and-add so the product never
/// overflows. Requires m < 2^126.
pub fn mul_mod_u128(a: u128, b: u128, m: u128) -> u128 {
    debug_assert!(m < 1 << 126);
    if m <= u64::MAX as u128 {
        return mul_mod(a as u64 % m as u64, b as u64 % m as u64, m as u64) as u128;
    }
    let mut a = a % m;
    let mut b = b % m;
    if a < b {
        std::mem::swap(&mut a, &mut b);
    }
    let mut acc: u128 = 0;
    while b > 0 {
        if b & 1 == 1 {
            acc += a;
            if acc >= m {
                acc -= m;
            }
        }
        a += a;
        if a >= m {
            a -= m;
        }
        b >>= 1;
    }
    acc
}

pub fn pow_mod_u128(base: u128, exp: u128, m: u128) -> u128 {
    let mut acc: u128 = 1 % m;
    let mut b = base % m;
    let mut e = exp;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod_u128(acc, b, m);
        }
        b = mul_mod_u128(b, b, m);
        e >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for 64-bit inputs. The twelve prime bases
/// below are a known complete witness set for n < 2^64.
pub fn is_prime_u64(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let (s, d) = two_adic_split(n - 1);
    'witness: for &a in BASES.iter() {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn miller_rabin_u128(n: u128, base: u128) -> bool {
    let a = base % n;
    if a == 0 {
        return true;
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d & 1 == 0 {
        d >>= 1;
        s += 1;
    }
    let mut x = pow_mod_u128(a, d, n);
    if x == 1 || x == n - 1 {
        return true;
    }
    for _ in 1..s {
        x = mul_mod_u128(x, x, n);
        if x == n - 1 {
            return true;
        }
    }
    false
}

/// Primality for u128 inputs. Below 2^64 this is the deterministic 64-bit
/// test; above, the first thirteen prime bases (a complete witness set up to
/// ~3.3e24) are topped up with sixteen bases derived from the input itself,
/// so the answer is reproducible run to run.
pub fn is_prime(n: u128) -> bool {
    if n <= u64::MAX as u128 {
        return is_prime_u64(n as u64);
    }
    for p in [2u128, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41] {
        if n % p == 0 {
            return false;
        }
        if !miller_rabin_u128(n, p) {
            return false;
        }
    }
    let mut seed = (n as u64) ^ ((n >> 64) as u64) ^ 0xd1b5_4a32_d192_ed03;
    for _ in 0..16 {
        let base = 2 + splitmix64(&mut seed) as u128 % (n - 3);
        if !miller_rabin_u128(n, base) {
            return false;
        }
    }
    true
}

fn small_primes() -> &'static [u64] {
    static CACHE: OnceLock<Vec<u64>> = OnceLock::new();
    CACHE.get_or_init(|| simple_sieve(TRIAL_DIVISION_BOUND))
}

/// Plain sieve of Eratosthenes, used for base primes and small limits.
fn simple_sieve(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            primes.push(i as u64);
            let mut j = i.saturating_mul(i);
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}

fn isqrt(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    let mut x = (n as f64).sqrt() as u64 + 2;
    while x * x > n {
        x -= 1;
    }
    x
}

const SEGMENT_SPAN: u64 = 1 << 20;

/// All primes in [lo, hi), ascending. Segmented: memory stays at
/// O(sqrt(hi) + segment) regardless of the range width.
pub fn sieve_range(lo: u64, hi: u64) -> Vec<u64> {
    let mut out = Vec::new();
    sieve_range_into(lo, hi, &mut out);
    out
}

/// Segmented sieving into a caller-owned buffer (cleared first).
pub fn sieve_range_into(lo: u64, hi: u64, out: &mut Vec<u64>) {
    out.clear();
    if hi <= lo || hi <= 2 {
        return;
    }
    let lo = lo.max(2);
    let base = simple_sieve(isqrt(hi - 1).max(2));
    let mut mark = vec![false; SEGMENT_SPAN as usize];
    let mut seg_lo = lo;
    while seg_lo < hi {
        let seg_hi = seg_lo.saturating_add(SEGMENT_SPAN).min(hi);
        let len = (seg_hi - seg_lo) as usize;
        mark[..len].fill(false);
        for &p in &base {
            if p * p >= seg_hi {
                break;
            }
            let mut start = p * p;
            if start < seg_lo {
                start = seg_lo.div_ceil(p) * p;
            }
            let mut j = start;
            while j < seg_hi {
                mark[(j - seg_lo) as usize] = true;
                j += p;
            }
        }
        for i in 0..len {
            if !mark[i] {
                let n = seg_lo + i as u64;
                if n >= 2 {
                    out.push(n);
                }
            }
        }
        seg_lo = seg_hi;
    }
}

/// Exactly the primes in [2, limit], ascending. A limit below 2 yields an
/// empty list.
pub fn sieve_primes(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    sieve_range(2, limit + 1)
}

/// Prime factorization with multiplicity, primes ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorMultiset {
    /// (prime, exponent) pairs sorted by prime.
    pub factors: Vec<(u128, u32)>,
}

impl FactorMultiset {
    /// Number of prime factors counted with multiplicity.
    pub fn omega(&self) -> u32 {
        self.factors.iter().map(|&(_, e)| e).sum()
    }

    /// Reassembles the factored integer.
    pub fn product(&self) -> u128 {
        let mut acc: u128 = 1;
        for &(p, e) in &self.factors {
            for _ in 0..e {
                acc *= p;
            }
        }
        acc
    }

    pub fn distinct_primes(&self) -> impl Iterator<Item = u128> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }
}

impl std::fmt::Display for FactorMultiset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut first = true;
        for &(p, e) in &self.factors {
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if e == 1 {
                write!(f, "{p}")?;
            } else {
                write!(f, "{p}^{e}")?;
            }
        }
        Ok(())
    }
}

/// Brent's cycle-finding variant of the rho method. Returns a nontrivial
/// divisor of n (which must be composite, odd, and nonsquare-free-agnostic).
/// The polynomial constant walks 1,2,3,... so runs are reproducible.
fn rho_brent_u64(n: u64, c: u64, budget: u64) -> Option<u64> {
    let f = |x: u64| {
        let v = mul_mod(x, x, n);
        if v >= n - c {
            v + c - n
        } else {
            v + c
        }
    };
    let mut y = 2u64;
    let mut x;
    let mut d = 1u64;
    let mut count = 0u64;
    let mut cycle = 1u64;
    while d == 1 && count < budget {
        x = y;
        for _ in 0..cycle {
            y = f(y);
        }
        let mut k = 0;
        while k < cycle && d == 1 && count < budget {
            let mut q = 1u64;
            let inner = cycle.min(128).min(cycle - k);
            let x_save = y;
            for _ in 0..inner {
                y = f(y);
                q = mul_mod(q, x.abs_diff(y), n);
            }
            d = gcd(q, n);
            count += inner;
            k += inner;
            if d == n {
                // backtrack one step at a time
                let mut z = x_save;
                d = 1;
                while d == 1 {
                    z = f(z);
                    d = gcd(x.abs_diff(z), n);
                }
                break;
            }
        }
        cycle *= 2;
    }
    if d > 1 && d < n {
        Some(d)
    } else {
        None
    }
}

fn rho_brent_u128(n: u128, c: u128, budget: u64) -> Option<u128> {
    let f = |x: u128| {
        let v = mul_mod_u128(x, x, n);
        if v >= n - c {
            v + c - n
        } else {
            v + c
        }
    };
    let mut y = 2u128;
    let mut x;
    let mut d = 1u128;
    let mut count = 0u64;
    let mut cycle = 1u64;
    while d == 1 && count < budget {
        x = y;
        for _ in 0..cycle {
            y = f(y);
        }
        let mut k = 0;
        while k < cycle && d == 1 && count < budget {
            let mut q = 1u128;
            let inner = cycle.min(128).min(cycle - k);
            let x_save = y;
            for _ in 0..inner {
                y = f(y);
                q = mul_mod_u128(q, x.abs_diff(y), n);
            }
            d = gcd_u128(q, n);
            count += inner;
            k += inner;
            if d == n {
                let mut z = x_save;
                d = 1;
                while d == 1 {
                    z = f(z);
                    d = gcd_u128(x.abs_diff(z), n);
                }
                break;
            }
        }
        cycle *= 2;
    }
    if d > 1 && d < n {
        Some(d)
    } else {
        None
    }
}

fn split_composite(n: u128) -> Result<u128> {
    // perfect squares defeat rho's x^2+c walk cheaply; peel them first
    let r = (n as f64).sqrt() as u128;
    for cand in r.saturating_sub(2)..=r + 2 {
        if cand > 1 && cand * cand == n {
            return Ok(cand);
        }
    }
    if n <= u64::MAX as u128 {
        let m = n as u64;
        for c in 1..=8u64 {
            if let Some(d) = rho_brent_u64(m, c, 1 << 24) {
                return Ok(d as u128);
            }
        }
    } else {
        for c in 1..=8u128 {
            if let Some(d) = rho_brent_u128(n, c, 1 << 22) {
                return Ok(d);
            }
        }
    }
    Err(Error::IncompleteFactorization(n))
}

/// Full factorization of n >= 2. Trial division over primes up to 10^5,
/// then recursive rho splitting with a primality test on every leaf. The
/// output ordering is deterministic no matter how the splits landed. A
/// composite that survives the splitting budget is reported as an explicit
/// error, never mislabeled prime.
pub fn factorize(n: u128) -> Result<FactorMultiset> {
    if n < 2 {
        return Err(Error::NothingToFactor(n));
    }
    let mut acc: BTreeMap<u128, u32> = BTreeMap::new();
    let mut rem = n;
    for &p in small_primes() {
        let p = p as u128;
        if p * p > rem {
            break;
        }
        while rem % p == 0 {
            *acc.entry(p).or_insert(0) += 1;
            rem /= p;
        }
    }
    let bound = TRIAL_DIVISION_BOUND as u128;
    let mut pending = Vec::new();
    if rem > 1 {
        if rem <= bound * bound || is_prime(rem) {
            // below the squared bound anything left is prime by construction
            *acc.entry(rem).or_insert(0) += 1;
        } else {
            pending.push(rem);
        }
    }
    while let Some(m) = pending.pop() {
        if is_prime(m) {
            *acc.entry(m).or_insert(0) += 1;
            continue;
        }
        let d = split_composite(m)?;
        pending.push(d);
        pending.push(m / d);
    }
    Ok(FactorMultiset {
        factors: acc.into_iter().collect(),
    })
}

/// n = 2^s * w with w odd. Defined for n >= 1.
pub fn two_adic_split(n: u64) -> (u32, u64) {
    if n == 0 {
        return (0, 0);
    }
    let s = n.trailing_zeros();
    (s, n >> s)
}

/// The multiplicative order of a base mod an odd prime, together with the
/// data everything downstream keeps asking for: the factorization of p-1
/// and its 2-adic split.
#[derive(Debug, Clone)]
pub struct OrderProfile {
    pub p: u64,
    pub base: u64,
    pub ord: u64,
    pub pm1_factors: FactorMultiset,
    pub s: u32,
    pub w: u64,
}

/// ord_p(r): factor p-1, then strip prime factors q from the candidate
/// exponent while r^(d/q) stays 1.
pub fn multiplicative_order(r: u64, p: u64) -> Result<OrderProfile> {
    if p < 3 || p % 2 == 0 || !is_prime_u64(p) {
        return Err(Error::NotOddPrime(p));
    }
    if p > MODULUS_CAP {
        return Err(Error::ModulusTooLarge(p));
    }
    let base = r % p;
    if base == 0 {
        return Err(Error::BaseNotInvertible { base: r, modulus: p });
    }
    let pm1 = p - 1;
    let pm1_factors = factorize(pm1 as u128)?;
    let mut ord = pm1;
    for &(q, e) in &pm1_factors.factors {
        let q = q as u64;
        for _ in 0..e {
            if pow_mod(base, ord / q, p) == 1 {
                ord /= q;
            } else {
                break;
            }
        }
    }
    let (s, w) = two_adic_split(pm1);
    Ok(OrderProfile {
        p,
        base,
        ord,
        pm1_factors,
        s,
        w,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pow_mod_examples() {
        assert_eq!(pow_mod(2, 10, 1000), 24);
        assert_eq!(pow_mod(5, 0, 7), 1);
        assert_eq!(pow_mod(2, 11, 23), 1);
    }

    #[test]
    fn pow_mod_large_modulus() {
        // near the 2^62 cap the widening multiply must not wrap
        let p = (1u64 << 62) - 57; // arbitrary large odd modulus
        let x = pow_mod(3, p - 1, p);
        let y = pow_mod(3, 1, p);
        assert!(x < p && y == 3);
    }

    #[test]
    fn sieve_examples() {
        assert_eq!(sieve_primes(10), vec![2, 3, 5, 7]);
        assert_eq!(sieve_primes(2), vec![2]);
        assert!(sieve_primes(1).is_empty());
        assert_eq!(sieve_primes(100).len(), 25);
    }

    #[test]
    fn sieve_range_matches_full_sieve() {
        let full = sieve_primes(30_000);
        let expected: Vec<u64> = full
            .iter()
            .copied()
            .filter(|&p| (7_919..23_000).contains(&p))
            .collect();
        assert_eq!(sieve_range(7_919, 23_000), expected);
    }

    #[test]
    fn factorize_examples() {
        let f = factorize(2047).unwrap();
        assert_eq!(f.factors, vec![(23, 1), (89, 1)]);
        let f = factorize(12).unwrap();
        assert_eq!(f.factors, vec![(2, 2), (3, 1)]);
        assert!(matches!(factorize(1), Err(Error::NothingToFactor(1))));
        assert!(matches!(factorize(0), Err(Error::NothingToFactor(0))));
    }

    #[test]
    fn factorize_2_pow_30_minus_1() {
        // oracle: exhaustive trial division, run once and frozen
        let f = factorize((1u128 << 30) - 1).unwrap();
        assert_eq!(
            f.factors,
            vec![(3, 2), (7, 1), (11, 1), (31, 1), (151, 1), (331, 1)]
        );
        assert_eq!(f.product(), (1 << 30) - 1);
        assert_eq!(f.omega(), 7);
    }

    #[test]
    fn factorize_beyond_u64() {
        // 2^83 - 1 has a 76-bit prime cofactor
        let f = factorize((1u128 << 83) - 1).unwrap();
        assert_eq!(f.factors, vec![(167, 1), (57_912_614_113_275_649_087_721, 1)]);
        // 2^89 - 1 is prime
        let f = factorize((1u128 << 89) - 1).unwrap();
        assert_eq!(f.factors.len(), 1);
        assert_eq!(f.factors[0], ((1u128 << 89) - 1, 1));
    }

    #[test]
    fn order_examples() {
        let o = multiplicative_order(2, 7).unwrap();
        assert_eq!((o.ord, o.s, o.w), (3, 1, 3));
        let o = multiplicative_order(2, 23).unwrap();
        assert_eq!((o.ord, o.s, o.w), (11, 1, 11));
        let o = multiplicative_order(2, 11).unwrap();
        assert_eq!(o.ord, 10);
    }

    #[test]
    fn order_rejects_bad_inputs() {
        assert!(matches!(
            multiplicative_order(3, 10),
            Err(Error::NotOddPrime(10))
        ));
        assert!(matches!(
            multiplicative_order(14, 7),
            Err(Error::BaseNotInvertible { .. })
        ));
        assert!(matches!(
            multiplicative_order(2, 15),
            Err(Error::NotOddPrime(15))
        ));
    }

    #[test]
    fn two_adic_split_examples() {
        assert_eq!(two_adic_split(88), (3, 11));
        assert_eq!(two_adic_split(1), (0, 1));
        assert_eq!(two_adic_split(22), (1, 11));
    }

    #[test]
    fn is_prime_agrees_with_trial_division() {
        for n in 0..2_000u64 {
            let naive = n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0);
            assert_eq!(is_prime_u64(n), naive, "n={n}");
        }
    }

    #[test]
    fn mul_mod_u128_spot_checks() {
        let m = (1u128 << 89) - 1;
        assert_eq!(mul_mod_u128(m - 1, m - 1, m), 1);
        assert_eq!(pow_mod_u128(2, 89, m), 1);
    }
}
