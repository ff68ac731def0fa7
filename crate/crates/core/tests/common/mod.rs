//! Brute-force oracles shared by the integration suites. Everything here
//! is deliberately scalar and simple-minded: no bit kernels, no layer
//! caching, so a bug in the fast paths cannot hide in its own oracle.

use std::collections::BTreeSet;

/// Multiplicative order by plain repeated multiplication.
pub fn naive_order(r: u64, p: u64) -> u64 {
    let r = r % p;
    assert!(r != 0);
    let mut x = r;
    let mut count = 1u64;
    while x != 1 {
        x = (x as u128 * r as u128 % p as u128) as u64;
        count += 1;
    }
    count
}

/// The powers r^0 .. r^(ord-1) mod p.
pub fn power_list(r: u64, p: u64) -> Vec<u64> {
    let ord = naive_order(r, p);
    let mut out = Vec::with_capacity(ord as usize);
    let mut x = 1u64;
    for _ in 0..ord {
        out.push(x);
        x = (x as u128 * r as u128 % p as u128) as u64;
    }
    out
}

/// Layer sets 1R..kR built with scalar loops over sorted sets.
pub fn scalar_layers(base: &[u64], p: u64, k_max: u32) -> Vec<BTreeSet<u64>> {
    let first: BTreeSet<u64> = base.iter().copied().collect();
    let mut layers = vec![first];
    for _ in 1..k_max {
        let prev = layers.last().unwrap();
        let mut next = BTreeSet::new();
        for &x in prev {
            for &b in base {
                next.insert((x + b) % p);
            }
        }
        layers.push(next);
    }
    layers
}

/// Smallest k <= k_max with m in kR, from the scalar layers.
pub fn scalar_min_terms(layers: &[BTreeSet<u64>], m: u64) -> Option<u32> {
    layers
        .iter()
        .position(|layer| layer.contains(&m))
        .map(|i| i as u32 + 1)
}

/// T2 membership by the double loop over exponent pairs.
pub fn t2_double_loop(p: u64) -> bool {
    let powers = power_list(2, p);
    for &a in &powers {
        for &b in &powers {
            if (a + b + 1) % p == 0 {
                return true;
            }
        }
    }
    false
}

/// T1 membership: the order of 2 is even iff 2^w != 1 for w the odd part
/// of p - 1. Uses only modular exponentiation, no order computation.
pub fn t1_parity_test(p: u64) -> bool {
    let mut w = p - 1;
    while w % 2 == 0 {
        w /= 2;
    }
    sparsemul_core::pow_mod(2, w, p) != 1
}

/// Minimal Hamming weight (up to 4) over all integers with set bits below
/// 2 * ord_p(2) that p divides, or None when nothing that light exists.
pub fn brute_min_weight_to_4(p: u64) -> Option<u32> {
    let ord = naive_order(2, p);
    let bound = (2 * ord) as usize;
    let pw: Vec<u64> = {
        let mut v = Vec::with_capacity(bound);
        let mut x = 1u64;
        for _ in 0..bound {
            v.push(x);
            x = x * 2 % p;
        }
        v
    };
    for i in 0..bound {
        if pw[i] == 0 {
            return Some(1);
        }
    }
    for i in 0..bound {
        for j in i + 1..bound {
            if (pw[i] + pw[j]) % p == 0 {
                return Some(2);
            }
        }
    }
    for i in 0..bound {
        for j in i + 1..bound {
            let s = (pw[i] + pw[j]) % p;
            for l in j + 1..bound {
                if (s + pw[l]) % p == 0 {
                    return Some(3);
                }
            }
        }
    }
    for i in 0..bound {
        for j in i + 1..bound {
            let s2 = (pw[i] + pw[j]) % p;
            for l in j + 1..bound {
                let s3 = (s2 + pw[l]) % p;
                for q in l + 1..bound {
                    if (s3 + pw[q]) % p == 0 {
                        return Some(4);
                    }
                }
            }
        }
    }
    None
}

/// Trial-division factorization, the oracle for the rho-based one.
pub fn trial_division_factorize(mut n: u128) -> Vec<(u128, u32)> {
    let mut out = Vec::new();
    let mut d: u128 = 2;
    while d * d <= n {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}
