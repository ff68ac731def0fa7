//! Multiplicative subgroups of F_p* as dense membership tables.
//!
//! A `ResidueSet` is a packed bit vector over the residues 0..p. For the
//! moduli this crate works with (a few million) the dense table is both
//! smaller and faster than a hash set, and it is the exact shape the
//! shift-or sumset kernel wants.

use crate::error::{Error, Result};
use crate::modarith::{self, mul_mod, multiplicative_order, pow_mod, two_adic_split};

/// Dense tables beyond this modulus would need gigabytes; refuse early.
pub const MAX_DENSE_MODULUS: u64 = 1 << 33;

/// Subset of Z/pZ with a cached cardinality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidueSet {
    p: u64,
    words: Vec<u64>,
    card: u64,
}

impl ResidueSet {
    pub fn empty(p: u64) -> Result<Self> {
        if p < 2 || p > MAX_DENSE_MODULUS {
            return Err(Error::Unsupported(format!(
                "modulus {p} outside dense-table range 2..=2^33"
            )));
        }
        let words = vec![0u64; p.div_ceil(64) as usize];
        Ok(ResidueSet { p, words, card: 0 })
    }

    pub fn from_members<I: IntoIterator<Item = u64>>(p: u64, members: I) -> Result<Self> {
        let mut set = Self::empty(p)?;
        for x in members {
            set.insert(x)?;
        }
        Ok(set)
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    /// Number of members.
    pub fn card(&self) -> u64 {
        self.card
    }

    pub fn is_empty(&self) -> bool {
        self.card == 0
    }

    pub fn insert(&mut self, x: u64) -> Result<()> {
        if x >= self.p {
            return Err(Error::ResidueOutOfRange {
                residue: x,
                modulus: self.p,
            });
        }
        let (w, b) = (x as usize / 64, x % 64);
        if self.words[w] & (1 << b) == 0 {
            self.words[w] |= 1 << b;
            self.card += 1;
        }
        Ok(())
    }

    /// O(1) membership. Residues at or above the modulus are an error.
    pub fn contains(&self, x: u64) -> Result<bool> {
        if x >= self.p {
            return Err(Error::ResidueOutOfRange {
                residue: x,
                modulus: self.p,
            });
        }
        Ok(self.bit(x))
    }

    #[inline]
    pub(crate) fn bit(&self, x: u64) -> bool {
        debug_assert!(x < self.p);
        self.words[x as usize / 64] & (1 << (x % 64)) != 0
    }

    #[inline]
    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }

    pub(crate) fn from_words(p: u64, words: Vec<u64>) -> Self {
        debug_assert_eq!(words.len(), p.div_ceil(64) as usize);
        let card = words.iter().map(|w| w.count_ones() as u64).sum();
        ResidueSet { p, words, card }
    }

    /// Iterate members in ascending order.
    pub fn members(&self) -> Members<'_> {
        Members {
            words: &self.words,
            idx: 0,
            current: self.words.first().copied().unwrap_or(0),
        }
    }

    /// True when every nonzero residue is a member.
    pub fn covers_nonzero(&self) -> bool {
        let zero = u64::from(self.bit(0));
        self.card - zero == self.p - 1
    }
}

pub struct Members<'a> {
    words: &'a [u64],
    idx: usize,
    current: u64,
}

impl Iterator for Members<'_> {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        while self.current == 0 {
            self.idx += 1;
            if self.idx >= self.words.len() {
                return None;
            }
            self.current = self.words[self.idx];
        }
        let b = self.current.trailing_zeros();
        self.current &= self.current - 1;
        Some(self.idx as u64 * 64 + b as u64)
    }
}

/// A multiplicative subgroup of F_p* with its membership table. For
/// single-generator groups the discrete-log index of every element is kept
/// so sum representations can be rewritten as exponent lists.
#[derive(Debug, Clone)]
pub struct SubgroupDescriptor {
    pub p: u64,
    pub generators: Vec<u64>,
    pub elements: ResidueSet,
    pub order: u64,
    dlog: Option<Vec<u32>>,
}

impl SubgroupDescriptor {
    /// Exponent index of x relative to the single generator, when tracked.
    pub fn dlog_of(&self, x: u64) -> Option<u32> {
        let table = self.dlog.as_ref()?;
        let v = *table.get(x as usize)?;
        (v != u32::MAX).then_some(v)
    }

    pub fn has_dlog(&self) -> bool {
        self.dlog.is_some()
    }
}

fn require_odd_prime(p: u64) -> Result<()> {
    if p < 3 || p % 2 == 0 || !modarith::is_prime_u64(p) {
        return Err(Error::NotOddPrime(p));
    }
    Ok(())
}

/// The cyclic subgroup <r> = {r^i mod p}, with dlog populated.
pub fn generate_cyclic(r: u64, p: u64) -> Result<SubgroupDescriptor> {
    require_odd_prime(p)?;
    let g = r % p;
    if g == 0 {
        return Err(Error::BaseNotInvertible { base: r, modulus: p });
    }
    let profile = multiplicative_order(r, p)?;
    let mut elements = ResidueSet::empty(p)?;
    let mut dlog = vec![u32::MAX; p as usize];
    let mut x = 1u64;
    for i in 0..profile.ord {
        elements.insert(x)?;
        dlog[x as usize] = i as u32;
        x = mul_mod(x, g, p);
    }
    debug_assert_eq!(x, 1);
    Ok(SubgroupDescriptor {
        p,
        generators: vec![g],
        elements,
        order: profile.ord,
        dlog: Some(dlog),
    })
}

/// Closure of a generator list under multiplication mod p. No dlog; the
/// order is whatever the closure stabilizes at.
pub fn generate_multi(gens: &[u64], p: u64) -> Result<SubgroupDescriptor> {
    require_odd_prime(p)?;
    if gens.is_empty() {
        return Err(Error::Unsupported("empty generator list".into()));
    }
    let mut reduced = Vec::with_capacity(gens.len());
    for &g in gens {
        let r = g % p;
        if r == 0 {
            return Err(Error::GeneratorNotInvertible { gen: g, modulus: p });
        }
        reduced.push(r);
    }
    let mut elements = ResidueSet::empty(p)?;
    elements.insert(1)?;
    let mut frontier = vec![1u64];
    while let Some(x) = frontier.pop() {
        for &g in &reduced {
            let y = mul_mod(x, g, p);
            if !elements.bit(y) {
                elements.insert(y)?;
                frontier.push(y);
            }
        }
    }
    let order = elements.card();
    Ok(SubgroupDescriptor {
        p,
        generators: reduced,
        elements,
        order,
        dlog: None,
    })
}

/// The odd-order subgroup <a^(2^s)> where p - 1 = 2^s * w. Every element
/// has odd multiplicative order, so -1 is never a member.
pub fn odd_part_subgroup(a: u64, p: u64) -> Result<SubgroupDescriptor> {
    require_odd_prime(p)?;
    if a % p == 0 {
        return Err(Error::BaseNotInvertible { base: a, modulus: p });
    }
    let (s, _) = two_adic_split(p - 1);
    let g = pow_mod(a, 1u64 << s, p);
    generate_cyclic(g, p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn members_vec(s: &ResidueSet) -> Vec<u64> {
        s.members().collect()
    }

    #[test]
    fn cyclic_examples() {
        let g = generate_cyclic(2, 7).unwrap();
        assert_eq!(members_vec(&g.elements), vec![1, 2, 4]);
        assert_eq!(g.order, 3);
        assert_eq!(g.dlog_of(4), Some(2));
        assert_eq!(g.dlog_of(1), Some(0));
        assert_eq!(g.dlog_of(3), None);

        let g = generate_cyclic(2, 23).unwrap();
        assert_eq!(g.order, 11);
        assert_eq!(
            members_vec(&g.elements),
            vec![1, 2, 3, 4, 6, 8, 9, 12, 13, 16, 18]
        );

        let g = generate_cyclic(3, 5).unwrap();
        assert_eq!(g.order, 4);
        assert_eq!(members_vec(&g.elements), vec![1, 2, 3, 4]);
    }

    #[test]
    fn cyclic_rejects_noninvertible() {
        assert!(matches!(
            generate_cyclic(7, 7),
            Err(Error::BaseNotInvertible { .. })
        ));
    }

    #[test]
    fn multi_examples() {
        let g = generate_multi(&[2, 3], 5).unwrap();
        assert_eq!(g.order, 4);
        let g = generate_multi(&[4], 7).unwrap();
        assert_eq!(members_vec(&g.elements), vec![1, 2, 4]);
        let g = generate_multi(&[2, 3], 7).unwrap();
        assert_eq!(g.order, 6);
        assert!(!g.has_dlog());
        assert!(matches!(
            generate_multi(&[14], 7),
            Err(Error::GeneratorNotInvertible { .. })
        ));
    }

    #[test]
    fn multi_matches_cyclic_for_single_generator() {
        for p in [5u64, 7, 11, 13, 23, 89] {
            for r in 2..8 {
                if r % p == 0 {
                    continue;
                }
                let a = generate_cyclic(r, p).unwrap();
                let b = generate_multi(&[r], p).unwrap();
                assert_eq!(a.elements, b.elements, "r={r} p={p}");
            }
        }
    }

    #[test]
    fn odd_part_examples() {
        let g = odd_part_subgroup(2, 7).unwrap();
        assert_eq!(g.generators, vec![4]);
        assert_eq!(members_vec(&g.elements), vec![1, 2, 4]);
        assert_eq!(g.order, 3);

        let g = odd_part_subgroup(2, 23).unwrap();
        assert_eq!(g.order, 11);
        let quadratic_residues: Vec<u64> = {
            let mut v: Vec<u64> = (1..23u64).map(|x| x * x % 23).collect();
            v.sort_unstable();
            v.dedup();
            v
        };
        assert_eq!(members_vec(&g.elements), quadratic_residues);

        let g = odd_part_subgroup(2, 13).unwrap();
        assert_eq!(g.generators, vec![3]);
        assert_eq!(members_vec(&g.elements), vec![1, 3, 9]);
    }

    #[test]
    fn odd_part_never_contains_minus_one() {
        for p in [3u64, 5, 7, 11, 13, 23, 29, 89, 101, 8191] {
            for a in [2u64, 3, 5, 10] {
                if a % p == 0 {
                    continue;
                }
                let g = odd_part_subgroup(a, p).unwrap();
                assert!(!g.elements.bit(p - 1), "a={a} p={p}");
            }
        }
    }

    #[test]
    fn contains_checks_range() {
        let s = ResidueSet::from_members(7, [1, 2, 4]).unwrap();
        assert!(s.contains(4).unwrap());
        assert!(!s.contains(6).unwrap());
        assert!(matches!(
            s.contains(7),
            Err(Error::ResidueOutOfRange { .. })
        ));
        let full = generate_cyclic(2, 11).unwrap();
        assert!(!full.elements.contains(0).unwrap());
    }

    #[test]
    fn lagrange_holds() {
        for p in [7u64, 11, 13, 23, 89, 101, 769] {
            for r in 2..12u64 {
                if r % p == 0 {
                    continue;
                }
                let g = generate_cyclic(r, p).unwrap();
                assert_eq!((p - 1) % g.order, 0, "r={r} p={p}");
                assert_eq!(g.order, g.elements.card());
            }
        }
    }
}
