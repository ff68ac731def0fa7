//! Iterated sumsets kR over Z/pZ.
//!
//! The kernel computes X + Y as |Y| shifted-OR passes of X's bit table over
//! a doubled 2p-bit window, folded back mod p at the end. That is
//! O(|Y| * p / 64) word operations instead of the O(|X||Y|) pairwise loop,
//! and it is what makes the full-census paths affordable.

use crate::error::{Error, Result};
use crate::modarith::mul_mod;
use crate::subgroup::{ResidueSet, SubgroupDescriptor};

/// Layer stacks are capped here; deeper sums cost memory with no payoff.
pub const MAX_LAYERS: u32 = 8;

/// Reconstruction walks one layer per term; certificates may need more
/// terms than the public layer cap (a prime like 8191 needs twelve).
pub(crate) const MAX_RECONSTRUCT_TERMS: u32 = 23;

/// OR (src << shift) into dst. src holds p bits; dst must hold 2p bits
/// plus one spare word.
#[inline]
fn or_shifted(src: &[u64], dst: &mut [u64], shift: u64) {
    let wo = (shift / 64) as usize;
    let bo = (shift % 64) as u32;
    if bo == 0 {
        for (i, &w) in src.iter().enumerate() {
            dst[i + wo] |= w;
        }
    } else {
        let mut carry = 0u64;
        for (i, &w) in src.iter().enumerate() {
            dst[i + wo] |= (w << bo) | carry;
            carry = w >> (64 - bo);
        }
        dst[src.len() + wo] |= carry;
    }
}

/// The raw kernel: out = { (x + y) mod p : x in src bits, y in shifts }.
/// `dbl` is the 2p-bit scratch window (zeroed here), `out` holds p bits.
pub(crate) fn sum_into(
    src: &[u64],
    p: u64,
    shifts: impl Iterator<Item = u64>,
    dbl: &mut [u64],
    out: &mut [u64],
) {
    let nw = p.div_ceil(64) as usize;
    debug_assert_eq!(src.len(), nw);
    debug_assert!(dbl.len() >= 2 * nw + 1);
    debug_assert_eq!(out.len(), nw);
    dbl[..2 * nw + 1].fill(0);
    for y in shifts {
        debug_assert!(y < p);
        or_shifted(src, dbl, y);
    }
    // fold the high window [p, 2p) back onto [0, p)
    let off_w = (p / 64) as usize;
    let off_b = (p % 64) as u32;
    if off_b == 0 {
        for j in 0..nw {
            out[j] = dbl[j] | dbl[off_w + j];
        }
    } else {
        for j in 0..nw {
            out[j] = dbl[j] | (dbl[off_w + j] >> off_b) | (dbl[off_w + j + 1] << (64 - off_b));
        }
        out[nw - 1] &= (1u64 << off_b) - 1;
    }
}

/// Full sumset {x + y mod p}. Iterates over the second argument, so put the
/// smaller set there when it matters.
pub fn add_sets(x: &ResidueSet, y: &ResidueSet) -> Result<ResidueSet> {
    if x.modulus() != y.modulus() {
        return Err(Error::ModulusMismatch(x.modulus(), y.modulus()));
    }
    let p = x.modulus();
    if x.is_empty() || y.is_empty() {
        return ResidueSet::empty(p);
    }
    let nw = p.div_ceil(64) as usize;
    let mut dbl = vec![0u64; 2 * nw + 1];
    let mut out = vec![0u64; nw];
    sum_into(x.words(), p, y.members(), &mut dbl, &mut out);
    Ok(ResidueSet::from_words(p, out))
}

/// The stack 1R, 2R, ..., k_max R for a base set R.
#[derive(Debug, Clone)]
pub struct SumsetLayers {
    pub p: u64,
    pub base: ResidueSet,
    layers: Vec<ResidueSet>,
    /// Smallest k with kR covering every nonzero residue, if reached.
    pub covered_at: Option<u32>,
}

impl SumsetLayers {
    pub fn build(base: &ResidueSet, k_max: u32) -> Result<Self> {
        if k_max == 0 || k_max > MAX_LAYERS {
            return Err(Error::Unsupported(format!(
                "layer count {k_max} outside 1..={MAX_LAYERS}"
            )));
        }
        let mut layers = vec![base.clone()];
        let mut covered_at = base.covers_nonzero().then_some(1);
        while (layers.len() as u32) < k_max {
            let next = add_sets(layers.last().unwrap(), base)?;
            if covered_at.is_none() && next.covers_nonzero() {
                covered_at = Some(layers.len() as u32 + 1);
            }
            layers.push(next);
        }
        Ok(SumsetLayers {
            p: base.modulus(),
            base: base.clone(),
            layers,
            covered_at,
        })
    }

    /// kR for 1 <= k <= k_max.
    pub fn layer(&self, k: u32) -> Option<&ResidueSet> {
        if k == 0 {
            return None;
        }
        self.layers.get(k as usize - 1)
    }

    pub fn depth(&self) -> u32 {
        self.layers.len() as u32
    }
}

/// Smallest k <= k_max with m a sum of exactly k elements of the subgroup
/// (repetition allowed), or None. k = 1 is a membership probe and k = 2 a
/// linear scan; only k >= 3 builds layers.
pub fn min_terms(r: &SubgroupDescriptor, m: u64, k_max: u32) -> Result<Option<u32>> {
    let p = r.p;
    if m >= p {
        return Err(Error::ResidueOutOfRange {
            residue: m,
            modulus: p,
        });
    }
    if m == 0 {
        return Err(Error::ZeroTarget);
    }
    if k_max == 0 || k_max > MAX_LAYERS {
        return Err(Error::Unsupported(format!(
            "k_max {k_max} outside 1..={MAX_LAYERS}"
        )));
    }
    if r.elements.bit(m) {
        return Ok(Some(1));
    }
    if k_max < 2 {
        return Ok(None);
    }
    for a in r.elements.members() {
        let rem = if m >= a { m - a } else { m + p - a };
        if rem < p && r.elements.bit(rem) {
            return Ok(Some(2));
        }
    }
    if k_max < 3 {
        return Ok(None);
    }
    let mut current = add_sets(&r.elements, &r.elements)?;
    for k in 3..=k_max {
        current = add_sets(&current, &r.elements)?;
        if current.bit(m) {
            return Ok(Some(k));
        }
    }
    Ok(None)
}

/// Does kR ⊇ F_p* hold?
pub fn covers_all(r: &SubgroupDescriptor, k: u32) -> Result<bool> {
    if k == 0 || k > MAX_LAYERS {
        return Err(Error::Unsupported(format!(
            "k {k} outside 1..={MAX_LAYERS}"
        )));
    }
    let layers = SumsetLayers::build(&r.elements, k)?;
    Ok(layers.covered_at.is_some_and(|c| c <= k))
}

/// Rewrite m in kR as explicit exponents a_i with sum of g^{a_i} = m mod p.
///
/// Backtracks layer by layer, scanning exponents in ascending order at each
/// level, so the answer is deterministic. The returned list is sorted
/// ascending and re-verified by direct modular evaluation before returning.
pub fn reconstruct_exponents(r: &SubgroupDescriptor, m: u64, k: u32) -> Result<Vec<u32>> {
    let p = r.p;
    if m >= p {
        return Err(Error::ResidueOutOfRange {
            residue: m,
            modulus: p,
        });
    }
    if m == 0 {
        return Err(Error::ZeroTarget);
    }
    if !r.has_dlog() {
        return Err(Error::Unsupported(
            "exponent reconstruction needs a single-generator subgroup".into(),
        ));
    }
    if k == 0 || k > MAX_RECONSTRUCT_TERMS {
        return Err(Error::Unsupported(format!(
            "term count {k} outside 1..={MAX_RECONSTRUCT_TERMS}"
        )));
    }
    let g = r.generators[0];
    // layers[j] = (j+1)R, needed up to (k-1)R for the backtracking probes
    let mut layers: Vec<ResidueSet> = vec![r.elements.clone()];
    for _ in 1..k.saturating_sub(1) {
        let next = add_sets(layers.last().unwrap(), &r.elements)?;
        layers.push(next);
    }
    let mut exps = Vec::with_capacity(k as usize);
    let mut target = m;
    for level in (2..=k).rev() {
        let below = &layers[level as usize - 2];
        let mut pw = 1u64;
        let mut found = None;
        for a in 0..r.order {
            let rem = if target >= pw {
                target - pw
            } else {
                target + p - pw
            };
            if below.bit(rem) {
                found = Some((a as u32, rem));
                break;
            }
            pw = mul_mod(pw, g, p);
        }
        match found {
            Some((a, rem)) => {
                exps.push(a);
                target = rem;
            }
            None => {
                return Err(Error::NoRepresentation { target: m, terms: k });
            }
        }
    }
    match r.dlog_of(target) {
        Some(a) => exps.push(a),
        None => return Err(Error::NoRepresentation { target: m, terms: k }),
    }
    exps.sort_unstable();
    let mut check = 0u64;
    for &a in &exps {
        check = (check + crate::modarith::pow_mod(g, a as u64, p)) % p;
    }
    if check != m {
        return Err(Error::Verification(format!(
            "reconstructed exponents for {m} mod {p} sum to {check}"
        )));
    }
    Ok(exps)
}

/// |R|, |R+R|, and |R+R| / |R|^(8/5).
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthStats {
    pub size_r: u64,
    pub size_2r: u64,
    pub ratio_to_8_5: f64,
}

pub fn sumset_growth(r: &SubgroupDescriptor) -> Result<GrowthStats> {
    let two_r = add_sets(&r.elements, &r.elements)?;
    let size_r = r.elements.card();
    let size_2r = two_r.card();
    let ratio_to_8_5 = size_2r as f64 / (size_r as f64).powf(1.6);
    Ok(GrowthStats {
        size_r,
        size_2r,
        ratio_to_8_5,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subgroup::generate_cyclic;

    fn set(p: u64, members: &[u64]) -> ResidueSet {
        ResidueSet::from_members(p, members.iter().copied()).unwrap()
    }

    #[test]
    fn add_sets_examples() {
        let s = add_sets(&set(5, &[1, 2]), &set(5, &[1, 2])).unwrap();
        assert_eq!(s.members().collect::<Vec<_>>(), vec![2, 3, 4]);

        let identity = add_sets(&set(7, &[0]), &set(7, &[1, 2, 4])).unwrap();
        assert_eq!(identity.members().collect::<Vec<_>>(), vec![1, 2, 4]);

        let qr = generate_cyclic(2, 23).unwrap();
        let two_qr = add_sets(&qr.elements, &qr.elements).unwrap();
        assert_eq!(two_qr.card(), 22);
        assert!(!two_qr.bit(0));
    }

    #[test]
    fn add_sets_rejects_modulus_mismatch() {
        let err = add_sets(&set(5, &[1]), &set(7, &[1])).unwrap_err();
        assert!(matches!(err, Error::ModulusMismatch(5, 7)));
    }

    #[test]
    fn add_sets_matches_double_loop_oracle() {
        // scalar pair loop, independent of the word-shift kernel
        for p in [7u64, 23, 61, 67, 127, 131] {
            let g = generate_cyclic(2, p).unwrap();
            let mut expected = vec![false; p as usize];
            let xs: Vec<u64> = g.elements.members().collect();
            for &a in &xs {
                for &b in &xs {
                    expected[((a + b) % p) as usize] = true;
                }
            }
            let got = add_sets(&g.elements, &g.elements).unwrap();
            for v in 0..p {
                assert_eq!(got.bit(v), expected[v as usize], "p={p} v={v}");
            }
        }
    }

    #[test]
    fn min_terms_examples() {
        let g7 = generate_cyclic(2, 7).unwrap();
        assert_eq!(min_terms(&g7, 6, 6).unwrap(), Some(2));

        let g23 = generate_cyclic(2, 23).unwrap();
        assert_eq!(min_terms(&g23, 22, 6).unwrap(), Some(2));

        let g89 = generate_cyclic(2, 89).unwrap();
        assert_eq!(min_terms(&g89, 88, 6).unwrap(), Some(3));
        assert_eq!(min_terms(&g89, 88, 2).unwrap(), None);

        assert!(matches!(min_terms(&g7, 0, 6), Err(Error::ZeroTarget)));
    }

    #[test]
    fn covers_all_examples() {
        let g11 = generate_cyclic(2, 11).unwrap();
        assert!(covers_all(&g11, 2).unwrap());
        let g7 = generate_cyclic(2, 7).unwrap();
        assert!(!covers_all(&g7, 1).unwrap());
        let qr23 = generate_cyclic(2, 23).unwrap();
        assert!(covers_all(&qr23, 2).unwrap());
    }

    #[test]
    fn reconstruct_examples() {
        let g7 = generate_cyclic(2, 7).unwrap();
        assert_eq!(reconstruct_exponents(&g7, 6, 2).unwrap(), vec![1, 2]);

        // oracle: ascending pair scan over the dlog table picked [2, 6]
        let g23 = generate_cyclic(2, 23).unwrap();
        assert_eq!(reconstruct_exponents(&g23, 22, 2).unwrap(), vec![2, 6]);

        // oracle: ascending triple scan picked {1, 3, 8}
        let g89 = generate_cyclic(2, 89).unwrap();
        assert_eq!(reconstruct_exponents(&g89, 88, 3).unwrap(), vec![1, 3, 8]);

        assert!(matches!(
            reconstruct_exponents(&g89, 88, 2),
            Err(Error::NoRepresentation { .. })
        ));
    }

    #[test]
    fn growth_examples() {
        let g7 = generate_cyclic(2, 7).unwrap();
        let s = sumset_growth(&g7).unwrap();
        assert_eq!((s.size_r, s.size_2r), (3, 6));

        let g11 = generate_cyclic(2, 11).unwrap();
        let s = sumset_growth(&g11).unwrap();
        assert_eq!(s.size_2r, 11);

        let g23 = generate_cyclic(2, 23).unwrap();
        let s = sumset_growth(&g23).unwrap();
        assert_eq!(s.size_2r, 22);
    }

    #[test]
    fn layers_monotone_for_base_two() {
        for p in [7u64, 23, 89, 127, 521] {
            let g = generate_cyclic(2, p).unwrap();
            let layers = SumsetLayers::build(&g.elements, 5).unwrap();
            for k in 1..5 {
                let a = layers.layer(k).unwrap();
                let b = layers.layer(k + 1).unwrap();
                for v in a.members() {
                    assert!(b.bit(v), "p={p} k={k} v={v}");
                }
            }
        }
    }
}
