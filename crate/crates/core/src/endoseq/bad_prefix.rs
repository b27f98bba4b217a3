//! Minimal inextendible prefixes of non-tuples.
//!
//! A prefix `(b₁,…,b_s)` is bad for `R^B` when no tuple of `R^B` starts with
//! it while some tuple starts with `(b₁,…,b_{s−1})`. Every non-tuple has
//! exactly one bad prefix, and there are at most `|R^B|·(|B|−1)·r` of them.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::structures::{Structure, Table};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BadPrefix {
    /// Symbol index in the target vocabulary.
    pub symbol: usize,
    pub prefix: Vec<usize>,
}

impl BadPrefix {
    /// Position `s` of the prefix, `1 <= s <= arity`.
    pub fn len(&self) -> usize {
        self.prefix.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prefix.is_empty()
    }
}

/// All bad prefixes of the named relation of `b`, ordered by length and
/// then lexicographically.
pub fn bad_prefixes(b: &Structure, symbol: &str) -> Result<Vec<BadPrefix>> {
    let s = b
        .vocabulary()
        .position(symbol)
        .ok_or_else(|| Error::UnknownSymbol {
            line: 0,
            symbol: symbol.to_string(),
        })?;
    Ok(table_bad_prefixes(b.table(s), b.len())
        .into_iter()
        .map(|prefix| BadPrefix { symbol: s, prefix })
        .collect())
}

/// Bad prefixes of a table over a universe of `domain` elements.
pub fn table_bad_prefixes(table: &Table, domain: usize) -> Vec<Vec<usize>> {
    let arity = table.arity();
    if let Some(codec) = DenseCodec::fits(domain, arity) {
        let bits = codec.encode(table);
        return codec
            .bad_prefix_masks(bits, arity)
            .iter()
            .enumerate()
            .skip(1)
            .flat_map(|(s, &mask)| codec.decode(mask, s))
            .collect();
    }
    sparse_bad_prefixes(table, domain)
}

fn sparse_bad_prefixes(table: &Table, domain: usize) -> Vec<Vec<usize>> {
    let arity = table.arity();
    // prefixes[s] = distinct length-s prefixes of tuples.
    let mut prefixes: Vec<BTreeSet<&[usize]>> = vec![BTreeSet::new(); arity + 1];
    for t in table.tuples() {
        for (s, set) in prefixes.iter_mut().enumerate() {
            set.insert(&t[..s]);
        }
    }
    let mut out = Vec::new();
    for s in 1..=arity {
        for p in &prefixes[s - 1] {
            let mut candidate = p.to_vec();
            candidate.push(0);
            for v in 0..domain {
                candidate[s - 1] = v;
                if !prefixes[s].contains(&candidate[..]) {
                    out.push(candidate.clone());
                }
            }
        }
    }
    out
}

/// Bit-packed relations over small universes: tuple `(b₁,…,b_r)` is bit
/// `b₁·d^(r−1) + … + b_r`, so the tuples sharing a length-`s` prefix are
/// one contiguous group of `d^(r−s)` bits.
#[derive(Debug, Clone)]
pub struct DenseCodec {
    domain: usize,
    /// Groups per table chunk.
    chunk: usize,
    /// `chunk·d` bits → `chunk` bits: which groups are non-empty.
    compress: Vec<u16>,
    /// `chunk` bits → `chunk·d` bits: each bit widened to a full group.
    expand: Vec<u64>,
}

impl DenseCodec {
    /// Codec for `domain^arity <= 64` with `domain <= 12`, if that holds.
    pub fn fits(domain: usize, arity: usize) -> Option<Self> {
        if domain == 0 || domain > 12 {
            return None;
        }
        let mut cells: usize = 1;
        for _ in 0..arity {
            cells = cells.checked_mul(domain)?;
            if cells > 64 {
                return None;
            }
        }
        Some(Self::new(domain))
    }

    pub fn new(domain: usize) -> Self {
        assert!((1..=12).contains(&domain));
        let chunk = 12 / domain;
        let group = (1u64 << domain) - 1;
        let in_bits = chunk * domain;
        let compress = (0..1u64 << in_bits)
            .map(|m| {
                (0..chunk).fold(0u16, |acc, g| {
                    if (m >> (g * domain)) & group != 0 {
                        acc | (1 << g)
                    } else {
                        acc
                    }
                })
            })
            .collect();
        let expand = (0..1u64 << chunk)
            .map(|m| {
                (0..chunk).fold(0u64, |acc, g| {
                    if m & (1 << g) != 0 {
                        acc | (group << (g * domain))
                    } else {
                        acc
                    }
                })
            })
            .collect();
        DenseCodec {
            domain,
            chunk,
            compress,
            expand,
        }
    }

    pub fn domain(&self) -> usize {
        self.domain
    }

    pub fn encode(&self, table: &Table) -> u64 {
        table.tuples().iter().fold(0u64, |acc, t| {
            acc | 1 << t.iter().fold(0usize, |c, &v| c * self.domain + v)
        })
    }

    /// Codes in `mask` as tuples of length `len`.
    pub fn decode(&self, mask: u64, len: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::with_capacity(mask.count_ones() as usize);
        let mut m = mask;
        while m != 0 {
            let mut code = m.trailing_zeros() as usize;
            m &= m - 1;
            let mut t = vec![0; len];
            for slot in t.iter_mut().rev() {
                *slot = code % self.domain;
                code /= self.domain;
            }
            out.push(t);
        }
        out
    }

    /// Which of the `groups` groups of `d` bits in `m` are non-empty.
    #[inline]
    pub fn compress(&self, m: u64, groups: usize) -> u64 {
        let width = self.chunk * self.domain;
        let in_mask = (1u64 << width) - 1;
        let mut out = 0u64;
        let mut g = 0;
        while g < groups {
            let bits = (m >> (g * self.domain)) & in_mask;
            out |= (self.compress[bits as usize] as u64) << g;
            g += self.chunk;
        }
        out & low_bits(groups)
    }

    /// Widens each of the `groups` bits of `m` into a full group of `d` bits.
    #[inline]
    pub fn expand(&self, m: u64, groups: usize) -> u64 {
        let in_mask = (1u64 << self.chunk) - 1;
        let mut out = 0u64;
        let mut g = 0;
        while g < groups {
            let bits = (m >> g) & in_mask;
            out |= self.expand[bits as usize] << (g * self.domain);
            g += self.chunk;
        }
        out & low_bits(groups * self.domain)
    }

    /// Masks of bad prefixes by length: entry `s` has bit `code(p)` set for
    /// each bad prefix `p` of length `s`. Entry 0 is always empty.
    pub fn bad_prefix_masks(&self, relation: u64, arity: usize) -> Vec<u64> {
        let mut present = vec![0u64; arity + 1];
        let mut bad = vec![0u64; arity + 1];
        self.bad_prefix_masks_into(relation, arity, &mut present, &mut bad);
        bad
    }

    /// Allocation-free form of [`bad_prefix_masks`](Self::bad_prefix_masks);
    /// both buffers need `arity + 1` slots.
    #[inline]
    pub fn bad_prefix_masks_into(&self, relation: u64, arity: usize, present: &mut [u64], bad: &mut [u64]) {
        let (present, bad) = (&mut present[..=arity], &mut bad[..=arity]);
        // present[s]: length-s prefixes of some tuple; `cells` is d^s.
        present[arity] = relation;
        let mut cells = (1..arity).fold(1, |c, _| c * self.domain);
        for s in (0..arity).rev() {
            present[s] = self.compress(present[s + 1], cells);
            cells /= self.domain;
        }
        bad[0] = 0;
        let mut cells = 1;
        for s in 1..=arity {
            bad[s] = self.expand(present[s - 1], cells) & !present[s];
            cells *= self.domain;
        }
    }
}

#[inline]
fn low_bits(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structures::Vocabulary;

    fn relation(domain: usize, arity: usize, tuples: &[&[usize]]) -> Structure {
        let mut s = Structure::new("b", Vocabulary::new().with("R", arity));
        for i in 0..domain {
            s.add_element(i.to_string()).unwrap();
        }
        for t in tuples {
            s.add_tuple(0, t).unwrap();
        }
        s
    }

    /// Classifies every prefix directly from the definition.
    fn by_definition(b: &Structure) -> Vec<Vec<usize>> {
        let table = b.table(0);
        let r = table.arity();
        let d = b.len();
        let extends = |p: &[usize]| table.tuples().iter().any(|t| t.starts_with(p));
        let mut out = Vec::new();
        for s in 1..=r {
            for code in 0..d.pow(s as u32) {
                let mut p = vec![0usize; s];
                let mut c = code;
                for slot in p.iter_mut().rev() {
                    *slot = c % d;
                    c /= d;
                }
                if !extends(&p) && extends(&p[..s - 1]) {
                    out.push(p);
                }
            }
        }
        out
    }

    #[test]
    fn equality_relation_on_two_elements() {
        let b = relation(2, 2, &[&[0, 0], &[1, 1]]);
        let got: Vec<Vec<usize>> = bad_prefixes(&b, "R").unwrap().into_iter().map(|p| p.prefix).collect();
        assert_eq!(got, vec![vec![0, 1], vec![1, 0]]);
        assert!(got.len() <= 2 * 1 * 2);
    }

    #[test]
    fn full_and_empty_relations_have_none() {
        let full = relation(2, 2, &[&[0, 0], &[0, 1], &[1, 0], &[1, 1]]);
        assert!(bad_prefixes(&full, "R").unwrap().is_empty());
        let empty = relation(3, 2, &[]);
        assert!(bad_prefixes(&empty, "R").unwrap().is_empty());
        assert!(bad_prefixes(&empty, "S").is_err());
    }

    #[test]
    fn dense_and_sparse_agree_with_definition() {
        for d in 1..=3usize {
            for r in 1..=2usize {
                let cells = d.pow(r as u32);
                for bits in 0u64..(1 << cells) {
                    let codec = DenseCodec::new(d);
                    let tuples: Vec<Vec<usize>> = codec.decode(bits, r);
                    let refs: Vec<&[usize]> = tuples.iter().map(Vec::as_slice).collect();
                    let b = relation(d, r, &refs);
                    let expected = by_definition(&b);
                    assert_eq!(table_bad_prefixes(b.table(0), d), expected);
                    assert_eq!(sparse_bad_prefixes(b.table(0), d), expected);
                }
            }
        }
    }

    #[test]
    fn large_universe_uses_sparse_path() {
        // 9^2 = 81 cells does not fit a u64.
        let b = relation(9, 2, &[&[0, 1], &[0, 2], &[8, 8]]);
        let got = bad_prefixes(&b, "R").unwrap();
        assert_eq!(got, by_definition(&b).into_iter().map(|prefix| BadPrefix { symbol: 0, prefix }).collect::<Vec<_>>());
        // s = 1: 7 unused first entries; s = 2: 7 + 8 dead ends.
        assert_eq!(got.len(), 7 + 7 + 8);
    }
}
