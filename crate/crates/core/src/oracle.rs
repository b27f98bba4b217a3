//! Exhaustive reference implementations. Exponential by design; every entry
//! point refuses inputs above a fixed size guard instead of sampling.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::structures::{Homomorphism, Pairing, PartialAssignment, Structure};

/// Upper bound on the number of candidate maps an oracle will scan.
pub const MAX_CANDIDATES: u128 = 10_000_000;

/// Largest structure accepted by the isomorphism oracle.
pub const MAX_ISOMORPHISM_SIZE: usize = 9;

fn guard(base: usize, exponent: usize) -> Result<()> {
    let mut total: u128 = 1;
    for _ in 0..exponent {
        total = total.saturating_mul(base as u128);
        if total > MAX_CANDIDATES {
            return Err(Error::SizeGuard(format!(
                "{base}^{exponent} candidate maps exceed {MAX_CANDIDATES}"
            )));
        }
    }
    Ok(())
}

/// Calls `f` on every map from `slots` positions into `0..base`, in
/// lexicographic order with the first position most significant.
fn for_each_map(slots: usize, base: usize, mut f: impl FnMut(&[usize])) {
    if slots > 0 && base == 0 {
        return;
    }
    let mut digits = vec![0usize; slots];
    loop {
        f(&digits);
        let mut i = slots;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] < base {
                break;
            }
            digits[i] = 0;
        }
    }
}

/// Every homomorphism from `a` to `b`, by checking all `|B|^|A|` maps.
pub fn brute_homs(a: &Structure, b: &Structure) -> Result<BTreeSet<Homomorphism>> {
    guard(b.len(), a.len())?;
    let pairing = Pairing::new(a, b)?;
    let mut out = BTreeSet::new();
    for_each_map(a.len(), b.len(), |m| {
        if pairing.preserves_total(m) {
            out.insert(Homomorphism(m.to_vec()));
        }
    });
    Ok(out)
}

/// Distinct restrictions of homomorphisms to `projection`, as value lists in
/// projection order.
pub fn brute_projections(a: &Structure, b: &Structure, projection: &[usize]) -> Result<BTreeSet<Vec<usize>>> {
    Ok(brute_homs(a, b)?
        .into_iter()
        .map(|h| projection.iter().map(|&y| h.image(y)).collect())
        .collect())
}

/// Does `seed` extend to a homomorphism of `A[region]`? Tries every value
/// combination on the free elements.
pub fn brute_extendable(a: &Structure, b: &Structure, region: &[bool], seed: &PartialAssignment) -> Result<bool> {
    let (sub, renumber) = crate::structures::induced_by_mask(a, region);
    let sub_pairing = Pairing::new(&sub, b)?;
    let mut values: Vec<Option<usize>> = vec![None; sub.len()];
    let mut free = Vec::new();
    for x in 0..a.len() {
        if let Some(i) = renumber[x] {
            match seed.get(x) {
                Some(v) => values[i] = Some(v),
                None => free.push(i),
            }
        }
    }
    guard(b.len(), free.len())?;
    let mut found = false;
    let mut full: Vec<usize> = vec![0; sub.len()];
    for_each_map(free.len(), b.len(), |m| {
        if found {
            return;
        }
        for (i, v) in values.iter().enumerate() {
            if let Some(v) = v {
                full[i] = *v;
            }
        }
        for (slot, &i) in free.iter().enumerate() {
            full[i] = m[slot];
        }
        if sub_pairing.preserves_total(&full) {
            found = true;
        }
    });
    Ok(found)
}

/// Isomorphism test by trying every bijection.
pub fn brute_isomorphic(a: &Structure, b: &Structure) -> Result<bool> {
    if a.len() != b.len() || a.tuple_count() != b.tuple_count() {
        return Ok(false);
    }
    if a.len() > MAX_ISOMORPHISM_SIZE {
        return Err(Error::SizeGuard(format!(
            "isomorphism oracle limited to {MAX_ISOMORPHISM_SIZE} elements"
        )));
    }
    let pairing = Pairing::new(a, b)?;
    let n = a.len();
    let mut perm: Vec<usize> = (0..n).collect();
    Ok(any_permutation(&mut perm, 0, &mut |p| pairing.preserves_total(p)))
}

fn any_permutation(v: &mut Vec<usize>, i: usize, f: &mut impl FnMut(&[usize]) -> bool) -> bool {
    if i == v.len() {
        return f(v);
    }
    for j in i..v.len() {
        v.swap(i, j);
        if any_permutation(v, i + 1, f) {
            v.swap(i, j);
            return true;
        }
        v.swap(i, j);
    }
    false
}
