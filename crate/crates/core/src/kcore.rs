//! k-retractions and greedy k-cores.
//!
//! A k-retraction moves at most `k` elements and is the identity on its
//! image. Repeating them until none is left reaches the k-core, which is
//! unique up to isomorphism whatever choices are made along the way.

use crate::endoseq::EndoSequence;
use crate::error::{Error, Result};
use crate::oracle::brute_homs;
use crate::structures::{induced_by_mask, Homomorphism, Pairing, PartialAssignment, Structure};

/// Largest structure [`brute_force_core`] accepts.
pub const MAX_BRUTE_CORE: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Retraction {
    pub map: Homomorphism,
    /// Elements with `map(x) != x`, in universe order.
    pub moved: Vec<usize>,
}

impl Retraction {
    /// Elements kept, as a mask.
    pub fn image(&self) -> Vec<bool> {
        let mut keep = vec![true; self.map.len()];
        for &x in &self.moved {
            keep[x] = false;
        }
        keep
    }
}

/// First non-identity k-retraction in the default scan order, or `None`
/// when `a` is a k-core.
pub fn find_k_retraction(a: &Structure, k: usize) -> Option<Retraction> {
    let order: Vec<usize> = (0..a.len()).collect();
    find_k_retraction_in(a, k, &order)
}

/// Same search with the universe read in `order`: moved sets are tried by
/// size, then in colex order of their positions in `order`; targets follow
/// `order` too.
pub fn find_k_retraction_in(a: &Structure, k: usize, order: &[usize]) -> Option<Retraction> {
    let n = a.len();
    assert_eq!(order.len(), n, "scan order must list the universe");
    let pairing = Pairing::new(a, a).expect("a structure pairs with itself");
    let incidence = a.incidence();
    for size in 1..=k.min(n.saturating_sub(1)) {
        // Positions into `order`, advanced in colex order.
        let mut pos: Vec<usize> = (0..size).collect();
        loop {
            let moved: Vec<usize> = pos.iter().map(|&p| order[p]).collect();
            if let Some(map) = retract_onto_rest(a, &pairing, &incidence, &moved, order) {
                let mut moved = moved;
                moved.sort_unstable();
                return Some(Retraction {
                    map: Homomorphism(map),
                    moved,
                });
            }
            if !next_colex(&mut pos, n) {
                break;
            }
        }
    }
    None
}

fn next_colex(pos: &mut [usize], n: usize) -> bool {
    for i in 0..pos.len() {
        let limit = if i + 1 < pos.len() { pos[i + 1] } else { n };
        if pos[i] + 1 < limit {
            pos[i] += 1;
            for (j, p) in pos.iter_mut().enumerate().take(i) {
                *p = j;
            }
            return true;
        }
    }
    false
}

/// A map sending `moved` into the rest and fixing the rest that preserves
/// every tuple touching `moved`.
fn retract_onto_rest(
    a: &Structure,
    pairing: &Pairing<'_>,
    incidence: &[Vec<(usize, usize)>],
    moved: &[usize],
    order: &[usize],
) -> Option<Vec<usize>> {
    let mut is_moved = vec![false; a.len()];
    for &x in moved {
        is_moved[x] = true;
    }
    let targets: Vec<usize> = order.iter().copied().filter(|&y| !is_moved[y]).collect();
    let mut values: Vec<Option<usize>> = (0..a.len()).map(|x| (!is_moved[x]).then_some(x)).collect();
    let ok = assign(a, pairing, incidence, moved, &targets, 0, &mut values);
    ok.then(|| values.into_iter().map(|v| v.expect("assigned")).collect())
}

fn assign(
    a: &Structure,
    pairing: &Pairing<'_>,
    incidence: &[Vec<(usize, usize)>],
    moved: &[usize],
    targets: &[usize],
    i: usize,
    values: &mut Vec<Option<usize>>,
) -> bool {
    let Some(&x) = moved.get(i) else { return true };
    let mut image = Vec::new();
    for &y in targets {
        values[x] = Some(y);
        // Tuples through x whose entries are all assigned by now.
        let consistent = incidence[x].iter().all(|&(s, t)| {
            let tuple = &a.table(s).tuples()[t];
            image.clear();
            image.extend(tuple.iter().map_while(|&z| values[z]));
            image.len() < tuple.len() || pairing.target_contains(s, &image)
        });
        if consistent && assign(a, pairing, incidence, moved, targets, i + 1, values) {
            return true;
        }
    }
    values[x] = None;
    false
}

/// Applies k-retractions until none is left. Returns the core (an induced
/// substructure of `a`, keeping element names) and the steps, each as a map
/// on the full universe of `a` that is the identity off its moved set.
pub fn k_core(a: &Structure, k: usize) -> (Structure, Vec<Retraction>) {
    let order: Vec<usize> = (0..a.len()).collect();
    k_core_in(a, k, &order)
}

/// [`k_core`] with the scan order of [`find_k_retraction_in`].
pub fn k_core_in(a: &Structure, k: usize, order: &[usize]) -> (Structure, Vec<Retraction>) {
    let mut keep = vec![true; a.len()];
    let mut steps = Vec::new();
    loop {
        let (current, renumber) = induced_by_mask(a, &keep);
        let back: Vec<usize> = (0..a.len()).filter(|&x| keep[x]).collect();
        let local_order: Vec<usize> = order.iter().filter_map(|&x| renumber[x]).collect();
        let Some(r) = find_k_retraction_in(&current, k, &local_order) else {
            return (current, steps);
        };
        let mut map: Vec<usize> = (0..a.len()).collect();
        for (i, &y) in r.map.images().iter().enumerate() {
            map[back[i]] = back[y];
        }
        let moved: Vec<usize> = r.moved.iter().map(|&i| back[i]).collect();
        for &x in &moved {
            keep[x] = false;
        }
        steps.push(Retraction {
            map: Homomorphism(map),
            moved,
        });
    }
}

/// Turns a retraction chain (as returned by [`k_core`]) into a width-k
/// sequence whose levels are the successive images.
pub fn sequence_from_retractions(a: &Structure, steps: &[Retraction], k: usize) -> Result<EndoSequence> {
    let mut levels = vec![vec![true; a.len()]];
    let mut maps = Vec::with_capacity(steps.len());
    for (i, step) in steps.iter().enumerate() {
        let current = levels.last().expect("nonempty").clone();
        if step.map.len() != a.len() || step.moved.is_empty() {
            return Err(Error::sequence("chain", format!("step {} is not a retraction of the universe", i + 1)));
        }
        if step.moved.len() > k {
            return Err(Error::sequence(
                "difference width",
                format!("step {} moves {} elements, more than {k}", i + 1, step.moved.len()),
            ));
        }
        let mut next = current.clone();
        for &x in &step.moved {
            if !current[x] {
                return Err(Error::sequence("chain", format!("step {} moves an element already gone", i + 1)));
            }
            next[x] = false;
        }
        let mut map = PartialAssignment::empty(a.len());
        for x in (0..a.len()).filter(|&x| current[x]) {
            map.set(x, step.map.image(x));
        }
        levels.push(next);
        maps.push(map);
    }
    let seq = EndoSequence::new(levels, maps, k)?;
    seq.validate(a)?;
    Ok(seq)
}

/// A smallest induced substructure that `a` maps onto, by exhaustive search
/// over subsets in increasing size.
pub fn brute_force_core(a: &Structure) -> Result<Structure> {
    let n = a.len();
    if n > MAX_BRUTE_CORE {
        return Err(Error::SizeGuard(format!("core oracle limited to {MAX_BRUTE_CORE} elements")));
    }
    let mut subsets: Vec<u32> = (0..1u32 << n).collect();
    subsets.sort_by_key(|m| (m.count_ones(), *m));
    for mask in subsets {
        if n > 0 && mask == 0 {
            continue;
        }
        let keep: Vec<bool> = (0..n).map(|x| mask >> x & 1 == 1).collect();
        let (sub, _) = induced_by_mask(a, &keep);
        if !brute_homs(a, &sub)?.is_empty() {
            return Ok(sub);
        }
    }
    unreachable!("the whole structure is always a candidate")
}
