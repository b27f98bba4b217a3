//! Elementary-extension tests and the enumeration tree over elementary
//! homomorphisms.
//!
//! The tree: roots are the homomorphisms of `A_n`; the children of an
//! elementary `ψ` on `A_i` are, for each `i' < i`, the elementary
//! homomorphisms of `A_{i'}` whose restriction to `A_{i'+1}` is
//! `ψ ∘ φ_i ∘ … ∘ φ_{i'+2}`. Every node is found by extending position by
//! position with an elementary-extendibility check as the pruning oracle, so
//! no branch dead-ends, and nodes at even depth emit before their children
//! while odd ones emit after, which keeps consecutive outputs at most one
//! root-to-leaf walk apart.

use std::borrow::Cow;
use std::ops::ControlFlow;

use super::{bad_prefix::table_bad_prefixes, reduce, EndoSequence};
use crate::error::{Error, Result};
use crate::extension::Extender;
use crate::structures::{Homomorphism, Pairing, PartialAssignment, Structure};
use crate::treewidth::{decompose_subset, TreeDecomposition};

/// One enumerated homomorphism together with the level at which it is
/// elementary (its index).
#[derive(Debug, Clone)]
pub struct Emission<'e> {
    pub level: usize,
    pub homomorphism: &'e Homomorphism,
}

struct Engine<'a> {
    seq: &'a EndoSequence,
    ext: Extender<'a>,
    pairing: Pairing<'a>,
    /// Universe-ordered `A_i \ A_{i+1}`, and `A_n` for the last level.
    differences: Vec<Vec<usize>>,
    /// Decomposition of each difference.
    decompositions: Vec<TreeDecomposition>,
    /// `cumulative[i][x] = Φ_i(x)`.
    cumulative: Vec<Vec<usize>>,
    /// `fibers[t][z]`: members of `A_t` sent to `z` by `φ_{t+1}`, for `t < n`.
    fibers: Vec<Vec<Vec<usize>>>,
    /// `(symbol, tuple)` of `A[A_{t+1}]`, for `t < n`.
    inner: Vec<Vec<(usize, Vec<usize>)>>,
    /// Bad prefixes of the target relation paired with each source symbol.
    bad: Vec<Vec<Vec<usize>>>,
    check_parents: bool,
}

impl<'a> Engine<'a> {
    fn new(a: &'a Structure, b: &'a Structure, seq: &'a EndoSequence) -> Result<Self> {
        seq.validate(a)?;
        let pairing = Pairing::new(a, b)?;
        let ext = Extender::new(a, b)?;
        let n = seq.depth();
        let mut decompositions = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let d = decompose_subset(a, &seq.difference_mask(i), seq.width())?
                .ok_or(Error::WidthExceeded { k: seq.width() })?;
            decompositions.push(d);
        }
        let mut fibers = Vec::with_capacity(n);
        let mut inner = Vec::with_capacity(n);
        for t in 0..n {
            let mut f = vec![Vec::new(); a.len()];
            for x in seq.members(t) {
                f[seq.map(t + 1).get(x).expect("validated")].push(x);
            }
            fibers.push(f);
            let level = seq.level(t + 1);
            inner.push(
                a.tuples()
                    .filter(|(_, tuple)| tuple.iter().all(|&x| level[x]))
                    .map(|(s, tuple)| (s, tuple.to_vec()))
                    .collect(),
            );
        }
        let bad = (0..a.vocabulary().len())
            .map(|s| match pairing.target_table(s) {
                Some(table) => table_bad_prefixes(table, b.len()),
                None => Vec::new(),
            })
            .collect();
        Ok(Engine {
            seq,
            ext,
            pairing,
            differences: (0..=n).map(|i| seq.difference(i)).collect(),
            decompositions,
            cumulative: (0..=n).map(|i| seq.cumulative(i)).collect(),
            fibers,
            inner,
            bad,
            check_parents: cfg!(debug_assertions),
        })
    }

    fn target_len(&self) -> usize {
        self.ext.target().len()
    }

    /// Decomposition covering the free part of `seed` on level `t`.
    fn decomposition_for(&self, t: usize, seed: &[Option<usize>]) -> Result<Cow<'_, TreeDecomposition>> {
        let level = self.seq.level(t);
        let diff = self.seq.difference_mask(t);
        let free: Vec<bool> = (0..seed.len()).map(|x| level[x] && seed[x].is_none()).collect();
        if free.iter().zip(&diff).all(|(&f, &d)| !f || d) {
            return Ok(Cow::Borrowed(&self.decompositions[t]));
        }
        let d = decompose_subset(self.ext.source(), &free, self.seq.width())?
            .ok_or(Error::WidthExceeded { k: self.seq.width() })?;
        Ok(Cow::Owned(d))
    }

    /// Does `seed` (a partial homomorphism inside `A_t`) extend to an
    /// elementary homomorphism of `A_t`?
    fn elementary_ok(&self, t: usize, seed: &[Option<usize>], td: &TreeDecomposition) -> bool {
        let region = self.seq.level(t);
        if !self.ext.extendable(region, seed, td) {
            return false;
        }
        if t == self.seq.depth() {
            return true;
        }
        let nb = self.target_len();
        let fibers = &self.fibers[t];

        // Fiber values forced by the seed; a split fiber is already elementary.
        let mut forced: Vec<Option<usize>> = vec![None; seed.len()];
        for (z, fiber) in fibers.iter().enumerate() {
            for &x in fiber {
                if let Some(v) = seed[x] {
                    match forced[z] {
                        None => forced[z] = Some(v),
                        Some(w) if w != v => return true,
                        Some(_) => {}
                    }
                }
            }
        }
        // A violated tuple among fully forced fibers is locked in as well.
        let mut image = Vec::new();
        for (s, tuple) in &self.inner[t] {
            image.clear();
            image.extend(tuple.iter().map_while(|&z| forced[z]));
            if image.len() == tuple.len() && !self.pairing.target_contains(*s, &image) {
                return true;
            }
        }

        let mut pinned = seed.to_vec();
        // (a) split some fiber.
        for (z, fiber) in fibers.iter().enumerate() {
            if fiber.len() < 2 || fiber.iter().all(|&x| seed[x].is_some()) {
                continue;
            }
            match forced[z] {
                Some(c) => {
                    for &y in fiber.iter().filter(|&&y| seed[y].is_none()) {
                        for v in (0..nb).filter(|&v| v != c) {
                            pinned[y] = Some(v);
                            if self.ext.extendable(region, &pinned, td) {
                                return true;
                            }
                        }
                        pinned[y] = None;
                    }
                }
                None => {
                    let x0 = fiber[0];
                    for u in 0..nb {
                        pinned[x0] = Some(u);
                        for &y in &fiber[1..] {
                            for v in (0..nb).filter(|&v| v != u) {
                                pinned[y] = Some(v);
                                if self.ext.extendable(region, &pinned, td) {
                                    return true;
                                }
                            }
                            pinned[y] = None;
                        }
                    }
                    pinned[x0] = None;
                }
            }
        }
        // (b) keep fibers constant but break a tuple of A[A_{t+1}] at one of
        // its bad prefixes, pinning each fiber through its first member.
        let mut touched = Vec::new();
        for (s, tuple) in &self.inner[t] {
            if tuple.iter().all(|&z| forced[z].is_some()) {
                continue;
            }
            'prefixes: for prefix in &self.bad[*s] {
                for x in touched.drain(..) {
                    pinned[x] = seed[x];
                }
                for (&z, &v) in tuple.iter().zip(prefix) {
                    if let Some(c) = forced[z] {
                        if c != v {
                            continue 'prefixes;
                        }
                        continue;
                    }
                    let rep = fibers[z][0];
                    match pinned[rep] {
                        Some(w) if w != v => continue 'prefixes,
                        Some(_) => {}
                        None => {
                            pinned[rep] = Some(v);
                            touched.push(rep);
                        }
                    }
                }
                if self.ext.extendable(region, &pinned, td) {
                    return true;
                }
            }
        }
        false
    }

    fn cached_ok(&self, t: usize, seed: &[Option<usize>]) -> bool {
        self.elementary_ok(t, seed, &self.decompositions[t])
    }

    fn enum_level(
        &self,
        i: usize,
        j: usize,
        values: &mut Vec<Option<usize>>,
        depth: usize,
        sink: &mut dyn FnMut(&Emission<'_>) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        let Some(&x) = self.differences[i].get(j) else {
            return self.visit(i, values, depth, sink);
        };
        for v in 0..self.target_len() {
            values[x] = Some(v);
            if self.cached_ok(i, values) {
                if let ControlFlow::Break(()) = self.enum_level(i, j + 1, values, depth, sink) {
                    values[x] = None;
                    return ControlFlow::Break(());
                }
            }
        }
        values[x] = None;
        ControlFlow::Continue(())
    }

    /// Emits the elementary `ψ* = values` of level `i` and walks its children.
    fn visit(
        &self,
        i: usize,
        values: &[Option<usize>],
        depth: usize,
        sink: &mut dyn FnMut(&Emission<'_>) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        let emit = |sink: &mut dyn FnMut(&Emission<'_>) -> ControlFlow<()>| {
            let hom = Homomorphism(
                self.cumulative[i]
                    .iter()
                    .map(|&y| values[y].expect("total on its level"))
                    .collect(),
            );
            if self.check_parents {
                debug_assert_eq!(self.index(&hom), i, "an emitted homomorphism has exactly one parent");
            }
            sink(&Emission {
                level: i,
                homomorphism: &hom,
            })
        };
        if depth % 2 == 0 {
            emit(sink)?;
        }
        let mut g = values.to_vec();
        for child in (0..i).rev() {
            // g is ψ* ∘ φ_i ∘ … ∘ φ_{child+2}, defined on A_{child+1}.
            let mut seed = g.clone();
            if self.cached_ok(child, &seed) {
                self.enum_level(child, 0, &mut seed, depth + 1, sink)?;
            }
            let phi = self.seq.map(child + 1);
            g = (0..g.len()).map(|x| phi.get(x).and_then(|y| g[y])).collect();
        }
        if depth % 2 == 1 {
            emit(sink)?;
        }
        ControlFlow::Continue(())
    }

    fn index(&self, hom: &Homomorphism) -> usize {
        let mut values: Vec<Option<usize>> = hom.images().iter().copied().map(Some).collect();
        let mut t = 0;
        while t < self.seq.depth() {
            match reduce(&values, t, self.seq, &self.pairing) {
                Some(next) => values = next,
                None => break,
            }
            t += 1;
        }
        t
    }
}

fn check_partial(seed: &PartialAssignment, t: usize, seq: &EndoSequence, a: &Structure, b: &Structure) -> Result<()> {
    if seed.len() != a.len() || t > seq.depth() {
        return Err(Error::Domain("seed or level does not fit the sequence".into()));
    }
    if let Some(x) = seed.domain().find(|&x| !seq.level(t)[x]) {
        return Err(Error::Domain(format!("seed fixes `{}` outside level {t}", a.element_name(x))));
    }
    if let Some(v) = seed.values().iter().flatten().find(|&&v| v >= b.len()) {
        return Err(Error::Domain(format!("seed value {v} outside the target")));
    }
    Ok(())
}

/// Does `seed` extend to an elementary homomorphism of `A_t`?
pub fn elementary_ext(
    a: &Structure,
    b: &Structure,
    seq: &EndoSequence,
    t: usize,
    seed: &PartialAssignment,
) -> Result<bool> {
    let engine = Engine::new(a, b, seq)?;
    check_partial(seed, t, seq, a, b)?;
    if !engine.pairing.preserves(seed.values()) {
        return Err(Error::NotAHomomorphism("the seed does not preserve the tuples it covers".into()));
    }
    let td = engine.decomposition_for(t, seed.values())?;
    Ok(engine.elementary_ok(t, seed.values(), &td))
}

/// Enumerates every elementary homomorphism of `A_i` extending `psi` and
/// all of their descendants. `psi` must be defined on `A_{i+1}` plus a
/// prefix of `A_i \ A_{i+1}` (for the last level, a prefix of `A_n`).
///
/// Returns the number of emissions.
pub fn elementary_enum(
    a: &Structure,
    b: &Structure,
    seq: &EndoSequence,
    i: usize,
    psi: &PartialAssignment,
    mut sink: impl FnMut(&Emission<'_>) -> ControlFlow<()>,
) -> Result<u64> {
    let engine = Engine::new(a, b, seq)?;
    check_partial(psi, i, seq, a, b)?;
    let diff = &engine.differences[i];
    let j = diff.iter().take_while(|&&x| psi.is_defined(x)).count();
    let inner_defined = (0..a.len()).all(|x| !seq.level(i)[x] || diff.contains(&x) || psi.is_defined(x));
    if !inner_defined || diff[j..].iter().any(|&x| psi.is_defined(x)) {
        return Err(Error::Domain(format!("seed is not of the form A_{{{i},j}}")));
    }
    let mut values = psi.values().to_vec();
    let mut count = 0u64;
    if engine.pairing.preserves(&values) && engine.cached_ok(i, &values) {
        let _ = engine.enum_level(i, j, &mut values, 0, &mut |e| {
            count += 1;
            sink(e)
        });
    }
    Ok(count)
}

/// Enumerates `Hom(A, B)` along a validated width-k sequence, each
/// homomorphism exactly once. Returns the number of emissions; the sink can
/// stop the run early with `ControlFlow::Break`.
pub fn enumerate_wpd(
    a: &Structure,
    b: &Structure,
    seq: &EndoSequence,
    sink: impl FnMut(&Emission<'_>) -> ControlFlow<()>,
) -> Result<u64> {
    let root = PartialAssignment::empty(a.len());
    elementary_enum(a, b, seq, seq.depth(), &root, sink)
}
