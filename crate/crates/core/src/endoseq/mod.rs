//! Width-k endomorphism sequences `A = A₀ ⊃ A₁ ⊃ … ⊃ A_n` and the
//! enumeration engine built on them.
//!
//! Every homomorphism `φ: A → B` factors as `ψ ∘ φ_t ∘ … ∘ φ₁` for a unique
//! largest `t` (its index) and a unique `ψ` on `A_t`, which is then
//! elementary: it does not factor through `φ_{t+1}`. Enumerating all
//! elementary homomorphisms of every level therefore enumerates `Hom(A, B)`
//! exactly once.

mod bad_prefix;
mod enumerate;

pub use bad_prefix::{bad_prefixes, table_bad_prefixes, BadPrefix, DenseCodec};
pub use enumerate::{elementary_enum, elementary_ext, enumerate_wpd, Emission};

use crate::error::{Error, Result};
use crate::structures::{strip_comment, Homomorphism, Pairing, PartialAssignment, Structure};
use crate::treewidth::decompose_subset;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EndoSequence {
    width: usize,
    /// Membership masks; `levels[0]` is the whole universe.
    levels: Vec<Vec<bool>>,
    /// `maps[i - 1]` is `φ_i`, defined exactly on `A_{i−1}`.
    maps: Vec<PartialAssignment>,
}

impl EndoSequence {
    /// The one-level sequence `A₀ = A`, valid whenever `tw(A) ≤ k`.
    pub fn trivial(universe: usize, width: usize) -> Self {
        EndoSequence {
            width,
            levels: vec![vec![true; universe]],
            maps: Vec::new(),
        }
    }

    /// Assembles a sequence without checking conditions beyond the shape;
    /// see [`validate`](Self::validate).
    pub fn new(levels: Vec<Vec<bool>>, maps: Vec<PartialAssignment>, width: usize) -> Result<Self> {
        if levels.is_empty() || levels.len() != maps.len() + 1 {
            return Err(Error::sequence(
                "shape",
                format!("{} levels need {} maps, got {}", levels.len(), levels.len().saturating_sub(1), maps.len()),
            ));
        }
        let n = levels[0].len();
        if levels.iter().any(|l| l.len() != n) || maps.iter().any(|m| m.len() != n) {
            return Err(Error::sequence("shape", "levels and maps must cover the same universe"));
        }
        Ok(EndoSequence { width, levels, maps })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn set_width(&mut self, width: usize) {
        self.width = width;
    }

    /// `n`, the number of maps.
    pub fn depth(&self) -> usize {
        self.maps.len()
    }

    pub fn universe(&self) -> usize {
        self.levels[0].len()
    }

    pub fn level(&self, i: usize) -> &[bool] {
        &self.levels[i]
    }

    pub fn members(&self, i: usize) -> Vec<usize> {
        (0..self.universe()).filter(|&x| self.levels[i][x]).collect()
    }

    /// `φ_i` for `1 ≤ i ≤ n`.
    pub fn map(&self, i: usize) -> &PartialAssignment {
        &self.maps[i - 1]
    }

    /// `A_i \ A_{i+1}` in universe order, or `A_n` itself at the last level.
    pub fn difference(&self, i: usize) -> Vec<usize> {
        (0..self.universe())
            .filter(|&x| self.levels[i][x] && (i == self.depth() || !self.levels[i + 1][x]))
            .collect()
    }

    fn difference_mask(&self, i: usize) -> Vec<bool> {
        let mut mask = self.levels[i].clone();
        if i < self.depth() {
            for (m, &inner) in mask.iter_mut().zip(&self.levels[i + 1]) {
                *m &= !inner;
            }
        }
        mask
    }

    /// `Φ_i = φ_i ∘ … ∘ φ₁`, a total map from `A` onto `A_i`.
    pub fn cumulative(&self, i: usize) -> Vec<usize> {
        let mut phi: Vec<usize> = (0..self.universe()).collect();
        for m in &self.maps[..i] {
            for v in phi.iter_mut() {
                *v = m.get(*v).expect("validated sequence");
            }
        }
        phi
    }

    /// Checks the chain, map, and width conditions, naming the first one
    /// that fails.
    pub fn validate(&self, a: &Structure) -> Result<()> {
        let n = self.depth();
        if self.universe() != a.len() {
            return Err(Error::sequence(
                "shape",
                format!("sequence covers {} elements, structure has {}", self.universe(), a.len()),
            ));
        }
        if !self.levels[0].iter().all(|&x| x) {
            return Err(Error::sequence("chain", "level 0 must be the whole universe"));
        }
        for i in 1..=n {
            let (outer, inner) = (&self.levels[i - 1], &self.levels[i]);
            if inner.iter().zip(outer).any(|(&x, &y)| x && !y) || inner == outer {
                return Err(Error::sequence("chain", format!("level {i} is not a proper subset of level {}", i - 1)));
            }
        }
        if n > 0 && !self.levels[n].contains(&true) {
            return Err(Error::sequence("chain", "the last level is empty"));
        }
        let pairing = Pairing::new(a, a)?;
        for i in 1..=n {
            let (outer, inner) = (&self.levels[i - 1], &self.levels[i]);
            let map = &self.maps[i - 1];
            let mut hit = vec![false; a.len()];
            for x in 0..a.len() {
                match (outer[x], map.get(x)) {
                    (true, Some(y)) if y < a.len() && inner[y] => hit[y] = true,
                    (true, Some(y)) if y < a.len() => {
                        return Err(Error::sequence(
                            "map domain",
                            format!("φ{i} sends `{}` outside level {i}", a.element_name(x)),
                        ))
                    }
                    (true, _) => {
                        return Err(Error::sequence(
                            "map domain",
                            format!("φ{i} is undefined or out of range on `{}`", a.element_name(x)),
                        ))
                    }
                    (false, Some(_)) => {
                        return Err(Error::sequence(
                            "map domain",
                            format!("φ{i} is defined on `{}` outside level {}", a.element_name(x), i - 1),
                        ))
                    }
                    (false, None) => {}
                }
            }
            if !pairing.preserves(map.values()) {
                return Err(Error::sequence("homomorphism", format!("φ{i} does not preserve every tuple")));
            }
            if let Some(y) = (0..a.len()).find(|&y| inner[y] && !hit[y]) {
                return Err(Error::sequence(
                    "surjective",
                    format!("no element of level {} maps to `{}` under φ{i}", i - 1, a.element_name(y)),
                ));
            }
        }
        for i in 0..n {
            if decompose_subset(a, &self.difference_mask(i), self.width)?.is_none() {
                return Err(Error::sequence(
                    "difference width",
                    format!("level {i} minus level {} has tree width above {}", i + 1, self.width),
                ));
            }
        }
        if decompose_subset(a, &self.levels[n], self.width)?.is_none() {
            return Err(Error::sequence(
                "final width",
                format!("level {n} has tree width above {}", self.width),
            ));
        }
        Ok(())
    }

    /// Smallest width for which the width conditions hold.
    pub fn required_width(&self, a: &Structure) -> Result<usize> {
        let mut masks: Vec<Vec<bool>> = (0..self.depth()).map(|i| self.difference_mask(i)).collect();
        masks.push(self.levels[self.depth()].clone());
        let mut k = 0;
        for mask in &masks {
            while decompose_subset(a, mask, k)?.is_none() {
                k += 1;
            }
        }
        Ok(k)
    }

    /// Reads `width`, `level` and `map` lines against the universe of `a`.
    ///
    /// Level 0 defaults to the whole universe. Without a `width` line the
    /// smallest width that fits is used.
    pub fn parse(text: &str, a: &Structure) -> Result<Self> {
        let mut width = None;
        let mut levels: Vec<Option<Vec<bool>>> = Vec::new();
        let mut maps: Vec<Option<PartialAssignment>> = Vec::new();
        let element = |line: usize, id: &str| {
            a.element_index(id).ok_or_else(|| Error::UnknownElement {
                line,
                element: id.to_string(),
            })
        };
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let mut words = strip_comment(raw).split_whitespace();
            let Some(keyword) = words.next() else { continue };
            let mut index = |what: &str| -> Result<usize> {
                words
                    .next()
                    .and_then(|w| w.parse().ok())
                    .ok_or_else(|| Error::syntax(line, format!("`{what}` needs a numeric index")))
            };
            match keyword {
                "width" => {
                    let k = index("width")?;
                    if width.replace(k).is_some() {
                        return Err(Error::syntax(line, "repeated `width`"));
                    }
                }
                "level" => {
                    let i = index("level")?;
                    if levels.len() <= i {
                        levels.resize(i + 1, None);
                    }
                    let mask = levels[i].get_or_insert_with(|| vec![false; a.len()]);
                    for id in words {
                        let x = element(line, id)?;
                        if std::mem::replace(&mut mask[x], true) {
                            return Err(Error::Duplicate { line, what: "level member", name: id.to_string() });
                        }
                    }
                }
                "map" => {
                    let i = index("map")?;
                    if i == 0 {
                        return Err(Error::syntax(line, "maps are numbered from 1"));
                    }
                    if maps.len() < i {
                        maps.resize(i, None);
                    }
                    let map = maps[i - 1].get_or_insert_with(|| PartialAssignment::empty(a.len()));
                    for pair in words {
                        let (src, dst) = pair
                            .split_once(':')
                            .ok_or_else(|| Error::syntax(line, format!("expected `src:dst`, got `{pair}`")))?;
                        let (x, y) = (element(line, src)?, element(line, dst)?);
                        if map.is_defined(x) {
                            return Err(Error::Duplicate { line, what: "map source", name: src.to_string() });
                        }
                        map.set(x, y);
                    }
                }
                other => return Err(Error::syntax(line, format!("unknown keyword `{other}`"))),
            }
        }
        if levels.is_empty() {
            levels.push(None);
        }
        if levels[0].is_none() {
            levels[0] = Some(vec![true; a.len()]);
        }
        let n = levels.len() - 1;
        if maps.len() > n {
            return Err(Error::sequence("shape", format!("map {} has no level {}", maps.len(), maps.len())));
        }
        maps.resize(n, None);
        let levels: Vec<Vec<bool>> = levels
            .into_iter()
            .enumerate()
            .map(|(i, l)| l.ok_or_else(|| Error::sequence("shape", format!("level {i} is missing"))))
            .collect::<Result<_>>()?;
        let maps: Vec<PartialAssignment> = maps
            .into_iter()
            .enumerate()
            .map(|(i, m)| m.ok_or_else(|| Error::sequence("shape", format!("map {} is missing", i + 1))))
            .collect::<Result<_>>()?;
        let mut seq = EndoSequence::new(levels, maps, 0)?;
        seq.width = match width {
            Some(k) => k,
            None => seq.required_width(a)?,
        };
        Ok(seq)
    }

    pub fn serialize(&self, a: &Structure) -> String {
        let mut out = format!("width {}\n", self.width);
        for i in 0..=self.depth() {
            out.push_str(&format!("level {i}"));
            for x in self.members(i) {
                out.push(' ');
                out.push_str(a.element_name(x));
            }
            out.push('\n');
        }
        for i in 1..=self.depth() {
            out.push_str(&format!("map {i}"));
            for x in self.members(i - 1) {
                let y = self.maps[i - 1].get(x).expect("total on the previous level");
                out.push_str(&format!(" {}:{}", a.element_name(x), a.element_name(y)));
            }
            out.push('\n');
        }
        out
    }
}

/// Boolean form of [`EndoSequence::validate`].
pub fn validate_sequence(a: &Structure, seq: &EndoSequence) -> bool {
    seq.validate(a).is_ok()
}

/// `ψ' ` on `A_{t+1}` with `ψ = ψ' ∘ φ_{t+1}`, if `ψ` is reducible.
pub(crate) fn reduce(psi: &[Option<usize>], t: usize, seq: &EndoSequence, pairing: &Pairing<'_>) -> Option<Vec<Option<usize>>> {
    let phi = seq.map(t + 1);
    let mut reduced: Vec<Option<usize>> = vec![None; psi.len()];
    for x in 0..psi.len() {
        if !seq.levels[t][x] {
            continue;
        }
        let z = phi.get(x).expect("defined on its level");
        let v = psi[x].expect("total on its level");
        match reduced[z] {
            None => reduced[z] = Some(v),
            Some(w) if w != v => return None,
            Some(_) => {}
        }
    }
    pairing.preserves(&reduced).then_some(reduced)
}

fn check_on_level(psi: &PartialAssignment, t: usize, seq: &EndoSequence, a: &Structure, b: &Structure) -> Result<()> {
    if psi.len() != a.len() || seq.universe() != a.len() {
        return Err(Error::Domain("assignment and sequence must cover the source universe".into()));
    }
    if t > seq.depth() {
        return Err(Error::Domain(format!("level {t} beyond the last level {}", seq.depth())));
    }
    if (0..a.len()).any(|x| seq.levels[t][x] != psi.is_defined(x)) {
        return Err(Error::Domain(format!("assignment must be defined exactly on level {t}")));
    }
    if let Some(v) = psi.values().iter().flatten().find(|&&v| v >= b.len()) {
        return Err(Error::Domain(format!("value {v} outside the target")));
    }
    Ok(())
}

/// The index `t` of `φ` and its factor `ψ` on `A_t`.
pub fn index_of(
    phi: &Homomorphism,
    a: &Structure,
    b: &Structure,
    seq: &EndoSequence,
) -> Result<(usize, PartialAssignment)> {
    let pairing = Pairing::new(a, b)?;
    let psi = PartialAssignment::from(phi);
    check_on_level(&psi, 0, seq, a, b)?;
    if !pairing.preserves(psi.values()) {
        return Err(Error::NotAHomomorphism("cannot index a non-homomorphism".into()));
    }
    let mut values = psi.values().to_vec();
    let mut t = 0;
    while t < seq.depth() {
        match reduce(&values, t, seq, &pairing) {
            Some(next) => {
                values = next;
                t += 1;
            }
            None => break,
        }
    }
    Ok((t, PartialAssignment::from_values(values)))
}

/// Is `ψ: A[A_t] → B` elementary, i.e. not of the form `ψ' ∘ φ_{t+1}`?
/// Every homomorphism of the last level is.
pub fn is_elementary(psi: &PartialAssignment, t: usize, a: &Structure, b: &Structure, seq: &EndoSequence) -> Result<bool> {
    check_on_level(psi, t, seq, a, b)?;
    let pairing = Pairing::new(a, b)?;
    if !pairing.preserves(psi.values()) {
        return Err(Error::NotAHomomorphism(format!("not a homomorphism of level {t}")));
    }
    Ok(t == seq.depth() || reduce(psi.values(), t, seq, &pairing).is_none())
}
