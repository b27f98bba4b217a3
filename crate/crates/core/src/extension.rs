//! Deciding whether a partial homomorphism extends over a region.
//!
//! Tuples of `A[X₂]` are compiled against the seed: entries already fixed by
//! the seed are substituted, and what remains is a constraint on the free
//! entries, which always form a clique of the Gaifman graph and therefore sit
//! in a common bag. A bottom-up pass over a tree decomposition of the free
//! part then decides satisfiability with tables of at most `|B|^(k+1)` rows
//! per bag.

use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};
use crate::structures::{Pairing, PartialAssignment, Structure};
use crate::treewidth::{decompose_subset, validate_subset, TreeDecomposition};

/// Does `seed` (defined on X₁) extend to a homomorphism from `A[region]` to `B`?
#[derive(Debug, Clone)]
pub struct ExtensionQuery<'a> {
    source: &'a Structure,
    target: &'a Structure,
    region: Vec<bool>,
    seed: PartialAssignment,
}

impl<'a> ExtensionQuery<'a> {
    pub fn new(
        source: &'a Structure,
        target: &'a Structure,
        region: Vec<bool>,
        seed: PartialAssignment,
    ) -> Result<Self> {
        if region.len() != source.len() || seed.len() != source.len() {
            return Err(Error::Domain(format!(
                "region and seed must cover the {} source elements",
                source.len()
            )));
        }
        if let Some(x) = seed.domain().find(|&x| !region[x]) {
            return Err(Error::Domain(format!(
                "seed fixes `{}` outside the region",
                source.element_name(x)
            )));
        }
        if let Some(v) = seed.values().iter().flatten().find(|&&v| v >= target.len()) {
            return Err(Error::Domain(format!("seed value {v} outside the target")));
        }
        Ok(ExtensionQuery {
            source,
            target,
            region,
            seed,
        })
    }

    /// The query with X₂ equal to the whole source universe.
    pub fn whole(source: &'a Structure, target: &'a Structure, seed: PartialAssignment) -> Result<Self> {
        Self::new(source, target, vec![true; source.len()], seed)
    }

    pub fn source(&self) -> &Structure {
        self.source
    }

    pub fn target(&self) -> &Structure {
        self.target
    }

    pub fn region(&self) -> &[bool] {
        &self.region
    }

    pub fn seed(&self) -> &PartialAssignment {
        &self.seed
    }

    /// X₂ \ X₁ as a mask.
    pub fn free_mask(&self) -> Vec<bool> {
        self.region
            .iter()
            .zip(self.seed.values())
            .map(|(&r, v)| r && v.is_none())
            .collect()
    }

    fn check_seed(&self, pairing: &Pairing<'_>) -> Result<()> {
        let restricted = self.seed.restrict(&self.region);
        if !pairing.preserves(restricted.values()) {
            return Err(Error::NotAHomomorphism(
                "the seed does not preserve the tuples it covers".into(),
            ));
        }
        Ok(())
    }

    fn free_decomposition(&self, k: usize) -> Result<TreeDecomposition> {
        decompose_subset(self.source, &self.free_mask(), k)?.ok_or(Error::WidthExceeded { k })
    }
}

/// Decides extendibility, computing an exact decomposition of width `k`.
pub fn homomorphism_ext(q: &ExtensionQuery<'_>, k: usize) -> Result<bool> {
    let pairing = Pairing::new(q.source, q.target)?;
    q.check_seed(&pairing)?;
    let td = q.free_decomposition(k)?;
    Ok(Extender::from_pairing(pairing).extendable(&q.region, q.seed.values(), &td))
}

/// Decides extendibility using a caller-supplied decomposition.
///
/// `td` may decompose any superset of the free part; it is restricted first
/// and then checked.
pub fn homomorphism_ext_with(q: &ExtensionQuery<'_>, td: &TreeDecomposition) -> Result<bool> {
    let pairing = Pairing::new(q.source, q.target)?;
    q.check_seed(&pairing)?;
    let free = q.free_mask();
    let td = td.restrict(&free);
    if !validate_subset(q.source, &free, &td) {
        return Err(Error::InvalidDecomposition(
            "does not decompose the free part of the region".into(),
        ));
    }
    Ok(Extender::from_pairing(pairing).extendable(&q.region, q.seed.values(), &td))
}

/// The least extending homomorphism of `A[X₂]`, comparing free elements in
/// universe order and values in target order.
pub fn first_extension(q: &ExtensionQuery<'_>, k: usize) -> Result<Option<PartialAssignment>> {
    let pairing = Pairing::new(q.source, q.target)?;
    q.check_seed(&pairing)?;
    let td = q.free_decomposition(k)?;
    let ext = Extender::from_pairing(pairing);
    Ok(ext.first_extension(&q.region, q.seed.values(), &td))
}

pub fn first_extension_with(q: &ExtensionQuery<'_>, td: &TreeDecomposition) -> Result<Option<PartialAssignment>> {
    let pairing = Pairing::new(q.source, q.target)?;
    q.check_seed(&pairing)?;
    let free = q.free_mask();
    let td = td.restrict(&free);
    if !validate_subset(q.source, &free, &td) {
        return Err(Error::InvalidDecomposition(
            "does not decompose the free part of the region".into(),
        ));
    }
    Ok(Extender::from_pairing(pairing).first_extension(&q.region, q.seed.values(), &td))
}

/// A tuple of `A[X₂]` reduced to its free entries.
struct Constraint {
    vars: Vec<usize>,
    allowed: HashSet<Vec<usize>>,
}

/// Reusable decision procedure for one `(A, B)` pair.
#[derive(Debug, Clone)]
pub(crate) struct Extender<'a> {
    pairing: Pairing<'a>,
}

impl<'a> Extender<'a> {
    pub fn new(source: &'a Structure, target: &'a Structure) -> Result<Self> {
        Ok(Extender {
            pairing: Pairing::new(source, target)?,
        })
    }

    fn from_pairing(pairing: Pairing<'a>) -> Self {
        Extender { pairing }
    }

    pub fn source(&self) -> &'a Structure {
        self.pairing.source
    }

    pub fn target(&self) -> &'a Structure {
        self.pairing.target
    }

    /// Is there a homomorphism of `A[region]` agreeing with `seed`?
    ///
    /// `seed` may be defined outside `region`; those values are ignored.
    /// `td` must cover the free part `region \ dom(seed)`, possibly with
    /// extra vertices that get filtered out.
    pub fn extendable(&self, region: &[bool], seed: &[Option<usize>], td: &TreeDecomposition) -> bool {
        let free: Vec<bool> = region
            .iter()
            .zip(seed)
            .map(|(&r, v)| r && v.is_none())
            .collect();
        let Some(constraints) = self.compile(region, seed, &free) else {
            return false;
        };
        self.solve(&free, &constraints, td)
    }

    pub fn first_extension(
        &self,
        region: &[bool],
        seed: &[Option<usize>],
        td: &TreeDecomposition,
    ) -> Option<PartialAssignment> {
        if !self.extendable(region, seed, td) {
            return None;
        }
        let mut values: Vec<Option<usize>> = seed
            .iter()
            .zip(region)
            .map(|(&v, &r)| if r { v } else { None })
            .collect();
        let free: Vec<usize> = (0..values.len()).filter(|&x| region[x] && values[x].is_none()).collect();
        for x in free {
            let mut found = false;
            for b in 0..self.target().len() {
                values[x] = Some(b);
                if self.extendable(region, &values, td) {
                    found = true;
                    break;
                }
            }
            debug_assert!(found, "an extendable seed has an extendable refinement");
            if !found {
                return None;
            }
        }
        Some(PartialAssignment::from_values(values))
    }

    /// Substitutes the seed into every tuple of `A[region]`.
    ///
    /// Returns `None` when some tuple is already violated.
    fn compile(&self, region: &[bool], seed: &[Option<usize>], free: &[bool]) -> Option<Vec<Constraint>> {
        let mut constraints = Vec::new();
        let mut image = Vec::new();
        for (s, tuple) in self.source().tuples() {
            if tuple.iter().any(|&x| !region[x]) {
                continue;
            }
            if tuple.iter().all(|&x| !free[x]) {
                image.clear();
                image.extend(tuple.iter().map(|&x| seed[x].expect("fixed")));
                if !self.pairing.target_contains(s, &image) {
                    return None;
                }
                continue;
            }
            let mut vars: Vec<usize> = tuple.iter().copied().filter(|&x| free[x]).collect();
            vars.sort_unstable();
            vars.dedup();
            let mut allowed = HashSet::new();
            if let Some(table) = self.pairing.target_table(s) {
                let mut proj = vec![usize::MAX; vars.len()];
                'tuples: for t in table.tuples() {
                    proj.iter_mut().for_each(|p| *p = usize::MAX);
                    for (p, &x) in tuple.iter().enumerate() {
                        if free[x] {
                            let slot = vars.binary_search(&x).expect("free var");
                            if proj[slot] == usize::MAX {
                                proj[slot] = t[p];
                            } else if proj[slot] != t[p] {
                                continue 'tuples;
                            }
                        } else if seed[x] != Some(t[p]) {
                            continue 'tuples;
                        }
                    }
                    allowed.insert(proj.clone());
                }
            }
            if allowed.is_empty() {
                return None;
            }
            constraints.push(Constraint { vars, allowed });
        }
        Some(constraints)
    }

    fn solve(&self, free: &[bool], constraints: &[Constraint], td: &TreeDecomposition) -> bool {
        let n = free.len();
        let nb = self.target().len();
        let free_count = free.iter().filter(|&&f| f).count();
        if free_count == 0 {
            return true;
        }
        if nb == 0 {
            return false;
        }

        // Unary constraints become domains.
        let mut domain: HashMap<usize, Vec<bool>> = HashMap::new();
        let mut wide: Vec<&Constraint> = Vec::new();
        for c in constraints {
            if let [x] = c.vars[..] {
                let d = domain.entry(x).or_insert_with(|| vec![true; nb]);
                for (b, ok) in d.iter_mut().enumerate() {
                    *ok &= c.allowed.contains(&vec![b]);
                }
            } else {
                wide.push(c);
            }
        }
        if domain.values().any(|d| !d.contains(&true)) {
            return false;
        }
        if wide.is_empty() {
            return true;
        }

        let bags: Vec<Vec<usize>> = td
            .bags()
            .iter()
            .map(|b| b.iter().copied().filter(|&v| v < n && free[v]).collect())
            .collect();
        let mut nodes_of: HashMap<usize, Vec<usize>> = HashMap::new();
        for (node, bag) in bags.iter().enumerate() {
            for &v in bag {
                nodes_of.entry(v).or_default().push(node);
            }
        }

        // Each wide constraint is checked at one bag containing its scope.
        let mut at_node: Vec<Vec<&Constraint>> = vec![Vec::new(); bags.len()];
        for c in wide {
            let home = nodes_of.get(&c.vars[0]).and_then(|nodes| {
                nodes
                    .iter()
                    .copied()
                    .find(|&node| c.vars.iter().all(|v| bags[node].binary_search(v).is_ok()))
            });
            let node = home.expect("tree decomposition covers every constraint scope");
            at_node[node].push(c);
        }

        let children = td.children();
        let full_domain = vec![true; nb];
        // Messages: for each node, the feasible projections onto its parent separator.
        let mut messages: Vec<Option<(Vec<usize>, HashSet<Vec<usize>>)>> = vec![None; bags.len()];
        for node in (0..bags.len()).rev() {
            let bag = &bags[node];
            // Checks are (positions in bag, allowed set) triggered at the last position.
            let mut checks: Vec<Vec<(Vec<usize>, &HashSet<Vec<usize>>)>> = vec![Vec::new(); bag.len().max(1)];
            for c in &at_node[node] {
                let pos: Vec<usize> = c.vars.iter().map(|v| bag.binary_search(v).unwrap()).collect();
                let last = *pos.iter().max().unwrap();
                checks[last].push((pos, &c.allowed));
            }
            for &child in &children[node] {
                let (sep, allowed) = messages[child].as_ref().expect("children first");
                if allowed.is_empty() {
                    return false;
                }
                if sep.is_empty() {
                    continue;
                }
                let pos: Vec<usize> = sep.iter().map(|v| bag.binary_search(v).unwrap()).collect();
                let last = *pos.iter().max().unwrap();
                checks[last].push((pos, allowed));
            }

            let parent_sep: Vec<usize> = match td.parent(node) {
                Some(p) => bag.iter().copied().filter(|v| bags[p].binary_search(v).is_ok()).collect(),
                None => Vec::new(),
            };
            let sep_pos: Vec<usize> = parent_sep.iter().map(|v| bag.binary_search(v).unwrap()).collect();

            let domains: Vec<&Vec<bool>> = bag
                .iter()
                .map(|v| domain.get(v).unwrap_or(&full_domain))
                .collect();
            let mut out = HashSet::new();
            let mut assignment = vec![0usize; bag.len()];
            fill(&mut assignment, 0, &domains, &checks, &sep_pos, &mut out);
            if out.is_empty() {
                return false;
            }
            messages[node] = Some((parent_sep, out));
        }
        true
    }
}

fn fill(
    assignment: &mut Vec<usize>,
    depth: usize,
    domains: &[&Vec<bool>],
    checks: &[Vec<(Vec<usize>, &HashSet<Vec<usize>>)>],
    sep_pos: &[usize],
    out: &mut HashSet<Vec<usize>>,
) {
    if depth == assignment.len() {
        out.insert(sep_pos.iter().map(|&p| assignment[p]).collect());
        return;
    }
    let mut key = Vec::new();
    for (b, &ok) in domains[depth].iter().enumerate() {
        if !ok {
            continue;
        }
        assignment[depth] = b;
        let pass = checks[depth].iter().all(|(pos, allowed)| {
            key.clear();
            key.extend(pos.iter().map(|&p| assignment[p]));
            allowed.contains(&key)
        });
        if pass {
            fill(assignment, depth + 1, domains, checks, sep_pos, out);
        }
    }
}
