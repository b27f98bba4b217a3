//! Projections of homomorphisms onto a tuple of source elements.
//!
//! Values for `y₁, y₂, …` are chosen left to right in target order, each
//! kept only if the partial choice still extends to a homomorphism of the
//! whole source. Since every kept prefix extends, the search never
//! backtracks except after printing a solution.

use std::ops::ControlFlow;

use crate::error::{Error, Result};
use crate::extension::Extender;
use crate::structures::Structure;
use crate::treewidth::decompose;

#[derive(Debug, Clone)]
pub struct CqeInstance<'a> {
    source: &'a Structure,
    target: &'a Structure,
    projection: Vec<usize>,
}

impl<'a> CqeInstance<'a> {
    pub fn new(source: &'a Structure, target: &'a Structure, projection: Vec<usize>) -> Result<Self> {
        for (i, &y) in projection.iter().enumerate() {
            if y >= source.len() {
                return Err(Error::InvalidProjection(format!("element {y} is not in the source")));
            }
            if projection[..i].contains(&y) {
                return Err(Error::InvalidProjection(format!(
                    "`{}` is listed twice",
                    source.element_name(y)
                )));
            }
        }
        Ok(CqeInstance {
            source,
            target,
            projection,
        })
    }

    /// Resolves element names of the source.
    pub fn by_name(source: &'a Structure, target: &'a Structure, names: &[&str]) -> Result<Self> {
        let projection = names
            .iter()
            .map(|n| {
                source
                    .element_index(n)
                    .ok_or_else(|| Error::InvalidProjection(format!("unknown element `{n}`")))
            })
            .collect::<Result<_>>()?;
        Self::new(source, target, projection)
    }

    pub fn source(&self) -> &Structure {
        self.source
    }

    pub fn target(&self) -> &Structure {
        self.target
    }

    pub fn projection(&self) -> &[usize] {
        &self.projection
    }
}

/// Search counters, for checking the no-wasted-backtracking property.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CqeStats {
    pub emitted: u64,
    pub extension_checks: u64,
    /// Backtracks (prefix shrinking by one) before the first output.
    pub backtracks_before_first: usize,
    /// Most backtracks between two consecutive outputs, or after the last.
    pub max_backtracks_between: usize,
}

/// Emits every distinct restriction to `Y` of a homomorphism `A → B`, as
/// target values in `Y` order, lexicographically. Requires `tw(A) ≤ k`.
pub fn cqe_enumerate(
    inst: &CqeInstance<'_>,
    k: usize,
    sink: impl FnMut(&[usize]) -> ControlFlow<()>,
) -> Result<u64> {
    Ok(cqe_enumerate_traced(inst, k, sink)?.emitted)
}

/// [`cqe_enumerate`] that also reports its search counters.
pub fn cqe_enumerate_traced(
    inst: &CqeInstance<'_>,
    k: usize,
    mut sink: impl FnMut(&[usize]) -> ControlFlow<()>,
) -> Result<CqeStats> {
    let a = inst.source;
    let td = decompose(a, k)?.ok_or(Error::WidthExceeded { k })?;
    let ext = Extender::new(a, inst.target)?;
    let region = vec![true; a.len()];
    let nb = inst.target.len();
    let ys = &inst.projection;
    let l = ys.len();

    let mut stats = CqeStats::default();
    let mut values: Vec<Option<usize>> = vec![None; a.len()];
    stats.extension_checks += 1;
    if !ext.extendable(&region, &values, &td) {
        return Ok(stats);
    }
    // next[m]: first untried candidate for y_{m+1} under the current prefix.
    let mut next = vec![0usize; l + 1];
    let mut out = Vec::with_capacity(l);
    let mut m = 0;
    let mut backtracks = 0usize;
    loop {
        if m == l {
            out.clear();
            out.extend(ys.iter().map(|&y| values[y].expect("prefix is complete")));
            if stats.emitted == 0 {
                stats.backtracks_before_first = backtracks;
            } else {
                stats.max_backtracks_between = stats.max_backtracks_between.max(backtracks);
            }
            stats.emitted += 1;
            backtracks = 0;
            if sink(&out).is_break() || m == 0 {
                return Ok(stats);
            }
            m -= 1;
            values[ys[m]] = None;
            backtracks += 1;
            continue;
        }
        let y = ys[m];
        let mut advanced = false;
        while next[m] < nb {
            let b = next[m];
            next[m] += 1;
            values[y] = Some(b);
            stats.extension_checks += 1;
            if ext.extendable(&region, &values, &td) {
                advanced = true;
                break;
            }
        }
        if advanced {
            m += 1;
            next[m] = 0;
            continue;
        }
        values[y] = None;
        if m == 0 {
            stats.max_backtracks_between = stats.max_backtracks_between.max(backtracks);
            return Ok(stats);
        }
        m -= 1;
        values[ys[m]] = None;
        backtracks += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{brute_homs, brute_projections};
    use crate::structures::{generate_family, Family, Vocabulary};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeSet;

    fn run(inst: &CqeInstance<'_>, k: usize) -> (Vec<Vec<usize>>, CqeStats) {
        let mut out = Vec::new();
        let stats = cqe_enumerate_traced(inst, k, |v| {
            out.push(v.to_vec());
            ControlFlow::Continue(())
        })
        .unwrap();
        (out, stats)
    }

    #[test]
    fn path_endpoints_share_parity() {
        let p = generate_family(Family::Path, 2).unwrap();
        let k2 = generate_family(Family::Clique, 2).unwrap();
        let inst = CqeInstance::by_name(&p, &k2, &["v0", "v2"]).unwrap();
        let (out, _) = run(&inst, 1);
        assert_eq!(out, vec![vec![0, 0], vec![1, 1]]);
    }

    #[test]
    fn empty_projection() {
        let p = generate_family(Family::Path, 3).unwrap();
        let k2 = generate_family(Family::Clique, 2).unwrap();
        let k3 = generate_family(Family::Clique, 3).unwrap();
        assert_eq!(run(&CqeInstance::new(&p, &k2, vec![]).unwrap(), 1).0, vec![Vec::<usize>::new()]);
        assert!(run(&CqeInstance::new(&k3, &k2, vec![]).unwrap(), 2).0.is_empty());
    }

    #[test]
    fn full_projection_lists_every_homomorphism() {
        let c = generate_family(Family::Cycle, 5).unwrap();
        let k3 = generate_family(Family::Clique, 3).unwrap();
        let inst = CqeInstance::new(&c, &k3, (0..5).collect()).unwrap();
        let (out, _) = run(&inst, 2);
        let homs: Vec<Vec<usize>> = brute_homs(&c, &k3).unwrap().into_iter().map(|h| h.0).collect();
        assert_eq!(out, homs);
    }

    #[test]
    fn rejects_bad_input() {
        let k4 = generate_family(Family::Clique, 4).unwrap();
        let inst = CqeInstance::new(&k4, &k4, vec![0]).unwrap();
        assert!(matches!(cqe_enumerate(&inst, 2, |_| ControlFlow::Continue(())), Err(Error::WidthExceeded { k: 2 })));
        assert!(matches!(CqeInstance::new(&k4, &k4, vec![1, 1]), Err(Error::InvalidProjection(_))));
        assert!(matches!(CqeInstance::new(&k4, &k4, vec![4]), Err(Error::InvalidProjection(_))));
        assert!(CqeInstance::by_name(&k4, &k4, &["nope"]).is_err());
    }

    #[test]
    fn random_instances_match_the_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut done = 0;
        while done < 80 {
            let n = rng.gen_range(1..=6);
            let vocab = Vocabulary::new().with("E", 2).with("U", 1);
            let mut a = Structure::new("a", vocab.clone());
            for i in 0..n {
                a.add_element(format!("a{i}")).unwrap();
            }
            for x in 0..n {
                for y in 0..n {
                    if rng.gen_bool(0.25) {
                        a.add_tuple(0, &[x, y]).unwrap();
                    }
                }
            }
            if decompose(&a, 2).unwrap().is_none() {
                continue;
            }
            let mut b = Structure::new("b", vocab);
            let nb = rng.gen_range(1..=4);
            for i in 0..nb {
                b.add_element(format!("b{i}")).unwrap();
                if rng.gen_bool(0.5) {
                    b.add_tuple(1, &[i]).unwrap();
                }
            }
            for x in 0..nb {
                for y in 0..nb {
                    if rng.gen_bool(0.5) {
                        b.add_tuple(0, &[x, y]).unwrap();
                    }
                }
            }
            let mut ys: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).take(4).collect();
            if rng.gen_bool(0.5) {
                ys.reverse();
            }
            let inst = CqeInstance::new(&a, &b, ys.clone()).unwrap();
            let (out, stats) = run(&inst, 2);
            let expected: Vec<Vec<usize>> = brute_projections(&a, &b, &ys).unwrap().into_iter().collect();
            assert_eq!(out, expected);
            assert_eq!(out.iter().collect::<BTreeSet<_>>().len(), out.len());
            assert_eq!(stats.backtracks_before_first, 0);
            assert!(stats.max_backtracks_between <= ys.len());
            done += 1;
        }
    }
}
