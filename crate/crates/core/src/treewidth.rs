//! Exact tree decompositions of Gaifman graphs for small width bounds.
//!
//! `decompose` first applies the simplicial and almost-simplicial
//! elimination rules, which are safe for the question "is the width at most
//! `k`". Whatever survives is solved exactly by a dynamic program over
//! subsets of eliminated vertices. The result is always exact; graphs whose
//! irreducible kernel is too large are reported as such rather than
//! approximated.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::Write;

use crate::error::{Error, Result};
use crate::structures::{gaifman_graph, GaifmanGraph, Structure};

/// Largest irreducible component handled by the subset dynamic program.
pub const MAX_EXACT_KERNEL: usize = 20;

/// Rooted tree of bags. Node 0 is the root; vertices are element indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeDecomposition {
    parents: Vec<Option<usize>>,
    bags: Vec<Vec<usize>>,
}

impl TreeDecomposition {
    /// Builds a decomposition from parent links and bags.
    ///
    /// Exactly one node must be parentless and the links must form a tree.
    /// Nodes are renumbered breadth-first so that the root becomes node 0.
    pub fn new(parents: Vec<Option<usize>>, bags: Vec<Vec<usize>>) -> Result<Self> {
        if parents.len() != bags.len() {
            return Err(Error::InvalidDecomposition("parent and bag counts differ".into()));
        }
        if parents.is_empty() {
            return Ok(TreeDecomposition {
                parents: vec![None],
                bags: vec![Vec::new()],
            });
        }
        let roots: Vec<usize> = (0..parents.len()).filter(|&i| parents[i].is_none()).collect();
        let [root] = roots[..] else {
            return Err(Error::InvalidDecomposition(format!(
                "expected one root, found {}",
                roots.len()
            )));
        };
        let mut children = vec![Vec::new(); parents.len()];
        for (i, p) in parents.iter().enumerate() {
            if let Some(p) = *p {
                if p >= parents.len() {
                    return Err(Error::InvalidDecomposition(format!("unknown parent {p}")));
                }
                children[p].push(i);
            }
        }
        let mut order = Vec::with_capacity(parents.len());
        let mut new_id = vec![usize::MAX; parents.len()];
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            new_id[v] = order.len();
            order.push(v);
            queue.extend(children[v].iter().copied());
        }
        if order.len() != parents.len() {
            return Err(Error::InvalidDecomposition("parent links contain a cycle".into()));
        }
        let parents = order
            .iter()
            .map(|&old| parents[old].map(|p| new_id[p]))
            .collect();
        let bags = order
            .iter()
            .map(|&old| {
                let mut bag = bags[old].clone();
                bag.sort_unstable();
                bag.dedup();
                bag
            })
            .collect();
        Ok(TreeDecomposition { parents, bags })
    }

    /// A single bag holding every listed vertex.
    pub fn trivial(vertices: &[usize]) -> Self {
        TreeDecomposition::new(vec![None], vec![vertices.to_vec()]).expect("single node")
    }

    pub fn len(&self) -> usize {
        self.bags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bags.is_empty()
    }

    pub fn bags(&self) -> &[Vec<usize>] {
        &self.bags
    }

    pub fn bag(&self, node: usize) -> &[usize] {
        &self.bags[node]
    }

    pub fn parent(&self, node: usize) -> Option<usize> {
        self.parents[node]
    }

    /// Largest bag size minus one; zero when every bag is empty.
    pub fn width(&self) -> usize {
        self.bags.iter().map(Vec::len).max().unwrap_or(0).saturating_sub(1)
    }

    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut children = vec![Vec::new(); self.len()];
        for (i, p) in self.parents.iter().enumerate() {
            if let Some(p) = *p {
                children[p].push(i);
            }
        }
        children
    }

    /// Drops every vertex outside `keep` from the bags.
    ///
    /// Restricting a decomposition of `G` gives one of the induced subgraph.
    pub fn restrict(&self, keep: &[bool]) -> TreeDecomposition {
        TreeDecomposition {
            parents: self.parents.clone(),
            bags: self
                .bags
                .iter()
                .map(|b| b.iter().copied().filter(|&v| keep[v]).collect())
                .collect(),
        }
    }

    /// `bag <node> <parent|-> <elem>...` lines.
    pub fn serialize(&self, a: &Structure) -> String {
        let mut out = String::new();
        for (i, bag) in self.bags.iter().enumerate() {
            write!(out, "bag {i} ").unwrap();
            match self.parents[i] {
                Some(p) => write!(out, "{p}").unwrap(),
                None => out.push('-'),
            }
            for &v in bag {
                write!(out, " {}", a.element_name(v)).unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str, a: &Structure) -> Result<Self> {
        let mut ids: HashMap<String, usize> = HashMap::new();
        let mut raw: Vec<(usize, Option<String>, Vec<usize>)> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line_no = lineno + 1;
            let content = crate::structures::strip_comment(line);
            if content.is_empty() {
                continue;
            }
            let words: Vec<&str> = content.split_whitespace().collect();
            if words.len() < 3 || words[0] != "bag" {
                return Err(Error::syntax(line_no, "expected `bag <node> <parent|-> <elem>...`"));
            }
            if ids.contains_key(words[1]) {
                return Err(Error::Duplicate {
                    line: line_no,
                    what: "bag",
                    name: words[1].to_string(),
                });
            }
            let id = ids.len();
            ids.insert(words[1].to_string(), id);
            let parent = (words[2] != "-").then(|| words[2].to_string());
            let bag = words[3..]
                .iter()
                .map(|w| {
                    a.element_index(w).ok_or_else(|| Error::UnknownElement {
                        line: line_no,
                        element: w.to_string(),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            raw.push((line_no, parent, bag));
        }
        let mut parents = Vec::with_capacity(raw.len());
        let mut bags = Vec::with_capacity(raw.len());
        for (line_no, parent, bag) in raw {
            parents.push(match parent {
                None => None,
                Some(p) => Some(*ids.get(&p).ok_or_else(|| {
                    Error::syntax(line_no, format!("unknown parent bag `{p}`"))
                })?),
            });
            bags.push(bag);
        }
        TreeDecomposition::new(parents, bags)
    }
}

/// Exact decomposition of width at most `k`, or `None` when `tw(A) > k`.
pub fn decompose(a: &Structure, k: usize) -> Result<Option<TreeDecomposition>> {
    let g = gaifman_graph(a);
    let all: Vec<usize> = (0..a.len()).collect();
    decompose_graph(&g, &all, k)
}

/// Exact decomposition of `G[subset]` where `G` is the Gaifman graph of `a`.
pub fn decompose_subset(a: &Structure, subset: &[bool], k: usize) -> Result<Option<TreeDecomposition>> {
    let g = gaifman_graph(a);
    let vertices: Vec<usize> = (0..a.len()).filter(|&v| subset[v]).collect();
    decompose_graph(&g, &vertices, k)
}

/// Smallest `k` with a decomposition, together with that decomposition.
pub fn treewidth(a: &Structure) -> Result<(usize, TreeDecomposition)> {
    for k in 0..a.len().max(1) {
        if let Some(d) = decompose(a, k)? {
            return Ok((k, d));
        }
    }
    Ok((0, TreeDecomposition::trivial(&[])))
}

/// Exact decomposition of the subgraph of `g` induced by `vertices`.
pub fn decompose_graph(g: &GaifmanGraph, vertices: &[usize], k: usize) -> Result<Option<TreeDecomposition>> {
    if vertices.is_empty() {
        return Ok(Some(TreeDecomposition::trivial(&[])));
    }
    let mut local_of = HashMap::with_capacity(vertices.len());
    for (i, &v) in vertices.iter().enumerate() {
        local_of.insert(v, i);
    }
    let adjacency: Vec<BTreeSet<usize>> = vertices
        .iter()
        .map(|&v| {
            g.neighbors(v)
                .iter()
                .filter_map(|w| local_of.get(w).copied())
                .collect()
        })
        .collect();

    let Some(order) = elimination_order(&adjacency, k)? else {
        return Ok(None);
    };
    let d = from_elimination_order(&adjacency, &order);
    debug_assert!(d.width() <= k);
    let bags = d
        .bags
        .iter()
        .map(|b| b.iter().map(|&l| vertices[l]).collect())
        .collect();
    Ok(Some(TreeDecomposition::new(d.parents, bags)?))
}

/// Finds an elimination order of width at most `k`, if one exists.
fn elimination_order(adjacency: &[BTreeSet<usize>], k: usize) -> Result<Option<Vec<usize>>> {
    let n = adjacency.len();
    let mut work: Vec<BTreeSet<usize>> = adjacency.to_vec();
    let mut alive = vec![true; n];
    let mut order = Vec::with_capacity(n);

    // Safe reductions.
    loop {
        let mut best: Option<(usize, usize)> = None;
        for v in (0..n).filter(|&v| alive[v]) {
            let d = work[v].len();
            if d > k || best.is_some_and(|(bd, _)| bd <= d) {
                continue;
            }
            if is_almost_simplicial(&work, v) {
                best = Some((d, v));
                if d <= 1 {
                    break;
                }
            }
        }
        let Some((_, v)) = best else { break };
        eliminate(&mut work, &mut alive, v);
        order.push(v);
    }

    let rest: Vec<usize> = (0..n).filter(|&v| alive[v]).collect();
    if rest.is_empty() {
        return Ok(Some(order));
    }
    if rest.iter().all(|&v| work[v].len() > k) {
        return Ok(None);
    }

    // Remaining components are solved independently.
    let mut seen = vec![false; n];
    for &start in &rest {
        if seen[start] {
            continue;
        }
        let mut comp = Vec::new();
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(v) = stack.pop() {
            comp.push(v);
            for &w in &work[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        comp.sort_unstable();
        match subset_dp(&work, &comp, k)? {
            Some(part) => order.extend(part),
            None => return Ok(None),
        }
    }
    Ok(Some(order))
}

/// True when all but at most one neighbour of `v` form a clique.
fn is_almost_simplicial(work: &[BTreeSet<usize>], v: usize) -> bool {
    let nb: Vec<usize> = work[v].iter().copied().collect();
    let mut missing: Vec<(usize, usize)> = Vec::new();
    for (i, &a) in nb.iter().enumerate() {
        for &b in &nb[i + 1..] {
            if !work[a].contains(&b) {
                missing.push((a, b));
                if missing.len() > nb.len() {
                    return false;
                }
            }
        }
    }
    let Some(&(a, b)) = missing.first() else {
        return true;
    };
    [a, b]
        .into_iter()
        .any(|u| missing.iter().all(|&(x, y)| x == u || y == u))
}

fn eliminate(work: &mut [BTreeSet<usize>], alive: &mut [bool], v: usize) {
    let nb: Vec<usize> = work[v].iter().copied().collect();
    for (i, &a) in nb.iter().enumerate() {
        work[a].remove(&v);
        for &b in &nb[i + 1..] {
            work[a].insert(b);
            work[b].insert(a);
        }
    }
    work[v].clear();
    alive[v] = false;
}

/// Dynamic program over sets of already-eliminated vertices of one component.
fn subset_dp(work: &[BTreeSet<usize>], comp: &[usize], k: usize) -> Result<Option<Vec<usize>>> {
    let r = comp.len();
    if r > MAX_EXACT_KERNEL {
        return Err(Error::DecompositionTooLarge { vertices: r });
    }
    let pos: HashMap<usize, usize> = comp.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let adj: Vec<u32> = comp
        .iter()
        .map(|v| work[*v].iter().fold(0u32, |m, w| m | (1 << pos[w])))
        .collect();
    let full: u32 = if r == 32 { u32::MAX } else { (1u32 << r) - 1 };

    // Vertices outside `eliminated ∪ {v}` reachable from v through eliminated ones.
    let q_size = |eliminated: u32, v: usize| -> usize {
        let mut inside = adj[v] & eliminated;
        let mut reach = adj[v];
        let mut frontier = inside;
        while frontier != 0 {
            let s = frontier.trailing_zeros() as usize;
            frontier &= frontier - 1;
            let new = adj[s] & !reach;
            reach |= adj[s];
            let new_inside = new & eliminated & !inside;
            inside |= new_inside;
            frontier |= new_inside;
        }
        (reach & !eliminated & !(1 << v)).count_ones() as usize
    };

    let mut came_from: HashMap<u32, (u32, usize)> = HashMap::new();
    came_from.insert(0, (0, usize::MAX));
    let mut queue = VecDeque::from([0u32]);
    while let Some(s) = queue.pop_front() {
        if s == full {
            break;
        }
        for v in 0..r {
            if s & (1 << v) != 0 {
                continue;
            }
            let next = s | (1 << v);
            if came_from.contains_key(&next) {
                continue;
            }
            if q_size(s, v) <= k {
                came_from.insert(next, (s, v));
                queue.push_back(next);
            }
        }
    }
    if !came_from.contains_key(&full) {
        return Ok(None);
    }
    let mut order = Vec::with_capacity(r);
    let mut s = full;
    while s != 0 {
        let (prev, v) = came_from[&s];
        order.push(comp[v]);
        s = prev;
    }
    order.reverse();
    Ok(Some(order))
}

/// Standard decomposition from an elimination order (local vertex ids).
fn from_elimination_order(adjacency: &[BTreeSet<usize>], order: &[usize]) -> TreeDecomposition {
    let n = adjacency.len();
    let mut pos = vec![0; n];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    let mut work: Vec<BTreeSet<usize>> = adjacency.to_vec();
    let mut bags = Vec::with_capacity(n);
    let mut parents = Vec::with_capacity(n);
    for &v in order {
        let higher: Vec<usize> = work[v].iter().copied().filter(|&w| pos[w] > pos[v]).collect();
        for (i, &a) in higher.iter().enumerate() {
            for &b in &higher[i + 1..] {
                work[a].insert(b);
                work[b].insert(a);
            }
        }
        let parent = higher.iter().copied().min_by_key(|&w| pos[w]).map(|w| pos[w]);
        let mut bag = higher;
        bag.push(v);
        bags.push(bag);
        parents.push(parent);
    }
    // Join the per-component trees under the last root.
    let roots: Vec<usize> = (0..n).filter(|&i| parents[i].is_none()).collect();
    if let Some((&main, others)) = roots.split_last() {
        for &r in others {
            parents[r] = Some(main);
        }
    }
    TreeDecomposition { parents, bags }
}

/// Checks coverage and connectivity of `d` for the whole structure.
pub fn validate(a: &Structure, d: &TreeDecomposition) -> bool {
    validate_subset(a, &vec![true; a.len()], d)
}

/// Checks `d` against the substructure induced by `subset`.
///
/// Every element of the subset must appear in a bag, every tuple's entries
/// inside the subset must share a bag, and the bags holding any one element
/// must form a connected subtree.
pub fn validate_subset(a: &Structure, subset: &[bool], d: &TreeDecomposition) -> bool {
    let n = a.len();
    if d.bags.iter().flatten().any(|&v| v >= n || !subset[v]) {
        return false;
    }
    let mut tops = vec![0usize; n];
    let mut member: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (node, bag) in d.bags.iter().enumerate() {
        for &v in bag {
            member[v].push(node);
            let parent_has = d.parents[node].is_some_and(|p| d.bags[p].binary_search(&v).is_ok());
            if !parent_has {
                tops[v] += 1;
            }
        }
    }
    if (0..n).any(|v| subset[v] && tops[v] != 1) {
        return false;
    }
    for (_, tuple) in a.tuples() {
        let inside: Vec<usize> = tuple.iter().copied().filter(|&x| subset[x]).collect();
        let Some(&first) = inside.first() else { continue };
        let covered = member[first]
            .iter()
            .any(|&node| inside.iter().all(|x| d.bags[node].binary_search(x).is_ok()));
        if !covered {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structures::{generate_family, Family, Vocabulary};

    /// Minimum over all elimination orders, by exhaustive permutation.
    fn brute_treewidth(g: &GaifmanGraph) -> usize {
        let n = g.vertex_count();
        if n == 0 {
            return 0;
        }
        let mut perm: Vec<usize> = (0..n).collect();
        let mut best = usize::MAX;
        permute(&mut perm, 0, &mut |order| {
            let mut work: Vec<BTreeSet<usize>> = (0..n).map(|v| g.neighbors(v).clone()).collect();
            let mut width = 0;
            let mut gone = vec![false; n];
            for &v in order {
                let nb: Vec<usize> = work[v].iter().copied().filter(|&w| !gone[w]).collect();
                width = width.max(nb.len());
                for &a in &nb {
                    for &b in &nb {
                        if a != b {
                            work[a].insert(b);
                        }
                    }
                }
                gone[v] = true;
            }
            best = best.min(width);
        });
        best
    }

    fn permute(v: &mut Vec<usize>, i: usize, f: &mut impl FnMut(&[usize])) {
        if i == v.len() {
            f(v);
            return;
        }
        for j in i..v.len() {
            v.swap(i, j);
            permute(v, i + 1, f);
            v.swap(i, j);
        }
    }

    fn graph(n: usize, edges: &[(usize, usize)]) -> Structure {
        let mut s = Structure::new("g", Vocabulary::new().with("E", 2));
        for i in 0..n {
            s.add_element(format!("v{i}")).unwrap();
        }
        for &(a, b) in edges {
            s.insert_tuple(0, &[a, b]);
        }
        s
    }

    #[test]
    fn path_has_width_one() {
        let p = generate_family(Family::Path, 4).unwrap();
        let d = decompose(&p, 1).unwrap().unwrap();
        assert_eq!(d.width(), 1);
        assert!(validate(&p, &d));
        assert!(decompose(&p, 0).unwrap().is_none());
    }

    #[test]
    fn k4_exceeds_two() {
        let k4 = generate_family(Family::Clique, 4).unwrap();
        assert!(decompose(&k4, 2).unwrap().is_none());
        assert_eq!(decompose(&k4, 3).unwrap().unwrap().width(), 3);
    }

    #[test]
    fn grid_three_by_three() {
        let g = generate_family(Family::Grid, 3).unwrap();
        assert_eq!(brute_treewidth(&gaifman_graph(&g)), 3);
        assert!(decompose(&g, 2).unwrap().is_none());
        let d = decompose(&g, 3).unwrap().unwrap();
        assert!(d.width() <= 3);
        assert!(validate(&g, &d));
    }

    #[test]
    fn larger_grids_and_paths() {
        let g = generate_family(Family::Grid, 4).unwrap();
        assert!(decompose(&g, 3).unwrap().is_none());
        let d = decompose(&g, 4).unwrap().unwrap();
        assert!(validate(&g, &d));
        let p = generate_family(Family::LoopPathOneEnd, 300).unwrap();
        let d = decompose(&p, 1).unwrap().unwrap();
        assert!(validate(&p, &d));
    }

    #[test]
    fn whole_universe_bag_is_valid() {
        let k4 = generate_family(Family::Clique, 4).unwrap();
        let d = TreeDecomposition::trivial(&[0, 1, 2, 3]);
        assert!(validate(&k4, &d));
        assert_eq!(d.width(), 3);
    }

    #[test]
    fn missing_coverage_is_rejected() {
        let k3 = generate_family(Family::Clique, 3).unwrap();
        let d = TreeDecomposition::new(vec![None, Some(0)], vec![vec![0, 1], vec![1, 2]]).unwrap();
        assert!(!validate(&k3, &d));
    }

    #[test]
    fn disconnected_occurrences_are_rejected() {
        // Path v0 - v1 - v2; v0 appears in two bags separated by one without it.
        let p = generate_family(Family::Path, 2).unwrap();
        let d = TreeDecomposition::new(
            vec![None, Some(0), Some(1)],
            vec![vec![0, 1], vec![1, 2], vec![0, 2]],
        )
        .unwrap();
        assert!(!validate(&p, &d));
    }

    #[test]
    fn decomposition_file_round_trip() {
        let g = generate_family(Family::Cycle, 5).unwrap();
        let d = decompose(&g, 2).unwrap().unwrap();
        let text = d.serialize(&g);
        let back = TreeDecomposition::parse(&text, &g).unwrap();
        assert_eq!(back, d);
        assert!(TreeDecomposition::parse("bag a - v0\nbag b - v1\n", &g).is_err());
        assert!(TreeDecomposition::parse("bag a x v0\n", &g).is_err());
    }

    #[test]
    fn agrees_with_exhaustive_orders_on_small_graphs() {
        // Every graph on up to 5 vertices, plus a deterministic sample on 6 and 7.
        for n in 0..=5usize {
            let pairs: Vec<(usize, usize)> =
                (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
            for mask in 0u32..(1 << pairs.len()) {
                let edges: Vec<_> = pairs
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, &e)| e)
                    .collect();
                check_against_brute(&graph(n, &edges));
            }
        }
        let mut state = 0x2545F4914F6CDD1Du64;
        for n in [6usize, 7] {
            let pairs: Vec<(usize, usize)> =
                (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
            for _ in 0..150 {
                let edges: Vec<_> = pairs
                    .iter()
                    .copied()
                    .filter(|_| {
                        state ^= state << 13;
                        state ^= state >> 7;
                        state ^= state << 17;
                        state % 2 == 0
                    })
                    .collect();
                check_against_brute(&graph(n, &edges));
            }
        }
    }

    fn check_against_brute(s: &Structure) {
        let expected = brute_treewidth(&gaifman_graph(s));
        for k in 0..=s.len() {
            let d = decompose(s, k).unwrap();
            assert_eq!(d.is_some(), k >= expected, "k={k} expected tw {expected}");
            if let Some(d) = d {
                assert!(d.width() <= k);
                assert!(validate(s, &d));
            }
        }
    }

    #[test]
    fn restriction_stays_valid() {
        let g = generate_family(Family::Grid, 3).unwrap();
        let d = decompose(&g, 3).unwrap().unwrap();
        let keep: Vec<bool> = (0..9).map(|v| v % 2 == 0).collect();
        let r = d.restrict(&keep);
        assert!(validate_subset(&g, &keep, &r));
        assert!(!validate(&g, &r));
    }

    #[test]
    fn kernel_size_guard() {
        let n = MAX_EXACT_KERNEL + 1;
        let work: Vec<BTreeSet<usize>> = (0..n)
            .map(|v| [(v + 1) % n, (v + n - 1) % n].into_iter().collect())
            .collect();
        let comp: Vec<usize> = (0..n).collect();
        assert!(matches!(
            subset_dp(&work, &comp, 2),
            Err(Error::DecompositionTooLarge { vertices }) if vertices == n
        ));
    }
}
