//! Random instance builders shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use homenum::endoseq::EndoSequence;
use homenum::oracle::brute_homs;
use homenum::structures::{induced_substructure, PartialAssignment, Structure, Vocabulary};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn vocabulary() -> Vocabulary {
    Vocabulary::new().with("U", 1).with("E", 2).with("T", 3)
}

fn named(name: &str, size: usize) -> Structure {
    let mut s = Structure::new(name, vocabulary());
    for i in 0..size {
        s.add_element(format!("{name}{i}")).unwrap();
    }
    s
}

/// A structure of tree width at most 2: elements are added to a random
/// 2-tree, and every tuple draws its entries from one of its triangles.
pub fn bounded_source(rng: &mut impl Rng, size: usize, tuples: usize) -> Structure {
    let mut s = named("a", size);
    if size == 0 {
        return s;
    }
    let mut bags: Vec<Vec<usize>> = vec![(0..size.min(3)).collect()];
    for v in 3..size {
        let bag = bags[rng.gen_range(0..bags.len())].clone();
        let mut pair = bag.clone();
        pair.shuffle(rng);
        pair.truncate(2);
        pair.push(v);
        bags.push(pair);
    }
    for _ in 0..tuples {
        let bag = &bags[rng.gen_range(0..bags.len())];
        let symbol = rng.gen_range(0..3);
        let tuple: Vec<usize> = (0..=symbol).map(|_| bag[rng.gen_range(0..bag.len())]).collect();
        if !s.table(symbol).contains(&tuple) {
            s.add_tuple(symbol, &tuple).unwrap();
        }
    }
    s
}

/// Arbitrary tuples, each present with probability `density`.
pub fn random_target(rng: &mut impl Rng, size: usize, density: f64) -> Structure {
    let mut s = named("b", size);
    for symbol in 0..3 {
        let arity = symbol + 1;
        let cells = size.pow(arity as u32);
        for code in 0..cells {
            if rng.gen_bool(density) {
                let mut t = vec![0; arity];
                let mut c = code;
                for slot in t.iter_mut().rev() {
                    *slot = c % size;
                    c /= size;
                }
                s.add_tuple(symbol, &t).unwrap();
            }
        }
    }
    s
}

/// Up to `levels` random image-shrinking endomorphisms chained into a
/// sequence, with the smallest width that fits.
pub fn random_sequence(rng: &mut impl Rng, a: &Structure, levels: usize) -> EndoSequence {
    let mut masks = vec![vec![true; a.len()]];
    let mut maps = Vec::new();
    for _ in 0..levels {
        let members: Vec<usize> = (0..a.len()).filter(|&x| masks.last().unwrap()[x]).collect();
        let sub = induced_substructure(a, &members).unwrap();
        let shrinking: Vec<_> = brute_homs(&sub, &sub)
            .unwrap()
            .into_iter()
            .filter(|h| h.images().iter().collect::<BTreeSet<_>>().len() < sub.len())
            .collect();
        let Some(h) = shrinking.choose(rng) else { break };
        let mut map = PartialAssignment::empty(a.len());
        let mut next = vec![false; a.len()];
        for (i, &x) in members.iter().enumerate() {
            let y = members[h.image(i)];
            map.set(x, y);
            next[y] = true;
        }
        masks.push(next);
        maps.push(map);
    }
    let mut seq = EndoSequence::new(masks, maps, 0).unwrap();
    let k = seq.required_width(a).unwrap();
    seq.set_width(k);
    seq
}

/// Every assignment of `members` into `0..nb`, as full-length value lists.
pub fn each_assignment(members: &[usize], len: usize, nb: usize, f: &mut impl FnMut(&[Option<usize>])) {
    fn go(i: usize, members: &[usize], nb: usize, values: &mut Vec<Option<usize>>, f: &mut impl FnMut(&[Option<usize>])) {
        if i == members.len() {
            f(values);
            return;
        }
        for v in 0..nb {
            values[members[i]] = Some(v);
            go(i + 1, members, nb, values, f);
        }
        values[members[i]] = None;
    }
    go(0, members, nb, &mut vec![None; len], f);
}

/// Runs the CLI in-process, returning exit code, stdout and stderr.
pub fn cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("homenum").chain(args.iter().copied());
    let code = homenum::cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}
