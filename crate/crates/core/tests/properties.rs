mod common;

use homenum::oracle::brute_homs;
use homenum::structures::{
    compose_total, format_homomorphism, gaifman_graph, induced_substructure, is_homomorphism, is_total_homomorphism,
    parse_homomorphism, parse_structure, serialize_structure, PartialAssignment, Structure,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{bounded_source, random_target};

fn source(seed: u64, size: usize, tuples: usize) -> Structure {
    bounded_source(&mut ChaCha8Rng::seed_from_u64(seed), size, tuples)
}

fn target(seed: u64, size: usize, density: f64) -> Structure {
    random_target(&mut ChaCha8Rng::seed_from_u64(seed), size, density)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn homomorphisms_compose(seed in any::<u64>(), na in 1usize..=4, nb in 1usize..=3, nc in 1usize..=3, pick in any::<(usize, usize)>()) {
        let a = source(seed, na, 5);
        let b = target(seed ^ 1, nb, 0.6);
        let c = target(seed ^ 2, nc, 0.6);
        let ab: Vec<_> = brute_homs(&a, &b).unwrap().into_iter().collect();
        let bc: Vec<_> = brute_homs(&b, &c).unwrap().into_iter().collect();
        prop_assume!(!ab.is_empty() && !bc.is_empty());
        let f = &ab[pick.0 % ab.len()];
        let g = &bc[pick.1 % bc.len()];
        let gf = compose_total(g, f).unwrap();
        prop_assert!(is_total_homomorphism(&gf, &a, &c).unwrap());
        for x in 0..a.len() {
            prop_assert_eq!(gf.image(x), g.image(f.image(x)));
        }
    }

    #[test]
    fn gaifman_graph_is_simple_and_bounded(seed in any::<u64>(), n in 0usize..=8, tuples in 0usize..=12) {
        let a = source(seed, n, tuples);
        let g = gaifman_graph(&a);
        let mut bound = 0;
        for (_, t) in a.tuples() {
            bound += t.len() * (t.len() - 1) / 2;
        }
        prop_assert!(g.edge_count() <= bound.min(n * n.saturating_sub(1) / 2));
        for x in 0..n {
            prop_assert!(!g.has_edge(x, x));
            for y in 0..n {
                prop_assert_eq!(g.has_edge(x, y), g.has_edge(y, x));
            }
        }
        for (_, t) in a.tuples() {
            for &x in t.iter() {
                for &y in t.iter() {
                    prop_assert!(x == y || g.has_edge(x, y));
                }
            }
        }
    }

    #[test]
    fn induced_substructures_are_monotone(seed in any::<u64>(), n in 1usize..=7, tuples in 0usize..=12, small in any::<u8>(), extra in any::<u8>()) {
        let a = source(seed, n, tuples);
        let s: Vec<usize> = (0..n).filter(|&x| small >> x & 1 == 1).collect();
        let t: Vec<usize> = (0..n).filter(|&x| (small | extra) >> x & 1 == 1).collect();
        let sub = induced_substructure(&a, &s).unwrap();
        let sup = induced_substructure(&a, &t).unwrap();
        prop_assert!(sub.tuple_count() <= sup.tuple_count());
        for (symbol, tuple) in sub.tuples() {
            let names: Vec<&str> = tuple.iter().map(|&x| sub.element_name(x)).collect();
            let lifted = sup.resolve(&names).unwrap();
            prop_assert!(sup.table(symbol).contains(&lifted));
        }
        // A homomorphism of the larger one restricts to one of the smaller.
        let b = target(seed ^ 3, 2, 0.5);
        for h in brute_homs(&sup, &b).unwrap().into_iter().take(8) {
            let mut p = PartialAssignment::empty(n);
            for (i, &x) in t.iter().enumerate() {
                if s.contains(&x) {
                    p.set(x, h.image(i));
                }
            }
            prop_assert!(is_homomorphism(&p, &a, &b).unwrap());
        }
    }

    #[test]
    fn text_formats_round_trip(seed in any::<u64>(), n in 0usize..=7, tuples in 0usize..=12, nb in 1usize..=3) {
        let a = source(seed, n, tuples);
        let text = serialize_structure(&a);
        let back = parse_structure(&text).unwrap();
        prop_assert_eq!(serialize_structure(&back), text);
        prop_assert_eq!(back.elements(), a.elements());
        prop_assert_eq!(back.tuple_count(), a.tuple_count());

        let b = target(seed ^ 4, nb, 0.7);
        for h in brute_homs(&a, &b).unwrap().into_iter().take(4) {
            let line = format_homomorphism(&h, &a, &b);
            prop_assert_eq!(parse_homomorphism(&line, &a, &b).unwrap(), h);
        }
    }
}
