//! Deterministic instance generators used by tests, benchmarks and `gen`.
//!
//! Graphs use a single symmetric binary relation `E`; a loop on `v` is the
//! tuple `(v, v)`.

use std::fmt;
use std::str::FromStr;

use super::{Structure, Vocabulary};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// `n` edges on vertices `v0..=vn`.
    Path,
    /// `n` vertices in a ring.
    Cycle,
    /// Loop-free `K_n`.
    Clique,
    /// `n × n` grid.
    Grid,
    /// Path with `n` edges and a loop on `v0`.
    LoopPathOneEnd,
    /// Path with `n` edges and loops on both ends.
    LoopPathBothEnds,
    /// Disjoint union of `K_n` and a single looped vertex.
    CliquePlusLoop,
    /// `K_n` plus `n` isolated elements.
    IndependentPadding,
    /// `K_n` with a loop on `v0`.
    LoopedClique,
    /// Red clique `a1..an` (with loops) and blue pendants `y_i -- a_i`.
    MulticoloredClique,
}

impl Family {
    pub const ALL: [Family; 10] = [
        Family::Path,
        Family::Cycle,
        Family::Clique,
        Family::Grid,
        Family::LoopPathOneEnd,
        Family::LoopPathBothEnds,
        Family::CliquePlusLoop,
        Family::IndependentPadding,
        Family::LoopedClique,
        Family::MulticoloredClique,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Path => "path",
            Family::Cycle => "cycle",
            Family::Clique => "clique",
            Family::Grid => "grid",
            Family::LoopPathOneEnd => "loop_path_one_end",
            Family::LoopPathBothEnds => "loop_path_both_ends",
            Family::CliquePlusLoop => "clique_plus_loop",
            Family::IndependentPadding => "independent_padding",
            Family::LoopedClique => "looped_clique",
            Family::MulticoloredClique => "multicolored_clique",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::UnknownFamily(s.to_string()))
    }
}

struct GraphBuilder {
    s: Structure,
}

impl GraphBuilder {
    fn new(name: String) -> Self {
        GraphBuilder {
            s: Structure::new(name, Vocabulary::new().with("E", 2)),
        }
    }

    fn vertex(&mut self, id: String) -> usize {
        self.s.add_element(id).expect("generated ids are unique")
    }

    fn edge(&mut self, a: usize, b: usize) {
        self.s.insert_tuple(0, &[a, b]);
        self.s.insert_tuple(0, &[b, a]);
    }

    fn looped(&mut self, a: usize) {
        self.s.insert_tuple(0, &[a, a]);
    }
}

fn clique_into(g: &mut GraphBuilder, prefix: &str, n: usize) -> Vec<usize> {
    let vs: Vec<usize> = (0..n).map(|i| g.vertex(format!("{prefix}{i}"))).collect();
    for i in 0..n {
        for j in i + 1..n {
            g.edge(vs[i], vs[j]);
        }
    }
    vs
}

/// Builds member `n` of a family. `n` must be at least 1.
pub fn generate_family(family: Family, n: usize) -> Result<Structure> {
    if n == 0 {
        return Err(Error::Domain(format!("family `{family}` needs n >= 1")));
    }
    let mut g = GraphBuilder::new(format!("{family}_{n}"));
    match family {
        Family::Path | Family::LoopPathOneEnd | Family::LoopPathBothEnds => {
            let vs: Vec<usize> = (0..=n).map(|i| g.vertex(format!("v{i}"))).collect();
            for w in vs.windows(2) {
                g.edge(w[0], w[1]);
            }
            if family != Family::Path {
                g.looped(vs[0]);
            }
            if family == Family::LoopPathBothEnds {
                g.looped(vs[n]);
            }
        }
        Family::Cycle => {
            let vs: Vec<usize> = (0..n).map(|i| g.vertex(format!("v{i}"))).collect();
            if n == 1 {
                g.looped(vs[0]);
            } else {
                for i in 0..n {
                    g.edge(vs[i], vs[(i + 1) % n]);
                }
            }
        }
        Family::Clique => {
            clique_into(&mut g, "v", n);
        }
        Family::LoopedClique => {
            let vs = clique_into(&mut g, "v", n);
            g.looped(vs[0]);
        }
        Family::Grid => {
            let mut id = vec![vec![0; n]; n];
            for (r, row) in id.iter_mut().enumerate() {
                for (c, slot) in row.iter_mut().enumerate() {
                    *slot = g.vertex(format!("g{r}_{c}"));
                }
            }
            for r in 0..n {
                for c in 0..n {
                    if r + 1 < n {
                        g.edge(id[r][c], id[r + 1][c]);
                    }
                    if c + 1 < n {
                        g.edge(id[r][c], id[r][c + 1]);
                    }
                }
            }
        }
        Family::CliquePlusLoop => {
            clique_into(&mut g, "c", n);
            let l = g.vertex("l".to_string());
            g.looped(l);
        }
        Family::IndependentPadding => {
            let base = generate_family(Family::Clique, n)?;
            return Ok(pad_independent(&base));
        }
        Family::MulticoloredClique => return Ok(multicolored_clique(n)),
    }
    Ok(g.s)
}

/// Adds `|A|` fresh elements that occur in no tuple.
pub fn pad_independent(a: &Structure) -> Structure {
    let mut padded = a.clone();
    padded.set_name(format!("{}_padded", a.name()));
    let mut k = 0;
    for _ in 0..a.len() {
        loop {
            let id = format!("i{k}");
            k += 1;
            if padded.element_index(&id).is_none() {
                padded.add_element(id).expect("fresh id");
                break;
            }
        }
    }
    padded
}

fn multicolored_clique(n: usize) -> Structure {
    let vocab = Vocabulary::new()
        .with("Red", 2)
        .with("Blue", 2)
        .with("RedV", 1)
        .with("BlueV", 1);
    let mut s = Structure::new(format!("multicolored_clique_{n}"), vocab);
    let a: Vec<usize> = (1..=n).map(|i| s.add_element(format!("a{i}")).unwrap()).collect();
    let y: Vec<usize> = (1..=n).map(|i| s.add_element(format!("y{i}")).unwrap()).collect();
    for &x in &a {
        s.insert_tuple(2, &[x]);
        for &z in &a {
            s.insert_tuple(0, &[x, z]);
        }
    }
    for (&yi, &ai) in y.iter().zip(&a) {
        s.insert_tuple(3, &[yi]);
        s.insert_tuple(1, &[yi, ai]);
        s.insert_tuple(1, &[ai, yi]);
    }
    s
}
