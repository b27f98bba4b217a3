//! Vocabularies, finite relational structures and maps between them.
//!
//! Elements are addressed by dense indices `0..len` in universe order. The
//! universe order is the one given at construction (file order when parsed)
//! and drives every enumeration order in the crate.

mod families;
mod format;

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use crate::error::{Error, Result};

pub use families::{generate_family, pad_independent, Family};
pub(crate) use format::strip_comment;
pub use format::{format_homomorphism, parse_homomorphism, parse_structure, serialize_structure};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Symbol {
    pub name: String,
    pub arity: usize,
}

/// Ordered list of relation symbols with their arities.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    symbols: Vec<Symbol>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a symbol, returning its index.
    pub fn push(&mut self, name: impl Into<String>, arity: usize) -> Result<usize> {
        let name = name.into();
        if arity == 0 {
            return Err(Error::syntax(0, format!("relation `{name}` must have arity >= 1")));
        }
        if self.position(&name).is_some() {
            return Err(Error::Duplicate {
                line: 0,
                what: "relation",
                name,
            });
        }
        self.symbols.push(Symbol { name, arity });
        Ok(self.symbols.len() - 1)
    }

    pub fn with(mut self, name: &str, arity: usize) -> Self {
        self.push(name, arity).expect("valid symbol");
        self
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s.name == name)
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn symbol(&self, index: usize) -> &Symbol {
        &self.symbols[index]
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn max_arity(&self) -> usize {
        self.symbols.iter().map(|s| s.arity).max().unwrap_or(0)
    }
}

/// Ordered, duplicate-free set of tuples for one relation symbol.
#[derive(Debug, Clone, Default)]
pub struct Table {
    arity: usize,
    tuples: Vec<Box<[usize]>>,
    lookup: HashSet<Box<[usize]>>,
}

impl Table {
    fn new(arity: usize) -> Self {
        Table {
            arity,
            tuples: Vec::new(),
            lookup: HashSet::new(),
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn tuples(&self) -> &[Box<[usize]>] {
        &self.tuples
    }

    pub fn contains(&self, tuple: &[usize]) -> bool {
        self.lookup.contains(tuple)
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    fn insert(&mut self, tuple: Box<[usize]>) -> bool {
        debug_assert_eq!(tuple.len(), self.arity);
        if self.lookup.contains(&tuple) {
            return false;
        }
        self.lookup.insert(tuple.clone());
        self.tuples.push(tuple);
        true
    }
}

impl PartialEq for Table {
    fn eq(&self, other: &Self) -> bool {
        self.arity == other.arity && self.tuples == other.tuples
    }
}

impl Eq for Table {}

/// A finite relational structure: named universe plus one table per symbol.
#[derive(Debug, Clone)]
pub struct Structure {
    name: String,
    vocabulary: Vocabulary,
    elements: Vec<String>,
    index: HashMap<String, usize>,
    tables: Vec<Table>,
}

impl PartialEq for Structure {
    fn eq(&self, other: &Self) -> bool {
        self.vocabulary == other.vocabulary
            && self.elements == other.elements
            && self.tables == other.tables
    }
}

impl Eq for Structure {}

impl Structure {
    pub fn new(name: impl Into<String>, vocabulary: Vocabulary) -> Self {
        let tables = vocabulary.symbols().iter().map(|s| Table::new(s.arity)).collect();
        Structure {
            name: name.into(),
            vocabulary,
            elements: Vec::new(),
            index: HashMap::new(),
            tables,
        }
    }

    /// Adds an element at the end of the universe order.
    pub fn add_element(&mut self, id: impl Into<String>) -> Result<usize> {
        let id = id.into();
        if self.index.contains_key(&id) {
            return Err(Error::Duplicate {
                line: 0,
                what: "element",
                name: id,
            });
        }
        let i = self.elements.len();
        self.index.insert(id.clone(), i);
        self.elements.push(id);
        Ok(i)
    }

    pub fn add_tuple(&mut self, symbol: usize, tuple: &[usize]) -> Result<()> {
        let arity = self.vocabulary.symbol(symbol).arity;
        if tuple.len() != arity {
            return Err(Error::ArityMismatch {
                line: 0,
                symbol: self.vocabulary.symbol(symbol).name.clone(),
                expected: arity,
                found: tuple.len(),
            });
        }
        if let Some(&bad) = tuple.iter().find(|&&x| x >= self.elements.len()) {
            return Err(Error::UnknownElement {
                line: 0,
                element: bad.to_string(),
            });
        }
        if !self.tables[symbol].insert(tuple.into()) {
            return Err(Error::Duplicate {
                line: 0,
                what: "tuple",
                name: self.format_tuple(symbol, tuple),
            });
        }
        Ok(())
    }

    /// Inserts a tuple unless it is already present.
    pub(crate) fn insert_tuple(&mut self, symbol: usize, tuple: &[usize]) {
        self.tables[symbol].insert(tuple.into());
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn set_name(&mut self, name: impl Into<String>) {
        self.name = name.into();
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[String] {
        &self.elements
    }

    pub fn element_name(&self, i: usize) -> &str {
        &self.elements[i]
    }

    pub fn element_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn table(&self, symbol: usize) -> &Table {
        &self.tables[symbol]
    }

    pub fn tables(&self) -> &[Table] {
        &self.tables
    }

    pub fn table_by_name(&self, name: &str) -> Option<&Table> {
        self.vocabulary.position(name).map(|i| &self.tables[i])
    }

    /// All `(symbol, tuple)` pairs in vocabulary then table order.
    pub fn tuples(&self) -> impl Iterator<Item = (usize, &[usize])> + '_ {
        self.tables
            .iter()
            .enumerate()
            .flat_map(|(s, t)| t.tuples.iter().map(move |tuple| (s, &tuple[..])))
    }

    pub fn tuple_count(&self) -> usize {
        self.tables.iter().map(Table::len).sum()
    }

    /// For every element, the `(symbol, tuple index)` pairs it occurs in.
    pub fn incidence(&self) -> Vec<Vec<(usize, usize)>> {
        let mut inc = vec![Vec::new(); self.len()];
        for (s, table) in self.tables.iter().enumerate() {
            for (t, tuple) in table.tuples.iter().enumerate() {
                let mut seen: Vec<usize> = Vec::with_capacity(tuple.len());
                for &x in tuple.iter() {
                    if !seen.contains(&x) {
                        seen.push(x);
                        inc[x].push((s, t));
                    }
                }
            }
        }
        inc
    }

    fn format_tuple(&self, symbol: usize, tuple: &[usize]) -> String {
        let mut out = self.vocabulary.symbol(symbol).name.clone();
        for &x in tuple {
            out.push(' ');
            out.push_str(self.elements.get(x).map(String::as_str).unwrap_or("?"));
        }
        out
    }

    /// Resolves a list of element names into indices.
    pub fn resolve(&self, names: &[&str]) -> Result<Vec<usize>> {
        names
            .iter()
            .map(|n| {
                self.element_index(n).ok_or_else(|| Error::UnknownElement {
                    line: 0,
                    element: n.to_string(),
                })
            })
            .collect()
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize_structure(self))
    }
}

/// A map defined on a subset of a source universe, into a target universe.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartialAssignment {
    values: Vec<Option<usize>>,
}

impl PartialAssignment {
    /// The empty map on a universe of `len` elements.
    pub fn empty(len: usize) -> Self {
        PartialAssignment {
            values: vec![None; len],
        }
    }

    pub fn from_values(values: Vec<Option<usize>>) -> Self {
        PartialAssignment { values }
    }

    /// Builds an assignment from `(source, target)` pairs.
    pub fn from_pairs(len: usize, pairs: &[(usize, usize)]) -> Self {
        let mut p = Self::empty(len);
        for &(x, v) in pairs {
            p.set(x, v);
        }
        p
    }

    pub fn get(&self, x: usize) -> Option<usize> {
        self.values[x]
    }

    pub fn set(&mut self, x: usize, value: usize) {
        self.values[x] = Some(value);
    }

    pub fn unset(&mut self, x: usize) {
        self.values[x] = None;
    }

    pub fn is_defined(&self, x: usize) -> bool {
        self.values[x].is_some()
    }

    /// Size of the source universe.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Option<usize>] {
        &self.values
    }

    pub fn domain(&self) -> impl Iterator<Item = usize> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|_| i))
    }

    pub fn domain_mask(&self) -> Vec<bool> {
        self.values.iter().map(Option::is_some).collect()
    }

    pub fn domain_size(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }

    pub fn is_total(&self) -> bool {
        self.values.iter().all(Option::is_some)
    }

    pub fn to_homomorphism(&self) -> Option<Homomorphism> {
        self.values
            .iter()
            .copied()
            .collect::<Option<Vec<_>>>()
            .map(Homomorphism)
    }

    /// Restriction to the elements where `keep` is true.
    pub fn restrict(&self, keep: &[bool]) -> Self {
        PartialAssignment {
            values: self
                .values
                .iter()
                .zip(keep)
                .map(|(&v, &k)| if k { v } else { None })
                .collect(),
        }
    }

    /// True when `other` agrees with `self` everywhere `self` is defined.
    pub fn is_extended_by(&self, other: &PartialAssignment) -> bool {
        self.values
            .iter()
            .zip(&other.values)
            .all(|(a, b)| a.is_none() || a == b)
    }
}

impl From<&Homomorphism> for PartialAssignment {
    fn from(h: &Homomorphism) -> Self {
        PartialAssignment {
            values: h.0.iter().map(|&v| Some(v)).collect(),
        }
    }
}

/// A total map from a source universe into a target universe.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Homomorphism(pub Vec<usize>);

impl Homomorphism {
    pub fn identity(len: usize) -> Self {
        Homomorphism((0..len).collect())
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    pub fn image(&self, x: usize) -> usize {
        self.0[x]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn restrict(&self, keep: &[bool]) -> PartialAssignment {
        PartialAssignment::from(self).restrict(keep)
    }
}

/// Resolves the tables of `target` that interpret each symbol of `source`.
///
/// A source symbol that the target does not declare is read as an empty
/// relation; declaring it with a different arity is an error.
#[derive(Debug, Clone)]
pub(crate) struct Pairing<'a> {
    pub source: &'a Structure,
    pub target: &'a Structure,
    tables: Vec<Option<&'a Table>>,
}

impl<'a> Pairing<'a> {
    pub fn new(source: &'a Structure, target: &'a Structure) -> Result<Self> {
        let mut tables = Vec::with_capacity(source.vocabulary.len());
        for sym in source.vocabulary.symbols() {
            match target.vocabulary.position(&sym.name) {
                Some(j) => {
                    let tsym = target.vocabulary.symbol(j);
                    if tsym.arity != sym.arity {
                        return Err(Error::VocabularyMismatch(format!(
                            "`{}` has arity {} in {} but {} in {}",
                            sym.name,
                            sym.arity,
                            source.name,
                            tsym.arity,
                            target.name
                        )));
                    }
                    tables.push(Some(&target.tables[j]));
                }
                None => tables.push(None),
            }
        }
        Ok(Pairing {
            source,
            target,
            tables,
        })
    }

    pub fn target_table(&self, symbol: usize) -> Option<&'a Table> {
        self.tables[symbol]
    }

    pub fn target_contains(&self, symbol: usize, tuple: &[usize]) -> bool {
        self.tables[symbol].is_some_and(|t| t.contains(tuple))
    }

    /// Checks every source tuple whose entries are all assigned.
    pub fn preserves(&self, values: &[Option<usize>]) -> bool {
        let mut image = Vec::new();
        for (s, tuple) in self.source.tuples() {
            image.clear();
            for &x in tuple {
                match values[x] {
                    Some(v) => image.push(v),
                    None => break,
                }
            }
            if image.len() == tuple.len() && !self.target_contains(s, &image) {
                return false;
            }
        }
        true
    }

    pub fn preserves_total(&self, values: &[usize]) -> bool {
        let mut image = Vec::new();
        self.source.tuples().all(|(s, tuple)| {
            image.clear();
            image.extend(tuple.iter().map(|&x| values[x]));
            self.target_contains(s, &image)
        })
    }
}

fn check_ranges(values: &[Option<usize>], a: &Structure, b: &Structure) -> Result<()> {
    if values.len() != a.len() {
        return Err(Error::Domain(format!(
            "assignment covers {} elements but the source has {}",
            values.len(),
            a.len()
        )));
    }
    if let Some(v) = values.iter().flatten().find(|&&v| v >= b.len()) {
        return Err(Error::Domain(format!(
            "value {v} outside a target universe of size {}",
            b.len()
        )));
    }
    Ok(())
}

/// True iff `f` is a homomorphism from `A[dom f]` to `B`.
pub fn is_homomorphism(f: &PartialAssignment, a: &Structure, b: &Structure) -> Result<bool> {
    check_ranges(&f.values, a, b)?;
    Ok(Pairing::new(a, b)?.preserves(&f.values))
}

pub fn is_total_homomorphism(h: &Homomorphism, a: &Structure, b: &Structure) -> Result<bool> {
    is_homomorphism(&PartialAssignment::from(h), a, b)
}

/// Pointwise composition `outer ∘ inner`; the result is defined where `inner` is.
pub fn compose(outer: &PartialAssignment, inner: &PartialAssignment) -> Result<PartialAssignment> {
    let mut values = Vec::with_capacity(inner.len());
    for (x, v) in inner.values.iter().enumerate() {
        match v {
            None => values.push(None),
            Some(y) => match outer.values.get(*y).copied().flatten() {
                Some(z) => values.push(Some(z)),
                None => {
                    return Err(Error::Domain(format!(
                        "element {x} maps to {y}, where the outer map is undefined"
                    )))
                }
            },
        }
    }
    Ok(PartialAssignment { values })
}

pub fn compose_total(outer: &Homomorphism, inner: &Homomorphism) -> Result<Homomorphism> {
    compose(&outer.into(), &inner.into()).map(|p| p.to_homomorphism().expect("total"))
}

/// Substructure induced on `subset` (indices into `a`), keeping universe order.
pub fn induced_substructure(a: &Structure, subset: &[usize]) -> Result<Structure> {
    let mut keep = vec![false; a.len()];
    for &x in subset {
        if x >= a.len() {
            return Err(Error::Domain(format!("element {x} not in {}", a.name)));
        }
        keep[x] = true;
    }
    Ok(induced_by_mask(a, &keep).0)
}

/// Induced substructure plus the map from old indices to new ones.
pub(crate) fn induced_by_mask(a: &Structure, keep: &[bool]) -> (Structure, Vec<Option<usize>>) {
    let mut sub = Structure::new(a.name.clone(), a.vocabulary.clone());
    let mut renumber = vec![None; a.len()];
    for (i, id) in a.elements.iter().enumerate() {
        if keep[i] {
            renumber[i] = Some(sub.add_element(id.clone()).expect("ids are unique"));
        }
    }
    let mut buf = Vec::new();
    for (s, tuple) in a.tuples() {
        buf.clear();
        buf.extend(tuple.iter().map_while(|&x| renumber[x]));
        if buf.len() == tuple.len() {
            sub.insert_tuple(s, &buf);
        }
    }
    (sub, renumber)
}

/// Primal graph: an edge between distinct elements that share a tuple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaifmanGraph {
    adjacency: Vec<BTreeSet<usize>>,
}

impl GaifmanGraph {
    pub fn with_vertices(n: usize) -> Self {
        GaifmanGraph {
            adjacency: vec![BTreeSet::new(); n],
        }
    }

    pub fn add_edge(&mut self, a: usize, b: usize) {
        if a != b {
            self.adjacency[a].insert(b);
            self.adjacency[b].insert(a);
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn neighbors(&self, v: usize) -> &BTreeSet<usize> {
        &self.adjacency[v]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].contains(&b)
    }

    /// Edges as `(a, b)` with `a < b`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(a, n)| n.range(a + 1..).map(move |&b| (a, b)))
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(BTreeSet::len).sum::<usize>() / 2
    }
}

pub fn gaifman_graph(a: &Structure) -> GaifmanGraph {
    let mut g = GaifmanGraph::with_vertices(a.len());
    for (_, tuple) in a.tuples() {
        for (i, &x) in tuple.iter().enumerate() {
            for &y in &tuple[i + 1..] {
                g.add_edge(x, y);
            }
        }
    }
    g
}
