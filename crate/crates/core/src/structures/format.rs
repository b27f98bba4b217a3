//! Line-oriented text format for structures and homomorphisms.
//!
//! ```text
//! vocab
//! rel E 2
//! structure K3
//! elem a b c
//! tuple E a b
//! end
//! ```

use std::fmt::Write;

use super::{Homomorphism, Structure, Vocabulary};
use crate::error::{Error, Result};

#[derive(PartialEq)]
enum Section {
    Start,
    Vocab,
    Body,
    Done,
}

/// Removes a trailing `#` comment and surrounding whitespace.
pub(crate) fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => line[..i].trim(),
        None => line.trim(),
    }
}

pub fn parse_structure(text: &str) -> Result<Structure> {
    let mut section = Section::Start;
    let mut vocab = Vocabulary::new();
    let mut structure: Option<Structure> = None;

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = strip_comment(raw);
        if content.is_empty() {
            continue;
        }
        let mut words = content.split_whitespace();
        let keyword = words.next().expect("non-empty line");
        let args: Vec<&str> = words.collect();

        match (keyword, &section) {
            (_, Section::Done) => {
                return Err(Error::syntax(line, "content after `end`"));
            }
            ("vocab", Section::Start) => {
                if !args.is_empty() {
                    return Err(Error::syntax(line, "`vocab` takes no arguments"));
                }
                section = Section::Vocab;
            }
            ("rel", Section::Vocab) => {
                let [name, arity] = args[..] else {
                    return Err(Error::syntax(line, "expected `rel <name> <arity>`"));
                };
                let arity: usize = arity
                    .parse()
                    .map_err(|_| Error::syntax(line, format!("bad arity `{arity}`")))?;
                if arity == 0 {
                    return Err(Error::syntax(line, "arity must be at least 1"));
                }
                if vocab.position(name).is_some() {
                    return Err(Error::Duplicate {
                        line,
                        what: "relation",
                        name: name.to_string(),
                    });
                }
                vocab.push(name, arity)?;
            }
            ("structure", Section::Start | Section::Vocab) => {
                let [name] = args[..] else {
                    return Err(Error::syntax(line, "expected `structure <name>`"));
                };
                structure = Some(Structure::new(name, std::mem::take(&mut vocab)));
                section = Section::Body;
            }
            ("elem", Section::Body) => {
                let s = structure.as_mut().expect("body has a structure");
                if args.is_empty() {
                    return Err(Error::syntax(line, "`elem` needs at least one id"));
                }
                for id in args {
                    if s.element_index(id).is_some() {
                        return Err(Error::Duplicate {
                            line,
                            what: "element",
                            name: id.to_string(),
                        });
                    }
                    s.add_element(id)?;
                }
            }
            ("tuple", Section::Body) => {
                let s = structure.as_mut().expect("body has a structure");
                let Some((&name, ids)) = args.split_first() else {
                    return Err(Error::syntax(line, "expected `tuple <rel> <id>...`"));
                };
                let symbol = s.vocabulary().position(name).ok_or_else(|| Error::UnknownSymbol {
                    line,
                    symbol: name.to_string(),
                })?;
                let arity = s.vocabulary().symbol(symbol).arity;
                if ids.len() != arity {
                    return Err(Error::ArityMismatch {
                        line,
                        symbol: name.to_string(),
                        expected: arity,
                        found: ids.len(),
                    });
                }
                let mut tuple = Vec::with_capacity(arity);
                for id in ids {
                    tuple.push(s.element_index(id).ok_or_else(|| Error::UnknownElement {
                        line,
                        element: id.to_string(),
                    })?);
                }
                if s.table(symbol).contains(&tuple) {
                    return Err(Error::Duplicate {
                        line,
                        what: "tuple",
                        name: content.to_string(),
                    });
                }
                s.add_tuple(symbol, &tuple)?;
            }
            ("end", Section::Body) => {
                if !args.is_empty() {
                    return Err(Error::syntax(line, "`end` takes no arguments"));
                }
                section = Section::Done;
            }
            (other, _) => {
                return Err(Error::syntax(line, format!("unexpected `{other}`")));
            }
        }
    }

    match section {
        Section::Done => Ok(structure.expect("structure parsed")),
        _ => Err(Error::syntax(
            text.lines().count().max(1),
            "missing `structure ... end` block",
        )),
    }
}

/// Canonical text: one `elem` line, tuples grouped by symbol in vocabulary order.
pub fn serialize_structure(s: &Structure) -> String {
    let mut out = String::from("vocab\n");
    for sym in s.vocabulary().symbols() {
        writeln!(out, "rel {} {}", sym.name, sym.arity).unwrap();
    }
    writeln!(out, "structure {}", s.name()).unwrap();
    if !s.is_empty() {
        writeln!(out, "elem {}", s.elements().join(" ")).unwrap();
    }
    for (symbol, tuple) in s.tuples() {
        out.push_str("tuple ");
        out.push_str(&s.vocabulary().symbol(symbol).name);
        for &x in tuple {
            out.push(' ');
            out.push_str(s.element_name(x));
        }
        out.push('\n');
    }
    out.push_str("end\n");
    out
}

/// `src:dst` pairs, space separated, sources in universe order.
pub fn format_homomorphism(h: &Homomorphism, source: &Structure, target: &Structure) -> String {
    let mut out = String::new();
    for (x, &v) in h.images().iter().enumerate() {
        if x > 0 {
            out.push(' ');
        }
        out.push_str(source.element_name(x));
        out.push(':');
        out.push_str(target.element_name(v));
    }
    out
}

pub fn parse_homomorphism(line: &str, source: &Structure, target: &Structure) -> Result<Homomorphism> {
    let mut values = vec![None; source.len()];
    for pair in line.split_whitespace() {
        let (src, dst) = pair
            .split_once(':')
            .ok_or_else(|| Error::syntax(1, format!("expected `src:dst`, got `{pair}`")))?;
        let x = source.element_index(src).ok_or_else(|| Error::UnknownElement {
            line: 1,
            element: src.to_string(),
        })?;
        let v = target.element_index(dst).ok_or_else(|| Error::UnknownElement {
            line: 1,
            element: dst.to_string(),
        })?;
        if values[x].replace(v).is_some() {
            return Err(Error::Duplicate {
                line: 1,
                what: "source element",
                name: src.to_string(),
            });
        }
    }
    values
        .into_iter()
        .collect::<Option<Vec<_>>>()
        .map(Homomorphism)
        .ok_or_else(|| Error::syntax(1, "mapping does not cover the source universe"))
}
