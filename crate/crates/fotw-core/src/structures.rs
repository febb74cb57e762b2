//! Finite relational structures and their line-oriented file format.

use crate::error::{guard_override, Error};
use crate::formula::Vocabulary;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};

/// A finite structure: universe elements are referred to by index into
/// `universe`, which keeps declaration order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Structure {
    pub vocabulary: Vocabulary,
    pub universe: Vec<String>,
    /// Relation name -> set of tuples of element indices.
    pub interpretations: BTreeMap<String, BTreeSet<Vec<usize>>>,
    /// Constant name -> element index.
    pub constants: BTreeMap<String, usize>,
}

impl Structure {
    pub fn element_index(&self, name: &str) -> Option<usize> {
        self.universe.iter().position(|e| e == name)
    }

    /// `|sigma| + |A| + sum |R^A| * ar(R)`.
    pub fn size(&self) -> usize {
        let sigma = self.vocabulary.relations.len() + self.vocabulary.constants.len();
        let tuples: usize = self
            .vocabulary
            .relations
            .iter()
            .map(|(r, ar)| self.interpretations.get(r).map_or(0, |t| t.len()) * ar)
            .collect::<Vec<_>>()
            .iter()
            .sum();
        sigma + self.universe.len() + tuples
    }
}

/// A query answer: a named tuple table over a sorted variable schema.
/// Sentences come back with an empty schema, where `{()}` is TRUE and
/// `{}` is FALSE.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Relation {
    /// Lexicographically sorted variable names.
    pub schema: Vec<String>,
    pub tuples: BTreeSet<Vec<usize>>,
}

impl Relation {
    pub fn boolean(value: bool) -> Relation {
        Relation {
            schema: Vec::new(),
            tuples: if value {
                std::iter::once(Vec::new()).collect()
            } else {
                BTreeSet::new()
            },
        }
    }

    pub fn empty(schema: Vec<String>) -> Relation {
        Relation {
            schema,
            tuples: BTreeSet::new(),
        }
    }

    /// For sentences: TRUE iff the empty tuple is present.
    pub fn as_bool(&self) -> Option<bool> {
        if self.schema.is_empty() {
            Some(!self.tuples.is_empty())
        } else {
            None
        }
    }
}

/// Parse the structure file format:
///
/// ```text
/// domain a b c        # universe, declaration order fixed
/// relation E 2        # opens a tuple block
/// a b
/// b c
/// end
/// constant c0 a
/// ```
pub fn parse_structure(text: &str) -> Result<Structure, Error> {
    let mut universe: Option<Vec<String>> = None;
    let mut interpretations: BTreeMap<String, BTreeSet<Vec<usize>>> = BTreeMap::new();
    let mut constants: BTreeMap<String, usize> = BTreeMap::new();
    let mut vocabulary = Vocabulary::default();
    let mut open_block: Option<(String, usize)> = None;

    let fail = |line_no: usize, msg: String| Error::Structure(format!("line {line_no}: {msg}"));

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields[0] {
            "domain" => {
                if universe.is_some() {
                    return Err(fail(line_no, "duplicate domain line".into()));
                }
                if open_block.is_some() {
                    return Err(fail(line_no, "domain inside a relation block".into()));
                }
                let elems: Vec<String> = fields[1..].iter().map(|s| s.to_string()).collect();
                if elems.is_empty() {
                    return Err(fail(line_no, "domain must list at least one element".into()));
                }
                let mut seen = BTreeSet::new();
                for e in &elems {
                    if !seen.insert(e.clone()) {
                        return Err(fail(line_no, format!("duplicate element {e}")));
                    }
                }
                universe = Some(elems);
            }
            "relation" => {
                if open_block.is_some() {
                    return Err(fail(line_no, "relation block not closed with 'end'".into()));
                }
                if fields.len() != 3 {
                    return Err(fail(line_no, "expected: relation NAME ARITY".into()));
                }
                let name = fields[1].to_string();
                let arity: usize = fields[2]
                    .parse()
                    .map_err(|_| fail(line_no, format!("bad arity {}", fields[2])))?;
                if arity == 0 {
                    return Err(fail(line_no, "arity must be positive".into()));
                }
                if vocabulary.relations.contains_key(&name) {
                    return Err(fail(line_no, format!("duplicate relation block {name}")));
                }
                vocabulary.relations.insert(name.clone(), arity);
                interpretations.insert(name.clone(), BTreeSet::new());
                open_block = Some((name, arity));
            }
            "end" => {
                if open_block.take().is_none() {
                    return Err(fail(line_no, "'end' without an open relation block".into()));
                }
            }
            "constant" => {
                if open_block.is_some() {
                    return Err(fail(line_no, "constant inside a relation block".into()));
                }
                if fields.len() != 3 {
                    return Err(fail(line_no, "expected: constant NAME ELEMENT".into()));
                }
                let uni = universe
                    .as_ref()
                    .ok_or_else(|| fail(line_no, "constant before domain".into()))?;
                let name = fields[1].to_string();
                let elem = fields[2];
                let ix = uni
                    .iter()
                    .position(|e| e == elem)
                    .ok_or_else(|| fail(line_no, format!("unknown element {elem}")))?;
                if constants.contains_key(&name) {
                    return Err(fail(line_no, format!("duplicate constant {name}")));
                }
                vocabulary.constants.insert(name.clone());
                constants.insert(name, ix);
            }
            _ => {
                // A tuple line inside an open block.
                let Some((name, arity)) = open_block.clone() else {
                    return Err(fail(line_no, format!("unexpected line {line:?}")));
                };
                let uni = universe
                    .as_ref()
                    .ok_or_else(|| fail(line_no, "tuples before domain".into()))?;
                if fields.len() != arity {
                    return Err(fail(
                        line_no,
                        format!("arity mismatch: {name} expects {arity} entries"),
                    ));
                }
                let mut tuple = Vec::with_capacity(arity);
                for e in &fields {
                    let ix = uni
                        .iter()
                        .position(|x| x == e)
                        .ok_or_else(|| fail(line_no, format!("unknown element {e}")))?;
                    tuple.push(ix);
                }
                interpretations.get_mut(&name).unwrap().insert(tuple);
            }
        }
    }
    if open_block.is_some() {
        return Err(Error::Structure("relation block not closed at end of file".into()));
    }
    let universe =
        universe.ok_or_else(|| Error::Structure("missing domain line".into()))?;
    Ok(Structure {
        vocabulary,
        universe,
        interpretations,
        constants,
    })
}

/// Render a structure back into the file format.
pub fn render_structure(s: &Structure) -> String {
    let mut out = String::new();
    out.push_str("domain");
    for e in &s.universe {
        out.push(' ');
        out.push_str(e);
    }
    out.push('\n');
    for (r, ar) in &s.vocabulary.relations {
        out.push_str(&format!("relation {r} {ar}\n"));
        if let Some(tuples) = s.interpretations.get(r) {
            for t in tuples {
                let row: Vec<&str> = t.iter().map(|&i| s.universe[i].as_str()).collect();
                out.push_str(&row.join(" "));
                out.push('\n');
            }
        }
        out.push_str("end\n");
    }
    for (c, &ix) in &s.constants {
        out.push_str(&format!("constant {c} {}\n", s.universe[ix]));
    }
    out
}

/// All structures over `voc` with universe `e0 .. e{n-1}`: every relation
/// bit assignment crossed with every constant assignment.
pub fn enumerate_structures(
    voc: &Vocabulary,
    domain_size: usize,
) -> Result<impl Iterator<Item = Structure>, Error> {
    assert!(domain_size >= 1, "structures have nonempty universes");
    let bits = relation_bits(voc, domain_size);
    if bits > 24 && !guard_override() {
        return Err(Error::TooLarge(format!(
            "{bits} relation bits at domain size {domain_size} (max 24)"
        )));
    }
    let universe: Vec<String> = (0..domain_size).map(|i| format!("e{i}")).collect();

    // Fixed slot layout: for each relation in sorted order, one bit per
    // tuple of the full cross product, tuples in lexicographic order.
    let mut slots: Vec<(String, Vec<Vec<usize>>)> = Vec::new();
    for (r, &ar) in &voc.relations {
        slots.push((r.clone(), all_tuples(domain_size, ar)));
    }
    let constants: Vec<String> = voc.constants.iter().cloned().collect();
    let n_bit_patterns: u64 = 1u64 << bits;
    let n_const_patterns: u64 = (domain_size as u64).pow(constants.len() as u32);
    let voc = voc.clone();

    Ok((0..n_bit_patterns).flat_map(move |pattern| {
        let slots = slots.clone();
        let universe = universe.clone();
        let constants = constants.clone();
        let voc = voc.clone();
        (0..n_const_patterns).map(move |cpat| {
            let mut interpretations = BTreeMap::new();
            let mut bit = 0;
            for (r, tuples) in &slots {
                let mut set = BTreeSet::new();
                for t in tuples {
                    if pattern >> bit & 1 == 1 {
                        set.insert(t.clone());
                    }
                    bit += 1;
                }
                interpretations.insert(r.clone(), set);
            }
            let mut consts = BTreeMap::new();
            let mut c = cpat;
            for name in &constants {
                consts.insert(name.clone(), (c % domain_size as u64) as usize);
                c /= domain_size as u64;
            }
            Structure {
                vocabulary: voc.clone(),
                universe: universe.clone(),
                interpretations,
                constants: consts,
            }
        })
    }))
}

/// Total number of relation bits for `voc` at the given domain size.
pub fn relation_bits(voc: &Vocabulary, domain_size: usize) -> u64 {
    voc.relations
        .values()
        .map(|&ar| (domain_size as u64).saturating_pow(ar as u32))
        .sum()
}

fn all_tuples(domain_size: usize, arity: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..arity {
        let mut next = Vec::with_capacity(out.len() * domain_size);
        for t in &out {
            for e in 0..domain_size {
                let mut t2 = t.clone();
                t2.push(e);
                next.push(t2);
            }
        }
        out = next;
    }
    out
}
