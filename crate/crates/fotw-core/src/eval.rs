//! Query evaluation: the naive Tarski oracle, the bottom-up bounded-width
//! evaluator, and the full pipeline through translation.

use crate::error::Error;
use crate::formula::{formula_graph, straighten, to_nnf, Formula, Term};
use crate::structures::{Relation, Structure};
use crate::translate::{fokm_width, rename_to_k_vars, to_fokm};
use std::collections::BTreeMap;

/// Direct recursive semantics; the oracle everything else is tested
/// against. Mismatched vocabularies yield the empty relation.
pub fn eval_naive(f: &Formula, s: &Structure) -> Relation {
    let Ok(voc) = f.vocabulary() else {
        return Relation::empty(f.free_vars().into_iter().collect());
    };
    if !s.vocabulary.contains(&voc) {
        return Relation::empty(f.free_vars().into_iter().collect());
    }
    let schema: Vec<String> = f.free_vars().into_iter().collect();
    let n = s.universe.len();
    let mut result = Relation::empty(schema.clone());
    let mut assignment: BTreeMap<String, usize> = BTreeMap::new();
    let mut tuple = vec![0usize; schema.len()];
    loop {
        for (i, v) in schema.iter().enumerate() {
            assignment.insert(v.clone(), tuple[i]);
        }
        if satisfies(f, s, &mut assignment) {
            result.tuples.insert(tuple.clone());
        }
        // next tuple in lexicographic order
        let mut i = schema.len();
        loop {
            if i == 0 {
                return result;
            }
            i -= 1;
            tuple[i] += 1;
            if tuple[i] < n {
                break;
            }
            tuple[i] = 0;
        }
    }
}

fn term_value(t: &Term, s: &Structure, asg: &BTreeMap<String, usize>) -> usize {
    match t {
        Term::Var(v) => *asg
            .get(v)
            .unwrap_or_else(|| panic!("unassigned variable {v}")),
        Term::Const(c) => *s
            .constants
            .get(c)
            .unwrap_or_else(|| panic!("uninterpreted constant {c}")),
    }
}

fn satisfies(f: &Formula, s: &Structure, asg: &mut BTreeMap<String, usize>) -> bool {
    match f {
        Formula::Atom { rel, args } => {
            let tuple: Vec<usize> = args.iter().map(|t| term_value(t, s, asg)).collect();
            s.interpretations.get(rel).is_some_and(|r| r.contains(&tuple))
        }
        Formula::NegAtom { rel, args } => {
            let tuple: Vec<usize> = args.iter().map(|t| term_value(t, s, asg)).collect();
            !s.interpretations.get(rel).is_some_and(|r| r.contains(&tuple))
        }
        Formula::Not(b) => !satisfies(b, s, asg),
        Formula::And(cs) => cs.iter().all(|c| satisfies(c, s, asg)),
        Formula::Or(cs) => cs.iter().any(|c| satisfies(c, s, asg)),
        Formula::Monotone { children, dnf } => {
            let vals: Vec<bool> = children.iter().map(|c| satisfies(c, s, asg)).collect();
            dnf.iter().any(|clause| clause.iter().all(|&i| vals[i]))
        }
        Formula::Quantified { q, var, body } => {
            let saved = asg.get(var).copied();
            let mut check = |val| {
                asg.insert(var.clone(), val);
                satisfies(body, s, asg)
            };
            let res = match q {
                crate::formula::Quant::Exists => (0..s.universe.len()).any(&mut check),
                crate::formula::Quant::Forall => (0..s.universe.len()).all(&mut check),
            };
            match saved {
                Some(v) => {
                    asg.insert(var.clone(), v);
                }
                None => {
                    asg.remove(var);
                }
            }
            res
        }
    }
}

/// Bottom-up evaluation assigning each subformula a relation over its free
/// variables. Requires every subformula to have at most `k` free variables;
/// intermediate tables then stay within `n^k` tuples.
pub fn eval_fokm(f: &Formula, s: &Structure, k: usize) -> Result<Relation, Error> {
    let w = fokm_width(f);
    if w > k {
        return Err(Error::WidthExceedsK(format!(
            "subformula with {w} free variables exceeds k = {k}"
        )));
    }
    let Ok(voc) = f.vocabulary() else {
        return Ok(Relation::empty(f.free_vars().into_iter().collect()));
    };
    if !s.vocabulary.contains(&voc) {
        return Ok(Relation::empty(f.free_vars().into_iter().collect()));
    }
    Ok(eval_rel(f, s, k))
}

fn cardinality_bound(n: usize, k: usize) -> u128 {
    (n as u128).pow(k as u32)
}

fn eval_rel(f: &Formula, s: &Structure, k: usize) -> Relation {
    let n = s.universe.len();
    let rel = match f {
        Formula::Atom { rel, args } => select_atom(rel, args, s, false),
        Formula::NegAtom { rel, args } => select_atom(rel, args, s, true),
        Formula::Not(_) => panic!("eval_fokm requires NNF input"),
        Formula::And(cs) => {
            let mut acc = eval_rel(&cs[0], s, k);
            for c in &cs[1..] {
                acc = join(&acc, &eval_rel(c, s, k));
            }
            acc
        }
        Formula::Or(cs) => {
            let schema: Vec<String> = f.free_vars().into_iter().collect();
            let mut acc = Relation::empty(schema.clone());
            for c in cs {
                let r = extend(&eval_rel(c, s, k), &schema, n);
                acc.tuples.extend(r.tuples);
            }
            acc
        }
        Formula::Monotone { children, dnf } => {
            let rels: Vec<Relation> = children.iter().map(|c| eval_rel(c, s, k)).collect();
            let schema: Vec<String> = f.free_vars().into_iter().collect();
            let mut acc = Relation::empty(schema.clone());
            for clause in dnf {
                let mut it = clause.iter();
                let first = *it.next().expect("nonempty DNF clause");
                let mut r = rels[first].clone();
                for &i in it {
                    r = join(&r, &rels[i]);
                }
                acc.tuples.extend(extend(&r, &schema, n).tuples);
            }
            acc
        }
        Formula::Quantified { q, var, body } => {
            let inner = eval_rel(body, s, k);
            match q {
                crate::formula::Quant::Exists => project_out(&inner, var),
                crate::formula::Quant::Forall => {
                    // complement, project, complement: tuples all of whose
                    // x-extensions are present
                    let compl = complement(&inner, n);
                    let some_missing = project_out(&compl, var);
                    complement(&some_missing, n)
                }
            }
        }
    };
    debug_assert!(
        rel.tuples.len() as u128 <= cardinality_bound(n, k),
        "intermediate relation exceeds n^k"
    );
    rel
}

fn select_atom(rel: &str, args: &[Term], s: &Structure, negated: bool) -> Relation {
    let schema: Vec<String> = {
        let mut vars: Vec<String> = args
            .iter()
            .filter_map(|t| t.var().map(str::to_owned))
            .collect();
        vars.sort();
        vars.dedup();
        vars
    };
    let stored = s.interpretations.get(rel).cloned().unwrap_or_default();
    let mut out = Relation::empty(schema.clone());
    if !negated {
        // select matching stored tuples, project onto the schema
        'tuples: for t in &stored {
            let mut asg: BTreeMap<&str, usize> = BTreeMap::new();
            for (term, &val) in args.iter().zip(t.iter()) {
                match term {
                    Term::Var(v) => {
                        if *asg.entry(v).or_insert(val) != val {
                            continue 'tuples;
                        }
                    }
                    Term::Const(c) => {
                        if s.constants.get(c) != Some(&val) {
                            continue 'tuples;
                        }
                    }
                }
            }
            out.tuples.insert(schema.iter().map(|v| asg[v.as_str()]).collect());
        }
    } else {
        // enumerate assignments over the schema, keep the absent ones
        let n = s.universe.len();
        let mut tuple = vec![0usize; schema.len()];
        loop {
            let instantiated: Vec<usize> = args
                .iter()
                .map(|term| match term {
                    Term::Var(v) => tuple[schema.iter().position(|x| x == v).unwrap()],
                    Term::Const(c) => s.constants[c],
                })
                .collect();
            if !stored.contains(&instantiated) {
                out.tuples.insert(tuple.clone());
            }
            let mut i = schema.len();
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                tuple[i] += 1;
                if tuple[i] < n {
                    break;
                }
                tuple[i] = 0;
            }
        }
    }
    out
}

/// Natural join; iterates the smaller operand.
fn join(a: &Relation, b: &Relation) -> Relation {
    let (a, b) = if a.tuples.len() <= b.tuples.len() { (a, b) } else { (b, a) };
    let mut schema: Vec<String> = a.schema.iter().chain(b.schema.iter()).cloned().collect();
    schema.sort();
    schema.dedup();
    let common: Vec<(usize, usize)> = a
        .schema
        .iter()
        .enumerate()
        .filter_map(|(i, v)| b.schema.iter().position(|w| w == v).map(|j| (i, j)))
        .collect();
    // index b by its common-variable projection
    let mut index: BTreeMap<Vec<usize>, Vec<&Vec<usize>>> = BTreeMap::new();
    for t in &b.tuples {
        let key: Vec<usize> = common.iter().map(|&(_, j)| t[j]).collect();
        index.entry(key).or_default().push(t);
    }
    let mut out = Relation::empty(schema.clone());
    let positions: Vec<(bool, usize)> = schema
        .iter()
        .map(|v| match a.schema.iter().position(|w| w == v) {
            Some(i) => (true, i),
            None => (false, b.schema.iter().position(|w| w == v).unwrap()),
        })
        .collect();
    for ta in &a.tuples {
        let key: Vec<usize> = common.iter().map(|&(i, _)| ta[i]).collect();
        if let Some(matches) = index.get(&key) {
            for tb in matches {
                out.tuples.insert(
                    positions
                        .iter()
                        .map(|&(from_a, i)| if from_a { ta[i] } else { tb[i] })
                        .collect(),
                );
            }
        }
    }
    out
}

/// Extend a relation to a superset schema by crossing with the domain on
/// the missing variables.
fn extend(r: &Relation, schema: &[String], n: usize) -> Relation {
    if r.schema == schema {
        return r.clone();
    }
    let missing: Vec<usize> = schema
        .iter()
        .enumerate()
        .filter(|(_, v)| !r.schema.contains(v))
        .map(|(i, _)| i)
        .collect();
    let old_pos: Vec<Option<usize>> = schema
        .iter()
        .map(|v| r.schema.iter().position(|w| w == v))
        .collect();
    let mut out = Relation::empty(schema.to_vec());
    for t in &r.tuples {
        let base: Vec<usize> = old_pos
            .iter()
            .map(|p| p.map(|i| t[i]).unwrap_or(0))
            .collect();
        // cross with domain over missing positions
        let mut fill = vec![0usize; missing.len()];
        loop {
            let mut tuple = base.clone();
            for (mi, &pos) in missing.iter().enumerate() {
                tuple[pos] = fill[mi];
            }
            out.tuples.insert(tuple);
            let mut i = missing.len();
            let mut done = false;
            loop {
                if i == 0 {
                    done = true;
                    break;
                }
                i -= 1;
                fill[i] += 1;
                if fill[i] < n {
                    break;
                }
                fill[i] = 0;
            }
            if done {
                break;
            }
        }
    }
    out
}

fn project_out(r: &Relation, var: &str) -> Relation {
    let Some(pos) = r.schema.iter().position(|v| v == var) else {
        // vacuous quantification over a nonempty domain
        return r.clone();
    };
    let schema: Vec<String> = r
        .schema
        .iter()
        .filter(|v| v.as_str() != var)
        .cloned()
        .collect();
    let mut out = Relation::empty(schema);
    for t in &r.tuples {
        let mut t2 = t.clone();
        t2.remove(pos);
        out.tuples.insert(t2);
    }
    out
}

fn complement(r: &Relation, n: usize) -> Relation {
    let mut out = Relation::empty(r.schema.clone());
    let mut tuple = vec![0usize; r.schema.len()];
    loop {
        if !r.tuples.contains(&tuple) {
            out.tuples.insert(tuple.clone());
        }
        let mut i = r.schema.len();
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            tuple[i] += 1;
            if tuple[i] < n {
                break;
            }
            tuple[i] = 0;
        }
    }
}

/// Full pipeline: straighten, NNF, minimum-width decomposition, translate
/// into the bounded-variable fragment, evaluate bottom-up.
pub fn evaluate(f: &Formula, s: &Structure) -> Result<Relation, Error> {
    let f = to_nnf(&straighten(f));
    let (width, td) = crate::decomposition::fotw(&f)?;
    let k = (width + 1).max(0) as usize;
    let translated = to_fokm(&f, &td)?;
    let renamed = rename_to_k_vars(&translated)?;
    debug_assert!(renamed.all_vars().len() <= k.max(renamed.free_vars().len()));
    let _ = formula_graph(&f); // cheap sanity: f stayed straight NNF
    eval_fokm(&renamed, s, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use crate::structures::parse_structure;

    fn graph3() -> Structure {
        parse_structure(
            "domain a b c\nrelation E 2\na b\nb c\nc a\nend\n",
        )
        .unwrap()
    }

    #[test]
    fn naive_mismatched_vocabulary_is_empty() {
        let (f, _) = parse("P(x)").unwrap();
        let s = graph3();
        let r = eval_naive(&f, &s);
        assert!(r.tuples.is_empty());
    }

    #[test]
    fn naive_sentence_false_on_empty_relation() {
        let (f, _) = parse("exists x. P(x)").unwrap();
        let s = parse_structure("domain a\nrelation P 1\nend\n").unwrap();
        assert_eq!(eval_naive(&f, &s).as_bool(), Some(false));
    }

    #[test]
    fn naive_atom_is_edge_table() {
        let (f, _) = parse("E(x, y)").unwrap();
        let s = parse_structure("domain a b\nrelation E 2\na b\nb a\nend\n").unwrap();
        let r = eval_naive(&f, &s);
        assert_eq!(r.schema, vec!["x".to_string(), "y".to_string()]);
        assert_eq!(r.tuples.len(), 2);
        assert!(r.tuples.contains(&vec![0, 1]));
        assert!(r.tuples.contains(&vec![1, 0]));
    }

    #[test]
    fn fokm_cycle_has_all_outdegrees() {
        let (f, _) = parse("forall x. exists y. E(x, y)").unwrap();
        let s = graph3();
        assert_eq!(eval_fokm(&f, &s, 2).unwrap().as_bool(), Some(true));
        assert_eq!(eval_naive(&f, &s).as_bool(), Some(true));
    }

    #[test]
    fn fokm_projection() {
        let (f, _) = parse("exists y. E(x, y)").unwrap();
        let s = parse_structure("domain a b c\nrelation E 2\na b\nb a\nend\n").unwrap();
        let r = eval_fokm(&f, &s, 2).unwrap();
        assert_eq!(r.tuples, [vec![0], vec![1]].into_iter().collect());
    }

    #[test]
    fn fokm_width_guard() {
        let (f, _) = parse("R(x, y, z)").unwrap();
        let s = graph3();
        assert!(matches!(eval_fokm(&f, &s, 2), Err(Error::WidthExceedsK(_))));
    }

    #[test]
    fn fokm_matches_naive_on_shadowed_names() {
        // non-straight input is legal for the bottom-up evaluator
        let (f, _) = parse("exists x. (E(x, x) | exists x. E(x, x))").unwrap();
        let s = graph3();
        assert_eq!(
            eval_fokm(&f, &s, 1).unwrap().as_bool(),
            eval_naive(&f, &s).as_bool()
        );
    }

    #[test]
    fn fokm_negated_atom_with_constant() {
        let (f, _) = parse("~E(x, @c)").unwrap();
        let s = parse_structure(
            "domain a b\nrelation E 2\na a\nend\nconstant c a\n",
        )
        .unwrap();
        let r = eval_fokm(&f, &s, 1).unwrap();
        assert_eq!(r.tuples, [vec![1]].into_iter().collect());
        assert_eq!(eval_naive(&f, &s), r);
    }

    #[test]
    fn forall_via_double_complement() {
        let (f, _) = parse("forall y. E(x, y)").unwrap();
        let s = parse_structure(
            "domain a b\nrelation E 2\na a\na b\nb a\nend\n",
        )
        .unwrap();
        let r = eval_fokm(&f, &s, 2).unwrap();
        assert_eq!(r.tuples, [vec![0]].into_iter().collect());
        assert_eq!(eval_naive(&f, &s), r);
    }
}
