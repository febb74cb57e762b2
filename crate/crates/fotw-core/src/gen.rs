//! Seeded random instance generators for the property suites.

use crate::decomposition::StratifiedGraph;
use crate::formula::{mk_and, mk_or, mk_quant, straighten, Formula, Graph, Quant, Term, Vocabulary};
use crate::structures::Structure;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use std::collections::{BTreeMap, BTreeSet};

pub fn rng_from_seed(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Random `(G, d)`: up to `max_n` vertices named v1.., edge probability
/// 1/3, depths below `max_depth`.
pub fn rand_stratified_graph(rng: &mut StdRng, max_n: usize, max_depth: u32) -> StratifiedGraph {
    let n = rng.gen_range(0..=max_n);
    let mut g = Graph::default();
    let mut depth = BTreeMap::new();
    let names: Vec<String> = (1..=n).map(|i| format!("v{i}")).collect();
    for v in &names {
        g.vertices.insert(v.clone());
        depth.insert(v.clone(), rng.gen_range(0..=max_depth));
    }
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_ratio(1, 3) {
                g.add_edge(&names[i], &names[j]);
            }
        }
    }
    StratifiedGraph::new(g, depth)
}

/// Random normalized `(G, d)`: vertices "1".."n", depths at most n.
pub fn rand_normalized_graph(rng: &mut StdRng, max_n: usize) -> StratifiedGraph {
    let n = rng.gen_range(1..=max_n);
    let mut g = Graph::default();
    let mut depth = BTreeMap::new();
    for i in 1..=n {
        g.vertices.insert(i.to_string());
        depth.insert(i.to_string(), rng.gen_range(0..=n as u32));
    }
    for i in 1..=n {
        for j in i + 1..n + 1 {
            if rng.gen_ratio(1, 3) {
                g.add_edge(&i.to_string(), &j.to_string());
            }
        }
    }
    StratifiedGraph::new(g, depth)
}

/// The standard small test vocabulary: P/1 and R/2.
pub fn small_vocabulary() -> Vocabulary {
    let mut voc = Vocabulary::default();
    voc.relations.insert("P".into(), 1);
    voc.relations.insert("R".into(), 2);
    voc
}

/// Random straight NNF formula over [`small_vocabulary`], with at most
/// `max_vars` variables, up to two of them free.
pub fn rand_formula(rng: &mut StdRng, max_vars: usize) -> Formula {
    assert!(max_vars >= 1);
    let n_free = rng.gen_range(0..=2.min(max_vars.saturating_sub(1)));
    let free: Vec<String> = (0..n_free).map(|i| format!("u{}", i + 1)).collect();
    // the atom fallback may introduce u1 even when no free names were
    // planned; budget for it
    let reserve = if n_free == 0 { 1 } else { 0 };
    let mut fresh: Vec<String> = (0..max_vars - n_free - reserve)
        .map(|i| format!("x{}", i + 1))
        .collect();
    fresh.reverse(); // pop() hands them out in order
    let mut scope = free.clone();
    let f = gen_node(rng, 4, &mut scope, &mut fresh, &free);
    straighten(&f)
}

fn gen_node(
    rng: &mut StdRng,
    budget: usize,
    scope: &mut Vec<String>,
    fresh: &mut Vec<String>,
    free: &[String],
) -> Formula {
    let can_quantify = !fresh.is_empty();
    let choice = if budget == 0 {
        0
    } else {
        rng.gen_range(0..if can_quantify { 8 } else { 5 })
    };
    match choice {
        0 | 1 | 2 => gen_atom(rng, scope, free),
        3 | 4 => {
            let n = rng.gen_range(2..=3);
            let children: Vec<Formula> = (0..n)
                .map(|_| gen_node(rng, budget - 1, scope, fresh, free))
                .collect();
            if choice == 3 {
                mk_and(children)
            } else {
                mk_or(children)
            }
        }
        _ => {
            let var = fresh.pop().unwrap();
            let q = if rng.gen_bool(0.5) { Quant::Exists } else { Quant::Forall };
            scope.push(var.clone());
            // bias the subtree toward actually using the variable: an atom
            // mentioning it, conjoined or disjoined with the rest
            let mut body = gen_node(rng, budget - 1, scope, fresh, free);
            if !body.atom_vars().contains(&var) && rng.gen_bool(0.8) {
                let pin = Formula::Atom {
                    rel: "P".into(),
                    args: vec![Term::Var(var.clone())],
                };
                body = if rng.gen_bool(0.5) {
                    mk_and(vec![pin, body])
                } else {
                    mk_or(vec![pin, body])
                };
            }
            scope.pop();
            mk_quant(q, var, body)
        }
    }
}

fn gen_atom(rng: &mut StdRng, scope: &[String], free: &[String]) -> Formula {
    let pick = |rng: &mut StdRng| -> Term {
        if scope.is_empty() || (!free.is_empty() && rng.gen_ratio(1, 4)) {
            if free.is_empty() {
                // no variables in sight; placeholder free variable
                Term::Var("u1".into())
            } else {
                Term::Var(free.choose(rng).unwrap().clone())
            }
        } else {
            Term::Var(scope.choose(rng).unwrap().clone())
        }
    };
    let negated = rng.gen_ratio(1, 4);
    let (rel, args) = if rng.gen_bool(0.5) {
        ("P", vec![pick(rng)])
    } else {
        ("R", vec![pick(rng), pick(rng)])
    };
    if negated {
        Formula::NegAtom { rel: rel.into(), args }
    } else {
        Formula::Atom { rel: rel.into(), args }
    }
}

/// Random Boolean conjunctive query: an existential prefix over a
/// conjunction of positive atoms covering every variable.
pub fn rand_conjunctive_query(rng: &mut StdRng, max_vars: usize) -> Formula {
    let n = rng.gen_range(1..=max_vars);
    let vars: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    let n_atoms = rng.gen_range(1..=2 * n);
    let mut atoms: Vec<Formula> = (0..n_atoms)
        .map(|_| {
            let a = vars.choose(rng).unwrap().clone();
            let b = vars.choose(rng).unwrap().clone();
            Formula::Atom {
                rel: "R".into(),
                args: vec![Term::Var(a), Term::Var(b)],
            }
        })
        .collect();
    let covered: BTreeSet<String> = atoms
        .iter()
        .flat_map(|a| a.atom_vars())
        .collect();
    for v in &vars {
        if !covered.contains(v) {
            atoms.push(Formula::Atom {
                rel: "P".into(),
                args: vec![Term::Var(v.clone())],
            });
        }
    }
    let mut f = mk_and(atoms);
    for v in vars.into_iter().rev() {
        f = mk_quant(Quant::Exists, v, f);
    }
    straighten(&f)
}

/// Random structure over `voc` with `e0..` elements; each tuple present
/// with probability 1/2, constants uniform.
pub fn rand_structure(rng: &mut StdRng, voc: &Vocabulary, domain_size: usize) -> Structure {
    assert!(domain_size >= 1);
    let universe: Vec<String> = (0..domain_size).map(|i| format!("e{i}")).collect();
    let mut interpretations = BTreeMap::new();
    for (r, &ar) in &voc.relations {
        let mut set = BTreeSet::new();
        let mut tuple = vec![0usize; ar];
        loop {
            if rng.gen_bool(0.5) {
                set.insert(tuple.clone());
            }
            let mut i = ar;
            let mut done = false;
            loop {
                if i == 0 {
                    done = true;
                    break;
                }
                i -= 1;
                tuple[i] += 1;
                if tuple[i] < domain_size {
                    break;
                }
                tuple[i] = 0;
            }
            if done {
                break;
            }
        }
        interpretations.insert(r.clone(), set);
    }
    let constants = voc
        .constants
        .iter()
        .map(|c| (c.clone(), rng.gen_range(0..domain_size)))
        .collect();
    Structure {
        vocabulary: voc.clone(),
        universe,
        interpretations,
        constants,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formulas_are_straight_nnf_and_bounded() {
        let mut rng = rng_from_seed(7);
        for _ in 0..200 {
            let f = rand_formula(&mut rng, 6);
            assert!(f.is_straight());
            assert!(f.is_nnf());
            assert!(f.all_vars().len() <= 6);
        }
    }

    #[test]
    fn conjunctive_queries_are_sentences() {
        let mut rng = rng_from_seed(8);
        for _ in 0..100 {
            let q = rand_conjunctive_query(&mut rng, 8);
            assert!(q.is_sentence());
            assert!(q.is_straight());
        }
    }

    #[test]
    fn generation_is_seed_deterministic() {
        let a: Vec<Formula> = {
            let mut rng = rng_from_seed(42);
            (0..20).map(|_| rand_formula(&mut rng, 5)).collect()
        };
        let b: Vec<Formula> = {
            let mut rng = rng_from_seed(42);
            (0..20).map(|_| rand_formula(&mut rng, 5)).collect()
        };
        assert_eq!(a, b);
    }
}
