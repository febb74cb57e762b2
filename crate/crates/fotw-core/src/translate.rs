//! Compilation of bounded-width formulas into the fragment where every
//! subformula has at most k free variables, and from there into k
//! variable names; plus the reverse direction reading a decomposition
//! off the syntax tree.

use crate::decomposition::{check_decomposition, StratifiedGraph, TreeDecomposition};
use crate::error::Error;
use crate::formula::{
    expand_monotone, formula_graph, mk_and, mk_or, mk_quant, Formula, Path, Quant, Term,
    AUX_PREFIX,
};
use crate::order::{analyze, phi_x_paths};
use crate::xenerp::to_xenerp;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};

/// One auxiliary relation symbol and its defining formula. The defining
/// body's free variables are exactly a subset of `params`, and every
/// occurrence of the symbol carries `params` verbatim as its argument
/// tuple, so expansion is literal replacement.
#[derive(Debug, Clone, Serialize)]
pub struct AuxDef {
    pub name: String,
    pub params: Vec<String>,
    pub body: Formula,
}

/// Working state of the translation loop.
#[derive(Debug, Clone, Serialize)]
pub struct TranslationState {
    pub formula: Formula,
    pub td: TreeDecomposition,
    pub substitution: Vec<AuxDef>,
}

/// A rendered snapshot of one loop iteration, for `--show-steps`.
#[derive(Debug, Clone, Serialize)]
pub struct TranslationStep {
    pub iteration: usize,
    pub action: String,
    pub formula: String,
}

/// Max over all subformulas of the number of free variables.
pub fn fokm_width(f: &Formula) -> usize {
    f.paths()
        .into_iter()
        .map(|p| f.at(&p).free_vars().len())
        .max()
        .unwrap_or(0)
}

/// Translate `f` into an equivalent formula all of whose subformulas have
/// at most `width(td) + 1` free variables. `td` must be a valid
/// ead-stratified decomposition of `f`.
pub fn to_fokm(f: &Formula, td: &TreeDecomposition) -> Result<Formula, Error> {
    to_fokm_traced(f, td).map(|(out, _)| out)
}

pub fn to_fokm_traced(
    f: &Formula,
    td: &TreeDecomposition,
) -> Result<(Formula, Vec<TranslationStep>), Error> {
    if let Some(v) = f.straightness_violation() {
        return Err(Error::NotStraight(v));
    }
    if !f.is_nnf() {
        return Err(Error::NotNnf);
    }
    let analysis = analyze(f);
    let sg = StratifiedGraph::new(formula_graph(f), analysis.ead);
    let report = check_decomposition(&sg, td);
    if !report.valid {
        return Err(Error::InvalidDecomposition(report.violations.join("; ")));
    }

    let mut state = TranslationState {
        formula: to_xenerp(f),
        td: td.clone(),
        substitution: Vec::new(),
    };
    let mut steps = Vec::new();
    let mut iteration = 0;
    loop {
        iteration += 1;
        // case 1: quantifier-free core; expand and stop
        if crate::order::is_quantifier_free(&state.formula) {
            let expanded = expand_substitution(&state.formula, &state.substitution);
            let out = expand_monotone(&expanded);
            steps.push(TranslationStep {
                iteration,
                action: "quantifier-free: expanded substitution".into(),
                formula: crate::formula::render(&out),
            });
            return Ok((out, steps));
        }
        // case 2: prune a leaf bag nested in its parent
        if let Some(leaf) = (0..state.td.len()).find(|&t| {
            state.td.is_leaf(t)
                && state.td.parents[t]
                    .is_some_and(|p| state.td.bags[t].is_subset(&state.td.bags[p]))
        }) {
            state.td = remove_node(&state.td, leaf);
            steps.push(TranslationStep {
                iteration,
                action: format!("removed nested leaf bag #{leaf}"),
                formula: crate::formula::render(&state.formula),
            });
            continue;
        }
        // case 3: eliminate a deepest variable confined to one leaf bag
        let action = eliminate_step(&mut state)?;
        steps.push(TranslationStep {
            iteration,
            action,
            formula: crate::formula::render(&state.formula),
        });
    }
}

/// Splice out the binders of `vars`, collecting them in pre-order.
fn strip_binders(f: &Formula, vars: &BTreeSet<String>) -> (Formula, Vec<(Quant, String)>) {
    fn go(f: &Formula, vars: &BTreeSet<String>, out: &mut Vec<(Quant, String)>) -> Formula {
        match f {
            Formula::Quantified { q, var, body } if vars.contains(var) => {
                out.push((*q, var.clone()));
                go(body, vars, out)
            }
            Formula::Quantified { q, var, body } => {
                mk_quant(*q, var.clone(), go(body, vars, out))
            }
            Formula::Atom { .. } | Formula::NegAtom { .. } => f.clone(),
            Formula::Not(b) => Formula::Not(Box::new(go(b, vars, out))),
            Formula::And(cs) => Formula::And(cs.iter().map(|c| go(c, vars, out)).collect()),
            Formula::Or(cs) => Formula::Or(cs.iter().map(|c| go(c, vars, out)).collect()),
            Formula::Monotone { children, dnf } => Formula::Monotone {
                children: children.iter().map(|c| go(c, vars, out)).collect(),
                dnf: dnf.clone(),
            },
        }
    }
    let mut run = Vec::new();
    let stripped = go(f, vars, &mut run);
    (stripped, run)
}

fn remove_node(td: &TreeDecomposition, node: usize) -> TreeDecomposition {
    let keep: Vec<usize> = (0..td.len()).filter(|&t| t != node).collect();
    let remap: BTreeMap<usize, usize> = keep.iter().enumerate().map(|(n, &o)| (o, n)).collect();
    TreeDecomposition {
        parents: keep
            .iter()
            .map(|&t| td.parents[t].map(|p| remap[&p]))
            .collect(),
        bags: keep.iter().map(|&t| td.bags[t].clone()).collect(),
        root: remap[&td.root],
    }
}

/// The Boolean skeleton of a region over shared literal units.
enum Skel {
    Unit(usize),
    All(Vec<Skel>),
    Any(Vec<Skel>),
}

struct Units {
    items: Vec<Formula>,
}

impl Units {
    fn intern(&mut self, f: &Formula) -> usize {
        if let Some(i) = self.items.iter().position(|g| g == f) {
            i
        } else {
            self.items.push(f.clone());
            self.items.len() - 1
        }
    }
}

/// Split a region into the skeleton of its positive combination, stopping
/// at atoms using `x` and at maximal x-free subformulas.
fn skeletonize(node: &Formula, x: &str, units: &mut Units) -> Skel {
    if !node.atom_vars().contains(x) {
        return Skel::Unit(units.intern(node));
    }
    match node {
        Formula::Atom { .. } | Formula::NegAtom { .. } => Skel::Unit(units.intern(node)),
        Formula::And(cs) => Skel::All(cs.iter().map(|c| skeletonize(c, x, units)).collect()),
        Formula::Or(cs) => Skel::Any(cs.iter().map(|c| skeletonize(c, x, units)).collect()),
        Formula::Monotone { children, dnf } => {
            let kids: Vec<Skel> = children.iter().map(|c| skeletonize(c, x, units)).collect();
            Skel::Any(
                dnf.iter()
                    .map(|clause| {
                        Skel::All(
                            clause
                                .iter()
                                .map(|&i| match &kids[i] {
                                    Skel::Unit(u) => Skel::Unit(*u),
                                    _ => skeletonize(&children[i], x, units),
                                })
                                .collect(),
                        )
                    })
                    .collect(),
            )
        }
        Formula::Quantified { .. } => {
            unreachable!("the eliminated variable cannot occur under a deeper quantifier")
        }
        Formula::Not(_) => unreachable!("NNF"),
    }
}

fn absorb(mut clauses: Vec<BTreeSet<usize>>) -> Vec<BTreeSet<usize>> {
    clauses.sort();
    clauses.dedup();
    let mut out: Vec<BTreeSet<usize>> = Vec::new();
    for c in &clauses {
        if !clauses.iter().any(|d| d != c && d.is_subset(c)) {
            out.push(c.clone());
        }
    }
    out
}

fn cross(a: Vec<BTreeSet<usize>>, b: Vec<BTreeSet<usize>>) -> Vec<BTreeSet<usize>> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in &a {
        for y in &b {
            out.push(x.union(y).copied().collect());
        }
    }
    absorb(out)
}

/// Disjunctive-normal-form clauses of the skeleton (dualize to get CNF).
fn normal_form(skel: &Skel, conjunctive: bool) -> Vec<BTreeSet<usize>> {
    match skel {
        Skel::Unit(u) => vec![[*u].into_iter().collect()],
        Skel::All(cs) if !conjunctive => cs
            .iter()
            .map(|c| normal_form(c, conjunctive))
            .reduce(cross)
            .unwrap_or_else(|| vec![BTreeSet::new()]),
        Skel::All(cs) => absorb(cs.iter().flat_map(|c| normal_form(c, conjunctive)).collect()),
        Skel::Any(cs) if !conjunctive => {
            absorb(cs.iter().flat_map(|c| normal_form(c, conjunctive)).collect())
        }
        Skel::Any(cs) => cs
            .iter()
            .map(|c| normal_form(c, conjunctive))
            .reduce(cross)
            .unwrap_or_else(|| vec![BTreeSet::new()]),
    }
}

/// One case-3 elimination: hoist the co-quantified run, regroup the
/// region around the chosen variable, fold its literals into a fresh
/// auxiliary relation per clause, shrink the leaf bag, re-xenerp.
fn eliminate_step(state: &mut TranslationState) -> Result<String, Error> {
    let phi = state.formula.clone();
    let a = analyze(&phi);
    let quant = phi.quantifiers();

    // bound variable of maximal depth confined to a single leaf bag
    let max_ead = quant.keys().map(|v| a.ead[v]).max().expect("bound variables exist");
    let (x, leaf) = quant
        .keys()
        .filter(|v| a.ead[*v] == max_ead)
        .find_map(|v| {
            let holders: Vec<usize> = (0..state.td.len())
                .filter(|&t| state.td.bags[t].contains(v))
                .collect();
            match holders[..] {
                [t] if state.td.is_leaf(t) => Some((v.clone(), t)),
                _ => None,
            }
        })
        .expect("some deepest variable lives in exactly one leaf bag");
    let qx = quant[&x];

    // scope of x; the variables entangled with x get hoisted out in front
    let binder = phi
        .paths()
        .into_iter()
        .find(|p| matches!(phi.at(p), Formula::Quantified { var, .. } if *var == x))
        .expect("x is bound");
    let scope = {
        let mut p = binder.clone();
        p.push(0);
        phi.at(&p).clone()
    };
    let entangled_with_x: BTreeSet<String> = scope
        .quantifiers()
        .keys()
        .filter(|y| a.entangled_holds(&x, y))
        .cloned()
        .collect();
    debug_assert!(
        entangled_with_x.iter().all(|y| quant[y] == qx),
        "depth-maximality forces the hoisted variables to share {x}'s quantifier"
    );
    let (region, run) = strip_binders(&scope, &entangled_with_x);
    debug_assert!(
        {
            // no hoisted variable was quantified under a kept one
            let kept: BTreeSet<String> = region.quantifiers().keys().cloned().collect();
            run.iter().all(|(_, v)| {
                !scope.paths().iter().any(|p| {
                    matches!(scope.at(p), Formula::Quantified { var, .. } if var == v)
                        && (0..p.len()).any(|i| {
                            matches!(scope.at(&p[..i]),
                                Formula::Quantified { var, .. } if kept.contains(var))
                        })
                })
            })
        },
        "hoisting must not cross a kept quantifier"
    );
    let _ = phi_x_paths(&phi, &a);

    // regroup the region into clauses over shared units
    let mut units = Units { items: Vec::new() };
    let skel = skeletonize(&region, &x, &mut units);
    let conjunctive = qx == Quant::Forall;
    let clauses = normal_form(&skel, conjunctive);

    let bag = state.td.bags[leaf].clone();
    let params: Vec<String> = bag.iter().filter(|v| **v != x).cloned().collect();
    let uses_x: Vec<bool> = units
        .items
        .iter()
        .map(|u| u.atom_vars().contains(&x))
        .collect();

    // new clauses over (kept units + auxiliary atoms)
    let mut new_children: Vec<Formula> = Vec::new();
    let mut child_index: BTreeMap<usize, usize> = BTreeMap::new(); // old unit -> child slot
    let mut new_clauses: Vec<BTreeSet<usize>> = Vec::new();
    let mut aux_created = 0usize;
    for clause in &clauses {
        let (plus, minus): (Vec<usize>, Vec<usize>) =
            clause.iter().partition(|&&u| uses_x[u]);
        let mut out_clause: BTreeSet<usize> = BTreeSet::new();
        for u in minus {
            let slot = *child_index.entry(u).or_insert_with(|| {
                new_children.push(units.items[u].clone());
                new_children.len() - 1
            });
            out_clause.insert(slot);
        }
        if !plus.is_empty() {
            for &u in &plus {
                debug_assert!(
                    units.items[u].atom_vars().is_subset(&bag),
                    "literals using {x} are covered by the leaf bag"
                );
            }
            let name = format!("{AUX_PREFIX}{x}_{}", state.substitution.len());
            let lits: Vec<Formula> = plus.iter().map(|&u| units.items[u].clone()).collect();
            let body = mk_quant(
                qx,
                x.clone(),
                if conjunctive { mk_or(lits) } else { mk_and(lits) },
            );
            state.substitution.push(AuxDef {
                name: name.clone(),
                params: params.clone(),
                body,
            });
            aux_created += 1;
            let atom = Formula::Atom {
                rel: name,
                args: params.iter().map(|v| Term::Var(v.clone())).collect(),
            };
            new_children.push(atom);
            out_clause.insert(new_children.len() - 1);
        }
        new_clauses.push(out_clause);
    }
    // in CNF mode the clause list is a conjunction; distribute it into the
    // stored disjunctive form
    let dnf = if conjunctive {
        new_clauses
            .iter()
            .map(|c| c.iter().map(|&i| [i].into_iter().collect()).collect::<Vec<BTreeSet<usize>>>())
            .reduce(cross)
            .unwrap_or_else(|| vec![BTreeSet::new()])
    } else {
        new_clauses
    };
    let combo = Formula::Monotone { children: new_children, dnf };

    let mut replacement = combo;
    for (q, v) in run.into_iter().rev() {
        replacement = mk_quant(q, v, replacement);
    }
    let mut next = phi.clone();
    *next.at_mut(&binder) = replacement;

    state.td.bags[leaf].remove(&x);
    state.formula = to_xenerp(&next);

    debug_assert!(
        {
            let a2 = analyze(&state.formula);
            let sg = StratifiedGraph::new(formula_graph(&state.formula), a2.ead);
            check_decomposition(&sg, &state.td).valid
        },
        "the shrunken decomposition stays valid for the rewritten formula"
    );
    Ok(format!(
        "eliminated {x} from bag #{leaf} ({} clause(s), {aux_created} auxiliary symbol(s))",
        clauses.len()
    ))
}

/// Replace every auxiliary atom by its defining formula. Definitions may
/// reference earlier definitions; iterate to the fixed point.
fn expand_substitution(f: &Formula, subs: &[AuxDef]) -> Formula {
    let by_name: BTreeMap<&str, &AuxDef> = subs.iter().map(|d| (d.name.as_str(), d)).collect();
    let mut cur = f.clone();
    loop {
        let (next, changed) = expand_once(&cur, &by_name);
        if !changed {
            return next;
        }
        cur = next;
    }
}

fn expand_once(f: &Formula, defs: &BTreeMap<&str, &AuxDef>) -> (Formula, bool) {
    match f {
        Formula::Atom { rel, args } if rel.starts_with(AUX_PREFIX) => {
            let def = defs.get(rel.as_str()).expect("auxiliary symbol has a definition");
            let actual: Vec<String> = args
                .iter()
                .map(|t| t.var().expect("auxiliary atoms carry variables").to_owned())
                .collect();
            debug_assert_eq!(actual, def.params, "auxiliary atoms repeat their parameter tuple");
            (def.body.clone(), true)
        }
        Formula::Atom { .. } | Formula::NegAtom { .. } => (f.clone(), false),
        Formula::Not(b) => {
            let (nb, ch) = expand_once(b, defs);
            (Formula::Not(Box::new(nb)), ch)
        }
        Formula::And(cs) => {
            let mut changed = false;
            let out = cs
                .iter()
                .map(|c| {
                    let (n, ch) = expand_once(c, defs);
                    changed |= ch;
                    n
                })
                .collect();
            (Formula::And(out), changed)
        }
        Formula::Or(cs) => {
            let mut changed = false;
            let out = cs
                .iter()
                .map(|c| {
                    let (n, ch) = expand_once(c, defs);
                    changed |= ch;
                    n
                })
                .collect();
            (Formula::Or(out), changed)
        }
        Formula::Monotone { children, dnf } => {
            let mut changed = false;
            let out = children
                .iter()
                .map(|c| {
                    let (n, ch) = expand_once(c, defs);
                    changed |= ch;
                    n
                })
                .collect();
            (
                Formula::Monotone { children: out, dnf: dnf.clone() },
                changed,
            )
        }
        Formula::Quantified { q, var, body } => {
            let (nb, ch) = expand_once(body, defs);
            (mk_quant(*q, var.clone(), nb), ch)
        }
    }
}

/// Rename bound variables so the whole formula uses at most
/// `max(fokm_width(f), |free(f)|)` distinct names, reusing names
/// top-down. The result is generally not straight.
pub fn rename_to_k_vars(f: &Formula) -> Result<Formula, Error> {
    rename_to_k_vars_with(f, fokm_width(f))
}

/// Same, against an explicit budget `k`.
pub fn rename_to_k_vars_with(f: &Formula, k: usize) -> Result<Formula, Error> {
    let w = fokm_width(f);
    if w > k {
        return Err(Error::WidthExceedsK(format!(
            "a subformula has {w} free variables, budget is {k}"
        )));
    }
    let free: Vec<String> = f.free_vars().into_iter().collect();
    let mut pool: Vec<String> = free.clone();
    let mut i = 1;
    while pool.len() < k {
        let cand = format!("v{i}");
        if !pool.contains(&cand) {
            pool.push(cand);
        }
        i += 1;
    }
    let env: BTreeMap<String, String> = free.iter().map(|v| (v.clone(), v.clone())).collect();
    Ok(rename_rec(f, &pool, &env))
}

fn rename_rec(f: &Formula, pool: &[String], env: &BTreeMap<String, String>) -> Formula {
    match f {
        Formula::Atom { rel, args } => Formula::Atom {
            rel: rel.clone(),
            args: rename_terms(args, env),
        },
        Formula::NegAtom { rel, args } => Formula::NegAtom {
            rel: rel.clone(),
            args: rename_terms(args, env),
        },
        Formula::Not(b) => Formula::Not(Box::new(rename_rec(b, pool, env))),
        Formula::And(cs) => Formula::And(cs.iter().map(|c| rename_rec(c, pool, env)).collect()),
        Formula::Or(cs) => Formula::Or(cs.iter().map(|c| rename_rec(c, pool, env)).collect()),
        Formula::Monotone { children, dnf } => Formula::Monotone {
            children: children.iter().map(|c| rename_rec(c, pool, env)).collect(),
            dnf: dnf.clone(),
        },
        Formula::Quantified { q, var, body } => {
            let visible: BTreeSet<String> = body
                .free_vars()
                .into_iter()
                .filter(|v| v != var)
                .map(|v| env.get(&v).cloned().unwrap_or(v))
                .collect();
            if !body.free_vars().contains(var) {
                // vacuous over a nonempty domain
                return rename_rec(body, pool, env);
            }
            let name = pool
                .iter()
                .find(|n| !visible.contains(*n))
                .expect("a subformula with <= k free variables leaves a name over")
                .clone();
            let mut env2 = env.clone();
            env2.insert(var.clone(), name.clone());
            mk_quant(*q, name, rename_rec(body, pool, &env2))
        }
    }
}

fn rename_terms(args: &[Term], env: &BTreeMap<String, String>) -> Vec<Term> {
    args.iter()
        .map(|t| match t {
            Term::Var(v) => Term::Var(env.get(v).cloned().unwrap_or_else(|| v.clone())),
            c => c.clone(),
        })
        .collect()
}

/// Read a decomposition off the syntax tree: one node per subformula,
/// bags are the free variables. Valid and alternation-depth stratified
/// for straight NNF input, of width `fokm_width(f) - 1`.
pub fn decomposition_from_fokm(f: &Formula) -> TreeDecomposition {
    debug_assert!(f.is_straight() && f.is_nnf());
    let paths = f.paths();
    let index: BTreeMap<&Path, usize> = paths.iter().enumerate().map(|(i, p)| (p, i)).collect();
    let parents: Vec<Option<usize>> = paths
        .iter()
        .map(|p| {
            if p.is_empty() {
                None
            } else {
                let parent: Path = p[..p.len() - 1].to_vec();
                Some(index[&parent])
            }
        })
        .collect();
    let bags = paths.iter().map(|p| f.at(p).free_vars()).collect();
    TreeDecomposition { parents, bags, root: 0 }
}
