//! Xenerp normal form: quantifiers pushed maximally inward, so that every
//! region `phi_x` sits right below a quantifier run containing its own
//! binder. Established through three equivalence-preserving replacements
//! that leave the formula graph and the essential alternation depth alone.

use crate::error::Error;
use crate::formula::{mk_quant, Formula, Path, Quant};
use crate::order::{compute_preceq, phi_x_paths, OrderAnalysis};
use std::collections::{BTreeMap, BTreeSet};

/// The three replacement kinds of the rewriting system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReplacementKind {
    /// `Q_x x theta(chi_1, .., chi_n)  ->  theta(Q_x x chi_1, chi_2, ..)`
    /// where x occurs in `chi_1` only.
    PushIntoCombinationBackward,
    /// `Q_x x Q_y y chi  ->  Q_y y Q_x x chi` with `Q_x = Q_y`.
    SwapSameQuantifier,
    /// `Q_x x Q_y y chi  ->  Q_y y Q_x x chi` where `phi_x` is a proper
    /// subformula of `phi_y` and `Q_y y chi` is xenerp in the formula.
    SwapXenerpScope,
}

/// First xenerp violation in lexicographic variable order, or None.
pub fn xenerp_violation(f: &Formula, a: &OrderAnalysis) -> Option<String> {
    violating_vars(f, &phi_x_paths(f, a)).into_iter().next()
}

/// Is every bound variable's region directly below a quantifier run that
/// contains its own binder?
pub fn is_xenerp(f: &Formula, a: &OrderAnalysis) -> bool {
    xenerp_violation(f, a).is_none()
}

/// Variables whose binder is missing from the run right above their region.
fn violating_vars(f: &Formula, regions: &BTreeMap<String, Path>) -> BTreeSet<String> {
    regions
        .iter()
        .filter(|(x, path)| !run_above(f, path).contains(*x))
        .map(|(x, _)| x.clone())
        .collect()
}

/// The maximal quantifier run immediately preceding the node at `path`:
/// the variables of the consecutive `Quantified` ancestors.
fn run_above(f: &Formula, path: &Path) -> BTreeSet<String> {
    let mut run = BTreeSet::new();
    let mut cut = path.len();
    while cut > 0 {
        let parent = &path[..cut - 1];
        match f.at(parent) {
            Formula::Quantified { var, .. } => {
                run.insert(var.clone());
                cut -= 1;
            }
            _ => break,
        }
    }
    run
}

/// Apply one replacement at `site` (the path of the outer quantifier
/// node), after checking its side conditions.
pub fn apply_replacement(
    f: &Formula,
    kind: ReplacementKind,
    site: &Path,
) -> Result<Formula, Error> {
    let node = f.at(site);
    let Formula::Quantified { q, var, body } = node else {
        return Err(Error::SideCondition(format!(
            "site {site:?} is not a quantifier node"
        )));
    };
    match kind {
        ReplacementKind::PushIntoCombinationBackward => {
            let hosts: Vec<usize> = body
                .children()
                .iter()
                .enumerate()
                .filter(|(_, c)| c.atom_vars().contains(var))
                .map(|(i, _)| i)
                .collect();
            if !matches!(
                **body,
                Formula::And(_) | Formula::Or(_) | Formula::Monotone { .. }
            ) {
                return Err(Error::SideCondition(
                    "body is not a positive Boolean combination".to_owned(),
                ));
            }
            if hosts.len() != 1 {
                return Err(Error::SideCondition(format!(
                    "{var} occurs in {} children, need exactly one",
                    hosts.len()
                )));
            }
            let mut out = f.clone();
            let mut new_body = (**body).clone();
            let host = hosts[0];
            let child = new_body.children_mut()[host].clone();
            new_body.children_mut()[host] = mk_quant(*q, var.clone(), child);
            *out.at_mut(site) = new_body;
            Ok(out)
        }
        ReplacementKind::SwapSameQuantifier => {
            let Formula::Quantified { q: q2, .. } = &**body else {
                return Err(Error::SideCondition("scope does not start with a quantifier".into()));
            };
            if q2 != q {
                return Err(Error::SideCondition("quantifiers differ".into()));
            }
            Ok(swap_at(f, site))
        }
        ReplacementKind::SwapXenerpScope => {
            let Formula::Quantified { var: y, .. } = &**body else {
                return Err(Error::SideCondition("scope does not start with a quantifier".into()));
            };
            let a = compute_preceq(f);
            let regions = phi_x_paths(f, &a);
            let (px, py) = (&regions[var], &regions[y]);
            // phi_x proper subformula of phi_y: py a strict prefix of px
            if !(py.len() < px.len() && px[..py.len()] == py[..]) {
                return Err(Error::SideCondition(format!(
                    "phi_{var} is not a proper subformula of phi_{y}"
                )));
            }
            let mut inner_site = site.clone();
            inner_site.push(0);
            if !subtree_xenerp(f, &inner_site, &regions) {
                return Err(Error::SideCondition(format!(
                    "inner scope of {y} is not xenerp with respect to the formula"
                )));
            }
            Ok(swap_at(f, site))
        }
    }
}

/// Swap the two quantifiers at `site` (outer) and `site + [0]` (inner).
fn swap_at(f: &Formula, site: &Path) -> Formula {
    let mut out = f.clone();
    let node = out.at_mut(site);
    let Formula::Quantified { q: q1, var: v1, body } = node.clone() else {
        unreachable!("checked by caller")
    };
    let Formula::Quantified { q: q2, var: v2, body: inner } = *body else {
        unreachable!("checked by caller")
    };
    *node = mk_quant(q2, v2, mk_quant(q1, v1, *inner));
    out
}

/// Is the subtree rooted at `at` xenerp with respect to the whole formula:
/// does every variable quantified inside it pass the run check?
fn subtree_xenerp(f: &Formula, at: &Path, regions: &BTreeMap<String, Path>) -> bool {
    let vars = quantified_within(f, at);
    vars.iter()
        .all(|x| run_above(f, &regions[x]).contains(x))
}

fn quantified_within(f: &Formula, at: &Path) -> BTreeSet<String> {
    f.at(at).quantifiers().keys().cloned().collect()
}

/// Sum over all binders of the number of non-quantifier nodes above them.
/// A backward push-in moves one binder below one combination node and
/// shifts nothing else, so this strictly grows; quantifier swaps leave it
/// alone.
fn quantifier_depth_sum(f: &Formula) -> usize {
    let mut total = 0;
    for p in f.paths() {
        if matches!(f.at(&p), Formula::Quantified { .. }) {
            total += (0..p.len())
                .filter(|&i| !matches!(f.at(&p[..i]), Formula::Quantified { .. }))
                .count();
        }
    }
    total
}

/// Number of pairs (x, y) with x scope-below y and `phi_x` a proper
/// subformula of `phi_y`; strictly shrinks under xenerp-scope swaps.
fn nested_region_pairs(f: &Formula) -> usize {
    let a = compute_preceq(f);
    let regions = phi_x_paths(f, &a);
    let mut count = 0;
    for (x, px) in &regions {
        for (y, py) in &regions {
            if x != y
                && a.leq.contains(&(x.clone(), y.clone()))
                && py.len() < px.len()
                && px[..py.len()] == py[..]
            {
                count += 1;
            }
        }
    }
    count
}

/// Exhaustively push quantifiers inward (innermost site first, leftmost
/// path as tie-break).
fn exhaust_push_in(f: &Formula) -> Formula {
    let mut cur = f.clone();
    loop {
        let mut sites: Vec<Path> = cur
            .paths()
            .into_iter()
            .filter(|p| {
                if let Formula::Quantified { var, body, .. } = cur.at(p) {
                    matches!(
                        **body,
                        Formula::And(_) | Formula::Or(_) | Formula::Monotone { .. }
                    ) && body
                        .children()
                        .iter()
                        .filter(|c| c.atom_vars().contains(var))
                        .count()
                        == 1
                } else {
                    false
                }
            })
            .collect();
        if sites.is_empty() {
            return cur;
        }
        sites.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));
        let site = &sites[0];
        let before = quantifier_depth_sum(&cur);
        cur = apply_replacement(&cur, ReplacementKind::PushIntoCombinationBackward, site)
            .expect("site was checked");
        debug_assert!(quantifier_depth_sum(&cur) > before, "push-in must sink a binder");
    }
}

/// Rewrite into xenerp normal form. Equivalent to the input, with the
/// same formula graph and essential alternation depth.
pub fn to_xenerp(f: &Formula) -> Formula {
    debug_assert!(f.is_straight() && f.is_nnf());
    let mut cur = f.clone();
    loop {
        cur = exhaust_push_in(&cur);
        let a = compute_preceq(&cur);
        let regions = phi_x_paths(&cur, &a);
        let violating = violating_vars(&cur, &regions);
        if violating.is_empty() {
            return cur;
        }
        // scope-maximal violating variable, smallest name on ties
        let x = violating
            .iter()
            .filter(|x| {
                !violating
                    .iter()
                    .any(|y| *x != y && a.leq.contains(&((*x).clone(), y.clone())))
            })
            .next()
            .expect("a finite nonempty order has a maximal element")
            .clone();
        let site = binder_path(&cur, &x);
        let before_pairs = nested_region_pairs(&cur);
        cur = apply_replacement(&cur, ReplacementKind::SwapXenerpScope, &site)
            .unwrap_or_else(|e| panic!("swap at the maximal violating variable {x}: {e}"));
        debug_assert!(
            nested_region_pairs(&cur) < before_pairs,
            "xenerp-scope swap must shrink the nested-region count"
        );
    }
}

fn binder_path(f: &Formula, var: &str) -> Path {
    f.paths()
        .into_iter()
        .find(|p| matches!(f.at(p), Formula::Quantified { var: v, .. } if v == var))
        .expect("bound variable has a binder")
}

/// Prenex normal form by hoisting every quantifier to the front (the
/// forward direction of the push-in replacement, child prefixes
/// concatenated left to right). Input must be straight NNF.
pub fn to_prenex(f: &Formula) -> Formula {
    debug_assert!(f.is_straight() && f.is_nnf());
    let (prefix, matrix) = prenex_parts(f);
    let mut out = matrix;
    for (q, v) in prefix.into_iter().rev() {
        out = mk_quant(q, v, out);
    }
    out
}

fn prenex_parts(f: &Formula) -> (Vec<(Quant, String)>, Formula) {
    match f {
        Formula::Atom { .. } | Formula::NegAtom { .. } => (Vec::new(), f.clone()),
        Formula::Quantified { q, var, body } => {
            let (mut prefix, matrix) = prenex_parts(body);
            prefix.insert(0, (*q, var.clone()));
            (prefix, matrix)
        }
        Formula::And(cs) | Formula::Or(cs) => {
            let mut prefix = Vec::new();
            let mut matrices = Vec::new();
            for c in cs {
                let (p, m) = prenex_parts(c);
                prefix.extend(p);
                matrices.push(m);
            }
            let matrix = if matches!(f, Formula::And(_)) {
                Formula::And(matrices)
            } else {
                Formula::Or(matrices)
            };
            (prefix, matrix)
        }
        Formula::Monotone { children, dnf } => {
            let mut prefix = Vec::new();
            let mut matrices = Vec::new();
            for c in children {
                let (p, m) = prenex_parts(c);
                prefix.extend(p);
                matrices.push(m);
            }
            (
                prefix,
                Formula::Monotone { children: matrices, dnf: dnf.clone() },
            )
        }
        Formula::Not(_) => panic!("prenexing requires NNF input"),
    }
}
