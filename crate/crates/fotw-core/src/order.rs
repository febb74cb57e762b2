//! Quantifier-interaction analysis: the scope order, the entanglement
//! closure preorder, and the depth functions derived from them.

use crate::error::Error;
use crate::formula::{Formula, Path, Quant};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};

/// Everything the downstream passes need to know about one formula's
/// variables. Relations are stored as sorted pair sets; `ead`/`ad` map
/// every variable (free variables to 0).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OrderAnalysis {
    /// Scope order on bound variables: (x, y) when x = y or y is
    /// quantified inside the scope of x.
    pub leq: BTreeSet<(String, String)>,
    /// The closure preorder: reflexive, transitive, closed under the
    /// alternation rule. Free variables appear reflexively only.
    pub preceq: BTreeSet<(String, String)>,
    /// Symmetric entanglement relation on bound variables, taken with
    /// respect to the final preorder.
    pub entangled: BTreeSet<(String, String)>,
    pub ead: BTreeMap<String, u32>,
    pub ad: BTreeMap<String, u32>,
    /// Bound variable -> path of its scope (the body of its quantifier).
    pub scope_of: BTreeMap<String, Path>,
}

impl OrderAnalysis {
    pub fn preceq_holds(&self, x: &str, y: &str) -> bool {
        x == y || self.preceq.contains(&(x.to_owned(), y.to_owned()))
    }

    pub fn entangled_holds(&self, x: &str, y: &str) -> bool {
        let (a, b) = if x < y { (x, y) } else { (y, x) };
        self.entangled.contains(&(a.to_owned(), b.to_owned()))
    }
}

/// Minimal subformula containing all atoms that use a variable from `X`.
/// This is the least common ancestor of those atoms in the syntax tree.
pub fn subformula_of_varset(f: &Formula, xs: &BTreeSet<String>) -> Result<Path, Error> {
    let mut witness_paths: Vec<Path> = Vec::new();
    collect_atoms_using(f, xs, &mut Vec::new(), &mut witness_paths);
    if witness_paths.is_empty() {
        return Err(Error::EmptyWitness);
    }
    let mut lca = witness_paths[0].clone();
    for p in &witness_paths[1..] {
        let common = lca.iter().zip(p.iter()).take_while(|(a, b)| a == b).count();
        lca.truncate(common);
    }
    Ok(lca)
}

fn collect_atoms_using(
    f: &Formula,
    xs: &BTreeSet<String>,
    path: &mut Path,
    out: &mut Vec<Path>,
) {
    match f {
        Formula::Atom { args, .. } | Formula::NegAtom { args, .. } => {
            if args.iter().any(|t| t.var().is_some_and(|v| xs.contains(v))) {
                out.push(path.clone());
            }
        }
        _ => {
            for (i, c) in f.children().iter().enumerate() {
                path.push(i);
                collect_atoms_using(c, xs, path, out);
                path.pop();
            }
        }
    }
}

/// Do any atoms below `path` mention `v`?
fn occurs_in(f: &Formula, path: &Path, v: &str) -> bool {
    f.at(path).atom_vars().contains(v)
}

struct Vars {
    bound: Vec<String>,
    quant: BTreeMap<String, Quant>,
    scope_of: BTreeMap<String, Path>,
    leq: BTreeSet<(String, String)>,
}

fn scope_info(f: &Formula) -> Vars {
    let quant = f.quantifiers();
    let mut scope_of = BTreeMap::new();
    let mut stack: Vec<Path> = vec![Vec::new()];
    while let Some(p) = stack.pop() {
        if let Formula::Quantified { var, .. } = f.at(&p) {
            let mut body = p.clone();
            body.push(0);
            scope_of.insert(var.clone(), body);
        }
        let node = f.at(&p);
        for i in 0..node.children().len() {
            let mut q = p.clone();
            q.push(i);
            stack.push(q);
        }
    }
    let bound: Vec<String> = quant.keys().cloned().collect();
    let mut leq = BTreeSet::new();
    for x in &bound {
        leq.insert((x.clone(), x.clone()));
        let scope = &scope_of[x];
        for y in &bound {
            if y != x {
                // y is quantified in the scope of x when y's quantifier node
                // lies inside x's scope subtree; its body path extends scope.
                let y_quant: &Path = &scope_of[y];
                let y_quant_node = &y_quant[..y_quant.len() - 1];
                if y_quant_node.len() >= scope.len() && y_quant_node[..scope.len()] == scope[..] {
                    leq.insert((x.clone(), y.clone()));
                }
            }
        }
    }
    Vars {
        bound,
        quant,
        scope_of,
        leq,
    }
}

/// Least fixed point of the three closure rules. Returns the analysis with
/// `preceq` and `entangled` filled in; `ead`/`ad` are computed on top by
/// [`compute_ead`] and [`compute_ad`].
pub fn compute_preceq(f: &Formula) -> OrderAnalysis {
    compute_preceq_with_order(f, None)
}

/// Same fixed point, processing candidate pairs in the given order instead
/// of lexicographically. The result is order-independent; tests use this to
/// demonstrate it.
pub fn compute_preceq_with_order(f: &Formula, pair_order: Option<&[(String, String)]>) -> OrderAnalysis {
    debug_assert!(f.is_nnf(), "preceq needs NNF input");
    debug_assert!(f.is_straight(), "preceq needs straight input");
    let info = scope_info(f);
    let all_vars = f.all_vars();
    let mut preceq: BTreeSet<(String, String)> = all_vars
        .iter()
        .map(|v| (v.clone(), v.clone()))
        .collect();

    let candidate_pairs: Vec<(String, String)> = match pair_order {
        Some(order) => order.to_vec(),
        None => {
            let mut v: Vec<(String, String)> = info
                .leq
                .iter()
                .filter(|(x, y)| x != y)
                .cloned()
                .collect();
            v.sort();
            v
        }
    };

    let mut entangled;
    loop {
        entangled = entanglement(f, &info, &preceq);
        let mut added = Vec::new();
        for (x, y) in &candidate_pairs {
            if preceq.contains(&(x.clone(), y.clone())) || !info.leq.contains(&(x.clone(), y.clone())) {
                continue;
            }
            if info.quant[x] == info.quant[y] {
                continue;
            }
            // Reachability from x to y in the entanglement graph, with every
            // node before the endpoint drawn from (x preceq) union (y preceq).
            let allowed: BTreeSet<&String> = info
                .bound
                .iter()
                .filter(|z| {
                    preceq.contains(&(x.clone(), (*z).clone()))
                        || preceq.contains(&(y.clone(), (*z).clone()))
                })
                .collect();
            if reaches(x, y, &entangled, &allowed) {
                added.push((x.clone(), y.clone()));
            }
        }
        if added.is_empty() {
            break;
        }
        preceq.extend(added);
        transitive_close(&mut preceq, &all_vars);
    }

    OrderAnalysis {
        leq: info.leq.clone(),
        preceq,
        entangled,
        ead: BTreeMap::new(),
        ad: BTreeMap::new(),
        scope_of: info.scope_of.clone(),
    }
}

fn entanglement(
    f: &Formula,
    info: &Vars,
    preceq: &BTreeSet<(String, String)>,
) -> BTreeSet<(String, String)> {
    // region(z) = minimal subformula covering the atoms of z's up-set
    let mut region: BTreeMap<&String, Path> = BTreeMap::new();
    for z in &info.bound {
        let upset: BTreeSet<String> = preceq
            .iter()
            .filter(|(a, _)| a == z)
            .map(|(_, b)| b.clone())
            .collect();
        // z occurs in some atom (straightness), so a witness exists
        let path = subformula_of_varset(f, &upset).expect("bound variable occurs in an atom");
        region.insert(z, path);
    }
    let mut out = BTreeSet::new();
    for (i, a) in info.bound.iter().enumerate() {
        for b in &info.bound[i + 1..] {
            if occurs_in(f, &region[b], a) && occurs_in(f, &region[a], b) {
                out.insert((a.clone(), b.clone()));
            }
        }
    }
    out
}

fn reaches(
    from: &String,
    to: &String,
    entangled: &BTreeSet<(String, String)>,
    allowed: &BTreeSet<&String>,
) -> bool {
    if !allowed.contains(from) {
        return false;
    }
    let mut seen: BTreeSet<&String> = BTreeSet::new();
    let mut stack = vec![from];
    seen.insert(from);
    while let Some(v) = stack.pop() {
        for (a, b) in entangled {
            let next = if a == v {
                b
            } else if b == v {
                a
            } else {
                continue;
            };
            if next == to {
                return true;
            }
            // interior nodes must come from the allowed set
            if allowed.contains(next) && seen.insert(next) {
                stack.push(next);
            }
        }
    }
    false
}

fn transitive_close(rel: &mut BTreeSet<(String, String)>, vars: &BTreeSet<String>) {
    loop {
        let mut added = Vec::new();
        for (a, b) in rel.iter() {
            for c in vars {
                if rel.contains(&(b.clone(), c.clone())) && !rel.contains(&(a.clone(), c.clone())) {
                    added.push((a.clone(), c.clone()));
                }
            }
        }
        if added.is_empty() {
            return;
        }
        rel.extend(added);
    }
}

/// Longest-path DP over the preorder: free variables get 0; a bound
/// variable starts at 1 (existential) or 2 (universal) and every strict
/// predecessor contributes its own depth plus one per quantifier change.
pub fn compute_ead(f: &Formula, analysis: &OrderAnalysis) -> BTreeMap<String, u32> {
    depth_dp(f, &analysis.preceq)
}

/// Alternation depth: the same DP over the scope order instead of the
/// closure preorder.
pub fn compute_ad(f: &Formula) -> BTreeMap<String, u32> {
    let info = scope_info(f);
    depth_dp(f, &info.leq)
}

fn depth_dp(f: &Formula, rel: &BTreeSet<(String, String)>) -> BTreeMap<String, u32> {
    let quant = f.quantifiers();
    let free = f.free_vars();
    let mut depth: BTreeMap<String, u32> = free.iter().map(|v| (v.clone(), 0)).collect();
    let base = |q: Quant| match q {
        Quant::Exists => 1,
        Quant::Forall => 2,
    };
    // process in topological order of the strict relation
    let bound: Vec<&String> = quant.keys().collect();
    let mut remaining: BTreeSet<&String> = bound.iter().copied().collect();
    while !remaining.is_empty() {
        let mut progressed = false;
        let snapshot: Vec<&String> = remaining.iter().copied().collect();
        for x in snapshot {
            let preds: Vec<&String> = bound
                .iter()
                .copied()
                .filter(|y| *y != x && rel.contains(&((*y).clone(), x.clone())))
                .collect();
            if preds.iter().any(|y| remaining.contains(y)) {
                continue;
            }
            let mut d = base(quant[x]);
            for y in preds {
                let step = if quant[y] != quant[x] { 1 } else { 0 };
                d = d.max(depth[y] + step);
            }
            depth.insert(x.clone(), d);
            remaining.remove(x);
            progressed = true;
        }
        assert!(progressed, "cycle in a depth relation; preorder not antisymmetric?");
    }
    depth
}

/// Prefix-based depth for prenex formulas: one plus the number of
/// quantifier changes before the variable, regardless of the first
/// quantifier. Free variables get 0.
pub fn compute_ad_prime(f: &Formula) -> Result<BTreeMap<String, u32>, Error> {
    let mut out: BTreeMap<String, u32> = f.free_vars().into_iter().map(|v| (v, 0)).collect();
    let mut node = f;
    let mut prev: Option<Quant> = None;
    let mut level = 1u32;
    while let Formula::Quantified { q, var, body } = node {
        if prev.is_some_and(|p| p != *q) {
            level += 1;
        }
        out.insert(var.clone(), level);
        prev = Some(*q);
        node = body;
    }
    if !is_quantifier_free(node) {
        return Err(Error::NotPrenex);
    }
    Ok(out)
}

pub fn is_quantifier_free(f: &Formula) -> bool {
    !matches!(f, Formula::Quantified { .. }) && f.children().iter().all(is_quantifier_free)
}

pub fn is_prenex(f: &Formula) -> bool {
    match f {
        Formula::Quantified { body, .. } => is_prenex(body),
        other => is_quantifier_free(other),
    }
}

/// Paths of the regions `phi_x`, the minimal subformulas covering each
/// bound variable's preorder up-set.
pub fn phi_x_paths(f: &Formula, a: &OrderAnalysis) -> BTreeMap<String, Path> {
    let mut out = BTreeMap::new();
    for x in f.quantifiers().keys() {
        let upset: BTreeSet<String> = a
            .preceq
            .iter()
            .filter(|(v, _)| v == x)
            .map(|(_, w)| w.clone())
            .collect();
        let path = subformula_of_varset(f, &upset).expect("bound variable occurs in an atom");
        out.insert(x.clone(), path);
    }
    out
}

/// Convenience: the full analysis for a straight NNF formula.
pub fn analyze(f: &Formula) -> OrderAnalysis {
    let mut a = compute_preceq(f);
    a.ead = compute_ead(f, &a);
    a.ad = compute_ad(f);
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::*;

    fn pairs(raw: &[(&str, &str)]) -> BTreeSet<(String, String)> {
        raw.iter()
            .map(|&(a, b)| (a.to_owned(), b.to_owned()))
            .collect()
    }

    fn strict(preceq: &BTreeSet<(String, String)>) -> BTreeSet<(String, String)> {
        preceq.iter().filter(|(a, b)| a != b).cloned().collect()
    }

    #[test]
    fn preceq_example_pairs() {
        let f = preceq_example();
        let a = analyze(&f);
        assert_eq!(
            strict(&a.preceq),
            pairs(&[("x", "y"), ("x", "z"), ("x", "u"), ("y", "z"), ("y", "u"), ("z", "u")])
        );
    }

    #[test]
    fn preceq_example_ead() {
        let a = analyze(&preceq_example());
        let want: BTreeMap<String, u32> = [("x", 1), ("y", 2), ("z", 3), ("u", 4)]
            .iter()
            .map(|&(v, d)| (v.to_owned(), d))
            .collect();
        assert_eq!(a.ead, want);
    }

    #[test]
    fn non_entanglement_preceq_and_depths() {
        let a = analyze(&non_entanglement_phi());
        assert_eq!(strict(&a.preceq), pairs(&[("y", "z")]));
        let ead: BTreeMap<String, u32> = [("x", 2), ("y", 1), ("z", 2)]
            .iter()
            .map(|&(v, d)| (v.to_owned(), d))
            .collect();
        assert_eq!(a.ead, ead);
        let ad: BTreeMap<String, u32> = [("x", 2), ("y", 3), ("z", 4)]
            .iter()
            .map(|&(v, d)| (v.to_owned(), d))
            .collect();
        assert_eq!(a.ad, ad);
        // psi has the same depths
        let b = analyze(&non_entanglement_psi());
        assert_eq!(b.ead, ead);
    }

    #[test]
    fn entanglement_example_values() {
        let a = analyze(&entanglement_example());
        assert!(a.entangled_holds("x", "y"));
        assert!(a.entangled_holds("x2", "y"));
        assert!(a.entangled_holds("x", "x2"));
        assert_eq!(a.ead["x"], 2);
        assert_eq!(a.ead["x2"], 2);
        assert_eq!(a.ead["y"], 3);
        assert_eq!(a.ad, a.ead);
    }

    #[test]
    fn reordering_family_depths() {
        // n = 1 is degenerate: with a single conjunct, psi_1 and phi_1 are
        // the same formula and ead(z) = 1 in both
        let phi1 = analyze(&reordering_phi(1));
        let psi1 = analyze(&reordering_psi(1));
        assert_eq!(phi1.ead["z"], 1);
        assert_eq!(psi1.ead["z"], 1);
        for n in 2..=5 {
            let phi = analyze(&reordering_phi(n));
            let psi = analyze(&reordering_psi(n));
            assert_eq!(phi.ead["z"], 1, "n = {n}");
            assert_eq!(psi.ead["z"], 3, "n = {n}");
            assert_eq!(phi.ead["y"], 2);
            assert_eq!(psi.ead["y"], 2);
            for i in 1..=n {
                assert_eq!(phi.ead[&format!("x{i}")], 1);
                assert_eq!(psi.ead[&format!("x{i}")], 1);
            }
            // preceq of the loose variant is the equality relation
            assert!(strict(&phi.preceq).is_empty());
            // ad agrees across the pair and equals ead of psi
            assert_eq!(phi.ad, psi.ad);
            assert_eq!(phi.ad, psi.ead);
        }
    }

    #[test]
    fn subformula_of_varset_examples() {
        let f = entanglement_example();
        // the {y} region is already the whole quantifier-free part
        let p = subformula_of_varset(&f, &["y".to_owned()].into_iter().collect()).unwrap();
        assert_eq!(p, vec![0, 0, 0]);

        let g = reordering_psi(3);
        // single-atom variable set: the atom itself
        let p = subformula_of_varset(&g, &["x1".to_owned()].into_iter().collect()).unwrap();
        assert!(matches!(g.at(&p), Formula::Atom { rel, .. } if rel == "R"));
    }

    #[test]
    fn subformula_of_varset_empty_witness() {
        let f = preceq_example();
        assert!(matches!(
            subformula_of_varset(&f, &["nope".to_owned()].into_iter().collect()),
            Err(Error::EmptyWitness)
        ));
    }

    #[test]
    fn parity_invariant() {
        for f in [preceq_example(), entanglement_example(), non_entanglement_phi(), star(4)] {
            let a = analyze(&f);
            for (v, q) in f.quantifiers() {
                assert_eq!(a.ead[&v] % 2 == 1, q == Quant::Exists, "{v}");
            }
        }
    }

    #[test]
    fn ead_at_most_ad() {
        for f in [preceq_example(), entanglement_example(), non_entanglement_phi(), reordering_psi(4)] {
            let a = analyze(&f);
            for (v, d) in &a.ead {
                assert!(*d <= a.ad[v]);
            }
        }
    }

    #[test]
    fn fixed_point_is_order_independent() {
        let f = preceq_example();
        let base = compute_preceq(&f);
        let info_pairs: Vec<(String, String)> = base
            .leq
            .iter()
            .filter(|(a, b)| a != b)
            .cloned()
            .collect();
        let mut reversed = info_pairs.clone();
        reversed.reverse();
        let alt = compute_preceq_with_order(&f, Some(&reversed));
        assert_eq!(base.preceq, alt.preceq);
        assert_eq!(base.entangled, alt.entangled);
    }

    #[test]
    fn ad_prime_values() {
        // exists x1 exists x2 forall x3. conjunction
        let f = crate::formula::parse("exists x1 x2. forall x3. P(x1) & P(x2) & P(x3)")
            .unwrap()
            .0;
        let adp = compute_ad_prime(&f).unwrap();
        assert_eq!(adp["x1"], 1);
        assert_eq!(adp["x2"], 1);
        assert_eq!(adp["x3"], 2);
    }

    #[test]
    fn ad_prime_fully_existential() {
        let f = crate::formula::parse("exists x y. E(x, y)").unwrap().0;
        let adp = compute_ad_prime(&f).unwrap();
        assert!(adp.values().all(|&d| d == 1));
    }

    #[test]
    fn ad_prime_requires_prenex() {
        let f = non_entanglement_psi();
        assert!(matches!(compute_ad_prime(&f), Err(Error::NotPrenex)));
    }

    #[test]
    fn ad_prime_equals_ad_on_figure_family() {
        for n in 1..=4 {
            let f = figure_family(n);
            let adp = compute_ad_prime(&f).unwrap();
            let ad = compute_ad(&f);
            assert_eq!(adp, ad, "n = {n}");
        }
    }
}
