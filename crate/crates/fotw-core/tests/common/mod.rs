//! Shared oracle helpers for the integration suites.

use fotw_core::decomposition::{ComponentTree, StratifiedGraph};
use fotw_core::eval::eval_naive;
use fotw_core::formula::{Formula, Vocabulary};
use fotw_core::gen::{rand_structure, rng_from_seed};
use fotw_core::structures::{enumerate_structures, relation_bits};
use std::collections::{BTreeSet, VecDeque};

pub fn joint_vocabulary(f: &Formula, g: &Formula) -> Vocabulary {
    let mut voc = f.vocabulary().expect("consistent arities");
    let gv = g.vocabulary().expect("consistent arities");
    for (r, a) in gv.relations {
        assert!(voc.relations.get(&r).map_or(true, |&b| b == a));
        voc.relations.insert(r, a);
    }
    voc.constants.extend(gv.constants);
    voc
}

/// Semantic equivalence over every structure with domain size up to
/// `max_domain`: exhaustive while the relation-bit count stays at most
/// 20, sampled (1000 structures) beyond that.
pub fn equivalent_on_small_structures(f: &Formula, g: &Formula, max_domain: usize) -> bool {
    let voc = joint_vocabulary(f, g);
    for n in 1..=max_domain {
        if relation_bits(&voc, n) <= 20 {
            for s in enumerate_structures(&voc, n).expect("guarded size") {
                if eval_naive(f, &s) != eval_naive(g, &s) {
                    return false;
                }
            }
        } else {
            let mut rng = rng_from_seed(0x5eed ^ n as u64);
            for _ in 0..1000 {
                let s = rand_structure(&mut rng, &voc, n);
                if eval_naive(f, &s) != eval_naive(g, &s) {
                    return false;
                }
            }
        }
    }
    true
}

// ---------------------------------------------------------------------------
// Component-tree reference, straight from the definitions.
// ---------------------------------------------------------------------------

/// Canonical shape of a (modified) component tree node: level, the three
/// vertex sets, the stored edge set, and the children's shapes in sorted
/// order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Canon {
    pub level: u32,
    pub d: BTreeSet<String>,
    pub d1: BTreeSet<String>,
    pub d2: BTreeSet<String>,
    pub stored: BTreeSet<(String, String)>,
    pub children: Vec<Canon>,
}

fn neighbors<'a>(sg: &'a StratifiedGraph, v: &'a str) -> Vec<&'a str> {
    sg.graph.neighbors(v).collect()
}

fn components(sg: &StratifiedGraph, inside: &BTreeSet<String>) -> Vec<BTreeSet<String>> {
    let mut left = inside.clone();
    let mut out = Vec::new();
    while let Some(start) = left.iter().next().cloned() {
        left.remove(&start);
        let mut comp = BTreeSet::from([start.clone()]);
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for u in neighbors(sg, &v) {
                if left.remove(u) {
                    comp.insert(u.to_owned());
                    queue.push_back(u.to_owned());
                }
            }
        }
        out.push(comp);
    }
    out
}

/// `G^(i)`: x and y are adjacent when some G-path joins them with all
/// internal vertices deeper than max(i, d(x), d(y)).
fn level_graph_edge(sg: &StratifiedGraph, i: u32, x: &str, y: &str) -> bool {
    let bar = i.max(sg.depth[x]).max(sg.depth[y]);
    let mut seen: BTreeSet<&str> = BTreeSet::from([x]);
    let mut queue: VecDeque<&str> = VecDeque::from([x]);
    while let Some(v) = queue.pop_front() {
        for u in neighbors(sg, v) {
            if u == y {
                return true;
            }
            if sg.depth[u] > bar && seen.insert(u) {
                queue.push_back(u);
            }
        }
    }
    false
}

fn stored_reference(
    sg: &StratifiedGraph,
    level: u32,
    d: &BTreeSet<String>,
) -> BTreeSet<(String, String)> {
    let i = level.saturating_sub(1);
    let vs: Vec<&String> = d.iter().collect();
    let mut out = BTreeSet::new();
    for (ai, a) in vs.iter().enumerate() {
        for b in &vs[ai + 1..] {
            if level_graph_edge(sg, i, a, b) {
                out.insert(((*a).clone(), (*b).clone()));
            }
        }
    }
    out
}

/// The component tree by its definition, with dropped nodes spliced out.
pub fn reference_tree(sg: &StratifiedGraph) -> Canon {
    fn build(sg: &StratifiedGraph, c: &BTreeSet<String>, level: u32) -> Vec<Canon> {
        let d: BTreeSet<String> = c.iter().filter(|v| sg.depth[*v] <= level).cloned().collect();
        let d1: BTreeSet<String> = d.iter().filter(|v| sg.depth[*v] == level).cloned().collect();
        let d2: BTreeSet<String> = d.difference(&d1).cloned().collect();
        let rest: BTreeSet<String> = c.difference(&d).cloned().collect();
        let mut children: Vec<Canon> = Vec::new();
        for comp in components(sg, &rest) {
            let mut child_c = comp.clone();
            for v in &comp {
                for u in neighbors(sg, v) {
                    child_c.insert(u.to_owned());
                }
            }
            children.extend(build(sg, &child_c, level + 1));
        }
        if level > 0 && d1.is_empty() {
            assert_eq!(children.len(), 1, "a dropped node has exactly one child");
            return children;
        }
        children.sort();
        vec![Canon {
            level,
            stored: stored_reference(sg, level, &d),
            d,
            d1,
            d2,
            children,
        }]
    }
    let all = sg.graph.vertices.clone();
    let mut roots = build(sg, &all, 0);
    assert_eq!(roots.len(), 1);
    roots.pop().unwrap()
}

pub fn canonicalize_impl(ct: &ComponentTree, node: usize) -> Canon {
    let n = &ct.nodes[node];
    let mut children: Vec<Canon> = ct
        .children(node)
        .into_iter()
        .map(|u| canonicalize_impl(ct, u))
        .collect();
    children.sort();
    Canon {
        level: n.level,
        d: n.d.clone(),
        d1: n.d1.clone(),
        d2: n.d2.clone(),
        stored: n.stored.as_ref().expect("modified tree").keys().cloned().collect(),
        children,
    }
}
