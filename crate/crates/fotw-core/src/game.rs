//! Exact solver for the depth-stratified cops-and-robbers game, in the
//! general and the monotone variant.
//!
//! The robber is abstracted to her component: positions are pairs of a
//! cop set X and a connected component R of G - X. A cop move to Y is
//! legal when every robber answer satisfies the stratification constraint
//! max d(Y) <= min d(R'), and, in monotone mode, shrinks the robber
//! space. Cop-winning positions are the least fixed point of "some legal
//! move makes every robber answer winning".

use crate::decomposition::StratifiedGraph;
use crate::error::{guard_override, Error};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet, HashMap};

/// A game position: the cops' landed vertices and the robber component.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct GameState {
    pub cops: BTreeSet<String>,
    pub robber: BTreeSet<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GameOutcome {
    pub cops_win: bool,
    /// For each cop-winning position reachable in principle, one winning
    /// move. Present only on a win.
    pub strategy: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GamesTheoremReport {
    pub tw: i64,
    pub cop_width: usize,
    pub monotone_cop_width: usize,
    pub consistent: bool,
}

fn fmt_set(names: &[String], mask: u32) -> String {
    let items: Vec<&str> = (0..names.len())
        .filter(|&i| mask >> i & 1 == 1)
        .map(|i| names[i].as_str())
        .collect();
    format!("{{{}}}", items.join(","))
}

struct Arena {
    n: usize,
    adj: Vec<u32>,
    depth: Vec<u32>,
    moves: Vec<u32>, // all cop sets of size <= k
    components_memo: HashMap<u32, Vec<u32>>,
}

impl Arena {
    fn components(&mut self, cops: u32) -> Vec<u32> {
        if let Some(c) = self.components_memo.get(&cops) {
            return c.clone();
        }
        let mut out = Vec::new();
        let full = if self.n == 0 { 0 } else { (1u32 << self.n) - 1 };
        let mut left = !cops & full;
        while left != 0 {
            let start = left.trailing_zeros() as usize;
            let mut comp = 1u32 << start;
            let mut frontier = comp;
            while frontier != 0 {
                let mut next = 0u32;
                let mut f = frontier;
                while f != 0 {
                    let v = f.trailing_zeros() as usize;
                    f &= f - 1;
                    next |= self.adj[v] & !cops & !comp;
                }
                comp |= next;
                frontier = next;
            }
            out.push(comp);
            left &= !comp;
        }
        self.components_memo.insert(cops, out.clone());
        out
    }

    fn min_depth(&self, mask: u32) -> u32 {
        (0..self.n)
            .filter(|&v| mask >> v & 1 == 1)
            .map(|v| self.depth[v])
            .min()
            .unwrap_or(u32::MAX)
    }

    fn max_depth(&self, mask: u32) -> u32 {
        (0..self.n)
            .filter(|&v| mask >> v & 1 == 1)
            .map(|v| self.depth[v])
            .max()
            .unwrap_or(0)
    }

    /// Robber answers to the cops flying from X to Y while she sits in R.
    /// None means she is captured.
    fn answers(&mut self, x: u32, r: u32, y: u32) -> Vec<u32> {
        let stay = x & y;
        let reach = self
            .components(stay)
            .into_iter()
            .find(|c| c & r != 0)
            .expect("the robber component survives outside X intersect Y");
        self.components(y)
            .into_iter()
            .filter(|c| c & reach != 0)
            .collect()
    }
}

/// Do `k` cops win the d-stratified game on `sg`? Guarded at 12 vertices
/// and 6 cops.
pub fn cops_win(sg: &StratifiedGraph, k: usize, monotone: bool) -> Result<GameOutcome, Error> {
    if (sg.n() > 12 || k > 6) && !guard_override() {
        return Err(Error::TooLarge(format!(
            "{} vertices, {k} cops (max 12 and 6)",
            sg.n()
        )));
    }
    Ok(solve(sg, k, monotone))
}

fn solve(sg: &StratifiedGraph, k: usize, monotone: bool) -> GameOutcome {
    let names: Vec<String> = sg.graph.vertices.iter().cloned().collect();
    let n = names.len();
    assert!(n <= 31, "bitmask arena");
    let index: BTreeMap<&String, usize> = names.iter().enumerate().map(|(i, v)| (v, i)).collect();
    let mut adj = vec![0u32; n];
    for (a, b) in &sg.graph.edges {
        let (i, j) = (index[a], index[b]);
        adj[i] |= 1 << j;
        adj[j] |= 1 << i;
    }
    let depth: Vec<u32> = names.iter().map(|v| sg.depth[v]).collect();
    let full: u32 = if n == 0 { 0 } else { (1u32 << n) - 1 };
    let moves: Vec<u32> = (0..=full)
        .filter(|m| m.count_ones() as usize <= k)
        .collect();
    let mut arena = Arena {
        n,
        adj,
        depth,
        moves,
        components_memo: HashMap::new(),
    };

    // all legal positions (X, R), including the virtual opening X = 0
    let moves = arena.moves.clone();
    let mut states: Vec<(u32, u32)> = Vec::new();
    for &x in &moves {
        for r in arena.components(x) {
            if arena.max_depth(x) <= arena.min_depth(r) {
                states.push((x, r));
            }
        }
    }
    let state_id: HashMap<(u32, u32), usize> =
        states.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let mut winning = vec![false; states.len()];
    let mut witness: Vec<Option<u32>> = vec![None; states.len()];

    loop {
        let mut changed = false;
        for (i, &(x, r)) in states.iter().enumerate() {
            if winning[i] {
                continue;
            }
            'moves: for &y in &moves {
                let answers = arena.answers(x, r, y);
                for &a in &answers {
                    if arena.max_depth(y) > arena.min_depth(a) {
                        continue 'moves; // stratification forbids this flight
                    }
                    if monotone && a & !r != 0 {
                        continue 'moves; // the robber space would grow
                    }
                    match state_id.get(&(y, a)) {
                        Some(&j) if winning[j] => {}
                        _ => continue 'moves,
                    }
                }
                winning[i] = true;
                witness[i] = Some(y);
                changed = true;
                break;
            }
        }
        if !changed {
            break;
        }
    }

    let opening_components = arena.components(0);
    let win = opening_components
        .iter()
        .all(|&r| winning[state_id[&(0, r)]]);
    let mut strategy = BTreeMap::new();
    if win {
        for (i, &(x, r)) in states.iter().enumerate() {
            if let Some(y) = witness[i] {
                strategy.insert(
                    format!("cops={} robber={}", fmt_set(&names, x), fmt_set(&names, r)),
                    fmt_set(&names, y),
                );
            }
        }
    }
    GameOutcome { cops_win: win, strategy }
}

/// Smallest k winning in each mode, compared against the stratified
/// tree-width. Probes k from 0 up to the vertex count, so only the
/// vertex guard applies.
pub fn verify_games_theorem(sg: &StratifiedGraph) -> Result<GamesTheoremReport, Error> {
    let n = sg.n();
    if n > 12 && !guard_override() {
        return Err(Error::TooLarge(format!("{n} vertices (max 12)")));
    }
    let (tw, _) = crate::decomposition::stratified_treewidth(sg);
    let cop_width = (0..=n)
        .find(|&k| solve(sg, k, false).cops_win)
        .expect("all vertices occupied is a capture");
    let monotone_cop_width = (0..=n)
        .find(|&k| solve(sg, k, true).cops_win)
        .expect("all vertices occupied is a capture");
    let consistent = cop_width == monotone_cop_width && cop_width as i64 == tw + 1;
    Ok(GamesTheoremReport {
        tw,
        cop_width,
        monotone_cop_width,
        consistent,
    })
}
