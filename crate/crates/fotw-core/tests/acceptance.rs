//! Acceptance suite: one test per criterion, each printing a PASS line
//! with its measured numbers. Run with `cargo test --test acceptance`
//! (or `-- --nocapture` to see every line).

mod common;

use common::{canonicalize_impl, equivalent_on_small_structures, reference_tree};
use fotw_core::decomposition::{
    brute_force_tw, check_decomposition, component_tree, decomposition_to_ordering, fotw,
    ordering_to_decomposition, ordering_width, stratified_treewidth, StratifiedGraph,
};
use fotw_core::eval::{eval_naive, evaluate};
use fotw_core::fixtures::*;
use fotw_core::formula::{formula_graph, render, Formula};
use fotw_core::game::verify_games_theorem;
use fotw_core::gen::*;
use fotw_core::order::{analyze, compute_ad, compute_ad_prime};
use fotw_core::structures::relation_bits;
use fotw_core::translate::{fokm_width, rename_to_k_vars, to_fokm};
use fotw_core::xenerp::{is_xenerp, to_prenex, to_xenerp};
use std::collections::BTreeSet;
use std::time::Instant;

fn pass(n: u32, msg: &str) {
    println!("criterion {n}: PASS - {msg}");
}

fn ead_of(f: &Formula, v: &str) -> u32 {
    analyze(f).ead[v]
}

#[test]
fn criterion_01_paper_fixtures() {
    let t0 = Instant::now();

    // chain example: ead 1,2,3,4 along x,y,z,u
    let f = preceq_example();
    let a = analyze(&f);
    assert_eq!(a.ead["x"], 1);
    assert_eq!(a.ead["y"], 2);
    assert_eq!(a.ead["z"], 3);
    assert_eq!(a.ead["u"], 4);

    // non-entanglement example: preorder is {(y,z)} plus reflexive
    let g = non_entanglement_phi();
    let b = analyze(&g);
    let strict: BTreeSet<(String, String)> =
        b.preceq.iter().filter(|(x, y)| x != y).cloned().collect();
    assert_eq!(strict, [("y".to_owned(), "z".to_owned())].into_iter().collect());

    // entanglement example: ead(x) = ead(x2) = 2, ead(y) = 3
    let h = entanglement_example();
    assert_eq!(ead_of(&h, "x"), 2);
    assert_eq!(ead_of(&h, "x2"), 2);
    assert_eq!(ead_of(&h, "y"), 3);

    // reordering family: spreading the P(y) conjunct raises ead(z) from 1
    // to 3 (n = 1 is degenerate: the two variants are the same formula)
    assert_eq!(ead_of(&reordering_phi(1), "z"), 1);
    assert_eq!(ead_of(&reordering_psi(1), "z"), 1);
    for n in 2..=5 {
        assert_eq!(ead_of(&reordering_phi(n), "z"), 1, "phi_{n}");
        assert_eq!(ead_of(&reordering_psi(n), "z"), 3, "psi_{n}");
    }

    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 1.0, "took {dt:?}, budget 1 s");
    pass(1, &format!("paper-example fixtures exact in {dt:?}"));
}

#[test]
fn criterion_02_width_families() {
    let t0 = Instant::now();
    for n in 1..=8usize {
        let f = star(n);
        let (w, td) = fotw(&f).unwrap();
        assert_eq!(w, n as i64, "fotw(star {n})");
        assert!(check_decomposition(
            &StratifiedGraph::new(formula_graph(&f), analyze(&f).ead),
            &td
        )
        .valid);
        let flat = StratifiedGraph::flat(formula_graph(&f));
        assert_eq!(stratified_treewidth(&flat).0, 1, "tw of the {n}-star graph");
    }
    for n in 1..=8usize {
        let f = figure_family(n);
        let (w, _) = fotw(&f).unwrap();
        assert_eq!(w, 1, "fotw(figure {n})");
        let adp = compute_ad_prime(&f).unwrap();
        let sg = StratifiedGraph::new(formula_graph(&f), adp);
        assert_eq!(
            stratified_treewidth(&sg).0,
            n as i64,
            "prefix-depth width of figure {n}"
        );
    }
    let mut rng = rng_from_seed(0xc2);
    for round in 0..50 {
        let q = rand_conjunctive_query(&mut rng, 8);
        let (w, _) = fotw(&q).unwrap();
        let flat = StratifiedGraph::flat(formula_graph(&q));
        assert_eq!(w, stratified_treewidth(&flat).0, "round {round}: {}", render(&q));
    }
    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 10.0, "took {dt:?}, budget 10 s");
    pass(2, &format!("star and figure families n=1..8 plus 50 conjunctive queries in {dt:?}"));
}

#[test]
fn criterion_03_tw_equals_ew() {
    let t0 = Instant::now();
    let mut rng = rng_from_seed(0xc3);
    for round in 0..100 {
        let sg = rand_stratified_graph(&mut rng, 8, 4);
        let exact = brute_force_tw(&sg).unwrap();
        let (w, td) = stratified_treewidth(&sg);
        assert_eq!(w, exact, "round {round}");
        assert!(check_decomposition(&sg, &td).valid, "round {round}");
        let ord = decomposition_to_ordering(&sg, &td).unwrap();
        assert_eq!(ordering_width(&sg, &ord).unwrap(), exact, "round {round}");
        let td2 = ordering_to_decomposition(&sg, &ord).unwrap();
        assert_eq!(td2.width(), exact, "round {round}");
        assert!(check_decomposition(&sg, &td2).valid, "round {round}");
    }
    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 60.0, "took {dt:?}, budget 60 s");
    pass(3, &format!("100 random graphs: exact search matches brute force, round-trips exact, in {dt:?}"));
}

#[test]
fn criterion_04_depth_bounds() {
    let mut rng = rng_from_seed(0xc4);
    let mut violations = 0;
    for _ in 0..200 {
        let f = rand_formula(&mut rng, 7);
        let (w, _) = fotw(&f).unwrap();
        let ad_w = stratified_treewidth(&StratifiedGraph::new(formula_graph(&f), compute_ad(&f))).0;
        if w > ad_w {
            violations += 1;
        }
        let p = to_prenex(&f);
        let (wp, _) = fotw(&p).unwrap();
        let adp_w = stratified_treewidth(&StratifiedGraph::new(
            formula_graph(&p),
            compute_ad_prime(&p).unwrap(),
        ))
        .0;
        if wp > adp_w {
            violations += 1;
        }
    }
    assert_eq!(violations, 0);
    pass(4, "200 random formulas: fotw <= ad-width, and prefix-depth width on prenex forms");
}

#[test]
fn criterion_05_xenerp() {
    let t0 = Instant::now();
    let mut rng = rng_from_seed(0xc5);
    for round in 0..200 {
        let f = rand_formula(&mut rng, 5);
        let x = to_xenerp(&f);
        assert!(is_xenerp(&x, &analyze(&x)), "round {round}");
        assert_eq!(formula_graph(&f), formula_graph(&x), "round {round}");
        assert_eq!(analyze(&f).ead, analyze(&x).ead, "round {round}");
        // the small vocabulary keeps the check exhaustive at domain 3
        assert!(relation_bits(&f.vocabulary().unwrap(), 3) <= 20);
        assert!(
            equivalent_on_small_structures(&f, &x, 3),
            "round {round}: {} vs {}",
            render(&f),
            render(&x)
        );
    }
    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 300.0, "took {dt:?}, budget 5 min");
    pass(5, &format!("200 rewrites checked exhaustively at domain <= 3 in {dt:?}"));
}

#[test]
fn criterion_06_translation() {
    let t0 = Instant::now();
    let mut rng = rng_from_seed(0xc6);
    let mut inputs: Vec<Formula> = (0..200).map(|_| rand_formula(&mut rng, 6)).collect();
    inputs.extend([
        preceq_example(),
        entanglement_example(),
        non_entanglement_phi(),
        non_entanglement_psi(),
        reordering_phi(3),
        reordering_psi(3),
        star(3),
        figure_family(3),
    ]);
    for (round, f) in inputs.iter().enumerate() {
        let (w, td) = fotw(f).unwrap();
        let k = (w + 1) as usize;
        let out = to_fokm(f, &td).unwrap();
        assert!(
            fokm_width(&out) <= k,
            "round {round}: width {} > {k} on {}",
            fokm_width(&out),
            render(f)
        );
        let renamed = rename_to_k_vars(&out).unwrap();
        assert!(renamed.all_vars().len() <= k, "round {round}");
        assert!(
            equivalent_on_small_structures(f, &renamed, 3),
            "round {round}: {}",
            render(f)
        );
    }
    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 600.0, "took {dt:?}, budget 10 min");
    pass(6, &format!("{} translations exact at domain <= 3 in {dt:?}", inputs.len()));
}

#[test]
fn criterion_07_disjunction_free_polynomiality() {
    // the figure family is a quantified constraint family of width 1
    let mut sizes = Vec::new();
    let mut times = Vec::new();
    for n in 2..=20usize {
        let f = figure_family(n);
        let (w, td) = fotw(&f).unwrap();
        assert_eq!(w, 1);
        let mut best = f64::INFINITY;
        let mut out_size = 0usize;
        for _ in 0..3 {
            let t = Instant::now();
            let out = to_fokm(&f, &td).unwrap();
            best = best.min(t.elapsed().as_secs_f64());
            out_size = out.paths().len();
        }
        sizes.push((n as f64, out_size as f64));
        times.push((n as f64, best.max(1e-7)));
    }
    let slope = |pts: &[(f64, f64)]| {
        let pts: Vec<(f64, f64)> = pts.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
        let n = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        (n * sxy - sx * sy) / (n * sxx - sx * sx)
    };
    let size_slope = slope(&sizes[6..]); // n = 8..20, away from small-n noise
    let time_slope = slope(&times[6..]);
    // output size bounded by c * n^2 for the fitted constant
    let c = sizes
        .iter()
        .map(|&(n, s)| s / (n * n))
        .fold(f64::NEG_INFINITY, f64::max);
    for &(n, s) in &sizes {
        assert!(s <= c * n * n + 1e-9);
    }
    assert!(size_slope < 2.5, "size log-log slope {size_slope:.2}");
    assert!(time_slope < 4.0, "time log-log slope {time_slope:.2}");
    pass(7, &format!(
        "figure family n=2..20: size slope {size_slope:.2}, time slope {time_slope:.2}, c = {c:.1}"
    ));
}

#[test]
fn criterion_08_evaluation_oracle() {
    let t0 = Instant::now();
    let mut rng = rng_from_seed(0xc8);
    for round in 0..500 {
        let f = rand_formula(&mut rng, 5);
        let voc = f.vocabulary().unwrap();
        let domain = 1 + round % 4;
        let s = rand_structure(&mut rng, &voc, domain);
        let got = evaluate(&f, &s).unwrap();
        let want = eval_naive(&f, &s);
        assert_eq!(got, want, "round {round}: {}", render(&f));
    }
    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 300.0, "took {dt:?}, budget 5 min");
    pass(8, &format!("500 pipeline evaluations match the Tarski oracle in {dt:?}"));
}

#[test]
fn criterion_09_game_theorem() {
    let t0 = Instant::now();
    let mut rng = rng_from_seed(0xc9);
    let mut checked = 0;
    while checked < 100 {
        let sg = rand_stratified_graph(&mut rng, 7, 3);
        // the probe stays within 5 cops
        if stratified_treewidth(&sg).0 + 1 > 5 {
            continue;
        }
        let rep = verify_games_theorem(&sg).unwrap();
        assert!(rep.consistent, "{rep:?} on {sg:?}");
        assert_eq!(rep.cop_width as i64, rep.tw + 1);
        checked += 1;
    }
    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 600.0, "took {dt:?}, budget 10 min");
    pass(9, &format!("cop width = monotone cop width = tw + 1 on 100 graphs in {dt:?}"));
}

#[test]
fn criterion_10_component_tree_oracle() {
    let mut rng = rng_from_seed(0xca);
    for round in 0..100 {
        let sg = rand_normalized_graph(&mut rng, 8);
        let ct = component_tree(&sg, true).unwrap();
        let got = canonicalize_impl(&ct, ct.root);
        let want = reference_tree(&sg);
        assert_eq!(got, want, "round {round} on {sg:?}");
    }
    pass(10, "modified component tree matches the definition-literal reference on 100 graphs");
}
