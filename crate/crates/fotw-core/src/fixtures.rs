//! The worked example formulas used across tests and `fotw selftest`.

use crate::formula::{mk_and, mk_or, mk_quant, Formula, Quant, Term};

fn atom(rel: &str, vars: &[&str]) -> Formula {
    Formula::Atom {
        rel: rel.into(),
        args: vars.iter().map(|v| Term::Var((*v).into())).collect(),
    }
}

/// `exists x. forall y. exists z. (P(x,y) & forall u. (R(y,u) | P(z,u)))`
///
/// The chain example: ead is 1, 2, 3, 4 along x, y, z, u.
pub fn preceq_example() -> Formula {
    mk_quant(
        Quant::Exists,
        "x",
        mk_quant(
            Quant::Forall,
            "y",
            mk_quant(
                Quant::Exists,
                "z",
                mk_and(vec![
                    atom("P", &["x", "y"]),
                    mk_quant(
                        Quant::Forall,
                        "u",
                        mk_or(vec![atom("R", &["y", "u"]), atom("P", &["z", "u"])]),
                    ),
                ]),
            ),
        ),
    )
}

/// `forall x. forall x2. exists y. (((P(y) & P(x)) | P(x)) & ((P(y) & P(x2)) | P(x2)))`
///
/// x and x2 interact only through y, yet all three end up entangled.
pub fn entanglement_example() -> Formula {
    let half = |v: &str| {
        mk_or(vec![
            mk_and(vec![atom("P", &["y"]), atom("P", &[v])]),
            atom("P", &[v]),
        ])
    };
    mk_quant(
        Quant::Forall,
        "x",
        mk_quant(
            Quant::Forall,
            "x2",
            mk_quant(Quant::Exists, "y", mk_and(vec![half("x"), half("x2")])),
        ),
    )
}

/// `forall x. exists y. forall z. (R(z,y) | (P(x) & P(y)))`
///
/// x is entangled with nothing; the preorder is {(y,z)} plus reflexive.
pub fn non_entanglement_phi() -> Formula {
    mk_quant(
        Quant::Forall,
        "x",
        mk_quant(
            Quant::Exists,
            "y",
            mk_quant(
                Quant::Forall,
                "z",
                mk_or(vec![
                    atom("R", &["z", "y"]),
                    mk_and(vec![atom("P", &["x"]), atom("P", &["y"])]),
                ]),
            ),
        ),
    )
}

/// `exists y. (forall z. R(z,y) | (forall x. P(x) & P(y)))`
///
/// The xenerp twin of [`non_entanglement_phi`], equivalent to it.
pub fn non_entanglement_psi() -> Formula {
    mk_quant(
        Quant::Exists,
        "y",
        mk_or(vec![
            mk_quant(Quant::Forall, "z", atom("R", &["z", "y"])),
            mk_and(vec![
                mk_quant(Quant::Forall, "x", atom("P", &["x"])),
                atom("P", &["y"]),
            ]),
        ]),
    )
}

fn prefix_exists_xs(n: usize, body: Formula) -> Formula {
    let mut f = body;
    for i in (1..=n).rev() {
        f = mk_quant(Quant::Exists, format!("x{i}"), f);
    }
    f
}

/// Reordering family, loose variant:
/// `exists x1 .. xn. forall y. exists z. ((R(x1,z) & .. & R(xn,z)) & P(y))`
///
/// Here ead(z) = 1: y and z never interact.
pub fn reordering_phi(n: usize) -> Formula {
    assert!(n > 0);
    let mut conj: Vec<Formula> = (1..=n)
        .map(|i| atom("R", &[&format!("x{i}"), "z"]))
        .collect();
    conj.push(atom("P", &["y"]));
    prefix_exists_xs(
        n,
        mk_quant(
            Quant::Forall,
            "y",
            mk_quant(Quant::Exists, "z", mk_and(conj)),
        ),
    )
}

/// Reordering family, interleaved variant:
/// `exists x1 .. xn. forall y. exists z. ((R(x1,z) & P(y)) & .. & (R(xn,z) & P(y)))`
///
/// Spreading P(y) across the conjuncts entangles y with z, so ead(z) = 3.
pub fn reordering_psi(n: usize) -> Formula {
    assert!(n > 0);
    let conj: Vec<Formula> = (1..=n)
        .map(|i| mk_and(vec![atom("R", &[&format!("x{i}"), "z"]), atom("P", &["y"])]))
        .collect();
    prefix_exists_xs(
        n,
        mk_quant(
            Quant::Forall,
            "y",
            mk_quant(Quant::Exists, "z", Formula::And(conj)),
        ),
    )
}

/// Star family: `exists x1 .. xn. forall y. (E(x1,y) & .. & E(xn,y))`
///
/// The formula graph is the n-star with center y, tree-width 1, but the
/// stratified width is n.
pub fn star(n: usize) -> Formula {
    assert!(n > 0);
    let conj: Vec<Formula> = (1..=n)
        .map(|i| atom("E", &[&format!("x{i}"), "y"]))
        .collect();
    prefix_exists_xs(n, mk_quant(Quant::Forall, "y", mk_and(conj)))
}

/// Figure family: `exists x1 .. xn. forall y. exists z. ((R(x1,z) & .. & R(xn,z)) & P(y))`
///
/// Same shape as [`reordering_phi`]; first-order tree-width 1 although the
/// prefix-based depth forces elimination width n. Doubles as the
/// disjunction-free (quantified constraint) scaling family.
pub fn figure_family(n: usize) -> Formula {
    reordering_phi(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_straight_nnf() {
        let all = vec![
            preceq_example(),
            entanglement_example(),
            non_entanglement_phi(),
            non_entanglement_psi(),
            reordering_phi(3),
            reordering_psi(3),
            star(4),
            figure_family(2),
        ];
        for f in all {
            assert!(f.is_straight(), "{}", crate::formula::render(&f));
            assert!(f.is_nnf());
        }
    }

    #[test]
    fn fixtures_reparse() {
        for f in [preceq_example(), non_entanglement_psi(), star(3)] {
            let (g, _) = crate::formula::parse(&crate::formula::render(&f)).unwrap();
            assert_eq!(g, f);
        }
    }
}
