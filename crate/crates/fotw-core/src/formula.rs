//! Formula ASTs: parsing, normalization (straight, NNF), the formula graph.
//!
//! Lexical classes are disjoint by construction: relation names start
//! uppercase, variables start lowercase, constants are written `@name`.

use crate::error::{Error, ParseError};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// A relational vocabulary: relation symbols with arities, plus constants.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Vocabulary {
    /// Relation name -> arity (always >= 1 for parsed formulas).
    pub relations: BTreeMap<String, usize>,
    pub constants: BTreeSet<String>,
}

impl Vocabulary {
    /// Does `self` interpret everything `other` mentions, with equal arities?
    pub fn contains(&self, other: &Vocabulary) -> bool {
        other
            .relations
            .iter()
            .all(|(r, a)| self.relations.get(r) == Some(a))
            && other.constants.iter().all(|c| self.constants.contains(c))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Term {
    Var(String),
    Const(String),
}

impl Term {
    pub fn var(&self) -> Option<&str> {
        match self {
            Term::Var(v) => Some(v),
            Term::Const(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Quant {
    Exists,
    Forall,
}

impl Quant {
    pub fn dual(self) -> Quant {
        match self {
            Quant::Exists => Quant::Forall,
            Quant::Forall => Quant::Exists,
        }
    }
}

impl fmt::Display for Quant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Quant::Exists => write!(f, "exists"),
            Quant::Forall => write!(f, "forall"),
        }
    }
}

/// Formula AST.
///
/// `Not` is parser-internal: `to_nnf` removes it. `Monotone` is a positive
/// Boolean connective given as a DNF over child indices; it only appears
/// inside the translation pipeline, never in parsed or rendered output
/// surfaces other than expansion.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub enum Formula {
    Atom { rel: String, args: Vec<Term> },
    NegAtom { rel: String, args: Vec<Term> },
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Quantified { q: Quant, var: String, body: Box<Formula> },
    Monotone { children: Vec<Formula>, dnf: Vec<BTreeSet<usize>> },
}

/// Address of a subformula: child indices from the root. `Quantified`
/// has a single child `0`.
pub type Path = Vec<usize>;

/// Flattening constructor: nested `And`s merge, child order is source order.
pub fn mk_and(children: Vec<Formula>) -> Formula {
    let mut flat = Vec::new();
    for c in children {
        match c {
            Formula::And(cs) => flat.extend(cs),
            other => flat.push(other),
        }
    }
    if flat.len() == 1 {
        flat.pop().unwrap()
    } else {
        Formula::And(flat)
    }
}

/// Flattening constructor for `Or`.
pub fn mk_or(children: Vec<Formula>) -> Formula {
    let mut flat = Vec::new();
    for c in children {
        match c {
            Formula::Or(cs) => flat.extend(cs),
            other => flat.push(other),
        }
    }
    if flat.len() == 1 {
        flat.pop().unwrap()
    } else {
        Formula::Or(flat)
    }
}

/// `~f`, folding negation of an atom into `NegAtom` so that rendered
/// formulas re-parse to the identical AST.
pub fn mk_not(f: Formula) -> Formula {
    match f {
        Formula::Atom { rel, args } => Formula::NegAtom { rel, args },
        other => Formula::Not(Box::new(other)),
    }
}

pub fn mk_quant(q: Quant, var: impl Into<String>, body: Formula) -> Formula {
    Formula::Quantified {
        q,
        var: var.into(),
        body: Box::new(body),
    }
}

impl Formula {
    pub fn children(&self) -> &[Formula] {
        match self {
            Formula::Atom { .. } | Formula::NegAtom { .. } => &[],
            Formula::Not(b) => std::slice::from_ref(b),
            Formula::And(cs) | Formula::Or(cs) => cs,
            Formula::Quantified { body, .. } => std::slice::from_ref(body),
            Formula::Monotone { children, .. } => children,
        }
    }

    pub fn children_mut(&mut self) -> &mut [Formula] {
        match self {
            Formula::Atom { .. } | Formula::NegAtom { .. } => &mut [],
            Formula::Not(b) => std::slice::from_mut(b),
            Formula::And(cs) | Formula::Or(cs) => cs,
            Formula::Quantified { body, .. } => std::slice::from_mut(body),
            Formula::Monotone { children, .. } => children,
        }
    }

    pub fn at(&self, path: &[usize]) -> &Formula {
        let mut node = self;
        for &i in path {
            node = &node.children()[i];
        }
        node
    }

    pub fn at_mut(&mut self, path: &[usize]) -> &mut Formula {
        let mut node = self;
        for &i in path {
            node = &mut node.children_mut()[i];
        }
        node
    }

    /// Pre-order traversal of all subformula paths.
    pub fn paths(&self) -> Vec<Path> {
        let mut out = Vec::new();
        let mut stack = vec![Vec::new()];
        while let Some(p) = stack.pop() {
            let node = self.at(&p);
            for i in (0..node.children().len()).rev() {
                let mut q = p.clone();
                q.push(i);
                stack.push(q);
            }
            out.push(p);
        }
        out
    }

    /// Variables of atoms in this subtree (bound or free), in sorted order.
    pub fn atom_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let Formula::Atom { args, .. } | Formula::NegAtom { args, .. } = f {
                out.extend(args.iter().filter_map(|t| t.var().map(str::to_owned)));
            }
        });
        out
    }

    /// All variables occurring in the formula (in atoms or quantifiers).
    pub fn all_vars(&self) -> BTreeSet<String> {
        let mut out = self.atom_vars();
        self.visit(&mut |f| {
            if let Formula::Quantified { var, .. } = f {
                out.insert(var.clone());
            }
        });
        out
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        match self {
            Formula::Atom { args, .. } | Formula::NegAtom { args, .. } => args
                .iter()
                .filter_map(|t| t.var().map(str::to_owned))
                .collect(),
            Formula::Not(b) => b.free_vars(),
            Formula::And(cs) | Formula::Or(cs) => {
                cs.iter().flat_map(|c| c.free_vars()).collect()
            }
            Formula::Quantified { var, body, .. } => {
                let mut s = body.free_vars();
                s.remove(var);
                s
            }
            Formula::Monotone { children, .. } => {
                children.iter().flat_map(|c| c.free_vars()).collect()
            }
        }
    }

    /// Quantified variables, each mapped to its quantifier kind.
    /// Only meaningful on straight formulas (one binder per name).
    pub fn quantifiers(&self) -> BTreeMap<String, Quant> {
        let mut out = BTreeMap::new();
        self.visit(&mut |f| {
            if let Formula::Quantified { q, var, .. } = f {
                out.insert(var.clone(), *q);
            }
        });
        out
    }

    pub fn is_sentence(&self) -> bool {
        self.free_vars().is_empty()
    }

    pub fn is_nnf(&self) -> bool {
        let mut ok = true;
        self.visit(&mut |f| {
            if matches!(f, Formula::Not(_)) {
                ok = false;
            }
        });
        ok
    }

    /// Straight: no variable quantified twice, no free variable also
    /// quantified, every quantified variable occurs in some atom.
    pub fn is_straight(&self) -> bool {
        self.straightness_violation().is_none()
    }

    pub fn straightness_violation(&self) -> Option<String> {
        let free = self.free_vars();
        let mut seen = BTreeSet::new();
        let mut bad = None;
        self.visit(&mut |f| {
            if bad.is_some() {
                return;
            }
            if let Formula::Quantified { var, body, .. } = f {
                if !seen.insert(var.clone()) {
                    bad = Some(format!("variable {var} is quantified twice"));
                } else if free.contains(var) {
                    bad = Some(format!("variable {var} is both free and quantified"));
                } else if !body.atom_vars().contains(var) {
                    bad = Some(format!("quantified variable {var} occurs in no atom"));
                }
            }
        });
        bad
    }

    /// Infer the vocabulary from atoms. Errors on arity conflicts.
    pub fn vocabulary(&self) -> Result<Vocabulary, Error> {
        let mut voc = Vocabulary::default();
        let mut conflict = None;
        self.visit(&mut |f| {
            if let Formula::Atom { rel, args } | Formula::NegAtom { rel, args } = f {
                match voc.relations.get(rel) {
                    Some(&a) if a != args.len() => {
                        conflict = Some(format!(
                            "relation {rel} used with arities {a} and {}",
                            args.len()
                        ));
                    }
                    _ => {
                        voc.relations.insert(rel.clone(), args.len());
                    }
                }
                for t in args {
                    if let Term::Const(c) = t {
                        voc.constants.insert(c.clone());
                    }
                }
            }
        });
        match conflict {
            Some(msg) => Err(Error::Structure(msg)),
            None => Ok(voc),
        }
    }

    fn visit(&self, f: &mut impl FnMut(&Formula)) {
        f(self);
        for c in self.children() {
            c.visit(f);
        }
    }
}

/// Undirected graph over variable names; the formula graph lives here.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Graph {
    pub vertices: BTreeSet<String>,
    /// Normalized pairs (a, b) with a < b. No self-loops.
    pub edges: BTreeSet<(String, String)>,
}

impl Graph {
    pub fn add_edge(&mut self, a: &str, b: &str) {
        if a == b {
            return;
        }
        let (x, y) = if a < b { (a, b) } else { (b, a) };
        self.edges.insert((x.to_owned(), y.to_owned()));
    }

    pub fn has_edge(&self, a: &str, b: &str) -> bool {
        let (x, y) = if a < b { (a, b) } else { (b, a) };
        self.edges.contains(&(x.to_owned(), y.to_owned()))
    }

    pub fn neighbors<'a>(&'a self, v: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.edges.iter().filter_map(move |(a, b)| {
            if a == v {
                Some(b.as_str())
            } else if b == v {
                Some(a.as_str())
            } else {
                None
            }
        })
    }
}

/// The formula graph: vertices are the variables, edges join free
/// variable pairs and pairs sharing an atom.
pub fn formula_graph(f: &Formula) -> Graph {
    debug_assert!(f.is_straight() && f.is_nnf());
    let mut g = Graph {
        vertices: f.all_vars(),
        ..Graph::default()
    };
    let free: Vec<_> = f.free_vars().into_iter().collect();
    for (i, a) in free.iter().enumerate() {
        for b in &free[i + 1..] {
            g.add_edge(a, b);
        }
    }
    let mut stack = vec![f];
    while let Some(node) = stack.pop() {
        if let Formula::Atom { args, .. } | Formula::NegAtom { args, .. } = node {
            let vars: Vec<_> = args.iter().filter_map(|t| t.var()).collect();
            for (i, a) in vars.iter().enumerate() {
                for b in &vars[i + 1..] {
                    g.add_edge(a, b);
                }
            }
        }
        stack.extend(node.children());
    }
    g
}

/// Negation normal form via De Morgan and quantifier duality. Idempotent.
pub fn to_nnf(f: &Formula) -> Formula {
    match f {
        Formula::Atom { .. } | Formula::NegAtom { .. } => f.clone(),
        Formula::And(cs) => mk_and(cs.iter().map(to_nnf).collect()),
        Formula::Or(cs) => mk_or(cs.iter().map(to_nnf).collect()),
        Formula::Quantified { q, var, body } => mk_quant(*q, var.clone(), to_nnf(body)),
        Formula::Monotone { children, dnf } => Formula::Monotone {
            children: children.iter().map(to_nnf).collect(),
            dnf: dnf.clone(),
        },
        Formula::Not(inner) => match &**inner {
            Formula::Atom { rel, args } => Formula::NegAtom {
                rel: rel.clone(),
                args: args.clone(),
            },
            Formula::NegAtom { rel, args } => Formula::Atom {
                rel: rel.clone(),
                args: args.clone(),
            },
            Formula::Not(inner2) => to_nnf(inner2),
            Formula::And(cs) => mk_or(cs.iter().map(|c| to_nnf(&mk_not(c.clone()))).collect()),
            Formula::Or(cs) => mk_and(cs.iter().map(|c| to_nnf(&mk_not(c.clone()))).collect()),
            Formula::Quantified { q, var, body } => mk_quant(
                q.dual(),
                var.clone(),
                to_nnf(&mk_not((**body).clone())),
            ),
            Formula::Monotone { .. } => {
                // A negated monotone combination is not itself monotone;
                // expand to plain Or/And first. Only reachable through
                // programmatic construction, never from parsed input.
                to_nnf(&mk_not(expand_monotone_node(inner)))
            }
        },
    }
}

/// Replace a `Monotone` root node by its plain Or-of-And expansion.
/// Children used by several disjuncts get duplicated.
pub fn expand_monotone_node(f: &Formula) -> Formula {
    match f {
        Formula::Monotone { children, dnf } => mk_or(
            dnf.iter()
                .map(|clause| mk_and(clause.iter().map(|&i| children[i].clone()).collect()))
                .collect(),
        ),
        other => other.clone(),
    }
}

/// Recursively expand all `Monotone` nodes into plain Or/And.
pub fn expand_monotone(f: &Formula) -> Formula {
    match f {
        // A singleton combination collapses to its child, which may itself
        // be a combination; the node shrinks every round.
        Formula::Monotone { .. } => expand_monotone(&expand_monotone_node(f)),
        Formula::Atom { .. } | Formula::NegAtom { .. } => f.clone(),
        Formula::Not(b) => mk_not(expand_monotone(b)),
        Formula::And(cs) => mk_and(cs.iter().map(expand_monotone).collect()),
        Formula::Or(cs) => mk_or(cs.iter().map(expand_monotone).collect()),
        Formula::Quantified { q, var, body } => {
            mk_quant(*q, var.clone(), expand_monotone(body))
        }
    }
}

/// Make a formula straight: drop quantifiers whose variable occurs in no
/// atom, and rename clashing binders deterministically (the first user of
/// a name keeps it, later binders get `_2`, `_3`, ...; free variables
/// always keep their names).
pub fn straighten(f: &Formula) -> Formula {
    let mut used: BTreeSet<String> = f.free_vars();
    let mut renames: BTreeMap<String, usize> = BTreeMap::new();
    straighten_rec(f, &mut used, &mut renames, &BTreeMap::new())
}

fn straighten_rec(
    f: &Formula,
    used: &mut BTreeSet<String>,
    rename_counters: &mut BTreeMap<String, usize>,
    env: &BTreeMap<String, String>,
) -> Formula {
    match f {
        Formula::Atom { rel, args } => Formula::Atom {
            rel: rel.clone(),
            args: rename_args(args, env),
        },
        Formula::NegAtom { rel, args } => Formula::NegAtom {
            rel: rel.clone(),
            args: rename_args(args, env),
        },
        Formula::Not(b) => Formula::Not(Box::new(straighten_rec(b, used, rename_counters, env))),
        Formula::And(cs) => mk_and(
            cs.iter()
                .map(|c| straighten_rec(c, used, rename_counters, env))
                .collect(),
        ),
        Formula::Or(cs) => mk_or(
            cs.iter()
                .map(|c| straighten_rec(c, used, rename_counters, env))
                .collect(),
        ),
        Formula::Monotone { children, dnf } => Formula::Monotone {
            children: children
                .iter()
                .map(|c| straighten_rec(c, used, rename_counters, env))
                .collect(),
            dnf: dnf.clone(),
        },
        Formula::Quantified { q, var, body } => {
            if !binds_an_atom_var(body, var) {
                // Useless binder; its variable names nothing in any atom.
                return straighten_rec(body, used, rename_counters, env);
            }
            let fresh = if used.contains(var) {
                let counter = rename_counters.entry(var.clone()).or_insert(2);
                let mut candidate = format!("{var}_{counter}");
                while used.contains(&candidate) {
                    *counter += 1;
                    candidate = format!("{var}_{counter}");
                }
                *counter += 1;
                candidate
            } else {
                var.clone()
            };
            used.insert(fresh.clone());
            let mut inner_env = env.clone();
            inner_env.insert(var.clone(), fresh.clone());
            mk_quant(*q, fresh, straighten_rec(body, used, rename_counters, &inner_env))
        }
    }
}

fn rename_args(args: &[Term], env: &BTreeMap<String, String>) -> Vec<Term> {
    args.iter()
        .map(|t| match t {
            Term::Var(v) => Term::Var(env.get(v).cloned().unwrap_or_else(|| v.clone())),
            c => c.clone(),
        })
        .collect()
}

/// Does `var`, as bound right above `body`, reach an atom? Inner binders
/// of the same name shadow it.
fn binds_an_atom_var(body: &Formula, var: &str) -> bool {
    match body {
        Formula::Atom { args, .. } | Formula::NegAtom { args, .. } => {
            args.iter().any(|t| t.var() == Some(var))
        }
        Formula::Quantified { var: inner, body, .. } => {
            inner != var && binds_an_atom_var(body, var)
        }
        other => other.children().iter().any(|c| binds_an_atom_var(c, var)),
    }
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),   // lowercase-initial
    RelName(String), // uppercase-initial
    Const(String),   // after '@'
    LParen,
    RParen,
    Comma,
    Dot,
    Tilde,
    Amp,
    Pipe,
    Arrow,
    DArrow,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src, pos: 0, line: 1, col: 1 }
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError::new(self.line, self.col, msg)
    }

    fn bump(&mut self, n: usize) {
        for c in self.src[self.pos..self.pos + n].chars() {
            if c == '\n' {
                self.line += 1;
                self.col = 1;
            } else {
                self.col += 1;
            }
        }
        self.pos += n;
    }

    fn tokens(mut self) -> Result<Vec<(Tok, usize, usize)>, ParseError> {
        let mut out = Vec::new();
        loop {
            let rest = &self.src[self.pos..];
            let Some(c) = rest.chars().next() else { break };
            if c.is_whitespace() {
                self.bump(c.len_utf8());
                continue;
            }
            if c == '#' {
                let n = rest.find('\n').unwrap_or(rest.len());
                self.bump(n);
                continue;
            }
            let (line, col) = (self.line, self.col);
            let tok = match c {
                '(' => { self.bump(1); Tok::LParen }
                ')' => { self.bump(1); Tok::RParen }
                ',' => { self.bump(1); Tok::Comma }
                '.' => { self.bump(1); Tok::Dot }
                '~' => { self.bump(1); Tok::Tilde }
                '&' => { self.bump(1); Tok::Amp }
                '|' => { self.bump(1); Tok::Pipe }
                '-' => {
                    if rest.starts_with("->") {
                        self.bump(2);
                        Tok::Arrow
                    } else {
                        return Err(self.err("expected '->'"));
                    }
                }
                '<' => {
                    if rest.starts_with("<->") {
                        self.bump(3);
                        Tok::DArrow
                    } else {
                        return Err(self.err("expected '<->'"));
                    }
                }
                '@' => {
                    self.bump(1);
                    let name = self.take_ident()?;
                    if !name.chars().next().is_some_and(|c| c.is_ascii_lowercase()) {
                        return Err(self.err("constant name must start lowercase"));
                    }
                    Tok::Const(name)
                }
                c if c.is_ascii_lowercase() => Tok::Ident(self.take_ident()?),
                c if c.is_ascii_uppercase() => Tok::RelName(self.take_ident()?),
                c => return Err(self.err(format!("unexpected character {c:?}"))),
            };
            out.push((tok, line, col));
        }
        Ok(out)
    }

    fn take_ident(&mut self) -> Result<String, ParseError> {
        let rest = &self.src[self.pos..];
        let n = rest
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
            .unwrap_or(rest.len());
        if n == 0 {
            return Err(self.err("expected an identifier"));
        }
        let s = rest[..n].to_owned();
        self.bump(n);
        Ok(s)
    }
}

struct Parser {
    toks: Vec<(Tok, usize, usize)>,
    idx: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|(t, _, _)| t)
    }

    fn pos(&self) -> (usize, usize) {
        self.toks
            .get(self.idx)
            .map(|&(_, l, c)| (l, c))
            .or_else(|| self.toks.last().map(|&(_, l, c)| (l, c + 1)))
            .unwrap_or((1, 1))
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        let (l, c) = self.pos();
        ParseError::new(l, c, msg)
    }

    fn eat(&mut self, t: &Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(t) {
            self.idx += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected {what}")))
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        if let Some(Tok::Ident(kw)) = self.peek() {
            if kw == "forall" || kw == "exists" {
                let q = if kw == "exists" { Quant::Exists } else { Quant::Forall };
                self.idx += 1;
                let mut vars = Vec::new();
                while let Some(Tok::Ident(v)) = self.peek() {
                    if v == "forall" || v == "exists" {
                        return Err(self.err("quantifier keyword used as a variable"));
                    }
                    vars.push(v.clone());
                    self.idx += 1;
                }
                if vars.is_empty() {
                    return Err(self.err("expected at least one variable after quantifier"));
                }
                self.eat(&Tok::Dot, "'.' after quantified variables")?;
                let mut body = self.formula()?;
                for v in vars.into_iter().rev() {
                    body = mk_quant(q, v, body);
                }
                return Ok(body);
            }
        }
        self.iff()
    }

    fn iff(&mut self) -> Result<Formula, ParseError> {
        let first = self.impl_()?;
        let mut parts = vec![first];
        while self.peek() == Some(&Tok::DArrow) {
            self.idx += 1;
            parts.push(self.impl_()?);
        }
        // a <-> b <-> c associates to the left.
        let mut acc = parts.remove(0);
        for rhs in parts {
            acc = mk_and(vec![
                mk_or(vec![mk_not(acc.clone()), rhs.clone()]),
                mk_or(vec![mk_not(rhs), acc]),
            ]);
        }
        Ok(acc)
    }

    fn impl_(&mut self) -> Result<Formula, ParseError> {
        let mut parts = vec![self.or()?];
        while self.peek() == Some(&Tok::Arrow) {
            self.idx += 1;
            parts.push(self.or()?);
        }
        // a -> b -> c associates to the right.
        let mut acc = parts.pop().unwrap();
        while let Some(lhs) = parts.pop() {
            acc = mk_or(vec![mk_not(lhs), acc]);
        }
        Ok(acc)
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut parts = vec![self.and()?];
        while self.peek() == Some(&Tok::Pipe) {
            self.idx += 1;
            parts.push(self.and()?);
        }
        Ok(mk_or(parts))
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut parts = vec![self.unary()?];
        while self.peek() == Some(&Tok::Amp) {
            self.idx += 1;
            parts.push(self.unary()?);
        }
        Ok(mk_and(parts))
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Some(Tok::Tilde) => {
                self.idx += 1;
                Ok(mk_not(self.unary()?))
            }
            Some(Tok::LParen) => {
                self.idx += 1;
                let f = self.formula()?;
                self.eat(&Tok::RParen, "')'")?;
                Ok(f)
            }
            Some(Tok::RelName(_)) => self.atom(),
            Some(Tok::Ident(kw)) if kw == "forall" || kw == "exists" => self.formula(),
            _ => Err(self.err("expected a formula")),
        }
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        let rel = match self.peek() {
            Some(Tok::RelName(r)) => r.clone(),
            _ => return Err(self.err("expected a relation name")),
        };
        self.idx += 1;
        self.eat(&Tok::LParen, "'(' after relation name")?;
        let mut args = vec![self.term()?];
        while self.peek() == Some(&Tok::Comma) {
            self.idx += 1;
            args.push(self.term()?);
        }
        self.eat(&Tok::RParen, "')'")?;
        Ok(Formula::Atom { rel, args })
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Ident(v)) => {
                if v == "forall" || v == "exists" {
                    return Err(self.err("quantifier keyword used as a term"));
                }
                self.idx += 1;
                Ok(Term::Var(v))
            }
            Some(Tok::Const(c)) => {
                self.idx += 1;
                Ok(Term::Const(c))
            }
            _ => Err(self.err("expected a variable or @constant")),
        }
    }
}

/// Reserved prefix for translation-internal relation symbols.
pub const AUX_PREFIX: &str = "__aux_";

/// Parse a formula and infer its vocabulary. The result is not yet
/// straight or in NNF; `->`/`<->` are desugared here.
pub fn parse(text: &str) -> Result<(Formula, Vocabulary), Error> {
    let toks = Lexer::new(text).tokens()?;
    let mut p = Parser { toks, idx: 0 };
    let f = p.formula()?;
    if p.idx != p.toks.len() {
        return Err(p.err("trailing input after formula").into());
    }
    let voc = f.vocabulary()?;
    if let Some(r) = voc.relations.keys().find(|r| r.starts_with(AUX_PREFIX)) {
        let (l, c) = (1, 1);
        return Err(ParseError::new(l, c, format!("relation name {r} uses a reserved prefix")).into());
    }
    Ok((f, voc))
}

/// Pretty-printer. `parse(render(f))` returns `f` for any `Not`/
/// `Monotone`-free AST built from the grammar's node kinds.
pub fn render(f: &Formula) -> String {
    render_prec(f, 0)
}

// Precedence levels: 0 formula/quantifier, 1 or, 2 and, 3 unary.
fn render_prec(f: &Formula, prec: u8) -> String {
    match f {
        Formula::Atom { rel, args } => render_atom(rel, args),
        Formula::NegAtom { rel, args } => format!("~{}", render_atom(rel, args)),
        Formula::Not(b) => format!("~{}", render_prec(b, 3)),
        Formula::And(cs) => {
            let s = cs
                .iter()
                .map(|c| render_prec(c, 3))
                .collect::<Vec<_>>()
                .join(" & ");
            if prec > 2 {
                format!("({s})")
            } else {
                s
            }
        }
        Formula::Or(cs) => {
            let s = cs
                .iter()
                .map(|c| render_prec(c, 2))
                .collect::<Vec<_>>()
                .join(" | ");
            if prec > 1 {
                format!("({s})")
            } else {
                s
            }
        }
        Formula::Quantified { q, var, body } => {
            let s = format!("{q} {var}. {}", render_prec(body, 0));
            if prec > 0 {
                format!("({s})")
            } else {
                s
            }
        }
        Formula::Monotone { .. } => {
            // No surface syntax; show the expansion.
            render_prec(&expand_monotone_node(f), prec)
        }
    }
}

fn render_atom(rel: &str, args: &[Term]) -> String {
    let args = args
        .iter()
        .map(|t| match t {
            Term::Var(v) => v.clone(),
            Term::Const(c) => format!("@{c}"),
        })
        .collect::<Vec<_>>()
        .join(", ");
    format!("{rel}({args})")
}
