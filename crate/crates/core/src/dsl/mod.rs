//! Text format for operator expressions and algebra relations.
//!
//! ```text
//! # comment
//! generators: A1 A2 B2 B1 F H;
//! a2a2b2: comm(A2, comm(A2, B2)) == 4*hbar^2*A2^2 + 4*hbar^2*anti(A2, B2);
//! ```
//!
//! Parsed trees are canonical: scalar-only subtrees are folded into one
//! literal, products carry at most one leading scalar, nested sums and
//! products are flattened and signs are pulled out of products. Printing a
//! canonical tree and parsing it back gives the same tree.

mod parse;
mod print;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::scalar::ParamRat;

pub use parse::{parse_catalog, parse_expr, parse_relations};
pub use print::print;

/// 1-based line and column of the first character of a node.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug)]
pub enum Node {
    Gen(String),
    Scalar(ParamRat),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    Power(Box<Expr>, u32),
    Comm(Box<Expr>, Box<Expr>),
    Anti(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
}

/// Expression tree node with its source position. Equality ignores positions.
#[derive(Clone, Debug)]
pub struct Expr {
    pub node: Node,
    pub pos: Pos,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        use Node::*;
        match (&self.node, &other.node) {
            (Gen(a), Gen(b)) => a == b,
            (Scalar(a), Scalar(b)) => a == b,
            (Sum(a), Sum(b)) | (Product(a), Product(b)) => a == b,
            (Power(a, m), Power(b, n)) => m == n && a == b,
            (Comm(a1, a2), Comm(b1, b2)) | (Anti(a1, a2), Anti(b1, b2)) => a1 == b1 && a2 == b2,
            (Neg(a), Neg(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for Expr {}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print(self))
    }
}

impl Expr {
    pub fn new(node: Node) -> Expr {
        Expr { node, pos: Pos::default() }
    }

    fn at(node: Node, pos: Pos) -> Expr {
        Expr { node, pos }
    }

    pub fn gen(name: &str) -> Expr {
        Expr::new(Node::Gen(name.to_string()))
    }

    pub fn scalar(k: ParamRat) -> Expr {
        Expr::new(Node::Scalar(k))
    }

    pub fn as_scalar(&self) -> Option<&ParamRat> {
        match &self.node {
            Node::Scalar(k) => Some(k),
            _ => None,
        }
    }

    /// Generator names in first-occurrence order.
    pub fn generators(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_generators(&mut out);
        out
    }

    fn collect_generators(&self, out: &mut Vec<String>) {
        match &self.node {
            Node::Gen(g) => {
                if !out.contains(g) {
                    out.push(g.clone());
                }
            }
            Node::Scalar(_) => {}
            Node::Sum(v) | Node::Product(v) => v.iter().for_each(|e| e.collect_generators(out)),
            Node::Power(b, _) | Node::Neg(b) => b.collect_generators(out),
            Node::Comm(a, b) | Node::Anti(a, b) => {
                a.collect_generators(out);
                b.collect_generators(out);
            }
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        1 + match &self.node {
            Node::Gen(_) | Node::Scalar(_) => 0,
            Node::Sum(v) | Node::Product(v) => v.iter().map(Expr::size).sum(),
            Node::Power(b, _) | Node::Neg(b) => b.size(),
            Node::Comm(a, b) | Node::Anti(a, b) => a.size() + b.size(),
        }
    }
}

/// Rewrites a tree into canonical form (see module docs).
pub fn canonicalize(e: &Expr) -> Expr {
    let pos = e.pos;
    match &e.node {
        Node::Gen(_) | Node::Scalar(_) => e.clone(),
        Node::Sum(v) => make_sum(v.iter().map(canonicalize).collect(), pos),
        Node::Product(v) => make_product(v.iter().map(canonicalize).collect(), pos),
        Node::Power(b, n) => make_power(canonicalize(b), *n, pos),
        Node::Comm(a, b) => make_comm(canonicalize(a), canonicalize(b), pos),
        Node::Anti(a, b) => make_anti(canonicalize(a), canonicalize(b), pos),
        Node::Neg(b) => make_neg(canonicalize(b), pos),
    }
}

// The make_* helpers take canonical children and return a canonical node.

pub(crate) fn make_sum(terms: Vec<Expr>, pos: Pos) -> Expr {
    let mut flat = Vec::with_capacity(terms.len());
    for t in terms {
        match t.node {
            Node::Sum(inner) => flat.extend(inner),
            _ => flat.push(t),
        }
    }
    if flat.iter().all(|t| t.as_scalar().is_some()) {
        let mut k = ParamRat::zero();
        for t in &flat {
            k = &k + t.as_scalar().unwrap();
        }
        return Expr::at(Node::Scalar(k), pos);
    }
    if flat.len() == 1 {
        return flat.pop().unwrap();
    }
    Expr::at(Node::Sum(flat), pos)
}

pub(crate) fn make_product(factors: Vec<Expr>, pos: Pos) -> Expr {
    let mut k = ParamRat::one();
    let mut rest: Vec<Expr> = Vec::with_capacity(factors.len());
    let mut stack: Vec<Expr> = factors.into_iter().rev().collect();
    while let Some(f) = stack.pop() {
        match f.node {
            Node::Scalar(s) => k = &k * &s,
            Node::Neg(inner) => {
                k = -&k;
                stack.push(*inner);
            }
            Node::Product(inner) => stack.extend(inner.into_iter().rev()),
            _ => rest.push(f),
        }
    }
    if rest.is_empty() {
        return Expr::at(Node::Scalar(k), pos);
    }
    let body = if rest.len() == 1 { rest.pop().unwrap() } else { Expr::at(Node::Product(rest), pos) };
    if k.is_one() {
        return body;
    }
    if (-&k).is_one() {
        return Expr::at(Node::Neg(Box::new(body)), pos);
    }
    let mut v = vec![Expr::at(Node::Scalar(k), pos)];
    match body.node {
        Node::Product(inner) => v.extend(inner),
        _ => v.push(body),
    }
    Expr::at(Node::Product(v), pos)
}

pub(crate) fn make_power(base: Expr, n: u32, pos: Pos) -> Expr {
    if let Some(k) = base.as_scalar() {
        return Expr::at(Node::Scalar(k.pow(n)), pos);
    }
    Expr::at(Node::Power(Box::new(base), n), pos)
}

pub(crate) fn make_comm(a: Expr, b: Expr, pos: Pos) -> Expr {
    if a.as_scalar().is_some() && b.as_scalar().is_some() {
        return Expr::at(Node::Scalar(ParamRat::zero()), pos);
    }
    Expr::at(Node::Comm(Box::new(a), Box::new(b)), pos)
}

pub(crate) fn make_anti(a: Expr, b: Expr, pos: Pos) -> Expr {
    if let (Some(x), Some(y)) = (a.as_scalar(), b.as_scalar()) {
        return Expr::at(Node::Scalar(&(x * y) * &ParamRat::from_int(2)), pos);
    }
    Expr::at(Node::Anti(Box::new(a), Box::new(b)), pos)
}

pub(crate) fn make_neg(e: Expr, pos: Pos) -> Expr {
    if matches!(e.node, Node::Product(_)) {
        return make_product(vec![Expr::at(Node::Scalar(-&ParamRat::one()), pos), e], pos);
    }
    match e.node {
        Node::Scalar(k) => Expr::at(Node::Scalar(-&k), pos),
        Node::Neg(inner) => *inner,
        _ => Expr::at(Node::Neg(Box::new(e)), pos),
    }
}

/// One `lhs == rhs` statement.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    pub label: String,
    pub lhs: Expr,
    pub rhs: Expr,
    pub pos: Pos,
    /// Source text of the statement, whitespace-collapsed.
    pub source: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Catalog {
    pub generators: Vec<String>,
    pub relations: Vec<Relation>,
}

impl Catalog {
    pub fn empty() -> Catalog {
        Catalog { generators: Vec::new(), relations: Vec::new() }
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum DslError {
    #[error("{pos}: syntax error: {msg}")]
    Syntax { pos: Pos, msg: String },
    #[error("{pos}: undeclared generator `{name}`")]
    Undeclared { pos: Pos, name: String },
    #[error("{pos}: duplicate label `{label}`")]
    DuplicateLabel { pos: Pos, label: String },
}

impl DslError {
    pub fn pos(&self) -> Pos {
        match self {
            DslError::Syntax { pos, .. } | DslError::Undeclared { pos, .. } | DslError::DuplicateLabel { pos, .. } => {
                *pos
            }
        }
    }
}

/// Catalogs shipped with the library.
pub mod catalogs {
    /// The zero commutation relations among the integrals.
    pub const ZERO: &str = include_str!("../../catalogs/zero.rel");
    /// The ternary quadratic algebra, as printed.
    pub const APPENDIX: &str = include_str!("../../catalogs/appendix.rel");
    /// A small user-defined algebra in the general double-commutator form.
    pub const EXAMPLE: &str = include_str!("../../catalogs/example.rel");
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Symbol;

    fn gens() -> Vec<String> {
        ["A1", "A2", "B2", "B1", "F", "H"].iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn nested_commutator() {
        let e = parse_expr("comm(A1, comm(A1, B1))", &gens()).unwrap();
        let inner = Expr::new(Node::Comm(Box::new(Expr::gen("A1")), Box::new(Expr::gen("B1"))));
        assert_eq!(e, Expr::new(Node::Comm(Box::new(Expr::gen("A1")), Box::new(inner))));
        assert_eq!(print(&e), "comm(A1, comm(A1, B1))");
    }

    #[test]
    fn sum_of_product_and_anti() {
        let e = parse_expr("-16*hbar^2*H*A1^2 + 4*hbar^2*anti(A1,B1)", &gens()).unwrap();
        let Node::Sum(terms) = &e.node else { panic!("not a sum") };
        assert_eq!(terms.len(), 2);
        let h2 = ParamRat::var(Symbol::Hbar).pow(2);
        let Node::Product(f0) = &terms[0].node else { panic!() };
        assert_eq!(f0[0].as_scalar().unwrap(), &(&h2 * &ParamRat::from_int(-16)));
        let Node::Product(f1) = &terms[1].node else { panic!() };
        assert!(matches!(f1[1].node, Node::Anti(..)));
        assert_eq!(print(&e), "-16*hbar^2*H*A1^2 + 4*hbar^2*anti(A1, B1)");
    }

    #[test]
    fn unbalanced_parenthesis() {
        let err = parse_expr("comm(A1, B1", &gens()).unwrap_err();
        assert!(matches!(err, DslError::Syntax { .. }));
        assert_eq!(err.pos(), Pos { line: 1, col: 12 });
    }

    #[test]
    fn undeclared_name() {
        let err = parse_expr("A1 + Q", &gens()).unwrap_err();
        assert_eq!(err, DslError::Undeclared { pos: Pos { line: 1, col: 6 }, name: "Q".into() });
    }

    #[test]
    fn printer_examples() {
        assert_eq!(print(&Expr::new(Node::Sum(vec![]))), "0");
        let e = parse_expr("(-i)*hbar*A1", &gens()).unwrap();
        assert_eq!(print(&e), "-i*hbar*A1");
        assert_eq!(parse_expr("-i*hbar*A1", &gens()).unwrap(), e);
    }

    #[test]
    fn precedence() {
        // power binds tighter than negation
        let e = parse_expr("-A1^2", &gens()).unwrap();
        assert!(matches!(&e.node, Node::Neg(b) if matches!(b.node, Node::Power(..))));
        let e = parse_expr("A1 - 2*B1*F", &gens()).unwrap();
        assert_eq!(print(&e), "A1 - 2*B1*F");
        let e = parse_expr("(A1 + B1)^2 - (A1 + H)", &gens()).unwrap();
        assert_eq!(print(&e), "(A1 + B1)^2 - (A1 + H)");
    }

    #[test]
    fn scalar_folding_and_division() {
        let e = parse_expr("hbar^4*(4*mu1^2 - 3)/2*A2", &gens()).unwrap();
        let Node::Product(f) = &e.node else { panic!() };
        let want = &(&ParamRat::var(Symbol::Hbar).pow(4)
            * &(&(&ParamRat::var(Symbol::Mu1).pow(2) * &ParamRat::from_int(4)) - &ParamRat::from_int(3)))
            * &ParamRat::ratio(1, 2);
        assert_eq!(f[0].as_scalar().unwrap(), &want);
        assert!(parse_expr("A1/B1", &gens()).is_err());
        assert!(parse_expr("A1/0", &gens()).is_err());
    }

    #[test]
    fn catalog_with_chain() {
        let text = "# c\ngenerators: A1 A2 B2 B1 F H;\nz: comm(A1,A2) == comm(B2,A1) == 0;\nq: H == H;\n";
        let c = parse_catalog(text).unwrap();
        assert_eq!(c.generators.len(), 6);
        let labels: Vec<_> = c.relations.iter().map(|r| r.label.as_str()).collect();
        assert_eq!(labels, ["z.1", "z.2", "q"]);
        assert_eq!(c.relations[1].pos, Pos { line: 3, col: 1 });
        let dup = "generators: H;\na: H == H;\na: H == H;";
        assert!(matches!(parse_catalog(dup), Err(DslError::DuplicateLabel { .. })));
    }

    #[test]
    fn shipped_catalogs_parse() {
        for text in [catalogs::ZERO, catalogs::APPENDIX, catalogs::EXAMPLE] {
            let c = parse_catalog(text).unwrap();
            assert!(!c.relations.is_empty());
            for r in &c.relations {
                for side in [&r.lhs, &r.rhs] {
                    let again = parse_expr(&print(side), &c.generators).unwrap();
                    assert_eq!(&again, side, "{}", r.label);
                }
            }
        }
    }
}
