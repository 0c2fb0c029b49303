//! Strategies shared by the property suites and the acceptance run.
#![allow(dead_code)]

use proptest::prelude::*;

use qtern_core::dsl::{Expr, Node};
use qtern_core::operator::OperatorExpr;
use qtern_core::scalar::{GaussRational, Monomial, ParamRat, Poly, Symbol};

pub fn poly() -> impl Strategy<Value = Poly> {
    let term = (-4i64..=4, 0u32..3, 0u32..3, any::<bool>()).prop_map(|(c, i, j, imag)| {
        let k = if imag { GaussRational::I.scale(&c.into()) } else { GaussRational::from_int(c) };
        Poly::term(Monomial::from_exps(&[(Symbol::Hbar, i), (Symbol::Mu1, j)]), k)
    });
    prop::collection::vec(term, 0..4).prop_map(|ts| ts.iter().fold(Poly::zero(), |acc, t| &acc + t))
}

pub fn ratfunc() -> impl Strategy<Value = ParamRat> {
    (poly(), poly()).prop_map(|(n, d)| if d.is_zero() { ParamRat::from_poly(n) } else { ParamRat::new(n, d).unwrap() })
}

fn atom() -> impl Strategy<Value = OperatorExpr> {
    prop_oneof![
        prop::sample::select(vec![Symbol::X, Symbol::Y, Symbol::Z]).prop_map(OperatorExpr::coord),
        prop::sample::select(vec![Symbol::X, Symbol::Y, Symbol::Z]).prop_map(OperatorExpr::partial),
        Just(OperatorExpr::r()),
        (-3i64..=3, 0u32..2)
            .prop_map(|(k, e)| OperatorExpr::scalar(&(&ParamRat::from_int(k) * &ParamRat::var(Symbol::Hbar).pow(e)))),
    ]
}

/// Sums of short words in coordinates, partials, r and scalars.
pub fn operator() -> impl Strategy<Value = OperatorExpr> {
    let word =
        prop::collection::vec(atom(), 1..4).prop_map(|w| w.iter().skip(1).fold(w[0].clone(), |acc, a| acc.compose(a)));
    prop::collection::vec(word, 1..3).prop_map(|ws| OperatorExpr::sum(ws.iter()))
}

pub fn jacobi(a: &OperatorExpr, b: &OperatorExpr, c: &OperatorExpr) -> OperatorExpr {
    a.commutator(&b.commutator(c)).add(&b.commutator(&c.commutator(a))).add(&c.commutator(&a.commutator(b)))
}

pub const GENS: [&str; 4] = ["A1", "A2", "B2", "H"];

pub fn gens() -> Vec<String> {
    GENS.iter().map(|s| s.to_string()).collect()
}

pub fn scalar_leaf() -> impl Strategy<Value = ParamRat> {
    (-5i64..=5, 1i64..4, prop::sample::select(vec![None, Some(Symbol::Hbar), Some(Symbol::Mu), Some(Symbol::Mu3)]))
        .prop_map(|(n, d, s)| {
            let k = ParamRat::ratio(n, d);
            match s {
                Some(s) => &k * &ParamRat::var(s),
                None => k,
            }
        })
}

pub fn expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        3 => prop::sample::select(GENS.to_vec()).prop_map(Expr::gen),
        1 => scalar_leaf().prop_map(Expr::scalar),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..4).prop_map(|v| Expr::new(Node::Sum(v))),
            prop::collection::vec(inner.clone(), 2..4).prop_map(|v| Expr::new(Node::Product(v))),
            (inner.clone(), 1u32..4).prop_map(|(b, e)| Expr::new(Node::Power(Box::new(b), e))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::new(Node::Comm(Box::new(a), Box::new(b)))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::new(Node::Anti(Box::new(a), Box::new(b)))),
            inner.prop_map(|a| Expr::new(Node::Neg(Box::new(a)))),
        ]
    })
}

/// Canonical form printed, parsed back, and printed again.
pub fn round_trip(e: &Expr) -> Result<(), String> {
    use qtern_core::dsl::{self, canonicalize, parse_expr};
    let c = canonicalize(e);
    let text = dsl::print(&c);
    let back = parse_expr(&text, &gens()).map_err(|err| format!("{text}: {err}"))?;
    if back != c {
        return Err(format!("{text}: parsed to a different tree"));
    }
    if dsl::print(&back) != text {
        return Err(format!("{text}: reprinted as {}", dsl::print(&back)));
    }
    Ok(())
}
