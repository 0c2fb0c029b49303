use std::sync::OnceLock;

use proptest::prelude::*;

use qtern_core::dsl::{parse_catalog, parse_expr, Expr, Node};
use qtern_core::engine::{verify_catalog, Binding, Status};
use qtern_core::model::{Model, ModelParams};

mod common;

use common::*;

// ---- scalars ----

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn field_axioms(a in ratfunc(), b in ratfunc(), c in ratfunc()) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert!((&a - &a).is_zero());
        if !b.is_zero() {
            prop_assert_eq!(&a.checked_div(&b).unwrap() * &b, a.clone());
        }
    }
}

// ---- operators ----

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn jacobi_identity(a in operator(), b in operator(), c in operator()) {
        let j = jacobi(&a, &b, &c);
        prop_assert!(j.is_zero(), "{:?}", j.summary(3));
    }

    #[test]
    fn composition_is_associative(a in operator(), b in operator(), c in operator()) {
        prop_assert_eq!(a.compose(&b).compose(&c), a.compose(&b.compose(&c)));
        prop_assert_eq!(a.compose(&b.add(&c)), a.compose(&b).add(&a.compose(&c)));
    }
}

// ---- relation syntax ----

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn print_parse_round_trip(e in expr()) {
        round_trip(&e).map_err(TestCaseError::fail)?;
    }
}

// ---- fit, then verify ----

fn model() -> &'static Model {
    static M: OnceLock<Model> = OnceLock::new();
    M.get_or_init(|| Model::build(&ModelParams::symbolic()))
}

const ALGEBRA: &str = "generators: A1 A2 B2 B1 H;
r1: comm(A2, comm(A2, B2)) ==
    4*hbar^2*A2^2 + 4*hbar^2*anti(A2, B2)
    + (-4*hbar^2*A1 + hbar^4*(4*mu1^2 - 3))*A2
    + 2*hbar^4*(2*mu1^2 + 2*mu2^2 - 3)*B2
    + hbar^6*(mu2^2 - mu1^2) + hbar^4*(3 - 4*mu1^2)*A1;
r2: comm(B2, comm(A2, B2)) ==
    -4*hbar^2*B2^2 - 4*hbar^2*anti(A2, B2)
    - 2*hbar^4*(2*mu1^2 + 2*mu3^2 - 3)*A2
    - (-4*hbar^2*A1 + hbar^4*(4*mu1^2 - 3))*B2
    + hbar^6*(mu1^2 - mu3^2) + hbar^4*(4*mu1^2 - 3)*A1;";

// words present in both relations; the square is per relation
const WORDS: [&str; 5] = ["anti(A2, B2)", "A2", "B2", "A1", "1"];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// Perturbing one coefficient breaks the relation; the refit restores a
    /// relation that verifies, and names the perturbed word.
    #[test]
    fn refit_closes(which in 0usize..2, idx in 0usize..6, k in scalar_leaf()) {
        prop_assume!(!k.is_zero());
        let word = match idx {
            5 => ["A2^2", "B2^2"][which],
            i => WORDS[i],
        };
        let mut cat = parse_catalog(ALGEBRA).unwrap();
        let rel = &mut cat.relations[which];
        let w = parse_expr(word, &cat.generators).unwrap();
        let extra = Expr::new(Node::Product(vec![Expr::scalar(k.clone()), w]));
        rel.rhs = Expr::new(Node::Sum(vec![rel.rhs.clone(), extra]));
        cat.relations = vec![cat.relations[which].clone()];
        let b = Binding::from_model(model());
        let rep = verify_catalog(&cat, &b).unwrap();
        let r = &rep.relations[0];
        prop_assert_eq!(r.status, Status::Fail);
        let fit = r.fitted_constants.as_ref().unwrap();
        prop_assert!(fit.closure_verified);
        let d = r.discrepancy.as_ref().unwrap();
        prop_assert_eq!(d.len(), 1);
        let minus_k = parse_expr(&d[0].value, &[]).unwrap().as_scalar().cloned().unwrap();
        prop_assert_eq!(minus_k, -&k);
    }
}
