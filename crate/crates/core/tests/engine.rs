use std::sync::OnceLock;

use qtern_core::dsl::{self, catalogs, parse_catalog, parse_expr, parse_relations, Expr};
use qtern_core::engine::{
    fit_structure_constants, verify_catalog, verify_catalog_with, verify_relation, Binding, Evaluator, FitOutcome,
    Status, VerifyOptions,
};
use qtern_core::model::{Model, ModelParams};
use qtern_core::operator::OperatorExpr;
use qtern_core::scalar::{ParamRat, Symbol};

fn model() -> &'static Model {
    static M: OnceLock<Model> = OnceLock::new();
    M.get_or_init(|| Model::build(&ModelParams::symbolic()))
}

fn gens() -> Vec<String> {
    ["A1", "A2", "B2", "B1", "F", "H"].iter().map(|s| s.to_string()).collect()
}

fn e(text: &str) -> Expr {
    parse_expr(text, &gens()).unwrap()
}

fn coeffs(out: FitOutcome) -> Vec<(String, ParamRat)> {
    match out {
        FitOutcome::Solved(cs) => cs,
        other => panic!("expected a solution, got {other:?}"),
    }
}

fn scalar(text: &str) -> ParamRat {
    e(text).as_scalar().cloned().unwrap()
}

#[test]
fn a1_b1_structure_constants() {
    let b = Binding::from_model(model());
    let basis: Vec<Expr> = ["A1^2*H", "anti(A1, B1)", "A1*H*A2", "A1*H", "A1", "B1", "A2*H", "A2", "H", "H^2", "1"]
        .iter()
        .map(|s| e(s))
        .collect();
    let cs = coeffs(fit_structure_constants(&e("comm(A1, comm(A1, B1))"), &basis, &b).unwrap());
    let expect = [
        "-16*hbar^2",
        "4*hbar^2",
        "16*hbar^2",
        "-2*hbar^4*(4*mu1^2 + 4*mu2^2 + 12*mu3^2 - 5)",
        "-4*hbar^6*mu^2",
        "2*hbar^4*(2*mu1^2 + 2*mu2^2 + 2*mu3^2 - 3)",
        "2*hbar^4*(4*mu1^2 + 4*mu2^2 + 4*mu3^2 - 5)",
        "4*hbar^6*mu^2",
        "hbar^6*(1 - 2*mu3^2*(4*mu1^2 + 4*mu2^2 + 4*mu3^2 - 5))",
        "0",
        "2*hbar^8*mu^2*(1 - 2*mu3^2)",
    ];
    for ((w, c), x) in cs.iter().zip(expect) {
        assert_eq!(*c, scalar(x), "coefficient of {w}");
    }
}

#[test]
fn a2_b2_delta_splits_over_a2_and_a1a2() {
    let b = Binding::from_model(model());
    let basis: Vec<Expr> = ["A2^2", "anti(A2, B2)", "A1*A2", "A2", "B2", "A1", "1"].iter().map(|s| e(s)).collect();
    let cs = coeffs(fit_structure_constants(&e("comm(A2, comm(A2, B2))"), &basis, &b).unwrap());
    let got: Vec<ParamRat> = cs.into_iter().map(|(_, c)| c).collect();
    let expect = [
        "4*hbar^2",
        "4*hbar^2",
        "-4*hbar^2",
        "hbar^4*(4*mu1^2 - 3)",
        "2*hbar^4*(2*mu1^2 + 2*mu2^2 - 3)",
        "hbar^4*(3 - 4*mu1^2)",
        "hbar^6*(mu2^2 - mu1^2)",
    ];
    assert_eq!(got, expect.iter().map(|x| scalar(x)).collect::<Vec<_>>());
}

#[test]
fn canonical_pair_has_no_fit() {
    let mut b = Binding::new();
    let hbar = ParamRat::var(Symbol::Hbar);
    b.insert("P", OperatorExpr::momentum(Symbol::X, &hbar));
    b.insert("Q", OperatorExpr::coord(Symbol::X));
    let g = vec!["P".to_string(), "Q".to_string()];
    let lhs = parse_expr("comm(P, Q)", &g).unwrap();
    let out = fit_structure_constants(&lhs, &[Expr::gen("Q")], &b).unwrap();
    assert!(matches!(out, FitOutcome::NoSolution { certified: true, .. }), "{out:?}");
    // while the identity does span it
    let out = fit_structure_constants(&lhs, &[Expr::gen("Q"), dsl::canonicalize(&e("1"))], &b).unwrap();
    let cs = coeffs(out);
    assert!(cs[0].1.is_zero());
    assert_eq!(cs[1].1, scalar("-i*hbar"));
}

#[test]
fn dependent_basis_reports_dimension() {
    let b = Binding::from_model(model());
    let basis: Vec<Expr> = ["A2", "B2", "2*A2 - B2", "anti(A2, B2)"].iter().map(|s| e(s)).collect();
    match fit_structure_constants(&e("comm(A2, comm(A2, B2))"), &basis, &b).unwrap() {
        FitOutcome::Underdetermined { dimension, dependent } => {
            assert_eq!(dimension, 1);
            assert_eq!(dependent, vec!["2*A2 - B2".to_string()]);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn perturbed_coefficient_is_named() {
    let b = Binding::from_model(model());
    let text = "t: comm(A1, comm(A1, F)) ==
        (16*hbar^2*B2*H - 2*hbar^4*(4*mu1^2 + 12*mu2^2 + 4*mu3^2 - 5)*H - 4*hbar^6*mu^2)*A1
        - 16*hbar^2*H*A1^2 + 4*hbar^2*anti(A1, F) + (hbar^4*(4*mu1^2 + 4*mu2^2 + 4*mu3^2 - 6) + 1)*F
        + 4*hbar^6*mu^2*B2 + hbar^6*(1 - 2*mu2^2*(4*mu1^2 + 4*mu2^2 + 4*mu3^2 - 5))*H
        + 2*hbar^4*(4*mu1^2 + 4*mu2^2 + 4*mu3^2 - 5)*B2*H + 2*hbar^8*mu^2*(1 - 2*mu2^2);";
    let rels = parse_relations(text, &gens()).unwrap();
    let r = verify_relation(&rels[0], &b).unwrap();
    assert!(!r.is_zero);
    assert_eq!(r.residual, model().f.neg());
    assert!(r.summary.terms > 0 && !r.summary.top.is_empty());

    let cat = dsl::Catalog { generators: gens(), relations: rels };
    let rep = verify_catalog(&cat, &b).unwrap();
    let d = rep.relations[0].discrepancy.as_ref().unwrap();
    assert_eq!(d.len(), 1);
    assert_eq!((d[0].word.as_str(), d[0].value.as_str()), ("F", "-1"));
    let fit = rep.relations[0].fitted_constants.as_ref().unwrap();
    assert!(fit.closure_verified);
    let f = fit.constants.iter().find(|c| c.word == "F").unwrap();
    assert_eq!(scalar(&f.value), scalar("hbar^4*(4*mu1^2 + 4*mu2^2 + 4*mu3^2 - 6)"));
}

#[test]
fn residual_is_linear() {
    let b = Binding::from_model(model());
    let ev = Evaluator::new(&b);
    let rels = parse_relations(
        "r1: comm(A2, B1) == hbar^2*A1;
         r2: anti(A1, B2) == B2^2 - mu*A2;
         r12: comm(A2, B1) + anti(A1, B2) == hbar^2*A1 + B2^2 - mu*A2;",
        &gens(),
    )
    .unwrap();
    let res: Vec<OperatorExpr> = rels.iter().map(|r| ev.residual(r).unwrap()).collect();
    assert_eq!(res[2], res[0].add(&res[1]));
}

#[test]
fn zero_catalog_passes() {
    let b = Binding::from_model(model());
    let rep = verify_catalog(&parse_catalog(catalogs::ZERO).unwrap(), &b).unwrap();
    assert_eq!(rep.relations.len(), 10);
    assert!(rep.pass);
}

#[test]
fn example_catalog_passes() {
    let b = Binding::from_model(model());
    let rep = verify_catalog(&parse_catalog(catalogs::EXAMPLE).unwrap(), &b).unwrap();
    assert!(rep.pass, "{:#?}", rep.relations.iter().filter(|r| r.status == Status::Fail).collect::<Vec<_>>());
}

#[test]
fn report_is_schedule_independent() {
    let b = Binding::from_model(model());
    let cat = parse_catalog(catalogs::ZERO).unwrap();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let mut cat = cat.clone();
            if threads > 1 {
                cat.relations.reverse();
            }
            let ev = Evaluator::new(&b);
            let mut rep = verify_catalog_with(&ev, &cat, VerifyOptions::default()).unwrap();
            if threads > 1 {
                rep.relations.reverse();
            }
            serde_json::to_string(&rep.to_json()).unwrap()
        })
    };
    assert_eq!(run(1), run(4));
}
