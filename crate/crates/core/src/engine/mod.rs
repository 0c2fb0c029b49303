//! Evaluates relation trees against operator bindings, reports exact
//! residuals and fits structure constants when a relation fails as printed.

mod linsolve;
mod modp;

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::Serialize;
use thiserror::Error;

use crate::dsl::{self, Catalog, Expr, Node, Pos, Relation};
use crate::model::{IntegralName, Model};
use crate::operator::OperatorExpr;
use crate::scalar::{ParamRat, Symbol};

pub use linsolve::{fit_linear, LinearFit};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum EngineError {
    #[error("{pos}: generator `{name}` is not bound")]
    Unbound { name: String, pos: Pos },
}

/// Weights of a homogeneous operator: power of ħ and weight under `x → λx`
/// (μ counts −1).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Grade {
    pub hbar: i32,
    pub length: i32,
}

impl Grade {
    const ZERO: Grade = Grade { hbar: 0, length: 0 };

    fn add(self, o: Grade) -> Grade {
        Grade { hbar: self.hbar + o.hbar, length: self.length + o.length }
    }

    fn times(self, n: u32) -> Grade {
        Grade { hbar: self.hbar * n as i32, length: self.length * n as i32 }
    }
}

/// Generator name → operator, with optional grades and a central element.
#[derive(Clone, Debug, Default)]
pub struct Binding {
    ops: BTreeMap<String, Arc<OperatorExpr>>,
    grades: BTreeMap<String, Grade>,
    central: Option<String>,
}

impl Binding {
    pub fn new() -> Binding {
        Binding::default()
    }

    pub fn insert(&mut self, name: &str, op: OperatorExpr) {
        self.ops.insert(name.to_string(), Arc::new(op));
    }

    pub fn set_grade(&mut self, name: &str, g: Grade) {
        self.grades.insert(name.to_string(), g);
    }

    /// Marks a generator as commuting with all others; the fit extension
    /// multiplies by its powers.
    pub fn set_central(&mut self, name: &str) {
        self.central = Some(name.to_string());
    }

    pub fn get(&self, name: &str) -> Option<&Arc<OperatorExpr>> {
        self.ops.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &String> {
        self.ops.keys()
    }

    /// The six generators of a built model, graded, with `H` central.
    pub fn from_model(m: &Model) -> Binding {
        let mut b = Binding::new();
        for n in IntegralName::GENERATORS {
            b.insert(n.name(), m.get(n).unwrap().clone());
            b.set_grade(n.name(), Grade { hbar: n.hbar_degree(), length: n.length_degree() });
        }
        b.set_central("H");
        b
    }

    fn poly_grade(p: &crate::scalar::Poly) -> Option<Grade> {
        let mut g: Option<Grade> = None;
        for (m, _) in p.terms() {
            let t = Grade { hbar: m.exp(Symbol::Hbar) as i32, length: -(m.exp(Symbol::Mu) as i32) };
            if g.is_some_and(|x| x != t) {
                return None;
            }
            g = Some(t);
        }
        g
    }

    fn scalar_grade(k: &ParamRat) -> Option<Grade> {
        let n = Binding::poly_grade(k.num())?;
        let d = Binding::poly_grade(k.den())?;
        Some(Grade { hbar: n.hbar - d.hbar, length: n.length - d.length })
    }

    /// Grade of a homogeneous tree, or `None` if it mixes grades or uses an
    /// ungraded generator. Zero scalars and empty sums are ungraded.
    pub fn grade(&self, e: &Expr) -> Option<Grade> {
        match &e.node {
            Node::Gen(g) => self.grades.get(g).copied(),
            Node::Scalar(k) => {
                if k.is_zero() {
                    None
                } else {
                    Binding::scalar_grade(k)
                }
            }
            Node::Sum(v) => {
                let mut g = None;
                for t in v {
                    let tg = self.grade(t)?;
                    if g.is_some_and(|x| x != tg) {
                        return None;
                    }
                    g = Some(tg);
                }
                g
            }
            Node::Product(v) => v.iter().try_fold(Grade::ZERO, |acc, f| Some(acc.add(self.grade(f)?))),
            Node::Power(b, n) => Some(self.grade(b)?.times(*n)),
            Node::Comm(a, b) | Node::Anti(a, b) => Some(self.grade(a)?.add(self.grade(b)?)),
            Node::Neg(b) => self.grade(b),
        }
    }
}

/// Evaluates trees with memoization of every composite subtree.
pub struct Evaluator<'a> {
    binding: &'a Binding,
    cache: Mutex<FxHashMap<String, Arc<OperatorExpr>>>,
}

impl<'a> Evaluator<'a> {
    pub fn new(binding: &'a Binding) -> Evaluator<'a> {
        Evaluator { binding, cache: Mutex::new(FxHashMap::default()) }
    }

    pub fn binding(&self) -> &Binding {
        self.binding
    }

    fn cached(&self, key: &str) -> Option<Arc<OperatorExpr>> {
        self.cache.lock().unwrap().get(key).cloned()
    }

    fn store(&self, key: String, v: OperatorExpr) -> Arc<OperatorExpr> {
        let v = Arc::new(v);
        self.cache.lock().unwrap().entry(key).or_insert(v).clone()
    }

    pub fn eval(&self, e: &Expr) -> Result<Arc<OperatorExpr>, EngineError> {
        match &e.node {
            Node::Gen(g) => {
                return self.binding.get(g).cloned().ok_or(EngineError::Unbound { name: g.clone(), pos: e.pos });
            }
            Node::Scalar(k) => return Ok(Arc::new(OperatorExpr::scalar(k))),
            _ => {}
        }
        let key = dsl::print(e);
        if let Some(v) = self.cached(&key) {
            return Ok(v);
        }
        let v = match &e.node {
            Node::Sum(v) => {
                let parts: Vec<Arc<OperatorExpr>> = v.par_iter().map(|t| self.eval(t)).collect::<Result<_, _>>()?;
                OperatorExpr::sum(parts.iter().map(|p| p.as_ref()))
            }
            Node::Product(v) => {
                let (k, factors) = match v[0].as_scalar() {
                    Some(k) => (Some(k.clone()), &v[1..]),
                    None => (None, &v[..]),
                };
                let body = if factors.len() == 1 { self.eval(&factors[0])? } else { self.eval_chain(factors)? };
                match k {
                    Some(k) => body.scale(&k),
                    None => return Ok(body),
                }
            }
            Node::Power(b, n) => {
                let b = self.eval(b)?;
                b.pow(*n)
            }
            Node::Comm(a, b) | Node::Anti(a, b) => {
                let (x, y) = rayon::join(|| self.eval(a), || self.eval(b));
                let (x, y) = (x?, y?);
                if matches!(e.node, Node::Comm(..)) {
                    x.commutator(&y)
                } else {
                    x.anticommutator(&y)
                }
            }
            Node::Neg(b) => self.eval(b)?.neg(),
            Node::Gen(_) | Node::Scalar(_) => unreachable!(),
        };
        Ok(self.store(key, v))
    }

    /// Left-to-right product of non-scalar factors; prefixes are memoized.
    fn eval_chain(&self, factors: &[Expr]) -> Result<Arc<OperatorExpr>, EngineError> {
        let key = factors
            .iter()
            .map(|f| dsl::print(&Expr::new(Node::Product(vec![f.clone()]))))
            .collect::<Vec<_>>()
            .join("*");
        if let Some(v) = self.cached(&key) {
            return Ok(v);
        }
        let last = self.eval(&factors[factors.len() - 1])?;
        let head =
            if factors.len() == 2 { self.eval(&factors[0])? } else { self.eval_chain(&factors[..factors.len() - 1])? };
        Ok(self.store(key, head.compose(&last)))
    }

    /// `lhs − rhs`.
    pub fn residual(&self, rel: &Relation) -> Result<OperatorExpr, EngineError> {
        let (l, r) = rayon::join(|| self.eval(&rel.lhs), || self.eval(&rel.rhs));
        Ok(l?.sub(&*r?))
    }
}

/// Word of a relation side: scalar-free product of generators, powers,
/// commutators and anticommutators. `None` is the identity.
pub type Word = Option<Expr>;

pub fn word_text(w: &Word) -> String {
    match w {
        None => "1".to_string(),
        Some(e) => dsl::print(e),
    }
}

fn word_expr(w: &Word) -> Expr {
    w.clone().unwrap_or_else(|| Expr::scalar(ParamRat::one()))
}

fn mul_words(a: &Word, b: &Word) -> Word {
    match (a, b) {
        (None, x) | (x, None) => x.clone(),
        (Some(x), Some(y)) => Some(dsl::canonicalize(&Expr::new(Node::Product(vec![x.clone(), y.clone()])))),
    }
}

/// Distributes products over sums: `e = Σ k_w · w`, words in first-seen
/// order with equal words merged.
pub fn expand_words(e: &Expr) -> Vec<(ParamRat, Word)> {
    fn go(e: &Expr) -> Vec<(ParamRat, Word)> {
        match &e.node {
            Node::Scalar(k) => vec![(k.clone(), None)],
            Node::Gen(_) | Node::Power(..) | Node::Comm(..) | Node::Anti(..) => {
                vec![(ParamRat::one(), Some(e.clone()))]
            }
            Node::Neg(b) => go(b).into_iter().map(|(k, w)| (-&k, w)).collect(),
            Node::Sum(v) => v.iter().flat_map(go).collect(),
            Node::Product(v) => {
                let mut acc: Vec<(ParamRat, Word)> = vec![(ParamRat::one(), None)];
                for f in v {
                    let fe = go(f);
                    let mut next = Vec::with_capacity(acc.len() * fe.len());
                    for (k1, w1) in &acc {
                        for (k2, w2) in &fe {
                            next.push((k1 * k2, mul_words(w1, w2)));
                        }
                    }
                    acc = next;
                }
                acc
            }
        }
    }
    let mut out: Vec<(ParamRat, Word)> = Vec::new();
    let mut index: FxHashMap<String, usize> = FxHashMap::default();
    for (k, w) in go(e) {
        let key = word_text(&w);
        match index.get(&key) {
            Some(&j) => out[j].0 = &out[j].0 + &k,
            None => {
                index.insert(key, out.len());
                out.push((k, w));
            }
        }
    }
    out
}

/// Degree-≤2 monomials in the non-central generators, spanned by
/// `1, X, X², {X,Y}, [X,Y]`, times `1, C, C²` for the central `C`.
pub fn extension_words(gens: &[String], central: Option<&str>) -> Vec<Word> {
    let others: Vec<&String> = gens.iter().filter(|g| Some(g.as_str()) != central).collect();
    let mut base: Vec<Word> = vec![None];
    for g in &others {
        base.push(Some(Expr::gen(g)));
    }
    for g in &others {
        base.push(Some(dsl::canonicalize(&Expr::new(Node::Power(Box::new(Expr::gen(g)), 2)))));
    }
    for (a, g) in others.iter().enumerate() {
        for h in &others[a + 1..] {
            base.push(Some(Expr::new(Node::Anti(Box::new(Expr::gen(g)), Box::new(Expr::gen(h))))));
        }
    }
    for (a, g) in others.iter().enumerate() {
        for h in &others[a + 1..] {
            base.push(Some(Expr::new(Node::Comm(Box::new(Expr::gen(g)), Box::new(Expr::gen(h))))));
        }
    }
    let Some(c) = central else {
        return base;
    };
    let powers: [Word; 3] = [None, Some(Expr::gen(c)), Some(Expr::new(Node::Power(Box::new(Expr::gen(c)), 2)))];
    powers.iter().flat_map(|cw| base.iter().map(move |w| mul_words(w, cw))).collect()
}

/// Summary of a nonzero residual.
#[derive(Clone, Debug, Serialize)]
pub struct ResidualSummary {
    pub terms: usize,
    pub top: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct Residual {
    pub label: String,
    pub residual: OperatorExpr,
    pub is_zero: bool,
    pub summary: ResidualSummary,
}

impl Residual {
    fn new(label: &str, residual: OperatorExpr) -> Residual {
        let summary = ResidualSummary { terms: residual.term_count(), top: residual.summary(4) };
        Residual { label: label.to_string(), is_zero: residual.is_zero(), residual, summary }
    }
}

pub fn verify_relation(rel: &Relation, b: &Binding) -> Result<Residual, EngineError> {
    let ev = Evaluator::new(b);
    Ok(Residual::new(&rel.label, ev.residual(rel)?))
}

/// A word with its coefficient, as text.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WordCoeff {
    pub word: String,
    pub value: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub printed: Option<String>,
}

#[derive(Clone, Debug)]
pub enum FitOutcome {
    /// Coefficients for each basis word, in basis order.
    Solved(Vec<(String, ParamRat)>),
    /// No combination of the basis words equals the target.
    NoSolution {
        certified: bool,
        residual_terms: Option<usize>,
    },
    Underdetermined {
        dimension: usize,
        dependent: Vec<String>,
    },
}

/// Solves `lhs = Σ c_w · w` over the given basis, exactly.
pub fn fit_structure_constants(lhs: &Expr, basis: &[Expr], b: &Binding) -> Result<FitOutcome, EngineError> {
    let ev = Evaluator::new(b);
    fit_with(&ev, lhs, basis, false).map(|(o, _)| o)
}

fn fit_with(ev: &Evaluator, lhs: &Expr, basis: &[Expr], prune: bool) -> Result<(FitOutcome, Vec<usize>), EngineError> {
    let target = ev.eval(lhs)?;
    fit_operator(ev, &target, basis, prune)
}

fn fit_operator(
    ev: &Evaluator,
    target: &OperatorExpr,
    basis: &[Expr],
    prune: bool,
) -> Result<(FitOutcome, Vec<usize>), EngineError> {
    let ops: Vec<Arc<OperatorExpr>> = basis.par_iter().map(|w| ev.eval(w)).collect::<Result<_, _>>()?;
    let refs: Vec<&OperatorExpr> = ops.iter().map(|o| o.as_ref()).collect();
    let names: Vec<String> = basis.iter().map(dsl::print).collect();
    Ok(match fit_linear(target, &refs, prune) {
        LinearFit::Solved { coeffs, dropped } => (FitOutcome::Solved(names.into_iter().zip(coeffs).collect()), dropped),
        LinearFit::NoSolution { certified, residual, dropped } => {
            (FitOutcome::NoSolution { certified, residual_terms: residual.map(|r| r.term_count()) }, dropped)
        }
        LinearFit::Underdetermined { dimension, dependent } => {
            let dep = dependent.iter().map(|&j| names[j].clone()).collect();
            (FitOutcome::Underdetermined { dimension, dependent: dep }, dependent)
        }
    })
}

/// Result of refitting a failing relation over its own words plus the
/// standard extension.
#[derive(Clone, Debug, Serialize)]
pub struct Refit {
    /// "solved", "no_solution" or "no_solution_uncertified".
    pub outcome: String,
    /// Nonzero fitted constants, own words first.
    pub constants: Vec<WordCoeff>,
    pub basis_size: usize,
    /// Words dropped as linearly dependent on earlier ones.
    pub dropped: Vec<String>,
    /// The relation rebuilt from the fitted constants verifies to zero.
    pub closure_verified: bool,
    /// The rebuilt relation, in relation-file syntax.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relation: Option<String>,
}

/// Own words of the relation's right-hand side (with printed coefficients).
pub fn own_words(rel: &Relation) -> Vec<(ParamRat, Word)> {
    expand_words(&rel.rhs)
}

/// Fits the residual against the relation's own words: names the printed
/// coefficients that are off and by how much.
pub fn explain(ev: &Evaluator, rel: &Relation, residual: &OperatorExpr) -> Result<Option<Vec<WordCoeff>>, EngineError> {
    let words: Vec<Expr> = own_words(rel).iter().map(|(_, w)| word_expr(w)).collect();
    let (out, _) = fit_operator(ev, residual, &words, true)?;
    Ok(match out {
        FitOutcome::Solved(cs) => Some(
            cs.into_iter()
                .filter(|(_, c)| !c.is_zero())
                .map(|(w, c)| WordCoeff { word: w, value: c.to_string(), printed: None })
                .collect(),
        ),
        _ => None,
    })
}

fn rebuild(lhs: &Expr, terms: &[(ParamRat, Word)]) -> Relation {
    let rhs: Vec<Expr> = terms
        .iter()
        .filter(|(k, _)| !k.is_zero())
        .map(|(k, w)| dsl::canonicalize(&Expr::new(Node::Product(vec![Expr::scalar(k.clone()), word_expr(w)]))))
        .collect();
    let rhs =
        if rhs.is_empty() { Expr::scalar(ParamRat::zero()) } else { dsl::canonicalize(&Expr::new(Node::Sum(rhs))) };
    Relation { label: String::new(), lhs: lhs.clone(), rhs, pos: Pos::default(), source: String::new() }
}

pub fn refit(ev: &Evaluator, rel: &Relation) -> Result<Refit, EngineError> {
    let b = ev.binding();
    let own = own_words(rel);
    let gens: Vec<String> = b.names().cloned().collect();
    let extension = extension_words(&gens, b.central.as_deref());
    let lhs_grade = b.grade(&rel.lhs);
    // Graded pass first: keep words whose coefficient can be a polynomial of
    // the right weight (nonnegative powers of ħ and μ). If that finds nothing,
    // fall back to the whole extension.
    let graded = |w: &Word| match (lhs_grade, w.as_ref().map_or(Some(Grade::ZERO), |e| b.grade(e))) {
        (Some(lg), Some(wg)) => wg.hbar <= lg.hbar && wg.length >= lg.length,
        _ => true,
    };
    let words_for = |filter: bool| {
        let mut words: Vec<Word> = own.iter().map(|(_, w)| w.clone()).collect();
        let mut seen: std::collections::HashSet<String> = words.iter().map(word_text).collect();
        for w in &extension {
            if (!filter || graded(w)) && seen.insert(word_text(w)) {
                words.push(w.clone());
            }
        }
        words
    };
    let mut words = words_for(true);
    let mut basis: Vec<Expr> = words.iter().map(word_expr).collect();
    let (mut outcome, mut dropped) = fit_with(ev, &rel.lhs, &basis, true)?;
    if matches!(outcome, FitOutcome::NoSolution { .. }) {
        let all = words_for(false);
        if all.len() > words.len() {
            words = all;
            basis = words.iter().map(word_expr).collect();
            (outcome, dropped) = fit_with(ev, &rel.lhs, &basis, true)?;
        }
    }
    let dropped_names: Vec<String> = dropped.iter().map(|&j| word_text(&words[j])).collect();
    let printed: FxHashMap<String, ParamRat> = own.iter().map(|(k, w)| (word_text(w), k.clone())).collect();
    match outcome {
        FitOutcome::Solved(cs) => {
            let terms: Vec<(ParamRat, Word)> = cs.iter().map(|(_, c)| c.clone()).zip(words.iter().cloned()).collect();
            let fixed = rebuild(&rel.lhs, &terms);
            let closure_verified = ev.residual(&fixed)?.is_zero();
            let constants = terms
                .iter()
                .filter(|(k, w)| !k.is_zero() || printed.get(&word_text(w)).is_some_and(|p| !p.is_zero()))
                .map(|(k, w)| {
                    let t = word_text(w);
                    WordCoeff { printed: printed.get(&t).map(|p| p.to_string()), word: t, value: k.to_string() }
                })
                .collect();
            Ok(Refit {
                outcome: "solved".into(),
                constants,
                basis_size: basis.len(),
                dropped: dropped_names,
                closure_verified,
                relation: Some(format!("{} == {}", rel.lhs, fixed.rhs)),
            })
        }
        FitOutcome::NoSolution { certified, .. } => Ok(Refit {
            outcome: if certified { "no_solution".into() } else { "no_solution_uncertified".into() },
            constants: vec![],
            basis_size: basis.len(),
            dropped: dropped_names,
            closure_verified: false,
            relation: None,
        }),
        FitOutcome::Underdetermined { .. } => unreachable!("pruned fits are never underdetermined"),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Clone, Debug, Serialize)]
pub struct RelationReport {
    pub label: String,
    pub status: Status,
    pub residual_terms: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub residual_top: Vec<String>,
    /// Printed coefficients that are off, as corrections on the relation's
    /// own words (residual = Σ correction · word).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub discrepancy: Option<Vec<WordCoeff>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fitted_constants: Option<Refit>,
    /// Earlier relation with the same left-hand side.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duplicate_of: Option<String>,
    /// Whether the duplicate's source text is identical.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub textually_identical: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CatalogReport {
    pub relations: Vec<RelationReport>,
    pub pass: bool,
}

impl CatalogReport {
    pub fn to_json(&self) -> serde_json::Value {
        // Round-trip through Value so object keys come out sorted.
        serde_json::to_value(self).expect("serializable")
    }
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    /// Refit failing relations over their words plus the standard extension.
    pub refit: bool,
    /// Name the printed coefficients that are off.
    pub explain: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { refit: true, explain: true }
    }
}

pub fn verify_catalog(catalog: &Catalog, b: &Binding) -> Result<CatalogReport, EngineError> {
    verify_catalog_with(&Evaluator::new(b), catalog, VerifyOptions::default())
}

pub fn verify_catalog_with(
    ev: &Evaluator,
    catalog: &Catalog,
    opts: VerifyOptions,
) -> Result<CatalogReport, EngineError> {
    let mut relations: Vec<RelationReport> = catalog
        .relations
        .par_iter()
        .map(|rel| {
            let res = ev.residual(rel)?;
            let ok = res.is_zero();
            let discrepancy = if !ok && opts.explain { explain(ev, rel, &res)? } else { None };
            let fitted_constants = if !ok && opts.refit { Some(refit(ev, rel)?) } else { None };
            Ok(RelationReport {
                label: rel.label.clone(),
                status: if ok { Status::Pass } else { Status::Fail },
                residual_terms: res.term_count(),
                residual_top: res.summary(4),
                discrepancy,
                fitted_constants,
                duplicate_of: None,
                textually_identical: None,
            })
        })
        .collect::<Result<_, EngineError>>()?;
    for j in 0..catalog.relations.len() {
        let rj = &catalog.relations[j];
        if let Some(i) = (0..j).find(|&i| catalog.relations[i].lhs == rj.lhs) {
            let ri = &catalog.relations[i];
            relations[j].duplicate_of = Some(ri.label.clone());
            relations[j].textually_identical = Some(ri.source == rj.source);
        }
    }
    let pass = relations.iter().all(|r| r.status == Status::Pass);
    Ok(CatalogReport { relations, pass })
}
