//! Normal-ordered differential operators `Σ c_α(x,y,z) ∂^α`.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use rustc_hash::FxHashMap;

use super::coeff::{mul_numerators_into, s_poly, SpatialCoeff};
use crate::scalar::gcd::lcm;
use crate::scalar::{GaussRational, Monomial, ParamRat, Poly, PolyAcc, ScalarError, Symbol};

/// Exponents of `∂x, ∂y, ∂z`.
pub type DerivIndex = [u8; 3];

/// Operator in normal form: coefficients to the left of all derivatives.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct OperatorExpr {
    terms: BTreeMap<DerivIndex, SpatialCoeff>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Product {
    Compose,
    Commutator,
    Anticommutator,
}

fn binom(n: u8, k: u8) -> i64 {
    let mut r = 1i64;
    for i in 0..k as i64 {
        r = r * (n as i64 - i) / (i + 1);
    }
    r
}

fn le(g: DerivIndex, a: DerivIndex) -> bool {
    g[0] <= a[0] && g[1] <= a[1] && g[2] <= a[2]
}

fn coord(k: usize) -> Symbol {
    Symbol::COORDS[k]
}

/// Coefficients with parameter denominators cleared: `c = c̃ / L`.
struct Cleared {
    l: Poly,
    coeffs: Vec<(DerivIndex, SpatialCoeff)>,
}

fn clear_pden(f: &OperatorExpr) -> Cleared {
    let mut l = Poly::one();
    for c in f.terms.values() {
        if !c.pden.is_one() && c.pden != l {
            l = lcm(&l, &c.pden);
        }
    }
    let coeffs = f
        .terms
        .iter()
        .map(|(k, c)| {
            if c.pden == l {
                let mut c = c.clone();
                c.pden = Poly::one();
                (*k, c)
            } else {
                let m = l.div_exact(&c.pden).expect("lcm divides");
                (*k, SpatialCoeff { a: &c.a * &m, b: &c.b * &m, den: c.den, s_pow: c.s_pow, pden: Poly::one() })
            }
        })
        .collect();
    Cleared { l, coeffs }
}

/// All derivatives `∂^γ c` for `γ` in the downward-closed set `gammas`.
fn derivative_table(c: &SpatialCoeff, gammas: &[DerivIndex]) -> FxHashMap<DerivIndex, SpatialCoeff> {
    let mut table: FxHashMap<DerivIndex, SpatialCoeff> = FxHashMap::default();
    table.insert([0, 0, 0], c.clone());
    // `gammas` is sorted by total order so parents come first.
    for &g in gammas {
        if table.contains_key(&g) {
            continue;
        }
        let k = (0..3).find(|&k| g[k] > 0).unwrap();
        let mut parent = g;
        parent[k] -= 1;
        let d = table[&parent].derivative(coord(k));
        table.insert(g, d);
    }
    table
}

fn gamma_set(f: &OperatorExpr) -> Vec<DerivIndex> {
    let mut set: Vec<DerivIndex> = Vec::new();
    for a in f.terms.keys() {
        for i in 0..=a[0] {
            for j in 0..=a[1] {
                for k in 0..=a[2] {
                    set.push([i, j, k]);
                }
            }
        }
    }
    set.sort_by_key(|g| (g[0] as u32 + g[1] as u32 + g[2] as u32, *g));
    set.dedup();
    set
}

/// One contribution `k · c_left · (∂^γ c_right) ∂^target`.
struct Contribution<'a> {
    left: &'a SpatialCoeff,
    right: &'a SpatialCoeff,
    k: i64,
}

#[derive(Default)]
struct GroupAcc {
    a: PolyAcc,
    b: PolyAcc,
}

fn finish_target(contribs: &[Contribution<'_>], pden: &Poly) -> SpatialCoeff {
    let mut groups: FxHashMap<(Monomial, u32), GroupAcc> = FxHashMap::default();
    for c in contribs {
        let key = (c.left.den.mul(c.right.den), c.left.s_pow + c.right.s_pow);
        let g = groups.entry(key).or_default();
        mul_numerators_into(
            &mut g.a,
            &mut g.b,
            &c.left.a,
            &c.left.b,
            &c.right.a,
            &c.right.b,
            &GaussRational::from_int(c.k),
        );
    }
    let mut parts: Vec<((Monomial, u32), Poly, Poly)> = groups
        .into_iter()
        .map(|(k, g)| (k, g.a.into_poly(), g.b.into_poly()))
        .filter(|(_, a, b)| !a.is_zero() || !b.is_zero())
        .collect();
    if parts.is_empty() {
        return SpatialCoeff::zero();
    }
    parts.sort_by(|x, y| x.0.cmp(&y.0));
    let mut den = 0u128;
    let mut s_pow = 0;
    for ((m, s), _, _) in &parts {
        for v in Symbol::COORDS {
            let e = m.exp(v).max(Monomial(den).exp(v)) as u128;
            den = (den & !(0xffu128 << (v.index() * 8))) | (e << (v.index() * 8));
        }
        s_pow = s_pow.max(*s);
    }
    let den = Monomial(den);
    let mut acc_a = PolyAcc::new();
    let mut acc_b = PolyAcc::new();
    for ((m, s), a, b) in parts {
        let lift = den.div(m).unwrap();
        let ds = s_pow - s;
        let sp = if ds > 0 { Some(s_poly().pow(ds)) } else { None };
        for (p, acc) in [(a, &mut acc_a), (b, &mut acc_b)] {
            if p.is_zero() {
                continue;
            }
            let p = p.mul_monomial(lift);
            match &sp {
                Some(sp) => acc.add_product(&p, sp),
                None => acc.add_poly(&p),
            }
        }
    }
    SpatialCoeff::new(acc_a.into_poly(), acc_b.into_poly(), den, s_pow, pden.clone())
}

impl OperatorExpr {
    pub fn zero() -> OperatorExpr {
        OperatorExpr { terms: BTreeMap::new() }
    }

    pub fn identity() -> OperatorExpr {
        OperatorExpr::multiplication(SpatialCoeff::one())
    }

    /// Multiplication by a coefficient.
    pub fn multiplication(c: SpatialCoeff) -> OperatorExpr {
        OperatorExpr::term([0, 0, 0], c)
    }

    pub fn scalar(c: &ParamRat) -> OperatorExpr {
        OperatorExpr::multiplication(SpatialCoeff::scalar(c))
    }

    pub fn term(idx: DerivIndex, c: SpatialCoeff) -> OperatorExpr {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(idx, c);
        }
        OperatorExpr { terms }
    }

    /// Multiplication by a coordinate.
    pub fn coord(v: Symbol) -> OperatorExpr {
        OperatorExpr::multiplication(SpatialCoeff::coord(v))
    }

    /// Multiplication by `r`.
    pub fn r() -> OperatorExpr {
        OperatorExpr::multiplication(SpatialCoeff::r())
    }

    /// `∂v`.
    pub fn partial(v: Symbol) -> OperatorExpr {
        let mut idx = [0u8; 3];
        idx[v.index() - Symbol::X.index()] = 1;
        OperatorExpr::term(idx, SpatialCoeff::one())
    }

    /// `p_v = −iħ ∂v`.
    pub fn momentum(v: Symbol, hbar: &ParamRat) -> OperatorExpr {
        OperatorExpr::partial(v).scale(&(&ParamRat::i() * hbar).scale(&GaussRational::from_int(-1)))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&DerivIndex, &SpatialCoeff)> {
        self.terms.iter()
    }

    pub fn coeff(&self, idx: DerivIndex) -> SpatialCoeff {
        self.terms.get(&idx).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of derivative monomials.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total numerator term count over all coefficients.
    pub fn term_count(&self) -> usize {
        self.terms.values().map(|c| c.term_count()).sum()
    }

    /// Highest total derivative order, 0 for the zero operator.
    pub fn order(&self) -> u32 {
        self.terms.keys().map(|k| k.iter().map(|&e| e as u32).sum()).max().unwrap_or(0)
    }

    pub fn add(&self, rhs: &OperatorExpr) -> OperatorExpr {
        let mut terms = self.terms.clone();
        for (k, c) in &rhs.terms {
            match terms.get(k) {
                Some(old) => {
                    let s = old.add(c);
                    if s.is_zero() {
                        terms.remove(k);
                    } else {
                        terms.insert(*k, s);
                    }
                }
                None => {
                    terms.insert(*k, c.clone());
                }
            }
        }
        OperatorExpr { terms }
    }

    pub fn neg(&self) -> OperatorExpr {
        OperatorExpr { terms: self.terms.iter().map(|(k, c)| (*k, c.neg())).collect() }
    }

    pub fn sub(&self, rhs: &OperatorExpr) -> OperatorExpr {
        self.add(&rhs.neg())
    }

    pub fn scale(&self, k: &ParamRat) -> OperatorExpr {
        if k.is_zero() {
            return OperatorExpr::zero();
        }
        OperatorExpr { terms: self.terms.iter().map(|(i, c)| (*i, c.mul_param(k))).collect() }
    }

    pub fn scale_const(&self, k: &GaussRational) -> OperatorExpr {
        if k.is_zero() {
            return OperatorExpr::zero();
        }
        OperatorExpr { terms: self.terms.iter().map(|(i, c)| (*i, c.scale(k))).collect() }
    }

    /// Left multiplication by a coefficient.
    pub fn mul_left(&self, c: &SpatialCoeff) -> OperatorExpr {
        OperatorExpr { terms: self.terms.iter().map(|(i, t)| (*i, c.mul(t))).filter(|(_, t)| !t.is_zero()).collect() }
    }

    /// Sum of operators.
    pub fn sum<'a>(ops: impl IntoIterator<Item = &'a OperatorExpr>) -> OperatorExpr {
        let mut grouped: BTreeMap<DerivIndex, Vec<&SpatialCoeff>> = BTreeMap::new();
        for op in ops {
            for (k, c) in &op.terms {
                grouped.entry(*k).or_default().push(c);
            }
        }
        let terms: Vec<(DerivIndex, SpatialCoeff)> = grouped
            .into_par_iter()
            .map(|(k, cs)| {
                if cs.len() == 1 {
                    return (k, cs[0].clone());
                }
                let (den, s_pow, pden, nums) = SpatialCoeff::common_denominator(&cs);
                let mut a = PolyAcc::new();
                let mut b = PolyAcc::new();
                for (na, nb) in &nums {
                    a.add_poly(na);
                    b.add_poly(nb);
                }
                (k, SpatialCoeff::new(a.into_poly(), b.into_poly(), den, s_pow, pden))
            })
            .collect();
        OperatorExpr { terms: terms.into_iter().filter(|(_, c)| !c.is_zero()).collect() }
    }

    /// Linear combination `Σ k_i · op_i`.
    pub fn linear_combination(items: &[(ParamRat, &OperatorExpr)]) -> OperatorExpr {
        let scaled: Vec<OperatorExpr> = items.par_iter().map(|(k, op)| op.scale(k)).collect();
        OperatorExpr::sum(scaled.iter())
    }

    /// Operator product `self ∘ rhs`.
    pub fn compose(&self, rhs: &OperatorExpr) -> OperatorExpr {
        bilinear(self, rhs, Product::Compose)
    }

    /// `[self, rhs] = self∘rhs − rhs∘self`.
    pub fn commutator(&self, rhs: &OperatorExpr) -> OperatorExpr {
        bilinear(self, rhs, Product::Commutator)
    }

    /// `{self, rhs} = self∘rhs + rhs∘self`.
    pub fn anticommutator(&self, rhs: &OperatorExpr) -> OperatorExpr {
        bilinear(self, rhs, Product::Anticommutator)
    }

    pub fn pow(&self, e: u32) -> OperatorExpr {
        let mut acc = OperatorExpr::identity();
        for _ in 0..e {
            acc = acc.compose(self);
        }
        acc
    }

    /// Image of a function (given as a coefficient) under the operator.
    pub fn apply(&self, t: &SpatialCoeff) -> SpatialCoeff {
        let mut out = SpatialCoeff::zero();
        for (idx, c) in &self.terms {
            let mut d = t.clone();
            for k in 0..3 {
                for _ in 0..idx[k] {
                    d = d.derivative(coord(k));
                }
            }
            out = out.add(&c.mul(&d));
        }
        out
    }

    pub fn substitute_params(&self, bind: &[(Symbol, ParamRat)]) -> Result<OperatorExpr, ScalarError> {
        let mut terms = BTreeMap::new();
        for (k, c) in &self.terms {
            let c = c.substitute(bind)?;
            if !c.is_zero() {
                terms.insert(*k, c);
            }
        }
        Ok(OperatorExpr { terms })
    }

    /// If the operator is multiplication by a parameter-only value, that value.
    pub fn as_param(&self) -> Option<ParamRat> {
        match self.terms.len() {
            0 => Some(ParamRat::zero()),
            1 => self.terms.get(&[0, 0, 0]).and_then(|c| c.as_param()),
            _ => None,
        }
    }

    /// Short description of the largest terms, for reports.
    pub fn summary(&self, max_terms: usize) -> Vec<String> {
        let mut v: Vec<(&DerivIndex, &SpatialCoeff)> = self.terms.iter().collect();
        v.sort_by(|a, b| {
            let oa: u32 = a.0.iter().map(|&e| e as u32).sum();
            let ob: u32 = b.0.iter().map(|&e| e as u32).sum();
            ob.cmp(&oa).then(b.0.cmp(a.0))
        });
        v.into_iter()
            .take(max_terms)
            .map(|(k, c)| {
                let text = c.to_string();
                let text = if text.len() > 160 {
                    format!("{}…", &text[..text.char_indices().nth(160).map_or(text.len(), |x| x.0)])
                } else {
                    text
                };
                format!("{}: {} terms: {}", deriv_name(*k), c.term_count(), text)
            })
            .collect()
    }
}

pub fn deriv_name(k: DerivIndex) -> String {
    let mut parts = Vec::new();
    for (i, n) in ["dx", "dy", "dz"].iter().enumerate() {
        match k[i] {
            0 => {}
            1 => parts.push(n.to_string()),
            e => parts.push(format!("{n}^{e}")),
        }
    }
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join("*")
    }
}

/// Appends `sign · binom(α,γ) · c_α (∂^γ d_β) ∂^{α−γ+β}` for all index
/// triples; zeroth-order terms are skipped or weighted by `zero_factor`.
#[allow(clippy::too_many_arguments)]
fn push_contributions<'a>(
    by_target: &mut BTreeMap<DerivIndex, Vec<Contribution<'a>>>,
    left: &'a Cleared,
    right: &'a Cleared,
    tabs: &'a [FxHashMap<DerivIndex, SpatialCoeff>],
    sign: i64,
    skip0: bool,
    zero_factor: i64,
) {
    for (alpha, c) in &left.coeffs {
        for (bi, (beta, _)) in right.coeffs.iter().enumerate() {
            for (gamma, dg) in &tabs[bi] {
                if !le(*gamma, *alpha) || dg.is_zero() {
                    continue;
                }
                let zero_gamma = *gamma == [0, 0, 0];
                if zero_gamma && skip0 {
                    continue;
                }
                let mut k = sign * binom(alpha[0], gamma[0]) * binom(alpha[1], gamma[1]) * binom(alpha[2], gamma[2]);
                if zero_gamma {
                    k *= zero_factor;
                }
                let target =
                    [alpha[0] - gamma[0] + beta[0], alpha[1] - gamma[1] + beta[1], alpha[2] - gamma[2] + beta[2]];
                by_target.entry(target).or_default().push(Contribution { left: c, right: dg, k });
            }
        }
    }
}

fn bilinear(f: &OperatorExpr, g: &OperatorExpr, mode: Product) -> OperatorExpr {
    if f.is_zero() || g.is_zero() {
        return OperatorExpr::zero();
    }
    let fc = clear_pden(f);
    let gc = clear_pden(g);
    let pden = if fc.l.is_one() {
        gc.l.clone()
    } else if gc.l.is_one() {
        fc.l.clone()
    } else {
        &fc.l * &gc.l
    };

    let tables = |src: &Cleared, other: &OperatorExpr| -> Vec<FxHashMap<DerivIndex, SpatialCoeff>> {
        let gammas = gamma_set(other);
        src.coeffs.par_iter().map(|(_, c)| derivative_table(c, &gammas)).collect()
    };
    let g_tabs = tables(&gc, f);
    let f_tabs = if mode == Product::Compose { Vec::new() } else { tables(&fc, g) };

    // Collect contributions grouped by target derivative index.
    let mut by_target: BTreeMap<DerivIndex, Vec<Contribution<'_>>> = BTreeMap::new();
    match mode {
        Product::Compose => push_contributions(&mut by_target, &fc, &gc, &g_tabs, 1, false, 1),
        Product::Commutator => {
            // Zeroth-order Leibniz terms cancel between the two products.
            push_contributions(&mut by_target, &fc, &gc, &g_tabs, 1, true, 0);
            push_contributions(&mut by_target, &gc, &fc, &f_tabs, -1, true, 0);
        }
        Product::Anticommutator => {
            push_contributions(&mut by_target, &fc, &gc, &g_tabs, 1, false, 2);
            push_contributions(&mut by_target, &gc, &fc, &f_tabs, 1, true, 0);
        }
    }

    let targets: Vec<(DerivIndex, Vec<Contribution<'_>>)> = by_target.into_iter().collect();
    let results: Vec<(DerivIndex, SpatialCoeff)> =
        targets.par_iter().map(|(t, cs)| (*t, finish_target(cs, &pden))).collect();
    OperatorExpr { terms: results.into_iter().filter(|(_, c)| !c.is_zero()).collect() }
}

impl fmt::Display for OperatorExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (n, (k, c)) in self.terms.iter().enumerate() {
            if n > 0 {
                f.write_str(" + ")?;
            }
            if *k == [0, 0, 0] {
                write!(f, "[{c}]")?;
            } else {
                write!(f, "[{c}]*{}", deriv_name(*k))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for OperatorExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hbar() -> ParamRat {
        ParamRat::var(Symbol::Hbar)
    }

    fn i_hbar() -> ParamRat {
        &ParamRat::i() * &hbar()
    }

    #[test]
    fn leibniz_examples() {
        let dx = OperatorExpr::partial(Symbol::X);
        let x = OperatorExpr::coord(Symbol::X);
        let got = dx.compose(&x);
        let want = x.compose(&dx).add(&OperatorExpr::identity());
        assert_eq!(got, want);

        let r = OperatorExpr::r();
        let got = dx.compose(&r);
        let xr_over_s = SpatialCoeff::new(Poly::zero(), Poly::var(Symbol::X), Monomial::ONE, 1, Poly::one());
        let want = r.compose(&dx).add(&OperatorExpr::multiplication(xr_over_s));
        assert_eq!(got, want);

        let px = OperatorExpr::momentum(Symbol::X, &hbar());
        let py = OperatorExpr::momentum(Symbol::Y, &hbar());
        let want = OperatorExpr::term(
            [1, 1, 0],
            SpatialCoeff::scalar(&(&hbar() * &hbar()).scale(&GaussRational::from_int(-1))),
        );
        assert_eq!(px.compose(&py), want);
    }

    #[test]
    fn canonical_pairs() {
        let px = OperatorExpr::momentum(Symbol::X, &hbar());
        let x = OperatorExpr::coord(Symbol::X);
        let c = px.commutator(&x);
        assert_eq!(c, OperatorExpr::scalar(&(-&i_hbar())));
        let anti = x.anticommutator(&px);
        let want = x.compose(&px).scale(&ParamRat::from_int(2)).sub(&OperatorExpr::scalar(&i_hbar()));
        assert_eq!(anti, want);
        let want = OperatorExpr::term([1, 0, 0], SpatialCoeff::coord(Symbol::X))
            .scale(&(-&(&i_hbar() * &ParamRat::from_int(2))))
            .sub(&OperatorExpr::scalar(&i_hbar()));
        assert_eq!(anti, want);
    }

    #[test]
    fn apply_examples() {
        let dx = OperatorExpr::partial(Symbol::X);
        assert_eq!(
            dx.apply(&SpatialCoeff::test_monomial(2, 0, 0, 0)),
            SpatialCoeff::test_monomial(1, 0, 0, 0).scale(&GaussRational::from_int(2))
        );
        let got = dx.apply(&SpatialCoeff::r());
        let want = SpatialCoeff::new(Poly::zero(), Poly::var(Symbol::X), Monomial::ONE, 1, Poly::one());
        assert_eq!(got, want);
    }

    #[test]
    fn commutator_matches_two_compositions() {
        let x = SpatialCoeff::coord(Symbol::X);
        let y2 = SpatialCoeff::test_monomial(0, 2, 0, 0);
        let f = OperatorExpr::term([2, 0, 0], x.clone()).add(&OperatorExpr::term([0, 1, 0], SpatialCoeff::r()));
        let g = OperatorExpr::term([1, 0, 1], y2.mul(&SpatialCoeff::inverse_monomial(1, 0, 0, 0)))
            .add(&OperatorExpr::multiplication(SpatialCoeff::scalar(&hbar())));
        let fg = f.compose(&g);
        let gf = g.compose(&f);
        assert_eq!(f.commutator(&g), fg.sub(&gf));
        assert_eq!(f.anticommutator(&g), fg.add(&gf));
    }
}
