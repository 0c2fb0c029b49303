//! Sparse multivariate polynomials over ℚ(i).

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rustc_hash::FxHashMap;

use super::gauss::GaussRational;
use super::monomial::Monomial;
use super::rational::Rational;
use super::symbol::Symbol;

/// Polynomial stored as `(monomial, coefficient)` pairs sorted ascending by
/// the packed monomial order, with no zero coefficients.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    terms: Vec<(Monomial, GaussRational)>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly { terms: Vec::new() }
    }

    pub fn one() -> Poly {
        Poly::constant(GaussRational::ONE)
    }

    pub fn constant(c: GaussRational) -> Poly {
        if c.is_zero() {
            Poly::zero()
        } else {
            Poly { terms: vec![(Monomial::ONE, c)] }
        }
    }

    pub fn from_rational(r: Rational) -> Poly {
        Poly::constant(GaussRational::real(r))
    }

    pub fn from_int(n: i64) -> Poly {
        Poly::constant(GaussRational::from_int(n))
    }

    pub fn var(s: Symbol) -> Poly {
        Poly::term(Monomial::var(s), GaussRational::ONE)
    }

    pub fn term(m: Monomial, c: GaussRational) -> Poly {
        if c.is_zero() {
            Poly::zero()
        } else {
            Poly { terms: vec![(m, c)] }
        }
    }

    /// Builds a polynomial from arbitrary terms, merging duplicates.
    pub fn from_terms(mut terms: Vec<(Monomial, GaussRational)>) -> Poly {
        terms.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        let mut out: Vec<(Monomial, GaussRational)> = Vec::with_capacity(terms.len());
        for (m, c) in terms {
            match out.last_mut() {
                Some((lm, lc)) if *lm == m => *lc = &*lc + &c,
                _ => {
                    if let Some((_, lc)) = out.last() {
                        if lc.is_zero() {
                            out.pop();
                        }
                    }
                    out.push((m, c));
                }
            }
        }
        if let Some((_, lc)) = out.last() {
            if lc.is_zero() {
                out.pop();
            }
        }
        Poly { terms: out }
    }

    pub fn terms(&self) -> &[(Monomial, GaussRational)] {
        &self.terms
    }

    pub fn into_terms(self) -> Vec<(Monomial, GaussRational)> {
        self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0.is_one() && self.terms[0].1.is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms[0].0.is_one())
    }

    /// The value if the polynomial is constant.
    pub fn as_constant(&self) -> Option<GaussRational> {
        match self.terms.as_slice() {
            [] => Some(GaussRational::ZERO),
            [(m, c)] if m.is_one() => Some(c.clone()),
            _ => None,
        }
    }

    pub fn coeff(&self, m: Monomial) -> GaussRational {
        match self.terms.binary_search_by(|t| t.0.cmp(&m)) {
            Ok(i) => self.terms[i].1.clone(),
            Err(_) => GaussRational::ZERO,
        }
    }

    /// Leading term in the packed (lex) order.
    pub fn lead_lex(&self) -> Option<&(Monomial, GaussRational)> {
        self.terms.last()
    }

    /// Leading term in graded lex order.
    pub fn lead_grlex(&self) -> Option<&(Monomial, GaussRational)> {
        self.terms.iter().max_by(|a, b| a.0.grlex_cmp(b.0))
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.iter().map(|t| t.0.degree()).max().unwrap_or(0)
    }

    pub fn degree_in(&self, s: Symbol) -> u32 {
        self.terms.iter().map(|t| t.0.exp(s)).max().unwrap_or(0)
    }

    pub fn min_degree_in(&self, s: Symbol) -> u32 {
        self.terms.iter().map(|t| t.0.exp(s)).min().unwrap_or(0)
    }

    pub fn contains(&self, s: Symbol) -> bool {
        self.terms.iter().any(|t| t.0.exp(s) > 0)
    }

    /// Symbols that occur, in index order.
    pub fn symbols(&self) -> Vec<Symbol> {
        let mut mask = 0u128;
        for (m, _) in &self.terms {
            mask |= m.0;
        }
        Symbol::ALL.into_iter().filter(|s| Monomial(mask).exp(*s) > 0).collect()
    }

    /// Gcd of all monomials.
    pub fn monomial_content(&self) -> Monomial {
        let mut it = self.terms.iter();
        let Some(first) = it.next() else {
            return Monomial::ONE;
        };
        it.fold(first.0, |g, t| g.gcd(t.0))
    }

    pub fn scale(&self, k: &GaussRational) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        if k.is_one() {
            return self.clone();
        }
        Poly { terms: self.terms.iter().map(|(m, c)| (*m, c * k)).collect() }
    }

    pub fn scale_rational(&self, k: &Rational) -> Poly {
        self.scale(&GaussRational::real(k.clone()))
    }

    /// Multiplies by a monomial; order is preserved because the packed
    /// comparison is a monomial order.
    pub fn mul_monomial(&self, m: Monomial) -> Poly {
        Poly { terms: self.terms.iter().map(|(t, c)| (t.mul(m), c.clone())).collect() }
    }

    pub fn mul_term(&self, m: Monomial, k: &GaussRational) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(t, c)| (t.mul(m), c * k)).collect() }
    }

    /// Divides every monomial by `m`; panics if some term is not divisible.
    pub fn div_monomial(&self, m: Monomial) -> Poly {
        Poly { terms: self.terms.iter().map(|(t, c)| (t.div(m).expect("monomial not divisible"), c.clone())).collect() }
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut acc = Poly::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn derivative(&self, s: Symbol) -> Poly {
        let v = Monomial::var(s);
        let terms: Vec<_> = self
            .terms
            .iter()
            .filter_map(|(m, c)| {
                let e = m.exp(s);
                (e > 0).then(|| (m.div(v).unwrap(), c.scale(&Rational::from_int(e as i64))))
            })
            .collect();
        // Dividing by a variable can reorder terms in the packed order.
        Poly::from_terms(terms)
    }

    /// Coefficients with respect to `s`: entry `k` multiplies `s^k`.
    pub fn coeffs_in(&self, s: Symbol) -> Vec<Poly> {
        let deg = self.degree_in(s) as usize;
        let mut buckets: Vec<Vec<(Monomial, GaussRational)>> = vec![Vec::new(); deg + 1];
        for (m, c) in &self.terms {
            buckets[m.exp(s) as usize].push((m.without(s), c.clone()));
        }
        buckets.into_iter().map(Poly::from_terms).collect()
    }

    pub fn from_coeffs_in(s: Symbol, coeffs: &[Poly]) -> Poly {
        let mut terms = Vec::new();
        for (k, c) in coeffs.iter().enumerate() {
            let mk = Monomial::var_pow(s, k as u32);
            terms.extend(c.terms.iter().map(|(m, v)| (m.mul(mk), v.clone())));
        }
        Poly::from_terms(terms)
    }

    /// Splits by the part of each monomial selected by `key`, returning the
    /// groups in ascending key order with the key divided out.
    pub fn group_by(&self, key: impl Fn(Monomial) -> Monomial) -> Vec<(Monomial, Poly)> {
        let mut map: FxHashMap<Monomial, Vec<(Monomial, GaussRational)>> = FxHashMap::default();
        for (m, c) in &self.terms {
            let k = key(*m);
            map.entry(k).or_default().push((Monomial(m.0 - k.0), c.clone()));
        }
        let mut out: Vec<(Monomial, Poly)> = map.into_iter().map(|(k, v)| (k, Poly::from_terms(v))).collect();
        out.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        out
    }

    /// Exact quotient `self / d`, or `None` if `d` does not divide `self`.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        assert!(!d.is_zero(), "division by zero polynomial");
        if self.is_zero() {
            return Some(Poly::zero());
        }
        if let Some(c) = d.as_constant() {
            return Some(self.scale(&c.recip()));
        }
        if d.len() == 1 {
            let (dm, dc) = &d.terms[0];
            let inv = dc.recip();
            let mut terms = Vec::with_capacity(self.len());
            for (m, c) in &self.terms {
                terms.push((m.div(*dm)?, c * &inv));
            }
            return Some(Poly { terms });
        }
        let (dlm, dlc) = d.terms.last().unwrap().clone();
        let inv = dlc.recip();
        let mut rem = PolyAcc::from_poly(self);
        let mut quot = Vec::new();
        while let Some((m, c)) = rem.take_max() {
            let qm = m.div(dlm)?;
            let qc = &c * &inv;
            for (tm, tc) in &d.terms[..d.len() - 1] {
                rem.add_term(tm.mul(qm), -(tc * &qc));
            }
            quot.push((qm, qc));
        }
        Some(Poly::from_terms(quot))
    }

    /// Pseudo-remainder of `self` by `d` with respect to `s`.
    pub fn prem(&self, d: &Poly, s: Symbol) -> Poly {
        let dd = d.degree_in(s);
        let dc = d.coeffs_in(s);
        let lc = dc[dd as usize].clone();
        let mut r = self.clone();
        loop {
            if r.is_zero() {
                return r;
            }
            let dr = r.degree_in(s);
            if dr < dd {
                return r;
            }
            let rc = r.coeffs_in(s);
            let lr = &rc[dr as usize];
            let shift = Monomial::var_pow(s, dr - dd);
            let t = (d * lr).mul_monomial(shift);
            r = &(&r * &lc) - &t;
        }
    }

    /// Substitutes polynomials for symbols.
    pub fn substitute(&self, bind: &[(Symbol, Poly)]) -> Poly {
        if bind.is_empty() || self.is_zero() {
            return self.clone();
        }
        let mut cache: FxHashMap<(usize, u32), Poly> = FxHashMap::default();
        let mut acc = PolyAcc::new();
        for (m, c) in &self.terms {
            let mut rest = *m;
            let mut val = Poly::constant(c.clone());
            for (i, (s, p)) in bind.iter().enumerate() {
                let e = m.exp(*s);
                if e == 0 {
                    continue;
                }
                rest = rest.without(*s);
                let pw = cache.entry((i, e)).or_insert_with(|| p.pow(e));
                val = &val * pw;
                if val.is_zero() {
                    break;
                }
            }
            for (vm, vc) in val.terms {
                acc.add_term(vm.mul(rest), vc);
            }
        }
        acc.into_poly()
    }

    /// Substitutes exact values; symbols not bound are kept.
    pub fn substitute_values(&self, bind: &[(Symbol, GaussRational)]) -> Poly {
        let b: Vec<(Symbol, Poly)> = bind.iter().map(|(s, v)| (*s, Poly::constant(v.clone()))).collect();
        self.substitute(&b)
    }

    /// Evaluates at a point; returns `None` if some occurring symbol is unbound.
    pub fn evaluate(&self, point: &[(Symbol, GaussRational)]) -> Option<GaussRational> {
        self.substitute_values(point).as_constant()
    }

    pub fn map_coeffs(&self, f: impl Fn(&GaussRational) -> GaussRational) -> Poly {
        Poly::from_terms(self.terms.iter().map(|(m, c)| (*m, f(c))).collect())
    }

    /// Complex conjugate of every coefficient.
    pub fn conj(&self) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, c)| (*m, c.conj())).collect() }
    }

    /// Makes the grlex-leading coefficient 1; returns the factor divided out.
    pub fn make_monic(&self) -> (Poly, GaussRational) {
        match self.lead_grlex() {
            None => (Poly::zero(), GaussRational::ONE),
            Some((_, c)) => {
                let c = c.clone();
                (self.scale(&c.recip()), c)
            }
        }
    }

    /// Terms in descending grlex order, as used for printing.
    pub fn terms_grlex_desc(&self) -> Vec<&(Monomial, GaussRational)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|a, b| b.0.grlex_cmp(a.0));
        v
    }

    /// Sum of `a_i * b_i`, accumulated without intermediate allocation churn.
    pub fn sum_of_products<'a>(pairs: impl IntoIterator<Item = (&'a Poly, &'a Poly)>) -> Poly {
        let mut acc = PolyAcc::new();
        for (a, b) in pairs {
            acc.add_product(a, b);
        }
        acc.into_poly()
    }
}

/// Hash-map accumulator for building large polynomials.
#[derive(Default, Clone)]
pub struct PolyAcc {
    map: FxHashMap<Monomial, GaussRational>,
}

impl PolyAcc {
    pub fn new() -> PolyAcc {
        PolyAcc { map: FxHashMap::default() }
    }

    pub fn from_poly(p: &Poly) -> PolyAcc {
        let mut a = PolyAcc::new();
        a.add_poly(p);
        a
    }

    pub fn add_term(&mut self, m: Monomial, c: GaussRational) {
        if c.is_zero() {
            return;
        }
        match self.map.entry(m) {
            std::collections::hash_map::Entry::Occupied(mut o) => {
                let v = o.get() + &c;
                if v.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = v;
                }
            }
            std::collections::hash_map::Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    pub fn add_poly(&mut self, p: &Poly) {
        for (m, c) in &p.terms {
            self.add_term(*m, c.clone());
        }
    }

    pub fn sub_poly(&mut self, p: &Poly) {
        for (m, c) in &p.terms {
            self.add_term(*m, -c);
        }
    }

    pub fn add_scaled(&mut self, p: &Poly, k: &GaussRational) {
        for (m, c) in &p.terms {
            self.add_term(*m, c * k);
        }
    }

    pub fn add_product(&mut self, a: &Poly, b: &Poly) {
        for (ma, ca) in &a.terms {
            for (mb, cb) in &b.terms {
                self.add_term(ma.mul(*mb), ca * cb);
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    fn take_max(&mut self) -> Option<(Monomial, GaussRational)> {
        let m = *self.map.keys().max()?;
        let c = self.map.remove(&m).unwrap();
        Some((m, c))
    }

    pub fn into_poly(self) -> Poly {
        let mut terms: Vec<_> = self.map.into_iter().collect();
        terms.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        Poly { terms }
    }
}

fn merge(a: &Poly, b: &Poly, negate_b: bool) -> Poly {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    let (ta, tb) = (&a.terms, &b.terms);
    while i < ta.len() && j < tb.len() {
        match ta[i].0.cmp(&tb[j].0) {
            Ordering::Less => {
                out.push(ta[i].clone());
                i += 1;
            }
            Ordering::Greater => {
                let c = if negate_b { -&tb[j].1 } else { tb[j].1.clone() };
                out.push((tb[j].0, c));
                j += 1;
            }
            Ordering::Equal => {
                let c = if negate_b { &ta[i].1 - &tb[j].1 } else { &ta[i].1 + &tb[j].1 };
                if !c.is_zero() {
                    out.push((ta[i].0, c));
                }
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&ta[i..]);
    for t in &tb[j..] {
        let c = if negate_b { -&t.1 } else { t.1.clone() };
        out.push((t.0, c));
    }
    Poly { terms: out }
}

impl<'a> Add<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        merge(self, rhs, false)
    }
}

impl<'a> Sub<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        merge(self, rhs, true)
    }
}

impl<'a> Mul<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        if self.len() == 1 {
            return rhs.mul_term(self.terms[0].0, &self.terms[0].1);
        }
        if rhs.len() == 1 {
            return self.mul_term(rhs.terms[0].0, &rhs.terms[0].1);
        }
        let mut acc = PolyAcc::new();
        acc.add_product(self, rhs);
        acc.into_poly()
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect() }
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Poly> for Poly {
            type Output = Poly;
            fn $m(self, rhs: Poly) -> Poly {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl From<Symbol> for Poly {
    fn from(s: Symbol) -> Poly {
        Poly::var(s)
    }
}

impl From<i64> for Poly {
    fn from(n: i64) -> Poly {
        Poly::from_int(n)
    }
}

impl From<Rational> for Poly {
    fn from(r: Rational) -> Poly {
        Poly::from_rational(r)
    }
}

impl From<GaussRational> for Poly {
    fn from(c: GaussRational) -> Poly {
        Poly::constant(c)
    }
}

impl fmt::Display for Poly {
    /// Prints in relation-file syntax, terms in descending grlex order.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (k, (m, c)) in self.terms_grlex_desc().into_iter().enumerate() {
            let first = k == 0;
            let neg = c.sign() < 0;
            if !first {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            let mag = if neg && !first { -c } else { c.clone() };
            if m.is_one() {
                write!(f, "{mag}")?;
                continue;
            }
            if mag.is_one() {
            } else if (-&mag).is_one() {
                f.write_str("-")?;
            } else {
                write!(f, "{mag}*")?;
            }
            write!(f, "{m}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: Symbol) -> Poly {
        Poly::var(s)
    }

    #[test]
    fn arithmetic_and_cancellation() {
        let h = v(Symbol::Hbar);
        let zero = &(&h * &h) - &(&h * &h);
        assert!(zero.is_zero());
        let a = &v(Symbol::Mu1) + &v(Symbol::Mu2);
        let b = &v(Symbol::Mu1) - &v(Symbol::Mu2);
        let p = &a * &b;
        assert_eq!(p.div_exact(&a).unwrap(), b);
        assert!(p.div_exact(&(&a + &Poly::one())).is_none());
    }

    #[test]
    fn derivative_and_coefficients() {
        let x = v(Symbol::X);
        let p = &(&x.pow(3) * &v(Symbol::Hbar)) + &x;
        assert_eq!(p.derivative(Symbol::X), &(&x.pow(2) * &v(Symbol::Hbar)).scale(&3.into()) + &Poly::one());
        let cs = p.coeffs_in(Symbol::X);
        assert_eq!(cs.len(), 4);
        assert_eq!(Poly::from_coeffs_in(Symbol::X, &cs), p);
    }

    #[test]
    fn substitution_and_evaluation() {
        let e = &(&v(Symbol::Mu1).pow(2) + &v(Symbol::Mu2).pow(2)).scale(&2.into()) - &Poly::from_int(3);
        let p = &e * &v(Symbol::Hbar).pow(4).scale(&2.into());
        let half = GaussRational::ratio(1, 2);
        let val = p
            .evaluate(&[(Symbol::Hbar, GaussRational::ONE), (Symbol::Mu1, half.clone()), (Symbol::Mu2, half)])
            .unwrap();
        assert_eq!(val, GaussRational::from_int(-4));
        let three_halves = GaussRational::ratio(3, 2);
        let val = p
            .evaluate(&[
                (Symbol::Hbar, GaussRational::ONE),
                (Symbol::Mu1, three_halves.clone()),
                (Symbol::Mu2, three_halves),
            ])
            .unwrap();
        assert_eq!(val, GaussRational::from_int(12));
        assert!(p.evaluate(&[(Symbol::Hbar, GaussRational::ONE)]).is_none());
    }

    #[test]
    fn prints_relation_syntax() {
        let p =
            &(&v(Symbol::Hbar).pow(2) * &v(Symbol::E)).scale(&(-16).into()) + &Poly::from_rational(Rational::new(1, 2));
        assert_eq!(p.to_string(), "-16*hbar^2*E + 1/2");
        let q = &v(Symbol::Hbar).scale(&GaussRational::I.scale(&(-1).into())) - &v(Symbol::Mu);
        assert_eq!(q.to_string(), "-mu - i*hbar");
    }
}
