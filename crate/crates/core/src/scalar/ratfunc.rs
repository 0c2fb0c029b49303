//! Reduced rational functions in the parameter and central symbols.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use super::gauss::GaussRational;
use super::gcd::gcd;
use super::poly::Poly;
use super::rational::Rational;
use super::symbol::Symbol;
use super::ScalarError;

/// `num / den` with `gcd(num, den) = 1` and `den` monic in grlex order.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ParamRat {
    num: Poly,
    den: Poly,
}

impl Default for ParamRat {
    fn default() -> Self {
        ParamRat::zero()
    }
}

impl ParamRat {
    pub fn zero() -> ParamRat {
        ParamRat { num: Poly::zero(), den: Poly::one() }
    }

    pub fn one() -> ParamRat {
        ParamRat::from_poly(Poly::one())
    }

    pub fn from_poly(p: Poly) -> ParamRat {
        ParamRat { num: p, den: Poly::one() }
    }

    pub fn constant(c: GaussRational) -> ParamRat {
        ParamRat::from_poly(Poly::constant(c))
    }

    pub fn from_int(n: i64) -> ParamRat {
        ParamRat::from_poly(Poly::from_int(n))
    }

    pub fn ratio(n: i64, d: i64) -> ParamRat {
        ParamRat::from_poly(Poly::from_rational(Rational::new(n, d)))
    }

    pub fn var(s: Symbol) -> ParamRat {
        ParamRat::from_poly(Poly::var(s))
    }

    pub fn i() -> ParamRat {
        ParamRat::constant(GaussRational::I)
    }

    /// Normalizing constructor.
    pub fn new(num: Poly, den: Poly) -> Result<ParamRat, ScalarError> {
        if den.is_zero() {
            return Err(ScalarError::ZeroDenominator);
        }
        Ok(Self::normalized(num, den))
    }

    fn normalized(num: Poly, den: Poly) -> ParamRat {
        if num.is_zero() {
            return ParamRat::zero();
        }
        if let Some(c) = den.as_constant() {
            return ParamRat { num: num.scale(&c.recip()), den: Poly::one() };
        }
        let g = gcd(&num, &den);
        let (num, den) = if g.is_one() {
            (num, den)
        } else {
            (num.div_exact(&g).expect("gcd divides"), den.div_exact(&g).expect("gcd divides"))
        };
        let (den, lc) = den.make_monic();
        ParamRat { num: num.scale(&lc.recip()), den }
    }

    /// Re-normalizes an arbitrary pair; equal rational functions map to equal
    /// values.
    pub fn normalize(&self) -> ParamRat {
        Self::normalized(self.num.clone(), self.den.clone())
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn into_parts(self) -> (Poly, Poly) {
        (self.num, self.den)
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn as_constant(&self) -> Option<GaussRational> {
        if self.den.is_one() {
            self.num.as_constant()
        } else {
            None
        }
    }

    pub fn as_rational(&self) -> Option<Rational> {
        self.as_constant().filter(|c| c.is_real()).map(|c| c.re)
    }

    pub fn contains(&self, s: Symbol) -> bool {
        self.num.contains(s) || self.den.contains(s)
    }

    pub fn symbols(&self) -> Vec<Symbol> {
        let mut v = self.num.symbols();
        for s in self.den.symbols() {
            if !v.contains(&s) {
                v.push(s);
            }
        }
        v.sort();
        v
    }

    pub fn scale(&self, k: &GaussRational) -> ParamRat {
        if k.is_zero() {
            return ParamRat::zero();
        }
        ParamRat { num: self.num.scale(k), den: self.den.clone() }
    }

    pub fn recip(&self) -> Result<ParamRat, ScalarError> {
        ParamRat::new(self.den.clone(), self.num.clone())
    }

    pub fn checked_div(&self, rhs: &ParamRat) -> Result<ParamRat, ScalarError> {
        if rhs.is_zero() {
            return Err(ScalarError::ZeroDenominator);
        }
        Ok(self * &rhs.recip()?)
    }

    pub fn pow(&self, e: u32) -> ParamRat {
        ParamRat { num: self.num.pow(e), den: self.den.pow(e) }
    }

    /// Replaces symbols by rational functions.
    pub fn substitute(&self, bind: &[(Symbol, ParamRat)]) -> Result<ParamRat, ScalarError> {
        let bind: Vec<(Symbol, ParamRat)> = bind.iter().filter(|(s, _)| self.contains(*s)).cloned().collect();
        if bind.is_empty() {
            return Ok(self.clone());
        }
        let num = subst_poly(&self.num, &bind);
        let den = subst_poly(&self.den, &bind);
        if den.is_zero() {
            return Err(ScalarError::Pole(format!("{self}")));
        }
        num.checked_div(&den)
    }

    pub fn substitute_values(&self, bind: &[(Symbol, GaussRational)]) -> Result<ParamRat, ScalarError> {
        let b: Vec<(Symbol, ParamRat)> = bind.iter().map(|(s, v)| (*s, ParamRat::constant(v.clone()))).collect();
        self.substitute(&b)
    }

    /// Exact value at a point covering every occurring symbol.
    pub fn evaluate(&self, point: &[(Symbol, GaussRational)]) -> Result<GaussRational, ScalarError> {
        for s in self.symbols() {
            if !point.iter().any(|(t, _)| *t == s) {
                return Err(ScalarError::Unbound(s.name().to_string()));
            }
        }
        let d = self.den.evaluate(point).expect("all symbols bound");
        if d.is_zero() {
            return Err(ScalarError::Pole(format!("{self}")));
        }
        let n = self.num.evaluate(point).expect("all symbols bound");
        Ok(&n / &d)
    }
}

fn subst_poly(p: &Poly, bind: &[(Symbol, ParamRat)]) -> ParamRat {
    if bind.iter().all(|(_, v)| v.is_polynomial()) {
        let b: Vec<(Symbol, Poly)> = bind.iter().map(|(s, v)| (*s, v.num.clone())).collect();
        return ParamRat::from_poly(p.substitute(&b));
    }
    // Clear each denominator by homogenizing in the substituted symbol.
    let mut num = p.clone();
    let mut den = Poly::one();
    for (s, v) in bind {
        let deg = num.degree_in(*s);
        if deg == 0 {
            continue;
        }
        let cs = num.coeffs_in(*s);
        let mut acc = Poly::zero();
        for (k, c) in cs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let t = &(c * &v.num.pow(k as u32)) * &v.den.pow(deg - k as u32);
            acc = &acc + &t;
        }
        num = acc;
        den = &den * &v.den.pow(deg);
    }
    ParamRat::normalized(num, den)
}

impl<'a> Add<&'a ParamRat> for &'a ParamRat {
    type Output = ParamRat;
    fn add(self, rhs: &ParamRat) -> ParamRat {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        if self.den == rhs.den {
            if self.den.is_one() {
                return ParamRat::from_poly(&self.num + &rhs.num);
            }
            return ParamRat::normalized(&self.num + &rhs.num, self.den.clone());
        }
        let g = gcd(&self.den, &rhs.den);
        let da = self.den.div_exact(&g).unwrap();
        let db = rhs.den.div_exact(&g).unwrap();
        let num = &(&self.num * &db) + &(&rhs.num * &da);
        ParamRat::normalized(num, &self.den * &db)
    }
}

impl<'a> Sub<&'a ParamRat> for &'a ParamRat {
    type Output = ParamRat;
    fn sub(self, rhs: &ParamRat) -> ParamRat {
        self + &(-rhs)
    }
}

impl<'a> Mul<&'a ParamRat> for &'a ParamRat {
    type Output = ParamRat;
    fn mul(self, rhs: &ParamRat) -> ParamRat {
        if self.is_zero() || rhs.is_zero() {
            return ParamRat::zero();
        }
        if self.den.is_one() && rhs.den.is_one() {
            return ParamRat::from_poly(&self.num * &rhs.num);
        }
        // Cross-cancel so the product needs no large gcd.
        let g1 = gcd(&self.num, &rhs.den);
        let g2 = gcd(&rhs.num, &self.den);
        let n1 = self.num.div_exact(&g1).unwrap();
        let d2 = rhs.den.div_exact(&g1).unwrap();
        let n2 = rhs.num.div_exact(&g2).unwrap();
        let d1 = self.den.div_exact(&g2).unwrap();
        let (den, lc) = (&d1 * &d2).make_monic();
        ParamRat { num: (&n1 * &n2).scale(&lc.recip()), den }
    }
}

impl<'a> Div<&'a ParamRat> for &'a ParamRat {
    type Output = ParamRat;
    /// Panics on division by zero; see [`ParamRat::checked_div`].
    fn div(self, rhs: &ParamRat) -> ParamRat {
        self.checked_div(rhs).expect("division by zero rational function")
    }
}

impl Neg for &ParamRat {
    type Output = ParamRat;
    fn neg(self) -> ParamRat {
        ParamRat { num: -&self.num, den: self.den.clone() }
    }
}

impl Neg for ParamRat {
    type Output = ParamRat;
    fn neg(self) -> ParamRat {
        -&self
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<ParamRat> for ParamRat {
            type Output = ParamRat;
            fn $m(self, rhs: ParamRat) -> ParamRat {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl From<Poly> for ParamRat {
    fn from(p: Poly) -> ParamRat {
        ParamRat::from_poly(p)
    }
}

impl From<i64> for ParamRat {
    fn from(n: i64) -> ParamRat {
        ParamRat::from_int(n)
    }
}

impl From<Rational> for ParamRat {
    fn from(r: Rational) -> ParamRat {
        ParamRat::from_poly(Poly::from_rational(r))
    }
}

impl From<GaussRational> for ParamRat {
    fn from(c: GaussRational) -> ParamRat {
        ParamRat::constant(c)
    }
}

impl From<Symbol> for ParamRat {
    fn from(s: Symbol) -> ParamRat {
        ParamRat::var(s)
    }
}

impl fmt::Display for ParamRat {
    /// Relation-file syntax; parses back to the same value.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            return write!(f, "{}", self.num);
        }
        if self.num.len() > 1 {
            write!(f, "({})", self.num)?;
        } else {
            write!(f, "{}", self.num)?;
        }
        let bare = self.den.len() == 1 && {
            let (m, c) = &self.den.terms()[0];
            c.is_one() && m.symbols().count() == 1
        };
        if bare {
            write!(f, "/{}", self.den)
        } else {
            write!(f, "/({})", self.den)
        }
    }
}

impl fmt::Debug for ParamRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: Symbol) -> ParamRat {
        ParamRat::var(s)
    }

    #[test]
    fn normalize_examples() {
        let h = v(Symbol::Hbar);
        assert!((&h.pow(2) - &h.pow(2)).normalize().is_zero());
        let c = &(&v(Symbol::Mu1).pow(2) * &ParamRat::from_int(4)) - &ParamRat::one();
        assert!((&c / &c).is_one());
        let num = &v(Symbol::Mu1).pow(4) - &v(Symbol::Mu2).pow(4);
        let den = &v(Symbol::Mu1).pow(2) - &v(Symbol::Mu2).pow(2);
        assert_eq!(&num / &den, &v(Symbol::Mu1).pow(2) + &v(Symbol::Mu2).pow(2));
        assert_eq!(ParamRat::new(Poly::one(), Poly::zero()), Err(ScalarError::ZeroDenominator));
    }

    #[test]
    fn substitute_examples() {
        let h = v(Symbol::Hbar);
        let alpha = &(&h.pow(2) * &v(Symbol::E)) * &ParamRat::from_int(-16);
        let got = alpha.substitute(&[(Symbol::Hbar, ParamRat::one())]).unwrap();
        assert_eq!(got, &v(Symbol::E) * &ParamRat::from_int(-16));

        let cent = &(&(&v(Symbol::Mu1).pow(2) * &ParamRat::from_int(4)) - &ParamRat::one()) / &ParamRat::from_int(8);
        assert!(cent.substitute(&[(Symbol::Mu1, ParamRat::ratio(1, 2))]).unwrap().is_zero());

        let eps = &h.pow(4)
            * &(&(&(&v(Symbol::Mu1).pow(2) * &ParamRat::from_int(2))
                + &(&v(Symbol::Mu2).pow(2) * &ParamRat::from_int(2)))
                - &ParamRat::from_int(3));
        let eps = &eps * &ParamRat::from_int(2);
        let half = ParamRat::ratio(1, 2);
        let got = eps
            .substitute(&[(Symbol::Hbar, ParamRat::one()), (Symbol::Mu1, half.clone()), (Symbol::Mu2, half)])
            .unwrap();
        assert_eq!(got, ParamRat::from_int(-4));
    }

    #[test]
    fn evaluate_examples() {
        let pole = ParamRat::one().checked_div(&(&v(Symbol::Mu1) - &v(Symbol::Mu2))).unwrap();
        let p = [(Symbol::Mu1, GaussRational::ONE), (Symbol::Mu2, GaussRational::ONE)];
        assert!(matches!(pole.evaluate(&p), Err(ScalarError::Pole(_))));
        assert!(ParamRat::zero().evaluate(&[]).unwrap().is_zero());
        let subst = pole.substitute(&[(Symbol::Mu2, v(Symbol::Mu1))]);
        assert!(matches!(subst, Err(ScalarError::Pole(_))));
    }

    #[test]
    fn rational_substitution_clears_denominators() {
        let x = &v(Symbol::Mu).pow(2) + &v(Symbol::Hbar);
        let b = ParamRat::one().checked_div(&v(Symbol::Mu1)).unwrap();
        let got = x.substitute(&[(Symbol::Mu, b.clone())]).unwrap();
        assert_eq!(got, &(&b * &b) + &v(Symbol::Hbar));
    }

    #[test]
    fn display_forms() {
        let r = (&v(Symbol::Hbar) + &ParamRat::one()).checked_div(&v(Symbol::Mu)).unwrap();
        assert_eq!(r.to_string(), "(hbar + 1)/mu");
        let r = ParamRat::one().checked_div(&(&v(Symbol::Mu) * &ParamRat::from_int(2))).unwrap();
        assert_eq!(r.to_string(), "1/2/mu");
    }
}
