//! Coefficients of differential operators: `(a + b·r) / (x^i y^j z^k s^d P)`
//! with `s = x² + y² + z² = r²` and `P` a polynomial in the parameters only.

use std::fmt;
use std::sync::OnceLock;

use crate::scalar::gcd::{gcd_many, lcm};
use crate::scalar::{GaussRational, Monomial, ParamRat, Poly, PolyAcc, ScalarError, Symbol};

/// `x² + y² + z²`.
pub fn s_poly() -> &'static Poly {
    static S: OnceLock<Poly> = OnceLock::new();
    S.get_or_init(|| {
        Poly::from_terms(Symbol::COORDS.iter().map(|&c| (Monomial::var_pow(c, 2), GaussRational::ONE)).collect())
    })
}

/// Exact element of the coordinate ring extended by `r` with `r² = s`.
///
/// Canonical form: no coordinate factor or power of `s` in the denominator
/// divides both `a` and `b`, `pden` is monic and coprime to the parameter
/// content of `a` and `b`, and zero is stored as `a = b = 0` with a trivial
/// denominator. Two coefficients are equal iff their canonical forms are.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SpatialCoeff {
    pub(crate) a: Poly,
    pub(crate) b: Poly,
    pub(crate) den: Monomial,
    pub(crate) s_pow: u32,
    pub(crate) pden: Poly,
}

impl Default for SpatialCoeff {
    fn default() -> Self {
        SpatialCoeff::zero()
    }
}

/// Exact quotient by `s`, or `None`.
pub(crate) fn div_s(p: &Poly) -> Option<Poly> {
    if p.is_zero() {
        return Some(Poly::zero());
    }
    // p = Σ p_k z^k and p = (z² + w) q with w = x² + y².
    let pk = p.coeffs_in(Symbol::Z);
    let n = pk.len();
    if n < 3 {
        return None;
    }
    let w = Poly::from_terms(vec![
        (Monomial::var_pow(Symbol::X, 2), GaussRational::ONE),
        (Monomial::var_pow(Symbol::Y, 2), GaussRational::ONE),
    ]);
    let mut q = vec![Poly::zero(); n - 2];
    for k in (2..n).rev() {
        let mut v = pk[k].clone();
        if k < n - 2 {
            v = &v - &(&w * &q[k]);
        }
        q[k - 2] = v;
    }
    for k in 0..2 {
        let mut v = pk[k].clone();
        if k < n - 2 {
            v = &v - &(&w * &q[k]);
        }
        if !v.is_zero() {
            return None;
        }
    }
    Some(Poly::from_coeffs_in(Symbol::Z, &q))
}

impl SpatialCoeff {
    pub fn zero() -> SpatialCoeff {
        SpatialCoeff { a: Poly::zero(), b: Poly::zero(), den: Monomial::ONE, s_pow: 0, pden: Poly::one() }
    }

    pub fn one() -> SpatialCoeff {
        SpatialCoeff::from_poly(Poly::one())
    }

    pub fn from_poly(a: Poly) -> SpatialCoeff {
        SpatialCoeff { a, b: Poly::zero(), den: Monomial::ONE, s_pow: 0, pden: Poly::one() }
    }

    pub fn scalar(c: &ParamRat) -> SpatialCoeff {
        SpatialCoeff::new(c.num().clone(), Poly::zero(), Monomial::ONE, 0, c.den().clone())
    }

    pub fn constant(c: GaussRational) -> SpatialCoeff {
        SpatialCoeff::from_poly(Poly::constant(c))
    }

    pub fn coord(c: Symbol) -> SpatialCoeff {
        assert!(c.is_coordinate());
        SpatialCoeff::from_poly(Poly::var(c))
    }

    /// `r = √(x²+y²+z²)`.
    pub fn r() -> SpatialCoeff {
        SpatialCoeff { a: Poly::zero(), b: Poly::one(), den: Monomial::ONE, s_pow: 0, pden: Poly::one() }
    }

    /// `x^i y^j z^k r^e`, reducing even powers of `r` to powers of `s`.
    pub fn test_monomial(i: u32, j: u32, k: u32, e: u32) -> SpatialCoeff {
        let m = Monomial::from_exps(&[(Symbol::X, i), (Symbol::Y, j), (Symbol::Z, k)]);
        let base = Poly::term(m, GaussRational::ONE);
        let even = &base * &s_poly().pow(e / 2);
        if e % 2 == 0 {
            SpatialCoeff::from_poly(even)
        } else {
            SpatialCoeff { a: Poly::zero(), b: even, den: Monomial::ONE, s_pow: 0, pden: Poly::one() }
        }
    }

    /// `1 / (x^i y^j z^k s^d)`.
    pub fn inverse_monomial(i: u32, j: u32, k: u32, d: u32) -> SpatialCoeff {
        let den = Monomial::from_exps(&[(Symbol::X, i), (Symbol::Y, j), (Symbol::Z, k)]);
        SpatialCoeff { a: Poly::one(), b: Poly::zero(), den, s_pow: d, pden: Poly::one() }
    }

    /// Canonicalizing constructor. `pden` must be a nonzero polynomial in
    /// non-coordinate symbols.
    pub fn new(a: Poly, b: Poly, den: Monomial, s_pow: u32, pden: Poly) -> SpatialCoeff {
        debug_assert!(den == den.coord_part());
        assert!(!pden.is_zero(), "zero parameter denominator");
        debug_assert!(Symbol::COORDS.iter().all(|&c| !pden.contains(c)));
        let mut c = SpatialCoeff { a, b, den, s_pow, pden };
        c.canonicalize();
        c
    }

    fn canonicalize(&mut self) {
        if self.a.is_zero() && self.b.is_zero() {
            *self = SpatialCoeff::zero();
            return;
        }
        for v in Symbol::COORDS {
            let k = self.den.exp(v);
            if k == 0 {
                continue;
            }
            let ma = if self.a.is_zero() { u32::MAX } else { self.a.min_degree_in(v) };
            let mb = if self.b.is_zero() { u32::MAX } else { self.b.min_degree_in(v) };
            let c = k.min(ma).min(mb);
            if c > 0 {
                let m = Monomial::var_pow(v, c);
                self.a = self.a.div_monomial(m);
                self.b = self.b.div_monomial(m);
                self.den = self.den.div(m).unwrap();
            }
        }
        while self.s_pow > 0 {
            let Some(qa) = div_s(&self.a) else { break };
            let Some(qb) = div_s(&self.b) else { break };
            self.a = qa;
            self.b = qb;
            self.s_pow -= 1;
        }
        if !self.pden.is_constant() {
            let ga = self.a.group_by(|m| m.coord_part());
            let gb = self.b.group_by(|m| m.coord_part());
            let g = gcd_many(std::iter::once(&self.pden).chain(ga.iter().map(|t| &t.1)).chain(gb.iter().map(|t| &t.1)));
            if !g.is_one() {
                self.a = self.a.div_exact(&g).expect("gcd divides");
                self.b = self.b.div_exact(&g).expect("gcd divides");
                self.pden = self.pden.div_exact(&g).expect("gcd divides");
            }
        }
        let (p, lc) = self.pden.make_monic();
        if !lc.is_one() {
            let inv = lc.recip();
            self.a = self.a.scale(&inv);
            self.b = self.b.scale(&inv);
            self.pden = p;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.a.is_one() && self.b.is_zero() && self.den.is_one() && self.s_pow == 0 && self.pden.is_one()
    }

    /// Polynomial part `a` of the numerator.
    pub fn a(&self) -> &Poly {
        &self.a
    }

    /// Coefficient `b` of `r` in the numerator.
    pub fn b(&self) -> &Poly {
        &self.b
    }

    /// Coordinate monomial of the denominator.
    pub fn den_monomial(&self) -> Monomial {
        self.den
    }

    /// Power of `x² + y² + z²` in the denominator.
    pub fn s_pow(&self) -> u32 {
        self.s_pow
    }

    pub fn pden(&self) -> &Poly {
        &self.pden
    }

    /// Number of numerator terms.
    pub fn term_count(&self) -> usize {
        self.a.len() + self.b.len()
    }

    /// The value as a parameter function when it does not depend on x, y, z.
    pub fn as_param(&self) -> Option<ParamRat> {
        if !self.b.is_zero() || !self.den.is_one() || self.s_pow > 0 {
            return None;
        }
        if Symbol::COORDS.iter().any(|&c| self.a.contains(c)) {
            return None;
        }
        Some(ParamRat::new(self.a.clone(), self.pden.clone()).expect("nonzero denominator"))
    }

    /// Rewrites numerators over the given (larger) denominator.
    fn lift(&self, den: Monomial, s_pow: u32, pden: &Poly) -> (Poly, Poly) {
        let m = den.div(self.den).expect("common denominator");
        let ds = s_pow - self.s_pow;
        let mut a = self.a.mul_monomial(m);
        let mut b = self.b.mul_monomial(m);
        if ds > 0 {
            let sp = s_poly().pow(ds);
            a = &a * &sp;
            b = &b * &sp;
        }
        if &self.pden != pden {
            let f = pden.div_exact(&self.pden).expect("common parameter denominator");
            a = &a * &f;
            b = &b * &f;
        }
        (a, b)
    }

    /// Common denominator of a family and the numerators over it.
    pub fn common_denominator(cs: &[&SpatialCoeff]) -> (Monomial, u32, Poly, Vec<(Poly, Poly)>) {
        let mut den = Monomial::ONE;
        let mut s_pow = 0;
        let mut pden = Poly::one();
        for c in cs {
            if c.is_zero() {
                continue;
            }
            let mut m = 0u128;
            for v in Symbol::COORDS {
                m |= (den.exp(v).max(c.den.exp(v)) as u128) << (v.index() * 8);
            }
            den = Monomial(m);
            s_pow = s_pow.max(c.s_pow);
            if c.pden != pden {
                pden = lcm(&pden, &c.pden);
            }
        }
        let nums = cs
            .iter()
            .map(|c| if c.is_zero() { (Poly::zero(), Poly::zero()) } else { c.lift(den, s_pow, &pden) })
            .collect();
        (den, s_pow, pden, nums)
    }

    pub fn add(&self, rhs: &SpatialCoeff) -> SpatialCoeff {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        let (den, s_pow, pden, nums) = SpatialCoeff::common_denominator(&[self, rhs]);
        let a = &nums[0].0 + &nums[1].0;
        let b = &nums[0].1 + &nums[1].1;
        SpatialCoeff::new(a, b, den, s_pow, pden)
    }

    pub fn neg(&self) -> SpatialCoeff {
        SpatialCoeff { a: -&self.a, b: -&self.b, den: self.den, s_pow: self.s_pow, pden: self.pden.clone() }
    }

    pub fn sub(&self, rhs: &SpatialCoeff) -> SpatialCoeff {
        self.add(&rhs.neg())
    }

    pub fn mul(&self, rhs: &SpatialCoeff) -> SpatialCoeff {
        if self.is_zero() || rhs.is_zero() {
            return SpatialCoeff::zero();
        }
        let (a, b) = mul_numerators(&self.a, &self.b, &rhs.a, &rhs.b);
        let pden = if rhs.pden.is_one() {
            self.pden.clone()
        } else if self.pden.is_one() {
            rhs.pden.clone()
        } else {
            &self.pden * &rhs.pden
        };
        SpatialCoeff::new(a, b, self.den.mul(rhs.den), self.s_pow + rhs.s_pow, pden)
    }

    pub fn scale(&self, k: &GaussRational) -> SpatialCoeff {
        if k.is_zero() {
            return SpatialCoeff::zero();
        }
        SpatialCoeff {
            a: self.a.scale(k),
            b: self.b.scale(k),
            den: self.den,
            s_pow: self.s_pow,
            pden: self.pden.clone(),
        }
    }

    pub fn mul_param(&self, k: &ParamRat) -> SpatialCoeff {
        if k.is_zero() {
            return SpatialCoeff::zero();
        }
        if let Some(c) = k.as_constant() {
            return self.scale(&c);
        }
        SpatialCoeff::new(&self.a * k.num(), &self.b * k.num(), self.den, self.s_pow, &self.pden * k.den())
    }

    /// Partial derivative with respect to a coordinate.
    pub fn derivative(&self, v: Symbol) -> SpatialCoeff {
        debug_assert!(v.is_coordinate());
        if self.is_zero() {
            return SpatialCoeff::zero();
        }
        let i = self.den.exp(v);
        let d = self.s_pow;
        let ex = u32::from(i > 0);
        let es = u32::from(d > 0 || !self.b.is_zero());
        let vm = Monomial::var(v);
        let vex = Monomial::var_pow(v, ex);
        let sp = if es == 1 { s_poly().clone() } else { Poly::one() };
        let lift = |p: &Poly| -> Poly {
            let q = p.mul_monomial(vex);
            if es == 1 {
                &q * &sp
            } else {
                q
            }
        };
        let mut acc_a = PolyAcc::new();
        acc_a.add_poly(&lift(&self.a.derivative(v)));
        if i > 0 {
            let t = if es == 1 { &self.a * &sp } else { self.a.clone() };
            acc_a.add_scaled(&t, &GaussRational::from_int(-(i as i64)));
        }
        if d > 0 {
            acc_a.add_scaled(&self.a.mul_monomial(vm.mul(vex)), &GaussRational::from_int(-2 * d as i64));
        }
        let mut acc_b = PolyAcc::new();
        if !self.b.is_zero() {
            acc_b.add_poly(&lift(&self.b.derivative(v)));
            acc_b.add_poly(&self.b.mul_monomial(vm.mul(vex)));
            if i > 0 {
                acc_b.add_scaled(&(&self.b * &sp), &GaussRational::from_int(-(i as i64)));
            }
            if d > 0 {
                acc_b.add_scaled(&self.b.mul_monomial(vm.mul(vex)), &GaussRational::from_int(-2 * d as i64));
            }
        }
        SpatialCoeff::new(acc_a.into_poly(), acc_b.into_poly(), self.den.mul(vex), self.s_pow + es, self.pden.clone())
    }

    /// Substitutes values for parameter symbols.
    pub fn substitute(&self, bind: &[(Symbol, ParamRat)]) -> Result<SpatialCoeff, ScalarError> {
        if self.is_zero() {
            return Ok(SpatialCoeff::zero());
        }
        let sub = |p: &Poly| ParamRat::from_poly(p.clone()).substitute(bind);
        let a = sub(&self.a)?;
        let b = sub(&self.b)?;
        let p = sub(&self.pden)?;
        if p.is_zero() {
            return Err(ScalarError::Pole(format!("{}", self.pden)));
        }
        let l = lcm(a.den(), b.den());
        let fa = l.div_exact(a.den()).unwrap();
        let fb = l.div_exact(b.den()).unwrap();
        let na = &(a.num() * &fa) * p.den();
        let nb = &(b.num() * &fb) * p.den();
        Ok(SpatialCoeff::new(na, nb, self.den, self.s_pow, &l * p.num()))
    }
}

/// `(a1 + b1 r)(a2 + b2 r) = (a1 a2 + b1 b2 s) + (a1 b2 + b1 a2) r`.
pub(crate) fn mul_numerators(a1: &Poly, b1: &Poly, a2: &Poly, b2: &Poly) -> (Poly, Poly) {
    let mut acc_a = PolyAcc::new();
    let mut acc_b = PolyAcc::new();
    mul_numerators_into(&mut acc_a, &mut acc_b, a1, b1, a2, b2, &GaussRational::ONE);
    (acc_a.into_poly(), acc_b.into_poly())
}

/// Accumulates `k · (a1 + b1 r)(a2 + b2 r)` into two accumulators.
pub(crate) fn mul_numerators_into(
    acc_a: &mut PolyAcc,
    acc_b: &mut PolyAcc,
    a1: &Poly,
    b1: &Poly,
    a2: &Poly,
    b2: &Poly,
    k: &GaussRational,
) {
    let kp = Poly::constant(k.clone());
    let a1k = if k.is_one() { a1.clone() } else { a1 * &kp };
    let b1k = if k.is_one() { b1.clone() } else { b1 * &kp };
    if !a1k.is_zero() {
        acc_a.add_product(&a1k, a2);
        acc_b.add_product(&a1k, b2);
    }
    if !b1k.is_zero() {
        acc_b.add_product(&b1k, a2);
        if !b2.is_zero() {
            let bs = &b1k * s_poly();
            acc_a.add_product(&bs, b2);
        }
    }
}

impl fmt::Display for SpatialCoeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let num = match (self.a.is_zero(), self.b.is_zero()) {
            (true, true) => return f.write_str("0"),
            (false, true) => format!("{}", self.a),
            (true, false) => {
                if self.b.is_one() {
                    "r".to_string()
                } else {
                    format!("({})*r", self.b)
                }
            }
            (false, false) => format!("{} + ({})*r", self.a, self.b),
        };
        let mut den = Vec::new();
        if !self.den.is_one() {
            den.push(self.den.to_string());
        }
        match self.s_pow {
            0 => {}
            1 => den.push("(x^2 + y^2 + z^2)".into()),
            d => den.push(format!("(x^2 + y^2 + z^2)^{d}")),
        }
        if !self.pden.is_one() {
            den.push(format!("({})", self.pden));
        }
        if den.is_empty() {
            f.write_str(&num)
        } else {
            write!(f, "({num})/({})", den.join("*"))
        }
    }
}

impl fmt::Debug for SpatialCoeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xyz(i: u32, j: u32, k: u32) -> SpatialCoeff {
        SpatialCoeff::test_monomial(i, j, k, 0)
    }

    #[test]
    fn r_squared_is_s() {
        let r = SpatialCoeff::r();
        assert_eq!(r.mul(&r), SpatialCoeff::from_poly(s_poly().clone()));
        let c = SpatialCoeff::inverse_monomial(1, 0, 0, 1).mul(&xyz(0, 2, 0));
        assert_eq!(c.mul(&r).mul(&r), c.mul(&SpatialCoeff::from_poly(s_poly().clone())));
    }

    #[test]
    fn derivative_of_r() {
        let d = SpatialCoeff::r().derivative(Symbol::X);
        let want = SpatialCoeff::new(Poly::zero(), Poly::var(Symbol::X), Monomial::ONE, 1, Poly::one());
        assert_eq!(d, want);
        // x r / s · s / r = x
        let back = d.mul(&SpatialCoeff::from_poly(s_poly().clone())).mul(&SpatialCoeff::r());
        assert_eq!(back, SpatialCoeff::from_poly(Poly::var(Symbol::X)).mul(&SpatialCoeff::from_poly(s_poly().clone())));
    }

    #[test]
    fn quotient_rule_on_inverse_powers() {
        // ∂x (y²/x²) = −2 y² / x³
        let c = SpatialCoeff::inverse_monomial(2, 0, 0, 0).mul(&xyz(0, 2, 0));
        let want = SpatialCoeff::inverse_monomial(3, 0, 0, 0).mul(&xyz(0, 2, 0)).scale(&GaussRational::from_int(-2));
        assert_eq!(c.derivative(Symbol::X), want);
        // ∂z (1/r) = −z r / s²
        let inv_r = SpatialCoeff::r().mul(&SpatialCoeff::inverse_monomial(0, 0, 0, 1));
        let want = SpatialCoeff::new(
            Poly::zero(),
            Poly::var(Symbol::Z).scale(&GaussRational::from_int(-1)),
            Monomial::ONE,
            2,
            Poly::one(),
        );
        assert_eq!(inv_r.derivative(Symbol::Z), want);
    }

    #[test]
    fn cancels_s_factors() {
        let c = SpatialCoeff::new(s_poly().pow(2), Poly::zero(), Monomial::ONE, 1, Poly::one());
        assert_eq!(c, SpatialCoeff::from_poly(s_poly().clone()));
        let sum = SpatialCoeff::inverse_monomial(0, 0, 0, 1)
            .mul(&xyz(2, 0, 0))
            .add(&SpatialCoeff::inverse_monomial(0, 0, 0, 1).mul(&xyz(0, 2, 0)))
            .add(&SpatialCoeff::inverse_monomial(0, 0, 0, 1).mul(&xyz(0, 0, 2)));
        assert!(sum.is_one());
    }

    #[test]
    fn parameter_denominators_cancel() {
        let h = Poly::var(Symbol::Hbar);
        let k = ParamRat::new(Poly::one(), h.clone()).unwrap();
        let c = SpatialCoeff::from_poly(&h * &Poly::var(Symbol::X)).mul_param(&k);
        assert_eq!(c, xyz(1, 0, 0));
    }
}
