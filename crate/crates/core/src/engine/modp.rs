//! Arithmetic in GF(p²) = GF(p)[i]/(i² + 1) with p = 2⁶¹ − 1 (p ≡ 3 mod 4,
//! so i² = −1 has no root in GF(p)). Used only to find ranks and pivots at
//! random points; every answer is re-derived exactly afterwards.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rustc_hash::FxHashMap;

use crate::scalar::{GaussRational, Monomial, Poly, Rational, Symbol};

pub const P: u64 = (1u64 << 61) - 1;

#[inline]
fn add(a: u64, b: u64) -> u64 {
    let s = a + b;
    if s >= P {
        s - P
    } else {
        s
    }
}

#[inline]
fn sub(a: u64, b: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + P - b
    }
}

#[inline]
fn mul(a: u64, b: u64) -> u64 {
    let t = a as u128 * b as u128;
    let lo = (t as u64) & P;
    let hi = (t >> 61) as u64;
    add(lo, hi)
}

fn pow(mut a: u64, mut e: u64) -> u64 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = mul(r, a);
        }
        a = mul(a, a);
        e >>= 1;
    }
    r
}

fn inv(a: u64) -> Option<u64> {
    if a == 0 {
        None
    } else {
        Some(pow(a, P - 2))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Fp2 {
    pub re: u64,
    pub im: u64,
}

impl Fp2 {
    pub const ZERO: Fp2 = Fp2 { re: 0, im: 0 };
    pub const ONE: Fp2 = Fp2 { re: 1, im: 0 };

    pub fn is_zero(self) -> bool {
        self.re == 0 && self.im == 0
    }

    pub fn add(self, o: Fp2) -> Fp2 {
        Fp2 { re: add(self.re, o.re), im: add(self.im, o.im) }
    }

    pub fn sub(self, o: Fp2) -> Fp2 {
        Fp2 { re: sub(self.re, o.re), im: sub(self.im, o.im) }
    }

    pub fn mul(self, o: Fp2) -> Fp2 {
        Fp2 { re: sub(mul(self.re, o.re), mul(self.im, o.im)), im: add(mul(self.re, o.im), mul(self.im, o.re)) }
    }

    pub fn inv(self) -> Option<Fp2> {
        let n = add(mul(self.re, self.re), mul(self.im, self.im));
        let k = inv(n)?;
        Some(Fp2 { re: mul(self.re, k), im: mul(sub(0, self.im), k) })
    }

    fn pow(self, mut e: u32) -> Fp2 {
        let mut r = Fp2::ONE;
        let mut a = self;
        while e > 0 {
            if e & 1 == 1 {
                r = r.mul(a);
            }
            a = a.mul(a);
            e >>= 1;
        }
        r
    }
}

fn big_mod(n: &BigInt) -> u64 {
    let p = BigInt::from(P);
    let r = ((n % &p) + &p) % &p;
    r.to_u64().unwrap()
}

/// Reduces a rational mod p; `None` when p divides the denominator.
pub fn rational(q: &Rational) -> Option<u64> {
    match q {
        Rational::Small(n, d) => {
            let nm = (*n as i128).rem_euclid(P as i128) as u64;
            let dm = (*d as i128).rem_euclid(P as i128) as u64;
            Some(mul(nm, inv(dm)?))
        }
        Rational::Big(_) => {
            let nm = big_mod(&q.numer());
            let dm = big_mod(&q.denom());
            Some(mul(nm, inv(dm)?))
        }
    }
}

pub fn gauss(c: &GaussRational) -> Option<Fp2> {
    Some(Fp2 { re: rational(&c.re)?, im: rational(&c.im)? })
}

/// Evaluates polynomials at one point of GF(p²)^k, caching monomial values.
pub struct PointEval {
    values: [Fp2; Symbol::ALL.len()],
    cache: FxHashMap<Monomial, Fp2>,
}

impl PointEval {
    pub fn new(values: [Fp2; Symbol::ALL.len()]) -> PointEval {
        PointEval { values, cache: FxHashMap::default() }
    }

    fn monomial(&mut self, m: Monomial) -> Fp2 {
        if let Some(v) = self.cache.get(&m) {
            return *v;
        }
        let mut r = Fp2::ONE;
        for (s, e) in m.symbols() {
            r = r.mul(self.values[s.index()].pow(e));
        }
        self.cache.insert(m, r);
        r
    }

    pub fn poly(&mut self, p: &Poly) -> Option<Fp2> {
        let mut acc = Fp2::ZERO;
        for (m, c) in p.terms() {
            acc = acc.add(gauss(c)?.mul(self.monomial(*m)));
        }
        Some(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_identities() {
        let i = Fp2 { re: 0, im: 1 };
        assert_eq!(i.mul(i), Fp2 { re: P - 1, im: 0 });
        let a = Fp2 { re: 123456789, im: 987654321 };
        assert_eq!(a.mul(a.inv().unwrap()), Fp2::ONE);
        assert_eq!(rational(&Rational::new(-1, 2)).map(|h| mul(h, 2)), Some(P - 1));
    }
}
