use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use super::rational::Rational;

/// Element `re + im·i` of ℚ(i).
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct GaussRational {
    pub re: Rational,
    pub im: Rational,
}

impl GaussRational {
    pub const ZERO: GaussRational = GaussRational { re: Rational::ZERO, im: Rational::ZERO };
    pub const ONE: GaussRational = GaussRational { re: Rational::ONE, im: Rational::ZERO };
    pub const I: GaussRational = GaussRational { re: Rational::ZERO, im: Rational::ONE };

    pub fn new(re: Rational, im: Rational) -> Self {
        GaussRational { re, im }
    }

    pub fn real(re: Rational) -> Self {
        GaussRational { re, im: Rational::ZERO }
    }

    pub fn from_int(n: i64) -> Self {
        Self::real(Rational::from_int(n))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Self::real(Rational::new(n, d))
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        GaussRational { re: self.re.clone(), im: -&self.im }
    }

    /// |z|² = re² + im².
    pub fn norm_sq(&self) -> Rational {
        &(&self.re * &self.re) + &(&self.im * &self.im)
    }

    pub fn recip(&self) -> Self {
        assert!(!self.is_zero(), "reciprocal of zero");
        if self.im.is_zero() {
            return Self::real(self.re.recip());
        }
        if self.re.is_zero() {
            // 1/(b i) = -i/b
            return GaussRational { re: Rational::ZERO, im: -self.im.recip() };
        }
        let n = self.norm_sq();
        GaussRational { re: &self.re / &n, im: -(&self.im / &n) }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = GaussRational::ONE;
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn scale(&self, k: &Rational) -> Self {
        GaussRational { re: &self.re * k, im: &self.im * k }
    }

    /// Sign used to pick a canonical representative for printing: sign of
    /// the real part, or of the imaginary part when the real part vanishes.
    pub fn sign(&self) -> i32 {
        if !self.re.is_zero() {
            self.re.signum()
        } else {
            self.im.signum()
        }
    }
}

impl<'a> Add<&'a GaussRational> for &'a GaussRational {
    type Output = GaussRational;
    fn add(self, rhs: &GaussRational) -> GaussRational {
        GaussRational { re: &self.re + &rhs.re, im: &self.im + &rhs.im }
    }
}

impl<'a> Sub<&'a GaussRational> for &'a GaussRational {
    type Output = GaussRational;
    fn sub(self, rhs: &GaussRational) -> GaussRational {
        GaussRational { re: &self.re - &rhs.re, im: &self.im - &rhs.im }
    }
}

impl<'a> Mul<&'a GaussRational> for &'a GaussRational {
    type Output = GaussRational;
    fn mul(self, rhs: &GaussRational) -> GaussRational {
        // Coefficients are almost always purely real or purely imaginary.
        match (self.im.is_zero(), rhs.im.is_zero()) {
            (true, true) => GaussRational::real(&self.re * &rhs.re),
            (true, false) => GaussRational { re: &self.re * &rhs.re, im: &self.re * &rhs.im },
            (false, true) => GaussRational { re: &self.re * &rhs.re, im: &self.im * &rhs.re },
            (false, false) => GaussRational {
                re: &(&self.re * &rhs.re) - &(&self.im * &rhs.im),
                im: &(&self.re * &rhs.im) + &(&self.im * &rhs.re),
            },
        }
    }
}

impl<'a> Div<&'a GaussRational> for &'a GaussRational {
    type Output = GaussRational;
    fn div(self, rhs: &GaussRational) -> GaussRational {
        self * &rhs.recip()
    }
}

impl Neg for &GaussRational {
    type Output = GaussRational;
    fn neg(self) -> GaussRational {
        GaussRational { re: -&self.re, im: -&self.im }
    }
}

impl Neg for GaussRational {
    type Output = GaussRational;
    fn neg(self) -> GaussRational {
        -&self
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<GaussRational> for GaussRational {
            type Output = GaussRational;
            fn $m(self, rhs: GaussRational) -> GaussRational {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl From<Rational> for GaussRational {
    fn from(r: Rational) -> Self {
        GaussRational::real(r)
    }
}

impl From<i64> for GaussRational {
    fn from(n: i64) -> Self {
        GaussRational::from_int(n)
    }
}

impl fmt::Display for GaussRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", self.re),
            (true, false) => {
                if self.im.is_one() {
                    write!(f, "i")
                } else if (-&self.im).is_one() {
                    write!(f, "-i")
                } else {
                    write!(f, "{}*i", self.im)
                }
            }
            (false, false) => {
                let (sign, mag) = if self.im.signum() < 0 { ('-', -&self.im) } else { ('+', self.im.clone()) };
                if mag.is_one() {
                    write!(f, "({} {sign} i)", self.re)
                } else {
                    write!(f, "({} {sign} {mag}*i)", self.re)
                }
            }
        }
    }
}

impl fmt::Debug for GaussRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_operations() {
        let a = GaussRational::new(Rational::new(1, 2), Rational::from_int(3));
        let b = GaussRational::new(Rational::from_int(-2), Rational::new(1, 3));
        let q = &a / &b;
        assert_eq!(&q * &b, a);
        assert_eq!(&GaussRational::I * &GaussRational::I, GaussRational::from_int(-1));
        assert_eq!(GaussRational::I.recip(), -GaussRational::I);
    }
}
