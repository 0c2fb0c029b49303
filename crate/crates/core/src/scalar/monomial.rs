use std::cmp::Ordering;
use std::fmt;

use super::symbol::Symbol;

/// Power product over [`Symbol::ALL`], packed one byte per variable.
///
/// Byte `k` holds the exponent of the symbol with index `k`, so monomial
/// multiplication is plain integer addition as long as no exponent exceeds
/// 255. Comparing the packed integers is the lexicographic order with the
/// highest-index symbol most significant; it is a monomial order and is the
/// storage order of [`Poly`](super::poly::Poly).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Monomial(pub u128);

const SLOT_BITS: u32 = 8;

impl Monomial {
    pub const ONE: Monomial = Monomial(0);

    #[inline]
    pub fn var(sym: Symbol) -> Monomial {
        Monomial(1u128 << (sym.index() as u32 * SLOT_BITS))
    }

    #[inline]
    pub fn var_pow(sym: Symbol, e: u32) -> Monomial {
        assert!(e < 256, "exponent overflow");
        Monomial((e as u128) << (sym.index() as u32 * SLOT_BITS))
    }

    #[inline]
    pub fn exp(self, sym: Symbol) -> u32 {
        ((self.0 >> (sym.index() as u32 * SLOT_BITS)) & 0xff) as u32
    }

    #[inline]
    pub fn exp_at(self, idx: usize) -> u32 {
        ((self.0 >> (idx as u32 * SLOT_BITS)) & 0xff) as u32
    }

    pub fn from_exps(exps: &[(Symbol, u32)]) -> Monomial {
        exps.iter().fold(Monomial::ONE, |m, &(s, e)| m.mul(Monomial::var_pow(s, e)))
    }

    #[inline]
    pub fn is_one(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn mul(self, other: Monomial) -> Monomial {
        debug_assert!(self.no_overflow(other), "monomial exponent overflow");
        Monomial(self.0 + other.0)
    }

    fn no_overflow(self, other: Monomial) -> bool {
        (0..16).all(|k| self.exp_at(k) + other.exp_at(k) < 256)
    }

    /// Exact quotient when `other` divides `self`.
    #[inline]
    pub fn div(self, other: Monomial) -> Option<Monomial> {
        if self.divisible_by(other) {
            Some(Monomial(self.0 - other.0))
        } else {
            None
        }
    }

    #[inline]
    pub fn divisible_by(self, other: Monomial) -> bool {
        // Per-byte a >= b without borrows: check each slot.
        let (a, b) = (self.0, other.0);
        if b == 0 {
            return true;
        }
        (0..16).all(|k| {
            let sh = k * SLOT_BITS;
            ((a >> sh) & 0xff) >= ((b >> sh) & 0xff)
        })
    }

    pub fn degree(self) -> u32 {
        (0..16).map(|k| self.exp_at(k)).sum()
    }

    /// Degree restricted to the given symbols.
    pub fn degree_in(self, syms: &[Symbol]) -> u32 {
        syms.iter().map(|&s| self.exp(s)).sum()
    }

    /// Drops the given symbol from the monomial.
    #[inline]
    pub fn without(self, sym: Symbol) -> Monomial {
        Monomial(self.0 & !(0xffu128 << (sym.index() as u32 * SLOT_BITS)))
    }

    /// Keeps only the coordinate part (x, y, z).
    #[inline]
    pub fn coord_part(self) -> Monomial {
        let mut m = 0u128;
        for s in Symbol::COORDS {
            m |= self.0 & (0xffu128 << (s.index() as u32 * SLOT_BITS));
        }
        Monomial(m)
    }

    /// Everything except the coordinate part.
    #[inline]
    pub fn non_coord_part(self) -> Monomial {
        Monomial(self.0 - self.coord_part().0)
    }

    /// Graded lexicographic comparison with the symbol order of
    /// [`Symbol::ALL`] (later symbols dominate).
    pub fn grlex_cmp(self, other: Monomial) -> Ordering {
        self.degree().cmp(&other.degree()).then(self.0.cmp(&other.0))
    }

    pub fn gcd(self, other: Monomial) -> Monomial {
        let mut m = 0u128;
        for k in 0..16 {
            let e = self.exp_at(k).min(other.exp_at(k)) as u128;
            m |= e << (k as u32 * SLOT_BITS);
        }
        Monomial(m)
    }

    pub fn symbols(self) -> impl Iterator<Item = (Symbol, u32)> {
        Symbol::ALL.into_iter().filter_map(move |s| {
            let e = self.exp(s);
            (e > 0).then_some((s, e))
        })
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return f.write_str("1");
        }
        let mut first = true;
        for (s, e) in self.symbols() {
            if !first {
                f.write_str("*")?;
            }
            first = false;
            if e == 1 {
                write!(f, "{s}")?;
            } else {
                write!(f, "{s}^{e}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
