//! Multivariate gcd over ℚ(i) by recursive primitive remainder sequences.

use super::poly::Poly;
use super::symbol::Symbol;

/// Greatest common divisor, normalized so its grlex-leading coefficient is 1.
/// `gcd(0, 0) = 0`.
pub fn gcd(a: &Poly, b: &Poly) -> Poly {
    let g = gcd_raw(a, b);
    g.make_monic().0
}

fn gcd_raw(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return b.clone();
    }
    if b.is_zero() {
        return a.clone();
    }
    if a.is_constant() || b.is_constant() {
        return Poly::one();
    }
    if a == b {
        return a.clone();
    }
    // Monomial factors are split off first; they are cheap and common.
    let ma = a.monomial_content();
    let mb = b.monomial_content();
    if !ma.is_one() || !mb.is_one() {
        let mg = ma.gcd(mb);
        let g = gcd_raw(&a.div_monomial(ma), &b.div_monomial(mb));
        return g.mul_monomial(mg);
    }
    // Trial division handles the frequent case where one divides the other.
    if a.len() <= b.len() {
        if b.div_exact(a).is_some() {
            return a.clone();
        }
    } else if a.div_exact(b).is_some() {
        return b.clone();
    }
    let sa = a.symbols();
    let sb = b.symbols();
    // A symbol present in only one argument cannot occur in the gcd.
    if let Some(&s) = sa.iter().find(|s| !sb.contains(s)) {
        return gcd_content_with(a, s, b);
    }
    if let Some(&s) = sb.iter().find(|s| !sa.contains(s)) {
        return gcd_content_with(b, s, a);
    }
    let v = *sa.iter().max_by_key(|s| a.degree_in(**s).min(b.degree_in(**s))).unwrap();
    let (ca, pa) = split_content(a, v);
    let (cb, pb) = split_content(b, v);
    let c = gcd_raw(&ca, &cb);
    let g = prs(pa, pb, v);
    &c * &g
}

/// gcd(a, b) where `s` occurs in `a` but not in `b`: fold b against each
/// coefficient of `a` in `s`.
fn gcd_content_with(a: &Poly, s: Symbol, b: &Poly) -> Poly {
    let mut g = b.clone();
    for c in a.coeffs_in(s) {
        if c.is_zero() {
            continue;
        }
        g = gcd_raw(&g, &c);
        if g.is_constant() {
            return Poly::one();
        }
    }
    g
}

/// Content of `p` as a polynomial in `v` (gcd of coefficients) and the
/// primitive part.
pub fn split_content(p: &Poly, v: Symbol) -> (Poly, Poly) {
    let mut coeffs: Vec<Poly> = p.coeffs_in(v).into_iter().filter(|c| !c.is_zero()).collect();
    coeffs.sort_by_key(|c| c.len());
    let mut g = Poly::zero();
    for c in &coeffs {
        g = gcd_raw(&g, c);
        if g.is_constant() {
            break;
        }
    }
    let g = if g.is_constant() { Poly::one() } else { g.make_monic().0 };
    let pp = if g.is_one() { p.clone() } else { p.div_exact(&g).expect("content divides") };
    (g, pp)
}

fn prs(a: Poly, b: Poly, v: Symbol) -> Poly {
    let (mut a, mut b) = if a.degree_in(v) >= b.degree_in(v) { (a, b) } else { (b, a) };
    loop {
        if b.degree_in(v) == 0 {
            return Poly::one();
        }
        let r = a.prem(&b, v);
        if r.is_zero() {
            return split_content(&b, v).1;
        }
        if r.degree_in(v) == 0 {
            return Poly::one();
        }
        a = b;
        // monic, so the ℚ(i) coefficients stay small along the sequence
        b = split_content(&r, v).1.make_monic().0;
    }
}

/// Lowest common multiple, monic.
pub fn lcm(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() || b.is_zero() {
        return Poly::zero();
    }
    let g = gcd(a, b);
    (a * &b.div_exact(&g).expect("gcd divides")).make_monic().0
}

/// Gcd of a family, ignoring zeros.
pub fn gcd_many<'a>(ps: impl IntoIterator<Item = &'a Poly>) -> Poly {
    let mut g = Poly::zero();
    for p in ps {
        g = gcd_raw(&g, p);
        if g.is_constant() && !g.is_zero() {
            return Poly::one();
        }
    }
    g.make_monic().0
}
