//! Two-generator quadratic algebras: coefficient records, the Casimir, the
//! structure function and its finite-dimensional representations.
//!
//! A pair `(A, B)` obeys
//!
//! ```text
//! [A,[A,B]] = α A² + β B² + γ {A,B} + δ A + ε B + ζ
//! [B,[A,B]] = a A² − γ B² − α {A,B} + d A − δ B + z
//! ```
//!
//! where the constants may involve central elements, written with the
//! stand-in symbols `E` (for `H`), `a1bar` (for `A1`) and `a2bar` (for `A2`).

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::dsl;
use crate::engine::{fit_linear, LinearFit};
use crate::operator::OperatorExpr;
use crate::scalar::{GaussRational, Monomial, ParamRat, Poly, Rational, ScalarError, Symbol};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum RepError {
    #[error("`{symbol}` does not commute with {with}")]
    NotCentral { symbol: String, with: String },
    #[error("coefficient {0} has a central symbol in its denominator")]
    CentralDenominator(String),
    #[error("unsupported case: {0}")]
    Unsupported(String),
    #[error("the structure function is not the product of the given factors")]
    FactorMismatch,
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

/// Parses a scalar written in relation-file syntax.
pub fn scalar(text: &str) -> ParamRat {
    let e = dsl::parse_expr(text, &[]).unwrap_or_else(|err| panic!("bad scalar `{text}`: {err}"));
    e.as_scalar().cloned().unwrap_or_else(|| panic!("`{text}` is not a scalar"))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadraticAlgebraCoeffs {
    pub alpha: ParamRat,
    pub beta: ParamRat,
    pub gamma: ParamRat,
    pub a: ParamRat,
    pub delta: ParamRat,
    pub epsilon: ParamRat,
    pub zeta: ParamRat,
    pub d: ParamRat,
    pub z: ParamRat,
}

pub const COEFF_NAMES: [&str; 9] = ["alpha", "beta", "gamma", "a", "delta", "epsilon", "zeta", "d", "z"];

impl QuadraticAlgebraCoeffs {
    #[allow(clippy::too_many_arguments)]
    fn parse(
        alpha: &str,
        beta: &str,
        gamma: &str,
        a: &str,
        delta: &str,
        epsilon: &str,
        zeta: &str,
        d: &str,
        z: &str,
    ) -> Self {
        QuadraticAlgebraCoeffs {
            alpha: scalar(alpha),
            beta: scalar(beta),
            gamma: scalar(gamma),
            a: scalar(a),
            delta: scalar(delta),
            epsilon: scalar(epsilon),
            zeta: scalar(zeta),
            d: scalar(d),
            z: scalar(z),
        }
    }

    /// `(A2, B2)` with central `a1bar`, as listed next to the subalgebra.
    pub fn a2b2_printed() -> Self {
        Self::parse(
            "4*hbar^2",
            "0",
            "4*hbar^2",
            "0",
            "-4*hbar^2*a1bar + hbar^4*(2*mu1^2 - 3)",
            "2*hbar^4*(2*mu1^2 + 2*mu2^2 - 3)",
            "hbar^6*(mu2^2 - mu1^2) + hbar^4*(3 - 4*mu1^2)*a1bar",
            "-2*hbar^4*(2*mu1^2 + 2*mu2^2 - 3)",
            "hbar^6*(mu1^2 - mu3^2) + hbar^4*(4*mu1^2 - 3)*a1bar",
        )
    }

    /// `(A2, B2)` with constants read off the verified double commutators.
    pub fn a2b2() -> Self {
        Self::parse(
            "4*hbar^2",
            "0",
            "4*hbar^2",
            "0",
            "-4*hbar^2*a1bar + hbar^4*(4*mu1^2 - 3)",
            "2*hbar^4*(2*mu1^2 + 2*mu2^2 - 3)",
            "hbar^6*(mu2^2 - mu1^2) + hbar^4*(3 - 4*mu1^2)*a1bar",
            "-2*hbar^4*(2*mu1^2 + 2*mu3^2 - 3)",
            "hbar^6*(mu1^2 - mu3^2) + hbar^4*(4*mu1^2 - 3)*a1bar",
        )
    }

    /// `(A1, B1)` with central `E` and `a2bar`, as listed next to the
    /// subalgebra (`β` is not listed and taken as 0).
    pub fn a1b1_printed() -> Self {
        Self::parse(
            "-16*hbar^2*E",
            "0",
            "4*hbar^2",
            "0",
            "16*hbar^2*a2bar*E - 2*hbar^4*(4*mu1^2 + 4*mu2^2 + 12*mu3^2)*E - 4*hbar^6*mu^2",
            "2*hbar^4*(2*mu1^2 + 2*mu2^2 + 2*mu3^2 - 3)",
            "4*hbar^6*mu^2*a2bar + 2*hbar^6*mu^2*(1 - 2*mu3^2) + 2*(4*mu1^2 + 4*mu2^2 + 4*mu3^2)*a2bar*E
             + hbar^6*(1 - 2*mu3^2*(4*mu1^2 + 4*mu2^2 + 4*mu3^2 - 5))*E",
            "16*hbar^4*(5 - 4*mu3^2)*E^2",
            "-32*hbar^4*a2bar*E^2 + 4*hbar^8*mu^2*(3 - 4*mu3^2)*E
             + 2*hbar^6*(12*mu1^2 + 12*mu2^2 - 16*mu3^4 - 8*(2*mu1^2 + 2*mu2^2 - 3) - 1)*E^2",
        )
    }

    /// `(A1, B1)` with constants read off the verified double commutators.
    pub fn a1b1() -> Self {
        Self::parse(
            "-16*hbar^2*E",
            "0",
            "4*hbar^2",
            "0",
            "16*hbar^2*a2bar*E - 2*hbar^4*(4*mu1^2 + 4*mu2^2 + 12*mu3^2 - 5)*E - 4*hbar^6*mu^2",
            "2*hbar^4*(2*mu1^2 + 2*mu2^2 + 2*mu3^2 - 3)",
            "4*hbar^6*mu^2*a2bar + 2*hbar^8*mu^2*(1 - 2*mu3^2) + 2*hbar^4*(4*mu1^2 + 4*mu2^2 + 4*mu3^2 - 5)*a2bar*E
             + hbar^6*(1 - 2*mu3^2*(4*mu1^2 + 4*mu2^2 + 4*mu3^2 - 5))*E",
            "16*hbar^4*(5 - 4*mu3^2)*E^2",
            "-32*hbar^4*a2bar*E^2 + 4*hbar^8*mu^2*(3 - 4*mu3^2)*E
             - 2*hbar^6*(16*mu3^4 + 8*(2*mu1^2 + 2*mu2^2 - 3)*mu3^2 - 12*mu1^2 - 12*mu2^2 + 1)*E^2",
        )
    }

    pub fn fields(&self) -> [(&'static str, &ParamRat); 9] {
        [
            ("alpha", &self.alpha),
            ("beta", &self.beta),
            ("gamma", &self.gamma),
            ("a", &self.a),
            ("delta", &self.delta),
            ("epsilon", &self.epsilon),
            ("zeta", &self.zeta),
            ("d", &self.d),
            ("z", &self.z),
        ]
    }

    fn map(&self, f: impl Fn(&ParamRat) -> Result<ParamRat, ScalarError>) -> Result<Self, ScalarError> {
        Ok(QuadraticAlgebraCoeffs {
            alpha: f(&self.alpha)?,
            beta: f(&self.beta)?,
            gamma: f(&self.gamma)?,
            a: f(&self.a)?,
            delta: f(&self.delta)?,
            epsilon: f(&self.epsilon)?,
            zeta: f(&self.zeta)?,
            d: f(&self.d)?,
            z: f(&self.z)?,
        })
    }

    pub fn substitute(&self, bind: &[(Symbol, ParamRat)]) -> Result<Self, ScalarError> {
        self.map(|c| c.substitute(bind))
    }

    /// Names of the constants that differ from `other`.
    pub fn differences(&self, other: &Self) -> Vec<&'static str> {
        self.fields().iter().zip(other.fields()).filter(|(a, b)| a.1 != b.1).map(|(a, _)| a.0).collect()
    }

    /// Coefficients of each constant in powers of a central symbol, e.g.
    /// `δ = δ1 E + δ0` gives `[δ0, δ1]`.
    pub fn expansion(&self, s: Symbol) -> Result<Vec<(&'static str, Vec<ParamRat>)>, RepError> {
        self.fields()
            .into_iter()
            .map(|(name, c)| {
                if c.den().contains(s) {
                    return Err(RepError::CentralDenominator(c.to_string()));
                }
                let den = ParamRat::from_poly(c.den().clone());
                let parts = c
                    .num()
                    .coeffs_in(s)
                    .into_iter()
                    .map(|p| ParamRat::from_poly(p).checked_div(&den))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok((name, parts))
            })
            .collect()
    }
}

/// Printed Casimir of `(A2, B2)`, in `a1bar`.
pub fn k2_printed() -> ParamRat {
    scalar(
        "1/8*(((-32*(mu3^2 - 1)*mu2^2 + 32*mu3^2 + 2)*mu1^2 - 30*mu3^2 + mu2^2*(32*mu3^2 - 30) + 9))*hbar^8
         + 3/2*hbar^6*(12*mu1^2 - 7)*a1bar + 4*hbar^4*(mu1^2 - 1)*a1bar^2",
    )
}

/// Printed Casimir of `(A1, B1)`, in `E` and `a2bar`.
pub fn k1_printed() -> ParamRat {
    scalar(
        "4*mu^4*(mu3^2 - 1)*hbar^12
         + 4*hbar^10*mu^2*(4*mu3^4 - 23*mu3^2 + 4*mu1^2*(mu3^2 - 1) + 4*mu2^2*(mu3^2 - 1) + 8)*E
         + 56*hbar^8*mu^2*a2bar*E
         + hbar^8*(16*(mu3^2 - 1)*mu1^4 + 4*(8*mu3^4 - 34*mu3^2 + 8*mu2^2*(mu3^2 - 1) + 5)*mu1^2 + 97*mu3^2
             + 4*(4*mu3^6 - 42*mu3^4 + 4*mu2^4*(mu3^2 - 1) + mu2^2*(8*mu3^4 - 34*mu3^2 + 5)) + 15)*E^2
         + 4*hbar^6*(28*mu1^2 + 28*mu2^2 + 52*mu3^2 - 31)*a2bar*E^2 - 48*hbar^4*a2bar^2*E^2",
    )
}

/// A central stand-in symbol and the operator it represents.
pub type Central<'a> = (Symbol, &'a OperatorExpr);

const CENTRAL_SYMBOLS: [Symbol; 3] = [Symbol::E, Symbol::A2bar, Symbol::A1bar];

/// Replaces the central symbols of a scalar by their operators. The
/// operators must commute with each other.
pub fn param_operator(c: &ParamRat, central: &[Central]) -> Result<OperatorExpr, RepError> {
    if CENTRAL_SYMBOLS.iter().any(|s| c.den().contains(*s)) {
        return Err(RepError::CentralDenominator(c.to_string()));
    }
    let den = ParamRat::from_poly(c.den().clone());
    let key = |m: Monomial| {
        let mut k = Monomial::ONE;
        for s in CENTRAL_SYMBOLS {
            k = k.mul(Monomial::var_pow(s, m.exp(s)));
        }
        k
    };
    let groups = c.num().group_by(key);
    let mut out = OperatorExpr::zero();
    for (cm, rest) in groups {
        let mut op = OperatorExpr::scalar(&ParamRat::from_poly(rest).checked_div(&den)?);
        for s in CENTRAL_SYMBOLS {
            let e = cm.exp(s);
            if e == 0 {
                continue;
            }
            let Some((_, o)) = central.iter().find(|(t, _)| *t == s) else {
                return Err(RepError::Unsupported(format!("no operator bound to `{s}`")));
            };
            op = op.compose(&o.pow(e));
        }
        out = out.add(&op);
    }
    Ok(out)
}

/// Sign of the `B` coefficient in the Casimir formula. The printed form has
/// `−γδ + 2ζ − βd/3`; only the opposite sign gives an element commuting with
/// `A` (checked on both subalgebras of the model).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CasimirFormula {
    Printed,
    Central,
}

#[derive(Clone, Debug)]
pub struct CasimirValue {
    pub formula: CasimirFormula,
    /// The Casimir formula evaluated on the operators.
    pub as_operator: Option<OperatorExpr>,
    /// The same element as a polynomial in the central symbols, when it is one.
    pub as_polynomial: Option<ParamRat>,
    /// Term counts of `[K, A]` and `[K, B]`.
    pub commutator_terms: (usize, usize),
}

impl CasimirValue {
    pub fn is_central(&self) -> bool {
        self.commutator_terms == (0, 0)
    }

    /// `h0, h1, ...` with `K = Σ h_k E^k`.
    pub fn energy_coefficients(&self) -> Option<Vec<ParamRat>> {
        let k = self.as_polynomial.as_ref()?;
        let den = ParamRat::from_poly(k.den().clone());
        k.num().coeffs_in(Symbol::E).into_iter().map(|p| ParamRat::from_poly(p).checked_div(&den).ok()).collect()
    }
}

fn check_central(central: &[Central], a: &OperatorExpr, b: &OperatorExpr) -> Result<(), RepError> {
    for (j, (s, op)) in central.iter().enumerate() {
        for (name, other) in [("the first generator", a), ("the second generator", b)] {
            if !op.commutator(other).is_zero() {
                return Err(RepError::NotCentral { symbol: s.to_string(), with: name.to_string() });
            }
        }
        for (t, other) in &central[j + 1..] {
            if !op.commutator(other).is_zero() {
                return Err(RepError::NotCentral { symbol: s.to_string(), with: format!("`{t}`") });
            }
        }
    }
    Ok(())
}

/// Monomials of total degree ≤ `deg` in the given symbols.
fn central_monomials(symbols: &[Symbol], deg: u32) -> Vec<Monomial> {
    let mut out = vec![Monomial::ONE];
    for s in symbols {
        let mut next = Vec::new();
        for m in &out {
            let used: u32 = symbols.iter().map(|t| m.exp(*t)).sum();
            for e in 0..=deg - used {
                next.push(m.mul(Monomial::var_pow(*s, e)));
            }
        }
        out = next;
    }
    out.sort_by_key(|m| (m.degree(), *m));
    out
}

/// `K` from the two-generator Casimir formula, evaluated on operators.
pub fn casimir_from_formula(
    c: &QuadraticAlgebraCoeffs,
    a: &OperatorExpr,
    b: &OperatorExpr,
    central: &[Central],
) -> Result<CasimirValue, RepError> {
    casimir_with(c, a, b, central, CasimirFormula::Central)
}

/// As [`casimir_from_formula`] with a choice of sign. Also expresses `K` as
/// a polynomial of degree ≤ 4 in the central symbols when it is one.
pub fn casimir_with(
    c: &QuadraticAlgebraCoeffs,
    a: &OperatorExpr,
    b: &OperatorExpr,
    central: &[Central],
    formula: CasimirFormula,
) -> Result<CasimirValue, RepError> {
    check_central(central, a, b)?;
    let third = ParamRat::ratio(1, 3);
    let (al, be, ga, aa, de, ep, ze, dd, zz) =
        (&c.alpha, &c.beta, &c.gamma, &c.a, &c.delta, &c.epsilon, &c.zeta, &c.d, &c.z);
    let two = ParamRat::from_int(2);
    let coeffs: Vec<ParamRat> = vec![
        ParamRat::one(),
        -al,
        -ga,
        &(&(al * ga) - de) + &(&(aa * be) * &third),
        -&(&(&two * be) * &third),
        &(&(ga * ga) - ep) - &(&(al * be) * &third),
        match formula {
            CasimirFormula::Printed => &(&(&two * ze) - &(ga * de)) - &(&(be * dd) * &third),
            CasimirFormula::Central => &(&(ga * de) - &(&two * ze)) + &(&(be * dd) * &third),
        },
        &(&two * aa) * &third,
        &(dd + &(&(aa * ga) * &third)) + &(al * al),
        &(&(&(aa * ep) * &third) + &(al * de)) + &(&two * zz),
    ];
    let ab = a.commutator(b);
    let words: Vec<Box<dyn Fn() -> OperatorExpr + Sync>> = vec![
        Box::new(|| ab.compose(&ab)),
        Box::new(|| a.compose(a).anticommutator(b)),
        Box::new(|| a.anticommutator(&b.compose(b))),
        Box::new(|| a.anticommutator(b)),
        Box::new(|| b.pow(3)),
        Box::new(|| b.compose(b)),
        Box::new(|| b.clone()),
        Box::new(|| a.pow(3)),
        Box::new(|| a.compose(a)),
        Box::new(|| a.clone()),
    ];
    let terms: Vec<OperatorExpr> = coeffs
        .par_iter()
        .zip(words.par_iter())
        .filter(|(k, _)| !k.is_zero())
        .map(|(k, w)| Ok(param_operator(k, central)?.compose(&w())))
        .collect::<Result<_, RepError>>()?;
    let k = OperatorExpr::sum(terms.iter());
    let (ka, kb) = rayon::join(|| k.commutator(a).term_count(), || k.commutator(b).term_count());

    let symbols: Vec<Symbol> = central.iter().map(|(s, _)| *s).collect();
    let monos = central_monomials(&symbols, 4);
    let basis: Vec<OperatorExpr> = monos
        .par_iter()
        .map(|m| param_operator(&ParamRat::from_poly(Poly::term(*m, GaussRational::ONE)), central))
        .collect::<Result<_, _>>()?;
    let refs: Vec<&OperatorExpr> = basis.iter().collect();
    let as_polynomial = match fit_linear(&k, &refs, true) {
        LinearFit::Solved { coeffs, .. } => {
            let mut acc = ParamRat::zero();
            for (m, co) in monos.iter().zip(coeffs) {
                acc = &acc + &(&co * &ParamRat::from_poly(Poly::term(*m, GaussRational::ONE)));
            }
            Some(acc)
        }
        _ => None,
    };
    Ok(CasimirValue { formula, as_operator: Some(k), as_polynomial, commutator_terms: (ka, kb) })
}

/// `Φ` as a polynomial in `t = u + x` (the symbol `t`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructureFunction {
    pub phi: ParamRat,
}

impl StructureFunction {
    pub fn degree(&self) -> u32 {
        self.phi.num().degree_in(Symbol::T)
    }

    pub fn at(&self, t: &ParamRat) -> Result<ParamRat, ScalarError> {
        self.phi.substitute(&[(Symbol::T, t.clone())])
    }

    pub fn substitute(&self, bind: &[(Symbol, ParamRat)]) -> Result<StructureFunction, ScalarError> {
        Ok(StructureFunction { phi: self.phi.substitute(bind)? })
    }
}

fn check_case(c: &QuadraticAlgebraCoeffs) -> Result<(), RepError> {
    if !c.beta.is_zero() {
        return Err(RepError::Unsupported("β ≠ 0".into()));
    }
    if c.gamma.is_zero() {
        return Err(RepError::Unsupported("γ = 0".into()));
    }
    Ok(())
}

/// Structure function of the algebra with Casimir value `k`, for `γ ≠ 0`
/// and `β = 0`.
pub fn structure_poly(c: &QuadraticAlgebraCoeffs, k: &ParamRat) -> Result<StructureFunction, RepError> {
    check_case(c)?;
    let n = ParamRat::from_int;
    let t = ParamRat::var(Symbol::T);
    let (al, ga, aa, de, ep, ze, dd, zz) = (&c.alpha, &c.gamma, &c.a, &c.delta, &c.epsilon, &c.zeta, &c.d, &c.z);
    let mul = |xs: &[&ParamRat]| xs.iter().fold(ParamRat::one(), |acc, x| &acc * x);
    let sum = |xs: &[ParamRat]| xs.iter().fold(ParamRat::zero(), |acc, x| &acc + x);
    let lin = |k: i64| &(&n(2) * &t) + &n(k);
    let (tm3, tm1, tp1) = (lin(-3), lin(-1), lin(1));
    let tm1_2 = tm1.pow(2);
    let tm1_4 = tm1.pow(4);
    let g2 = ga.pow(2);
    let g4 = ga.pow(4);
    let g6 = ga.pow(6);
    let g8 = ga.pow(8);

    let s1 = mul(&[&n(-3072), k, &tm1_2, &g6]);
    let s2 = mul(&[
        &n(-48),
        &tm3,
        &tm1_4,
        &tp1,
        &g6,
        &sum(&[mul(&[ep, al, al]), -mul(&[ga, de, al]), -mul(&[dd, ga, ga]), mul(&[aa, ga, ep])]),
    ]);
    let s3 = mul(&[&tm3.pow(2), &tm1_4, &tp1.pow(2), &sum(&[mul(&[&n(3), al, al]), mul(&[&n(4), aa, ga])]), &g8]);
    let s4 = mul(&[&n(768), &sum(&[mul(&[&n(4), ze, &g2]), mul(&[&n(-2), de, ep, ga]), mul(&[al, ep, ep])]).pow(2)]);
    let quad = sum(&[mul(&[&n(12), &t, &t]), mul(&[&n(-12), &t]), n(-1)]);
    let s5 = mul(&[
        &n(32),
        &tm1_2,
        &quad,
        &g4,
        &sum(&[
            mul(&[&n(8), zz, &ga.pow(3)]),
            mul(&[&n(2), de, de, &g2]),
            mul(&[&n(-4), dd, ep, &g2]),
            mul(&[&n(4), al, ze, &g2]),
            mul(&[&n(2), aa, ep, ep, ga]),
            mul(&[&n(-6), al, de, ep, ga]),
            mul(&[&n(3), al, al, ep, ep]),
        ]),
    ]);
    let s6 = mul(&[
        &n(-256),
        &tm1_2,
        &g2,
        &sum(&[
            mul(&[&n(-4), zz, &ga.pow(5)]),
            mul(&[&n(2), de, de, &g4]),
            mul(&[&n(2), dd, ep, &g4]),
            mul(&[&n(4), al, ze, &g4]),
            mul(&[&n(12), zz, ep, &ga.pow(3)]),
            mul(&[&n(-12), de, ze, &ga.pow(3)]),
            mul(&[&n(-3), dd, ep, ep, &g2]),
            mul(&[&n(6), de, de, ep, &g2]),
            mul(&[&n(12), al, ep, ze, &g2]),
            mul(&[aa, &ep.pow(3), ga]),
            mul(&[&n(-9), al, de, ep, ep, ga]),
            mul(&[&n(3), al, al, &ep.pow(3)]),
        ]),
    ]);
    Ok(StructureFunction { phi: sum(&[s1, s2, s3, s4, s5, s6]) })
}

/// `A(x) = (γ/2)((x+u)² − 1/4 − ε/γ²)`.
pub fn ladder_value(c: &QuadraticAlgebraCoeffs, u: &ParamRat, x: i64) -> Result<ParamRat, RepError> {
    if c.gamma.is_zero() {
        return Err(RepError::Unsupported("γ = 0".into()));
    }
    let s = u + &ParamRat::from_int(x);
    let inner = &(&s.pow(2) - &ParamRat::ratio(1, 4)) - &c.epsilon.checked_div(&c.gamma.pow(2))?;
    Ok(&(&c.gamma * &ParamRat::ratio(1, 2)) * &inner)
}

/// `Φ` as a constant times a product of factors.
#[derive(Clone, Debug)]
pub struct FactorForm {
    pub constant: ParamRat,
    pub factors: Vec<ParamRat>,
}

impl FactorForm {
    pub fn expand(&self) -> ParamRat {
        self.factors.iter().fold(self.constant.clone(), |acc, f| &acc * f)
    }

    pub fn substitute(&self, bind: &[(Symbol, ParamRat)]) -> Result<FactorForm, ScalarError> {
        Ok(FactorForm {
            constant: self.constant.substitute(bind)?,
            factors: self.factors.iter().map(|f| f.substitute(bind)).collect::<Result<_, _>>()?,
        })
    }
}

/// Factorized structure function of `(A2, B2)` in `t` and `a1bar`.
pub fn a2b2_factors() -> FactorForm {
    FactorForm {
        constant: scalar("3*2^18*hbar^16"),
        factors: [
            "2*t - mu1 - mu2 - 1",
            "2*t + mu1 - mu2 - 1",
            "2*t - mu1 + mu2 - 1",
            "2*t + mu1 + mu2 - 1",
            "8*hbar^2*t^2 - 8*hbar^2*(mu3 + 1)*t - 2*hbar^2*(mu1^2 + mu2^2 - 1/2) + 4*hbar^2*(mu3 + 1/2) - 4*a1bar",
            "8*hbar^2*t^2 + 8*hbar^2*(mu3 - 1)*t - 2*hbar^2*(mu1^2 + mu2^2 - 1/2) - 4*hbar^2*(mu3 - 1/2) - 4*a1bar",
        ]
        .iter()
        .map(|s| scalar(s))
        .collect(),
    }
}

/// Factorized structure function of `(A1, B1)` in `t` and the central
/// `E`, `a2bar`.
pub fn a1b1_factors() -> FactorForm {
    FactorForm {
        constant: scalar("3*2^18*hbar^16"),
        factors: [
            "2*hbar^2*mu^2 + (4*t - 3)^2*E",
            "2*hbar^2*mu^2 + (4*t - 1)^2*E",
            "8*hbar^2*t^2 - 8*hbar^2*t*(mu3 + 1) - 2*hbar^2*(mu1^2 + mu2^2 - mu3^2 - 1/2) + 4*hbar^2*(mu3 + 1/2) - 4*a2bar",
            "8*hbar^2*t^2 + 8*hbar^2*t*(mu3 - 1) - 2*hbar^2*(mu1^2 + mu2^2 - mu3^2 - 1/2) - 4*hbar^2*(mu3 - 1/2) - 4*a2bar",
        ]
        .iter()
        .map(|s| scalar(s))
        .collect(),
    }
}

/// `v = (2 + μ1 + μ2 + μ3)/2`, the offset of the `(A1, B1)` ladder.
pub fn a1b1_offset() -> ParamRat {
    scalar("(2 + mu1 + mu2 + mu3)/2")
}

/// `A2` eigenvalue at ladder index `m` (the symbol `m` when symbolic).
pub fn a2_value(m: &ParamRat) -> ParamRat {
    scalar("hbar^2/2*(2*m + mu1 + mu2 + 1)^2 - hbar^2/2*(mu1^2 + mu2^2) + hbar^2/4")
        .substitute(&[(Symbol::M, m.clone())])
        .expect("polynomial")
}

/// Six-factor form of the `(A1, B1)` structure function after substituting
/// `a2bar` by the `A2` eigenvalue at index `m` (symbol) and `t = v + y`.
pub fn a1b1_six_factors() -> FactorForm {
    // written in y, then y = t − v
    let y = &ParamRat::var(Symbol::T) - &a1b1_offset();
    let f = |s: &str| scalar(s).substitute(&[(Symbol::T, y.clone())]).expect("polynomial");
    FactorForm {
        constant: scalar("3*2^24*hbar^20"),
        factors: [
            "t - m",
            "1 + m + t + mu1 + mu2",
            "t - m + mu3",
            "1 + m + t + mu1 + mu2 + mu3",
            "2*hbar^2*mu^2 + (1 + 4*t + 2*mu1 + 2*mu2 + 2*mu3)^2*E",
            "2*hbar^2*mu^2 + (3 + 4*t + 2*mu1 + 2*mu2 + 2*mu3)^2*E",
        ]
        .iter()
        .map(|s| f(s))
        .collect(),
    }
}

/// Class I product in `x` (the symbol `t`) for dimension `p + 1`.
pub fn class_one_product(p: i64) -> ParamRat {
    scalar(
        "3*hbar^20*2^28*t*(p - t + 1)*(t + mu1)*(t + mu2)*(t + mu1 + mu2)*(p - t + mu3 + 1)
         *(p + t + mu1 + mu2 + 1)*(p + t + mu1 + mu2 + mu3 + 1)"
            .replace('p', &format!("({p})"))
            .as_str(),
    )
}

/// Class II product in `x` (the symbol `t`), with the printed `(x − μ3)`
/// factor when `printed`, else the derived `(x + μ3)`.
pub fn class_two_product(p: i64, printed: bool) -> ParamRat {
    let sign = if printed { "-" } else { "+" };
    scalar(
        &"3*hbar^20*2^28*t*(p - t + 1)*(p - t + mu1 + 1)*(p - t + mu2 + 1)*(2*p - t + mu1 + mu2 + 2)
          *(p - t + mu1 + mu2 + 1)*(t S mu3)*(2*p - t + mu1 + mu2 + mu3 + 2)"
            .replace('p', &format!("({p})"))
            .replace('S', sign),
    )
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RepresentationSolution {
    pub p: u32,
    #[serde(serialize_with = "display")]
    pub u: ParamRat,
    /// The symbol fixed by the boundary conditions and its value.
    #[serde(serialize_with = "display_pair")]
    pub constrained_symbol: Option<(Symbol, ParamRat)>,
    /// `Φ(u + x)` at the sample point for `x = 1..p`, all positive.
    #[serde(serialize_with = "display_list")]
    pub positivity_certificate: Vec<Rational>,
    /// Indices of the factors vanishing at `t = u` and `t = u + p + 1`.
    pub factors: (usize, usize),
}

fn display<S: serde::Serializer, T: std::fmt::Display>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

fn display_pair<S: serde::Serializer>(v: &Option<(Symbol, ParamRat)>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        None => s.serialize_none(),
        Some((sym, val)) => s.collect_str(&format!("{sym} = {val}")),
    }
}

fn display_list<S: serde::Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|r| r.to_string()))
}

/// Root of a factor that is linear in `t` and free of `s`.
fn t_root(f: &ParamRat, s: Symbol) -> Option<ParamRat> {
    if f.contains(s) || f.den().contains(Symbol::T) {
        return None;
    }
    let c = f.num().coeffs_in(Symbol::T);
    if c.len() != 2 {
        return None;
    }
    let (c0, c1) = (ParamRat::from_poly(c[0].clone()), ParamRat::from_poly(c[1].clone()));
    (-&c0).checked_div(&c1).ok()
}

/// Root in `s` of a factor that is linear in `s` once `t` is fixed.
fn s_root(f: &ParamRat, t: &ParamRat, s: Symbol) -> Option<ParamRat> {
    let g = f.substitute(&[(Symbol::T, t.clone())]).ok()?;
    if g.den().contains(s) {
        return None;
    }
    let c = g.num().coeffs_in(s);
    if c.len() != 2 {
        return None;
    }
    let (c0, c1) = (ParamRat::from_poly(c[0].clone()), ParamRat::from_poly(c[1].clone()));
    (-&c0).checked_div(&c1).ok()
}

/// Finds `(u, s)` with `Φ(u) = Φ(u + p + 1) = 0` by pairing one factor
/// vanishing at each end, then keeps the pairs with `Φ(u + x) > 0` for
/// `x = 1..p` at the sample point. `phi` must equal the factor product.
pub fn solve_representation(
    phi: &StructureFunction,
    form: &FactorForm,
    p: u32,
    s: Symbol,
    sample: &[(Symbol, GaussRational)],
) -> Result<Vec<RepresentationSolution>, RepError> {
    if phi.phi != form.expand() {
        return Err(RepError::FactorMismatch);
    }
    let shift = ParamRat::from_int(p as i64 + 1);
    let n = form.factors.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    let mut found: Vec<RepresentationSolution> = pairs
        .par_iter()
        .filter_map(|&(i, j)| {
            let (fi, fj) = (&form.factors[i], &form.factors[j]);
            let (u, fixed) = if let Some(u) = t_root(fi, s) {
                let top = &u + &shift;
                match s_root(fj, &top, s) {
                    Some(v) => (u, Some((s, v))),
                    None if fj.substitute(&[(Symbol::T, top)]).ok()?.is_zero() => (u, None),
                    None => return None,
                }
            } else if let Some(w) = t_root(fj, s) {
                let u = &w - &shift;
                (u.clone(), Some((s, s_root(fi, &u, s)?)))
            } else {
                return None;
            };
            let bind: Vec<(Symbol, ParamRat)> = fixed.iter().cloned().collect();
            let at = |t: &ParamRat| phi.phi.substitute(&[(Symbol::T, t.clone())]).and_then(|v| v.substitute(&bind));
            if !at(&u).ok()?.is_zero() || !at(&(&u + &shift)).ok()?.is_zero() {
                return None;
            }
            let mut cert = Vec::with_capacity(p as usize);
            for x in 1..=p as i64 {
                let v = at(&(&u + &ParamRat::from_int(x))).ok()?.evaluate(sample).ok()?;
                if !v.is_real() || v.re.signum() <= 0 {
                    return None;
                }
                cert.push(v.re);
            }
            Some(RepresentationSolution {
                p,
                u,
                constrained_symbol: fixed,
                positivity_certificate: cert,
                factors: (i, j),
            })
        })
        .collect();
    // Same (u, value) from different factor pairs: keep the first pair.
    let mut out: Vec<RepresentationSolution> = Vec::new();
    found.sort_by_key(|r| r.factors);
    for r in found {
        if !out.iter().any(|o| o.u == r.u && o.constrained_symbol == r.constrained_symbol) {
            out.push(r);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_coefficients_give_zero_phi() {
        let z = ParamRat::zero();
        let c = QuadraticAlgebraCoeffs {
            alpha: z.clone(),
            beta: z.clone(),
            gamma: ParamRat::var(Symbol::Hbar),
            a: z.clone(),
            delta: z.clone(),
            epsilon: z.clone(),
            zeta: z.clone(),
            d: z.clone(),
            z: z.clone(),
        };
        assert!(structure_poly(&c, &z).unwrap().phi.is_zero());
        let mut bad = c.clone();
        bad.beta = ParamRat::one();
        assert!(matches!(structure_poly(&bad, &z), Err(RepError::Unsupported(_))));
    }

    #[test]
    fn ladder_examples() {
        let mut c = QuadraticAlgebraCoeffs::a2b2();
        c.epsilon = ParamRat::zero();
        assert!(ladder_value(&c, &ParamRat::ratio(1, 2), 0).unwrap().is_zero());
        // ladder symmetry in u + x
        let c = QuadraticAlgebraCoeffs::a2b2();
        let u = scalar("mu1/3");
        assert_eq!(ladder_value(&c, &u, 2).unwrap(), ladder_value(&c, &(&u + &ParamRat::from_int(1)), 1).unwrap());
    }

    #[test]
    fn expansion_in_energy() {
        let e = QuadraticAlgebraCoeffs::a1b1().expansion(Symbol::E).unwrap();
        let d = &e.iter().find(|(n, _)| *n == "d").unwrap().1;
        assert_eq!(d.len(), 3);
        assert!(d[0].is_zero() && d[1].is_zero());
        let delta = &e.iter().find(|(n, _)| *n == "delta").unwrap().1;
        assert_eq!(delta[0], scalar("-4*hbar^6*mu^2"));
    }

    #[test]
    fn central_monomial_count() {
        assert_eq!(central_monomials(&[Symbol::E, Symbol::A2bar], 4).len(), 15);
        assert_eq!(central_monomials(&[Symbol::A1bar], 4).len(), 5);
    }
}
