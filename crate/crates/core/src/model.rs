//! Hamiltonian and integrals of motion of the nondegenerate Kepler-Coulomb
//! system as exact differential operators.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::operator::{OperatorExpr, SpatialCoeff};
use crate::scalar::{ParamRat, Rational, ScalarError, Symbol};

/// Values (or symbols) for ħ, μ, μ1, μ2, μ3.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelParams {
    pub hbar: ParamRat,
    pub mu: ParamRat,
    pub mu1: ParamRat,
    pub mu2: ParamRat,
    pub mu3: ParamRat,
}

impl ModelParams {
    pub fn symbolic() -> ModelParams {
        ModelParams {
            hbar: ParamRat::var(Symbol::Hbar),
            mu: ParamRat::var(Symbol::Mu),
            mu1: ParamRat::var(Symbol::Mu1),
            mu2: ParamRat::var(Symbol::Mu2),
            mu3: ParamRat::var(Symbol::Mu3),
        }
    }

    /// Exact rational parameters; ħ must be nonzero.
    pub fn rational(
        hbar: Rational,
        mu: Rational,
        mu1: Rational,
        mu2: Rational,
        mu3: Rational,
    ) -> Result<ModelParams, ScalarError> {
        if hbar.is_zero() {
            return Err(ScalarError::ZeroDenominator);
        }
        Ok(ModelParams { hbar: hbar.into(), mu: mu.into(), mu1: mu1.into(), mu2: mu2.into(), mu3: mu3.into() })
    }

    /// Bindings that turn the symbolic parameters into these values.
    pub fn bindings(&self) -> Vec<(Symbol, ParamRat)> {
        vec![
            (Symbol::Hbar, self.hbar.clone()),
            (Symbol::Mu, self.mu.clone()),
            (Symbol::Mu1, self.mu1.clone()),
            (Symbol::Mu2, self.mu2.clone()),
            (Symbol::Mu3, self.mu3.clone()),
        ]
    }

    pub fn is_symbolic(&self) -> bool {
        *self == ModelParams::symbolic()
    }

    /// `ħ²(4μi² − 1)/8`, the centrifugal coefficient for axis `i` (1-based).
    pub fn centrifugal(&self, i: usize) -> ParamRat {
        let m = match i {
            1 => &self.mu1,
            2 => &self.mu2,
            3 => &self.mu3,
            _ => panic!("axis index out of range"),
        };
        let k = &(&m.pow(2) * &ParamRat::from_int(4)) - &ParamRat::one();
        &(&self.hbar.pow(2) * &k) * &ParamRat::ratio(1, 8)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum IntegralName {
    H,
    A1,
    A2,
    B2,
    B1,
    F,
    J1,
    J2,
    J3,
    TotalJ,
    Px,
    Py,
    Pz,
}

impl IntegralName {
    pub const ALL: [IntegralName; 13] = [
        IntegralName::H,
        IntegralName::A1,
        IntegralName::A2,
        IntegralName::B2,
        IntegralName::B1,
        IntegralName::F,
        IntegralName::J1,
        IntegralName::J2,
        IntegralName::J3,
        IntegralName::TotalJ,
        IntegralName::Px,
        IntegralName::Py,
        IntegralName::Pz,
    ];

    /// The six generators of the ternary algebra.
    pub const GENERATORS: [IntegralName; 6] =
        [IntegralName::H, IntegralName::A1, IntegralName::A2, IntegralName::B2, IntegralName::B1, IntegralName::F];

    pub fn name(self) -> &'static str {
        match self {
            IntegralName::H => "H",
            IntegralName::A1 => "A1",
            IntegralName::A2 => "A2",
            IntegralName::B2 => "B2",
            IntegralName::B1 => "B1",
            IntegralName::F => "F",
            IntegralName::J1 => "J1",
            IntegralName::J2 => "J2",
            IntegralName::J3 => "J3",
            IntegralName::TotalJ => "TotalJ",
            IntegralName::Px => "Px",
            IntegralName::Py => "Py",
            IntegralName::Pz => "Pz",
        }
    }

    /// Power of ħ carried by the operator.
    pub fn hbar_degree(self) -> i32 {
        match self {
            IntegralName::B1 | IntegralName::F => 4,
            IntegralName::J1
            | IntegralName::J2
            | IntegralName::J3
            | IntegralName::Px
            | IntegralName::Py
            | IntegralName::Pz => 1,
            _ => 2,
        }
    }

    /// Weight under `x → λx` (μ has weight −1).
    pub fn length_degree(self) -> i32 {
        match self {
            IntegralName::H | IntegralName::B1 | IntegralName::F => -2,
            IntegralName::Px | IntegralName::Py | IntegralName::Pz => -1,
            _ => 0,
        }
    }
}

impl fmt::Display for IntegralName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for IntegralName {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        IntegralName::ALL.iter().copied().find(|n| n.name() == s).ok_or_else(|| format!("unknown integral `{s}`"))
    }
}

/// Which axis parameter appears in the trailing `5ħ⁴(4μ²−1)/(16z²)` term of B1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum B1Variant {
    /// `μ1`, as printed.
    Mu1,
    /// `μ3`, matching the `z²` denominator.
    Mu3,
}

impl B1Variant {
    pub fn name(self) -> &'static str {
        match self {
            B1Variant::Mu1 => "mu1",
            B1Variant::Mu3 => "mu3",
        }
    }
}

fn mul(c: SpatialCoeff) -> OperatorExpr {
    OperatorExpr::multiplication(c)
}

/// `k / v²` for a coordinate `v`.
fn over_sq(k: &ParamRat, v: Symbol) -> SpatialCoeff {
    let inv = match v {
        Symbol::X => SpatialCoeff::inverse_monomial(2, 0, 0, 0),
        Symbol::Y => SpatialCoeff::inverse_monomial(0, 2, 0, 0),
        Symbol::Z => SpatialCoeff::inverse_monomial(0, 0, 2, 0),
        _ => unreachable!(),
    };
    inv.mul_param(k)
}

fn sq(v: Symbol) -> SpatialCoeff {
    SpatialCoeff::coord(v).mul(&SpatialCoeff::coord(v))
}

/// `1/r = r / s`.
fn inv_r() -> SpatialCoeff {
    SpatialCoeff::r().mul(&SpatialCoeff::inverse_monomial(0, 0, 0, 1))
}

fn half() -> ParamRat {
    ParamRat::ratio(1, 2)
}

/// Builder for all operators at one parameter point.
pub struct Builder<'a> {
    p: &'a ModelParams,
}

impl<'a> Builder<'a> {
    pub fn new(p: &'a ModelParams) -> Builder<'a> {
        Builder { p }
    }

    fn momentum(&self, v: Symbol) -> OperatorExpr {
        OperatorExpr::momentum(v, &self.p.hbar)
    }

    /// `iħ(a ∂b − b ∂a)`.
    fn angular(&self, a: Symbol, b: Symbol) -> OperatorExpr {
        let ih = &ParamRat::i() * &self.p.hbar;
        let t = OperatorExpr::coord(a)
            .compose(&OperatorExpr::partial(b))
            .sub(&OperatorExpr::coord(b).compose(&OperatorExpr::partial(a)));
        t.scale(&ih)
    }

    pub fn j1(&self) -> OperatorExpr {
        self.angular(Symbol::Z, Symbol::Y)
    }

    pub fn j2(&self) -> OperatorExpr {
        self.angular(Symbol::X, Symbol::Z)
    }

    pub fn j3(&self) -> OperatorExpr {
        self.angular(Symbol::Y, Symbol::X)
    }

    pub fn total_j(&self) -> OperatorExpr {
        let (j1, j2, j3) = (self.j1(), self.j2(), self.j3());
        OperatorExpr::sum([&j1.compose(&j1), &j2.compose(&j2), &j3.compose(&j3)])
    }

    /// `V = −ħ²μ/(2r) + Σ ħ²(4μi²−1)/(8 x_i²)`.
    pub fn potential_coeff(&self) -> SpatialCoeff {
        self.potential(&half())
    }

    /// `−k ħ²μ/r + Σ ħ²(4μi²−1)/(8 x_i²)`.
    fn potential(&self, k: &ParamRat) -> SpatialCoeff {
        let h2mu = &self.p.hbar.pow(2) * &self.p.mu;
        let coulomb = inv_r().mul_param(&(-&(&h2mu * k)));
        coulomb
            .add(&over_sq(&self.p.centrifugal(1), Symbol::X))
            .add(&over_sq(&self.p.centrifugal(2), Symbol::Y))
            .add(&over_sq(&self.p.centrifugal(3), Symbol::Z))
    }

    pub fn hamiltonian(&self) -> OperatorExpr {
        let lap = OperatorExpr::term([2, 0, 0], SpatialCoeff::one())
            .add(&OperatorExpr::term([0, 2, 0], SpatialCoeff::one()))
            .add(&OperatorExpr::term([0, 0, 2], SpatialCoeff::one()));
        let kinetic = lap.scale(&(-&(&self.p.hbar.pow(2) * &half())));
        kinetic.add(&mul(self.potential(&ParamRat::one())))
    }

    pub fn a1(&self) -> OperatorExpr {
        let p = self.p;
        let pot = over_sq(&p.centrifugal(1), Symbol::X)
            .mul(&sq(Symbol::Y).add(&sq(Symbol::Z)))
            .add(&over_sq(&p.centrifugal(2), Symbol::Y).mul(&sq(Symbol::X).add(&sq(Symbol::Z))))
            .add(&over_sq(&p.centrifugal(3), Symbol::Z).mul(&sq(Symbol::X).add(&sq(Symbol::Y))));
        self.total_j().scale(&half()).add(&mul(pot))
    }

    pub fn a2(&self) -> OperatorExpr {
        let p = self.p;
        let j3 = self.j3();
        let pot = over_sq(&p.centrifugal(1), Symbol::X)
            .mul(&sq(Symbol::Y))
            .add(&over_sq(&p.centrifugal(2), Symbol::Y).mul(&sq(Symbol::X)));
        j3.compose(&j3).scale(&half()).add(&mul(pot))
    }

    pub fn b2(&self) -> OperatorExpr {
        let p = self.p;
        let j2 = self.j2();
        let pot = over_sq(&p.centrifugal(1), Symbol::X)
            .mul(&sq(Symbol::Z))
            .add(&over_sq(&p.centrifugal(3), Symbol::Z).mul(&sq(Symbol::X)));
        j2.compose(&j2).scale(&half()).add(&mul(pot))
    }

    /// `¼ D²` with `D = {x,px} + {y,py} + {z,pz}`.
    fn quarter_d_squared(&self) -> OperatorExpr {
        let d = OperatorExpr::sum(
            Symbol::COORDS
                .iter()
                .map(|&v| OperatorExpr::coord(v).anticommutator(&self.momentum(v)))
                .collect::<Vec<_>>()
                .iter(),
        );
        d.compose(&d).scale(&ParamRat::ratio(1, 4))
    }

    /// Shared shape of the two quartic integrals:
    /// `(L − 2 v V)² + {¼D², c/v²} + 5ħ⁴(4μk²−1)/(16 v²)`.
    fn quartic(&self, lrl: OperatorExpr, v: Symbol, axis: usize, trailing_axis: usize) -> OperatorExpr {
        let p = self.p;
        let vv = SpatialCoeff::coord(v).mul(&self.potential_coeff()).scale(&crate::scalar::GaussRational::from_int(-2));
        let inner = lrl.add(&mul(vv));
        let square = inner.compose(&inner);
        let cent = mul(over_sq(&p.centrifugal(axis), v));
        let anti = self.quarter_d_squared().anticommutator(&cent);
        // 5ħ⁴(4μk²−1)/16 = (5/2) ħ² · centrifugal(k)
        let trailing = &(&p.hbar.pow(2) * &p.centrifugal(trailing_axis)) * &ParamRat::ratio(5, 2);
        let trailing = mul(over_sq(&trailing, v));
        OperatorExpr::sum([&square, &anti, &trailing])
    }

    pub fn b1(&self, variant: B1Variant) -> OperatorExpr {
        let (j1, j2) = (self.j1(), self.j2());
        let (px, py) = (self.momentum(Symbol::X), self.momentum(Symbol::Y));
        let lrl = j1.anticommutator(&py).sub(&j2.anticommutator(&px)).scale(&half());
        let trailing = match variant {
            B1Variant::Mu1 => 1,
            B1Variant::Mu3 => 3,
        };
        self.quartic(lrl, Symbol::Z, 3, trailing)
    }

    pub fn f(&self) -> OperatorExpr {
        let (j1, j3) = (self.j1(), self.j3());
        let (px, pz) = (self.momentum(Symbol::X), self.momentum(Symbol::Z));
        let lrl = j3.anticommutator(&px).sub(&j1.anticommutator(&pz)).scale(&half());
        self.quartic(lrl, Symbol::Y, 2, 2)
    }

    /// Builds one operator; `B1` uses the given variant.
    pub fn build(&self, name: IntegralName, variant: B1Variant) -> OperatorExpr {
        match name {
            IntegralName::H => self.hamiltonian(),
            IntegralName::A1 => self.a1(),
            IntegralName::A2 => self.a2(),
            IntegralName::B2 => self.b2(),
            IntegralName::B1 => self.b1(variant),
            IntegralName::F => self.f(),
            IntegralName::J1 => self.j1(),
            IntegralName::J2 => self.j2(),
            IntegralName::J3 => self.j3(),
            IntegralName::TotalJ => self.total_j(),
            IntegralName::Px => self.momentum(Symbol::X),
            IntegralName::Py => self.momentum(Symbol::Y),
            IntegralName::Pz => self.momentum(Symbol::Z),
        }
    }
}

/// Outcome of building both B1 candidates and testing `[H, B1] = 0`.
#[derive(Clone, Debug)]
pub struct B1Selection {
    /// The variant whose commutator with H vanishes, if any.
    pub chosen: Option<B1Variant>,
    /// Residual term count of `[H, B1]` per variant.
    pub residual_terms: Vec<(B1Variant, usize)>,
    pub operator: OperatorExpr,
}

pub fn select_b1(p: &ModelParams, h: &OperatorExpr) -> B1Selection {
    let b = Builder::new(p);
    let cands: Vec<(B1Variant, OperatorExpr, usize)> = [B1Variant::Mu1, B1Variant::Mu3]
        .par_iter()
        .map(|&v| {
            let op = b.b1(v);
            let n = h.commutator(&op).term_count();
            (v, op, n)
        })
        .collect();
    let residual_terms = cands.iter().map(|(v, _, n)| (*v, *n)).collect();
    let pick = cands.iter().find(|(_, _, n)| *n == 0);
    let (chosen, operator) = match pick {
        Some((v, op, _)) => (Some(*v), op.clone()),
        // Neither variant commutes: keep the printed one so the failure shows.
        None => (None, cands[0].1.clone()),
    };
    B1Selection { chosen, residual_terms, operator }
}

/// Builds a single operator. For `B1` both variants are built and the one
/// commuting with `H` is returned.
pub fn build_operator(name: IntegralName, p: &ModelParams) -> OperatorExpr {
    let b = Builder::new(p);
    match name {
        IntegralName::B1 => select_b1(p, &b.hamiltonian()).operator,
        _ => b.build(name, B1Variant::Mu1),
    }
}

/// All six generators, built once.
#[derive(Clone, Debug)]
pub struct Model {
    pub params: ModelParams,
    pub h: OperatorExpr,
    pub a1: OperatorExpr,
    pub a2: OperatorExpr,
    pub b2: OperatorExpr,
    pub b1: OperatorExpr,
    pub f: OperatorExpr,
    pub b1_selection: (Option<B1Variant>, Vec<(B1Variant, usize)>),
}

impl Model {
    pub fn build(p: &ModelParams) -> Model {
        let b = Builder::new(p);
        let ops: Vec<OperatorExpr> =
            [IntegralName::H, IntegralName::A1, IntegralName::A2, IntegralName::B2, IntegralName::F]
                .par_iter()
                .map(|&n| b.build(n, B1Variant::Mu1))
                .collect();
        let sel = select_b1(p, &ops[0]);
        let mut it = ops.into_iter();
        Model {
            params: p.clone(),
            h: it.next().unwrap(),
            a1: it.next().unwrap(),
            a2: it.next().unwrap(),
            b2: it.next().unwrap(),
            f: it.next().unwrap(),
            b1: sel.operator,
            b1_selection: (sel.chosen, sel.residual_terms),
        }
    }

    pub fn get(&self, name: IntegralName) -> Option<&OperatorExpr> {
        Some(match name {
            IntegralName::H => &self.h,
            IntegralName::A1 => &self.a1,
            IntegralName::A2 => &self.a2,
            IntegralName::B2 => &self.b2,
            IntegralName::B1 => &self.b1,
            IntegralName::F => &self.f,
            _ => return None,
        })
    }

    /// Name → operator map over the six generators.
    pub fn binding(&self) -> Vec<(String, OperatorExpr)> {
        IntegralName::GENERATORS.iter().map(|&n| (n.name().to_string(), self.get(n).unwrap().clone())).collect()
    }
}

/// One commutator of the zero suite.
#[derive(Clone, Debug)]
pub struct ZeroCheck {
    pub label: String,
    pub residual: OperatorExpr,
}

impl ZeroCheck {
    pub fn is_zero(&self) -> bool {
        self.residual.is_zero()
    }
}

#[derive(Clone, Debug)]
pub struct ZeroSuiteReport {
    pub checks: Vec<ZeroCheck>,
    pub b1_variant: Option<B1Variant>,
    pub b1_residual_terms: Vec<(B1Variant, usize)>,
}

impl ZeroSuiteReport {
    pub fn all_zero(&self) -> bool {
        self.checks.iter().all(|c| c.is_zero())
    }
}

/// The ten commutators expected to vanish.
pub const ZERO_SUITE: [(IntegralName, IntegralName); 10] = [
    (IntegralName::H, IntegralName::A1),
    (IntegralName::H, IntegralName::A2),
    (IntegralName::H, IntegralName::B2),
    (IntegralName::H, IntegralName::B1),
    (IntegralName::H, IntegralName::F),
    (IntegralName::A1, IntegralName::B2),
    (IntegralName::A2, IntegralName::B1),
    (IntegralName::F, IntegralName::B2),
    (IntegralName::A1, IntegralName::A2),
    (IntegralName::B2, IntegralName::A1),
];

pub fn verify_zero_suite_with(model: &Model) -> ZeroSuiteReport {
    let checks = ZERO_SUITE
        .par_iter()
        .map(|&(a, b)| {
            let residual = model.get(a).unwrap().commutator(model.get(b).unwrap());
            ZeroCheck { label: format!("[{a},{b}]"), residual }
        })
        .collect();
    ZeroSuiteReport { checks, b1_variant: model.b1_selection.0, b1_residual_terms: model.b1_selection.1.clone() }
}

pub fn verify_zero_suite(p: &ModelParams) -> ZeroSuiteReport {
    verify_zero_suite_with(&Model::build(p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::GaussRational;

    fn ih() -> ParamRat {
        &ParamRat::i() * &ParamRat::var(Symbol::Hbar)
    }

    #[test]
    fn angular_momentum_algebra() {
        let p = ModelParams::symbolic();
        let b = Builder::new(&p);
        assert_eq!(b.j1().commutator(&b.j2()), b.j3().scale(&ih()));
        assert_eq!(b.j2().commutator(&b.j3()), b.j1().scale(&ih()));
        // J3 x = iħ y
        let got = b.j3().apply(&SpatialCoeff::coord(Symbol::X));
        assert_eq!(got, SpatialCoeff::coord(Symbol::Y).mul_param(&ih()));
    }

    #[test]
    fn hamiltonian_reduces_to_coulomb() {
        let half = Rational::new(1, 2);
        let p = ModelParams::rational(Rational::ONE, Rational::ONE, half.clone(), half.clone(), half).unwrap();
        let h = Builder::new(&p).hamiltonian();
        let lap = OperatorExpr::term([2, 0, 0], SpatialCoeff::one())
            .add(&OperatorExpr::term([0, 2, 0], SpatialCoeff::one()))
            .add(&OperatorExpr::term([0, 0, 2], SpatialCoeff::one()))
            .scale_const(&GaussRational::ratio(-1, 2));
        let want = lap.add(&OperatorExpr::multiplication(inv_r().scale(&GaussRational::from_int(-1))));
        assert_eq!(h, want);
    }

    #[test]
    fn orders_and_angular_part() {
        let p = ModelParams::symbolic();
        let b = Builder::new(&p);
        assert_eq!(b.hamiltonian().order(), 2);
        assert_eq!(b.a1().order(), 2);
        let rest = b.a1().sub(&b.total_j().scale(&half()));
        assert_eq!(rest.order(), 0);
        assert_eq!(b.b1(B1Variant::Mu3).order(), 4);
        assert_eq!(b.f().order(), 4);
    }

    #[test]
    fn build_commutes_with_substitution() {
        let sym = ModelParams::symbolic();
        let p = ModelParams::rational(
            Rational::new(2, 3),
            Rational::new(5, 7),
            Rational::new(1, 3),
            Rational::new(3, 2),
            Rational::new(-2, 5),
        )
        .unwrap();
        for name in [IntegralName::A1, IntegralName::A2, IntegralName::H, IntegralName::F] {
            let a = Builder::new(&sym).build(name, B1Variant::Mu3).substitute_params(&p.bindings()).unwrap();
            let b = Builder::new(&p).build(name, B1Variant::Mu3);
            assert_eq!(a, b, "{name}");
        }
    }
}
