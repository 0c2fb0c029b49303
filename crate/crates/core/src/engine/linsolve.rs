//! Exact fitting of `target = Σ c_j basis_j` with `c_j ∈ ℚ(i)(ħ, μ, μ1, μ2, μ3)`.
//!
//! Normal-form coefficients are brought to a common denominator per
//! derivative index; since `a + b·r = 0` forces `a = b = 0`, matching
//! coefficients of each coordinate monomial in `a` and `b` gives one linear
//! equation over the parameter field. A random specialization in GF(p²)
//! picks pivot rows and independent columns, the pivot subsystem is solved
//! exactly over the parameter field, and the candidate is checked by exact
//! operator arithmetic.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::modp::{Fp2, PointEval, P};
use crate::operator::{DerivIndex, OperatorExpr, SpatialCoeff};
use crate::scalar::{Monomial, ParamRat, Poly, Symbol};

/// Sparse equation: `(column, coefficient)`; the target is column `n`.
type Row = Vec<(usize, Poly)>;

pub(crate) struct System {
    n: usize,
    rows: Vec<Row>,
}

impl System {
    pub fn build(target: &OperatorExpr, basis: &[&OperatorExpr]) -> System {
        let n = basis.len();
        let mut idx: BTreeSet<DerivIndex> = target.terms().map(|(k, _)| *k).collect();
        for b in basis {
            idx.extend(b.terms().map(|(k, _)| *k));
        }
        let idx: Vec<DerivIndex> = idx.into_iter().collect();
        let per_index: Vec<Vec<Row>> = idx
            .par_iter()
            .map(|&k| {
                let coeffs: Vec<SpatialCoeff> =
                    basis.iter().map(|b| b.coeff(k)).chain(std::iter::once(target.coeff(k))).collect();
                let refs: Vec<&SpatialCoeff> = coeffs.iter().collect();
                let (_, _, _, nums) = SpatialCoeff::common_denominator(&refs);
                let mut rows: std::collections::BTreeMap<(u8, Monomial), Row> = Default::default();
                for (j, (a, b)) in nums.iter().enumerate() {
                    for (part, poly) in [(0u8, a), (1u8, b)] {
                        if poly.is_zero() {
                            continue;
                        }
                        for (cm, pp) in poly.group_by(|m| m.coord_part()) {
                            rows.entry((part, cm)).or_default().push((j, pp));
                        }
                    }
                }
                rows.into_values().collect()
            })
            .collect();
        let mut rows: Vec<Row> = per_index.into_iter().flatten().collect();
        // Sparse rows first: the pivot rows picked from them stay nearly
        // triangular, which keeps the exact elimination small.
        rows.sort_by_key(|r| (r.iter().filter(|(j, _)| *j < n).count(), r.iter().map(|(_, p)| p.len()).sum::<usize>()));
        System { n, rows }
    }
}

/// Reduced row echelon form over GF(p²), grown one row at a time.
struct Echelon {
    rows: Vec<Vec<Fp2>>,
    pivots: Vec<usize>,
    source: Vec<usize>,
    pivot_of: Vec<Option<usize>>,
}

impl Echelon {
    fn new(width: usize) -> Echelon {
        Echelon { rows: Vec::new(), pivots: Vec::new(), source: Vec::new(), pivot_of: vec![None; width] }
    }

    fn insert(&mut self, mut v: Vec<Fp2>, src: usize) {
        for (r, &c) in self.rows.iter().zip(&self.pivots) {
            let f = v[c];
            if f.is_zero() {
                continue;
            }
            for (x, y) in v.iter_mut().zip(r) {
                *x = x.sub(f.mul(*y));
            }
        }
        let Some(c) = v.iter().position(|x| !x.is_zero()) else { return };
        let k = v[c].inv().expect("nonzero pivot");
        for x in v.iter_mut() {
            *x = x.mul(k);
        }
        for r in self.rows.iter_mut() {
            let f = r[c];
            if f.is_zero() {
                continue;
            }
            for (x, y) in r.iter_mut().zip(&v) {
                *x = x.sub(f.mul(*y));
            }
        }
        self.pivot_of[c] = Some(self.rows.len());
        self.rows.push(v);
        self.pivots.push(c);
        self.source.push(src);
    }

    fn rank(&self) -> usize {
        self.rows.len()
    }
}

fn random_point(rng: &mut ChaCha8Rng) -> [Fp2; Symbol::ALL.len()] {
    let mut v = [Fp2::ZERO; Symbol::ALL.len()];
    for x in v.iter_mut() {
        *x = Fp2 { re: rng.gen_range(1..P), im: rng.gen_range(0..P) };
    }
    v
}

struct Specialized {
    /// Independent basis columns, leftmost-greedy.
    independent: Vec<usize>,
    /// Rows whose span has the rank of the whole system at the point.
    rows: Vec<usize>,
}

fn specialize(sys: &System, seed: u64) -> Option<Specialized> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ev = PointEval::new(random_point(&mut rng));
    let width = sys.n + 1;
    let mut ech = Echelon::new(width);
    for (ri, row) in sys.rows.iter().enumerate() {
        let mut v = vec![Fp2::ZERO; width];
        for (j, p) in row {
            v[*j] = ev.poly(p)?;
        }
        ech.insert(v, ri);
        // All unknowns determined and the target already inconsistent: nothing
        // left to learn from further rows.
        if ech.rank() == width {
            break;
        }
        if ech.rank() == sys.n && ech.pivot_of[sys.n].is_none() {
            break;
        }
    }
    let independent: Vec<usize> = (0..sys.n).filter(|&c| ech.pivot_of[c].is_some()).collect();
    Some(Specialized { independent, rows: ech.source.clone() })
}

enum Exact {
    Solution(Vec<ParamRat>),
    Inconsistent,
    Singular,
}

fn weight(q: &ParamRat) -> usize {
    q.num().len() + q.den().len()
}

/// Gauss–Jordan over the parameter field on the chosen rows and columns.
fn exact_solve(sys: &System, rows: &[usize], cols: &[usize]) -> Exact {
    let m = cols.len();
    let col_pos = |j: usize| if j == sys.n { Some(m) } else { cols.iter().position(|&c| c == j) };
    let mut mat: Vec<Vec<ParamRat>> = rows
        .iter()
        .map(|&ri| {
            let mut v = vec![ParamRat::zero(); m + 1];
            for (j, p) in &sys.rows[ri] {
                if let Some(k) = col_pos(*j) {
                    v[k] = ParamRat::from_poly(p.clone());
                }
            }
            v
        })
        .collect();
    let mut done = vec![false; mat.len()];
    let mut pivot_row = vec![0usize; m];
    for k in 0..m {
        let pick = (0..mat.len())
            .filter(|&r| !done[r] && !mat[r][k].is_zero())
            .min_by_key(|&r| (weight(&mat[r][k]), mat[r].iter().filter(|x| !x.is_zero()).count()));
        let Some(pr) = pick else { return Exact::Singular };
        done[pr] = true;
        pivot_row[k] = pr;
        let inv = mat[pr][k].recip().expect("nonzero pivot");
        let prow: Vec<ParamRat> = mat[pr].iter().map(|x| if x.is_zero() { x.clone() } else { x * &inv }).collect();
        mat[pr] = prow.clone();
        let nz: Vec<usize> = (k..=m).filter(|&c| !prow[c].is_zero()).collect();
        mat.par_iter_mut().enumerate().filter(|(r, _)| *r != pr).for_each(|(_, row)| {
            let f = row[k].clone();
            if f.is_zero() {
                return;
            }
            for &c in &nz {
                row[c] = &row[c] - &(&f * &prow[c]);
            }
        });
    }
    if (0..mat.len()).any(|r| !done[r] && !mat[r][m].is_zero()) {
        return Exact::Inconsistent;
    }
    Exact::Solution((0..m).map(|k| mat[pivot_row[k]][m].clone()).collect())
}

#[derive(Clone, Debug)]
pub enum LinearFit {
    /// One coefficient per basis entry; dropped (dependent) entries get 0.
    Solved { coeffs: Vec<ParamRat>, dropped: Vec<usize> },
    /// No combination of the kept columns reproduces the target. `certified`
    /// is true when every dropped column was shown exactly to lie in the
    /// span of the kept ones, so the statement is about the full span.
    NoSolution { dropped: Vec<usize>, certified: bool, residual: Option<OperatorExpr> },
    /// The basis is linearly dependent; `dimension` is the dimension of the
    /// solution space (kernel of the basis map).
    Underdetermined { dimension: usize, dependent: Vec<usize> },
}

/// Exact check that each dropped column is a combination of the kept ones.
fn spans_dropped(basis: &[&OperatorExpr], kept: &[usize], dropped: &[usize]) -> bool {
    let kept_ops: Vec<&OperatorExpr> = kept.iter().map(|&k| basis[k]).collect();
    dropped.par_iter().all(|&d| matches!(fit_linear(basis[d], &kept_ops, false), LinearFit::Solved { .. }))
}

const SEEDS: [u64; 4] = [0x5eed_0001, 0x5eed_0002, 0x5eed_0003, 0x5eed_0004];

/// Solves `target = Σ c_j basis_j`. With `prune`, dependent basis entries
/// are dropped (later entries first) instead of reporting an
/// underdetermined system.
pub fn fit_linear(target: &OperatorExpr, basis: &[&OperatorExpr], prune: bool) -> LinearFit {
    let n = basis.len();
    if n == 0 {
        return if target.is_zero() {
            LinearFit::Solved { coeffs: vec![], dropped: vec![] }
        } else {
            LinearFit::NoSolution { dropped: vec![], certified: true, residual: Some(target.clone()) }
        };
    }
    let sys = System::build(target, basis);
    for &seed in &SEEDS {
        let Some(sp) = specialize(&sys, seed) else { continue };
        let dropped: Vec<usize> = (0..n).filter(|c| !sp.independent.contains(c)).collect();
        if !dropped.is_empty() && !prune {
            return LinearFit::Underdetermined { dimension: dropped.len(), dependent: dropped };
        }
        match exact_solve(&sys, &sp.rows, &sp.independent) {
            Exact::Singular => continue,
            Exact::Inconsistent => {
                let certified = spans_dropped(basis, &sp.independent, &dropped);
                return LinearFit::NoSolution { dropped, certified, residual: None };
            }
            Exact::Solution(sol) => {
                let mut coeffs = vec![ParamRat::zero(); n];
                for (k, &c) in sp.independent.iter().enumerate() {
                    coeffs[c] = sol[k].clone();
                }
                let items: Vec<(ParamRat, &OperatorExpr)> =
                    coeffs.iter().cloned().zip(basis.iter().copied()).filter(|(c, _)| !c.is_zero()).collect();
                let residual = target.sub(&OperatorExpr::linear_combination(&items));
                if residual.is_zero() {
                    return LinearFit::Solved { coeffs, dropped };
                }
                // The kept columns are independent on the pivot rows, so this
                // was the only candidate.
                let certified = spans_dropped(basis, &sp.independent, &dropped);
                return LinearFit::NoSolution { dropped, certified, residual: Some(residual) };
            }
        }
    }
    // Every point was degenerate; report the weakest honest statement.
    LinearFit::NoSolution { dropped: vec![], certified: false, residual: None }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Symbol;

    fn h() -> ParamRat {
        ParamRat::var(Symbol::Hbar)
    }

    #[test]
    fn recovers_known_combination() {
        let x = OperatorExpr::coord(Symbol::X);
        let px = OperatorExpr::momentum(Symbol::X, &h());
        let xp = x.compose(&px);
        let px2 = px.compose(&px);
        let mu = ParamRat::var(Symbol::Mu);
        let target = OperatorExpr::linear_combination(&[(mu.clone(), &xp), (&h() * &h(), &px2)])
            .add(&OperatorExpr::scalar(&ParamRat::from_int(3)));
        let one = OperatorExpr::identity();
        let LinearFit::Solved { coeffs, dropped } = fit_linear(&target, &[&px2, &one, &xp], false) else {
            panic!("expected a solution")
        };
        assert!(dropped.is_empty());
        assert_eq!(coeffs, vec![&h() * &h(), ParamRat::from_int(3), mu]);
    }

    #[test]
    fn canonical_commutator_outside_span() {
        let x = OperatorExpr::coord(Symbol::X);
        let px = OperatorExpr::momentum(Symbol::X, &h());
        let lhs = px.commutator(&x);
        match fit_linear(&lhs, &[&x], false) {
            LinearFit::NoSolution { certified, .. } => assert!(certified),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn dependent_basis() {
        let x = OperatorExpr::coord(Symbol::X);
        let two_x = x.scale(&ParamRat::from_int(2));
        let y = OperatorExpr::coord(Symbol::Y);
        let target = x.add(&y);
        match fit_linear(&target, &[&x, &two_x, &y], false) {
            LinearFit::Underdetermined { dimension, dependent } => {
                assert_eq!(dimension, 1);
                assert_eq!(dependent, vec![1]);
            }
            other => panic!("unexpected {other:?}"),
        }
        let LinearFit::Solved { coeffs, dropped } = fit_linear(&target, &[&x, &two_x, &y], true) else { panic!() };
        assert_eq!(dropped, vec![1]);
        assert_eq!(coeffs, vec![ParamRat::one(), ParamRat::zero(), ParamRat::one()]);
    }
}
