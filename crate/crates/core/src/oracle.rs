//! Finite-difference check of the spectrum on the separated radial equation
//!
//! ```text
//! −(ħ²/2) u'' + (ħ² J(J+1) / (2r²) − ħ²μ / r) u = E u,   u(0) = u(r_max) = 0
//! ```
//!
//! The three-point Laplacian on a uniform grid gives a symmetric tridiagonal
//! matrix; its lowest eigenvalues are found by Sturm-count bisection on two
//! grids (spacing h and h/2) and combined by Richardson extrapolation.
//! Nothing here reads the algebraic energies except [`compare_spectra`].

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::scalar::Rational;
use crate::spectrum::{exact, SpectrumError, SpectrumTable};

pub const MAX_GRID: usize = 20_000;
pub const DEFAULT_TOLERANCE: f64 = 1e-3;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("invalid radial problem: {0}")]
    Invalid(String),
    #[error("grid too coarse: level {level} moved by {change:.3e} (relative) under refinement")]
    Unresolved { level: usize, change: f64 },
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RadialProblem {
    pub jq: Rational,
    pub mu: Rational,
    pub hbar: Rational,
    pub r_max: Rational,
    /// Interior points of the fine grid; the coarse grid has `(n - 1)/2`.
    pub n: usize,
}

impl RadialProblem {
    /// Box sized for the `k`-th level: `r_max = 40 (k + J)² / μ`, where the
    /// level index counts from 1.
    pub fn for_level(jq: Rational, mu: Rational, hbar: Rational, k: usize, n: usize) -> RadialProblem {
        let reach = &Rational::from_int(k as i64) + &jq;
        let r_max = &(&Rational::from_int(40) * &reach.pow(2)) / &mu;
        RadialProblem { jq, mu, hbar, r_max, n }
    }

    fn check(&self) -> Result<(), OracleError> {
        if self.n < 3 || self.n > MAX_GRID {
            return Err(OracleError::Invalid(format!("grid size {} outside 3..={MAX_GRID}", self.n)));
        }
        if self.r_max.signum() <= 0 || self.jq.signum() < 0 || self.hbar.is_zero() {
            return Err(OracleError::Invalid("need r_max > 0, J ≥ 0, ħ ≠ 0".into()));
        }
        Ok(())
    }
}

/// Symmetric tridiagonal matrix: diagonal and the constant off-diagonal.
struct Tridiagonal {
    diag: Vec<f64>,
    off: f64,
}

impl Tridiagonal {
    fn radial(rp: &RadialProblem, n: usize) -> Tridiagonal {
        let (hbar, mu, j, r_max) = (rp.hbar.to_f64(), rp.mu.to_f64(), rp.jq.to_f64(), rp.r_max.to_f64());
        let h = r_max / (n + 1) as f64;
        let kinetic = hbar * hbar / (h * h);
        let cent = hbar * hbar * j * (j + 1.0) / 2.0;
        let coul = hbar * hbar * mu;
        let diag = (1..=n)
            .map(|i| {
                let r = i as f64 * h;
                kinetic + cent / (r * r) - coul / r
            })
            .collect();
        Tridiagonal { diag, off: -kinetic / 2.0 }
    }

    /// Number of eigenvalues below `x`.
    fn count_below(&self, x: f64) -> usize {
        let b2 = self.off * self.off;
        let mut count = 0;
        let mut d = 1.0;
        for (i, a) in self.diag.iter().enumerate() {
            d = if i == 0 { a - x } else { (a - x) - b2 / d };
            if d == 0.0 {
                d = -f64::EPSILON * (a.abs() + self.off.abs());
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn bounds(&self) -> (f64, f64) {
        let r = 2.0 * self.off.abs();
        let lo = self.diag.iter().fold(f64::INFINITY, |m, a| m.min(a - r));
        let hi = self.diag.iter().fold(f64::NEG_INFINITY, |m, a| m.max(a + r));
        (lo, hi)
    }

    /// The `k`-th smallest eigenvalue (from 0).
    fn eigenvalue(&self, k: usize) -> f64 {
        let (mut lo, mut hi) = self.bounds();
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Lowest `k` eigenvalues on one grid.
pub fn grid_levels(rp: &RadialProblem, n: usize, k: usize) -> Vec<f64> {
    let t = Tridiagonal::radial(rp, n);
    (0..k).into_par_iter().map(|i| t.eigenvalue(i)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RadialLevels {
    pub coarse: Vec<f64>,
    pub fine: Vec<f64>,
    pub extrapolated: Vec<f64>,
}

/// Lowest `k` levels with Richardson extrapolation `(4 E(h/2) − E(h)) / 3`.
/// Fails when extrapolation moves a level by more than `tolerance`
/// (relative), which means the coarse grid does not resolve it.
pub fn radial_levels(rp: &RadialProblem, k: usize, tolerance: f64) -> Result<RadialLevels, OracleError> {
    rp.check()?;
    if k == 0 {
        return Err(OracleError::Invalid("k must be at least 1".into()));
    }
    let coarse_n = (rp.n - 1) / 2;
    if coarse_n < k {
        return Err(OracleError::Invalid(format!("{} points cannot hold {k} levels", rp.n)));
    }
    // h_fine = r_max/(2 coarse_n + 2) = h_coarse / 2
    let fine_n = 2 * coarse_n + 1;
    let (coarse, fine) = rayon::join(|| grid_levels(rp, coarse_n, k), || grid_levels(rp, fine_n, k));
    let extrapolated: Vec<f64> = coarse.iter().zip(&fine).map(|(c, f)| (4.0 * f - c) / 3.0).collect();
    for (level, (e, f)) in extrapolated.iter().zip(&fine).enumerate() {
        let change = ((e - f) / e).abs();
        if change > tolerance {
            return Err(OracleError::Unresolved { level, change });
        }
    }
    Ok(RadialLevels { coarse, fine, extrapolated })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Grid {
    #[serde(rename = "N")]
    pub n: usize,
    pub r_max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Comparison {
    pub n: u64,
    #[serde(rename = "E_algebraic")]
    pub e_algebraic: f64,
    #[serde(rename = "E_oracle")]
    pub e_oracle: f64,
    pub rel_diff: f64,
    pub grid: Grid,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub rows: Vec<Comparison>,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleSettings {
    pub grid: usize,
    pub tolerance: f64,
}

impl Default for OracleSettings {
    fn default() -> Self {
        OracleSettings { grid: MAX_GRID - 1, tolerance: DEFAULT_TOLERANCE }
    }
}

/// Matches row `n` with level `n` of the radial problem at the row's `J`
/// (the witness `p = 0` leaves all of `n` to the radial quantum number).
pub fn compare_spectra(table: &SpectrumTable, s: OracleSettings) -> Result<ComparisonReport, OracleError> {
    let p = &table.params;
    let (hbar, mu) = (exact(&p.hbar)?, exact(&p.mu)?);
    let rows = table
        .rows
        .par_iter()
        .map(|row| {
            let jq = exact(&row.jq)?;
            let level = row.n as usize;
            let rp = RadialProblem::for_level(jq, mu.clone(), hbar.clone(), level + 1, s.grid);
            let lv = radial_levels(&rp, level + 1, s.tolerance)?;
            let e_oracle = lv.extrapolated[level];
            let e_algebraic = exact(&row.energy)?.to_f64();
            Ok(Comparison {
                n: row.n,
                e_algebraic,
                e_oracle,
                rel_diff: ((e_oracle - e_algebraic) / e_algebraic).abs(),
                grid: Grid { n: rp.n, r_max: rp.r_max.to_f64() },
            })
        })
        .collect::<Result<Vec<_>, OracleError>>()?;
    let pass = rows.iter().all(|r| r.rel_diff <= s.tolerance);
    Ok(ComparisonReport { rows, tolerance: s.tolerance, pass })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hydrogen(jq: i64, k: usize, n: usize) -> RadialProblem {
        RadialProblem::for_level(Rational::from_int(jq), Rational::ONE, Rational::ONE, k, n)
    }

    #[test]
    fn hydrogen_s_levels() {
        let lv = radial_levels(&hydrogen(0, 2, 8001), 2, 1e-3).unwrap();
        assert!((lv.extrapolated[0] + 0.5).abs() < 1e-4, "{lv:?}");
        assert!((lv.extrapolated[1] + 0.125).abs() < 1e-4, "{lv:?}");
    }

    #[test]
    fn second_order_convergence() {
        // spacings h, h/2, h/4 on the same box
        let rp = hydrogen(0, 1, 3);
        let errs: Vec<f64> = [399usize, 799, 1599].iter().map(|&n| (grid_levels(&rp, n, 1)[0] + 0.5).abs()).collect();
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            assert!((3.5..4.5).contains(&ratio), "{errs:?}");
        }
    }

    #[test]
    fn sturm_count_matches_diagonal_case() {
        let t = Tridiagonal { diag: vec![1.0, 2.0, 3.0], off: 0.0 };
        assert_eq!(t.count_below(2.5), 2);
        assert!((t.eigenvalue(1) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn bad_problems_are_rejected() {
        assert!(matches!(radial_levels(&hydrogen(0, 1, 2), 1, 1e-3), Err(OracleError::Invalid(_))));
        assert!(matches!(radial_levels(&hydrogen(0, 1, 30_000), 1, 1e-3), Err(OracleError::Invalid(_))));
        // three coarse points cannot resolve a Rydberg level
        assert!(radial_levels(&hydrogen(0, 1, 7), 1, 1e-3).is_err());
    }
}
