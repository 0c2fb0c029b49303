//! Energy levels from the two subalgebra representations.
//!
//! The (A2, B2) ladder gives `A2` at index `m`, the (A1, B1) ladder gives
//! `A1` at index `p`, and the upper boundary condition of the (A1, B1)
//! representation fixes `E`. The two boundary factors give the even and odd
//! branches, merged here as
//!
//! ```text
//! E(n) = −ħ²μ² / (2 (n + 5/2 + μ1 + μ2 + μ3)²),   n = 2q (even), 2q + 1 (odd)
//! ```

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::model::ModelParams;
use crate::scalar::{ParamRat, Rational, ScalarError};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum SpectrumError {
    #[error("μ = 0: the potential has no bound states")]
    NoBoundStates,
    #[error("parameters must be rational for a table")]
    NotRational,
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

fn half() -> ParamRat {
    ParamRat::ratio(1, 2)
}

fn mu_sum(p: &ModelParams) -> ParamRat {
    &(&p.mu1 + &p.mu2) + &p.mu3
}

/// `A2` at ladder index `m`.
pub fn a2_eigenvalue(m: u64, p: &ModelParams) -> ParamRat {
    let h2 = p.hbar.pow(2);
    let big_m = &(&ParamRat::from_int(2 * m as i64 + 1) + &p.mu1) + &p.mu2;
    let quad = &(&big_m.pow(2) - &(&p.mu1.pow(2) + &p.mu2.pow(2))) + &half();
    &(&h2 * &half()) * &quad
}

/// `J = 2p + μ1 + μ2 + μ3 + 3/2`.
pub fn j_number(pq: u64, p: &ModelParams) -> ParamRat {
    &(&ParamRat::from_int(2 * pq as i64) + &mu_sum(p)) + &ParamRat::ratio(3, 2)
}

/// `A1` at ladder index `pq`: `2A1 = ħ²J(J+1) − ħ²Σμi² + 3ħ²/4`.
pub fn a1_eigenvalue(pq: u64, p: &ModelParams) -> ParamRat {
    let j = j_number(pq, p);
    let squares = &(&p.mu1.pow(2) + &p.mu2.pow(2)) + &p.mu3.pow(2);
    let inner = &(&(&j * &(&j + &ParamRat::one())) - &squares) + &ParamRat::ratio(3, 4);
    &(&p.hbar.pow(2) * &half()) * &inner
}

/// Merged energy formula.
pub fn energy(n: u64, p: &ModelParams) -> Result<ParamRat, SpectrumError> {
    if p.mu.is_zero() {
        return Err(SpectrumError::NoBoundStates);
    }
    let den = &(&ParamRat::from_int(n as i64) + &ParamRat::ratio(5, 2)) + &mu_sum(p);
    let num = -&(&p.hbar.pow(2) * &p.mu.pow(2));
    Ok(num.checked_div(&(&ParamRat::from_int(2) * &den.pow(2)))?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Even,
    Odd,
}

impl Branch {
    pub fn name(self) -> &'static str {
        match self {
            Branch::Even => "even",
            Branch::Odd => "odd",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpectrumRow {
    pub n: u64,
    pub branch: Branch,
    pub q: u64,
    /// Witness ladder indices; the smallest compatible choice is `p = m = 0`.
    pub p: u64,
    pub m: u64,
    pub a2: ParamRat,
    pub a1: ParamRat,
    pub jq: ParamRat,
    pub energy: ParamRat,
}

#[derive(Clone, Debug)]
pub struct SpectrumTable {
    pub params: ModelParams,
    pub rows: Vec<SpectrumRow>,
}

pub fn spectrum_table(params: &ModelParams, max_n: u64) -> Result<SpectrumTable, SpectrumError> {
    let rows = (0..=max_n)
        .into_par_iter()
        .map(|n| {
            let (q, branch) = (n / 2, if n % 2 == 0 { Branch::Even } else { Branch::Odd });
            Ok(SpectrumRow {
                n,
                branch,
                q,
                p: 0,
                m: 0,
                a2: a2_eigenvalue(0, params),
                a1: a1_eigenvalue(0, params),
                jq: j_number(0, params),
                energy: energy(n, params)?,
            })
        })
        .collect::<Result<Vec<_>, SpectrumError>>()?;
    Ok(SpectrumTable { params: params.clone(), rows })
}

/// Exact rational value of a parameter-free scalar.
pub fn exact(v: &ParamRat) -> Result<Rational, SpectrumError> {
    v.as_rational().ok_or(SpectrumError::NotRational)
}

/// Decimal with 12 significant digits.
pub fn decimal(r: &Rational) -> String {
    format!("{:.11e}", r.to_f64())
}

const COLUMNS: [&str; 10] = ["n", "branch", "q", "p", "m", "a2", "a1", "Jq", "E", "E_decimal"];

impl SpectrumTable {
    fn cells(&self) -> Result<Vec<Vec<String>>, SpectrumError> {
        self.rows
            .iter()
            .map(|r| {
                let e = exact(&r.energy)?;
                Ok(vec![
                    r.n.to_string(),
                    r.branch.name().to_string(),
                    r.q.to_string(),
                    r.p.to_string(),
                    r.m.to_string(),
                    exact(&r.a2)?.to_string(),
                    exact(&r.a1)?.to_string(),
                    exact(&r.jq)?.to_string(),
                    e.to_string(),
                    decimal(&e),
                ])
            })
            .collect()
    }

    pub fn to_csv(&self) -> Result<String, SpectrumError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(COLUMNS).expect("in-memory write");
        for row in self.cells()? {
            w.write_record(&row).expect("in-memory write");
        }
        Ok(String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii"))
    }

    pub fn to_json(&self) -> Result<serde_json::Value, SpectrumError> {
        let rows: Vec<serde_json::Value> = self
            .cells()?
            .into_iter()
            .map(|cells| {
                let mut m = serde_json::Map::new();
                for (k, v) in COLUMNS.iter().zip(cells) {
                    m.insert(k.to_string(), serde_json::Value::String(v));
                }
                serde_json::Value::Object(m)
            })
            .collect();
        let p = &self.params;
        let mut params = serde_json::Map::new();
        for (k, v) in [("hbar", &p.hbar), ("mu", &p.mu), ("mu1", &p.mu1), ("mu2", &p.mu2), ("mu3", &p.mu3)] {
            params.insert(k.to_string(), serde_json::Value::String(v.to_string()));
        }
        Ok(serde_json::json!({ "params": params, "rows": rows }))
    }

    /// Plain-text rendering for terminals.
    pub fn render(&self) -> Result<String, SpectrumError> {
        let mut out = String::new();
        for row in self.cells()? {
            let _ = writeln!(out, "n={:<3} {:<4} q={:<3} E = {} ≈ {}", row[0], row[1], row[2], row[8], row[9]);
        }
        Ok(out)
    }
}

/// Energy as a symbolic expression.
pub fn energy_symbolic(n: u64) -> ParamRat {
    energy(n, &ModelParams::symbolic()).expect("μ is a symbol")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(mu: (i64, i64), mui: (i64, i64)) -> ModelParams {
        let r = |(a, b): (i64, i64)| Rational::new(a, b);
        ModelParams::rational(Rational::ONE, r(mu), r(mui), r(mui), r(mui)).unwrap()
    }

    #[test]
    fn eigenvalue_examples() {
        let p = params((1, 1), (1, 2));
        assert_eq!(a2_eigenvalue(0, &p), ParamRat::from_int(2));
        let q =
            ModelParams::rational(Rational::ONE, Rational::ONE, Rational::ONE, Rational::from_int(2), Rational::ONE)
                .unwrap();
        assert_eq!(a2_eigenvalue(0, &q), ParamRat::ratio(23, 4));
        assert_eq!(a1_eigenvalue(0, &p), ParamRat::from_int(6));
        assert_eq!(a1_eigenvalue(1, &p), ParamRat::from_int(15));
        let z = params((1, 1), (0, 1));
        assert_eq!(&a1_eigenvalue(0, &z) * &ParamRat::from_int(2), ParamRat::ratio(9, 2));
    }

    #[test]
    fn energy_examples() {
        let p = params((1, 1), (1, 2));
        assert_eq!(energy(0, &p).unwrap(), ParamRat::ratio(-1, 32));
        assert_eq!(energy(1, &p).unwrap(), ParamRat::ratio(-1, 50));
        assert_eq!(energy(0, &params((1, 1), (3, 2))).unwrap(), ParamRat::ratio(-1, 98));
        assert_eq!(energy(0, &params((0, 1), (1, 2))), Err(SpectrumError::NoBoundStates));
        assert_eq!(energy(2, &params((2, 1), (1, 2))).unwrap(), &energy(2, &p).unwrap() * &ParamRat::from_int(4));
    }

    #[test]
    fn table_csv() {
        let t = spectrum_table(&params((1, 1), (1, 2)), 2).unwrap();
        let csv = t.to_csv().unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "n,branch,q,p,m,a2,a1,Jq,E,E_decimal");
        assert!(lines[1].starts_with("0,even,0,0,0,2,6,3,-1/32,"));
        assert!(lines[3].contains(",-1/72,"));
        assert_eq!(decimal(&Rational::new(-1, 32)), "-3.12500000000e-2");
    }
}
