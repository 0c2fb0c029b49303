use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Every indeterminate the kernel knows about, in the fixed global order
/// used for monomial comparison. The first eight are the model parameters
/// and central stand-ins; `X`, `Y`, `Z` are coordinates and only occur inside
/// spatial coefficients; `T` and `M` are the structure-function variable and
/// a symbolic ladder index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Symbol {
    Hbar,
    Mu,
    Mu1,
    Mu2,
    Mu3,
    /// Central stand-in for `H`.
    E,
    /// Central stand-in for an `A2` eigenvalue.
    A2bar,
    /// Central stand-in for an `A1` eigenvalue.
    A1bar,
    X,
    Y,
    Z,
    T,
    M,
}

impl Symbol {
    pub const ALL: [Symbol; 13] = [
        Symbol::Hbar,
        Symbol::Mu,
        Symbol::Mu1,
        Symbol::Mu2,
        Symbol::Mu3,
        Symbol::E,
        Symbol::A2bar,
        Symbol::A1bar,
        Symbol::X,
        Symbol::Y,
        Symbol::Z,
        Symbol::T,
        Symbol::M,
    ];

    /// The model parameters proper.
    pub const PARAMS: [Symbol; 5] = [Symbol::Hbar, Symbol::Mu, Symbol::Mu1, Symbol::Mu2, Symbol::Mu3];

    pub const COORDS: [Symbol; 3] = [Symbol::X, Symbol::Y, Symbol::Z];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Symbol> {
        Symbol::ALL.get(i).copied()
    }

    /// ASCII name used in relation files and reports.
    pub fn name(self) -> &'static str {
        match self {
            Symbol::Hbar => "hbar",
            Symbol::Mu => "mu",
            Symbol::Mu1 => "mu1",
            Symbol::Mu2 => "mu2",
            Symbol::Mu3 => "mu3",
            Symbol::E => "E",
            Symbol::A2bar => "a2bar",
            Symbol::A1bar => "a1bar",
            Symbol::X => "x",
            Symbol::Y => "y",
            Symbol::Z => "z",
            Symbol::T => "t",
            Symbol::M => "m",
        }
    }

    pub fn is_coordinate(self) -> bool {
        matches!(self, Symbol::X | Symbol::Y | Symbol::Z)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Symbol {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Symbol::ALL.iter().copied().find(|sym| sym.name() == s).ok_or_else(|| format!("unknown symbol `{s}`"))
    }
}
