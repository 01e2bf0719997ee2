//! Words over an alphabet of variables, each letter optionally transposed.
//!
//! Text form is comma separated and 1-based, with a `t` suffix marking a
//! transpose: `"1,1,2t"`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::partition::SetPartition;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("malformed word {0:?}")]
pub struct WordParseError(pub String);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    /// 0-based variable (colour) index.
    pub var: usize,
    pub transpose: bool,
}

impl Letter {
    pub const fn plain(var: usize) -> Self {
        Letter { var, transpose: false }
    }

    pub const fn transposed(var: usize) -> Self {
        Letter { var, transpose: true }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn new(letters: Vec<Letter>) -> Self {
        Word(letters)
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    /// `x^n` in variable `var`.
    pub fn power(var: usize, n: usize) -> Self {
        Word(vec![Letter::plain(var); n])
    }

    /// Untransposed letters with the given variables.
    pub fn from_vars(vars: &[usize]) -> Self {
        Word(vars.iter().map(|&v| Letter::plain(v)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn vars(&self) -> Vec<usize> {
        self.0.iter().map(|l| l.var).collect()
    }

    pub fn has_transpose(&self) -> bool {
        self.0.iter().any(|l| l.transpose)
    }

    /// `ker` of the variable map.
    pub fn kernel(&self) -> SetPartition {
        SetPartition::kernel(&self.vars())
    }

    /// Subword at the given positions, in order.
    pub fn select(&self, positions: &[usize]) -> Word {
        Word(positions.iter().map(|&i| self.0[i]).collect())
    }

    /// `(a₁⋯aₙ)ᵗ = aₙᵗ⋯a₁ᵗ`.
    pub fn transposed(&self) -> Word {
        Word(self.0.iter().rev().map(|l| Letter { var: l.var, transpose: !l.transpose }).collect())
    }

    /// Concatenation.
    pub fn concat(&self, other: &Word) -> Word {
        Word(self.0.iter().chain(&other.0).copied().collect())
    }

    /// Every word of length `n` over `vars` variables, lexicographically.
    pub fn all_of_length(vars: usize, n: usize) -> Vec<Word> {
        let mut out = vec![Word::empty()];
        for _ in 0..n {
            out = out
                .into_iter()
                .flat_map(|w| (0..vars).map(move |v| w.concat(&Word::from_vars(&[v]))))
                .collect();
        }
        out
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> =
            self.0.iter().map(|l| format!("{}{}", l.var + 1, if l.transpose { "t" } else { "" })).collect();
        write!(f, "{}", parts.join(","))
    }
}

impl FromStr for Word {
    type Err = WordParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(Word::empty());
        }
        let err = || WordParseError(s.to_string());
        s.split(',')
            .map(|tok| {
                let tok = tok.trim();
                let (digits, transpose) = match tok.strip_suffix('t') {
                    Some(d) => (d, true),
                    None => (tok, false),
                };
                let var: usize = digits.parse().map_err(|_| err())?;
                if var == 0 {
                    return Err(err());
                }
                Ok(Letter { var: var - 1, transpose })
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Word)
    }
}
