//! Words over the generators `U`, `V` and their inverses.
//!
//! A word is stored in written order, `V^-1 U^2 V` being `[V⁻¹, U, U, V]`;
//! as an operator it acts on a vector right to left.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Letter {
    U,
    UInv,
    V,
    VInv,
}

impl Letter {
    pub fn inverse(self) -> Letter {
        match self {
            Letter::U => Letter::UInv,
            Letter::UInv => Letter::U,
            Letter::V => Letter::VInv,
            Letter::VInv => Letter::V,
        }
    }

    fn base(self) -> char {
        match self {
            Letter::U | Letter::UInv => 'U',
            Letter::V | Letter::VInv => 'V',
        }
    }

    fn sign(self) -> i64 {
        match self {
            Letter::U | Letter::V => 1,
            Letter::UInv | Letter::VInv => -1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn new(letters: Vec<Letter>) -> Self {
        Word(letters)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `V^-1 U^2 V`
    pub fn relation_lhs() -> Word {
        Word(vec![Letter::VInv, Letter::U, Letter::U, Letter::V])
    }

    /// `U^3`
    pub fn relation_rhs() -> Word {
        Word(vec![Letter::U; 3])
    }

    /// `U V^-1 U V`
    pub fn commutator_left() -> Word {
        Word(vec![Letter::U, Letter::VInv, Letter::U, Letter::V])
    }

    /// `V^-1 U V U`
    pub fn commutator_right() -> Word {
        Word(vec![Letter::VInv, Letter::U, Letter::V, Letter::U])
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    /// Letters in the order they act on a vector.
    pub fn action_order(&self) -> impl Iterator<Item = Letter> + '_ {
        self.0.iter().rev().copied()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let mut runs: Vec<(char, i64)> = Vec::new();
        for l in &self.0 {
            match runs.last_mut() {
                Some((c, e)) if *c == l.base() && e.signum() == l.sign() => *e += l.sign(),
                _ => runs.push((l.base(), l.sign())),
            }
        }
        let parts: Vec<String> = runs
            .into_iter()
            .map(|(c, e)| if e == 1 { c.to_string() } else { format!("{c}^{e}") })
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

impl FromStr for Word {
    type Err = Error;

    /// Parses `V^-1 U^2 V`; whitespace between factors is optional, `1`
    /// denotes the empty word.
    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = |msg: &str| Error::Format(format!("word {s:?}: {msg}"));
        let chars: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
        if chars == ['1'] {
            return Ok(Word(Vec::new()));
        }
        let mut letters = Vec::new();
        let mut i = 0;
        while i < chars.len() {
            let (pos, neg) = match chars[i] {
                'U' | 'u' => (Letter::U, Letter::UInv),
                'V' | 'v' => (Letter::V, Letter::VInv),
                c => return Err(bad(&format!("unexpected character {c:?}"))),
            };
            i += 1;
            let mut exp: i64 = 1;
            if i < chars.len() && chars[i] == '^' {
                i += 1;
                let start = i;
                if i < chars.len() && chars[i] == '-' {
                    i += 1;
                }
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let digits: String = chars[start..i].iter().collect();
                exp = digits.parse().map_err(|_| bad("malformed exponent"))?;
            }
            let letter = if exp < 0 { neg } else { pos };
            letters.extend(std::iter::repeat_n(letter, exp.unsigned_abs() as usize));
        }
        Ok(Word(letters))
    }
}

impl From<Word> for String {
    fn from(w: Word) -> String {
        w.to_string()
    }
}

impl TryFrom<String> for Word {
    type Error = Error;
    fn try_from(s: String) -> Result<Self, Error> {
        s.parse()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        let w: Word = "V^-1 U^2 V".parse().unwrap();
        assert_eq!(w, Word::relation_lhs());
        assert_eq!(w.to_string(), "V^-1 U^2 V");
        assert_eq!("UUU".parse::<Word>().unwrap(), Word::relation_rhs());
        assert_eq!(Word::commutator_left().to_string(), "U V^-1 U V");
        assert_eq!("1".parse::<Word>().unwrap().len(), 0);
        assert!("U^x".parse::<Word>().is_err());
        assert!("W".parse::<Word>().is_err());
    }

    #[test]
    fn inverse_reverses() {
        let w = Word::commutator_right();
        assert_eq!(w.inverse().to_string(), "U^-1 V^-1 U^-1 V");
        let order: Vec<Letter> = Word::relation_lhs().action_order().collect();
        assert_eq!(order[0], Letter::V);
        assert_eq!(order[3], Letter::VInv);
    }
}
