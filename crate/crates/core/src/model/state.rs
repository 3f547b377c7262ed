//! The state alphabet: every non-empty subset of the recurrent letters
//! {B, I, F, T}, plus the non-relevant state `X` and the clean state `Z`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::ParseStateError;

/// One recurrent issue-type letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    B,
    I,
    F,
    T,
}

impl Letter {
    pub const ALL: [Letter; 4] = [Letter::B, Letter::I, Letter::F, Letter::T];

    const fn bit(self) -> u8 {
        match self {
            Letter::B => 0b0001,
            Letter::I => 0b0010,
            Letter::F => 0b0100,
            Letter::T => 0b1000,
        }
    }

    pub const fn as_char(self) -> char {
        match self {
            Letter::B => 'B',
            Letter::I => 'I',
            Letter::F => 'F',
            Letter::T => 'T',
        }
    }

    pub fn from_char(c: char) -> Option<Letter> {
        match c {
            'B' => Some(Letter::B),
            'I' => Some(Letter::I),
            'F' => Some(Letter::F),
            'T' => Some(Letter::T),
            _ => None,
        }
    }
}

const LETTER_MASK: u8 = 0b1111;
const X_CODE: u8 = 0b1_0000;
const Z_CODE: u8 = 0;

/// A software state.
///
/// Internally a 5-bit code: the low four bits hold the letters, `X` is
/// `0b10000` and `Z` is zero, so [`StateSymbol::code`] doubles as a dense
/// index in `0..ALPHABET_SIZE`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct StateSymbol(u8);

/// Number of distinct states: 15 letter subsets, `X` and `Z`.
pub const ALPHABET_SIZE: usize = 17;

impl StateSymbol {
    pub const B: StateSymbol = StateSymbol(0b0001);
    pub const I: StateSymbol = StateSymbol(0b0010);
    pub const F: StateSymbol = StateSymbol(0b0100);
    pub const T: StateSymbol = StateSymbol(0b1000);
    pub const X: StateSymbol = StateSymbol(X_CODE);
    pub const Z: StateSymbol = StateSymbol(Z_CODE);

    /// Builds a letter state from any collection of letters. An empty
    /// collection yields `Z`.
    pub fn from_letters<I: IntoIterator<Item = Letter>>(letters: I) -> StateSymbol {
        StateSymbol(letters.into_iter().fold(0, |m, l| m | l.bit()))
    }

    /// Inverse of [`StateSymbol::code`].
    pub fn from_code(code: u8) -> Option<StateSymbol> {
        (code == X_CODE || code & !LETTER_MASK == 0).then_some(StateSymbol(code))
    }

    pub const fn code(self) -> u8 {
        self.0
    }

    pub const fn index(self) -> usize {
        self.0 as usize
    }

    pub fn is_x(self) -> bool {
        self.0 == X_CODE
    }

    pub fn is_z(self) -> bool {
        self.0 == Z_CODE
    }

    pub fn is_letter_state(self) -> bool {
        self.0 & LETTER_MASK != 0 && self.0 & X_CODE == 0
    }

    pub fn contains(self, letter: Letter) -> bool {
        self.is_letter_state() && self.0 & letter.bit() != 0
    }

    /// Letters in canonical order.
    pub fn letters(self) -> impl Iterator<Item = Letter> {
        Letter::ALL.into_iter().filter(move |l| self.contains(*l))
    }

    /// Number of issue types involved in the state. `X` counts as one
    /// type, `Z` as none.
    pub fn complexity(self) -> usize {
        if self.is_x() {
            1
        } else {
            (self.0 & LETTER_MASK).count_ones() as usize
        }
    }

    /// Atomic states are the single letters and `X`.
    pub fn is_atomic(self) -> bool {
        self.complexity() == 1
    }

    /// Union of two states: letters merge, `X` is absorbed by any letter
    /// state and `Z` is the neutral element.
    pub fn union(self, other: StateSymbol) -> StateSymbol {
        let letters = (self.0 | other.0) & LETTER_MASK;
        if letters != 0 {
            StateSymbol(letters)
        } else {
            StateSymbol((self.0 | other.0) & X_CODE)
        }
    }

    /// All 17 states in canonical order.
    pub fn all() -> [StateSymbol; ALPHABET_SIZE] {
        CANONICAL_ORDER
    }

    fn rank(self) -> u8 {
        RANK[self.index()]
    }
}

/// Canonical ordering: the four single letters, then multi-letter states
/// sorted by their rendering, then `X`, then `Z`.
const CANONICAL_ORDER: [StateSymbol; ALPHABET_SIZE] = [
    StateSymbol(0b0001), // B
    StateSymbol(0b0010), // I
    StateSymbol(0b0100), // F
    StateSymbol(0b1000), // T
    StateSymbol(0b0101), // BF
    StateSymbol(0b1101), // BFT
    StateSymbol(0b0011), // BI
    StateSymbol(0b0111), // BIF
    StateSymbol(0b1111), // BIFT
    StateSymbol(0b1011), // BIT
    StateSymbol(0b1001), // BT
    StateSymbol(0b1100), // FT
    StateSymbol(0b0110), // IF
    StateSymbol(0b1110), // IFT
    StateSymbol(0b1010), // IT
    StateSymbol(X_CODE),
    StateSymbol(Z_CODE),
];

const RANK: [u8; ALPHABET_SIZE] = {
    let mut rank = [0u8; ALPHABET_SIZE];
    let mut i = 0;
    while i < ALPHABET_SIZE {
        rank[CANONICAL_ORDER[i].0 as usize] = i as u8;
        i += 1;
    }
    rank
};

impl Ord for StateSymbol {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rank().cmp(&other.rank())
    }
}

impl PartialOrd for StateSymbol {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for StateSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_x() {
            f.write_str("X")
        } else if self.is_z() {
            f.write_str("Z")
        } else {
            for l in self.letters() {
                write!(f, "{}", l.as_char())?;
            }
            Ok(())
        }
    }
}

impl fmt::Debug for StateSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for StateSymbol {
    type Err = ParseStateError;

    /// Accepts `X`, `Z`, or any non-repeating combination of `B`, `I`,
    /// `F`, `T` in any order.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseStateError(s.to_string());
        match s {
            "X" => return Ok(StateSymbol::X),
            "Z" => return Ok(StateSymbol::Z),
            "" => return Err(err()),
            _ => {}
        }
        let mut mask = 0u8;
        for c in s.chars() {
            let bit = Letter::from_char(c).ok_or_else(err)?.bit();
            if mask & bit != 0 {
                return Err(err());
            }
            mask |= bit;
        }
        Ok(StateSymbol(mask))
    }
}

impl Serialize for StateSymbol {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for StateSymbol {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Renders a state in canonical `B, I, F, T` order.
pub fn render_state(s: StateSymbol) -> String {
    s.to_string()
}

pub fn parse_state(s: &str) -> Result<StateSymbol, ParseStateError> {
    s.parse()
}

pub fn state_union(a: StateSymbol, b: StateSymbol) -> StateSymbol {
    a.union(b)
}
