//! Ordinals strictly below ω·ω.
//!
//! Every such ordinal has the unique form `ω·limit + offset`, and the order is
//! lexicographic on `(limit, offset)`. The textual grammar is
//! `nat | "w" | "w+" nat | "w*" nat ("+" nat)?`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// An ordinal `ω·limit + offset`.
///
/// The derived `Ord` is lexicographic on `(limit, offset)`, which is exactly the
/// ordinal order below ω·ω.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Ordinal {
    pub limit: u64,
    pub offset: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrdinalError {
    #[error("malformed ordinal `{text}`: {reason}")]
    Malformed { text: String, reason: &'static str },
}

impl Ordinal {
    pub const ZERO: Ordinal = Ordinal { limit: 0, offset: 0 };
    pub const OMEGA: Ordinal = Ordinal { limit: 1, offset: 0 };

    pub const fn new(limit: u64, offset: u64) -> Self {
        Ordinal { limit, offset }
    }

    pub const fn finite(n: u64) -> Self {
        Ordinal { limit: 0, offset: n }
    }

    pub fn is_finite(self) -> bool {
        self.limit == 0
    }

    /// `α + 1`.
    pub fn successor(self) -> Self {
        Ordinal::new(self.limit, self.offset + 1)
    }

    /// True when `self < ω·n`.
    pub fn below_omega_times(self, n: u64) -> bool {
        self.limit < n
    }
}

/// `ω·n`.
pub fn omega_times(n: u64) -> Ordinal {
    Ordinal::new(n, 0)
}

pub fn ord_compare(a: Ordinal, b: Ordinal) -> Ordering {
    a.cmp(&b)
}

pub fn ord_parse(text: &str) -> Result<Ordinal, OrdinalError> {
    text.parse()
}

pub fn ord_render(o: Ordinal) -> String {
    o.to_string()
}

fn parse_nat(text: &str, whole: &str) -> Result<u64, OrdinalError> {
    let t = text.trim();
    if t.is_empty() || !t.bytes().all(|b| b.is_ascii_digit()) {
        return Err(OrdinalError::Malformed {
            text: whole.to_string(),
            reason: "expected a natural number",
        });
    }
    t.parse().map_err(|_| OrdinalError::Malformed {
        text: whole.to_string(),
        reason: "natural number out of range",
    })
}

impl FromStr for Ordinal {
    type Err = OrdinalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let Some(rest) = compact.strip_prefix('w') else {
            return Ok(Ordinal::finite(parse_nat(&compact, s)?));
        };
        if rest.is_empty() {
            return Ok(Ordinal::OMEGA);
        }
        if let Some(off) = rest.strip_prefix('+') {
            return Ok(Ordinal::new(1, parse_nat(off, s)?));
        }
        let Some(rest) = rest.strip_prefix('*') else {
            return Err(OrdinalError::Malformed {
                text: s.to_string(),
                reason: "expected `*` or `+` after `w`",
            });
        };
        match rest.split_once('+') {
            Some((coef, off)) => Ok(Ordinal::new(parse_nat(coef, s)?, parse_nat(off, s)?)),
            None => Ok(Ordinal::new(parse_nat(rest, s)?, 0)),
        }
    }
}

impl fmt::Display for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.limit, self.offset) {
            (0, m) => write!(f, "{m}"),
            (1, 0) => write!(f, "w"),
            (1, m) => write!(f, "w+{m}"),
            (n, 0) => write!(f, "w*{n}"),
            (n, m) => write!(f, "w*{n}+{m}"),
        }
    }
}
