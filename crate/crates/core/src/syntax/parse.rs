//! Formula grammar.
//!
//! ```text
//! term    := var | "0" | nat | "S(" term ")" | "(" term "+" term ")" | "(" term "*" term ")"
//! formula := term "=" term | "In(" term "," term ")" | "~" formula
//!          | "(" formula "->" formula ")" | "forall" var "." formula
//!          | "K" formula | "K^{" ordinal "}" formula
//! ```
//!
//! plus the sugar `&`, `|`, `<->` and `exists`, which expand at parse time.
//! Binary connectives may also appear without parentheses; precedence from
//! tightest is `~ K forall exists`, then `&`, `|`, `->` (right-associative),
//! `<->`. Prefix operators take the smallest following formula, so
//! `K (1=0) -> (1=0)` is an implication.

use thiserror::Error;

use super::{Formula, OperatorTag, Term};
use crate::ordinal::Ordinal;

/// Deepest accepted nesting of parentheses and prefix operators.
pub const MAX_NESTING: usize = 256;
/// Largest accepted numeral literal.
pub const MAX_NUMERAL: u64 = 1_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at byte {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    LParen,
    RParen,
    Comma,
    Eq,
    Plus,
    Star,
    Not,
    Arrow,
    Iff,
    And,
    Or,
    Dot,
    K,
    KAt(Ordinal),
    Succ,
    In,
    Forall,
    Exists,
    Nat(u64),
    Ident(String),
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |pos: usize, msg: String| ParseError { pos, msg };
    while i < src.len() {
        let c = src[i..].chars().next().unwrap();
        let start = i;
        if c.is_whitespace() {
            i += c.len_utf8();
            continue;
        }
        let simple = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            '=' => Some(Tok::Eq),
            '+' => Some(Tok::Plus),
            '*' => Some(Tok::Star),
            '~' | '¬' => Some(Tok::Not),
            '&' | '∧' => Some(Tok::And),
            '|' | '∨' => Some(Tok::Or),
            '.' => Some(Tok::Dot),
            '→' => Some(Tok::Arrow),
            '↔' => Some(Tok::Iff),
            '∀' => Some(Tok::Forall),
            '∃' => Some(Tok::Exists),
            _ => None,
        };
        if let Some(t) = simple {
            out.push((t, start));
            i += c.len_utf8();
            continue;
        }
        if src[i..].starts_with("->") {
            out.push((Tok::Arrow, start));
            i += 2;
        } else if src[i..].starts_with("<->") {
            out.push((Tok::Iff, start));
            i += 3;
        } else if c.is_ascii_digit() {
            let mut j = i;
            while j < bytes.len() && bytes[j].is_ascii_digit() {
                j += 1;
            }
            let n: u64 = src[i..j]
                .parse()
                .ok()
                .filter(|n| *n <= MAX_NUMERAL)
                .ok_or_else(|| err(start, format!("numeral literal exceeds {MAX_NUMERAL}")))?;
            out.push((Tok::Nat(n), start));
            i = j;
        } else if c == 'K' {
            i += 1;
            let rest = &src[i..];
            let trimmed = rest.trim_start();
            if let Some(after) = trimmed.strip_prefix('^') {
                let after = after.trim_start();
                let Some(inner) = after.strip_prefix('{') else {
                    return Err(err(start, "expected `{` after `K^`".into()));
                };
                let Some(close) = inner.find('}') else {
                    return Err(err(start, "unterminated superscript".into()));
                };
                let alpha: Ordinal = inner[..close]
                    .parse()
                    .map_err(|e| err(start, format!("bad superscript: {e}")))?;
                out.push((Tok::KAt(alpha), start));
                let consumed = rest.len() - inner.len() + close + 1;
                i += consumed;
            } else {
                out.push((Tok::K, start));
            }
        } else if c == 'S' {
            out.push((Tok::Succ, start));
            i += 1;
        } else if src[i..].starts_with("In") && !src[i + 2..].starts_with(|ch: char| ch.is_alphanumeric() || ch == '_') {
            out.push((Tok::In, start));
            i += 2;
        } else if c.is_ascii_lowercase() || c == '_' {
            let mut j = i;
            while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_' || bytes[j] == b'\'') {
                j += 1;
            }
            let word = &src[i..j];
            let tok = match word {
                "forall" => Tok::Forall,
                "exists" => Tok::Exists,
                _ => Tok::Ident(word.to_string()),
            };
            out.push((tok, start));
            i = j;
        } else {
            return Err(err(start, format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: &'a [(Tok, usize)],
    pos: usize,
    end: usize,
    nesting: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|(_, p)| *p).unwrap_or(self.end)
    }

    fn fail<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { pos: self.here(), msg: msg.into() })
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: &Tok, what: &str) -> Result<(), ParseError> {
        if self.eat(t) {
            Ok(())
        } else {
            self.fail(format!("expected {what}"))
        }
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        if self.nesting >= MAX_NESTING {
            return self.fail(format!("nesting deeper than {MAX_NESTING}"));
        }
        self.nesting += 1;
        Ok(())
    }

    fn leave(&mut self) {
        self.nesting -= 1;
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        self.enter()?;
        let t = self.term_inner();
        self.leave();
        t
    }

    fn term_inner(&mut self) -> Result<Term, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Ident(v)) => {
                self.pos += 1;
                Ok(Term::Var(v))
            }
            Some(Tok::Nat(n)) => {
                self.pos += 1;
                Ok(Term::numeral(n))
            }
            Some(Tok::Succ) => {
                self.pos += 1;
                self.expect(&Tok::LParen, "`(` after `S`")?;
                let t = self.term()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(Term::succ(t))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let a = self.term()?;
                let t = if self.eat(&Tok::Plus) {
                    Term::plus(a, self.term()?)
                } else if self.eat(&Tok::Star) {
                    Term::times(a, self.term()?)
                } else {
                    a
                };
                self.expect(&Tok::RParen, "`)`")?;
                Ok(t)
            }
            _ => self.fail("expected a term"),
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        self.enter()?;
        let f = self.iff();
        self.leave();
        f
    }

    fn iff(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.imp()?;
        if self.eat(&Tok::Iff) {
            let rhs = self.iff()?;
            return Ok(Formula::iff(lhs, rhs));
        }
        Ok(lhs)
    }

    fn imp(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.or()?;
        if self.eat(&Tok::Arrow) {
            self.enter()?;
            let rhs = self.imp();
            self.leave();
            return Ok(Formula::implies(lhs, rhs?));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.and()?;
        let mut chained = 0;
        while self.eat(&Tok::Or) {
            self.enter()?;
            chained += 1;
            let rhs = self.and();
            lhs = Formula::or(lhs, rhs?);
        }
        self.nesting -= chained;
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.unary()?;
        let mut chained = 0;
        while self.eat(&Tok::And) {
            self.enter()?;
            chained += 1;
            let rhs = self.unary();
            lhs = Formula::and(lhs, rhs?);
        }
        self.nesting -= chained;
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        self.enter()?;
        let f = self.unary_inner();
        self.leave();
        f
    }

    fn binder(&mut self) -> Result<(String, Formula), ParseError> {
        let Some(Tok::Ident(v)) = self.peek().cloned() else {
            return self.fail("expected a variable after quantifier");
        };
        self.pos += 1;
        self.expect(&Tok::Dot, "`.` after quantified variable")?;
        Ok((v, self.unary()?))
    }

    fn unary_inner(&mut self) -> Result<Formula, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Not) => {
                self.pos += 1;
                Ok(Formula::not(self.unary()?))
            }
            Some(Tok::K) => {
                self.pos += 1;
                Ok(Formula::op(OperatorTag::Plain, self.unary()?))
            }
            Some(Tok::KAt(a)) => {
                self.pos += 1;
                Ok(Formula::op(OperatorTag::Indexed(a), self.unary()?))
            }
            Some(Tok::Forall) => {
                self.pos += 1;
                let (v, body) = self.binder()?;
                Ok(Formula::Forall(v, Box::new(body)))
            }
            Some(Tok::Exists) => {
                self.pos += 1;
                let (v, body) = self.binder()?;
                Ok(Formula::exists(&v, body))
            }
            Some(Tok::In) => {
                self.pos += 1;
                self.expect(&Tok::LParen, "`(` after `In`")?;
                let a = self.term()?;
                self.expect(&Tok::Comma, "`,`")?;
                let b = self.term()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(Formula::In(a, b))
            }
            Some(Tok::LParen) => {
                // Either a parenthesised term on the left of `=`, or a grouped formula.
                let save = self.pos;
                if let Ok(t) = self.term() {
                    if self.eat(&Tok::Eq) {
                        return Ok(Formula::Eq(t, self.term()?));
                    }
                }
                self.pos = save + 1;
                let f = self.formula()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(f)
            }
            Some(_) => {
                let t = self.term()?;
                self.expect(&Tok::Eq, "`=`")?;
                Ok(Formula::Eq(t, self.term()?))
            }
            None => self.fail("unexpected end of input"),
        }
    }
}

pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks: &toks, pos: 0, end: text.len(), nesting: 0 };
    let f = p.formula()?;
    if p.pos != toks.len() {
        return p.fail("trailing input");
    }
    Ok(f)
}

pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks: &toks, pos: 0, end: text.len(), nesting: 0 };
    let t = p.term()?;
    if p.pos != toks.len() {
        return p.fail("trailing input");
    }
    Ok(t)
}

pub(super) fn render_term_into(t: &Term, out: &mut String) {
    if let Some(n) = t.as_numeral() {
        out.push_str(&n.to_string());
        return;
    }
    match t {
        Term::Var(v) => out.push_str(v),
        Term::Zero => out.push('0'),
        Term::Succ(a) => {
            out.push_str("S(");
            render_term_into(a, out);
            out.push(')');
        }
        Term::Plus(a, b) | Term::Times(a, b) => {
            out.push('(');
            render_term_into(a, out);
            out.push_str(if matches!(t, Term::Plus(..)) { "+" } else { "*" });
            render_term_into(b, out);
            out.push(')');
        }
    }
}

fn render_into(phi: &Formula, out: &mut String) {
    match phi {
        Formula::Eq(a, b) => {
            out.push('(');
            render_term_into(a, out);
            out.push('=');
            render_term_into(b, out);
            out.push(')');
        }
        Formula::In(a, b) => {
            out.push_str("In(");
            render_term_into(a, out);
            out.push(',');
            render_term_into(b, out);
            out.push(')');
        }
        Formula::Not(a) => {
            out.push('~');
            render_into(a, out);
        }
        Formula::Implies(a, b) => {
            out.push('(');
            render_into(a, out);
            out.push_str(" -> ");
            render_into(b, out);
            out.push(')');
        }
        Formula::Forall(x, a) => {
            out.push_str("forall ");
            out.push_str(x);
            out.push_str(". ");
            render_into(a, out);
        }
        Formula::Op(OperatorTag::Plain, a) => {
            out.push_str("K ");
            render_into(a, out);
        }
        Formula::Op(OperatorTag::Indexed(alpha), a) => {
            out.push_str("K^{");
            out.push_str(&alpha.to_string());
            out.push_str("} ");
            render_into(a, out);
        }
    }
}

/// Canonical rendering; every binary node is parenthesised and numerals are
/// printed as literals.
pub fn render_formula(phi: &Formula) -> String {
    let mut out = String::with_capacity(phi.node_count() * 4);
    render_into(phi, &mut out);
    out
}
