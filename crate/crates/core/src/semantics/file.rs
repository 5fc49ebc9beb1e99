//! Text format for finite structures.
//!
//! ```text
//! # two elements, arithmetic mod 2
//! universe 2
//! tables cyclic
//! plus 0 1 / 1 0
//! in 0 1 / 0 0
//! default false
//! oracle K (x=y) [1,1] true
//! ```
//!
//! `tables` fills succ, plus and times from the fixed family; explicit `succ`,
//! `plus` and `times` lines override it. Rows of binary tables are separated by
//! `/`. Oracle arguments give the values of the body's free variable
//! occurrences from left to right.

use thiserror::Error;

use super::{Arithmetic, Element, FiniteStructure, TableOracle, TableVariant};
use crate::syntax::{parse_formula, render_formula, slot_canonical, Formula};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("structure file line {line}: {message}")]
pub struct StructureFileError {
    pub line: usize,
    pub message: String,
}

/// Largest universe a structure file may declare.
pub const MAX_FILE_UNIVERSE: u32 = 64;

/// Parse a structure file into its arithmetic part and oracle table.
pub fn parse_structure(text: &str) -> Result<(FiniteStructure, Arithmetic, TableOracle), StructureFileError> {
    let mut size: Option<u32> = None;
    let mut zero = 0;
    let mut base: Option<Arithmetic> = None;
    let mut succ = None;
    let mut plus = None;
    let mut times = None;
    let mut in_rel = None;
    let mut default = false;
    let mut oracle_lines = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let err = |message: String| StructureFileError { line, message };
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (word, rest) = content.split_once(char::is_whitespace).unwrap_or((content, ""));
        let rest = rest.trim();
        if word != "universe" && size.is_none() {
            return Err(err("`universe` must come first".into()));
        }
        let n = size.unwrap_or(0);
        match word {
            "universe" => {
                if size.is_some() {
                    return Err(err("duplicate `universe`".into()));
                }
                let v: u32 = rest.parse().map_err(|_| err(format!("bad universe size `{rest}`")))?;
                if v == 0 || v > MAX_FILE_UNIVERSE {
                    return Err(err(format!("universe size must be in 1..={MAX_FILE_UNIVERSE}")));
                }
                size = Some(v);
            }
            "tables" => {
                let variant = TableVariant::from_name(rest).ok_or_else(|| err(format!("unknown table family `{rest}`")))?;
                base = Some(Arithmetic::from_variant(n, variant));
            }
            "zero" => zero = element(rest, n).map_err(err)?,
            "succ" => succ = Some(row(rest, n, n as usize).map_err(err)?),
            "plus" => plus = Some(square(rest, n).map_err(err)?),
            "times" => times = Some(square(rest, n).map_err(err)?),
            "in" => {
                let bits = square(rest, 2).map_err(|m| err(format!("{m} (in table holds 0/1)")))?;
                if bits.len() != (n * n) as usize {
                    return Err(err("in table has the wrong size".into()));
                }
                in_rel = Some(bits.into_iter().map(|b| b == 1).collect::<Vec<bool>>());
            }
            "default" => default = boolean(rest).map_err(err)?,
            "oracle" => oracle_lines.push((line, rest.to_string())),
            other => return Err(err(format!("unknown record `{other}`"))),
        }
    }

    let n = size.ok_or(StructureFileError { line: 0, message: "missing `universe`".into() })?;
    let pick = |explicit: Option<Vec<Element>>, from_base: Option<Vec<Element>>, name: &str| {
        explicit.or(from_base).ok_or_else(|| StructureFileError {
            line: 0,
            message: format!("missing `{name}` table (give it or a `tables` family)"),
        })
    };
    let arith = Arithmetic::new(
        n,
        zero,
        pick(succ, base.as_ref().map(|b| b.succ.clone()), "succ")?,
        pick(plus, base.as_ref().map(|b| b.plus.clone()), "plus")?,
        pick(times, base.as_ref().map(|b| b.times.clone()), "times")?,
        in_rel.unwrap_or_else(|| vec![false; (n * n) as usize]),
    )
    .map_err(|e| StructureFileError { line: 0, message: e.to_string() })?;

    let mut oracle = TableOracle::new(default);
    for (line, rest) in oracle_lines {
        let err = |message: String| StructureFileError { line, message };
        let (formula_text, tail) = rest.rsplit_once('[').ok_or_else(|| err("expected `[args]`".into()))?;
        let (args_text, value_text) = tail.split_once(']').ok_or_else(|| err("unclosed `[`".into()))?;
        let phi = parse_formula(formula_text).map_err(|e| err(e.to_string()))?;
        let Formula::Op(tag, body) = phi else {
            return Err(err("oracle entries need an operator formula".into()));
        };
        let args = if args_text.trim().is_empty() {
            Vec::new()
        } else {
            args_text
                .split(',')
                .map(|a| element(a.trim(), n))
                .collect::<Result<Vec<_>, _>>()
                .map_err(err)?
        };
        let slots = slot_canonical(&body).args.len();
        if args.len() != slots {
            return Err(err(format!("body has {slots} free occurrences but {} arguments were given", args.len())));
        }
        oracle.set(tag, &body, args, boolean(value_text.trim()).map_err(err)?);
    }

    let structure = FiniteStructure::new(arith.clone(), oracle.clone());
    Ok((structure, arith, oracle))
}

fn element(text: &str, n: u32) -> Result<Element, String> {
    let v: Element = text.parse().map_err(|_| format!("bad element `{text}`"))?;
    if v >= n {
        return Err(format!("element {v} outside a universe of size {n}"));
    }
    Ok(v)
}

fn row(text: &str, n: u32, len: usize) -> Result<Vec<Element>, String> {
    let v = text.split_whitespace().map(|t| element(t, n)).collect::<Result<Vec<_>, _>>()?;
    if v.len() != len {
        return Err(format!("expected {len} entries, found {}", v.len()));
    }
    Ok(v)
}

fn square(text: &str, n: u32) -> Result<Vec<Element>, String> {
    let rows: Vec<&str> = text.split('/').collect();
    let mut out = Vec::new();
    for r in &rows {
        out.extend(row(r, n, rows.len())?);
    }
    Ok(out)
}

fn boolean(text: &str) -> Result<bool, String> {
    match text {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(format!("expected true or false, found `{other}`")),
    }
}

/// Render a structure in the file format; [`parse_structure`] reads it back.
pub fn render_structure(arith: &Arithmetic, oracle: &TableOracle) -> String {
    let n = arith.size();
    let square = |f: &dyn Fn(Element, Element) -> String| {
        (0..n)
            .map(|a| (0..n).map(|b| f(a, b)).collect::<Vec<_>>().join(" "))
            .collect::<Vec<_>>()
            .join(" / ")
    };
    let mut out = String::new();
    out.push_str(&format!("universe {n}\n"));
    out.push_str(&format!("zero {}\n", arith.zero()));
    let succ: Vec<String> = (0..n).map(|a| arith.succ(a).to_string()).collect();
    out.push_str(&format!("succ {}\n", succ.join(" ")));
    out.push_str(&format!("plus {}\n", square(&|a, b| arith.plus(a, b).to_string())));
    out.push_str(&format!("times {}\n", square(&|a, b| arith.times(a, b).to_string())));
    out.push_str(&format!("in {}\n", square(&|a, b| u8::from(arith.in_rel(a, b)).to_string())));
    out.push_str(&format!("default {}\n", oracle.default_answer()));
    for (tag, key, args, value) in oracle.entries() {
        let args: Vec<String> = args.iter().map(u32::to_string).collect();
        let phi = Formula::op(tag, key.clone());
        out.push_str(&format!("oracle {} [{}] {value}\n", render_formula(&phi), args.join(",")));
    }
    out
}
