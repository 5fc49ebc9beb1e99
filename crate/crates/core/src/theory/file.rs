//! Text format for theory presentations.
//!
//! ```text
//! # T0 = {0=0} with truthfulness, closed twice under K
//! sentence: 0=0
//! schema: E3
//! pool: 0=0
//! pool: 1=0
//! instance: E2prime; phi = 1=0; psi = K(1=0)
//! instance: AssignedValidity; phi = x=x; assign = x:3
//! k-closure: 2
//! ```
//!
//! Instance parameters are `phi`, `psi`, `assign` (`x:1,y:0`), `closure`
//! (`x,y`), `var`, `witness` and `index`.

use thiserror::Error;

use super::{SchemaArgs, SchemaId, TheoryPresentation};
use crate::syntax::{parse_formula, render_formula, Assignment, Formula};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("theory file line {line}: {message}")]
pub struct TheoryFileError {
    pub line: usize,
    pub message: String,
}

fn formula(text: &str) -> Result<Formula, String> {
    parse_formula(text).map_err(|e| e.to_string())
}

fn ident(text: &str) -> Result<String, String> {
    let ok = text.chars().next().is_some_and(|c| c.is_ascii_lowercase() || c == '_')
        && text.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'');
    if ok {
        Ok(text.to_string())
    } else {
        Err(format!("bad variable name `{text}`"))
    }
}

fn instance(text: &str) -> Result<(SchemaId, SchemaArgs), String> {
    let mut parts = text.split(';');
    let id: SchemaId = parts.next().unwrap_or("").parse().map_err(|e: super::TheoryError| e.to_string())?;
    let mut args = SchemaArgs::default();
    for part in parts {
        let (key, value) = part.split_once('=').ok_or_else(|| format!("expected key = value, found `{}`", part.trim()))?;
        let value = value.trim();
        match key.trim() {
            "phi" => args.phi = Some(formula(value)?),
            "psi" => args.psi = Some(formula(value)?),
            "assign" => {
                let mut s = Assignment::new();
                for pair in value.split(',').filter(|p| !p.trim().is_empty()) {
                    let (v, n) = pair.split_once(':').ok_or_else(|| format!("bad assignment entry `{pair}`"))?;
                    let n: u64 = n.trim().parse().map_err(|_| format!("bad value in `{pair}`"))?;
                    if n > crate::syntax::MAX_NUMERAL {
                        return Err(format!("value {n} exceeds {}", crate::syntax::MAX_NUMERAL));
                    }
                    s = s.with(&ident(v.trim())?, n);
                }
                args.assignment = Some(s);
            }
            "closure" => {
                args.closure_vars = Some(
                    value
                        .split(',')
                        .map(str::trim)
                        .filter(|v| !v.is_empty())
                        .map(ident)
                        .collect::<Result<_, _>>()?,
                )
            }
            "var" => args.var = Some(ident(value)?),
            "witness" => args.witness = Some(ident(value)?),
            "index" => args.index = Some(value.parse().map_err(|_| format!("bad index `{value}`"))?),
            other => return Err(format!("unknown parameter `{other}`")),
        }
    }
    Ok((id, args))
}

pub fn parse_theory(text: &str) -> Result<TheoryPresentation, TheoryFileError> {
    let mut t = TheoryPresentation::default();
    for (idx, raw) in text.lines().enumerate() {
        let err = |message: String| TheoryFileError { line: idx + 1, message };
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once(':').ok_or_else(|| err("expected `key: value`".into()))?;
        let value = value.trim();
        match key.trim() {
            "sentence" => t.base_sentences.push(formula(value).map_err(err)?),
            "pool" => t.pool.push(formula(value).map_err(err)?),
            "schema" => {
                t.schemas.insert(value.parse().map_err(|e: super::TheoryError| err(e.to_string()))?);
            }
            "instance" => t.instances.push(instance(value).map_err(err)?),
            "k-closure" => {
                let k: usize = value.parse().map_err(|_| err(format!("bad k-closure depth `{value}`")))?;
                if k > 16 {
                    return Err(err("k-closure depth above 16".into()));
                }
                t.k_closure_depth = k;
            }
            other => return Err(err(format!("unknown record `{other}`"))),
        }
    }
    Ok(t)
}

/// Render a presentation; [`parse_theory`] reads it back unchanged.
pub fn render_theory(t: &TheoryPresentation) -> String {
    let mut out = String::new();
    for s in &t.base_sentences {
        out.push_str(&format!("sentence: {}\n", render_formula(s)));
    }
    for p in &t.pool {
        out.push_str(&format!("pool: {}\n", render_formula(p)));
    }
    for id in &t.schemas {
        out.push_str(&format!("schema: {id}\n"));
    }
    for (id, a) in &t.instances {
        let mut line = format!("instance: {id}");
        if let Some(phi) = &a.phi {
            line.push_str(&format!("; phi = {}", render_formula(phi)));
        }
        if let Some(psi) = &a.psi {
            line.push_str(&format!("; psi = {}", render_formula(psi)));
        }
        if let Some(s) = &a.assignment {
            let items: Vec<String> = s.0.iter().map(|(k, v)| format!("{k}:{v}")).collect();
            line.push_str(&format!("; assign = {}", items.join(",")));
        }
        if let Some(vars) = &a.closure_vars {
            line.push_str(&format!("; closure = {}", vars.join(",")));
        }
        if let Some(v) = &a.var {
            line.push_str(&format!("; var = {v}"));
        }
        if let Some(v) = &a.witness {
            line.push_str(&format!("; witness = {v}"));
        }
        if let Some(i) = a.index {
            line.push_str(&format!("; index = {i}"));
        }
        out.push_str(&line);
        out.push('\n');
    }
    out.push_str(&format!("k-closure: {}\n", t.k_closure_depth));
    out
}
