//! Stratifiers `φ ↦ φ⁺`, destratification `φ ↦ φ⁻`, ordinal maps `h(φ)`,
//! stratifier composition, collapse maps and recognition of stratified images.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::ordinal::{omega_times, Ordinal, OrdinalError};
use crate::syntax::{on_set, render_formula, Formula, OperatorTag};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StratifyError {
    #[error("stratify expects an epistemic formula, found superscripted operator K^{{{0}}}")]
    IndexedTag(Ordinal),
    #[error("destratify expects a stratified formula, found a plain K")]
    PlainTag,
    #[error("invalid stratifier spec: {0}")]
    BadSpec(String),
    #[error(transparent)]
    Ordinal(#[from] OrdinalError),
    #[error("ordinal map is not order-preserving")]
    NotOrderPreserving,
    #[error("superscript {0} of the stratified formula is outside the map's domain")]
    OutsideDomain(Ordinal),
    #[error("composed stratifier check failed: expected `{expected}`, got `{got}`")]
    PostCheck { expected: String, got: String },
    #[error("collapse needs n >= 1")]
    ZeroCollapse,
}

/// The regular tail of a stratifier set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Tail {
    /// `{β : β ≥ γ}`.
    AllOrdinalsFrom(Ordinal),
    /// `{ω·k, ω·(k+1), …}`.
    LimitMultiplesFrom(u64),
}

impl Tail {
    pub fn least(self) -> Ordinal {
        match self {
            Tail::AllOrdinalsFrom(g) => g,
            Tail::LimitMultiplesFrom(k) => omega_times(k),
        }
    }

    fn contains(self, a: Ordinal) -> bool {
        match self {
            Tail::AllOrdinalsFrom(g) => a >= g,
            Tail::LimitMultiplesFrom(k) => a.offset == 0 && a.limit >= k,
        }
    }

    /// The element after `a`, assuming `a` is in the tail.
    fn next(self, a: Ordinal) -> Ordinal {
        match self {
            Tail::AllOrdinalsFrom(_) => a.successor(),
            Tail::LimitMultiplesFrom(_) => omega_times(a.limit + 1),
        }
    }
}

/// An infinite set `X ⊆ ω·ω` presented as a finite sorted seed followed by a
/// regular tail. Every seed element lies below the tail's least element.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StratifierSpec {
    seed: Vec<Ordinal>,
    tail: Tail,
}

impl StratifierSpec {
    pub fn new(seed: impl IntoIterator<Item = Ordinal>, tail: Tail) -> Result<Self, StratifyError> {
        let seed: BTreeSet<Ordinal> = seed.into_iter().collect();
        if let Some(&max) = seed.iter().next_back() {
            if max >= tail.least() {
                return Err(StratifyError::BadSpec(format!(
                    "seed element {max} does not precede the tail start {}",
                    tail.least()
                )));
            }
        }
        Ok(StratifierSpec { seed: seed.into_iter().collect(), tail })
    }

    /// `X = {ω·1, ω·2, …}`.
    pub fn veristratifier() -> Self {
        StratifierSpec { seed: Vec::new(), tail: Tail::LimitMultiplesFrom(1) }
    }

    /// `X = {γ, γ+1, …}`.
    pub fn all_from(gamma: Ordinal) -> Self {
        StratifierSpec { seed: Vec::new(), tail: Tail::AllOrdinalsFrom(gamma) }
    }

    /// `X = {ω·k, ω·(k+1), …}`.
    pub fn limits_from(k: u64) -> Self {
        StratifierSpec { seed: Vec::new(), tail: Tail::LimitMultiplesFrom(k) }
    }

    pub fn seed(&self) -> &[Ordinal] {
        &self.seed
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    pub fn contains(&self, a: Ordinal) -> bool {
        self.seed.binary_search(&a).is_ok() || self.tail.contains(a)
    }

    /// Elements of `X` in increasing order (an infinite iterator).
    pub fn elements(&self) -> impl Iterator<Item = Ordinal> + '_ {
        let tail = self.tail;
        self.seed
            .iter()
            .copied()
            .chain(std::iter::successors(Some(tail.least()), move |a| Some(tail.next(*a))))
    }

    /// The `j`-th smallest element of `X`, counting from zero.
    pub fn nth(&self, j: usize) -> Ordinal {
        self.elements().nth(j).expect("stratifier sets are infinite")
    }

    /// `min(X \ S)`.
    pub fn least_excluding(&self, excluded: &BTreeSet<Ordinal>) -> Ordinal {
        // at most |S| elements of X can be skipped
        self.elements()
            .find(|a| !excluded.contains(a))
            .expect("stratifier sets are infinite")
    }
}

impl fmt::Display for StratifierSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.seed.is_empty() {
            let items: Vec<String> = self.seed.iter().map(|a| a.to_string()).collect();
            write!(f, "seed:[{}] ", items.join(","))?;
        }
        match self.tail {
            Tail::AllOrdinalsFrom(g) => write!(f, "tail:all-from({g})"),
            Tail::LimitMultiplesFrom(k) => write!(f, "tail:limits-from({k})"),
        }
    }
}

impl FromStr for StratifierSpec {
    type Err = StratifyError;

    /// `seed:[w,w*2] tail:all-from(w*3)` or `tail:limits-from(1)`; the seed
    /// part is optional.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |m: &str| StratifyError::BadSpec(format!("{m} in `{s}`"));
        let text = s.trim();
        let (seed, rest) = match text.strip_prefix("seed:") {
            Some(r) => {
                let r = r.trim_start();
                let r = r.strip_prefix('[').ok_or_else(|| bad("expected `[` after `seed:`"))?;
                let (list, rest) = r.split_once(']').ok_or_else(|| bad("unterminated seed list"))?;
                let seed = list
                    .split(',')
                    .map(str::trim)
                    .filter(|t| !t.is_empty())
                    .map(|t| t.parse::<Ordinal>())
                    .collect::<Result<Vec<_>, _>>()?;
                (seed, rest.trim_start())
            }
            None => (Vec::new(), text),
        };
        let tail_text = rest.strip_prefix("tail:").ok_or_else(|| bad("expected `tail:`"))?.trim();
        let arg = |prefix: &str| -> Option<&str> {
            tail_text.strip_prefix(prefix)?.trim().strip_prefix('(')?.strip_suffix(')')
        };
        let tail = if let Some(a) = arg("all-from") {
            Tail::AllOrdinalsFrom(a.trim().parse()?)
        } else if let Some(a) = arg("limits-from") {
            let k = a.trim().parse::<u64>().map_err(|_| bad("limits-from takes a natural number"))?;
            Tail::LimitMultiplesFrom(k)
        } else {
            return Err(bad("tail must be `all-from(<ordinal>)` or `limits-from(<nat>)`"));
        };
        StratifierSpec::new(seed, tail)
    }
}

/// `φ⁺` under the stratifier given by `x`.
pub fn stratify(phi: &Formula, x: &StratifierSpec) -> Result<Formula, StratifyError> {
    stratify_with_on(phi, x).map(|(f, _)| f)
}

/// `φ⁺` together with `On(φ⁺)`.
pub fn stratify_with_on(
    phi: &Formula,
    x: &StratifierSpec,
) -> Result<(Formula, BTreeSet<Ordinal>), StratifyError> {
    Ok(match phi {
        Formula::Eq(..) | Formula::In(..) => (phi.clone(), BTreeSet::new()),
        Formula::Not(a) => {
            let (a, on) = stratify_with_on(a, x)?;
            (Formula::not(a), on)
        }
        Formula::Forall(v, a) => {
            let (a, on) = stratify_with_on(a, x)?;
            (Formula::Forall(v.clone(), Box::new(a)), on)
        }
        Formula::Implies(a, b) => {
            let (a, mut on_a) = stratify_with_on(a, x)?;
            let (b, mut on_b) = stratify_with_on(b, x)?;
            if on_a.len() < on_b.len() {
                std::mem::swap(&mut on_a, &mut on_b);
            }
            on_a.append(&mut on_b);
            (Formula::implies(a, b), on_a)
        }
        Formula::Op(OperatorTag::Plain, body) => {
            let (body, mut on) = stratify_with_on(body, x)?;
            let alpha = x.least_excluding(&on);
            on.insert(alpha);
            (Formula::k_at(alpha, body), on)
        }
        Formula::Op(OperatorTag::Indexed(a), _) => return Err(StratifyError::IndexedTag(*a)),
    })
}

/// `φ⁻`: erase every superscript. Plain operators are rejected.
pub fn destratify(phi: &Formula) -> Result<Formula, StratifyError> {
    destratify_inner(phi, true)
}

/// Like [`destratify`] but leaves plain operators alone.
pub fn destratify_lenient(phi: &Formula) -> Formula {
    destratify_inner(phi, false).expect("lenient mode never fails")
}

fn destratify_inner(phi: &Formula, strict: bool) -> Result<Formula, StratifyError> {
    Ok(match phi {
        Formula::Eq(..) | Formula::In(..) => phi.clone(),
        Formula::Not(a) => Formula::not(destratify_inner(a, strict)?),
        Formula::Forall(v, a) => Formula::Forall(v.clone(), Box::new(destratify_inner(a, strict)?)),
        Formula::Implies(a, b) => {
            Formula::implies(destratify_inner(a, strict)?, destratify_inner(b, strict)?)
        }
        Formula::Op(OperatorTag::Plain, _) if strict => return Err(StratifyError::PlainTag),
        Formula::Op(_, a) => Formula::k(destratify_inner(a, strict)?),
    })
}

/// A finite map on ordinals `h : X₀ → ω·ω`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct OrdinalMap {
    map: BTreeMap<Ordinal, Ordinal>,
    order_preserving: bool,
}

impl OrdinalMap {
    pub fn new(pairs: impl IntoIterator<Item = (Ordinal, Ordinal)>) -> Self {
        let map: BTreeMap<Ordinal, Ordinal> = pairs.into_iter().collect();
        let order_preserving = map.values().zip(map.values().skip(1)).all(|(a, b)| a < b);
        OrdinalMap { map, order_preserving }
    }

    pub fn identity_on(set: impl IntoIterator<Item = Ordinal>) -> Self {
        OrdinalMap::new(set.into_iter().map(|a| (a, a)))
    }

    pub fn get(&self, a: Ordinal) -> Option<Ordinal> {
        self.map.get(&a).copied()
    }

    pub fn is_order_preserving(&self) -> bool {
        self.order_preserving
    }

    pub fn is_injective(&self) -> bool {
        let range: BTreeSet<_> = self.map.values().collect();
        range.len() == self.map.len()
    }

    pub fn domain(&self) -> impl Iterator<Item = Ordinal> + '_ {
        self.map.keys().copied()
    }

    pub fn range(&self) -> impl Iterator<Item = Ordinal> + '_ {
        self.map.values().copied()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (Ordinal, Ordinal)> + '_ {
        self.map.iter().map(|(a, b)| (*a, *b))
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().all(|(a, b)| a == b)
    }

    pub fn inverse(&self) -> Option<OrdinalMap> {
        self.is_injective()
            .then(|| OrdinalMap::new(self.map.iter().map(|(a, b)| (*b, *a))))
    }
}

impl fmt::Display for OrdinalMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.map.iter().map(|(a, b)| format!("{a}:{b}")).collect();
        write!(f, "{}", items.join(","))
    }
}

impl FromStr for OrdinalMap {
    type Err = StratifyError;

    /// Comma-separated `from:to` pairs, e.g. `0:w,1:w*2`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut pairs = Vec::new();
        for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (a, b) = item
                .split_once(':')
                .ok_or_else(|| StratifyError::BadSpec(format!("map entry `{item}` is not `from:to`")))?;
            pairs.push((a.trim().parse()?, b.trim().parse()?));
        }
        let domain: BTreeSet<_> = pairs.iter().map(|(a, _)| *a).collect();
        if domain.len() != pairs.len() {
            return Err(StratifyError::BadSpec("map lists an ordinal twice".into()));
        }
        Ok(OrdinalMap::new(pairs))
    }
}

/// `h(φ)`: rewrite `K^α` to `K^{h(α)}` for `α ∈ dom h`; other operators stay.
pub fn apply_ordinal_map(phi: &Formula, h: &OrdinalMap) -> Formula {
    match phi {
        Formula::Eq(..) | Formula::In(..) => phi.clone(),
        Formula::Not(a) => Formula::not(apply_ordinal_map(a, h)),
        Formula::Forall(v, a) => Formula::Forall(v.clone(), Box::new(apply_ordinal_map(a, h))),
        Formula::Implies(a, b) => Formula::implies(apply_ordinal_map(a, h), apply_ordinal_map(b, h)),
        Formula::Op(OperatorTag::Indexed(alpha), a) => {
            let tag = OperatorTag::Indexed(h.get(*alpha).unwrap_or(*alpha));
            Formula::op(tag, apply_ordinal_map(a, h))
        }
        Formula::Op(OperatorTag::Plain, a) => Formula::k(apply_ordinal_map(a, h)),
    }
}

/// A stratifier `Y` with `stratify(φ, Y) = h(stratify(φ, X))`.
///
/// `Y` is the image of `On(φ⁺)` under `h` followed by every ordinal above it.
/// The defining equation is re-checked before returning.
pub fn compose_stratifier(
    x: &StratifierSpec,
    h: &OrdinalMap,
    phi: &Formula,
) -> Result<StratifierSpec, StratifyError> {
    if !h.is_order_preserving() {
        return Err(StratifyError::NotOrderPreserving);
    }
    let (plus, on) = stratify_with_on(phi, x)?;
    let mut image = BTreeSet::new();
    for a in on {
        image.insert(h.get(a).ok_or(StratifyError::OutsideDomain(a))?);
    }
    let start = image.iter().next_back().map_or(Ordinal::ZERO, |m| m.successor());
    let y = StratifierSpec::new(image, Tail::AllOrdinalsFrom(start))?;
    let expected = apply_ordinal_map(&plus, h);
    let got = stratify(phi, &y)?;
    if got != expected {
        return Err(StratifyError::PostCheck {
            expected: render_formula(&expected),
            got: render_formula(&got),
        });
    }
    Ok(y)
}

/// An order-preserving map fixing `S ∩ ω·n` and sending the rest of `S` onto
/// the smallest ordinals of `ω·n` above that part.
pub fn collapse_map(set: &BTreeSet<Ordinal>, n: u64) -> Result<OrdinalMap, StratifyError> {
    if n == 0 {
        return Err(StratifyError::ZeroCollapse);
    }
    let (low, high): (Vec<Ordinal>, Vec<Ordinal>) =
        set.iter().copied().partition(|a| a.below_omega_times(n));
    let mut next = low.last().map_or(Ordinal::ZERO, |m| m.successor());
    let mut pairs: Vec<(Ordinal, Ordinal)> = low.iter().map(|a| (*a, *a)).collect();
    for a in high {
        pairs.push((a, next));
        next = next.successor();
    }
    Ok(OrdinalMap::new(pairs))
}

/// Decide whether `σ` is the image of some stratifier; on success return a
/// witness.
///
/// The witness is `On(σ)` followed by everything above its maximum. Any
/// stratifier reproducing `σ` can drop the unused elements of its set without
/// changing a single minimum, so this witness is canonical.
pub fn recognize_stratified(sigma: &Formula) -> Option<StratifierSpec> {
    let plain = destratify(sigma).ok()?;
    let on = on_set(sigma);
    let start = on.iter().next_back().map_or(Ordinal::ZERO, |m| m.successor());
    let witness = StratifierSpec::new(on, Tail::AllOrdinalsFrom(start)).ok()?;
    (stratify(&plain, &witness).ok()? == *sigma).then_some(witness)
}
