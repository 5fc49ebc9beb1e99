//! Seeded random formulas, terms, assignments and stratifier specs for
//! property suites and benchmarks.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ordinal::{omega_times, Ordinal};
use crate::stratify::{StratifierSpec, Tail};
use crate::syntax::{Assignment, Formula, OperatorTag, Term, Var};

/// Which operator nodes may appear.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TagMode {
    /// Pure arithmetic.
    None,
    /// Plain `K` only.
    Plain,
    /// `K^α` with `α` drawn from the list.
    Indexed(Vec<Ordinal>),
}

#[derive(Clone, Debug)]
pub struct GenConfig {
    /// Height bound on the formula tree, counting formula nodes only.
    pub max_depth: usize,
    /// Bound on [`Formula::node_count`].
    pub max_nodes: usize,
    pub vars: Vec<Var>,
    pub tags: TagMode,
    pub allow_in: bool,
    pub quantifiers: bool,
    pub max_numeral: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_depth: 6,
            max_nodes: 60,
            vars: ["x", "y", "z"].map(String::from).to_vec(),
            tags: TagMode::Plain,
            allow_in: true,
            quantifiers: true,
            max_numeral: 3,
        }
    }
}

impl GenConfig {
    pub fn with_tags(mut self, tags: TagMode) -> Self {
        self.tags = tags;
        self
    }

    pub fn with_limits(mut self, max_depth: usize, max_nodes: usize) -> Self {
        self.max_depth = max_depth;
        self.max_nodes = max_nodes;
        self
    }
}

/// Smallest formula: an atom over two leaves.
const ATOM: usize = 3;

pub struct FormulaGen {
    rng: ChaCha8Rng,
    cfg: GenConfig,
}

impl FormulaGen {
    pub fn new(seed: u64, cfg: GenConfig) -> Self {
        FormulaGen { rng: ChaCha8Rng::seed_from_u64(seed), cfg }
    }

    pub fn config(&self) -> &GenConfig {
        &self.cfg
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn formula(&mut self) -> Formula {
        let mut left = self.cfg.max_nodes.max(ATOM);
        self.gen_formula(self.cfg.max_depth, &mut left)
    }

    fn gen_formula(&mut self, depth: usize, left: &mut usize) -> Formula {
        let ops = self.cfg.tags != TagMode::None;
        let mut choices = vec![0];
        if depth > 0 && *left > ATOM {
            choices.extend([1, 2, 2]);
            if self.cfg.quantifiers && !self.cfg.vars.is_empty() {
                choices.push(3);
            }
            if ops {
                choices.extend([4, 4]);
            }
        }
        match *choices.choose(&mut self.rng).expect("nonempty") {
            1 => {
                *left -= 1;
                Formula::not(self.gen_formula(depth - 1, left))
            }
            2 if *left > 2 * ATOM => {
                *left -= 1 + ATOM;
                let a = self.gen_formula(depth - 1, left);
                *left += ATOM;
                let b = self.gen_formula(depth - 1, left);
                Formula::implies(a, b)
            }
            3 => {
                *left -= 1;
                let x = self.cfg.vars.choose(&mut self.rng).expect("nonempty").clone();
                Formula::forall(&x, self.gen_formula(depth - 1, left))
            }
            4 => {
                *left -= 1;
                let tag = self.tag();
                Formula::op(tag, self.gen_formula(depth - 1, left))
            }
            _ => self.atom(left),
        }
    }

    fn tag(&mut self) -> OperatorTag {
        match &self.cfg.tags {
            TagMode::Indexed(pool) if !pool.is_empty() => {
                OperatorTag::Indexed(*pool.choose(&mut self.rng).expect("nonempty"))
            }
            _ => OperatorTag::Plain,
        }
    }

    fn atom(&mut self, left: &mut usize) -> Formula {
        *left = left.saturating_sub(1);
        // each side gets at least one node
        let mut l_budget = (*left / 2).max(1);
        let mut r_budget = (*left - *left / 2).max(1);
        let start = l_budget + r_budget;
        let a = self.gen_term(2, &mut l_budget);
        let b = self.gen_term(2, &mut r_budget);
        *left = left.saturating_sub(start - l_budget - r_budget);
        if self.cfg.allow_in && self.rng.gen_ratio(1, 5) {
            Formula::In(a, b)
        } else {
            Formula::Eq(a, b)
        }
    }

    /// A term with at most `depth` nested constructors.
    pub fn term(&mut self, depth: usize) -> Term {
        let mut left = usize::MAX;
        self.gen_term(depth, &mut left)
    }

    fn gen_term(&mut self, depth: usize, left: &mut usize) -> Term {
        let pick = if depth == 0 || *left < 3 { self.rng.gen_range(0..3) } else { self.rng.gen_range(0..6) };
        match pick {
            0 if !self.cfg.vars.is_empty() => {
                *left -= 1;
                Term::Var(self.cfg.vars.choose(&mut self.rng).expect("nonempty").clone())
            }
            1 | 0 => {
                let n = self.rng.gen_range(0..=self.cfg.max_numeral);
                let n = n.min(left.saturating_sub(1) as u64);
                *left -= n as usize + 1;
                Term::numeral(n)
            }
            2 => {
                *left -= 1;
                Term::Zero
            }
            3 => {
                *left -= 1;
                Term::succ(self.gen_term(depth - 1, left))
            }
            k => {
                *left -= 2;
                let a = self.gen_term(depth - 1, left);
                *left += 1;
                let b = self.gen_term(depth - 1, left);
                if k == 4 {
                    Term::plus(a, b)
                } else {
                    Term::times(a, b)
                }
            }
        }
    }

    /// Values below `bound` for each variable in the configured list.
    pub fn assignment(&mut self, bound: u64) -> Assignment {
        let vars = self.cfg.vars.clone();
        vars.iter().fold(Assignment::new(), |s, v| s.with(v, self.rng.gen_range(0..bound.max(1))))
    }

    /// A stratifier spec with a small seed and either kind of tail.
    pub fn spec(&mut self) -> StratifierSpec {
        let tail = if self.rng.gen_bool(0.5) {
            let starts = [0, 1, 3].map(Ordinal::finite).into_iter().chain([omega_times(1), Ordinal::new(1, 2), omega_times(2)]);
            Tail::AllOrdinalsFrom(starts.collect::<Vec<_>>().choose(&mut self.rng).copied().expect("nonempty"))
        } else {
            Tail::LimitMultiplesFrom(self.rng.gen_range(1..=3))
        };
        let below: Vec<Ordinal> = [0, 1, 2, 5]
            .map(Ordinal::finite)
            .into_iter()
            .chain([omega_times(1), Ordinal::new(1, 1), Ordinal::new(1, 4), omega_times(2)])
            .filter(|a| *a < tail.least())
            .collect();
        let k = self.rng.gen_range(0..=below.len().min(3));
        let seed: Vec<Ordinal> = below.choose_multiple(&mut self.rng, k).copied().collect();
        StratifierSpec::new(seed, tail).expect("seed lies below the tail")
    }
}
