use std::collections::HashMap;
use std::sync::Arc;

use super::{
    eval, eval_partial, Arithmetic, Compiled, Element, EvalAssignment, FiniteStructure, Interp, Query, TableOracle,
    TableVariant, Val,
};
use crate::syntax::{close, free_vars_ordered, Formula, OperatorTag};

/// A finite structure and assignment under which a formula is false.
#[derive(Clone, Debug)]
pub struct Countermodel {
    pub structure: FiniteStructure,
    pub assignment: EvalAssignment,
    pub variant: TableVariant,
    /// The oracle entries the search fixed, kept for rendering.
    pub oracle: TableOracle,
}

struct Partial<'a> {
    arith: &'a Arithmetic,
    ops: HashMap<(OperatorTag, Arc<Formula>, Vec<Element>), bool>,
    ins: HashMap<(Element, Element), bool>,
}

impl Interp for Partial<'_> {
    fn arith(&self) -> &Arithmetic {
        self.arith
    }

    fn op(&self, tag: OperatorTag, key: &Arc<Formula>, args: &[Element]) -> Option<bool> {
        self.ops.get(&(tag, key.clone(), args.to_vec())).copied()
    }

    fn in_rel(&self, a: Element, b: Element) -> Option<bool> {
        self.ins.get(&(a, b)).copied()
    }
}

enum Step {
    Found,
    Dead,
    Exhausted,
}

struct Search {
    budget: usize,
    spent: usize,
}

impl Search {
    fn dfs(&mut self, partial: &mut Partial<'_>, target: &Compiled) -> Step {
        if self.spent >= self.budget {
            return Step::Exhausted;
        }
        self.spent += 1;
        let query = match eval_partial(partial, target, &mut Vec::new()) {
            Val::False => return Step::Found,
            Val::True => return Step::Dead,
            Val::Open(q) => q,
        };
        for value in [false, true] {
            match &query {
                Query::Op(t, k, a) => partial.ops.insert((*t, k.clone(), a.clone()), value),
                Query::In(a, b) => partial.ins.insert((*a, *b), value),
            };
            match self.dfs(partial, target) {
                Step::Dead => {}
                done => return done,
            }
        }
        match &query {
            Query::Op(t, k, a) => partial.ops.remove(&(*t, k.clone(), a.clone())),
            Query::In(a, b) => partial.ins.remove(&(*a, *b)),
        };
        Step::Dead
    }
}

/// Search for a finite countermodel of `phi`.
///
/// Universe sizes `1..=max_universe` are tried in order, each with the table
/// family in [`TableVariant::ALL`] order. Operator and `In` values are fixed
/// lazily: only queries the evaluation actually depends on are branched on.
/// `oracle_budget` caps the number of partial evaluations over the whole run.
/// The first countermodel in this order is returned, together with the
/// lexicographically first falsifying assignment.
pub fn countermodel_search(phi: &Formula, max_universe: u32, oracle_budget: usize) -> Option<Countermodel> {
    countermodel_search_counted(phi, max_universe, oracle_budget).0
}

/// As [`countermodel_search`], also returning the number of candidates tried.
pub fn countermodel_search_counted(
    phi: &Formula,
    max_universe: u32,
    oracle_budget: usize,
) -> (Option<Countermodel>, usize) {
    let target = Compiled::new(&close(phi));
    let mut search = Search { budget: oracle_budget, spent: 0 };
    for size in 1..=max_universe {
        // every variant coincides on a single point
        let variants: &[TableVariant] = if size == 1 { &TableVariant::ALL[..1] } else { &TableVariant::ALL };
        for &variant in variants {
            let arith = Arithmetic::from_variant(size, variant);
            let mut partial = Partial { arith: &arith, ops: HashMap::new(), ins: HashMap::new() };
            match search.dfs(&mut partial, &target) {
                Step::Found => {
                    let model = build(phi, &partial, variant);
                    return (Some(model), search.spent);
                }
                Step::Exhausted => return (None, search.spent),
                Step::Dead => {}
            }
        }
    }
    (None, search.spent)
}

fn build(phi: &Formula, partial: &Partial<'_>, variant: TableVariant) -> Countermodel {
    let size = partial.arith.size();
    let mut oracle = TableOracle::new(false);
    for ((tag, key, args), value) in &partial.ops {
        oracle.set(*tag, key, args.clone(), *value);
    }
    let mut in_rel = vec![false; (size * size) as usize];
    for (&(a, b), &value) in &partial.ins {
        in_rel[(a * size + b) as usize] = value;
    }
    let arith = partial.arith.clone().with_in_relation(in_rel).expect("table sized from the universe");
    let structure = FiniteStructure::new(arith, oracle.clone());
    let vars = free_vars_ordered(phi);
    let assignment = EvalAssignment::enumerate(&vars, size)
        .find(|s| !eval(&structure, phi, s).expect("assignment covers the free variables"))
        .expect("the closure is false, so some assignment falsifies the formula");
    Countermodel { structure, assignment, variant, oracle }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_formula;

    fn p(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    #[test]
    fn valid_formulas_have_no_countermodel() {
        for f in ["0=0 -> 0=0", "K(1=0) -> K(1=0)", "forall x. (x=x)", "K(x=y) -> K(x=y)"] {
            assert!(countermodel_search(&p(f), 3, 10_000).is_none(), "{f}");
        }
    }

    #[test]
    fn truthfulness_fails_in_some_structure() {
        let phi = p("K(1=0) -> (1=0)");
        let m = countermodel_search(&phi, 3, 10_000).expect("countermodel");
        assert_eq!(m.structure.universe_size(), 2);
        assert!(!eval(&m.structure, &phi, &m.assignment).unwrap());
        assert!(eval(&m.structure, &p("K(1=0)"), &EvalAssignment::new()).unwrap());
    }

    #[test]
    fn table_family_is_covered() {
        let phi = p("1=0");
        let m = countermodel_search(&phi, 3, 100).expect("countermodel");
        assert_eq!(m.structure.arithmetic().succ(0), 1);
        // succ is the identity in the stuck tables, but cyclic comes first
        assert!(countermodel_search(&p("S(0)=0"), 1, 100).is_none());
        assert!(countermodel_search(&p("S(0)=0"), 2, 100).is_some());
    }

    #[test]
    fn open_formulas_get_an_assignment() {
        let phi = p("K(x=y) -> (x=y)");
        let m = countermodel_search(&phi, 3, 10_000).expect("countermodel");
        assert!(!eval(&m.structure, &phi, &m.assignment).unwrap());
        assert_ne!(m.assignment.get("x"), m.assignment.get("y"));
    }

    #[test]
    fn budget_zero_finds_nothing() {
        assert!(countermodel_search(&p("1=0"), 3, 0).is_none());
    }

    #[test]
    fn in_relation_is_searched() {
        let phi = p("In(0,0)");
        let m = countermodel_search(&phi, 2, 100).expect("countermodel");
        assert!(!m.structure.arithmetic().in_rel(0, 0));
        assert!(countermodel_search(&p("In(0,0) -> In(0,0)"), 2, 100).is_none());
    }
}
