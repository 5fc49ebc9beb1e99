use super::{Formula, Term, Var};

/// The operator key of a body: its alphabetic-variant class with every free
/// variable occurrence replaced by a numbered slot.
///
/// Free occurrences are numbered `v0, v1, …` left to right, one slot per
/// occurrence, and `args` lists the variable found at each slot. Bound
/// variables are renamed `b0, b1, …` by binder nesting level. Since every
/// occurrence gets its own slot, `Kφ(x|y)` and `Kφ` share a key and differ only
/// in their argument lists, which is what weak substitution demands.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SlotCanonical {
    pub key: Formula,
    pub args: Vec<Var>,
}

pub fn slot_canonical(body: &Formula) -> SlotCanonical {
    let mut args = Vec::new();
    let key = canon_formula(body, &mut Vec::new(), &mut args);
    SlotCanonical { key, args }
}

fn canon_term(t: &Term, env: &[Var], args: &mut Vec<Var>) -> Term {
    match t {
        Term::Var(v) => match env.iter().rposition(|b| b == v) {
            Some(level) => Term::Var(format!("b{level}")),
            None => {
                let slot = args.len();
                args.push(v.clone());
                Term::Var(format!("v{slot}"))
            }
        },
        Term::Zero => Term::Zero,
        Term::Succ(a) => Term::succ(canon_term(a, env, args)),
        Term::Plus(a, b) => {
            let a = canon_term(a, env, args);
            Term::plus(a, canon_term(b, env, args))
        }
        Term::Times(a, b) => {
            let a = canon_term(a, env, args);
            Term::times(a, canon_term(b, env, args))
        }
    }
}

fn canon_formula(phi: &Formula, env: &mut Vec<Var>, args: &mut Vec<Var>) -> Formula {
    match phi {
        Formula::Eq(a, b) => {
            let a = canon_term(a, env, args);
            Formula::Eq(a, canon_term(b, env, args))
        }
        Formula::In(a, b) => {
            let a = canon_term(a, env, args);
            Formula::In(a, canon_term(b, env, args))
        }
        Formula::Not(a) => Formula::not(canon_formula(a, env, args)),
        Formula::Implies(a, b) => {
            let a = canon_formula(a, env, args);
            Formula::implies(a, canon_formula(b, env, args))
        }
        Formula::Op(t, a) => Formula::op(*t, canon_formula(a, env, args)),
        Formula::Forall(x, a) => {
            let level = env.len();
            env.push(x.clone());
            let body = canon_formula(a, env, args);
            env.pop();
            Formula::Forall(format!("b{level}"), Box::new(body))
        }
    }
}
