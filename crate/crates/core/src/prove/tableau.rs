//! A signed ground tableau for the abstracted first-order language.
//!
//! Free variables of the input are read as parameters `#x`. Every formula on a
//! branch carries the set of input tags and branch markers it depends on, so a
//! closed subtree reports which premises it used and a branch whose closure
//! does not mention its own marker is skipped (backjumping). Equality is
//! handled at closure time by congruence closure over the branch's literals.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::rc::Rc;

use super::Fol;
use crate::syntax::{Term, Var};

pub(crate) type Deps = BTreeSet<u32>;

const MARKER_BASE: u32 = 1 << 30;

pub(crate) struct Input {
    pub sign: bool,
    pub formula: Fol,
    pub tag: Option<u32>,
}

#[derive(Debug)]
pub(crate) enum Outcome {
    Closed(Deps),
    Open,
    Exhausted,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub(crate) struct Stats {
    pub steps: usize,
    pub instantiations: usize,
    pub branches: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Atom {
    Eq(Term, Term),
    In(Term, Term),
    Pred(usize, Vec<Term>),
}

#[derive(Debug)]
enum Node {
    Atom(Atom),
    Not(Rc<Node>),
    Implies(Rc<Node>, Rc<Node>),
    Forall(Var, Rc<Node>),
}

#[derive(Clone)]
struct Item {
    sign: bool,
    node: Rc<Node>,
    deps: Rc<Deps>,
}

#[derive(Clone)]
struct Gamma {
    var: Var,
    body: Rc<Node>,
    deps: Rc<Deps>,
    next: usize,
}

#[derive(Clone, Default)]
struct Branch {
    lits: HashMap<Atom, (bool, Rc<Deps>)>,
    eqs: Vec<(Term, Term, Rc<Deps>)>,
    betas: Vec<Item>,
    gammas: Vec<Gamma>,
    terms: Vec<Term>,
    known_terms: HashSet<Term>,
}

impl Branch {
    fn add_term(&mut self, t: &Term) {
        if self.known_terms.contains(t) {
            return;
        }
        match t {
            Term::Succ(a) => self.add_term(a),
            Term::Plus(a, b) | Term::Times(a, b) => {
                self.add_term(a);
                self.add_term(b);
            }
            Term::Var(_) | Term::Zero => {}
        }
        self.known_terms.insert(t.clone());
        self.terms.push(t.clone());
    }
}

pub(crate) fn run(inputs: Vec<Input>, limit: usize) -> (Outcome, Stats) {
    let mut t = Tableau { limit, stats: Stats::default(), markers: MARKER_BASE, params: 0 };
    let mut branch = Branch::default();
    branch.add_term(&Term::Zero);
    let pending = inputs
        .into_iter()
        .rev()
        .map(|i| Item {
            sign: i.sign,
            node: convert(&i.formula, &mut Vec::new()),
            deps: Rc::new(i.tag.into_iter().collect()),
        })
        .collect();
    let outcome = t.solve(branch, pending);
    let outcome = match outcome {
        Outcome::Closed(d) => Outcome::Closed(d.into_iter().filter(|&x| x < MARKER_BASE).collect()),
        other => other,
    };
    (outcome, t.stats)
}

fn param(name: &str) -> String {
    format!("#{name}")
}

fn convert_term(t: &Term, bound: &[Var]) -> Term {
    match t {
        Term::Var(v) if bound.contains(v) => t.clone(),
        Term::Var(v) => Term::Var(param(v)),
        Term::Zero => Term::Zero,
        Term::Succ(a) => Term::succ(convert_term(a, bound)),
        Term::Plus(a, b) => Term::plus(convert_term(a, bound), convert_term(b, bound)),
        Term::Times(a, b) => Term::times(convert_term(a, bound), convert_term(b, bound)),
    }
}

fn convert(f: &Fol, bound: &mut Vec<Var>) -> Rc<Node> {
    Rc::new(match f {
        Fol::Eq(a, b) => Node::Atom(Atom::Eq(convert_term(a, bound), convert_term(b, bound))),
        Fol::In(a, b) => Node::Atom(Atom::In(convert_term(a, bound), convert_term(b, bound))),
        Fol::Pred(p, args) => Node::Atom(Atom::Pred(*p, args.iter().map(|a| convert_term(a, bound)).collect())),
        Fol::Not(a) => Node::Not(convert(a, bound)),
        Fol::Implies(a, b) => Node::Implies(convert(a, bound), convert(b, bound)),
        Fol::Forall(x, a) => {
            bound.push(x.clone());
            let body = convert(a, bound);
            bound.pop();
            Node::Forall(x.clone(), body)
        }
    })
}

/// Substitute a ground term; no capture is possible.
fn subst(node: &Rc<Node>, x: &str, t: &Term) -> Rc<Node> {
    match node.as_ref() {
        Node::Atom(a) => {
            let s = |u: &Term| u.substitute(x, t);
            Rc::new(Node::Atom(match a {
                Atom::Eq(l, r) => Atom::Eq(s(l), s(r)),
                Atom::In(l, r) => Atom::In(s(l), s(r)),
                Atom::Pred(p, args) => Atom::Pred(*p, args.iter().map(s).collect()),
            }))
        }
        Node::Not(a) => Rc::new(Node::Not(subst(a, x, t))),
        Node::Implies(a, b) => Rc::new(Node::Implies(subst(a, x, t), subst(b, x, t))),
        Node::Forall(y, _) if y == x => node.clone(),
        Node::Forall(y, a) => Rc::new(Node::Forall(y.clone(), subst(a, x, t))),
    }
}

fn union(a: &Deps, b: &Deps) -> Deps {
    a.union(b).copied().collect()
}

enum Step {
    Closed(Deps),
    Progress,
    Stuck,
}

struct Tableau {
    limit: usize,
    stats: Stats,
    markers: u32,
    params: usize,
}

impl Tableau {
    fn tick(&mut self) -> bool {
        self.stats.steps += 1;
        self.stats.steps <= self.limit
    }

    fn solve(&mut self, mut br: Branch, mut pending: Vec<Item>) -> Outcome {
        let mut gamma_done = false;
        loop {
            while let Some(item) = pending.pop() {
                if let Some(out) = self.expand(&mut br, item, &mut pending) {
                    return out;
                }
            }
            if let Some(d) = congruence_conflict(&br) {
                return Outcome::Closed(d);
            }
            match propagate(&mut br, &mut pending) {
                Step::Closed(d) => return Outcome::Closed(d),
                Step::Progress => continue,
                Step::Stuck => {}
            }
            if !gamma_done || br.betas.is_empty() {
                gamma_done = true;
                match self.gamma_round(&mut br, &mut pending) {
                    None => return Outcome::Exhausted,
                    Some(true) => continue,
                    Some(false) => {}
                }
            }
            if br.betas.is_empty() {
                return Outcome::Open;
            }
            let beta = br.betas.remove(0);
            return self.split(br, beta);
        }
    }

    fn split(&mut self, br: Branch, beta: Item) -> Outcome {
        let Node::Implies(a, b) = beta.node.as_ref() else {
            unreachable!("only implications are queued as beta items")
        };
        self.stats.branches += 1;
        if !self.tick() {
            return Outcome::Exhausted;
        }
        let left_marker = self.next_marker();
        let mut deps = (*beta.deps).clone();
        deps.insert(left_marker);
        let left = Item { sign: false, node: a.clone(), deps: Rc::new(deps) };
        let d1 = match self.solve(br.clone(), vec![left]) {
            Outcome::Closed(d) if !d.contains(&left_marker) => return Outcome::Closed(d),
            Outcome::Closed(d) => d,
            other => return other,
        };
        let right_marker = self.next_marker();
        let mut deps = (*beta.deps).clone();
        deps.insert(right_marker);
        let right = Item { sign: true, node: b.clone(), deps: Rc::new(deps) };
        match self.solve(br, vec![right]) {
            Outcome::Closed(d2) if !d2.contains(&right_marker) => Outcome::Closed(d2),
            Outcome::Closed(d2) => Outcome::Closed(
                d1.into_iter()
                    .filter(|&x| x != left_marker)
                    .chain(d2.into_iter().filter(|&x| x != right_marker))
                    .collect(),
            ),
            other => other,
        }
    }

    fn next_marker(&mut self) -> u32 {
        self.markers += 1;
        self.markers
    }

    /// Apply one non-branching rule. Returns an outcome when the branch is
    /// finished.
    fn expand(&mut self, br: &mut Branch, item: Item, pending: &mut Vec<Item>) -> Option<Outcome> {
        if !self.tick() {
            return Some(Outcome::Exhausted);
        }
        match (item.sign, item.node.as_ref()) {
            (sign, Node::Atom(atom)) => {
                if let (false, Atom::Eq(l, r)) = (sign, atom) {
                    if l == r {
                        return Some(Outcome::Closed((*item.deps).clone()));
                    }
                }
                if let Some((other_sign, other_deps)) = br.lits.get(atom) {
                    if *other_sign != sign {
                        return Some(Outcome::Closed(union(&item.deps, other_deps)));
                    }
                    return None;
                }
                match atom {
                    Atom::Eq(l, r) | Atom::In(l, r) => {
                        br.add_term(l);
                        br.add_term(r);
                    }
                    Atom::Pred(_, args) => args.iter().for_each(|a| br.add_term(a)),
                }
                if let (true, Atom::Eq(l, r)) = (sign, atom) {
                    br.eqs.push((l.clone(), r.clone(), item.deps.clone()));
                }
                br.lits.insert(atom.clone(), (sign, item.deps));
            }
            (sign, Node::Not(a)) => pending.push(Item { sign: !sign, node: a.clone(), deps: item.deps }),
            (true, Node::Implies(..)) => br.betas.push(item),
            (false, Node::Implies(a, b)) => {
                pending.push(Item { sign: false, node: b.clone(), deps: item.deps.clone() });
                pending.push(Item { sign: true, node: a.clone(), deps: item.deps });
            }
            (true, Node::Forall(x, body)) => br.gammas.push(Gamma {
                var: x.clone(),
                body: body.clone(),
                deps: item.deps,
                next: 0,
            }),
            (false, Node::Forall(x, body)) => {
                self.params += 1;
                let c = Term::Var(format!("#c{}", self.params));
                br.add_term(&c);
                pending.push(Item { sign: false, node: subst(body, x, &c), deps: item.deps });
            }
        }
        None
    }

    /// Instantiate every universal formula with the terms it has not seen yet.
    /// `None` means the budget ran out.
    fn gamma_round(&mut self, br: &mut Branch, pending: &mut Vec<Item>) -> Option<bool> {
        let mut added = false;
        let len = br.terms.len();
        for g in &mut br.gammas {
            for t in &br.terms[g.next..len] {
                self.stats.instantiations += 1;
                if !self.tick() {
                    return None;
                }
                pending.push(Item { sign: true, node: subst(&g.body, &g.var, t), deps: g.deps.clone() });
                added = true;
            }
            g.next = len;
        }
        // later instances are expanded first; keep term order by reversing
        if added {
            pending.reverse();
        }
        Some(added)
    }
}

/// Does the signed formula close against the branch without branching?
fn closes_at_once(br: &Branch, sign: bool, node: &Node) -> Option<Deps> {
    match (sign, node) {
        (sign, Node::Atom(atom)) => {
            if let (false, Atom::Eq(l, r)) = (sign, atom) {
                if l == r {
                    return Some(Deps::new());
                }
            }
            match br.lits.get(atom) {
                Some((s, d)) if *s != sign => Some((**d).clone()),
                _ => None,
            }
        }
        (sign, Node::Not(a)) => closes_at_once(br, !sign, a),
        (false, Node::Implies(a, b)) => closes_at_once(br, true, a).or_else(|| closes_at_once(br, false, b)),
        _ => None,
    }
}

/// Is the signed formula already on the branch as a literal?
fn present(br: &Branch, sign: bool, node: &Node) -> bool {
    match node {
        Node::Atom(atom) => matches!(br.lits.get(atom), Some((s, _)) if *s == sign),
        Node::Not(a) => present(br, !sign, a),
        _ => false,
    }
}

/// Unit propagation over the pending implications.
fn propagate(br: &mut Branch, pending: &mut Vec<Item>) -> Step {
    let mut i = 0;
    while i < br.betas.len() {
        let beta = &br.betas[i];
        let Node::Implies(a, b) = beta.node.as_ref() else { unreachable!() };
        if present(br, false, a) || present(br, true, b) {
            br.betas.remove(i);
            continue;
        }
        let left = closes_at_once(br, false, a);
        let right = closes_at_once(br, true, b);
        match (left, right) {
            (Some(l), Some(r)) => return Step::Closed(union(&union(&beta.deps, &l), &r)),
            (Some(l), None) => {
                let item = Item { sign: true, node: b.clone(), deps: Rc::new(union(&beta.deps, &l)) };
                br.betas.remove(i);
                pending.push(item);
                return Step::Progress;
            }
            (None, Some(r)) => {
                let item = Item { sign: false, node: a.clone(), deps: Rc::new(union(&beta.deps, &r)) };
                br.betas.remove(i);
                pending.push(item);
                return Step::Progress;
            }
            (None, None) => i += 1,
        }
    }
    Step::Stuck
}

#[derive(Clone, PartialEq, Eq, Hash)]
enum Head {
    Var(String),
    Zero,
    Succ,
    Plus,
    Times,
}

#[derive(Default)]
struct Congruence {
    ids: HashMap<Term, usize>,
    nodes: Vec<(Head, Vec<usize>)>,
    parent: Vec<usize>,
}

impl Congruence {
    fn intern(&mut self, t: &Term) -> usize {
        if let Some(&id) = self.ids.get(t) {
            return id;
        }
        let node = match t {
            Term::Var(v) => (Head::Var(v.clone()), vec![]),
            Term::Zero => (Head::Zero, vec![]),
            Term::Succ(a) => (Head::Succ, vec![self.intern(a)]),
            Term::Plus(a, b) => (Head::Plus, vec![self.intern(a), self.intern(b)]),
            Term::Times(a, b) => (Head::Times, vec![self.intern(a), self.intern(b)]),
        };
        let id = self.nodes.len();
        self.nodes.push(node);
        self.parent.push(id);
        self.ids.insert(t.clone(), id);
        id
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }

    fn close(&mut self) {
        loop {
            let mut changed = false;
            let mut sigs: HashMap<(Head, Vec<usize>), usize> = HashMap::new();
            for id in 0..self.nodes.len() {
                if self.nodes[id].1.is_empty() {
                    continue;
                }
                let children: Vec<usize> = self.nodes[id].1.clone();
                let key = (self.nodes[id].0.clone(), children.into_iter().map(|c| self.find(c)).collect());
                match sigs.get(&key) {
                    Some(&other) => changed |= self.union(other, id),
                    None => {
                        sigs.insert(key, id);
                    }
                }
            }
            if !changed {
                break;
            }
        }
    }
}

/// Closure modulo equality: reflexivity, symmetry, transitivity and
/// congruence for every function and predicate symbol.
fn congruence_conflict(br: &Branch) -> Option<Deps> {
    if br.eqs.is_empty() {
        return None;
    }
    let mut cc = Congruence::default();
    for atom in br.lits.keys() {
        match atom {
            Atom::Eq(l, r) | Atom::In(l, r) => {
                cc.intern(l);
                cc.intern(r);
            }
            Atom::Pred(_, args) => args.iter().for_each(|a| {
                cc.intern(a);
            }),
        }
    }
    let mut eq_deps = Deps::new();
    for (l, r, d) in &br.eqs {
        let (a, b) = (cc.intern(l), cc.intern(r));
        cc.union(a, b);
        eq_deps.extend(d.iter().copied());
    }
    cc.close();
    // key: (predicate, argument classes); In uses usize::MAX as its symbol
    let mut seen: HashMap<(usize, Vec<usize>), (bool, &Rc<Deps>)> = HashMap::new();
    for (atom, (sign, deps)) in &br.lits {
        let key = match atom {
            Atom::Eq(l, r) => {
                let (a, b) = (cc.ids[l], cc.ids[r]);
                if !*sign && cc.find(a) == cc.find(b) {
                    return Some(union(&eq_deps, deps));
                }
                continue;
            }
            Atom::In(l, r) => {
                let (a, b) = (cc.ids[l], cc.ids[r]);
                (usize::MAX, vec![cc.find(a), cc.find(b)])
            }
            Atom::Pred(p, args) => {
                let classes = args.iter().map(|a| cc.ids[a]).collect::<Vec<_>>();
                (*p, classes.into_iter().map(|c| cc.find(c)).collect())
            }
        };
        match seen.get(&key) {
            Some((s, d)) if *s != *sign => return Some(union(&union(&eq_deps, deps), d)),
            Some(_) => {}
            None => {
                seen.insert(key, (*sign, deps));
            }
        }
    }
    None
}
