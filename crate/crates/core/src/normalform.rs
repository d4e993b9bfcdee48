//! Maximal common prefixes, earliest and canonical forms, equivalence.

use std::collections::{BTreeMap, HashMap, VecDeque};

use crate::automata::{compare_languages, product, LanguageComparison, Product};
use crate::error::{Error, Result};
use crate::terms::{compose, lub1_terms, lub_terms, residual, Name, Node, Term, UPattern};
use crate::transducer::{split_axiom, Mode, Rule, Transducer};

/// Least solution of the prefix constraint system.
#[derive(Clone, Debug)]
pub struct PrefixSolution {
    pub mode: Mode,
    pub values: BTreeMap<Name, UPattern>,
    pub iterations: usize,
}

impl PrefixSolution {
    pub fn get(&self, q: &Name) -> &UPattern {
        &self.values[q]
    }

    pub fn is_constant(&self, q: &Name) -> bool {
        self.values[q].tree().is_some_and(Term::is_ground)
    }
}

fn join(mode: Mode, a: &UPattern, b: &Term) -> Result<UPattern> {
    let t = match a {
        UPattern::Bottom => b.clone(),
        UPattern::Tree(a) => match mode {
            Mode::Uc => lub_terms(&[a.clone(), b.clone()]),
            Mode::Linear => lub1_terms(&[a.clone(), b.clone()])?,
        },
    };
    Ok(UPattern::Tree(t))
}

/// Replaces each call `q_j(x_j)` by `σ(q_j)·x_j`, or by `σ(q_j)` when ground.
fn instantiate(rhs: &Term, sigma: &dyn Fn(&Name) -> Option<Term>) -> Option<Term> {
    let mut missing = false;
    let p = rhs.map_leaves(&mut |l| match l.node() {
        Node::Call(q, j) => match sigma(q) {
            None => {
                missing = true;
                Some(Term::var(*j))
            }
            Some(s) => Some(s.subst_vars(&|i| if i == 1 { Some(Term::var(*j)) } else { None })),
        },
        _ => None,
    });
    if missing {
        None
    } else {
        Some(p)
    }
}

/// The right-hand side of one constraint: the maximal prefix of `p'` before its variables.
pub fn rule_prefix(p: &Term) -> Term {
    if !p.has_var() {
        return p.clone();
    }
    let vars = p.var_indices();
    if vars.len() == 1 {
        let j = *vars.iter().next().unwrap();
        return p.subst_vars(&|i| if i == j { Some(Term::x1()) } else { None });
    }
    // smallest subtree on the path to the leftmost variable that contains all of them
    let mut path = vec![p.clone()];
    loop {
        let cur = path.last().unwrap();
        match cur.children().iter().find(|c| c.has_var()) {
            Some(c) => path.push(c.clone()),
            None => break,
        }
    }
    let marker = Term::var(0);
    for v in path.iter().rev() {
        if v.var_indices() != vars {
            continue;
        }
        let w = p.replace_subterm(v, &marker);
        if !w.var_indices().iter().any(|&j| j != 0) {
            return w.subst_vars(&|j| if j == 0 { Some(Term::x1()) } else { None });
        }
    }
    Term::x1()
}

/// `pref_A` (uc mode) or `pref_A^(1)` (linear mode) for every state.
pub fn pref_fixpoint(a: &Transducer, mode: Mode) -> Result<PrefixSolution> {
    if mode == Mode::Linear && !a.is_linear() {
        return Err(Error::invalid(format!("{} is not linear", a.name)));
    }
    let mut values: BTreeMap<Name, UPattern> = a.states.iter().map(|q| (q.clone(), UPattern::Bottom)).collect();
    let rules: Vec<&Rule> = a.rules_in_order().collect();
    let mut iterations = 0;
    loop {
        iterations += 1;
        let mut changed = false;
        for r in &rules {
            let sigma = |q: &Name| values.get(q).and_then(|v| v.tree().cloned());
            let Some(p) = instantiate(&r.rhs, &sigma) else { continue };
            let v = rule_prefix(&p);
            let old = &values[&r.state];
            let new = join(mode, old, &v)?;
            if &new != old {
                values.insert(r.state.clone(), new);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let bound = a.states.len().max(1) * a.size().max(1);
    if iterations > bound {
        return Err(Error::internal(format!("prefix fixpoint took {} rounds, bound {}", iterations, bound)));
    }
    Ok(PrefixSolution { mode, values, iterations })
}

/// The earliest transducer: constant states removed, pending prefixes pushed upward.
pub fn make_earliest(a: &Transducer, mode: Mode) -> Result<Transducer> {
    let pref = pref_fixpoint(a, mode)?;
    earliest_with(a, &pref)
}

fn earliest_with(a: &Transducer, pref: &PrefixSolution) -> Result<Transducer> {
    let value = |q: &Name| -> Result<Term> {
        pref.get(q).tree().cloned().ok_or_else(|| Error::internal(format!("state {} has an empty domain", q)))
    };
    let mut out = Transducer::new(a.name.as_str(), a.advice.clone());
    out.output = a.output.clone();
    for q in &a.states {
        if !pref.is_constant(q) {
            out.add_state(q, &a.iota[q]);
        }
    }
    for (h, ax) in &a.axioms {
        let ax2 = match split_axiom(ax) {
            None => ax.clone(),
            Some((p, q)) => {
                let s = value(&q)?;
                if s.is_ground() {
                    compose(&p, &s)
                } else {
                    compose(&p, &compose(&s, &Term::call(q.clone(), 1)))
                }
            }
        };
        out.axioms.insert(h.clone(), ax2);
    }
    for r in a.rules() {
        if pref.is_constant(&r.state) {
            continue;
        }
        let u = value(&r.state)?;
        let mut err = None;
        let full = r.rhs.map_leaves(&mut |l| match l.node() {
            Node::Call(q, j) => match value(q) {
                Ok(s) if s.is_ground() => Some(s),
                Ok(s) => Some(compose(&s, &Term::call(q.clone(), *j))),
                Err(e) => {
                    err = Some(e);
                    None
                }
            },
            _ => None,
        });
        if let Some(e) = err {
            return Err(e);
        }
        let rest = match residual(&u, &full) {
            Some(Some(t)) => t,
            _ => return Err(Error::internal(format!("{} is not a prefix of {} in rule {}", u, full, r))),
        };
        out.add_rule(Rule { rhs: rest, ..r.clone() });
    }
    Ok(out)
}

/// A canonical transducer together with the state quotient.
#[derive(Clone, Debug)]
pub struct Canonical {
    pub transducer: Transducer,
    pub pi: BTreeMap<Name, Name>,
}

/// Coarsest partition compatible with advice states, rule patterns and successors.
pub fn state_classes(a: &Transducer) -> BTreeMap<Name, usize> {
    let mut class: BTreeMap<Name, usize> = BTreeMap::new();
    {
        let mut ids: HashMap<&Name, usize> = HashMap::new();
        for q in &a.states {
            let n = ids.len();
            let c = *ids.entry(&a.iota[q]).or_insert(n);
            class.insert(q.clone(), c);
        }
    }
    let mut count = class.values().collect::<std::collections::BTreeSet<_>>().len();
    loop {
        let mut sigs: HashMap<(usize, Vec<(Option<Term>, Vec<(u32, usize)>)>), usize> = HashMap::new();
        let mut next = BTreeMap::new();
        for q in &a.states {
            let h = &a.iota[q];
            let mut sig = Vec::new();
            for t in a.advice.transitions_from(h) {
                let (pid, succ) = match a.rule(q, &t.symbol, &t.children) {
                    Some(r) => {
                        let succ: Vec<(u32, usize)> = r.successors().iter().map(|(j, qj)| (*j, class[qj])).collect();
                        (Some(r.pattern()), succ)
                    }
                    None => (None, Vec::new()),
                };
                sig.push((pid, succ));
            }
            let n = sigs.len();
            let c = *sigs.entry((class[q], sig)).or_insert(n);
            next.insert(q.clone(), c);
        }
        let n = sigs.len();
        class = next;
        if n == count {
            return class;
        }
        count = n;
    }
}

/// Merges equivalent states of an earliest transducer and renames states
/// `q0, q1, ...` in breadth-first order from the axioms.
pub fn canonicalize(a: &Transducer) -> Result<Canonical> {
    let class = state_classes(a);
    let mut rep: BTreeMap<usize, Name> = BTreeMap::new();
    for q in &a.states {
        rep.entry(class[q]).or_insert_with(|| q.clone());
    }
    let mut names: HashMap<usize, Name> = HashMap::new();
    let mut order: Vec<usize> = Vec::new();
    let mut queue = VecDeque::new();
    let mut discover = |c: usize, names: &mut HashMap<usize, Name>, queue: &mut VecDeque<usize>| {
        if !names.contains_key(&c) {
            names.insert(c, Name::from(format!("q{}", names.len())));
            order.push(c);
            queue.push_back(c);
        }
    };
    for ax in a.axioms.values() {
        if let Some((_, q)) = split_axiom(ax) {
            discover(class[&q], &mut names, &mut queue);
        }
    }
    while let Some(c) = queue.pop_front() {
        let q = &rep[&c];
        for t in a.advice.transitions_from(&a.iota[q]) {
            if let Some(r) = a.rule(q, &t.symbol, &t.children) {
                let mut calls: Vec<(u32, Name)> = r.rhs.calls().into_iter().map(|(q, j)| (j, q)).collect();
                calls.sort();
                for (_, qj) in calls {
                    discover(class[&qj], &mut names, &mut queue);
                }
            }
        }
    }
    let rename = |t: &Term| {
        t.map_leaves(&mut |l| match l.node() {
            Node::Call(q, j) => Some(Term::call(names[&class[q]].clone(), *j)),
            _ => None,
        })
    };
    let mut out = Transducer::new(a.name.as_str(), a.advice.clone());
    out.output = a.output.clone();
    for c in &order {
        out.add_state(&names[c], &a.iota[&rep[c]]);
    }
    for (h, ax) in &a.axioms {
        out.axioms.insert(h.clone(), rename(ax));
    }
    for c in &order {
        let q = &rep[c];
        for r in a.rules_of(q) {
            out.add_rule(Rule { state: names[c].clone(), rhs: rename(&r.rhs), ..r.clone() });
        }
    }
    let pi = a
        .states
        .iter()
        .filter_map(|q| names.get(&class[q]).map(|n| (q.clone(), n.clone())))
        .collect();
    Ok(Canonical { transducer: out, pi })
}

/// Earliest followed by canonicalization.
pub fn normalize(a: &Transducer, mode: Mode) -> Result<Canonical> {
    canonicalize(&make_earliest(a, mode)?)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Aheadness {
    Constant(Term),
    /// `u · q''(x1)`.
    Ahead(Term, Name),
}

/// How far the canonical earliest transducer runs ahead, per state.
pub fn aheadness(a: &Transducer, mode: Mode) -> Result<(BTreeMap<Name, Aheadness>, Canonical)> {
    let pref = pref_fixpoint(a, mode)?;
    let early = earliest_with(a, &pref)?;
    let canon = canonicalize(&early)?;
    let class = state_classes(&early);
    let mut out = BTreeMap::new();
    for q in &a.states {
        let u = pref.get(q).tree().cloned().ok_or_else(|| Error::internal("empty state domain"))?;
        if u.is_ground() {
            out.insert(q.clone(), Aheadness::Constant(u));
            continue;
        }
        // unreachable states have no image; map them to a reachable class member if any
        let img = canon.pi.get(q).cloned().or_else(|| {
            early.states.iter().filter(|p| class[*p] == class[q]).find_map(|p| canon.pi.get(p).cloned())
        });
        if let Some(img) = img {
            out.insert(q.clone(), Aheadness::Ahead(u, img));
        }
    }
    Ok((out, canon))
}

/// First difference between two canonical transducers over the same advice, if any.
pub fn isomorphism(a1: &Transducer, a2: &Transducer) -> std::result::Result<BTreeMap<Name, Name>, String> {
    let mut map: BTreeMap<Name, Name> = BTreeMap::new();
    let mut queue = VecDeque::new();
    let pair = |q1: Name, q2: Name, map: &mut BTreeMap<Name, Name>, queue: &mut VecDeque<(Name, Name)>| {
        match map.get(&q1) {
            Some(p) if *p == q2 => Ok(()),
            Some(p) => Err(format!("state {} is matched with both {} and {}", q1, p, q2)),
            None => {
                map.insert(q1.clone(), q2.clone());
                queue.push_back((q1, q2));
                Ok(())
            }
        }
    };
    if a1.axioms.keys().ne(a2.axioms.keys()) {
        return Err("axioms are defined for different advice states".into());
    }
    for (h, t1) in &a1.axioms {
        let t2 = &a2.axioms[h];
        match (split_axiom(t1), split_axiom(t2)) {
            (None, None) if t1 == t2 => {}
            (Some((p1, q1)), Some((p2, q2))) if p1 == p2 => pair(q1, q2, &mut map, &mut queue)?,
            _ => return Err(format!("axioms for {} differ: {} vs {}", h, t1, t2)),
        }
    }
    while let Some((q1, q2)) = queue.pop_front() {
        let h = &a1.iota[&q1];
        if a2.iota.get(&q2) != Some(h) {
            return Err(format!("states {} and {} have different advice states", q1, q2));
        }
        for t in a1.advice.transitions_from(h) {
            let (Some(r1), Some(r2)) = (a1.rule(&q1, &t.symbol, &t.children), a2.rule(&q2, &t.symbol, &t.children))
            else {
                return Err(format!("missing rule on {}", t));
            };
            if r1.pattern() != r2.pattern() {
                return Err(format!("rules differ: {} vs {}", r1, r2));
            }
            let s2 = r2.successors();
            for (j, p1) in r1.successors() {
                pair(p1, s2[&j].clone(), &mut map, &mut queue)?;
            }
        }
    }
    Ok(map)
}

/// Re-expresses `a` over the product advice; `first` selects the component `a` lives on.
pub fn lift_to_product(a: &Transducer, prod: &Product, first: bool) -> Result<Transducer> {
    let mine = |n: &Name| -> (Name, Name) {
        let (x, y) = &prod.pairs[n];
        if first {
            (x.clone(), y.clone())
        } else {
            (y.clone(), x.clone())
        }
    };
    let lift = |q: &Name, other: &Name| Name::from(format!("{}@{}", q, other));
    let mut out = Transducer::new(a.name.as_str(), prod.automaton.clone());
    out.output = a.output.clone();
    for s in &prod.automaton.states {
        let (h, other) = mine(s);
        for q in a.states.iter().filter(|q| a.iota[*q] == h) {
            out.add_state(&lift(q, &other), s);
        }
    }
    for s in &prod.automaton.accepting {
        let (h, other) = mine(s);
        let ax = a.axioms.get(&h).ok_or_else(|| Error::invalid(format!("no axiom for {}", h)))?;
        out.axioms.insert(
            s.clone(),
            ax.map_leaves(&mut |l| match l.node() {
                Node::Call(q, j) => Some(Term::call(lift(q, &other), *j)),
                _ => None,
            }),
        );
    }
    for t in &prod.automaton.transitions {
        let (h, _) = mine(&t.target);
        let kids: Vec<(Name, Name)> = t.children.iter().map(&mine).collect();
        let own: Vec<Name> = kids.iter().map(|k| k.0.clone()).collect();
        for q in a.states.iter().filter(|q| a.iota[*q] == h) {
            let (_, other) = mine(&t.target);
            let r = a
                .rule(q, &t.symbol, &own)
                .ok_or_else(|| Error::invalid(format!("missing rule for {} on {}", q, t.symbol)))?;
            let rhs = r.rhs.map_leaves(&mut |l| match l.node() {
                Node::Call(qj, j) => Some(Term::call(lift(qj, &kids[*j as usize - 1].1), *j)),
                _ => None,
            });
            out.add_rule(Rule {
                state: lift(q, &other),
                symbol: t.symbol.clone(),
                children: t.children.clone(),
                rhs,
            });
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct Equivalence {
    pub equivalent: bool,
    pub languages: LanguageComparison,
    /// An input on which the translations differ, when one was found.
    pub witness: Option<Term>,
    pub mismatch: Option<String>,
}

/// Subset-construction budget for the domain comparison.
pub const LANGUAGE_BUDGET: usize = 20_000;

/// Decides equivalence via canonical forms over the product advice.
pub fn equivalent(a1: &Transducer, a2: &Transducer) -> Result<Equivalence> {
    let languages = compare_languages(&a1.advice, &a2.advice, LANGUAGE_BUDGET);
    if let LanguageComparison::Differ(t) = &languages {
        return Ok(Equivalence {
            equivalent: false,
            witness: Some(t.clone()),
            mismatch: Some("domains differ".into()),
            languages,
        });
    }
    let prod = product(&a1.advice, &a2.advice)?;
    let l1 = lift_to_product(a1, &prod, true)?;
    let l2 = lift_to_product(a2, &prod, false)?;
    let c1 = normalize(&l1, Mode::Uc)?.transducer;
    let c2 = normalize(&l2, Mode::Uc)?.transducer;
    match isomorphism(&c1, &c2) {
        Ok(_) => Ok(Equivalence { equivalent: true, languages, witness: None, mismatch: None }),
        Err(m) => {
            let witness = crate::oracle::oracle_equiv(a1, a2, 5).ok().flatten();
            Ok(Equivalence { equivalent: false, languages, witness, mismatch: Some(m) })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{enumerate_domain, oracle_equiv, perturb, random_instance, Profile};
    use crate::syntax::{parse_document, parse_pattern, print_transducer};

    const ERASING: &str = include_str!("../fixtures/erasing.tdt");
    const ONE: &str = include_str!("../fixtures/one.tdt");

    fn doc(src: &str) -> Transducer {
        parse_document(src).unwrap().transducers.pop().unwrap()
    }

    fn pat(s: &str) -> Term {
        parse_pattern(s).unwrap()
    }

    #[test]
    fn constraint_rhs_cases() {
        assert_eq!(rule_prefix(&pat("f(g(b(x2),a),g(b(x2),a))")), pat("f(g(b(x1),a),g(b(x1),a))"));
        assert_eq!(rule_prefix(&pat("f(g(x2,x1),g(x2,x1))")), pat("f(x1,x1)"));
        assert_eq!(rule_prefix(&pat("f(a,g(x1,x2))")), pat("f(a,x1)"));
        assert_eq!(rule_prefix(&pat("f(x1,x2)")), pat("x1"));
        assert_eq!(rule_prefix(&pat("f(a,a)")), pat("f(a,a)"));
    }

    #[test]
    fn uc_and_linear_prefixes_differ() {
        let src = "alphabet s { f/1 a/0 b/0 }
            automaton B over s { states h h1 h2; accept h; h <- f(h1); h <- f(h2); h1 <- a; h2 <- b; }
            transducer A over B { state q : h; state p1 : h1; state p2 : h2; axiom h = q(x1);
              rule q(f(x1:h1)) -> g(a,a); rule q(f(x1:h2)) -> g(b,b);
              rule p1(a) -> a; rule p2(b) -> b; }";
        let a = doc(src);
        let q = Name::new("q");
        assert_eq!(pref_fixpoint(&a, Mode::Uc).unwrap().get(&q), &UPattern::Tree(pat("g(x1,x1)")));
        assert_eq!(pref_fixpoint(&a, Mode::Linear).unwrap().get(&q), &UPattern::Tree(pat("x1")));
    }

    #[test]
    fn one_example_is_already_earliest_in_linear_mode() {
        let a = doc(ONE);
        assert!(a.validate().unwrap().linear);
        let pref = pref_fixpoint(&a, Mode::Linear).unwrap();
        for q in &a.states {
            assert_eq!(pref.get(q), &UPattern::Tree(Term::x1()), "{}", q);
        }
        let e = make_earliest(&a, Mode::Linear).unwrap();
        assert!(e.is_linear());
        assert_eq!(print_transducer(&e), print_transducer(&a));
    }

    #[test]
    fn erasing_example_becomes_constant_on_e_spines() {
        let a = doc(ERASING);
        let pref = pref_fixpoint(&a, Mode::Uc).unwrap();
        assert_eq!(pref.get(&Name::new("q0e")), &UPattern::Tree(pat("a(a(e))")));
        let e = make_earliest(&a, Mode::Uc).unwrap();
        e.validate().unwrap();
        assert_eq!(e.axioms[&Name::new("he")], pat("a(a(e))"));
        assert_eq!(oracle_equiv(&a, &e, 5).unwrap(), None);
    }

    #[test]
    fn earliest_matches_enumerated_lub() {
        for (i, profile) in ["uc", "lin", "uc-i", "lin-i"].iter().enumerate() {
            let p = Profile::named(profile).unwrap();
            for seed in 0..15 {
                let a = random_instance(seed * 7 + i as u64, &p);
                let pref = pref_fixpoint(&a, p.mode).unwrap();
                assert!(pref.iterations <= a.states.len().max(1) * a.size());
                for q in &a.states {
                    let ts = enumerate_domain(&a.advice, 3, Some(&a.iota[q])).unwrap();
                    let outs: Vec<Term> = ts.iter().map(|t| a.eval_state(q, t).unwrap()).collect();
                    if outs.is_empty() {
                        continue;
                    }
                    let bound = match p.mode {
                        Mode::Uc => lub_terms(&outs),
                        Mode::Linear => lub1_terms(&outs).unwrap(),
                    };
                    let v = pref.get(q).tree().unwrap();
                    // the fixpoint is at least as general as any finite sample
                    assert!(residual(v, &bound).is_some(), "{} {}: {} vs {}", profile, q, v, bound);
                }
            }
        }
    }

    #[test]
    fn normal_form_round_trip() {
        for (i, profile) in ["uc", "lin"].iter().enumerate() {
            let p = Profile::named(profile).unwrap();
            for seed in 0..25 {
                let a = random_instance(seed * 3 + i as u64, &p);
                let e = make_earliest(&a, p.mode).unwrap();
                e.validate().unwrap();
                let pe = pref_fixpoint(&e, p.mode).unwrap();
                assert!(pe.values.values().all(|v| v == &UPattern::Tree(Term::x1())));
                let c = canonicalize(&e).unwrap().transducer;
                c.validate().unwrap();
                if p.mode == Mode::Linear {
                    assert!(c.is_linear());
                }
                assert_eq!(oracle_equiv(&a, &c, 4).unwrap(), None, "{} seed {}", profile, seed);
                let cc = canonicalize(&c).unwrap().transducer;
                assert_eq!(print_transducer(&cc), print_transducer(&c));
            }
        }
    }

    #[test]
    fn identical_states_are_merged() {
        let src = "alphabet s { g/1 a/0 }
            automaton B over s { states h; accept h; h <- g(h); h <- a; }
            transducer A over B { state q1 : h; state q2 : h; axiom h = k(q1(x1));
              rule q1(g(x1:h)) -> s(q2(x1)); rule q1(a) -> a;
              rule q2(g(x1:h)) -> s(q1(x1)); rule q2(a) -> a; }";
        let c = canonicalize(&doc(src)).unwrap();
        assert_eq!(c.transducer.states.len(), 1);
        assert_eq!(c.pi[&Name::new("q2")], Name::new("q0"));
    }

    #[test]
    fn aheadness_recovers_original_outputs() {
        let p = Profile::named("uc").unwrap();
        for seed in 0..10 {
            let a = random_instance(seed, &p);
            let (ah, canon) = aheadness(&a, Mode::Uc).unwrap();
            let c = &canon.transducer;
            for q in &a.states {
                for t in enumerate_domain(&a.advice, 3, Some(&a.iota[q])).unwrap() {
                    let v = a.eval_state(q, &t).unwrap();
                    match ah.get(q) {
                        Some(Aheadness::Constant(s)) => assert_eq!(&v, s),
                        Some(Aheadness::Ahead(u, q2)) => assert_eq!(v, compose(u, &c.eval_state(q2, &t).unwrap())),
                        None => {}
                    }
                }
            }
        }
    }

    #[test]
    fn equivalence_agrees_with_oracle() {
        let p = Profile::small(Mode::Uc, crate::oracle::AdviceProfile::LookAhead, 0);
        for seed in 0..20 {
            let a = random_instance(seed, &p);
            assert!(equivalent(&a, &a).unwrap().equivalent);
            let b = perturb(&a, seed, &p);
            let eq = equivalent(&a, &b).unwrap();
            let oracle = oracle_equiv(&a, &b, 5).unwrap();
            assert_eq!(eq.equivalent, oracle.is_none(), "seed {} {:?}", seed, eq.mismatch);
        }
    }
}
