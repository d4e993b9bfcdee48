//! Deterministic top-down transducers with advice.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::automata::{Runner, TreeAutomaton};
use crate::error::{Error, Result};
use crate::terms::{compose, Name, Node, RankedAlphabet, Term};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub state: Name,
    pub symbol: Name,
    pub children: Vec<Name>,
    /// Right-hand side with `Call(q, j)` leaves.
    pub rhs: Term,
}

impl Rule {
    /// The rhs with every call on `x_j` replaced by `x_j`.
    pub fn pattern(&self) -> Term {
        to_pattern(&self.rhs)
    }

    pub fn vars(&self) -> BTreeSet<u32> {
        self.rhs.calls().into_iter().map(|(_, j)| j).collect()
    }

    /// The state called on `x_j`, if any.
    pub fn successor(&self, j: u32) -> Option<Name> {
        self.rhs.calls().into_iter().find(|(_, i)| *i == j).map(|(q, _)| q)
    }

    pub fn successors(&self) -> BTreeMap<u32, Name> {
        self.rhs.calls().into_iter().map(|(q, j)| (j, q)).collect()
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({}", self.state, self.symbol)?;
        if !self.children.is_empty() {
            let ch: Vec<String> =
                self.children.iter().enumerate().map(|(i, h)| format!("x{}:{}", i + 1, h)).collect();
            write!(f, "({})", ch.join(","))?;
        }
        write!(f, ") -> {}", self.rhs)
    }
}

/// Replaces calls `q(x_j)` by `x_j`.
pub fn to_pattern(t: &Term) -> Term {
    t.map_leaves(&mut |l| match l.node() {
        Node::Call(_, j) => Some(Term::var(*j)),
        _ => None,
    })
}

/// Splits an axiom `p·q(x1)` into `(p, q)`; `None` for a ground axiom.
pub fn split_axiom(t: &Term) -> Option<(Term, Name)> {
    let calls = t.calls();
    let (q, _) = calls.iter().next()?.clone();
    Some((to_pattern(t), q))
}

/// Which prefix lattice the normal-form constructions use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Uc,
    Linear,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AdviceKind {
    LookAhead,
    Inspection,
    Both,
    Unambiguous,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostics {
    pub linear: bool,
    pub advice: AdviceKind,
    pub without_inspection: bool,
}

#[derive(Clone, Debug)]
pub struct Transducer {
    pub name: Name,
    pub advice: TreeAutomaton,
    pub output: RankedAlphabet,
    pub states: Vec<Name>,
    pub iota: BTreeMap<Name, Name>,
    /// Ground trees, or patterns whose calls are all `q(x1)` for one state `q`.
    pub axioms: BTreeMap<Name, Term>,
    rules: BTreeMap<(Name, Name, Vec<Name>), Rule>,
}

impl Transducer {
    pub fn new(name: &str, advice: TreeAutomaton) -> Transducer {
        Transducer {
            name: Name::new(name),
            output: RankedAlphabet { name: Name::from(format!("{}_out", name)), symbols: Vec::new() },
            advice,
            states: Vec::new(),
            iota: BTreeMap::new(),
            axioms: BTreeMap::new(),
            rules: BTreeMap::new(),
        }
    }

    pub fn add_state(&mut self, q: &Name, h: &Name) {
        if !self.states.contains(q) {
            self.states.push(q.clone());
        }
        self.iota.insert(q.clone(), h.clone());
    }

    pub fn add_rule(&mut self, r: Rule) {
        self.rules.insert((r.state.clone(), r.symbol.clone(), r.children.clone()), r);
    }

    pub fn rule(&self, q: &Name, f: &Name, children: &[Name]) -> Option<&Rule> {
        self.rules.get(&(q.clone(), f.clone(), children.to_vec()))
    }

    pub fn rules(&self) -> impl Iterator<Item = &Rule> {
        self.rules.values()
    }

    pub fn rules_of<'a>(&'a self, q: &'a Name) -> impl Iterator<Item = &'a Rule> + 'a {
        self.rules.values().filter(move |r| &r.state == q)
    }

    /// Rules grouped by the declaration order of their states.
    pub fn rules_in_order(&self) -> impl Iterator<Item = &Rule> {
        let pos: HashMap<&Name, usize> = self.states.iter().enumerate().map(|(i, q)| (q, i)).collect();
        let mut v: Vec<&Rule> = self.rules.values().collect();
        v.sort_by_key(|r| pos.get(&r.state).copied().unwrap_or(usize::MAX));
        v.into_iter()
    }

    pub fn rule_count(&self) -> usize {
        self.rules.len()
    }

    pub fn retain_rules(&mut self, keep: impl Fn(&Rule) -> bool) {
        self.rules.retain(|_, r| keep(r));
    }

    pub fn is_linear(&self) -> bool {
        self.rules.values().all(|r| r.vars().iter().all(|&j| r.rhs.count_var(j) <= 1 && count_calls(&r.rhs, j) <= 1))
    }

    /// Checks the model invariants and classifies the advice.
    pub fn validate(&self) -> Result<Diagnostics> {
        let b = &self.advice;
        b.validate()?;
        if !b.is_trim() {
            return Err(Error::invalid(format!("advice {} is not trim", b.name)));
        }
        if !b.is_unambiguous() {
            return Err(Error::invalid(format!("advice {} is ambiguous", b.name)));
        }
        for q in &self.states {
            match self.iota.get(q) {
                Some(h) if b.has_state(h) => {}
                _ => return Err(Error::invalid(format!("state {} has no advice state", q))),
            }
        }
        for (h, t) in &self.axioms {
            if !b.accepting.contains(h) {
                return Err(Error::invalid(format!("axiom for non-accepting state {}", h)));
            }
            if t.has_var() {
                return Err(Error::invalid(format!("axiom {} contains a bare variable", t)));
            }
            let calls = t.calls();
            if calls.len() > 1 {
                return Err(Error::invalid(format!("axiom {} calls more than one state", t)));
            }
            if let Some((q, j)) = calls.iter().next() {
                if *j != 1 || self.iota.get(q) != Some(h) {
                    return Err(Error::invalid(format!("axiom {} for {} has a mismatched call", t, h)));
                }
            }
            self.check_output(t)?;
        }
        for h in &b.accepting {
            if !self.axioms.contains_key(h) {
                return Err(Error::invalid(format!("no axiom for accepting state {}", h)));
            }
        }
        for t in &b.transitions {
            for q in self.states.iter().filter(|q| self.iota[*q] == t.target) {
                if self.rule(q, &t.symbol, &t.children).is_none() {
                    return Err(Error::invalid(format!("missing rule for state {} on {}", q, t)));
                }
            }
        }
        for r in self.rules.values() {
            let h = self
                .iota
                .get(&r.state)
                .ok_or_else(|| Error::invalid(format!("rule {} for undeclared state", r)))?;
            if !b.transitions.iter().any(|t| &t.target == h && t.symbol == r.symbol && t.children == r.children) {
                return Err(Error::invalid(format!("rule {} matches no advice transition", r)));
            }
            if r.rhs.has_var() {
                return Err(Error::invalid(format!("rule {} has a bare variable", r)));
            }
            let mut targets: BTreeMap<u32, Name> = BTreeMap::new();
            for (q, j) in r.rhs.calls() {
                if j == 0 || j as usize > r.children.len() {
                    return Err(Error::invalid(format!("rule {} uses x{} out of range", r, j)));
                }
                if self.iota.get(&q) != Some(&r.children[j as usize - 1]) {
                    return Err(Error::invalid(format!("rule {} calls {} on a child with another advice state", r, q)));
                }
                if let Some(prev) = targets.insert(j, q.clone()) {
                    if prev != q {
                        return Err(Error::invalid(format!(
                            "rule {} is not uniform-copying: x{} is processed by {} and {}",
                            r, j, prev, q
                        )));
                    }
                }
            }
            self.check_output(&r.rhs)?;
        }
        let bu = b.is_bottom_up_deterministic();
        let td = b.is_top_down_deterministic();
        let advice = match (bu, td) {
            (true, true) => AdviceKind::Both,
            (true, false) => AdviceKind::LookAhead,
            (false, true) => AdviceKind::Inspection,
            _ => AdviceKind::Unambiguous,
        };
        let top = b.universal_states();
        let without_inspection = self.rules.values().all(|r| {
            let vars = r.vars();
            r.children.iter().enumerate().all(|(i, h)| vars.contains(&(i as u32 + 1)) || top.contains(h))
        });
        Ok(Diagnostics { linear: self.is_linear(), advice, without_inspection })
    }

    fn check_output(&self, t: &Term) -> Result<()> {
        if self.output.symbols.is_empty() {
            return Ok(());
        }
        let mut bad = None;
        t.visit_dag(&mut |s| {
            if let Node::Sym(f, ch) = s.node() {
                if self.output.rank(f) != Some(ch.len()) {
                    bad = Some(format!("{}/{}", f, ch.len()));
                }
            }
        });
        match bad {
            Some(b) => Err(Error::invalid(format!("output symbol {} not in {}", b, self.output.name))),
            None => Ok(()),
        }
    }

    /// Rebuilds the output alphabet from the axioms and rules, keeping declared order.
    pub fn infer_output(&mut self) {
        let mut syms: Vec<(Name, usize)> = self.output.symbols.iter().map(|s| (s.name.clone(), s.rank)).collect();
        let mut add = |t: &Term| {
            t.visit_dag(&mut |s| {
                if let Node::Sym(f, ch) = s.node() {
                    if !syms.iter().any(|(g, _)| g == f) {
                        syms.push((f.clone(), ch.len()));
                    }
                }
            })
        };
        for t in self.axioms.values() {
            add(t);
        }
        for r in self.rules.values() {
            add(&r.rhs);
        }
        self.output.symbols = syms.into_iter().map(|(name, rank)| crate::terms::Symbol { name, rank }).collect();
    }

    /// Size: axiom dag sizes plus `k+1` plus rhs dag size per rule.
    pub fn size(&self) -> usize {
        let ax: usize = self.axioms.values().map(crate::terms::dag_size).sum();
        let rules: usize = self.rules.values().map(|r| r.children.len() + 1 + crate::terms::dag_size(&r.rhs)).sum();
        ax + rules
    }

    pub fn eval(&self, t: &Term) -> Option<Term> {
        Evaluator::new(self).eval(t)
    }

    pub fn eval_state(&self, q: &Name, t: &Term) -> Result<Term> {
        Evaluator::new(self).eval_state(q, t)
    }

    /// Output of state `q` on a context; ground, or a pattern with calls `q'(x1)` where `ι(q') = h2`.
    pub fn eval_context(&self, q: &Name, c: &Term, h2: &Name) -> Result<Term> {
        Evaluator::new(self).eval_context(q, c, h2)
    }

    /// Axiom-level context output for some accepting `h` with `(h, h2): c`.
    pub fn eval_context_axiom(&self, c: &Term, h2: &Name) -> Result<Term> {
        let pairs = self.advice.run_context(c)?;
        let h = self
            .advice
            .accepting
            .iter()
            .find(|h| pairs.contains(&((*h).clone(), h2.clone())))
            .ok_or_else(|| Error::invalid("no computation on the context"))?;
        let ax = &self.axioms[h];
        match split_axiom(ax) {
            None => Ok(ax.clone()),
            Some((p, q)) => Ok(compose(&p, &self.eval_context(&q, c, h2)?)),
        }
    }
}

fn count_calls(t: &Term, j: u32) -> u64 {
    to_pattern(t).count_var(j)
}

/// Evaluation with a memo per (state, input node).
pub struct Evaluator<'a> {
    a: &'a Transducer,
    runner: Runner<'a>,
    memo: HashMap<(Name, u64), (Term, Term)>,
}

impl<'a> Evaluator<'a> {
    pub fn new(a: &'a Transducer) -> Evaluator<'a> {
        Evaluator { a, runner: Runner::new(&a.advice), memo: HashMap::new() }
    }

    pub fn eval(&mut self, t: &Term) -> Option<Term> {
        let states = self.runner.states(t);
        let h = self.a.advice.accepting.iter().find(|h| states.contains(*h))?;
        let ax = self.a.axioms.get(h)?;
        match split_axiom(ax) {
            None => Some(ax.clone()),
            Some((p, q)) => self.eval_state(&q, t).ok().map(|v| compose(&p, &v)),
        }
    }

    pub fn eval_state(&mut self, q: &Name, t: &Term) -> Result<Term> {
        let key = (q.clone(), t.id());
        if let Some((_, v)) = self.memo.get(&key) {
            return Ok(v.clone());
        }
        let h = self.a.iota.get(q).ok_or(Error::OutsideDomain)?;
        let Node::Sym(f, ch) = t.node() else {
            return Err(Error::OutsideDomain);
        };
        let sets: Vec<BTreeSet<Name>> = ch.iter().map(|c| self.runner.states(c)).collect();
        let tr = self
            .a
            .advice
            .transitions_for(h, f)
            .find(|tr| tr.children.len() == sets.len() && tr.children.iter().zip(&sets).all(|(hj, s)| s.contains(hj)))
            .ok_or(Error::OutsideDomain)?
            .clone();
        let rule = self
            .a
            .rule(q, f, &tr.children)
            .ok_or_else(|| Error::invalid(format!("missing rule for {} on {}", q, tr)))?
            .clone();
        let mut vals: BTreeMap<u32, Term> = BTreeMap::new();
        for (qj, j) in rule.rhs.calls() {
            let v = self.eval_state(&qj, &ch[j as usize - 1])?;
            vals.insert(j, v);
        }
        let out = rule.rhs.map_leaves(&mut |l| match l.node() {
            Node::Call(_, j) => vals.get(j).cloned(),
            _ => None,
        });
        self.memo.insert(key, (t.clone(), out.clone()));
        Ok(out)
    }

    pub fn eval_context(&mut self, q: &Name, c: &Term, h2: &Name) -> Result<Term> {
        let h = self.a.iota.get(q).ok_or(Error::OutsideDomain)?.clone();
        if c.is_x1() {
            if &h == h2 {
                return Ok(Term::call(q.clone(), 1));
            }
            return Err(Error::invalid("no computation on the context"));
        }
        if c.x1_count() != 1 {
            return Err(Error::Pattern(format!("{} is not a context", c)));
        }
        let f = c.symbol().unwrap().clone();
        let ch = c.children().to_vec();
        let hole = ch.iter().position(|x| x.x1_count() > 0).unwrap();
        let pairs = self.a.advice.run_context(&ch[hole])?;
        let sets: Vec<BTreeSet<Name>> =
            ch.iter().enumerate().map(|(i, x)| if i == hole { BTreeSet::new() } else { self.runner.states(x) }).collect();
        let tr = self
            .a
            .advice
            .transitions_for(&h, &f)
            .find(|tr| {
                tr.children.len() == ch.len()
                    && tr.children.iter().enumerate().all(|(i, hj)| {
                    if i == hole {
                        pairs.contains(&(hj.clone(), h2.clone()))
                    } else {
                        sets[i].contains(hj)
                    }
                })
            })
            .ok_or_else(|| Error::invalid("no computation on the context"))?
            .clone();
        let rule = self.a.rule(q, &f, &tr.children).ok_or(Error::OutsideDomain)?.clone();
        let mut vals: BTreeMap<u32, Term> = BTreeMap::new();
        for (qj, j) in rule.rhs.calls() {
            let i = j as usize - 1;
            let v = if i == hole { self.eval_context(&qj, &ch[i], h2)? } else { self.eval_state(&qj, &ch[i])? };
            vals.insert(j, v);
        }
        Ok(rule.rhs.map_leaves(&mut |l| match l.node() {
            Node::Call(_, j) => vals.get(j).cloned(),
            _ => None,
        }))
    }
}

/// A deterministic bottom-up transducer as a transducer with look-ahead:
/// states are the advice states and every `x_j` is processed by `h_j`.
pub fn embed_bottom_up(
    name: &str,
    advice: TreeAutomaton,
    axioms: &[(Name, Term)],
    rules: &[(Name, Vec<Name>, Term)],
) -> Result<Transducer> {
    if !advice.is_bottom_up_deterministic() {
        return Err(Error::invalid("source is not bottom-up deterministic"));
    }
    let mut a = Transducer::new(name, advice.clone());
    for h in &advice.states {
        a.add_state(h, h);
    }
    for (h, t) in axioms {
        let h2 = h.clone();
        a.axioms.insert(h.clone(), t.subst_vars(&|j| if j == 1 { Some(Term::call(h2.clone(), 1)) } else { None }));
    }
    for (f, kids, rhs) in rules {
        let Some(tr) = advice.transitions.iter().find(|t| &t.symbol == f && &t.children == kids) else {
            return Err(Error::invalid(format!("no advice transition for {}", f)));
        };
        let kids2 = kids.clone();
        let rhs = rhs.subst_vars(&|j| kids2.get(j as usize - 1).map(|h| Term::call(h.clone(), j)));
        a.add_rule(Rule { state: tr.target.clone(), symbol: f.clone(), children: kids.clone(), rhs });
    }
    a.infer_output();
    a.validate()?;
    Ok(a)
}
