//! Output-recognizability of state languages by a fixed output tree, and checker transducers.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use crate::automata::{Transition, TreeAutomaton};
use crate::error::{Error, Result};
use crate::terms::{Name, Term};
use crate::transducer::{Rule, Transducer};

/// One way to produce `s'` on a transition: the pattern and, per constrained child, the position used.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    pub pattern: Term,
    pub parts: Vec<(u32, Vec<usize>, Term)>,
}

#[derive(Clone, Debug)]
pub struct OrecTable {
    pub base: TreeAutomaton,
    pub targets: Vec<Term>,
    pub top: BTreeSet<Name>,
    /// Distinct subtrees of the targets, smallest first.
    pub subtrees: Vec<Term>,
    rec: BTreeSet<(Name, Term)>,
}

fn disjoint(p: &[usize], q: &[usize]) -> bool {
    !(p.starts_with(q) || q.starts_with(p))
}

impl OrecTable {
    pub fn new(b: &TreeAutomaton, targets: &[Term]) -> Result<OrecTable> {
        if !b.is_top_down_deterministic() {
            return Err(Error::invalid(format!("automaton {} is not top-down deterministic", b.name)));
        }
        for s in targets {
            if !s.is_ground() {
                return Err(Error::Pattern(format!("{} is not a ground tree", s)));
            }
        }
        let inhabited = b.inhabited();
        let mut base = b.clone();
        base.transitions.retain(|t| t.children.iter().all(|c| inhabited.contains(c)));
        let top = b.universal_states();
        let mut subtrees: Vec<Term> = Vec::new();
        for s in targets {
            for p in s.positions() {
                let u = s.at(&p).unwrap();
                if !subtrees.contains(&u) {
                    subtrees.push(u);
                }
            }
        }
        subtrees.sort_by_key(|u| u.size());
        let mut table = OrecTable { base, targets: targets.to_vec(), top, subtrees, rec: BTreeSet::new() };
        for h in &table.base.states {
            if !table.top.contains(h) {
                for u in &table.subtrees {
                    table.rec.insert((h.clone(), u.clone()));
                }
            }
        }
        loop {
            let drop: Vec<(Name, Term)> = table
                .rec
                .iter()
                .filter(|(h, u)| table.base.transitions_from(h).any(|t| table.decompose(t, u).is_none()))
                .cloned()
                .collect();
            if drop.is_empty() {
                return Ok(table);
            }
            for k in drop {
                table.rec.remove(&k);
            }
        }
    }

    pub fn rec(&self, h: &Name, s: &Term) -> bool {
        self.top.contains(h) || self.rec.contains(&(h.clone(), s.clone()))
    }

    /// Subtrees `s'` with `rec(h, s')` none of whose proper subtrees qualifies.
    pub fn minimal(&self, h: &Name) -> Vec<Term> {
        self.subtrees
            .iter()
            .filter(|u| self.rec(h, u))
            .filter(|u| u.positions().iter().skip(1).all(|p| !self.rec(h, &u.at(p).unwrap())))
            .cloned()
            .collect()
    }

    /// The lexicographically least choice of disjoint positions in `s` for the constrained children.
    pub fn decompose(&self, t: &Transition, s: &Term) -> Option<Decomposition> {
        let need: Vec<(u32, &Name)> = t
            .children
            .iter()
            .enumerate()
            .filter(|(_, h)| !self.top.contains(*h))
            .map(|(i, h)| (i as u32 + 1, h))
            .collect();
        let positions = s.positions();
        let mut chosen: Vec<Vec<usize>> = Vec::new();
        if !self.search(&need, &positions, s, &mut chosen) {
            return None;
        }
        let mut pattern = s.clone();
        let mut parts = Vec::new();
        for ((j, _), p) in need.iter().zip(chosen) {
            parts.push((*j, p.clone(), s.at(&p).unwrap()));
            pattern = pattern.replace_at(&p, &Term::var(*j));
        }
        Some(Decomposition { pattern, parts })
    }

    fn search(&self, need: &[(u32, &Name)], positions: &[Vec<usize>], s: &Term, chosen: &mut Vec<Vec<usize>>) -> bool {
        let Some(((_, h), rest)) = need.split_first() else {
            return true;
        };
        for p in positions {
            if !chosen.iter().all(|c| disjoint(c, p)) || !self.rec(h, &s.at(p).unwrap()) {
                continue;
            }
            chosen.push(p.clone());
            if self.search(rest, positions, s, chosen) {
                return true;
            }
            chosen.pop();
        }
        false
    }
}

impl fmt::Display for OrecTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for h in &self.base.states {
            if self.top.contains(h) {
                writeln!(f, "{}: top", h)?;
                continue;
            }
            let m: Vec<String> = self.minimal(h).iter().map(|u| u.to_string()).collect();
            writeln!(f, "{}: {{{}}}", h, m.join(", "))?;
        }
        Ok(())
    }
}

pub fn orec_table(b: &TreeAutomaton, s: &Term) -> Result<OrecTable> {
    OrecTable::new(b, std::slice::from_ref(s))
}

/// A linear transducer without inspection, with domain `dom_B(h)` and constant output `s`.
pub fn build_checker(b: &TreeAutomaton, h: &Name, s: &Term) -> Result<Transducer> {
    let table = orec_table(b, s)?;
    checker_from(&table, h, s, &format!("check_{}", h))
}

/// Builds the checker from an existing table; state names are `h'@i` with `i` indexing `table.subtrees`.
pub fn checker_from(table: &OrecTable, h: &Name, s: &Term, name: &str) -> Result<Transducer> {
    if !table.base.has_state(h) {
        return Err(Error::invalid(format!("unknown state {}", h)));
    }
    if !table.rec(h, s) {
        return Err(Error::invalid(format!("dom({}) is not recognizable by {}", h, s)));
    }
    let mut advice = table.base.clone();
    advice.name = Name::from(format!("{}_{}", table.base.name, h));
    advice.accepting = [h.clone()].into_iter().collect();
    let advice = advice.trim()?;
    let mut a = Transducer::new(name, advice);
    if table.top.contains(h) {
        a.axioms.insert(h.clone(), s.clone());
        a.infer_output();
        return Ok(a);
    }
    let index = |u: &Term| table.subtrees.iter().position(|v| v == u).unwrap();
    let mut names: BTreeMap<(Name, usize), Name> = BTreeMap::new();
    let mut queue = VecDeque::new();
    let mut state = |hh: &Name, u: &Term, a: &mut Transducer, queue: &mut VecDeque<(Name, Term, Name)>| -> Name {
        let key = (hh.clone(), index(u));
        if let Some(n) = names.get(&key) {
            return n.clone();
        }
        let n = Name::from(format!("{}@{}", hh, key.1));
        names.insert(key, n.clone());
        a.add_state(&n, hh);
        queue.push_back((n.clone(), u.clone(), hh.clone()));
        n
    };
    let q0 = state(h, s, &mut a, &mut queue);
    a.axioms.insert(h.clone(), Term::call(q0, 1));
    while let Some((n, u, hh)) = queue.pop_front() {
        let trans: Vec<Transition> = a.advice.transitions_from(&hh).cloned().collect();
        for t in trans {
            let d = table
                .decompose(&t, &u)
                .ok_or_else(|| Error::internal(format!("no decomposition of {} on {}", u, t)))?;
            let mut calls = BTreeMap::new();
            for (j, _, sub) in &d.parts {
                let m = state(&t.children[*j as usize - 1], sub, &mut a, &mut queue);
                calls.insert(*j, m);
            }
            let rhs = d.pattern.subst_vars(&|j| calls.get(&j).map(|m| Term::call(m.clone(), j)));
            a.add_rule(Rule { state: n.clone(), symbol: t.symbol.clone(), children: t.children.clone(), rhs });
        }
    }
    a.infer_output();
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::enumerate_domain;
    use crate::syntax::{parse_document, parse_ground};

    const BINARY: &str = "alphabet s { f/2 a/0 b/0 }
        automaton B over s {
          states h0 ha hb top; accept h0;
          h0 <- f(ha, hb); ha <- f(ha, top); ha <- a; hb <- f(top, hb); hb <- b;
          top <- f(top, top); top <- a; top <- b;
        }";

    fn binary() -> TreeAutomaton {
        parse_document(BINARY).unwrap().automaton("B").unwrap().clone()
    }

    fn t(s: &str) -> Term {
        parse_ground(s).unwrap()
    }

    #[test]
    fn binary_table() {
        let b = binary();
        let tab = orec_table(&b, &t("g(c,c)")).unwrap();
        let show = |h: &str| tab.minimal(&Name::new(h)).iter().map(|u| u.to_string()).collect::<Vec<_>>();
        assert_eq!(show("ha"), vec!["c"]);
        assert_eq!(show("hb"), vec!["c"]);
        assert_eq!(show("h0"), vec!["g(c,c)"]);
        assert!(!tab.rec(&Name::new("h0"), &t("c")));
    }

    #[test]
    fn leaf_only_state_is_recognized_by_anything() {
        let b = parse_document("alphabet s { f/1 a/0 } automaton B over s { states h; accept h; h <- a; }")
            .unwrap()
            .automaton("B")
            .unwrap()
            .clone();
        let tab = orec_table(&b, &t("g(c,d)")).unwrap();
        for u in &tab.subtrees {
            assert!(tab.rec(&Name::new("h"), u));
        }
    }

    #[test]
    fn checker_has_constant_output_on_the_domain() {
        let b = binary();
        let s = t("g(c,c)");
        let a = build_checker(&b, &Name::new("h0"), &s).unwrap();
        let d = a.validate().unwrap();
        assert!(d.linear && d.without_inspection);
        assert_eq!(a.rule_count(), 5);
        let all = enumerate_domain(&b, 4, Some(&Name::new("top"))).unwrap();
        let dom = enumerate_domain(&b, 4, Some(&Name::new("h0"))).unwrap();
        for x in &all {
            let out = a.eval(x);
            if dom.contains(x) {
                assert_eq!(out.as_ref(), Some(&s));
            } else {
                assert_eq!(out, None, "{}", x);
            }
        }
    }

    #[test]
    fn unrecognizable_target_is_rejected() {
        assert!(build_checker(&binary(), &Name::new("h0"), &t("c")).is_err());
    }
}
