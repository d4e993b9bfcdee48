//! Inspection needs and their removal by delaying output.
//!
//! A rule that deletes a child whose advice state is not universal must still
//! check that subtree. The check can be simulated by a constant-output checker
//! placed on a ground subtree of the output, provided enough ground output is
//! available at that rule. Needs that cannot be met locally are pushed upwards
//! as generalized needs and met by buffering output of the ancestors.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use crate::automata::TreeAutomaton;
use crate::error::{Error, Failure, Reason, Result};
use crate::normalform::normalize;
use crate::recognizability::{checker_from, OrecTable};
use crate::terms::{compose, factorize, max_ground_subtrees, Name, Node, Term};
use crate::transducer::{Mode, Rule, Transducer};

pub type Need = BTreeSet<(u32, Name)>;

fn show_need(m: &Need) -> String {
    let v: Vec<String> = m.iter().map(|(j, h)| format!("({},{})", j, h)).collect();
    format!("{{{}}}", v.join(","))
}

/// A downward-closed family of subsets of `over`, kept as its maximal elements.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SatFamily {
    pub over: Need,
    pub maximal: BTreeSet<Need>,
}

impl SatFamily {
    /// The family `{∅}`.
    pub fn bottom(over: &Need) -> SatFamily {
        SatFamily { over: over.clone(), maximal: [Need::new()].into_iter().collect() }
    }

    pub fn from_sets(over: &Need, sets: impl IntoIterator<Item = Need>) -> SatFamily {
        let mut all: Vec<Need> = sets.into_iter().collect();
        all.sort_by_key(|s| std::cmp::Reverse(s.len()));
        let mut maximal: BTreeSet<Need> = BTreeSet::new();
        for s in all {
            if !maximal.iter().any(|m| s.is_subset(m)) {
                maximal.insert(s);
            }
        }
        if maximal.is_empty() {
            maximal.insert(Need::new());
        }
        SatFamily { over: over.clone(), maximal }
    }

    pub fn contains(&self, m: &Need) -> bool {
        self.maximal.iter().any(|x| m.is_subset(x))
    }

    pub fn is_full(&self) -> bool {
        self.contains(&self.over)
    }

    /// Every member, not only the maximal ones.
    pub fn members(&self) -> BTreeSet<Need> {
        let mut out = BTreeSet::new();
        for m in &self.maximal {
            let v: Vec<&(u32, Name)> = m.iter().collect();
            for mask in 0u64..(1 << v.len()) {
                out.insert(v.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, x)| (*x).clone()).collect());
            }
        }
        out
    }
}

impl fmt::Display for SatFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v: Vec<String> = self.maximal.iter().map(show_need).collect();
        write!(f, "{{{}}}", v.join(","))
    }
}

/// A sequence of pending needs; the last pair lies farthest in the future.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GenNeed(pub Vec<(Need, SatFamily)>);

impl GenNeed {
    pub fn epsilon() -> GenNeed {
        GenNeed(Vec::new())
    }

    /// Drops pairs that are already met, such as `(∅, {∅})`.
    pub fn new(pairs: Vec<(Need, SatFamily)>) -> GenNeed {
        GenNeed(pairs.into_iter().filter(|(_, phi)| !phi.is_full()).collect())
    }

    pub fn single(m: &Need) -> GenNeed {
        GenNeed::new(vec![(m.clone(), SatFamily::bottom(m))])
    }

    pub fn is_epsilon(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `self` followed by `later`.
    pub fn then(&self, later: &GenNeed) -> GenNeed {
        let mut v = self.0.clone();
        v.extend(later.0.iter().cloned());
        GenNeed::new(v)
    }
}

impl fmt::Display for GenNeed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "eps");
        }
        for (m, phi) in &self.0 {
            write!(f, "({}|{})", show_need(m), phi)?;
        }
        Ok(())
    }
}

/// `η_τ`: deleted children whose advice state is not universal.
pub fn rule_need(r: &Rule, top: &BTreeSet<Name>) -> Need {
    let used = r.vars();
    r.children
        .iter()
        .enumerate()
        .map(|(i, h)| (i as u32 + 1, h))
        .filter(|(j, h)| !used.contains(j) && !top.contains(*h))
        .map(|(j, h)| (j, h.clone()))
        .collect()
}

fn call_positions(t: &Term) -> Vec<(Vec<usize>, Name, u32)> {
    t.positions()
        .into_iter()
        .filter_map(|p| match t.at(&p).unwrap().node() {
            Node::Call(q, j) => Some((p, q.clone(), *j)),
            _ => None,
        })
        .collect()
}

fn call_count(t: &Term) -> usize {
    call_positions(t).len()
}

/// Each call occurrence with the position of the largest subtree holding no other call.
fn unary_regions(rhs: &Term) -> Vec<(Vec<usize>, Term, Name, u32)> {
    call_positions(rhs)
        .into_iter()
        .map(|(p, q, j)| {
            let mut a = p.clone();
            for k in 0..=p.len() {
                if call_count(&rhs.at(&p[..k]).unwrap()) == 1 {
                    a = p[..k].to_vec();
                    break;
                }
            }
            let sub = rhs.at(&a).unwrap().replace_at(&p[a.len()..], &Term::x1());
            (a, sub, q, j)
        })
        .collect()
}

/// Every split `s = u·v` of a unary pattern, shortest suffix `v` first.
pub fn splits(s: &Term) -> Result<Vec<(Term, Term)>> {
    let fs = factorize(s)?;
    let mut out = Vec::new();
    for k in (0..=fs.len()).rev() {
        let u = fs[..k].iter().fold(Term::x1(), |acc, f| compose(&acc, f));
        let v = fs[k..].iter().fold(Term::x1(), |acc, f| compose(&acc, f));
        out.push((u, v));
    }
    Ok(out)
}

/// Recognizability queries over a fixed top-down deterministic automaton.
pub struct Inspector {
    pub advice: TreeAutomaton,
    pub top: BTreeSet<Name>,
    rec: RefCell<HashMap<(Name, Term), bool>>,
    done: RefCell<BTreeSet<Term>>,
}

impl Inspector {
    pub fn new(b: &TreeAutomaton) -> Result<Inspector> {
        if !b.is_top_down_deterministic() {
            return Err(Error::invalid(format!("advice {} is not top-down deterministic", b.name)));
        }
        Ok(Inspector {
            advice: b.clone(),
            top: b.universal_states(),
            rec: RefCell::new(HashMap::new()),
            done: RefCell::new(BTreeSet::new()),
        })
    }

    pub fn rec(&self, h: &Name, s: &Term) -> bool {
        if self.top.contains(h) {
            return true;
        }
        if !self.done.borrow().contains(s) {
            let table = OrecTable::new(&self.advice, std::slice::from_ref(s)).expect("advice checked in Inspector::new");
            let mut rec = self.rec.borrow_mut();
            let mut done = self.done.borrow_mut();
            for u in &table.subtrees {
                for g in &self.advice.states {
                    rec.insert((g.clone(), u.clone()), table.rec(g, u));
                }
                done.insert(u.clone());
            }
        }
        self.rec.borrow().get(&(h.clone(), s.clone())).copied().unwrap_or(false)
    }

    fn assign(&self, need: &[&(u32, Name)], cands: &[(usize, Vec<usize>, Term)], used: &mut Vec<(usize, Vec<usize>)>) -> bool {
        let Some(((_, h), rest)) = need.split_first() else {
            return true;
        };
        for (g, p, s) in cands {
            let clash = used.iter().any(|(g2, q)| g2 == g && (p.starts_with(q) || q.starts_with(p)));
            if clash || !self.rec(h, s) {
                continue;
            }
            used.push((*g, p.clone()));
            if self.assign(rest, cands, used) {
                return true;
            }
            used.pop();
        }
        false
    }

    fn candidates(g: &[Term]) -> Vec<(usize, Vec<usize>, Term)> {
        let mut out = Vec::new();
        for (i, t) in g.iter().enumerate() {
            for p in t.positions() {
                out.push((i, p.clone(), t.at(&p).unwrap()));
            }
        }
        out
    }

    /// `⟨⟨G,M⟩⟩`: the subsets of `m` checkable at once on disjoint subtrees of the trees in `g`.
    pub fn sat_family(&self, g: &[Term], m: &Need) -> SatFamily {
        let cands = Self::candidates(g);
        let v: Vec<&(u32, Name)> = m.iter().collect();
        let mut masks: Vec<u64> = (0u64..(1 << v.len())).collect();
        masks.sort_by_key(|x| std::cmp::Reverse(x.count_ones()));
        let mut found: Vec<u64> = Vec::new();
        for mask in masks {
            if found.iter().any(|f| mask & f == mask) {
                continue;
            }
            let sub: Vec<&(u32, Name)> = v.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, x)| *x).collect();
            if self.assign(&sub, &cands, &mut Vec::new()) {
                found.push(mask);
            }
        }
        let sets = found.into_iter().map(|mask| {
            v.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, x)| (*x).clone()).collect::<Need>()
        });
        SatFamily::from_sets(m, sets)
    }

    fn phi_at(&self, v: &Term, m: &Need, phi: &SatFamily) -> SatFamily {
        let g = max_ground_subtrees(v);
        let mut sets = Vec::new();
        for r1 in &phi.maximal {
            let rest: Need = m.difference(r1).cloned().collect();
            for r2 in self.sat_family(&g, &rest).maximal {
                sets.push(r1.union(&r2).cloned().collect::<Need>());
            }
        }
        SatFamily::from_sets(m, sets)
    }

    /// `⟦p⟧♯♯`: what remains of `alpha` after using the ground subtrees of `p`.
    pub fn shed(&self, p: &Term, alpha: &GenNeed) -> Result<GenNeed> {
        let Some(((m, phi), front)) = alpha.0.split_last() else {
            return Ok(GenNeed::epsilon());
        };
        for (u, v) in splits(p)? {
            if self.phi_at(&v, m, phi).is_full() {
                return self.shed(&u, &GenNeed(front.to_vec()));
            }
        }
        let mut out = front.to_vec();
        out.push((m.clone(), self.phi_at(p, m, phi)));
        Ok(GenNeed::new(out))
    }

    /// `[s]^S`: the shortest suffix of `s` that discharges every need in `needs`, with its prefix.
    pub fn min_suffix(&self, s: &Term, needs: &BTreeSet<GenNeed>) -> Result<(Term, Term)> {
        for (u, v) in splits(s)? {
            let mut ok = true;
            for a in needs {
                if !self.shed(&v, a)?.is_epsilon() {
                    ok = false;
                    break;
                }
            }
            if ok {
                return Ok((u, v));
            }
        }
        Err(Failure::new(Reason::NoDischargingSplit, "delay", format!("buffer {} is insufficient", s)).into())
    }

    /// `⟦τ⟧♯`: the need of a rule given the needs arising below its calls.
    pub fn apply_rule_need(&self, r: &Rule, below: &BTreeMap<u32, GenNeed>) -> Result<GenNeed> {
        let eta = rule_need(r, &self.top);
        let calls = call_positions(&r.rhs);
        let child = |j: u32| below.get(&j).cloned().unwrap_or_default();
        if calls.len() == 1 {
            let (pos, _, j) = &calls[0];
            let p = r.rhs.replace_at(pos, &Term::x1());
            return self.shed(&p, &GenNeed::single(&eta).then(&child(*j)));
        }
        let mut rest = r.rhs.clone();
        for (a, pk, _, j) in unary_regions(&r.rhs) {
            let alpha = child(j);
            let mut cut = None;
            for (u, v) in splits(&pk)? {
                if self.shed(&v, &alpha)?.is_epsilon() {
                    cut = Some(u);
                    break;
                }
            }
            let u = cut.ok_or_else(|| {
                Failure::new(
                    Reason::NoDischargingSplit,
                    "needs",
                    format!("no suffix of {} discharges {} for x{} in {}", pk, alpha, j, r),
                )
            })?;
            rest = rest.replace_at(&a, &compose(&u, &Term::var(j)));
        }
        let phi = self.sat_family(&max_ground_subtrees(&rest), &eta);
        Ok(GenNeed::new(vec![(eta, phi)]))
    }

    /// The need of state `q` on the input tree `t`, by direct recursion over `t`.
    pub fn tree_need(&self, a: &Transducer, q: &Name, t: &Term) -> Result<GenNeed> {
        let h = &a.iota[q];
        let f = t.symbol().ok_or_else(|| Error::invalid(format!("{} is not ground", t)))?;
        let kids = self
            .advice
            .td_children(h, f)
            .ok_or_else(|| Error::invalid(format!("{} is not in the domain of {}", t, h)))?;
        let r = a.rule(q, f, kids).ok_or_else(|| Error::invalid(format!("no rule for {} on {}", q, f)))?;
        let mut below = BTreeMap::new();
        for (j, qj) in r.successors() {
            below.insert(j, self.tree_need(a, &qj, &t.children()[j as usize - 1])?);
        }
        self.apply_rule_need(r, &below)
    }
}

pub type NeedSets = BTreeMap<Name, BTreeSet<GenNeed>>;

/// Guard on the total number of generalized needs; exceeding it is `Error::Limit`.
pub const MAX_NEEDS: usize = 50_000;

/// The least solution of the need constraints, one set of generalized needs per state.
pub fn compute_needs(a: &Transducer) -> Result<NeedSets> {
    let ins = Inspector::new(&a.advice)?;
    compute_needs_with(&ins, a)
}

pub fn compute_needs_with(ins: &Inspector, a: &Transducer) -> Result<NeedSets> {
    let cap = a.size();
    let mut rho: NeedSets = a.states.iter().map(|q| (q.clone(), BTreeSet::new())).collect();
    loop {
        let mut changed = false;
        for r in a.rules_in_order() {
            let succ: Vec<(u32, Name)> = r.successors().into_iter().collect();
            let mut combos: Vec<BTreeMap<u32, GenNeed>> = vec![BTreeMap::new()];
            for (j, qj) in &succ {
                let mut next = Vec::new();
                for c in &combos {
                    for alpha in &rho[qj] {
                        let mut c2 = c.clone();
                        c2.insert(*j, alpha.clone());
                        next.push(c2);
                    }
                }
                combos = next;
            }
            for c in combos {
                let n = ins.apply_rule_need(r, &c)?;
                if n.len() > cap {
                    return Err(Failure::new(
                        Reason::NeedLengthBound,
                        "needs",
                        format!("need {} of {} is longer than {}", n, r.state, cap),
                    )
                    .into());
                }
                if rho.get_mut(&r.state).unwrap().insert(n) {
                    changed = true;
                }
            }
        }
        if rho.values().map(BTreeSet::len).sum::<usize>() > MAX_NEEDS {
            return Err(Error::Limit(format!("more than {} generalized needs", MAX_NEEDS)));
        }
        if !changed {
            return Ok(rho);
        }
    }
}

#[derive(Clone, Debug)]
pub struct Delayed {
    pub transducer: Transducer,
    /// New state to (source state, buffer).
    pub buffers: BTreeMap<Name, (Name, Term)>,
    /// Largest number of irreducible factors allowed in a buffer.
    pub bound: usize,
}

/// Guard on the number of buffer states.
pub const MAX_BUFFER_STATES: usize = 20_000;

fn unsat(r: &Rule, detail: String) -> Error {
    Failure::new(Reason::UnsatisfiableRuleNeed, "delay", format!("rule {}: {}", r, detail)).into()
}

/// Moves output into buffers so that every rule can meet its own need.
pub fn delay_outputs(a: &Transducer, needs: &NeedSets) -> Result<Delayed> {
    let ins = Inspector::new(&a.advice)?;
    delay_outputs_with(&ins, a, needs)
}

pub fn delay_outputs_with(ins: &Inspector, a: &Transducer, needs: &NeedSets) -> Result<Delayed> {
    let size = a.size();
    let arity = a.advice.alphabet.max_rank().max(2);
    let bound = (arity - 1) * a.states.len().max(1) * size * size;
    let mut out = Transducer::new(&format!("{}_d", a.name), a.advice.clone());
    out.output = a.output.clone();
    let mut buffers: BTreeMap<Name, (Name, Term)> = BTreeMap::new();
    let mut ids: HashMap<(Name, Term), Name> = HashMap::new();
    let mut per_state: HashMap<Name, usize> = HashMap::new();
    let mut queue: VecDeque<Name> = VecDeque::new();
    let mut intern = |q: &Name, u: &Term, out: &mut Transducer, queue: &mut VecDeque<Name>, buffers: &mut BTreeMap<Name, (Name, Term)>| -> Result<Name> {
        if let Some(n) = ids.get(&(q.clone(), u.clone())) {
            return Ok(n.clone());
        }
        let fs = factorize(u)?;
        if fs.len() > bound || fs.iter().any(|f| f.size() as usize > size) {
            return Err(Failure::new(
                Reason::BufferBound,
                "delay",
                format!("buffer {} for {} exceeds {} factors of size {}", u, q, bound, size),
            )
            .into());
        }
        if ids.len() >= MAX_BUFFER_STATES {
            return Err(Error::Limit(format!("more than {} buffer states", MAX_BUFFER_STATES)));
        }
        let k = per_state.entry(q.clone()).or_insert(0);
        let n = if *k == 0 { q.clone() } else { Name::from(format!("{}.{}", q, k)) };
        *k += 1;
        ids.insert((q.clone(), u.clone()), n.clone());
        out.add_state(&n, &a.iota[q]);
        buffers.insert(n.clone(), (q.clone(), u.clone()));
        queue.push_back(n.clone());
        Ok(n)
    };
    let empty = BTreeSet::new();
    let s_of = |q: &Name| needs.get(q).unwrap_or(&empty);
    for (h, ax) in &a.axioms {
        match ax.calls().into_iter().next() {
            None => {
                if !ins.rec(h, ax) {
                    return Err(Failure::new(
                        Reason::UnsatisfiableRuleNeed,
                        "delay",
                        format!("dom({}) is not recognizable by the axiom {}", h, ax),
                    )
                    .into());
                }
                out.axioms.insert(h.clone(), ax.clone());
            }
            Some((q0, _)) => {
                let u0 = crate::transducer::to_pattern(ax);
                let (u, v) = ins.min_suffix(&u0, s_of(&q0))?;
                let n = intern(&q0, &v, &mut out, &mut queue, &mut buffers)?;
                out.axioms.insert(h.clone(), compose(&u, &Term::call(n, 1)));
            }
        }
    }
    while let Some(n) = queue.pop_front() {
        let (q, u) = buffers[&n].clone();
        let rules: Vec<Rule> = a.rules_of(&q).cloned().collect();
        for r in rules {
            let eta = rule_need(&r, &ins.top);
            let calls = call_positions(&r.rhs);
            let rhs = if calls.is_empty() {
                let t = compose(&u, &r.rhs);
                if !ins.sat_family(std::slice::from_ref(&t), &eta).is_full() {
                    return Err(unsat(&r, format!("{} cannot check {}", t, show_need(&eta))));
                }
                t
            } else if calls.len() == 1 {
                let (pos, qj, j) = calls[0].clone();
                let w = compose(&u, &r.rhs.replace_at(&pos, &Term::x1()));
                let (u1, v) = ins.min_suffix(&w, s_of(&qj))?;
                if !ins.shed(&u1, &GenNeed::single(&eta))?.is_epsilon() {
                    return Err(unsat(&r, format!("{} cannot check {}", u1, show_need(&eta))));
                }
                let m = intern(&qj, &v, &mut out, &mut queue, &mut buffers)?;
                compose(&u1, &Term::call(m, j))
            } else {
                let regions = unary_regions(&r.rhs);
                let mut chosen: BTreeMap<u32, Term> = BTreeMap::new();
                for (_, pk, qj, j) in &regions {
                    let (_, v) = ins.min_suffix(pk, s_of(qj))?;
                    let longer = match chosen.get(j) {
                        Some(w) => factorize(&v)?.len() > factorize(w)?.len(),
                        None => true,
                    };
                    if longer {
                        chosen.insert(*j, v);
                    }
                }
                let mut marked = r.rhs.clone();
                let mut built = r.rhs.clone();
                for (a_pos, pk, qj, j) in &regions {
                    let v = &chosen[j];
                    let Some((uk, _)) = splits(pk)?.into_iter().find(|(_, s)| s == v) else {
                        return Err(Failure::new(
                            Reason::NoDischargingSplit,
                            "delay",
                            format!("copies of x{} in {} need different buffers", j, r),
                        )
                        .into());
                    };
                    marked = marked.replace_at(a_pos, &compose(&uk, &Term::var(*j)));
                    let m = intern(qj, v, &mut out, &mut queue, &mut buffers)?;
                    built = built.replace_at(a_pos, &compose(&uk, &Term::call(m, *j)));
                }
                let g = max_ground_subtrees(&compose(&u, &marked));
                if !ins.sat_family(&g, &eta).is_full() {
                    return Err(unsat(&r, format!("ground subtrees {:?} cannot check {}", g, show_need(&eta))));
                }
                compose(&u, &built)
            };
            out.add_rule(Rule { state: n.clone(), symbol: r.symbol.clone(), children: r.children.clone(), rhs });
        }
    }
    out.validate()?;
    Ok(Delayed { transducer: out, buffers, bound })
}

/// Replaces each rule's need by checkers placed on ground subtrees of its own output.
pub fn strip_inspection(a: &Transducer) -> Result<Transducer> {
    let ins = Inspector::new(&a.advice)?;
    strip_with(&ins, a)
}

fn strip_with(ins: &Inspector, a: &Transducer) -> Result<Transducer> {
    let mut out = a.clone();
    out.name = Name::from(format!("{}_s", a.name));
    let mut checkers: BTreeMap<(Name, Term), Name> = BTreeMap::new();
    let mut add_checker = |h: &Name, s: &Term, out: &mut Transducer| -> Result<Name> {
        if let Some(n) = checkers.get(&(h.clone(), s.clone())) {
            return Ok(n.clone());
        }
        let prefix = format!("c{}.", checkers.len());
        let table = OrecTable::new(&ins.advice, std::slice::from_ref(s))?;
        let c = checker_from(&table, h, s, "check")?;
        let rename = |q: &Name| Name::from(format!("{}{}", prefix, q));
        for q in &c.states {
            out.add_state(&rename(q), &c.iota[q]);
        }
        for r in c.rules() {
            let rhs = r.rhs.map_leaves(&mut |l| match l.node() {
                Node::Call(q, j) => Some(Term::call(rename(q), *j)),
                _ => None,
            });
            out.add_rule(Rule { state: rename(&r.state), symbol: r.symbol.clone(), children: r.children.clone(), rhs });
        }
        let (q0, _) = c.axioms[h].calls().into_iter().next().ok_or_else(|| Error::internal("checker without calls"))?;
        let n = rename(&q0);
        checkers.insert((h.clone(), s.clone()), n.clone());
        Ok(n)
    };
    let place = |t: &Term, eta: &Need| -> Option<Vec<(u32, Name, Vec<usize>, Term)>> {
        let order: Vec<Vec<usize>> = t.positions();
        let mut cands: Vec<(usize, Vec<usize>, Term)> = order
            .iter()
            .enumerate()
            .filter_map(|(i, p)| {
                let s = t.at(p).unwrap();
                s.is_ground().then_some((i, p.clone(), s))
            })
            .collect();
        cands.sort_by_key(|(i, _, s)| (s.size(), *i));
        let cands: Vec<(usize, Vec<usize>, Term)> = cands.into_iter().map(|(_, p, s)| (0, p, s)).collect();
        let need: Vec<&(u32, Name)> = eta.iter().collect();
        let mut used = Vec::new();
        if !ins.assign(&need, &cands, &mut used) {
            return None;
        }
        Some(
            need.iter()
                .zip(used)
                .map(|((j, h), (_, p))| (*j, h.clone(), p.clone(), t.at(&p).unwrap()))
                .collect(),
        )
    };
    let rules: Vec<Rule> = a.rules().cloned().collect();
    for r in rules {
        let eta = rule_need(&r, &ins.top);
        if eta.is_empty() {
            continue;
        }
        let assigned = place(&r.rhs, &eta).ok_or_else(|| Error::internal(format!("rule {} does not meet its need", r)))?;
        let mut rhs = r.rhs.clone();
        for (j, h, p, s) in assigned {
            let c = add_checker(&h, &s, &mut out)?;
            rhs = rhs.replace_at(&p, &Term::call(c, j));
        }
        out.add_rule(Rule { rhs, ..r });
    }
    let axioms: Vec<(Name, Term)> = a.axioms.iter().map(|(h, t)| (h.clone(), t.clone())).collect();
    for (h, ax) in axioms {
        if ax.is_ground() && !ins.top.contains(&h) {
            let c = add_checker(&h, &ax, &mut out)?;
            out.axioms.insert(h, Term::call(c, 1));
        }
    }
    let d = out.validate()?;
    if !d.without_inspection {
        return Err(Error::internal(format!("{} still inspects", out.name)));
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct InspectionRemoval {
    /// The canonical earliest input.
    pub source: Transducer,
    pub needs: NeedSets,
    pub delayed: Delayed,
    pub transducer: Transducer,
}

/// Decides whether `a` has an equivalent transducer without inspection and builds it.
pub fn remove_inspection(a: &Transducer, mode: Mode) -> Result<InspectionRemoval> {
    a.validate()?;
    let ins = Inspector::new(&a.advice)?;
    let source = normalize(a, mode)?.transducer;
    let needs = compute_needs_with(&ins, &source)?;
    let delayed = delay_outputs_with(&ins, &source, &needs)?;
    let transducer = strip_with(&ins, &delayed.transducer)?;
    Ok(InspectionRemoval { source, needs, delayed, transducer })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_document, parse_ground, parse_pattern};

    fn need(items: &[(u32, &str)]) -> Need {
        items.iter().map(|(j, h)| (*j, Name::new(h))).collect()
    }

    fn leafy() -> Inspector {
        let doc = parse_document(
            "alphabet s { f/2 a/0 b/0 }
             automaton B over s { states h1 h2 top; accept h1; h1 <- a; h2 <- b; top <- f(top,top); top <- a; top <- b; }",
        )
        .unwrap();
        Inspector::new(doc.automaton("B").unwrap()).unwrap()
    }

    #[test]
    fn one_leaf_checks_one_need() {
        let ins = leafy();
        let m = need(&[(1, "h1"), (2, "h2")]);
        let phi = ins.sat_family(&[parse_ground("a").unwrap()], &m);
        assert_eq!(phi.to_string(), "{{(1,h1)},{(2,h2)}}");
        let phi = ins.sat_family(&[parse_ground("f(a,a)").unwrap()], &m);
        assert_eq!(phi.maximal, [m.clone()].into_iter().collect());
        let phi = ins.sat_family(&[], &m);
        assert_eq!(phi.to_string(), "{{}}");
    }

    #[test]
    fn shedding_one_factor() {
        let ins = leafy();
        let m = need(&[(2, "h2"), (3, "h2")]);
        let p = parse_pattern("f(a,x1)").unwrap();
        let r = ins.shed(&p, &GenNeed::single(&m)).unwrap();
        assert_eq!(r.to_string(), "({(2,h2),(3,h2)}|{{(2,h2)},{(3,h2)}})");
        let alpha = GenNeed::single(&need(&[(1, "h1")]));
        assert_eq!(ins.shed(&Term::x1(), &alpha).unwrap(), alpha);
        let pp = parse_pattern("f(a,f(a,x1))").unwrap();
        assert!(ins.shed(&pp, &GenNeed::single(&m)).unwrap().is_epsilon());
    }

    #[test]
    fn family_members_are_downward_closed() {
        let m = need(&[(1, "a"), (2, "b"), (3, "c")]);
        let phi = SatFamily::from_sets(&m, vec![need(&[(1, "a"), (2, "b")]), need(&[(1, "a")]), need(&[(3, "c")])]);
        assert_eq!(phi.maximal.len(), 2);
        let all = phi.members();
        for s in &all {
            assert!(phi.contains(s));
        }
        assert_eq!(all.len(), 5);
        assert!(!phi.contains(&need(&[(2, "b"), (3, "c")])));
    }

    #[test]
    fn splits_enumerate_suffixes() {
        let s = parse_pattern("f1(a,f2(a,x1))").unwrap();
        let v: Vec<String> = splits(&s).unwrap().iter().map(|(u, v)| format!("{} {}", u, v)).collect();
        assert_eq!(v, vec!["f1(a,f2(a,x1)) x1", "f1(a,x1) f2(a,x1)", "x1 f1(a,f2(a,x1))"]);
    }
}
