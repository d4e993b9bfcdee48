//! Removal of regular look-ahead in favour of top-down inspection.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use crate::automata::{gate_equivalent, powerset_topdown, SubsetAutomaton};
use crate::error::{Error, Failure, Reason, Result};
use crate::normalform::normalize;
use crate::oracle::enumerate_domain;
use crate::terms::{compose, lub1_terms, lub_terms, residual, Name, Node, Term};
use crate::transducer::{split_axiom, Mode, Rule, Transducer};

/// `‖s1,s2‖`: depth of what remains after the maximal common prefix.
pub fn variation(s1: &Term, s2: &Term) -> u32 {
    if s1 == s2 {
        return 0;
    }
    let s0 = lub_terms(&[s1.clone(), s2.clone()]);
    let d = |s: &Term| match residual(&s0, s) {
        Some(Some(u)) => u.depth(),
        _ => s.depth(),
    };
    d(s1).max(d(s2))
}

/// A state `⟨ρ⟩`: pending output per advice state of a powerset state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RhoState {
    pub set: Name,
    /// Ground trees, or trees whose calls are all `q(x1)`.
    pub entries: BTreeMap<Name, Term>,
}

impl fmt::Display for RhoState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.entries.iter().map(|(h, t)| format!("{}->{}", h, t)).collect();
        write!(f, "<{}: {}>", self.set, parts.join(", "))
    }
}

/// Solution of hypothesis (H) for one transition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HSolution {
    /// Output pattern over `x_j`, `j ∈ J`.
    pub pattern: Term,
    /// `j -> (h_j -> u_{j,h_j})`; calls in `u` are on `x_j`.
    pub residuals: BTreeMap<u32, BTreeMap<Name, Term>>,
}

/// One tree of the family `P`, indexed by the child advice states.
#[derive(Clone, Debug)]
pub struct Indexed {
    pub children: Vec<Name>,
    pub tree: Term,
}

fn family(entries: &[Indexed], pos: &[usize]) -> Vec<Term> {
    entries.iter().map(|e| e.tree.at(pos).expect("position inside every tree")).collect()
}

fn settled(fam: &[Term]) -> bool {
    !fam[0].has_call() && fam.iter().all(|t| t == &fam[0])
}

fn same_symbol(fam: &[Term]) -> bool {
    matches!(fam[0].node(), Node::Sym(..)) && fam.iter().all(|t| t.same_label(&fam[0]))
}

fn divergences(entries: &[Indexed], pos: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    let fam = family(entries, pos);
    if settled(&fam) {
        return;
    }
    if same_symbol(&fam) {
        for i in 0..fam[0].children().len() {
            pos.push(i);
            divergences(entries, pos, out);
            pos.pop();
        }
    } else {
        out.push(pos.clone());
    }
}

/// Coordinates `j` such that the family is a function of `h_j` and only calls `x_j`.
fn attributions(entries: &[Indexed], fam: &[Term], arity: usize) -> Vec<u32> {
    let mut calls = BTreeSet::new();
    for t in fam {
        for (_, j) in t.calls() {
            calls.insert(j);
        }
    }
    (1..=arity as u32)
        .filter(|&j| calls.iter().all(|&c| c == j))
        .filter(|&j| {
            let mut seen: HashMap<&Name, &Term> = HashMap::new();
            entries.iter().zip(fam).all(|(e, t)| *seen.entry(&e.children[j as usize - 1]).or_insert(t) == t)
        })
        .collect()
}

fn covers(c: &[usize], d: &[usize]) -> bool {
    d.starts_with(c)
}

/// Minimal positions whose family equals `r`.
fn cut_set(entries: &[Indexed], r: &[Term], pos: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    let fam = family(entries, pos);
    if fam == r {
        out.push(pos.clone());
        return;
    }
    if settled(&fam) || !same_symbol(&fam) {
        return;
    }
    for i in 0..fam[0].children().len() {
        pos.push(i);
        cut_set(entries, r, pos, out);
        pos.pop();
    }
}

fn h_failure(detail: String) -> Failure {
    Failure::new(Reason::HypothesisH, "construction", detail)
}

/// Finds the maximal pattern `p` and residuals `u_{j,h_j}` with `P = p{x_j -> u_{j,h_j}}`.
pub fn solve_h(entries: &[Indexed], mode: Mode) -> std::result::Result<HSolution, Failure> {
    if entries.is_empty() {
        return Err(h_failure("no indexed trees".into()));
    }
    let arity = entries[0].children.len();
    let mut ds = Vec::new();
    divergences(entries, &mut Vec::new(), &mut ds);
    let mut by_coord: BTreeMap<u32, Vec<Vec<usize>>> = BTreeMap::new();
    for d in &ds {
        let fam = family(entries, d);
        let js = attributions(entries, &fam, arity);
        match js.as_slice() {
            [] => {
                return Err(h_failure(format!(
                    "divergence not attributable to a single child at position {:?}: {}",
                    d,
                    show(&fam)
                )))
            }
            [j] => by_coord.entry(*j).or_default().push(d.clone()),
            _ => {
                return Err(Failure::new(
                    Reason::AmbiguousAttribution,
                    "construction",
                    format!("divergence at {:?} is explained by children {:?}", d, js),
                ))
            }
        }
    }
    let mut pattern = entries[0].tree.clone();
    let mut residuals = BTreeMap::new();
    for (&j, dj) in &by_coord {
        let first = &dj[0];
        let mut found = None;
        for len in (0..=first.len()).rev() {
            let cand = &first[..len];
            let r = family(entries, cand);
            if !attributions(entries, &r, arity).contains(&j) {
                continue;
            }
            let mut cs = Vec::new();
            cut_set(entries, &r, &mut Vec::new(), &mut cs);
            if mode == Mode::Linear && cs.len() != 1 {
                continue;
            }
            let mine = dj.iter().all(|d| cs.iter().any(|c| covers(c, d)));
            let others = by_coord
                .iter()
                .filter(|(k, _)| **k != j)
                .flat_map(|(_, v)| v)
                .any(|d| cs.iter().any(|c| covers(c, d)));
            if mine && !others {
                found = Some((cs, r));
                break;
            }
        }
        let Some((cs, r)) = found else {
            return Err(h_failure(format!("inconsistent residual for child {} at positions {:?}", j, dj)));
        };
        for c in &cs {
            pattern = pattern.replace_at(c, &Term::var(j));
        }
        let mut res = BTreeMap::new();
        for (e, t) in entries.iter().zip(&r) {
            res.insert(e.children[j as usize - 1].clone(), t.clone());
        }
        residuals.insert(j, res);
    }
    for e in entries {
        let back = pattern.subst_vars(&|j| residuals.get(&j).map(|m: &BTreeMap<Name, Term>| m[&e.children[j as usize - 1]].clone()));
        if back != e.tree {
            return Err(h_failure(format!("inconsistent residual: {} does not rebuild {}", pattern, e.tree)));
        }
    }
    Ok(HSolution { pattern, residuals })
}

fn show(fam: &[Term]) -> String {
    let v: Vec<String> = fam.iter().map(|t| t.to_string()).collect();
    format!("[{}]", v.join(", "))
}

/// The family `P` for a state `⟨ρ⟩` and symbol `f`, indexed by child states of `B`.
pub fn indexed_family(a: &Transducer, rho: &BTreeMap<Name, Term>, f: &Name) -> Result<Vec<Indexed>> {
    let mut out = Vec::new();
    for (h, entry) in rho {
        for t in a.advice.transitions_for(h, f) {
            let tree = match entry.calls().into_iter().next() {
                None => entry.clone(),
                Some((q, _)) => {
                    let r = a
                        .rule(&q, f, &t.children)
                        .ok_or_else(|| Error::invalid(format!("missing rule for {} on {}", q, t)))?;
                    let s = entry.map_leaves(&mut |l| match l.node() {
                        Node::Call(..) => Some(Term::x1()),
                        _ => None,
                    });
                    compose(&s, &r.rhs)
                }
            };
            out.push(Indexed { children: t.children.clone(), tree });
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct Options {
    /// Replaces the variation bound `|A|·(|A|+m)`.
    pub bound: Option<u32>,
    /// Guard on the number of constructed states; exceeding it is `Error::Limit`.
    pub max_states: usize,
}

impl Default for Options {
    fn default() -> Options {
        Options { bound: None, max_states: 20_000 }
    }
}

#[derive(Clone, Debug)]
pub struct Removal {
    /// The canonical earliest input the construction ran on.
    pub source: Transducer,
    pub top: SubsetAutomaton,
    pub transducer: Transducer,
    pub states: BTreeMap<Name, RhoState>,
    pub bound: u32,
}

/// Decides whether `a` can do without look-ahead and builds the inspection transducer.
pub fn remove_lookahead(a: &Transducer, mode: Mode) -> Result<Removal> {
    remove_lookahead_with(a, mode, &Options::default())
}

pub fn remove_lookahead_with(a: &Transducer, mode: Mode, opts: &Options) -> Result<Removal> {
    a.validate()?;
    if !a.advice.is_bottom_up_deterministic() {
        return Err(Error::invalid(format!("advice {} is not bottom-up deterministic", a.advice.name)));
    }
    let src = normalize(a, mode)?.transducer;
    let b = &src.advice;
    let top = powerset_topdown(b);
    if !gate_equivalent(b, &top) {
        return Err(Failure::new(
            Reason::DomainNotTopdown,
            "gate",
            format!("the domain of {} is not accepted by its top-down powerset automaton", a.name),
        )
        .into());
    }
    let bound = opts.bound.unwrap_or_else(|| {
        let n = src.size() as u64;
        (n * (n + b.states.len() as u64)).min(u32::MAX as u64) as u32
    });
    let lub_mode = |ts: &[Term]| -> Result<Term> {
        match mode {
            Mode::Uc => Ok(lub_terms(ts)),
            Mode::Linear => lub1_terms(ts),
        }
    };
    let fname = top.automaton.accepting.iter().next().cloned().ok_or_else(|| Error::internal("no accepting set"))?;
    let mut out = Transducer::new(&format!("{}_i", a.name), top.automaton.clone());
    out.output = a.output.clone();
    let p0: Vec<Term> = src
        .axioms
        .values()
        .map(|ax| match split_axiom(ax) {
            None => ax.clone(),
            Some((p, _)) => p,
        })
        .collect();
    let s = lub_mode(&p0)?;
    let mut states: BTreeMap<Name, RhoState> = BTreeMap::new();
    if s.is_ground() {
        out.axioms.insert(fname, s);
        out.validate()?;
        return Ok(Removal { source: src, top, transducer: out, states, bound });
    }
    let mut rho0 = BTreeMap::new();
    for (h, ax) in &src.axioms {
        match residual(&s, ax) {
            Some(Some(u)) => {
                rho0.insert(h.clone(), u);
            }
            _ => return Err(Error::internal(format!("{} is not a prefix of the axiom {}", s, ax))),
        }
    }
    let mut ids: HashMap<(Name, Vec<(Name, Term)>), Name> = HashMap::new();
    let mut queue: VecDeque<Name> = VecDeque::new();
    let mut intern = |rho: RhoState,
                      states: &mut BTreeMap<Name, RhoState>,
                      queue: &mut VecDeque<Name>,
                      out: &mut Transducer|
     -> Result<Name> {
        let key = (rho.set.clone(), rho.entries.iter().map(|(h, t)| (h.clone(), t.clone())).collect());
        if let Some(n) = ids.get(&key) {
            return Ok(n.clone());
        }
        check_variation(&rho, bound)?;
        if ids.len() >= opts.max_states {
            return Err(Error::Limit(format!("more than {} states without a verdict", opts.max_states)));
        }
        let n = Name::from(format!("r{}", ids.len()));
        ids.insert(key, n.clone());
        out.add_state(&n, &rho.set);
        states.insert(n.clone(), rho);
        queue.push_back(n.clone());
        Ok(n)
    };
    let r0 = intern(RhoState { set: fname.clone(), entries: rho0 }, &mut states, &mut queue, &mut out)?;
    out.axioms.insert(fname, compose(&s, &Term::call(r0, 1)));
    while let Some(n) = queue.pop_front() {
        let rho = states[&n].clone();
        let trans: Vec<_> = top.automaton.transitions_from(&rho.set).cloned().collect();
        for t in trans {
            let entries = indexed_family(&src, &rho.entries, &t.symbol)?;
            let sol = solve_h(&entries, mode).map_err(|mut f| {
                f.detail = format!("state {} {} on {}: {}", n, rho, t.symbol, f.detail);
                f
            })?;
            let mut calls = BTreeMap::new();
            for (j, res) in &sol.residuals {
                let entries: BTreeMap<Name, Term> = res
                    .iter()
                    .map(|(h, u)| {
                        let u = u.map_leaves(&mut |l| match l.node() {
                            Node::Call(q, _) => Some(Term::call(q.clone(), 1)),
                            _ => None,
                        });
                        (h.clone(), u)
                    })
                    .collect();
                let set = t.children[*j as usize - 1].clone();
                let m = intern(RhoState { set, entries }, &mut states, &mut queue, &mut out)?;
                calls.insert(*j, m);
            }
            let rhs = sol.pattern.subst_vars(&|j| calls.get(&j).map(|m| Term::call(m.clone(), j)));
            out.add_rule(Rule { state: n.clone(), symbol: t.symbol.clone(), children: t.children.clone(), rhs });
        }
    }
    out.validate()?;
    Ok(Removal { source: src, top, transducer: out, states, bound })
}

fn ahead(s: &Term) -> Term {
    match split_axiom(s) {
        None => s.clone(),
        Some((p, _)) => p,
    }
}

fn state_output(src: &Transducer, entry: &Term, t: &Term) -> Result<Term> {
    match split_axiom(entry) {
        None => Ok(entry.clone()),
        Some((u, q)) => Ok(compose(&u, &src.eval_state(&q, t)?)),
    }
}

/// Checks the two dynamic invariants of a successful removal on inputs up to `depth`.
///
/// Ground: on `t` with advice state `h`, state `<rho>` outputs `rho(h)` with its call evaluated in the source.
/// Context: on a context from the root, the output is the join of the source context outputs
/// followed by the reached state, and that state holds the residuals.
pub fn check_invariants(r: &Removal, mode: Mode, depth: u32, max_trees: usize) -> std::result::Result<(), String> {
    let src = &r.source;
    let out = &r.transducer;
    let err = |e: Error| e.to_string();
    for (n, rho) in &r.states {
        for (h, entry) in &rho.entries {
            for t in enumerate_domain(&src.advice, depth, Some(h)).map_err(err)?.iter().take(max_trees) {
                let want = state_output(src, entry, t).map_err(err)?;
                let got = out.eval_state(n, t).map_err(err)?;
                if got != want {
                    return Err(format!("state {} on {} in {}: {} but expected {}", n, t, h, got, want));
                }
            }
        }
    }
    let trees = enumerate_domain(&src.advice, depth, None).map_err(err)?;
    for t in trees.iter().take(max_trees) {
        for pos in t.positions() {
            let c = t.replace_at(&pos, &Term::x1());
            let Some(set) = path_set(&r.top, &c, &pos) else {
                return Err(format!("no top-down run on {}", c));
            };
            let pairs = src.advice.run_context(&c).map_err(err)?;
            let valid: Vec<Name> = src
                .advice
                .accepting
                .iter()
                .flat_map(|h0| pairs.iter().filter(move |(a, _)| a == h0).map(|(_, b)| b.clone()))
                .collect();
            let mut shs = BTreeMap::new();
            for h in &valid {
                shs.insert(h.clone(), src.eval_context_axiom(&c, h).map_err(err)?);
            }
            let got = out.eval_context_axiom(&c, &set).map_err(err)?;
            let ps: Vec<Term> = shs.values().map(ahead).collect();
            let joined = match mode {
                Mode::Uc => lub_terms(&ps),
                Mode::Linear => lub1_terms(&ps).map_err(err)?,
            };
            match split_axiom(&got) {
                None => {
                    if shs.values().any(|s| s != &got) {
                        return Err(format!("context {}: ground output {} but sources differ", c, got));
                    }
                }
                Some((p, m)) => {
                    if p != joined {
                        return Err(format!("context {}: prefix {} but the join is {}", c, p, joined));
                    }
                    let rho = &r.states[&m];
                    for (h, sh) in &shs {
                        let res = residual(&p, sh).flatten().map(|u| {
                            u.map_leaves(&mut |l| match l.node() {
                                Node::Call(q, _) => Some(Term::call(q.clone(), 1)),
                                _ => None,
                            })
                        });
                        if res.as_ref() != rho.entries.get(h) {
                            return Err(format!("context {}: residual for {} is {:?} but state {} holds {}", c, h, res, m, rho));
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

fn path_set(top: &SubsetAutomaton, c: &Term, pos: &[usize]) -> Option<Name> {
    let mut set = top.automaton.accepting.iter().next()?.clone();
    let mut t = c.clone();
    for &i in pos {
        let kids = top.automaton.td_children(&set, t.symbol()?)?;
        set = kids[i].clone();
        t = t.children()[i].clone();
    }
    Some(set)
}

fn check_variation(rho: &RhoState, bound: u32) -> Result<()> {
    let es: Vec<(&Name, &Term)> = rho.entries.iter().collect();
    for (i, (h1, s1)) in es.iter().enumerate() {
        for (h2, s2) in &es[i + 1..] {
            if s1.is_ground() && s2.is_ground() {
                continue;
            }
            let v = variation(s1, s2);
            if v > bound {
                return Err(Failure::new(
                    Reason::VariationBound,
                    "construction",
                    format!("variation {} of {} and {} (advice states {}, {}) exceeds {}", v, s1, s2, h1, h2, bound),
                )
                .into());
            }
        }
    }
    Ok(())
}
