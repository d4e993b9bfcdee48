//! Finite tree automata over ranked alphabets.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::terms::{Name, Node, RankedAlphabet, Term};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transition {
    pub target: Name,
    pub symbol: Name,
    pub children: Vec<Name>,
}

impl fmt::Display for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} <- {}", self.target, self.symbol)?;
        if !self.children.is_empty() {
            let ch: Vec<&str> = self.children.iter().map(Name::as_str).collect();
            write!(f, "({})", ch.join(","))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct TreeAutomaton {
    pub name: Name,
    pub alphabet: RankedAlphabet,
    pub states: Vec<Name>,
    pub accepting: BTreeSet<Name>,
    pub transitions: Vec<Transition>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Classification {
    pub bottom_up_deterministic: bool,
    pub top_down_deterministic: bool,
    pub unambiguous: bool,
}

impl TreeAutomaton {
    pub fn new(name: &str, alphabet: RankedAlphabet) -> TreeAutomaton {
        TreeAutomaton {
            name: Name::new(name),
            alphabet,
            states: Vec::new(),
            accepting: BTreeSet::new(),
            transitions: Vec::new(),
        }
    }

    pub fn add_state(&mut self, h: &Name) {
        if !self.states.contains(h) {
            self.states.push(h.clone());
        }
    }

    pub fn accept(&mut self, h: &Name) {
        self.add_state(h);
        self.accepting.insert(h.clone());
    }

    pub fn add_transition(&mut self, target: &Name, symbol: &Name, children: &[Name]) -> Result<()> {
        match self.alphabet.rank(symbol) {
            None => return Err(Error::invalid(format!("unknown symbol {}", symbol))),
            Some(r) if r != children.len() => {
                return Err(Error::invalid(format!(
                    "symbol {} has rank {} but {} children given",
                    symbol,
                    r,
                    children.len()
                )))
            }
            _ => {}
        }
        self.add_state(target);
        for c in children {
            self.add_state(c);
        }
        let t = Transition { target: target.clone(), symbol: symbol.clone(), children: children.to_vec() };
        if !self.transitions.contains(&t) {
            self.transitions.push(t);
        }
        Ok(())
    }

    pub fn has_state(&self, h: &Name) -> bool {
        self.states.contains(h)
    }

    pub fn validate(&self) -> Result<()> {
        for t in &self.transitions {
            if self.alphabet.rank(&t.symbol) != Some(t.children.len()) {
                return Err(Error::invalid(format!("transition {} violates the symbol rank", t)));
            }
            for h in std::iter::once(&t.target).chain(&t.children) {
                if !self.has_state(h) {
                    return Err(Error::invalid(format!("undeclared state {} in {}", h, t)));
                }
            }
        }
        for h in &self.accepting {
            if !self.has_state(h) {
                return Err(Error::invalid(format!("undeclared accepting state {}", h)));
            }
        }
        Ok(())
    }

    pub fn transitions_from<'a>(&'a self, h: &'a Name) -> impl Iterator<Item = &'a Transition> + 'a {
        self.transitions.iter().filter(move |t| &t.target == h)
    }

    pub fn transitions_for<'a>(
        &'a self,
        h: &'a Name,
        f: &'a Name,
    ) -> impl Iterator<Item = &'a Transition> + 'a {
        self.transitions.iter().filter(move |t| &t.target == h && &t.symbol == f)
    }

    /// The unique child tuple of a top-down deterministic automaton.
    pub fn td_children(&self, h: &Name, f: &Name) -> Option<&[Name]> {
        self.transitions.iter().find(|t| &t.target == h && &t.symbol == f).map(|t| t.children.as_slice())
    }

    /// States with a nonempty domain.
    pub fn inhabited(&self) -> BTreeSet<Name> {
        let mut inh = BTreeSet::new();
        loop {
            let mut changed = false;
            for t in &self.transitions {
                if !inh.contains(&t.target) && t.children.iter().all(|c| inh.contains(c)) {
                    inh.insert(t.target.clone());
                    changed = true;
                }
            }
            if !changed {
                return inh;
            }
        }
    }

    /// Removes states and transitions not used by any accepting computation.
    pub fn trim(&self) -> Result<TreeAutomaton> {
        let inh = self.inhabited();
        let live: Vec<&Transition> = self
            .transitions
            .iter()
            .filter(|t| inh.contains(&t.target) && t.children.iter().all(|c| inh.contains(c)))
            .collect();
        let mut reach: BTreeSet<Name> = self.accepting.iter().filter(|h| inh.contains(*h)).cloned().collect();
        if reach.is_empty() {
            return Err(Error::EmptyLanguage);
        }
        loop {
            let mut changed = false;
            for t in &live {
                if reach.contains(&t.target) {
                    for c in &t.children {
                        changed |= reach.insert(c.clone());
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let mut out = TreeAutomaton::new(self.name.as_str(), self.alphabet.clone());
        out.states = self.states.iter().filter(|h| reach.contains(*h)).cloned().collect();
        out.accepting = self.accepting.iter().filter(|h| reach.contains(*h)).cloned().collect();
        out.transitions = live.into_iter().filter(|t| reach.contains(&t.target)).cloned().collect();
        Ok(out)
    }

    pub fn is_trim(&self) -> bool {
        match self.trim() {
            Ok(t) => t.states.len() == self.states.len() && t.transitions.len() == self.transitions.len(),
            Err(_) => false,
        }
    }

    pub fn is_bottom_up_deterministic(&self) -> bool {
        let mut seen = HashMap::new();
        for t in &self.transitions {
            if let Some(prev) = seen.insert((&t.symbol, &t.children), &t.target) {
                if prev != &t.target {
                    return false;
                }
            }
        }
        true
    }

    pub fn is_top_down_deterministic(&self) -> bool {
        if self.accepting.len() > 1 {
            return false;
        }
        let mut seen = HashSet::new();
        self.transitions.iter().all(|t| seen.insert((&t.target, &t.symbol)))
    }

    pub fn is_unambiguous(&self) -> bool {
        if self.is_bottom_up_deterministic() || self.is_top_down_deterministic() {
            return true;
        }
        let joint = joint_inhabited(self, self);
        let mut amb: HashSet<(Name, Name)> = HashSet::new();
        loop {
            let mut changed = false;
            for t in &self.transitions {
                for u in self.transitions.iter().filter(|u| u.symbol == t.symbol) {
                    let key = (t.target.clone(), u.target.clone());
                    if amb.contains(&key) {
                        continue;
                    }
                    let pairs: Vec<(Name, Name)> =
                        t.children.iter().cloned().zip(u.children.iter().cloned()).collect();
                    if !pairs.iter().all(|p| joint.contains(p)) {
                        continue;
                    }
                    if t != u || pairs.iter().any(|p| amb.contains(p)) {
                        amb.insert(key);
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        !self
            .accepting
            .iter()
            .any(|a| self.accepting.iter().any(|b| amb.contains(&(a.clone(), b.clone()))))
    }

    pub fn classify(&self) -> Classification {
        Classification {
            bottom_up_deterministic: self.is_bottom_up_deterministic(),
            top_down_deterministic: self.is_top_down_deterministic(),
            unambiguous: self.is_unambiguous(),
        }
    }

    /// States whose domain is every tree over the alphabet.
    pub fn universal_states(&self) -> BTreeSet<Name> {
        let mut u: BTreeSet<Name> = self.states.iter().cloned().collect();
        loop {
            let keep: BTreeSet<Name> = u
                .iter()
                .filter(|h| {
                    self.alphabet.symbols.iter().all(|s| {
                        self.transitions_for(h, &s.name).any(|t| t.children.iter().all(|c| u.contains(c)))
                    })
                })
                .cloned()
                .collect();
            if keep.len() == u.len() {
                return u;
            }
            u = keep;
        }
    }

    pub fn run(&self, t: &Term) -> BTreeSet<Name> {
        Runner::new(self).states(t)
    }

    pub fn accepts(&self, t: &Term) -> bool {
        self.run(t).iter().any(|h| self.accepting.contains(h))
    }

    /// Pairs `(h, h2)` with a computation on `c` that has `h` at the root and `h2` at the hole.
    pub fn run_context(&self, c: &Term) -> Result<BTreeSet<(Name, Name)>> {
        if c.x1_count() != 1 || c.var_indices().len() != 1 || c.has_call() {
            return Err(Error::Pattern(format!("{} is not a context", c)));
        }
        let mut runner = Runner::new(self);
        Ok(self.context_pairs(c, &mut runner))
    }

    fn context_pairs(&self, c: &Term, runner: &mut Runner<'_>) -> BTreeSet<(Name, Name)> {
        if c.is_x1() {
            return self.states.iter().map(|h| (h.clone(), h.clone())).collect();
        }
        let f = c.symbol().unwrap();
        let j = c.children().iter().position(|x| x.x1_count() > 0).unwrap();
        let inner = self.context_pairs(&c.children()[j], runner);
        let sets: Vec<BTreeSet<Name>> = c
            .children()
            .iter()
            .enumerate()
            .map(|(i, x)| if i == j { BTreeSet::new() } else { runner.states(x) })
            .collect();
        let mut out = BTreeSet::new();
        for t in self.transitions.iter().filter(|t| &t.symbol == f) {
            let ok = t.children.iter().enumerate().all(|(i, h)| i == j || sets[i].contains(h));
            if !ok {
                continue;
            }
            for (a, b) in &inner {
                if a == &t.children[j] {
                    out.insert((t.target.clone(), b.clone()));
                }
            }
        }
        out
    }
}

/// Bottom-up evaluation with a memo shared across calls.
pub struct Runner<'a> {
    aut: &'a TreeAutomaton,
    by_symbol: HashMap<Name, Vec<&'a Transition>>,
    memo: HashMap<u64, (Term, BTreeSet<Name>)>,
}

impl<'a> Runner<'a> {
    pub fn new(aut: &'a TreeAutomaton) -> Runner<'a> {
        let mut by_symbol: HashMap<Name, Vec<&Transition>> = HashMap::new();
        for t in &aut.transitions {
            by_symbol.entry(t.symbol.clone()).or_default().push(t);
        }
        Runner { aut, by_symbol, memo: HashMap::new() }
    }

    pub fn states(&mut self, t: &Term) -> BTreeSet<Name> {
        if let Some((_, s)) = self.memo.get(&t.id()) {
            return s.clone();
        }
        let out = match t.node() {
            Node::Sym(f, ch) => {
                let sets: Vec<BTreeSet<Name>> = ch.iter().map(|c| self.states(c)).collect();
                let mut out = BTreeSet::new();
                if let Some(ts) = self.by_symbol.get(f) {
                    for tr in ts {
                        if tr.children.len() == sets.len() && tr.children.iter().zip(&sets).all(|(h, s)| s.contains(h)) {
                            out.insert(tr.target.clone());
                        }
                    }
                }
                out
            }
            _ => BTreeSet::new(),
        };
        // keep the key alive so its id is not reused
        self.memo.insert(t.id(), (t.clone(), out.clone()));
        out
    }

    pub fn accepts(&mut self, t: &Term) -> bool {
        let s = self.states(t);
        s.iter().any(|h| self.aut.accepting.contains(h))
    }

    pub fn automaton(&self) -> &'a TreeAutomaton {
        self.aut
    }
}

/// Least fixpoint of pairs `(h1, h2)` with a common tree in both domains.
pub fn joint_inhabited(a: &TreeAutomaton, b: &TreeAutomaton) -> HashSet<(Name, Name)> {
    let mut joint = HashSet::new();
    loop {
        let mut changed = false;
        for t in &a.transitions {
            for u in b.transitions.iter().filter(|u| u.symbol == t.symbol) {
                let key = (t.target.clone(), u.target.clone());
                if joint.contains(&key) {
                    continue;
                }
                if t.children.iter().zip(&u.children).all(|(x, y)| joint.contains(&(x.clone(), y.clone()))) {
                    joint.insert(key);
                    changed = true;
                }
            }
        }
        if !changed {
            return joint;
        }
    }
}

#[derive(Clone, Debug)]
pub struct SubsetAutomaton {
    pub automaton: TreeAutomaton,
    pub sets: BTreeMap<Name, BTreeSet<Name>>,
}

impl SubsetAutomaton {
    pub fn set(&self, s: &Name) -> &BTreeSet<Name> {
        &self.sets[s]
    }

    pub fn name_of(&self, set: &BTreeSet<Name>) -> Option<&Name> {
        self.sets.iter().find(|(_, v)| *v == set).map(|(k, _)| k)
    }
}

pub fn subset_name(set: &BTreeSet<Name>) -> Name {
    let parts: Vec<&str> = set.iter().map(Name::as_str).collect();
    Name::from(format!("[{}]", parts.join("+")))
}

/// The top-down deterministic automaton on nonempty state sets.
pub fn powerset_topdown(b: &TreeAutomaton) -> SubsetAutomaton {
    let mut out = TreeAutomaton::new(&format!("{}_top", b.name), b.alphabet.clone());
    let mut sets = BTreeMap::new();
    let start: BTreeSet<Name> = b.accepting.clone();
    let start_name = subset_name(&start);
    out.accept(&start_name);
    sets.insert(start_name, start.clone());
    let mut queue = std::collections::VecDeque::from([start]);
    let mut seen: HashSet<BTreeSet<Name>> = HashSet::new();
    seen.insert(queue[0].clone());
    while let Some(s) = queue.pop_front() {
        let sname = subset_name(&s);
        for sym in &b.alphabet.symbols {
            let rel: Vec<&Transition> =
                b.transitions.iter().filter(|t| t.symbol == sym.name && s.contains(&t.target)).collect();
            if rel.is_empty() {
                continue;
            }
            let mut kids = Vec::new();
            for j in 0..sym.rank {
                let sj: BTreeSet<Name> = rel.iter().map(|t| t.children[j].clone()).collect();
                let n = subset_name(&sj);
                if seen.insert(sj.clone()) {
                    sets.insert(n.clone(), sj.clone());
                    queue.push_back(sj);
                }
                kids.push(n);
            }
            out.add_transition(&sname, &sym.name, &kids).expect("ranks come from the alphabet");
        }
    }
    SubsetAutomaton { automaton: out, sets }
}

/// Whether the powerset automaton accepts exactly the language of `b`.
pub fn gate_equivalent(b: &TreeAutomaton, top: &SubsetAutomaton) -> bool {
    let have: HashSet<&Transition> = b.transitions.iter().collect();
    for t in &top.automaton.transitions {
        let s = top.set(&t.target);
        let child_sets: Vec<Vec<Name>> =
            t.children.iter().map(|c| top.set(c).iter().cloned().collect()).collect();
        let mut idx = vec![0usize; child_sets.len()];
        loop {
            let tuple: Vec<Name> = idx.iter().zip(&child_sets).map(|(&i, v)| v[i].clone()).collect();
            let covered = s.iter().any(|h| {
                have.contains(&Transition { target: h.clone(), symbol: t.symbol.clone(), children: tuple.clone() })
            });
            if !covered {
                return false;
            }
            if !advance(&mut idx, &child_sets) {
                break;
            }
        }
    }
    true
}

pub(crate) fn advance<T>(idx: &mut [usize], lists: &[Vec<T>]) -> bool {
    for k in (0..idx.len()).rev() {
        idx[k] += 1;
        if idx[k] < lists[k].len() {
            return true;
        }
        idx[k] = 0;
    }
    false
}

#[derive(Clone, Debug)]
pub struct Product {
    pub automaton: TreeAutomaton,
    pub pairs: BTreeMap<Name, (Name, Name)>,
}

pub fn pair_name(a: &Name, b: &Name) -> Name {
    Name::from(format!("{}*{}", a, b))
}

/// Product restricted to jointly inhabited and jointly co-reachable pairs.
pub fn product(b1: &TreeAutomaton, b2: &TreeAutomaton) -> Result<Product> {
    let joint = joint_inhabited(b1, b2);
    let mut out = TreeAutomaton::new(&format!("{}*{}", b1.name, b2.name), b1.alphabet.clone());
    let mut pairs = BTreeMap::new();
    let mut sorted: Vec<&(Name, Name)> = joint.iter().collect();
    sorted.sort();
    for (a, b) in sorted {
        let n = pair_name(a, b);
        out.add_state(&n);
        pairs.insert(n.clone(), (a.clone(), b.clone()));
        if b1.accepting.contains(a) && b2.accepting.contains(b) {
            out.accept(&n);
        }
    }
    for t in &b1.transitions {
        for u in b2.transitions.iter().filter(|u| u.symbol == t.symbol) {
            if !joint.contains(&(t.target.clone(), u.target.clone())) {
                continue;
            }
            let kids: Option<Vec<Name>> = t
                .children
                .iter()
                .zip(&u.children)
                .map(|(x, y)| {
                    if joint.contains(&(x.clone(), y.clone())) {
                        Some(pair_name(x, y))
                    } else {
                        None
                    }
                })
                .collect();
            if let Some(kids) = kids {
                out.add_transition(&pair_name(&t.target, &u.target), &t.symbol, &kids)?;
            }
        }
    }
    let out = out.trim()?;
    pairs.retain(|k, _| out.has_state(k));
    Ok(Product { automaton: out, pairs })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LanguageComparison {
    Equal,
    Differ(Term),
    /// Budget exhausted and no difference found up to the given depth.
    EqualUpToDepth(u32),
}

/// Decides `L(a) = L(b)` by a joint bottom-up subset construction.
pub fn compare_languages(a: &TreeAutomaton, b: &TreeAutomaton, budget: usize) -> LanguageComparison {
    type Conf = (BTreeSet<Name>, BTreeSet<Name>);
    let mut confs: Vec<(Conf, Term)> = Vec::new();
    let mut seen: HashSet<Conf> = HashSet::new();
    let mut work = 0usize;
    let mut frontier_start = 0usize;
    let step = |sym: &Name, kids: &[usize], confs: &[(Conf, Term)]| -> (Conf, Term) {
        let mut s1 = BTreeSet::new();
        let mut s2 = BTreeSet::new();
        for t in a.transitions.iter().filter(|t| &t.symbol == sym) {
            if t.children.iter().zip(kids).all(|(h, &k)| confs[k].0 .0.contains(h)) {
                s1.insert(t.target.clone());
            }
        }
        for t in b.transitions.iter().filter(|t| &t.symbol == sym) {
            if t.children.iter().zip(kids).all(|(h, &k)| confs[k].0 .1.contains(h)) {
                s2.insert(t.target.clone());
            }
        }
        let tree = Term::sym(sym.clone(), kids.iter().map(|&k| confs[k].1.clone()).collect());
        ((s1, s2), tree)
    };
    loop {
        let old_len = confs.len();
        let mut fresh = Vec::new();
        for sym in &a.alphabet.symbols {
            let k = sym.rank;
            if k == 0 {
                if old_len == 0 {
                    fresh.push(step(&sym.name, &[], &confs));
                }
                continue;
            }
            if old_len == 0 {
                continue;
            }
            // tuples over all configurations with at least one from the last round
            let lists: Vec<Vec<usize>> = vec![(0..old_len).collect(); k];
            let mut idx = vec![0usize; k];
            loop {
                if idx.iter().any(|&i| i >= frontier_start) {
                    work += 1;
                    if work > budget.saturating_mul(8) {
                        return fallback(a, b);
                    }
                    fresh.push(step(&sym.name, &idx, &confs));
                }
                if !advance(&mut idx, &lists) {
                    break;
                }
            }
        }
        frontier_start = old_len;
        for (conf, tree) in fresh {
            if conf.0.is_empty() && conf.1.is_empty() {
                continue;
            }
            let acc1 = conf.0.iter().any(|h| a.accepting.contains(h));
            let acc2 = conf.1.iter().any(|h| b.accepting.contains(h));
            if acc1 != acc2 {
                return LanguageComparison::Differ(tree);
            }
            if seen.insert(conf.clone()) {
                confs.push((conf, tree));
                if confs.len() > budget {
                    return fallback(a, b);
                }
            }
        }
        if confs.len() == old_len {
            return LanguageComparison::Equal;
        }
    }
}

const FALLBACK_DEPTH: u32 = 5;

fn fallback(a: &TreeAutomaton, b: &TreeAutomaton) -> LanguageComparison {
    let mut ra = Runner::new(a);
    let mut rb = Runner::new(b);
    for t in crate::oracle::enumerate_trees(&a.alphabet, FALLBACK_DEPTH) {
        if ra.accepts(&t) != rb.accepts(&t) {
            return LanguageComparison::Differ(t);
        }
    }
    LanguageComparison::EqualUpToDepth(FALLBACK_DEPTH)
}
