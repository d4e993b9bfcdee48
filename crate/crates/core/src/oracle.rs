//! Brute-force ground truth: enumeration, pointwise comparison, random instances.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::automata::{subset_name, Runner, TreeAutomaton};
use crate::error::{Error, Result};
use crate::terms::{Name, RankedAlphabet, Term};
use crate::transducer::{Evaluator, Mode, Rule, Transducer};

/// Hard cap on enumerated trees; exceeding it is an error rather than a silent truncation.
pub const MAX_TREES: usize = 400_000;

/// All trees of depth at most `depth`, ordered by depth, symbol order, then child indices.
pub fn enumerate_trees(alphabet: &RankedAlphabet, depth: u32) -> Vec<Term> {
    try_enumerate(alphabet, depth, &mut |_| true).expect("enumeration exceeds the tree cap")
}

/// Enumeration keeping only trees accepted by `keep`; `keep` must be closed under subtrees.
pub fn try_enumerate(
    alphabet: &RankedAlphabet,
    depth: u32,
    keep: &mut dyn FnMut(&Term) -> bool,
) -> Result<Vec<Term>> {
    if !alphabet.has_constant() {
        return Err(Error::invalid(format!("alphabet {} has no constant", alphabet.name)));
    }
    let mut all: Vec<Term> = Vec::new();
    let mut level_start = 0;
    for d in 1..=depth {
        let prev_len = all.len();
        let mut fresh = Vec::new();
        for s in &alphabet.symbols {
            if d == 1 {
                if s.rank == 0 {
                    let t = Term::leaf(s.name.clone());
                    if keep(&t) {
                        fresh.push(t);
                    }
                }
                continue;
            }
            if s.rank == 0 || prev_len == 0 {
                continue;
            }
            let mut idx = vec![0usize; s.rank];
            loop {
                if idx.iter().any(|&i| i >= level_start) {
                    let t = Term::sym(s.name.clone(), idx.iter().map(|&i| all[i].clone()).collect());
                    if keep(&t) {
                        fresh.push(t);
                        if prev_len + fresh.len() > MAX_TREES {
                            return Err(Error::Limit(format!("more than {} trees up to depth {}", MAX_TREES, depth)));
                        }
                    }
                }
                let mut k = s.rank;
                let mut done = true;
                while k > 0 {
                    k -= 1;
                    idx[k] += 1;
                    if idx[k] < prev_len {
                        done = false;
                        break;
                    }
                    idx[k] = 0;
                }
                if done {
                    break;
                }
            }
        }
        level_start = prev_len;
        all.extend(fresh);
    }
    Ok(all)
}

/// Calls `f` on every tree of depth at most `depth` without storing the deepest level.
pub fn for_each_tree(alphabet: &RankedAlphabet, depth: u32, f: &mut dyn FnMut(&Term)) -> Result<u64> {
    if depth <= 1 {
        let ts = try_enumerate(alphabet, depth, &mut |_| true)?;
        ts.iter().for_each(&mut *f);
        return Ok(ts.len() as u64);
    }
    let base = try_enumerate(alphabet, depth - 1, &mut |_| true)?;
    base.iter().for_each(&mut *f);
    let mut n = base.len() as u64;
    let start = base.iter().position(|t| t.depth() == depth - 1).unwrap_or(base.len());
    for s in alphabet.symbols.iter().filter(|s| s.rank > 0) {
        let mut idx = vec![0usize; s.rank];
        loop {
            if idx.iter().any(|&i| i >= start) {
                f(&Term::sym(s.name.clone(), idx.iter().map(|&i| base[i].clone()).collect()));
                n += 1;
            }
            let mut k = s.rank;
            let mut done = true;
            while k > 0 {
                k -= 1;
                idx[k] += 1;
                if idx[k] < base.len() {
                    done = false;
                    break;
                }
                idx[k] = 0;
            }
            if done {
                break;
            }
        }
    }
    Ok(n)
}

/// Trees of depth at most `depth` in the domain of state `h` (or of the automaton).
pub fn enumerate_domain(b: &TreeAutomaton, depth: u32, h: Option<&Name>) -> Result<Vec<Term>> {
    let mut r = Runner::new(b);
    let trees = try_enumerate(&b.alphabet, depth, &mut |t| !r.states(t).is_empty())?;
    Ok(trees
        .into_iter()
        .filter(|t| {
            let s = r.states(t);
            match h {
                Some(h) => s.contains(h),
                None => s.iter().any(|x| b.accepting.contains(x)),
            }
        })
        .collect())
}

/// All trees with at most `size` nodes.
pub fn enumerate_by_size(alphabet: &RankedAlphabet, size: usize) -> Vec<Term> {
    let mut by_size: Vec<Vec<Term>> = vec![Vec::new(); size + 1];
    for n in 1..=size {
        let mut out = Vec::new();
        for s in &alphabet.symbols {
            if s.rank == 0 {
                if n == 1 {
                    out.push(Term::leaf(s.name.clone()));
                }
                continue;
            }
            for split in compositions(n - 1, s.rank) {
                let lists: Vec<&Vec<Term>> = split.iter().map(|&k| &by_size[k]).collect();
                if lists.iter().any(|l| l.is_empty()) {
                    continue;
                }
                let mut idx = vec![0usize; s.rank];
                loop {
                    out.push(Term::sym(s.name.clone(), idx.iter().zip(&lists).map(|(&i, l)| l[i].clone()).collect()));
                    let mut k = s.rank;
                    let mut done = true;
                    while k > 0 {
                        k -= 1;
                        idx[k] += 1;
                        if idx[k] < lists[k].len() {
                            done = false;
                            break;
                        }
                        idx[k] = 0;
                    }
                    if done {
                        break;
                    }
                }
            }
        }
        by_size[n] = out;
    }
    by_size.into_iter().flatten().collect()
}

fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return if total >= 1 { vec![vec![total]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in 1..total {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// First tree (in enumeration order) on which the translations differ, including definedness.
pub fn oracle_equiv(a1: &Transducer, a2: &Transducer, depth: u32) -> Result<Option<Term>> {
    let mut r1 = Runner::new(&a1.advice);
    let mut r2 = Runner::new(&a2.advice);
    let trees = try_enumerate(&a1.advice.alphabet, depth, &mut |t| {
        !r1.states(t).is_empty() || !r2.states(t).is_empty()
    })?;
    let mut e1 = Evaluator::new(a1);
    let mut e2 = Evaluator::new(a2);
    for t in trees {
        if e1.eval(&t) != e2.eval(&t) {
            return Ok(Some(t));
        }
    }
    Ok(None)
}

/// Runs `oracle_equiv` at the deepest depth not above `max_depth` that stays under the tree cap.
pub fn oracle_equiv_deepest(a1: &Transducer, a2: &Transducer, max_depth: u32) -> Result<(u32, Option<Term>)> {
    let mut d = max_depth;
    loop {
        match oracle_equiv(a1, a2, d) {
            Err(Error::Limit(_)) if d > 1 => d -= 1,
            r => return r.map(|w| (d, w)),
        }
    }
}

/// A random tree of depth at most `depth` accepted in state `h`, or `None` if there is none.
pub fn random_tree_in(b: &TreeAutomaton, h: &Name, depth: u32, rng: &mut impl Rng) -> Option<Term> {
    // height[h] = least depth of a tree in state h
    let mut height: std::collections::BTreeMap<Name, u32> = std::collections::BTreeMap::new();
    loop {
        let mut changed = false;
        for t in &b.transitions {
            let Some(m) = t.children.iter().map(|c| height.get(c).copied()).collect::<Option<Vec<u32>>>() else {
                continue;
            };
            let d = m.into_iter().max().unwrap_or(0) + 1;
            if height.get(&t.target).is_none_or(|&o| d < o) {
                height.insert(t.target.clone(), d);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    fn go(b: &TreeAutomaton, height: &std::collections::BTreeMap<Name, u32>, h: &Name, depth: u32, rng: &mut impl Rng) -> Option<Term> {
        let ok: Vec<&crate::automata::Transition> = b
            .transitions_from(h)
            .filter(|t| t.children.iter().all(|c| height.get(c).is_some_and(|&x| x < depth)))
            .collect();
        let t = ok.choose(rng)?;
        let kids = t.children.iter().map(|c| go(b, height, c, depth - 1, rng)).collect::<Option<Vec<Term>>>()?;
        Some(Term::sym(t.symbol.clone(), kids))
    }
    if height.get(h).is_none_or(|&x| x > depth) {
        return None;
    }
    go(b, &height, h, depth, rng)
}

/// Compares the translations on `samples` random trees of depth at most `depth` drawn from both domains.
pub fn sample_equiv(a1: &Transducer, a2: &Transducer, depth: u32, samples: usize, seed: u64) -> Option<Term> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let starts: Vec<(&TreeAutomaton, Name)> = [a1, a2]
        .iter()
        .flat_map(|a| a.advice.accepting.iter().map(move |h| (&a.advice, h.clone())))
        .collect();
    if starts.is_empty() {
        return None;
    }
    let mut e1 = Evaluator::new(a1);
    let mut e2 = Evaluator::new(a2);
    for _ in 0..samples {
        let (b, h) = starts.choose(&mut rng).unwrap();
        let d = rng.gen_range(1..=depth);
        if let Some(t) = random_tree_in(b, h, d, &mut rng) {
            if e1.eval(&t) != e2.eval(&t) {
                return Some(t);
            }
        }
    }
    None
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AdviceProfile {
    LookAhead,
    Inspection,
}

#[derive(Clone, Debug)]
pub struct Profile {
    pub mode: Mode,
    pub advice: AdviceProfile,
    pub input: Vec<(&'static str, usize)>,
    pub output: Vec<(&'static str, usize)>,
    pub advice_states: usize,
    pub max_states: usize,
    pub rhs_depth: u32,
}

impl Profile {
    pub fn named(name: &str) -> Option<Profile> {
        let (mode, advice) = match name {
            "uc" => (Mode::Uc, AdviceProfile::LookAhead),
            "lin" => (Mode::Linear, AdviceProfile::LookAhead),
            "uc-i" => (Mode::Uc, AdviceProfile::Inspection),
            "lin-i" => (Mode::Linear, AdviceProfile::Inspection),
            _ => return None,
        };
        Some(Profile {
            mode,
            advice,
            input: vec![("f", 2), ("a", 0), ("b", 0)],
            output: vec![("p", 2), ("s", 1), ("c", 0), ("d", 0)],
            advice_states: 3,
            max_states: 5,
            rhs_depth: 3,
        })
    }

    /// Alphabets whose depth-5 enumerations stay small.
    pub fn small(mode: Mode, advice: AdviceProfile, variant: u64) -> Profile {
        let input = match variant % 3 {
            0 => vec![("f", 2), ("a", 0)],
            1 => vec![("g", 1), ("h", 1), ("a", 0)],
            _ => vec![("g", 1), ("a", 0), ("b", 0)],
        };
        Profile {
            mode,
            advice,
            input,
            output: vec![("p", 2), ("s", 1), ("c", 0), ("d", 0)],
            advice_states: 3,
            max_states: 5,
            rhs_depth: 3,
        }
    }
}

pub fn random_instance(seed: u64, profile: &Profile) -> Transducer {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        if let Some(a) = try_instance(&mut rng, profile) {
            return a;
        }
    }
}

fn random_advice(rng: &mut ChaCha8Rng, p: &Profile) -> Option<TreeAutomaton> {
    let alpha = RankedAlphabet::new("in", &p.input).ok()?;
    let m = rng.gen_range(1..=p.advice_states);
    let hs: Vec<Name> = (0..m).map(|i| Name::from(format!("h{}", i))).collect();
    let mut b = TreeAutomaton::new("B", alpha.clone());
    for h in &hs {
        b.add_state(h);
    }
    match p.advice {
        AdviceProfile::LookAhead => {
            for s in &alpha.symbols {
                let tuples = tuples_of(&hs, s.rank);
                for tup in tuples {
                    if rng.gen_bool(0.8) {
                        let h = hs.choose(rng)?.clone();
                        b.add_transition(&h, &s.name, &tup).ok()?;
                    }
                }
            }
            for h in &hs {
                if rng.gen_bool(0.6) {
                    b.accept(h);
                }
            }
            if b.accepting.is_empty() {
                b.accept(&hs[0]);
            }
        }
        AdviceProfile::Inspection => {
            for h in &hs {
                for s in &alpha.symbols {
                    if rng.gen_bool(0.75) {
                        let tup: Vec<Name> = (0..s.rank).map(|_| hs.choose(rng).unwrap().clone()).collect();
                        b.add_transition(h, &s.name, &tup).ok()?;
                    }
                }
            }
            b.accept(&hs[0]);
        }
    }
    let t = b.trim().ok()?;
    Some(t)
}

fn tuples_of(hs: &[Name], k: usize) -> Vec<Vec<Name>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        let mut next = Vec::new();
        for t in &out {
            for h in hs {
                let mut u = t.clone();
                u.push(h.clone());
                next.push(u);
            }
        }
        out = next;
    }
    out
}

fn random_output(rng: &mut ChaCha8Rng, p: &Profile, depth: u32, leaves: &[Term]) -> Term {
    let consts: Vec<&(&str, usize)> = p.output.iter().filter(|s| s.1 == 0).collect();
    if depth <= 1 || rng.gen_bool(0.35) {
        if !leaves.is_empty() && rng.gen_bool(0.6) {
            return leaves.choose(rng).unwrap().clone();
        }
        return Term::leaf(consts.choose(rng).unwrap().0);
    }
    let s = p.output.choose(rng).unwrap();
    let kids = (0..s.1).map(|_| random_output(rng, p, depth - 1, leaves)).collect();
    Term::sym(s.0, kids)
}

/// A random tree over the output alphabet where each leaf of `must` occurs (exactly once when `linear`).
fn random_rhs(rng: &mut ChaCha8Rng, p: &Profile, must: &[Term], linear: bool) -> Term {
    if linear {
        // build a skeleton, then place each required leaf at a distinct fresh leaf position
        let mut t = random_output(rng, p, p.rhs_depth, &[]);
        for m in must {
            t = plug_once(rng, p, &t, m);
        }
        return t;
    }
    let mut t = random_output(rng, p, p.rhs_depth, must);
    for m in must {
        if !contains(&t, m) {
            t = plug_once(rng, p, &t, m);
        }
    }
    t
}

fn contains(t: &Term, m: &Term) -> bool {
    let mut found = false;
    t.visit_dag(&mut |s| found |= s == m);
    found
}

fn plug_once(rng: &mut ChaCha8Rng, p: &Profile, t: &Term, m: &Term) -> Term {
    // replace one ground leaf, or wrap with a binary symbol
    let mut ground_leaves = Vec::new();
    collect_ground_leaves(t, &mut Vec::new(), &mut ground_leaves);
    if !ground_leaves.is_empty() && rng.gen_bool(0.7) {
        let pos = ground_leaves.choose(rng).unwrap();
        return t.replace_at(pos, m);
    }
    let bin: Vec<&(&str, usize)> = p.output.iter().filter(|s| s.1 == 2).collect();
    match bin.choose(rng) {
        Some(b) if rng.gen_bool(0.5) => Term::sym(b.0, vec![t.clone(), m.clone()]),
        Some(b) => Term::sym(b.0, vec![m.clone(), t.clone()]),
        None => t.clone(),
    }
}

fn collect_ground_leaves(t: &Term, pos: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if t.children().is_empty() {
        if t.is_ground() {
            out.push(pos.clone());
        }
        return;
    }
    for (i, c) in t.children().iter().enumerate() {
        pos.push(i);
        collect_ground_leaves(c, pos, out);
        pos.pop();
    }
}

fn try_instance(rng: &mut ChaCha8Rng, p: &Profile) -> Option<Transducer> {
    let b = random_advice(rng, p)?;
    let linear = p.mode == Mode::Linear;
    let mut a = Transducer::new("R", b.clone());
    let mut by_h: Vec<(Name, Vec<Name>)> = Vec::new();
    let mut spare = p.max_states.saturating_sub(b.states.len());
    let mut n = 0;
    for h in &b.states {
        let count = if spare > 0 && rng.gen_bool(0.4) {
            spare -= 1;
            2
        } else {
            1
        };
        let qs: Vec<Name> = (0..count).map(|i| Name::from(format!("q{}", n + i))).collect();
        n += count;
        for q in &qs {
            a.add_state(q, h);
        }
        by_h.push((h.clone(), qs));
    }
    let states_of = |h: &Name| by_h.iter().find(|(x, _)| x == h).map(|(_, q)| q.clone()).unwrap();
    for tr in &b.transitions {
        for q in states_of(&tr.target) {
            let mut must = Vec::new();
            for (j, hj) in tr.children.iter().enumerate() {
                if rng.gen_bool(0.7) {
                    let qj = states_of(hj).choose(rng)?.clone();
                    must.push(Term::call(qj, j as u32 + 1));
                }
            }
            let rhs = random_rhs(rng, p, &must, linear);
            a.add_rule(Rule { state: q.clone(), symbol: tr.symbol.clone(), children: tr.children.clone(), rhs });
        }
    }
    for h in &b.accepting {
        let ax = if rng.gen_bool(0.15) {
            random_output(rng, p, 2, &[])
        } else {
            let q = states_of(h).choose(rng)?.clone();
            random_rhs(rng, &Profile { rhs_depth: 2, ..p.clone() }, &[Term::call(q, 1)], true)
        };
        a.axioms.insert(h.clone(), ax);
    }
    a.output = RankedAlphabet::new("out", &p.output).ok()?;
    a.validate().ok()?;
    Some(a)
}

/// Replaces one rule's right-hand side by a slightly different tree.
pub fn perturb(a: &Transducer, seed: u64, profile: &Profile) -> Transducer {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut out = a.clone();
    let rules: Vec<Rule> = a.rules().cloned().collect();
    if rules.is_empty() {
        return out;
    }
    let r = rules.choose(&mut rng).unwrap().clone();
    let consts: Vec<&(&str, usize)> = profile.output.iter().filter(|s| s.1 == 0).collect();
    let mut leaves = Vec::new();
    collect_ground_leaves(&r.rhs, &mut Vec::new(), &mut leaves);
    let rhs = if let Some(pos) = leaves.choose(&mut rng) {
        let old = r.rhs.at(pos).unwrap();
        let alt: Vec<&&(&str, usize)> = consts.iter().filter(|c| c.0 != old.symbol().unwrap().as_str()).collect();
        match alt.choose(&mut rng) {
            Some(c) => r.rhs.replace_at(pos, &Term::leaf(c.0)),
            None => Term::sym("s", vec![r.rhs.clone()]),
        }
    } else {
        Term::sym("s", vec![r.rhs.clone()])
    };
    out.add_rule(Rule { rhs, ..r });
    out
}

/// Re-expresses a transducer with top-down deterministic advice over the
/// bottom-up determinization of that advice.
pub fn lookahead_version(a: &Transducer) -> Result<Transducer> {
    let b0 = &a.advice;
    // bottom-up subset construction
    let mut sets: Vec<BTreeSet<Name>> = Vec::new();
    let mut trans: Vec<(BTreeSet<Name>, Name, Vec<usize>)> = Vec::new();
    loop {
        let before = sets.len();
        for s in &b0.alphabet.symbols {
            let lists: Vec<Vec<usize>> = vec![(0..sets.len()).collect(); s.rank];
            if s.rank > 0 && sets.is_empty() {
                continue;
            }
            let mut idx = vec![0usize; s.rank];
            loop {
                let tgt: BTreeSet<Name> = b0
                    .transitions
                    .iter()
                    .filter(|t| t.symbol == s.name && t.children.iter().zip(&idx).all(|(h, &i)| sets[i].contains(h)))
                    .map(|t| t.target.clone())
                    .collect();
                if !tgt.is_empty() {
                    if !sets.contains(&tgt) {
                        sets.push(tgt.clone());
                    }
                    if !trans.iter().any(|(_, f, k)| f == &s.name && k == &idx) {
                        trans.push((tgt, s.name.clone(), idx.clone()));
                    }
                }
                if !crate::automata::advance(&mut idx, &lists) {
                    break;
                }
            }
        }
        if sets.len() == before {
            break;
        }
    }
    let mut b = TreeAutomaton::new(&format!("{}_la", b0.name), b0.alphabet.clone());
    for s in &sets {
        let n = subset_name(s);
        b.add_state(&n);
        if s.iter().any(|h| b0.accepting.contains(h)) {
            b.accept(&n);
        }
    }
    for (t, f, kids) in &trans {
        let kids: Vec<Name> = kids.iter().map(|&i| subset_name(&sets[i])).collect();
        b.add_transition(&subset_name(t), f, &kids)?;
    }
    let b = b.trim()?;
    let lift = |q: &Name, s: &Name| Name::from(format!("{}@{}", q, s));
    let mut out = Transducer::new(&format!("{}_la", a.name), b.clone());
    out.output = a.output.clone();
    let set_of = |n: &Name| sets.iter().find(|s| &subset_name(s) == n).unwrap().clone();
    for s in &b.states {
        let set = set_of(s);
        for q in &a.states {
            if set.contains(&a.iota[q]) {
                out.add_state(&lift(q, s), s);
            }
        }
    }
    for s in &b.accepting {
        let set = set_of(s);
        let h = set.iter().find(|h| b0.accepting.contains(*h)).unwrap();
        let ax = a.axioms[h].map_leaves(&mut |l| match l.node() {
            crate::terms::Node::Call(q, j) => Some(Term::call(lift(q, s), *j)),
            _ => None,
        });
        out.axioms.insert(s.clone(), ax);
    }
    for t in &b.transitions {
        let set = set_of(&t.target);
        for q in &a.states {
            let h = &a.iota[q];
            if !set.contains(h) {
                continue;
            }
            let kid_sets: Vec<BTreeSet<Name>> = t.children.iter().map(&set_of).collect();
            let Some(tr0) = b0
                .transitions_for(h, &t.symbol)
                .find(|tr| tr.children.iter().zip(&kid_sets).all(|(hj, s)| s.contains(hj)))
            else {
                continue;
            };
            let r = a.rule(q, &t.symbol, &tr0.children).ok_or_else(|| Error::invalid("missing rule"))?;
            let kids = t.children.clone();
            let rhs = r.rhs.map_leaves(&mut |l| match l.node() {
                crate::terms::Node::Call(qj, j) => Some(Term::call(lift(qj, &kids[*j as usize - 1]), *j)),
                _ => None,
            });
            out.add_rule(Rule { state: lift(q, &t.target), symbol: t.symbol.clone(), children: t.children.clone(), rhs });
        }
    }
    // states never reached from an axiom keep their rules; drop those without any
    out.validate()?;
    Ok(out)
}

/// Random transducer with top-down deterministic advice, then lifted to look-ahead.
pub fn random_removable(seed: u64, mode: Mode) -> (Transducer, Transducer) {
    let mut k = 0;
    loop {
        let p = Profile::small(mode, AdviceProfile::Inspection, seed.wrapping_add(k));
        let a = random_instance(seed.wrapping_mul(31).wrapping_add(k), &p);
        if let Ok(la) = lookahead_version(&a) {
            return (a, la);
        }
        k += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_domain_trees_are_accepted() {
        let doc = crate::syntax::parse_document(
            "alphabet s { f/2 a/0 b/0 } automaton B over s { states h ha; accept h; h <- f(ha, h); h <- b; ha <- a; }",
        )
        .unwrap();
        let b = doc.automaton("B").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in 1..6 {
            let t = random_tree_in(b, &Name::new("h"), d, &mut rng).unwrap();
            assert!(t.depth() <= d && b.accepts(&t), "{}", t);
        }
        assert!(random_tree_in(b, &Name::new("ha"), 0, &mut rng).is_none());
    }

    #[test]
    fn streaming_matches_enumeration() {
        let a = RankedAlphabet::new("s", &[("f", 2), ("g", 1), ("a", 0)]).unwrap();
        for d in 1..5 {
            let mut seen = Vec::new();
            let n = for_each_tree(&a, d, &mut |t| seen.push(t.clone())).unwrap();
            assert_eq!(seen, enumerate_trees(&a, d));
            assert_eq!(n as usize, seen.len());
        }
    }

    #[test]
    fn small_enumerations() {
        let a = RankedAlphabet::new("s", &[("a", 0)]).unwrap();
        assert_eq!(enumerate_trees(&a, 2), vec![Term::leaf("a")]);
        let fa = RankedAlphabet::new("s", &[("f", 2), ("a", 0)]).unwrap();
        let shown: Vec<String> = enumerate_trees(&fa, 2).iter().map(|t| t.to_string()).collect();
        assert_eq!(shown, ["a", "f(a,a)"]);
        let g = RankedAlphabet::new("s", &[("f", 1)]).unwrap();
        assert!(try_enumerate(&g, 2, &mut |_| true).is_err());
    }

    #[test]
    fn counts_follow_the_recurrence() {
        let a = RankedAlphabet::new("s", &[("f", 2), ("a", 0), ("b", 0)]).unwrap();
        let mut c = 2u64;
        for d in 1..=3 {
            if d > 1 {
                c = 2 + c * c;
            }
            assert_eq!(enumerate_trees(&a, d).len() as u64, c);
        }
    }

    #[test]
    fn enumeration_is_duplicate_free_and_depth_sorted() {
        let a = RankedAlphabet::new("s", &[("f", 2), ("g", 1), ("a", 0)]).unwrap();
        let ts = enumerate_trees(&a, 4);
        let set: std::collections::HashSet<&Term> = ts.iter().collect();
        assert_eq!(set.len(), ts.len());
        assert!(ts.windows(2).all(|w| w[0].depth() <= w[1].depth()));
    }

    #[test]
    fn size_enumeration() {
        let a = RankedAlphabet::new("s", &[("f", 2), ("g", 1), ("a", 0), ("b", 0), ("c", 0)]).unwrap();
        let ts = enumerate_by_size(&a, 4);
        assert_eq!(ts.len(), 3 + 3 + 12 + 30);
    }

    #[test]
    fn random_instances_are_deterministic_and_valid() {
        for profile in ["uc", "lin", "uc-i", "lin-i"] {
            let p = Profile::named(profile).unwrap();
            for seed in 0..20 {
                let a = random_instance(seed, &p);
                let b = random_instance(seed, &p);
                assert_eq!(crate::syntax::print_transducer(&a), crate::syntax::print_transducer(&b));
                let d = a.validate().unwrap();
                if p.mode == Mode::Linear {
                    assert!(d.linear);
                }
            }
        }
    }

    #[test]
    fn lookahead_version_is_equivalent() {
        for seed in 0..10 {
            let (a, la) = random_removable(seed, Mode::Uc);
            assert!(la.advice.is_bottom_up_deterministic());
            assert_eq!(oracle_equiv(&a, &la, 4).unwrap(), None, "seed {}", seed);
        }
    }
}
