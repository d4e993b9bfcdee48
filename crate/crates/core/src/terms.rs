//! Ranked trees shared through a global interner, unary patterns and the
//! two prefix lattices.
//!
//! Structurally equal terms are the same allocation, so equality and hashing
//! are by identity. Ordering is structural and does not depend on allocation
//! order.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};
use std::sync::{Arc, Mutex, OnceLock, Weak};

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Name(Arc<str>);

impl Name {
    pub fn new(s: &str) -> Name {
        Name(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Name {
    fn from(s: &str) -> Name {
        Name::new(s)
    }
}

impl From<String> for Name {
    fn from(s: String) -> Name {
        Name(Arc::from(s))
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol {
    pub name: Name,
    pub rank: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankedAlphabet {
    pub name: Name,
    pub symbols: Vec<Symbol>,
}

impl RankedAlphabet {
    pub fn new(name: &str, symbols: &[(&str, usize)]) -> Result<RankedAlphabet> {
        let mut out = RankedAlphabet { name: Name::new(name), symbols: Vec::new() };
        for (s, r) in symbols {
            out.push(Name::new(s), *r)?;
        }
        if out.symbols.is_empty() {
            return Err(Error::invalid(format!("alphabet {} has no symbols", name)));
        }
        Ok(out)
    }

    pub fn push(&mut self, name: Name, rank: usize) -> Result<()> {
        if self.rank(&name).is_some() {
            return Err(Error::invalid(format!("duplicate symbol {}", name)));
        }
        self.symbols.push(Symbol { name, rank });
        Ok(())
    }

    pub fn rank(&self, name: &Name) -> Option<usize> {
        self.symbols.iter().find(|s| &s.name == name).map(|s| s.rank)
    }

    pub fn has_constant(&self) -> bool {
        self.symbols.iter().any(|s| s.rank == 0)
    }

    pub fn max_rank(&self) -> usize {
        self.symbols.iter().map(|s| s.rank).max().unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    Sym(Name, Vec<Term>),
    Var(u32),
    Call(Name, u32),
}

pub struct TermData {
    node: Node,
    id: u64,
    depth: u32,
    size: u64,
    x1: u64,
    vars: bool,
    calls: bool,
}

#[derive(Clone)]
pub struct Term(Arc<TermData>);

#[derive(PartialEq, Eq, Hash)]
enum Key {
    Sym(Name, Vec<u64>),
    Var(u32),
    Call(Name, u32),
}

struct Store {
    map: HashMap<Key, Weak<TermData>>,
    purge_at: usize,
}

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

fn store() -> &'static Mutex<Store> {
    static STORE: OnceLock<Mutex<Store>> = OnceLock::new();
    STORE.get_or_init(|| Mutex::new(Store { map: HashMap::new(), purge_at: 4096 }))
}

fn intern(node: Node) -> Term {
    let key = match &node {
        Node::Sym(f, ch) => Key::Sym(f.clone(), ch.iter().map(|c| c.id()).collect()),
        Node::Var(j) => Key::Var(*j),
        Node::Call(q, j) => Key::Call(q.clone(), *j),
    };
    let mut st = store().lock().unwrap_or_else(|e| e.into_inner());
    if let Some(t) = st.map.get(&key).and_then(Weak::upgrade) {
        return Term(t);
    }
    let (depth, size, x1, vars, calls) = match &node {
        Node::Sym(_, ch) => {
            let mut d = 0;
            let mut s: u64 = 1;
            let mut x: u64 = 0;
            let mut v = false;
            let mut c = false;
            for k in ch {
                d = d.max(k.0.depth);
                s = s.saturating_add(k.0.size);
                x = x.saturating_add(k.0.x1);
                v |= k.0.vars;
                c |= k.0.calls;
            }
            (d + 1, s, x, v, c)
        }
        Node::Var(j) => (1, 1, u64::from(*j == 1), true, false),
        Node::Call(..) => (1, 1, 0, false, true),
    };
    let data = Arc::new(TermData {
        node,
        id: NEXT_ID.fetch_add(1, AtomicOrdering::Relaxed),
        depth,
        size,
        x1,
        vars,
        calls,
    });
    st.map.insert(key, Arc::downgrade(&data));
    if st.map.len() >= st.purge_at {
        st.map.retain(|_, w| w.strong_count() > 0);
        st.purge_at = (st.map.len() * 2).max(4096);
    }
    Term(data)
}

impl Term {
    pub fn sym(f: impl Into<Name>, children: Vec<Term>) -> Term {
        intern(Node::Sym(f.into(), children))
    }

    pub fn leaf(f: impl Into<Name>) -> Term {
        intern(Node::Sym(f.into(), Vec::new()))
    }

    pub fn var(j: u32) -> Term {
        intern(Node::Var(j))
    }

    pub fn x1() -> Term {
        Term::var(1)
    }

    pub fn call(q: impl Into<Name>, j: u32) -> Term {
        intern(Node::Call(q.into(), j))
    }

    pub fn node(&self) -> &Node {
        &self.0.node
    }

    pub fn id(&self) -> u64 {
        self.0.id
    }

    /// Height with leaves and calls counted as depth 1.
    pub fn depth(&self) -> u32 {
        self.0.depth
    }

    /// Number of nodes of the unfolded tree (saturating).
    pub fn size(&self) -> u64 {
        self.0.size
    }

    pub fn x1_count(&self) -> u64 {
        self.0.x1
    }

    pub fn has_var(&self) -> bool {
        self.0.vars
    }

    pub fn has_call(&self) -> bool {
        self.0.calls
    }

    /// No variables and no calls.
    pub fn is_ground(&self) -> bool {
        !self.0.vars && !self.0.calls
    }

    pub fn is_x1(&self) -> bool {
        matches!(self.0.node, Node::Var(1))
    }

    pub fn children(&self) -> &[Term] {
        match &self.0.node {
            Node::Sym(_, ch) => ch,
            _ => &[],
        }
    }

    pub fn symbol(&self) -> Option<&Name> {
        match &self.0.node {
            Node::Sym(f, _) => Some(f),
            _ => None,
        }
    }

    /// Same constructor: symbol and arity, variable index, or call.
    pub fn same_label(&self, other: &Term) -> bool {
        match (&self.0.node, &other.0.node) {
            (Node::Sym(f, a), Node::Sym(g, b)) => f == g && a.len() == b.len(),
            (Node::Var(i), Node::Var(j)) => i == j,
            (Node::Call(p, i), Node::Call(q, j)) => p == q && i == j,
            _ => false,
        }
    }

    pub fn with_children(&self, children: Vec<Term>) -> Term {
        match &self.0.node {
            Node::Sym(f, _) => Term::sym(f.clone(), children),
            _ => self.clone(),
        }
    }

    pub fn at(&self, pos: &[usize]) -> Option<Term> {
        let mut t = self.clone();
        for &i in pos {
            t = t.children().get(i)?.clone();
        }
        Some(t)
    }

    /// All positions in preorder, the root first.
    pub fn positions(&self) -> Vec<Vec<usize>> {
        let mut out = vec![vec![]];
        for (i, c) in self.children().iter().enumerate() {
            for mut p in c.positions() {
                p.insert(0, i);
                out.push(p);
            }
        }
        out
    }

    pub fn replace_at(&self, pos: &[usize], with: &Term) -> Term {
        match pos.split_first() {
            None => with.clone(),
            Some((&i, rest)) => {
                let mut ch = self.children().to_vec();
                ch[i] = ch[i].replace_at(rest, with);
                self.with_children(ch)
            }
        }
    }

    /// Rewrites every Var or Call leaf through `f`; `None` keeps the leaf.
    pub fn map_leaves(&self, f: &mut dyn FnMut(&Term) -> Option<Term>) -> Term {
        fn go(
            t: &Term,
            f: &mut dyn FnMut(&Term) -> Option<Term>,
            memo: &mut HashMap<u64, Term>,
        ) -> Term {
            if t.is_ground() {
                return t.clone();
            }
            if let Some(r) = memo.get(&t.id()) {
                return r.clone();
            }
            let r = match t.node() {
                Node::Sym(_, ch) => {
                    let ch: Vec<Term> = ch.iter().map(|c| go(c, f, memo)).collect();
                    t.with_children(ch)
                }
                _ => f(t).unwrap_or_else(|| t.clone()),
            };
            memo.insert(t.id(), r.clone());
            r
        }
        go(self, f, &mut HashMap::new())
    }

    pub fn subst_vars(&self, f: &dyn Fn(u32) -> Option<Term>) -> Term {
        if !self.has_var() {
            return self.clone();
        }
        self.map_leaves(&mut |t| match t.node() {
            Node::Var(j) => f(*j),
            _ => None,
        })
    }

    /// Replaces every maximal occurrence of `target` by `with`.
    pub fn replace_subterm(&self, target: &Term, with: &Term) -> Term {
        fn go(t: &Term, target: &Term, with: &Term, memo: &mut HashMap<u64, Term>) -> Term {
            if t == target {
                return with.clone();
            }
            if t.depth() <= target.depth() || t.children().is_empty() {
                return t.clone();
            }
            if let Some(r) = memo.get(&t.id()) {
                return r.clone();
            }
            let ch: Vec<Term> = t.children().iter().map(|c| go(c, target, with, memo)).collect();
            let r = t.with_children(ch);
            memo.insert(t.id(), r.clone());
            r
        }
        go(self, target, with, &mut HashMap::new())
    }

    pub fn var_indices(&self) -> BTreeSet<u32> {
        let mut out = BTreeSet::new();
        self.visit_dag(&mut |t| {
            if let Node::Var(j) = t.node() {
                out.insert(*j);
            }
        });
        out
    }

    pub fn calls(&self) -> BTreeSet<(Name, u32)> {
        let mut out = BTreeSet::new();
        self.visit_dag(&mut |t| {
            if let Node::Call(q, j) = t.node() {
                out.insert((q.clone(), *j));
            }
        });
        out
    }

    /// Visits each distinct node once.
    pub fn visit_dag(&self, f: &mut dyn FnMut(&Term)) {
        let mut seen = HashSet::new();
        let mut stack = vec![self.clone()];
        while let Some(t) = stack.pop() {
            if !seen.insert(t.id()) {
                continue;
            }
            f(&t);
            stack.extend(t.children().iter().cloned());
        }
    }

    /// Occurrences of `x_j`, counted in the unfolded tree.
    pub fn count_var(&self, j: u32) -> u64 {
        fn go(t: &Term, j: u32, memo: &mut HashMap<u64, u64>) -> u64 {
            if !t.has_var() {
                return 0;
            }
            match t.node() {
                Node::Var(i) => u64::from(*i == j),
                Node::Call(..) => 0,
                Node::Sym(_, ch) => {
                    if let Some(&n) = memo.get(&t.id()) {
                        return n;
                    }
                    let n = ch.iter().fold(0u64, |a, c| a.saturating_add(go(c, j, memo)));
                    memo.insert(t.id(), n);
                    n
                }
            }
        }
        go(self, j, &mut HashMap::new())
    }
}

impl PartialEq for Term {
    fn eq(&self, other: &Term) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

impl Eq for Term {}

impl Hash for Term {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.id.hash(state);
    }
}

impl Ord for Term {
    fn cmp(&self, other: &Term) -> Ordering {
        if self == other {
            return Ordering::Equal;
        }
        fn rank(n: &Node) -> u8 {
            match n {
                Node::Sym(..) => 0,
                Node::Var(_) => 1,
                Node::Call(..) => 2,
            }
        }
        match (self.node(), other.node()) {
            (Node::Sym(f, a), Node::Sym(g, b)) => f.cmp(g).then_with(|| a.cmp(b)),
            (Node::Var(i), Node::Var(j)) => i.cmp(j),
            (Node::Call(p, i), Node::Call(q, j)) => p.cmp(q).then(i.cmp(j)),
            (a, b) => rank(a).cmp(&rank(b)),
        }
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Term) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Var(j) => write!(f, "x{}", j),
            Node::Call(q, j) => write!(f, "{}(x{})", q, j),
            Node::Sym(s, ch) => {
                write!(f, "{}", s)?;
                if !ch.is_empty() {
                    f.write_str("(")?;
                    for (i, c) in ch.iter().enumerate() {
                        if i > 0 {
                            f.write_str(",")?;
                        }
                        write!(f, "{}", c)?;
                    }
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

/// An element of the prefix lattice: bottom, a ground tree, or a unary pattern.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum UPattern {
    Bottom,
    Tree(Term),
}

impl UPattern {
    pub fn tree(&self) -> Option<&Term> {
        match self {
            UPattern::Bottom => None,
            UPattern::Tree(t) => Some(t),
        }
    }

    pub fn is_bottom(&self) -> bool {
        matches!(self, UPattern::Bottom)
    }

    /// At most one occurrence of x1.
    pub fn is_one_pattern(&self) -> bool {
        self.tree().is_none_or(|t| t.x1_count() <= 1)
    }

    /// Only symbols and x1 leaves.
    pub fn is_well_formed(&self) -> bool {
        match self {
            UPattern::Bottom => true,
            UPattern::Tree(t) => !t.has_call() && t.var_indices().iter().all(|&j| j == 1),
        }
    }
}

impl fmt::Display for UPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UPattern::Bottom => f.write_str("_|_"),
            UPattern::Tree(t) => write!(f, "{}", t),
        }
    }
}

/// `u · v`: substitute `v` for every x1 of `u`.
pub fn compose(u: &Term, v: &Term) -> Term {
    if u.x1_count() == 0 {
        return u.clone();
    }
    u.subst_vars(&|j| if j == 1 { Some(v.clone()) } else { None })
}

pub fn compose_patterns(u: &UPattern, v: &UPattern) -> Result<UPattern> {
    match (u, v) {
        (UPattern::Tree(a), UPattern::Tree(b)) => Ok(UPattern::Tree(compose(a, b))),
        _ => Err(Error::Pattern("bottom operand".into())),
    }
}

/// Unique factorization into irreducible factors; x1 factors into the empty list.
pub fn factorize(u: &Term) -> Result<Vec<Term>> {
    if u.x1_count() == 0 {
        return Err(Error::Pattern(format!("{} is not a unary pattern", u)));
    }
    let marker = Term::var(0);
    let mut out = Vec::new();
    let mut cur = u.clone();
    while !cur.is_x1() {
        // subtrees on the path from the root to the leftmost x1, root excluded
        let mut path = Vec::new();
        let mut t = cur.clone();
        loop {
            let next = t.children().iter().find(|c| c.x1_count() > 0).cloned();
            match next {
                Some(c) if !c.is_x1() => {
                    path.push(c.clone());
                    t = c;
                }
                _ => break,
            }
        }
        let mut split = None;
        for v in &path {
            let w = cur.replace_subterm(v, &marker);
            if w.x1_count() == 0 {
                let w = w.subst_vars(&|j| if j == 0 { Some(Term::x1()) } else { None });
                split = Some((w, v.clone()));
                break;
            }
        }
        match split {
            Some((w, v)) => {
                out.push(w);
                cur = v;
            }
            None => {
                out.push(cur);
                break;
            }
        }
    }
    Ok(out)
}

/// All suffixes of `u`, shortest first, starting with x1.
pub fn suffixes(u: &Term) -> Result<Vec<Term>> {
    let factors = factorize(u)?;
    let mut out = vec![Term::x1()];
    let mut acc = Term::x1();
    for f in factors.iter().rev() {
        acc = compose(f, &acc);
        out.push(acc.clone());
    }
    Ok(out)
}

/// The residual `r` with `s{x1 -> r} = t`; `Some(None)` when `s` is ground and equal to `t`.
pub fn residual(s: &Term, t: &Term) -> Option<Option<Term>> {
    fn go(s: &Term, t: &Term, r: &mut Option<Term>) -> bool {
        if s.is_x1() {
            return match r {
                Some(prev) => prev == t,
                None => {
                    *r = Some(t.clone());
                    true
                }
            };
        }
        if s.x1_count() == 0 {
            return s == t;
        }
        s.same_label(t) && s.children().iter().zip(t.children()).all(|(a, b)| go(a, b, r))
    }
    let mut r = None;
    if go(s, t, &mut r) {
        Some(r)
    } else {
        None
    }
}

/// `a ⊑ b` in the prefix order: `a` is bottom or an instance of `b`.
pub fn below(a: &UPattern, b: &UPattern) -> bool {
    match (a, b) {
        (UPattern::Bottom, _) => true,
        (_, UPattern::Bottom) => false,
        (UPattern::Tree(a), UPattern::Tree(b)) => residual(b, a).is_some(),
    }
}

type Tuple = Vec<Term>;

fn tuple_key(t: &[Term]) -> Vec<u64> {
    t.iter().map(Term::id).collect()
}

// all components identical and free of variables: kept as is in any prefix
fn settled(t: &[Term]) -> bool {
    !t[0].has_var() && t.iter().all(|x| x == &t[0])
}

// a position that must be covered by a hole
fn divergent(t: &[Term]) -> bool {
    !settled(t)
        && (t.iter().any(|x| !x.same_label(&t[0])) || matches!(t[0].node(), Node::Var(_)))
}

fn child_tuple(t: &[Term], i: usize) -> Tuple {
    t.iter().map(|x| x.children()[i].clone()).collect()
}

fn first_divergence_path(t: Tuple) -> Vec<Tuple> {
    let mut path = vec![t];
    loop {
        let cur = path.last().unwrap();
        if divergent(cur) {
            return path;
        }
        let n = cur[0].children().len();
        let next = (0..n).map(|i| child_tuple(cur, i)).find(|c| !settled(c));
        match next {
            Some(c) => path.push(c),
            None => return path,
        }
    }
}

fn cut(t: &[Term], r: &[u64], memo: &mut HashMap<Vec<u64>, Option<Term>>) -> Option<Term> {
    let key = tuple_key(t);
    if key.as_slice() == r {
        return Some(Term::x1());
    }
    if settled(t) {
        return Some(t[0].clone());
    }
    if divergent(t) {
        return None;
    }
    if let Some(v) = memo.get(&key) {
        return v.clone();
    }
    let n = t[0].children().len();
    let mut ch = Vec::with_capacity(n);
    let mut ok = true;
    for i in 0..n {
        match cut(&child_tuple(t, i), r, memo) {
            Some(c) => ch.push(c),
            None => {
                ok = false;
                break;
            }
        }
    }
    let v = if ok { Some(t[0].with_children(ch)) } else { None };
    memo.insert(key, v.clone());
    v
}

/// Least upper bound of nonempty trees in the prefix lattice.
///
/// Inputs may contain x1; such leaves must end up inside a residual.
/// Call leaves are compared as ordinary constants.
pub fn lub_terms(ts: &[Term]) -> Term {
    let mut tuple: Tuple = Vec::new();
    for t in ts {
        if !tuple.contains(t) {
            tuple.push(t.clone());
        }
    }
    if tuple.len() == 1 {
        return tuple.pop().unwrap();
    }
    let path = first_divergence_path(tuple);
    for cand in path.iter().rev() {
        let r = tuple_key(cand);
        if let Some(s) = cut(&path[0], &r, &mut HashMap::new()) {
            return s;
        }
    }
    unreachable!("the root tuple is always a valid cut")
}

pub fn lub(elems: &[UPattern]) -> UPattern {
    let ts: Vec<Term> = elems.iter().filter_map(|e| e.tree().cloned()).collect();
    if ts.is_empty() {
        UPattern::Bottom
    } else {
        UPattern::Tree(lub_terms(&ts))
    }
}

/// Least upper bound among patterns with at most one x1.
pub fn lub1_terms(ts: &[Term]) -> Result<Term> {
    if let Some(t) = ts.iter().find(|t| t.x1_count() > 1) {
        return Err(Error::Pattern(format!("{} has more than one occurrence of x1", t)));
    }
    let mut tuple: Tuple = Vec::new();
    for t in ts {
        if !tuple.contains(t) {
            tuple.push(t.clone());
        }
    }
    if tuple.len() == 1 {
        return Ok(tuple.pop().unwrap());
    }
    let first = tuple[0].clone();
    let mut pos = Vec::new();
    let mut cur = tuple;
    while !divergent(&cur) {
        let n = cur[0].children().len();
        let open: Vec<usize> = (0..n).filter(|&i| !settled(&child_tuple(&cur, i))).collect();
        if open.len() != 1 {
            break;
        }
        pos.push(open[0]);
        cur = child_tuple(&cur, open[0]);
    }
    Ok(first.replace_at(&pos, &Term::x1()))
}

pub fn lub1(elems: &[UPattern]) -> Result<UPattern> {
    let ts: Vec<Term> = elems.iter().filter_map(|e| e.tree().cloned()).collect();
    if ts.is_empty() {
        Ok(UPattern::Bottom)
    } else {
        Ok(UPattern::Tree(lub1_terms(&ts)?))
    }
}

/// Maximal subtrees without variables and calls, in preorder, with multiplicity.
pub fn max_ground_subtrees(t: &Term) -> Vec<Term> {
    fn go(t: &Term, out: &mut Vec<Term>) {
        if t.is_ground() {
            out.push(t.clone());
        } else {
            for c in t.children() {
                go(c, out);
            }
        }
    }
    let mut out = Vec::new();
    go(t, &mut out);
    out
}

/// Nodes plus edges of the shared representation.
pub fn dag_size(t: &Term) -> usize {
    let mut n = 0;
    t.visit_dag(&mut |s| n += 1 + s.children().len());
    n
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f(a: Term, b: Term) -> Term {
        Term::sym("f", vec![a, b])
    }
    fn g(a: Term, b: Term) -> Term {
        Term::sym("g", vec![a, b])
    }
    fn h(a: Term) -> Term {
        Term::sym("h", vec![a])
    }
    fn l(s: &str) -> Term {
        Term::leaf(s)
    }
    fn x() -> Term {
        Term::x1()
    }

    #[test]
    fn interning_shares_nodes() {
        let a = f(l("a"), g(l("b"), x()));
        let b = f(l("a"), g(l("b"), x()));
        assert!(Arc::ptr_eq(&a.0, &b.0));
        assert_ne!(a, f(l("a"), g(l("b"), l("b"))));
    }

    #[test]
    fn compose_substitutes_every_hole() {
        let u = f(x(), g(l("a"), x()));
        let r = compose(&u, &h(x()));
        assert_eq!(r.to_string(), "f(h(x1),g(a,h(x1)))");
        assert_eq!(compose(&u, &x()), u);
        assert!(compose_patterns(&UPattern::Bottom, &UPattern::Tree(u)).is_err());
    }

    #[test]
    fn factorize_example() {
        let u = f(h(x()), g(l("a"), h(x())));
        let fs = factorize(&u).unwrap();
        assert_eq!(fs, vec![f(x(), g(l("a"), x())), h(x())]);
        assert_eq!(factorize(&h(x())).unwrap(), vec![h(x())]);
        assert!(factorize(&x()).unwrap().is_empty());
        assert!(factorize(&l("a")).is_err());
    }

    #[test]
    fn suffixes_shortest_first() {
        let u = Term::sym("f1", vec![l("a"), Term::sym("f2", vec![l("a"), x()])]);
        let s = suffixes(&u).unwrap();
        let shown: Vec<String> = s.iter().map(|t| t.to_string()).collect();
        assert_eq!(shown, ["x1", "f2(a,x1)", "f1(a,f2(a,x1))"]);
        assert_eq!(suffixes(&x()).unwrap(), vec![x()]);
        assert_eq!(suffixes(&h(x())).unwrap(), vec![x(), h(x())]);
    }

    #[test]
    fn lub_of_closure_example() {
        let t1 = Term::sym("f", vec![g(l("a"), l("a")), l("c")]);
        let t2 = Term::sym("f", vec![g(l("b"), l("b")), l("c")]);
        let t3 = Term::sym("f", vec![g(l("b"), l("b")), l("d")]);
        assert_eq!(lub_terms(&[t1.clone(), t2.clone()]).to_string(), "f(g(x1,x1),c)");
        assert_eq!(lub_terms(&[t1.clone(), t3.clone()]), x());
        assert_eq!(lub1_terms(&[t1.clone(), t2]).unwrap().to_string(), "f(x1,c)");
        assert_eq!(lub_terms(std::slice::from_ref(&t1)), t1);
        assert_eq!(lub1_terms(&[t1.clone(), t1.clone()]).unwrap(), t1);
        assert_eq!(lub(&[UPattern::Bottom, UPattern::Tree(t3.clone())]), UPattern::Tree(t3));
        assert_eq!(lub(&[UPattern::Bottom]), UPattern::Bottom);
    }

    #[test]
    fn lub_covers_holes_of_inputs() {
        let a = f(x(), l("a"));
        let b = f(x(), l("b"));
        assert_eq!(lub_terms(&[a.clone(), b.clone()]), x());
        assert_eq!(lub1_terms(&[a.clone(), b]).unwrap(), x());
        let c = f(x(), x());
        let d = f(l("a"), l("a"));
        assert_eq!(lub_terms(&[c, d]), f(x(), x()));
        assert_eq!(lub_terms(&[a.clone(), a.clone()]), a);
    }

    #[test]
    fn lub1_rejects_two_holes() {
        assert!(lub1_terms(&[f(x(), x())]).is_err());
    }

    #[test]
    fn max_ground() {
        let t = f(l("a"), h(Term::call("q", 1)));
        assert_eq!(max_ground_subtrees(&t), vec![l("a")]);
        let t = f(g(l("a"), l("b")), x());
        assert_eq!(max_ground_subtrees(&t), vec![g(l("a"), l("b"))]);
        assert_eq!(max_ground_subtrees(&f(l("a"), x())), vec![l("a")]);
    }

    #[test]
    fn measure_counts_shared_nodes_once() {
        assert_eq!(dag_size(&l("a")), 1);
        assert_eq!(dag_size(&f(l("a"), l("a"))), 4);
    }

    #[test]
    fn depth_of_calls_is_one() {
        assert_eq!(Term::call("q", 1).depth(), 1);
        assert_eq!(g(l("a"), Term::call("q", 1)).depth(), 2);
    }

    #[test]
    fn residual_and_order() {
        let s = f(x(), l("c"));
        let t = f(h(l("a")), l("c"));
        assert_eq!(residual(&s, &t), Some(Some(h(l("a")))));
        assert_eq!(residual(&s, &l("c")), None);
        assert!(below(&UPattern::Tree(t.clone()), &UPattern::Tree(s.clone())));
        assert!(!below(&UPattern::Tree(s), &UPattern::Tree(t)));
    }

    pub(crate) fn arb_pattern(depth: u32) -> impl Strategy<Value = Term> {
        let leaf = prop_oneof![Just(l("a")), Just(l("b")), Just(x())];
        leaf.prop_recursive(depth, 32, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| f(a, b)),
                inner.prop_map(h),
            ]
        })
    }

    fn arb_unary(depth: u32) -> impl Strategy<Value = Term> {
        arb_pattern(depth).prop_filter("needs x1", |t| t.x1_count() > 0)
    }

    fn arb_ground(depth: u32) -> impl Strategy<Value = Term> {
        arb_pattern(depth).prop_filter("ground", |t| t.is_ground())
    }

    proptest! {
        #[test]
        fn compose_is_associative(u in arb_pattern(4), v in arb_pattern(4), w in arb_pattern(4)) {
            prop_assert_eq!(compose(&compose(&u, &v), &w), compose(&u, &compose(&v, &w)));
            prop_assert_eq!(compose(&u, &x()), u.clone());
            prop_assert_eq!(compose(&x(), &u), u);
        }

        #[test]
        fn factorization_recomposes(u in arb_unary(4), v in arb_unary(4)) {
            let uv = compose(&u, &v);
            let fs = factorize(&uv).unwrap();
            let back = fs.iter().rev().fold(x(), |acc, f| compose(f, &acc));
            prop_assert_eq!(back, uv);
            for f in &fs {
                prop_assert!(!f.is_x1());
                prop_assert_eq!(factorize(f).unwrap(), vec![f.clone()]);
            }
            let fu = factorize(&u).unwrap();
            let fv = factorize(&v).unwrap();
            let joined: Vec<Term> = fu.into_iter().chain(fv).collect();
            prop_assert_eq!(fs, joined);
        }

        #[test]
        fn lub_is_an_upper_bound(ts in proptest::collection::vec(arb_ground(4), 1..4)) {
            let s = lub_terms(&ts);
            for t in &ts {
                prop_assert!(residual(&s, t).is_some());
            }
            let s1 = lub1_terms(&ts).unwrap();
            prop_assert!(s1.x1_count() <= 1);
            for t in &ts {
                prop_assert!(residual(&s1, t).is_some());
            }
        }

        #[test]
        fn lub_fold_order_is_irrelevant(ts in proptest::collection::vec(arb_pattern(3), 2..5)) {
            let all = lub_terms(&ts);
            let folded = ts.iter().skip(1).fold(ts[0].clone(), |acc, t| lub_terms(&[acc, t.clone()]));
            prop_assert_eq!(&folded, &all);
            let mut rev = ts.clone();
            rev.reverse();
            prop_assert_eq!(lub_terms(&rev), all);
        }
    }
}
