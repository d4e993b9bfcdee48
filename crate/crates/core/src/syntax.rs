//! Text format for alphabets, automata, transducers and terms.
//!
//! ```text
//! # comment
//! alphabet s { f/2 a/0 }
//! automaton B over s { states h0 h1; accept h0; h0 <- f(h1,h0); h1 <- a; }
//! transducer A over B { state q0 : h0; axiom h0 = f(a, q0(x1)); rule q0(f(x1:h1, x2:h0)) -> g(q0(x2), b); }
//! bottomup U over B { axiom h0 = g(x1); rule f(x1:h1, x2:h0) -> g(x2, x2); }
//! ```
//!
//! Identifiers use letters, digits and `_'.#@$+*[]`. `x1`, `x2`, ... are
//! variables. In right-hand sides, `q(xj)` is a call when `q` is a declared
//! state. A transducer may name its output alphabet with `output d` after the
//! automaton; otherwise it is inferred from the right-hand sides. Child
//! annotations `:h` may be omitted when the advice is top-down deterministic.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::automata::TreeAutomaton;
use crate::error::{Error, Result};
use crate::terms::{Name, Node, RankedAlphabet, Term};
use crate::transducer::{Rule, Transducer};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Punct(&'static str),
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || "_'.#@$+*[]".contains(c)
}

fn lex(src: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let two: String = chars[i..chars.len().min(i + 2)].iter().collect();
        let punct = match two.as_str() {
            "<-" => Some("<-"),
            "->" => Some("->"),
            _ => match c {
                '{' => Some("{"),
                '}' => Some("}"),
                '(' => Some("("),
                ')' => Some(")"),
                ',' => Some(","),
                ';' => Some(";"),
                ':' => Some(":"),
                '/' => Some("/"),
                '=' => Some("="),
                _ => None,
            },
        };
        if let Some(p) = punct {
            out.push(Token { tok: Tok::Punct(p), line, col });
            i += p.len();
            col += p.len();
            continue;
        }
        if ident_char(c) {
            let start = i;
            while i < chars.len() && ident_char(chars[i]) {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            out.push(Token { tok: Tok::Ident(s), line, col });
            col += i - start;
            continue;
        }
        return Err(Error::Parse { line, col, msg: format!("unexpected character {:?}", c) });
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

fn var_index(s: &str) -> Option<u32> {
    let rest = s.strip_prefix('x')?;
    if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) || rest.starts_with('0') {
        return None;
    }
    rest.parse().ok()
}

/// Raw parsed tree before calls are resolved.
#[derive(Clone, Debug)]
enum Raw {
    App(String, Vec<Raw>, usize, usize),
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        let t = &self.toks[self.pos];
        Err(Error::Parse { line: t.line, col: t.col, msg: msg.into() })
    }

    fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if t != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, p: &str) -> bool {
        if matches!(self.peek(), Tok::Punct(q) if *q == p) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, p: &str) -> Result<()> {
        if self.eat(p) {
            Ok(())
        } else {
            self.err(format!("expected '{}'", p))
        }
    }

    fn ident(&mut self) -> Result<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.pos += 1;
                Ok(s)
            }
            _ => self.err("expected identifier"),
        }
    }

    fn keyword(&mut self, k: &str) -> Result<()> {
        match self.peek() {
            Tok::Ident(s) if s == k => {
                self.pos += 1;
                Ok(())
            }
            _ => self.err(format!("expected '{}'", k)),
        }
    }

    fn at_keyword(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == k)
    }

    fn raw(&mut self) -> Result<Raw> {
        let t = &self.toks[self.pos];
        let (line, col) = (t.line, t.col);
        let name = self.ident()?;
        let mut kids = Vec::new();
        if self.eat("(")
            && !self.eat(")") {
                loop {
                    kids.push(self.raw()?);
                    if self.eat(")") {
                        break;
                    }
                    self.expect(",")?;
                }
            }
        Ok(Raw::App(name, kids, line, col))
    }
}

fn perr<T>(line: usize, col: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse { line, col, msg: msg.into() })
}

/// Resolves a raw tree; `states` decides which names are calls.
fn resolve(raw: &Raw, states: &dyn Fn(&str) -> bool, ranks: &mut dyn FnMut(&str, usize, usize, usize) -> Result<()>) -> Result<Term> {
    let Raw::App(name, kids, line, col) = raw;
    if let Some(j) = var_index(name) {
        if !kids.is_empty() {
            return perr(*line, *col, format!("variable {} applied to arguments", name));
        }
        return Ok(Term::var(j));
    }
    if states(name) {
        if let [Raw::App(v, vk, _, _)] = kids.as_slice() {
            if let (Some(j), true) = (var_index(v), vk.is_empty()) {
                return Ok(Term::call(name.as_str(), j));
            }
        }
        return perr(*line, *col, format!("state {} must be applied to a single variable", name));
    }
    ranks(name, kids.len(), *line, *col)?;
    let ch: Result<Vec<Term>> = kids.iter().map(|k| resolve(k, states, ranks)).collect();
    Ok(Term::sym(name.as_str(), ch?))
}

fn parse_term_with(src: &str, states: &dyn Fn(&str) -> bool) -> Result<Term> {
    let mut p = Parser { toks: lex(src)?, pos: 0 };
    let raw = p.raw()?;
    if *p.peek() != Tok::Eof {
        return p.err("trailing input");
    }
    resolve(&raw, states, &mut |_, _, _, _| Ok(()))
}

/// A tree with symbols and variables only.
pub fn parse_pattern(src: &str) -> Result<Term> {
    parse_term_with(src, &|_| false)
}

pub fn parse_ground(src: &str) -> Result<Term> {
    let t = parse_pattern(src)?;
    if !t.is_ground() {
        return Err(Error::Parse { line: 1, col: 1, msg: format!("{} is not ground", t) });
    }
    Ok(t)
}

/// A right-hand side where `states` are call targets.
pub fn parse_rhs(src: &str, states: &[&str]) -> Result<Term> {
    parse_term_with(src, &|s| states.contains(&s))
}

/// Checks a ground term against an alphabet.
pub fn check_over(t: &Term, alphabet: &RankedAlphabet) -> Result<()> {
    let mut bad = None;
    t.visit_dag(&mut |s| {
        if let Node::Sym(f, ch) = s.node() {
            if alphabet.rank(f) != Some(ch.len()) && bad.is_none() {
                bad = Some(format!("{} with {} children is not a symbol of {}", f, ch.len(), alphabet.name));
            }
        }
    });
    match bad {
        Some(m) => Err(Error::invalid(m)),
        None => Ok(()),
    }
}

#[derive(Clone, Debug, Default)]
pub struct Document {
    pub alphabets: Vec<RankedAlphabet>,
    pub automata: Vec<TreeAutomaton>,
    pub transducers: Vec<Transducer>,
}

impl Document {
    pub fn alphabet(&self, name: &str) -> Option<&RankedAlphabet> {
        self.alphabets.iter().find(|a| a.name.as_str() == name)
    }

    pub fn automaton(&self, name: &str) -> Option<&TreeAutomaton> {
        self.automata.iter().find(|a| a.name.as_str() == name)
    }

    pub fn transducer(&self, name: &str) -> Option<&Transducer> {
        self.transducers.iter().find(|a| a.name.as_str() == name)
    }
}

pub fn parse_document(src: &str) -> Result<Document> {
    let mut p = Parser { toks: lex(src)?, pos: 0 };
    let mut doc = Document::default();
    loop {
        match p.peek().clone() {
            Tok::Eof => return Ok(doc),
            Tok::Ident(k) if k == "alphabet" => {
                let a = parse_alphabet(&mut p)?;
                if doc.alphabet(a.name.as_str()).is_some() {
                    return p.err(format!("duplicate alphabet {}", a.name));
                }
                doc.alphabets.push(a);
            }
            Tok::Ident(k) if k == "automaton" => {
                let a = parse_automaton(&mut p, &doc)?;
                if doc.automaton(a.name.as_str()).is_some() {
                    return p.err(format!("duplicate automaton {}", a.name));
                }
                doc.automata.push(a);
            }
            Tok::Ident(k) if k == "transducer" || k == "bottomup" => {
                let a = parse_transducer(&mut p, &doc, k == "bottomup")?;
                if doc.transducer(a.name.as_str()).is_some() {
                    return p.err(format!("duplicate transducer {}", a.name));
                }
                doc.transducers.push(a);
            }
            _ => return p.err("expected 'alphabet', 'automaton', 'transducer' or 'bottomup'"),
        }
    }
}

fn parse_alphabet(p: &mut Parser) -> Result<RankedAlphabet> {
    p.keyword("alphabet")?;
    let name = p.ident()?;
    p.expect("{")?;
    let mut a = RankedAlphabet { name: Name::from(name), symbols: Vec::new() };
    while !p.eat("}") {
        let s = p.ident()?;
        p.expect("/")?;
        let r = p.ident()?;
        let r: usize = match r.parse() {
            Ok(r) => r,
            Err(_) => return p.err(format!("bad rank {}", r)),
        };
        if let Err(e) = a.push(Name::from(s), r) {
            return p.err(e.to_string());
        }
        p.eat(";");
        p.eat(",");
    }
    if a.symbols.is_empty() {
        return p.err("alphabet without symbols");
    }
    Ok(a)
}

fn parse_automaton(p: &mut Parser, doc: &Document) -> Result<TreeAutomaton> {
    p.keyword("automaton")?;
    let name = p.ident()?;
    p.keyword("over")?;
    let an = p.ident()?;
    let Some(alpha) = doc.alphabet(&an) else {
        return p.err(format!("undeclared alphabet {}", an));
    };
    let mut b = TreeAutomaton::new(&name, alpha.clone());
    p.expect("{")?;
    let mut declared = false;
    let mut accept = Vec::new();
    while !p.eat("}") {
        if p.at_keyword("states") {
            p.pos += 1;
            declared = true;
            while !p.eat(";") {
                let h = p.ident()?;
                b.add_state(&Name::from(h));
            }
        } else if p.at_keyword("accept") {
            p.pos += 1;
            while !p.eat(";") {
                let (line, col) = (p.toks[p.pos].line, p.toks[p.pos].col);
                accept.push((p.ident()?, line, col));
            }
        } else {
            let (line, col) = (p.toks[p.pos].line, p.toks[p.pos].col);
            let h = p.ident()?;
            p.expect("<-")?;
            let f = p.ident()?;
            let mut kids = Vec::new();
            if p.eat("(") && !p.eat(")") {
                loop {
                    kids.push(Name::from(p.ident()?));
                    if p.eat(")") {
                        break;
                    }
                    p.expect(",")?;
                }
            }
            p.expect(";")?;
            let h = Name::from(h);
            if declared {
                for s in std::iter::once(&h).chain(&kids) {
                    if !b.has_state(s) {
                        return perr(line, col, format!("undeclared state {}", s));
                    }
                }
            }
            if let Err(e) = b.add_transition(&h, &Name::from(f), &kids) {
                return perr(line, col, e.to_string());
            }
        }
    }
    for (h, line, col) in accept {
        let h = Name::from(h);
        if declared && !b.has_state(&h) {
            return perr(line, col, format!("undeclared state {}", h));
        }
        b.accept(&h);
    }
    Ok(b)
}

struct RawRule {
    state: Option<String>,
    symbol: String,
    kids: Vec<(u32, Option<String>)>,
    rhs: Raw,
    line: usize,
    col: usize,
}

fn parse_transducer(p: &mut Parser, doc: &Document, bottom_up: bool) -> Result<Transducer> {
    p.next();
    let name = p.ident()?;
    p.keyword("over")?;
    let bn = p.ident()?;
    let Some(advice) = doc.automaton(&bn) else {
        return p.err(format!("undeclared automaton {}", bn));
    };
    let mut output = None;
    if p.at_keyword("output") {
        p.pos += 1;
        let on = p.ident()?;
        match doc.alphabet(&on) {
            Some(a) => output = Some(a.clone()),
            None => return p.err(format!("undeclared alphabet {}", on)),
        }
    }
    p.expect("{")?;
    let mut states: Vec<(Name, Name)> = Vec::new();
    let mut axioms: Vec<(String, Raw, usize, usize)> = Vec::new();
    let mut rules: Vec<RawRule> = Vec::new();
    while !p.eat("}") {
        let (line, col) = (p.toks[p.pos].line, p.toks[p.pos].col);
        if p.at_keyword("state") && !bottom_up {
            p.pos += 1;
            let q = p.ident()?;
            p.expect(":")?;
            let h = p.ident()?;
            p.expect(";")?;
            if !advice.has_state(&Name::from(h.as_str())) {
                return perr(line, col, format!("undeclared advice state {}", h));
            }
            if states.iter().any(|(s, _)| s.as_str() == q) {
                return perr(line, col, format!("duplicate state {}", q));
            }
            states.push((Name::from(q), Name::from(h)));
        } else if p.at_keyword("axiom") {
            p.pos += 1;
            let h = p.ident()?;
            p.expect("=")?;
            let rhs = p.raw()?;
            p.expect(";")?;
            axioms.push((h, rhs, line, col));
        } else if p.at_keyword("rule") {
            p.pos += 1;
            let state = if bottom_up {
                None
            } else {
                let q = p.ident()?;
                p.expect("(")?;
                Some(q)
            };
            let symbol = p.ident()?;
            let mut kids = Vec::new();
            if p.eat("(") && !p.eat(")") {
                loop {
                    let v = p.ident()?;
                    let Some(j) = var_index(&v) else {
                        return p.err(format!("expected variable, found {}", v));
                    };
                    let ann = if p.eat(":") { Some(p.ident()?) } else { None };
                    kids.push((j, ann));
                    if p.eat(")") {
                        break;
                    }
                    p.expect(",")?;
                }
            }
            if !bottom_up {
                p.expect(")")?;
            }
            p.expect("->")?;
            let rhs = p.raw()?;
            p.expect(";")?;
            rules.push(RawRule { state, symbol, kids, rhs, line, col });
        } else {
            return p.err("expected 'state', 'axiom' or 'rule'");
        }
    }
    if bottom_up {
        if !advice.is_bottom_up_deterministic() {
            return p.err(format!("advice {} of a bottom-up transducer must be bottom-up deterministic", bn));
        }
        for h in &advice.states {
            states.push((h.clone(), h.clone()));
        }
    }
    let state_set: BTreeSet<String> = states.iter().map(|(q, _)| q.as_str().to_string()).collect();
    let is_state = |s: &str| state_set.contains(s);
    let mut out_ranks: BTreeMap<String, usize> = BTreeMap::new();
    let mut out_order: Vec<String> = Vec::new();
    let mut rank_check = |s: &str, k: usize, line: usize, col: usize| -> Result<()> {
        if let Some(o) = &output {
            if o.rank(&Name::new(s)) != Some(k) {
                return perr(line, col, format!("{}/{} is not a symbol of the output alphabet", s, k));
            }
            return Ok(());
        }
        match out_ranks.get(s) {
            Some(&r) if r != k => perr(line, col, format!("symbol {} used with ranks {} and {}", s, r, k)),
            Some(_) => Ok(()),
            None => {
                out_ranks.insert(s.to_string(), k);
                out_order.push(s.to_string());
                Ok(())
            }
        }
    };
    let mut a = Transducer::new(&name, advice.clone());
    for (q, h) in &states {
        a.add_state(q, h);
    }
    for (h, raw, line, col) in &axioms {
        let hn = Name::from(h.as_str());
        if !advice.accepting.contains(&hn) {
            return perr(*line, *col, format!("axiom for non-accepting state {}", h));
        }
        let mut t = resolve(raw, &is_state, &mut rank_check)?;
        if bottom_up {
            t = t.subst_vars(&|j| if j == 1 { Some(Term::call(hn.clone(), 1)) } else { None });
        }
        if t.has_var() {
            return perr(*line, *col, "axiom must use calls on x1, not bare variables");
        }
        if a.axioms.insert(hn, t).is_some() {
            return perr(*line, *col, format!("duplicate axiom for {}", h));
        }
    }
    for r in &rules {
        let (line, col) = (r.line, r.col);
        let f = Name::from(r.symbol.as_str());
        let Some(rank) = advice.alphabet.rank(&f) else {
            return perr(line, col, format!("unknown input symbol {}", f));
        };
        if r.kids.len() != rank {
            return perr(line, col, format!("symbol {} has rank {}", f, rank));
        }
        for (i, (j, _)) in r.kids.iter().enumerate() {
            if *j as usize != i + 1 {
                return perr(line, col, "variables must be x1, x2, ... in order");
            }
        }
        let mut anns = Vec::new();
        let known: Option<Vec<Name>> = match &r.state {
            Some(q) => {
                let Some((_, h)) = states.iter().find(|(s, _)| s.as_str() == q) else {
                    return perr(line, col, format!("undeclared state {}", q));
                };
                advice.td_children(h, &f).map(|c| c.to_vec())
            }
            None => None,
        };
        for (i, (_, ann)) in r.kids.iter().enumerate() {
            match (ann, &known) {
                (Some(h), _) => anns.push(Name::from(h.as_str())),
                (None, Some(k)) if advice.is_top_down_deterministic() => anns.push(k[i].clone()),
                _ => return perr(line, col, "child annotation required"),
            }
        }
        let state = match &r.state {
            Some(q) => Name::from(q.as_str()),
            None => {
                let targets: Vec<&Name> = advice
                    .transitions
                    .iter()
                    .filter(|t| t.symbol == f && t.children == anns)
                    .map(|t| &t.target)
                    .collect();
                match targets.as_slice() {
                    [h] => (*h).clone(),
                    _ => return perr(line, col, "no advice transition for this rule"),
                }
            }
        };
        let mut rhs = resolve(&r.rhs, &is_state, &mut rank_check)?;
        if bottom_up {
            let anns2 = anns.clone();
            rhs = rhs.subst_vars(&|j| anns2.get(j as usize - 1).map(|h| Term::call(h.clone(), j)));
        }
        if rhs.has_var() {
            return perr(line, col, "right-hand side uses a variable outside a state call");
        }
        let rule = Rule { state, symbol: f, children: anns, rhs };
        if a.rule(&rule.state, &rule.symbol, &rule.children).is_some() {
            return perr(line, col, "duplicate rule");
        }
        a.add_rule(rule);
    }
    a.output = match output {
        Some(o) => o,
        None => {
            let mut o = RankedAlphabet { name: Name::from(format!("{}_out", name)), symbols: Vec::new() };
            for s in out_order {
                o.push(Name::from(s.as_str()), out_ranks[&s])?;
            }
            o
        }
    };
    Ok(a)
}

pub fn print_alphabet(a: &RankedAlphabet) -> String {
    let syms: Vec<String> = a.symbols.iter().map(|s| format!("{}/{}", s.name, s.rank)).collect();
    format!("alphabet {} {{ {} }}\n", a.name, syms.join(" "))
}

pub fn print_automaton(b: &TreeAutomaton) -> String {
    let mut s = String::new();
    let states: Vec<&str> = b.states.iter().map(Name::as_str).collect();
    let acc: Vec<&str> = b.accepting.iter().map(Name::as_str).collect();
    let _ = writeln!(s, "automaton {} over {} {{", b.name, b.alphabet.name);
    let _ = writeln!(s, "  states {};", states.join(" "));
    let _ = writeln!(s, "  accept {};", acc.join(" "));
    for t in &b.transitions {
        let _ = writeln!(s, "  {};", t);
    }
    s.push_str("}\n");
    s
}

pub fn print_transducer(a: &Transducer) -> String {
    let mut s = String::new();
    let out = if a.output.name == a.advice.alphabet.name { String::new() } else { format!(" output {}", a.output.name) };
    let _ = writeln!(s, "transducer {} over {}{} {{", a.name, a.advice.name, out);
    for q in &a.states {
        let _ = writeln!(s, "  state {} : {};", q, a.iota[q]);
    }
    for (h, t) in &a.axioms {
        let _ = writeln!(s, "  axiom {} = {};", h, t);
    }
    for r in a.rules_in_order() {
        let _ = writeln!(s, "  rule {};", r);
    }
    s.push_str("}\n");
    s
}

/// A self-contained document: alphabets, advice automaton and transducer.
pub fn print_transducer_document(a: &Transducer) -> String {
    let mut s = print_alphabet(&a.advice.alphabet);
    if a.output.name != a.advice.alphabet.name && !a.output.symbols.is_empty() {
        s.push_str(&print_alphabet(&a.output));
    }
    s.push_str(&print_automaton(&a.advice));
    s.push_str(&print_transducer(a));
    s
}

pub fn print_automaton_document(b: &TreeAutomaton) -> String {
    let mut s = print_alphabet(&b.alphabet);
    s.push_str(&print_automaton(b));
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    const DOC: &str = "
        # a small example
        alphabet s { f/2 a/0 }
        automaton B over s { states h0 h1; accept h0; h0 <- f(h1,h0); h0 <- a; h1 <- a; }
        transducer A over B {
          state q0 : h0;
          state q1 : h1;
          axiom h0 = k(q0(x1));
          rule q0(f(x1:h1, x2:h0)) -> g(q1(x1), q0(x2));
          rule q0(a) -> b;
          rule q1(a) -> c;
        }
    ";

    #[test]
    fn alphabet_with_two_symbols() {
        let d = parse_document("alphabet s { f/2 a/0 }").unwrap();
        assert_eq!(d.alphabets[0].symbols.len(), 2);
    }

    #[test]
    fn parses_and_round_trips() {
        let d = parse_document(DOC).unwrap();
        let a = &d.transducers[0];
        assert_eq!(a.states.len(), 2);
        assert_eq!(a.output.rank(&Name::new("g")), Some(2));
        let text = print_transducer_document(a);
        let d2 = parse_document(&text).unwrap();
        let b = &d2.transducers[0];
        assert_eq!(print_transducer_document(b), text);
        assert_eq!(a.axioms, b.axioms);
    }

    #[test]
    fn calls_need_a_single_variable() {
        let bad = DOC.replace("g(q1(x1), q0(x2))", "g(q1(a), q0(x2))");
        assert!(matches!(parse_document(&bad), Err(Error::Parse { .. })));
    }

    #[test]
    fn errors_carry_positions() {
        match parse_document("alphabet s { f/2 a/0 }\nautomaton B over t { }") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{:?}", other),
        }
        match parse_document("alphabet s { f/x }") {
            Err(Error::Parse { line: 1, .. }) => {}
            other => panic!("{:?}", other),
        }
    }

    #[test]
    fn omitted_annotations_come_from_topdown_advice() {
        let src = DOC.replace("x1:h1, x2:h0", "x1, x2");
        let d = parse_document(&src).unwrap();
        let r = d.transducers[0].rules().find(|r| r.symbol.as_str() == "f").unwrap().clone();
        assert_eq!(r.children, vec![Name::new("h1"), Name::new("h0")]);
    }

    #[test]
    fn terms() {
        assert_eq!(parse_pattern("f(x1, g(a))").unwrap().to_string(), "f(x1,g(a))");
        assert!(parse_ground("f(x1)").is_err());
        let r = parse_rhs("f(q(x2), a)", &["q"]).unwrap();
        assert_eq!(r.calls().len(), 1);
    }
}
