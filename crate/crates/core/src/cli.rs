//! Command dispatch, the end-to-end pipeline and machine-readable verdicts.
//!
//! Inputs are files in the text format of [`crate::syntax`]. An input argument
//! `path:name` selects the transducer or automaton called `name`; a bare path
//! selects the last transducer (or automaton) in the file.
//!
//! Exit codes: 0 positive verdict, 1 negative verdict, 2 input or resource error.
//! With `--report FILE` one `key=value` record per command is appended to FILE.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::automata::{powerset_topdown, TreeAutomaton};
use crate::error::{Error, Result};
use crate::inspection::{compute_needs_with, remove_inspection, rule_need, Inspector};
use crate::lookahead::remove_lookahead;
use crate::normalform::{equivalent, make_earliest, normalize};
use crate::oracle::{
    enumerate_domain, oracle_equiv, oracle_equiv_deepest, random_instance, sample_equiv, try_enumerate, AdviceProfile,
    Profile,
};
use crate::recognizability::{build_checker, orec_table};
use crate::syntax::{parse_document, parse_ground, print_automaton_document, print_transducer_document, Document};
use crate::terms::{Name, Term};
use crate::transducer::{Mode, Transducer};

#[derive(Parser, Debug)]
#[command(name = "tdta", version, about = "Top-down tree transducers with look-ahead or inspection")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Prefix lattice: uniform-copying or linear.
    #[arg(long, global = true, value_enum, default_value = "uc")]
    pub mode: ModeArg,
    /// Append a key=value verdict record to this file.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
    /// Print the failure witness in full.
    #[arg(long, global = true)]
    pub explain: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModeArg {
    Uc,
    #[value(alias = "linear")]
    Lin,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Uc => Mode::Uc,
            ModeArg::Lin => Mode::Linear,
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Parse a file and validate every automaton and transducer in it.
    Validate { input: String },
    /// Remove useless states of an automaton.
    Trim { input: String },
    /// Report determinism and ambiguity of an automaton.
    Classify { input: String },
    /// The top-down deterministic subset automaton.
    Powerset { input: String },
    /// The earliest form of a transducer.
    Earliest { input: String },
    /// The canonical earliest form, with the state map as `# pi:` comments.
    Canonicalize { input: String },
    /// Decide equivalence of two transducers.
    Equiv { left: String, right: String },
    /// Build an equivalent transducer with top-down inspection, or report why none exists.
    RemoveLookahead { input: String },
    /// Print rule needs and the need sets of every state.
    Needs {
        input: String,
        /// Analyse the transducer as given instead of its canonical earliest form.
        #[arg(long)]
        raw: bool,
    },
    /// Table of minimal output subtrees recognizing each state language.
    Orec { input: String, state: String, tree: String },
    /// A transducer without inspection with domain dom(state) and constant output `tree`.
    Checker { input: String, state: String, tree: String },
    /// Build an equivalent transducer without inspection, or report why none exists.
    RemoveInspection { input: String },
    /// Earliest form, look-ahead removal and optionally inspection removal, with a certificate.
    Pipeline {
        input: String,
        #[arg(long)]
        strip_inspection: bool,
        /// Deepest exhaustive oracle depth attempted for the certificate.
        #[arg(long, default_value_t = 5)]
        depth: u32,
        /// Random domain trees compared in addition to the exhaustive oracle.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Translate one input tree.
    Eval {
        input: String,
        tree: String,
        #[arg(long)]
        state: Option<String>,
    },
    /// List the trees of an automaton (or state) up to a depth.
    Enumerate {
        input: String,
        #[arg(long, default_value_t = 3)]
        depth: u32,
        #[arg(long)]
        state: Option<String>,
    },
    /// Compare two translations on every tree up to a depth.
    OracleEquiv {
        left: String,
        right: String,
        #[arg(long, default_value_t = 5)]
        depth: u32,
    },
    /// Run the pipeline on random instances and check artifacts and determinism.
    Fuzz {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// One of uc, lin, uc-i, lin-i.
        #[arg(long, default_value = "uc")]
        profile: String,
        #[arg(long, default_value_t = 100)]
        count: u64,
        /// Oracle depth used to cross-check successful runs.
        #[arg(long, default_value_t = 3)]
        depth: u32,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Success,
    Failure,
    Error,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Success => 0,
            Outcome::Failure => 1,
            Outcome::Error => 2,
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            Outcome::Success => "success",
            Outcome::Failure => "failure",
            Outcome::Error => "error",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Verdict {
    pub command: String,
    pub outcome: Outcome,
    pub reason: Option<String>,
    pub stage: Option<String>,
    pub artifact: Option<String>,
    pub diagnostics: Vec<(String, String)>,
}

impl Verdict {
    fn new(command: &str, outcome: Outcome) -> Verdict {
        Verdict { command: command.into(), outcome, reason: None, stage: None, artifact: None, diagnostics: Vec::new() }
    }

    fn diag(mut self, k: &str, v: impl ToString) -> Verdict {
        self.diagnostics.push((k.into(), v.to_string()));
        self
    }

    fn artifact(mut self, name: &Name) -> Verdict {
        self.artifact = Some(name.to_string());
        self
    }

    /// One line of space-separated `key=value` pairs; values with spaces or quotes are quoted.
    pub fn record(&self) -> String {
        let mut fields = vec![("command".to_string(), self.command.clone()), ("outcome".into(), self.outcome.as_str().into())];
        if let Some(r) = &self.reason {
            fields.push(("reason".into(), r.clone()));
        }
        if let Some(s) = &self.stage {
            fields.push(("stage".into(), s.clone()));
        }
        if let Some(a) = &self.artifact {
            fields.push(("artifact".into(), a.clone()));
        }
        fields.extend(self.diagnostics.iter().cloned());
        let shown: Vec<String> = fields
            .into_iter()
            .map(|(k, v)| {
                if v.is_empty() || v.contains(|c: char| c.is_whitespace() || c == '"' || c == '=') {
                    format!("{}={:?}", k, v)
                } else {
                    format!("{}={}", k, v)
                }
            })
            .collect();
        shown.join(" ")
    }
}

struct Ctx {
    mode: Mode,
    explain: bool,
    text: String,
}

impl Ctx {
    fn line(&mut self, s: impl AsRef<str>) {
        self.text.push_str(s.as_ref());
        self.text.push('\n');
    }
}

fn split_input(spec: &str) -> (&str, Option<&str>) {
    if Path::new(spec).is_file() {
        return (spec, None);
    }
    match spec.rsplit_once(':') {
        Some((p, n)) if !n.is_empty() && !n.contains('/') => (p, Some(n)),
        _ => (spec, None),
    }
}

fn load(spec: &str) -> Result<(Document, Option<String>)> {
    let (path, name) = split_input(spec);
    let src = std::fs::read_to_string(path).map_err(|e| Error::invalid(format!("cannot read {}: {}", path, e)))?;
    Ok((parse_document(&src)?, name.map(String::from)))
}

fn load_transducer(spec: &str) -> Result<Transducer> {
    let (doc, name) = load(spec)?;
    match name {
        Some(n) => doc.transducer(&n).cloned().ok_or_else(|| Error::invalid(format!("no transducer {} in {}", n, spec))),
        None => doc.transducers.last().cloned().ok_or_else(|| Error::invalid(format!("no transducer in {}", spec))),
    }
}

fn load_automaton(spec: &str) -> Result<TreeAutomaton> {
    let (doc, name) = load(spec)?;
    let found = match &name {
        Some(n) => doc.automaton(n).cloned().or_else(|| doc.transducer(n).map(|a| a.advice.clone())),
        None => doc.automata.last().cloned().or_else(|| doc.transducers.last().map(|a| a.advice.clone())),
    };
    found.ok_or_else(|| Error::invalid(format!("no automaton in {}", spec)))
}

fn ground(s: &str) -> Result<Term> {
    parse_ground(s)
}

/// Intermediate and final transducers of [`run_pipeline`].
#[derive(Clone, Debug)]
pub struct PipelineRun {
    pub stages: Vec<(&'static str, Transducer)>,
    pub result: Transducer,
}

/// Canonical earliest form, look-ahead removal (skipped when the advice is already
/// top-down deterministic) and, if `strip`, inspection removal.
pub fn run_pipeline(a: &Transducer, mode: Mode, strip: bool) -> Result<PipelineRun> {
    a.validate()?;
    let mut stages = Vec::new();
    let early = normalize(a, mode)?.transducer;
    stages.push(("earliest", early.clone()));
    let mut cur = if a.advice.is_top_down_deterministic() {
        early
    } else {
        let r = remove_lookahead(&early, mode)?;
        stages.push(("remove-lookahead", r.transducer.clone()));
        r.transducer
    };
    if strip {
        cur = remove_inspection(&cur, mode)?.transducer;
        stages.push(("remove-inspection", cur.clone()));
    }
    Ok(PipelineRun { stages, result: cur })
}

/// Evidence that two transducers agree.
#[derive(Clone, Debug)]
pub struct Certificate {
    pub exact: bool,
    pub oracle_depth: u32,
    pub witness: Option<Term>,
    pub samples: usize,
    pub sample_depth: u32,
}

impl Certificate {
    pub fn holds(&self) -> bool {
        self.exact && self.witness.is_none()
    }
}

/// Exact equivalence, the exhaustive oracle at the deepest feasible depth up to `depth`,
/// and `samples` random domain trees of depth up to `depth + 4`.
pub fn certify(a: &Transducer, b: &Transducer, depth: u32, samples: usize) -> Result<Certificate> {
    let exact = equivalent(a, b)?.equivalent;
    let (oracle_depth, mut witness) = oracle_equiv_deepest(a, b, depth)?;
    let sample_depth = depth + 4;
    if witness.is_none() {
        witness = sample_equiv(a, b, sample_depth, samples, 0);
    }
    Ok(Certificate { exact, oracle_depth, witness, samples, sample_depth })
}

/// Parses `args` (including the program name), runs one command and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = write!(out, "{}", e);
            return code;
        }
    };
    let (text, verdict) = execute(&cli);
    let _ = out.write_all(text.as_bytes());
    if let Some(path) = &cli.report {
        let written = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .and_then(|mut f| writeln!(f, "{}", verdict.record()));
        if let Err(e) = written {
            let _ = writeln!(out, "error: cannot write report {}: {}", path.display(), e);
            return 2;
        }
    }
    verdict.outcome.exit_code()
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Validate { .. } => "validate",
        Command::Trim { .. } => "trim",
        Command::Classify { .. } => "classify",
        Command::Powerset { .. } => "powerset",
        Command::Earliest { .. } => "earliest",
        Command::Canonicalize { .. } => "canonicalize",
        Command::Equiv { .. } => "equiv",
        Command::RemoveLookahead { .. } => "remove-lookahead",
        Command::Needs { .. } => "needs",
        Command::Orec { .. } => "orec",
        Command::Checker { .. } => "checker",
        Command::RemoveInspection { .. } => "remove-inspection",
        Command::Pipeline { .. } => "pipeline",
        Command::Eval { .. } => "eval",
        Command::Enumerate { .. } => "enumerate",
        Command::OracleEquiv { .. } => "oracle-equiv",
        Command::Fuzz { .. } => "fuzz",
    }
}

/// Runs the parsed command; returns the human text and the verdict.
pub fn execute(cli: &Cli) -> (String, Verdict) {
    let name = command_name(&cli.command);
    let mut ctx = Ctx { mode: cli.mode.into(), explain: cli.explain, text: String::new() };
    let verdict = match dispatch(&cli.command, name, &mut ctx) {
        Ok(v) => v,
        Err(Error::Failure(f)) => {
            ctx.line(format!("failure: {} at {}", f.reason, f.stage));
            if ctx.explain {
                ctx.line(format!("explain: {}", f.detail));
            }
            let mut v = Verdict::new(name, Outcome::Failure).diag("detail", &f.detail);
            v.reason = Some(f.reason.code().into());
            v.stage = Some(f.stage.into());
            v
        }
        Err(e) => {
            ctx.line(format!("error: {}", e));
            let kind = match e {
                Error::Parse { .. } => "parse",
                Error::Limit(_) => "limit",
                Error::Internal(_) => "internal",
                _ => "invalid",
            };
            let mut v = Verdict::new(name, Outcome::Error).diag("detail", e.to_string());
            v.reason = Some(kind.into());
            v
        }
    };
    (ctx.text, verdict)
}

fn dispatch(cmd: &Command, name: &str, ctx: &mut Ctx) -> Result<Verdict> {
    let ok = || Verdict::new(name, Outcome::Success);
    let negative = || Verdict::new(name, Outcome::Failure);
    match cmd {
        Command::Validate { input } => {
            let (doc, _) = load(input)?;
            for b in &doc.automata {
                b.validate()?;
                ctx.line(format!("automaton {}: {} states, {} transitions", b.name, b.states.len(), b.transitions.len()));
            }
            for a in &doc.transducers {
                let d = a.validate()?;
                ctx.line(format!(
                    "transducer {}: {} states, {} rules, linear={} advice={:?} without_inspection={}",
                    a.name,
                    a.states.len(),
                    a.rule_count(),
                    d.linear,
                    d.advice,
                    d.without_inspection
                ));
            }
            Ok(ok().diag("automata", doc.automata.len()).diag("transducers", doc.transducers.len()))
        }
        Command::Trim { input } => {
            let b = load_automaton(input)?.trim()?;
            ctx.line(print_automaton_document(&b).trim_end());
            Ok(ok().artifact(&b.name).diag("states", b.states.len()))
        }
        Command::Classify { input } => {
            let b = load_automaton(input)?;
            let c = b.classify();
            ctx.line(format!("bottom_up_deterministic={}", c.bottom_up_deterministic));
            ctx.line(format!("top_down_deterministic={}", c.top_down_deterministic));
            ctx.line(format!("unambiguous={}", c.unambiguous));
            Ok(ok()
                .artifact(&b.name)
                .diag("bottom_up_deterministic", c.bottom_up_deterministic)
                .diag("top_down_deterministic", c.top_down_deterministic)
                .diag("unambiguous", c.unambiguous))
        }
        Command::Powerset { input } => {
            let b = load_automaton(input)?;
            let p = powerset_topdown(&b);
            ctx.line(print_automaton_document(&p.automaton).trim_end());
            Ok(ok().artifact(&p.automaton.name).diag("states", p.automaton.states.len()))
        }
        Command::Earliest { input } => {
            let a = load_transducer(input)?;
            let e = make_earliest(&a, ctx.mode)?;
            ctx.line(print_transducer_document(&e).trim_end());
            Ok(ok().artifact(&e.name).diag("states", e.states.len()))
        }
        Command::Canonicalize { input } => {
            let a = load_transducer(input)?;
            let c = normalize(&a, ctx.mode)?;
            for (q, p) in &c.pi {
                ctx.line(format!("# pi: {} -> {}", q, p));
            }
            ctx.line(print_transducer_document(&c.transducer).trim_end());
            Ok(ok().artifact(&c.transducer.name).diag("states", c.transducer.states.len()))
        }
        Command::Equiv { left, right } => {
            let a = load_transducer(left)?;
            let b = load_transducer(right)?;
            let e = equivalent(&a, &b)?;
            if e.equivalent {
                ctx.line("equivalent");
                return Ok(ok());
            }
            ctx.line("not equivalent");
            let mut v = negative();
            if let Some(m) = &e.mismatch {
                ctx.line(format!("mismatch: {}", m));
                v = v.diag("mismatch", m);
            }
            if let Some(w) = &e.witness {
                ctx.line(format!("witness: {}", w));
                v = v.diag("witness", w);
            }
            Ok(v)
        }
        Command::RemoveLookahead { input } => {
            let a = load_transducer(input)?;
            let r = remove_lookahead(&a, ctx.mode)?;
            if ctx.explain {
                ctx.line(format!("# variation bound {}", r.bound));
                for (n, s) in &r.states {
                    ctx.line(format!("# {} = {}", n, s));
                }
            }
            ctx.line(print_transducer_document(&r.transducer).trim_end());
            Ok(ok().artifact(&r.transducer.name).diag("states", r.transducer.states.len()).diag("bound", r.bound))
        }
        Command::Needs { input, raw } => {
            let a = load_transducer(input)?;
            a.validate()?;
            let ins = Inspector::new(&a.advice)?;
            let src = if *raw { a } else { normalize(&a, ctx.mode)?.transducer };
            for r in src.rules_in_order() {
                let eta: Vec<String> = rule_need(r, &ins.top).iter().map(|(j, h)| format!("({},{})", j, h)).collect();
                ctx.line(format!("eta {} = {{{}}}", r, eta.join(",")));
            }
            let s = compute_needs_with(&ins, &src)?;
            let mut total = 0;
            for (q, set) in &s {
                for g in set {
                    ctx.line(format!("S[{}] {}", q, g));
                    total += 1;
                }
            }
            Ok(ok().artifact(&src.name).diag("needs", total))
        }
        Command::Orec { input, state, tree } => {
            let b = load_automaton(input)?;
            let s = ground(tree)?;
            let h = Name::new(state);
            if !b.has_state(&h) {
                return Err(Error::invalid(format!("unknown state {}", h)));
            }
            let t = orec_table(&b, &s)?;
            ctx.text.push_str(&t.to_string());
            let yes = t.rec(&h, &s);
            ctx.line(format!("recognizable({}, {}) = {}", h, s, yes));
            let v = if yes { ok() } else { negative() };
            Ok(v.artifact(&b.name).diag("recognizable", yes))
        }
        Command::Checker { input, state, tree } => {
            let b = load_automaton(input)?;
            let s = ground(tree)?;
            let h = Name::new(state);
            if !b.has_state(&h) {
                return Err(Error::invalid(format!("unknown state {}", h)));
            }
            if !orec_table(&b, &s)?.rec(&h, &s) {
                ctx.line(format!("dom({}) is not recognizable by {}", h, s));
                return Ok(negative().diag("recognizable", false));
            }
            let c = build_checker(&b, &h, &s)?;
            ctx.line(print_transducer_document(&c).trim_end());
            Ok(ok().artifact(&c.name).diag("rules", c.rule_count()))
        }
        Command::RemoveInspection { input } => {
            let a = load_transducer(input)?;
            let r = remove_inspection(&a, ctx.mode)?;
            if ctx.explain {
                for (q, set) in &r.needs {
                    for g in set {
                        ctx.line(format!("# S[{}] {}", q, g));
                    }
                }
                for (n, (q, u)) in &r.delayed.buffers {
                    ctx.line(format!("# buffer {} = {}[{}]", n, q, u));
                }
            }
            ctx.line(print_transducer_document(&r.transducer).trim_end());
            Ok(ok()
                .artifact(&r.transducer.name)
                .diag("rules", r.transducer.rule_count())
                .diag("buffers", r.delayed.buffers.len()))
        }
        Command::Pipeline { input, strip_inspection, depth, samples } => {
            let a = load_transducer(input)?;
            let run = run_pipeline(&a, ctx.mode, *strip_inspection)?;
            for (stage, t) in &run.stages[..run.stages.len() - 1] {
                ctx.line(format!("# stage {}", stage));
                for l in print_transducer_document(t).lines() {
                    ctx.line(format!("#   {}", l));
                }
            }
            ctx.line(format!("# stage {}", run.stages.last().map(|s| s.0).unwrap_or("earliest")));
            ctx.line(print_transducer_document(&run.result).trim_end());
            let c = certify(&a, &run.result, *depth, *samples)?;
            ctx.line(format!(
                "# certificate: exact={} oracle_depth={} samples={} sample_depth={}",
                c.exact, c.oracle_depth, c.samples, c.sample_depth
            ));
            let v = if c.holds() { ok() } else { negative() };
            let mut v = v
                .artifact(&run.result.name)
                .diag("rules", run.result.rule_count())
                .diag("exact", c.exact)
                .diag("oracle_depth", c.oracle_depth)
                .diag("samples", c.samples);
            if let Some(w) = &c.witness {
                ctx.line(format!("# counterexample: {}", w));
                v = v.diag("counterexample", w);
                v.stage = Some("certificate".into());
            }
            Ok(v)
        }
        Command::Eval { input, tree, state } => {
            let a = load_transducer(input)?;
            let t = ground(tree)?;
            let out = match state {
                Some(q) => a.eval_state(&Name::new(q), &t).ok(),
                None => a.eval(&t),
            };
            match out {
                Some(o) => {
                    ctx.line(o.to_string());
                    Ok(ok().diag("output", o))
                }
                None => {
                    ctx.line("undefined");
                    Ok(negative().diag("output", "undefined"))
                }
            }
        }
        Command::Enumerate { input, depth, state } => {
            let (doc, n) = load(input)?;
            let by_alphabet = match &n {
                Some(n) => doc.alphabet(n).cloned().filter(|_| doc.automaton(n).is_none() && doc.transducer(n).is_none()),
                None => doc.alphabets.last().cloned().filter(|_| doc.automata.is_empty() && doc.transducers.is_empty()),
            };
            let trees = match by_alphabet {
                Some(al) => try_enumerate(&al, *depth, &mut |_| true)?,
                None => {
                    let b = load_automaton(input)?;
                    enumerate_domain(&b, *depth, state.as_ref().map(|s| Name::new(s)).as_ref())?
                }
            };
            for t in &trees {
                ctx.line(t.to_string());
            }
            Ok(ok().diag("count", trees.len()))
        }
        Command::OracleEquiv { left, right, depth } => {
            let a = load_transducer(left)?;
            let b = load_transducer(right)?;
            match oracle_equiv(&a, &b, *depth)? {
                None => {
                    ctx.line(format!("equal up to depth {}", depth));
                    Ok(ok().diag("depth", depth))
                }
                Some(t) => {
                    ctx.line(format!("counterexample: {}", t));
                    ctx.line(format!("  left:  {}", show_out(a.eval(&t))));
                    ctx.line(format!("  right: {}", show_out(b.eval(&t))));
                    Ok(negative().diag("depth", depth).diag("counterexample", t))
                }
            }
        }
        Command::Fuzz { seed, profile, count, depth } => {
            let p = Profile::named(profile).ok_or_else(|| Error::invalid(format!("unknown profile {}", profile)))?;
            let s = fuzz(*seed, &p, *count, *depth);
            ctx.text.push_str(&s.to_string());
            let v = if s.clean() { ok() } else { negative() };
            Ok(v.diag("seeds", s.seeds)
                .diag("successes", s.successes)
                .diag("negatives", s.negatives.values().sum::<usize>())
                .diag("limits", s.limits)
                .diag("problems", s.problems.len()))
        }
    }
}

fn show_out(t: Option<Term>) -> String {
    t.map(|t| t.to_string()).unwrap_or_else(|| "undefined".into())
}

/// Aggregate result of a fuzz run.
#[derive(Clone, Debug, Default)]
pub struct FuzzSummary {
    pub seeds: u64,
    pub successes: usize,
    pub negatives: std::collections::BTreeMap<String, usize>,
    pub limits: usize,
    /// Internal errors, invalid artifacts, round-trip mismatches, oracle disagreements, unstable verdicts.
    pub problems: Vec<(u64, String)>,
}

impl FuzzSummary {
    pub fn clean(&self) -> bool {
        self.problems.is_empty()
    }
}

impl std::fmt::Display for FuzzSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "seeds {}", self.seeds)?;
        writeln!(f, "successes {}", self.successes)?;
        for (r, n) in &self.negatives {
            writeln!(f, "negative {} {}", r, n)?;
        }
        writeln!(f, "limits {}", self.limits)?;
        writeln!(f, "problems {}", self.problems.len())?;
        for (s, p) in &self.problems {
            writeln!(f, "  seed {}: {}", s, p)?;
        }
        Ok(())
    }
}

fn check_artifact(a: &Transducer, r: &Transducer, depth: u32) -> std::result::Result<(), String> {
    r.validate().map_err(|e| format!("artifact does not validate: {}", e))?;
    let printed = print_transducer_document(r);
    let doc = parse_document(&printed).map_err(|e| format!("artifact does not re-parse: {}", e))?;
    let back = doc.transducers.last().ok_or("re-parse lost the transducer")?;
    back.validate().map_err(|e| format!("re-parsed artifact does not validate: {}", e))?;
    if print_transducer_document(back) != printed {
        return Err("printing is not stable under re-parsing".into());
    }
    match oracle_equiv(a, r, depth) {
        Ok(None) | Err(Error::Limit(_)) => Ok(()),
        Ok(Some(t)) => Err(format!("translation differs on {}", t)),
        Err(e) => Err(format!("oracle: {}", e)),
    }
}

/// Runs the pipeline on `count` random instances starting at `seed`.
pub fn fuzz(seed: u64, profile: &Profile, count: u64, depth: u32) -> FuzzSummary {
    let mut s = FuzzSummary { seeds: count, ..FuzzSummary::default() };
    let strip = profile.advice == AdviceProfile::Inspection;
    for k in seed..seed.saturating_add(count) {
        let a = random_instance(k, profile);
        match run_pipeline(&a, profile.mode, strip) {
            Ok(run) => match check_artifact(&a, &run.result, depth) {
                Ok(()) => s.successes += 1,
                Err(p) => s.problems.push((k, p)),
            },
            Err(Error::Failure(f)) => {
                match run_pipeline(&a, profile.mode, strip) {
                    Err(Error::Failure(g)) if g == f => {}
                    _ => s.problems.push((k, format!("verdict changed on re-run after {}", f))),
                }
                *s.negatives.entry(f.reason.code().to_string()).or_default() += 1;
            }
            Err(Error::Limit(_)) => s.limits += 1,
            Err(e) => s.problems.push((k, e.to_string())),
        }
    }
    s
}
