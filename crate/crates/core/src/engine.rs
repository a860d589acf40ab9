//! Uniform-proof search.
//!
//! The search alternates between goal reduction (`ex`, driven by the goal's
//! top connective) and backchaining (`bchain`, decomposing one program
//! clause against an atomic goal). It runs as an explicit machine: a
//! persistent continuation of pending frames plus a stack of choice points.
//! Substitutions are persistent, so a choice point just keeps the old one.
//!
//! A choice conjunction `D0 & D1` is tried left first. Under
//! [`CommitMode::Call`] the right alternative is dropped as soon as the left
//! side produces its first answer, while alternatives inside the left side
//! survive (soft-cut). [`CommitMode::Global`] additionally remembers the
//! chosen side of each choice occurrence for the rest of the proof.

use std::collections::BTreeSet;
use std::fmt;
use std::rc::Rc;

use thiserror::Error;

use crate::ast::{
    freshen_goal, instantiate_goal, rename_fresh, DFormula, Formula, FreshSource, GFormula,
    Program, Sym, Term, Var,
};
use crate::modsys::{ModuleError, ModuleRegistry};
use crate::printer::{d_summary, g_summary};
use crate::unify::{unify, OccursCheck, Substitution};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum CommitMode {
    /// Per backchaining call: the untried side of a choice is pruned once
    /// the tried side succeeds.
    #[default]
    Call,
    /// Per proof: once a choice occurrence has committed, every later use of
    /// the same occurrence takes the same side.
    Global,
    /// No commitment; `&` behaves like `,` in clause position.
    Off,
}

impl std::str::FromStr for CommitMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "call" => Ok(CommitMode::Call),
            "global" => Ok(CommitMode::Global),
            "off" => Ok(CommitMode::Off),
            other => Err(format!(
                "unknown commit mode `{other}` (expected call, global or off)"
            )),
        }
    }
}

impl fmt::Display for CommitMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CommitMode::Call => "call",
            CommitMode::Global => "global",
            CommitMode::Off => "off",
        })
    }
}

/// Order in which `body => head` is processed during backchaining.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Rule2Order {
    /// Unify the head, then solve the body.
    #[default]
    HeadFirst,
    /// Solve the body, then unify the head.
    BodyFirst,
}

/// When a committed choice drops its right alternative.
#[doc(hidden)]
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum CommitTrigger {
    #[default]
    FirstAnswer,
    /// Deliberately wrong: drop the right side on entry. Only exists so the
    /// cross-check can be shown to catch it.
    Entry,
}

#[derive(Clone, Debug, Default)]
pub struct Config {
    pub commit_mode: CommitMode,
    /// Maximum resolution depth. Unbounded when `None`.
    pub depth_limit: Option<u32>,
    pub occurs_check: OccursCheck,
    pub trace: bool,
    pub rule2_order: Rule2Order,
    #[doc(hidden)]
    pub commit_trigger: CommitTrigger,
}

impl Config {
    pub fn commit_mode(mut self, mode: CommitMode) -> Self {
        self.commit_mode = mode;
        self
    }

    pub fn depth_limit(mut self, limit: Option<u32>) -> Self {
        self.depth_limit = limit;
        self
    }

    pub fn occurs_check(mut self, occurs: OccursCheck) -> Self {
        self.occurs_check = occurs;
        self
    }

    pub fn trace(mut self, on: bool) -> Self {
        self.trace = on;
        self
    }

    pub fn rule2_order(mut self, order: Rule2Order) -> Self {
        self.rule2_order = order;
        self
    }
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("instantiation error: `{0}` needs ground arguments")]
    Instantiation(String),
    #[error(transparent)]
    Module(#[from] ModuleError),
    #[error("`mod({0})` is not a goal; use `mod({0}) => Goal`")]
    ModuleAsGoal(Sym),
}

/// One solution: bindings of the query's free variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Answer {
    pub bindings: Vec<(Var, Term)>,
    /// Deepest resolution step used by the proof.
    pub depth_used: u32,
}

impl Answer {
    pub fn get(&self, name: &str) -> Option<&Term> {
        self.bindings
            .iter()
            .find(|(v, _)| &*v.name == name && v.stamp == 0)
            .map(|(_, t)| t)
    }

    /// Bindings with unbound variables renamed `_G1, _G2, ..` in order of
    /// first appearance.
    pub fn canonical_bindings(&self) -> Vec<(Var, Term)> {
        let mut seen: Vec<Var> = Vec::new();
        self.bindings
            .iter()
            .map(|(v, t)| (v.clone(), canonicalize(t, &mut seen)))
            .collect()
    }

    /// Single-line canonical form; equal for answers that differ only by
    /// variable renaming.
    pub fn canonical(&self) -> String {
        if self.bindings.is_empty() {
            return "true".to_string();
        }
        self.canonical_bindings()
            .iter()
            .map(|(v, t)| format!("{v} = {t}"))
            .collect::<Vec<_>>()
            .join(", ")
    }
}

fn canonicalize(t: &Term, seen: &mut Vec<Var>) -> Term {
    match t {
        Term::Var(v) => {
            let idx = match seen.iter().position(|s| s == v) {
                Some(i) => i,
                None => {
                    seen.push(v.clone());
                    seen.len() - 1
                }
            };
            Term::var(&format!("_G{}", idx + 1))
        }
        Term::Compound(f, args) => Term::Compound(
            f.clone(),
            args.iter().map(|a| canonicalize(a, seen)).collect(),
        ),
        _ => t.clone(),
    }
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.bindings.is_empty() {
            return f.write_str("true");
        }
        for (i, (v, t)) in self.canonical_bindings().iter().enumerate() {
            if i > 0 {
                f.write_str("\n")?;
            }
            write!(f, "{v} = {t}")?;
        }
        Ok(())
    }
}

pub fn is_builtin(name: &str, arity: usize) -> bool {
    matches!((name, arity), ("neq", 2) | ("lt", 2) | ("leq", 2))
}

/// Evaluates a comparison builtin. Builtins never bind variables.
///
/// `neq` succeeds when its arguments are not syntactically identical after
/// dereferencing. `lt` and `leq` compare integers, fail on other ground
/// terms and raise an instantiation error on unbound arguments.
pub fn call_builtin(name: &str, args: &[Term], s: &Substitution) -> Result<bool, EngineError> {
    let args: Vec<Term> = args.iter().map(|a| s.resolve(a)).collect();
    match (name, args.as_slice()) {
        ("neq", [a, b]) => Ok(a != b),
        ("lt" | "leq", [a, b]) => {
            if !a.is_ground() || !b.is_ground() {
                return Err(EngineError::Instantiation(
                    Term::compound(name, args.clone()).to_string(),
                ));
            }
            Ok(match (a, b) {
                (Term::Int(x), Term::Int(y)) => {
                    if name == "lt" {
                        x < y
                    } else {
                        x <= y
                    }
                }
                _ => false,
            })
        }
        _ => unreachable!("not a builtin: {name}/{}", args.len()),
    }
}

/// Where a program clause came from; part of a choice occurrence's identity.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) enum Origin {
    Program(usize),
    Hypothesis(u64),
    Module(Sym),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Side {
    Left,
    Right,
}

mod step {
    pub const HEAD: u8 = 0;
    pub const CHOICE_L: u8 = 1;
    pub const CHOICE_R: u8 = 2;
    pub const AND_L: u8 = 3;
    pub const AND_R: u8 = 4;
}

/// Persistent singly linked list.
#[derive(Debug)]
struct Node<T> {
    head: T,
    tail: List<T>,
}

#[derive(Debug)]
struct List<T>(Option<Rc<Node<T>>>);

impl<T> Clone for List<T> {
    fn clone(&self) -> Self {
        List(self.0.clone())
    }
}

impl<T> Default for List<T> {
    fn default() -> Self {
        List(None)
    }
}

impl<T> List<T> {
    fn push(&self, head: T) -> Self {
        List(Some(Rc::new(Node {
            head,
            tail: self.clone(),
        })))
    }

    fn iter(&self) -> impl Iterator<Item = &T> {
        let mut cur = self.0.as_deref();
        std::iter::from_fn(move || {
            let node = cur?;
            cur = node.tail.0.as_deref();
            Some(&node.head)
        })
    }
}

#[derive(Clone, Debug)]
struct Occurrence {
    origin: Origin,
    path: List<u8>,
}

type OccKey = (Origin, Vec<u8>);

impl Occurrence {
    fn root(origin: Origin) -> Self {
        Occurrence {
            origin,
            path: List::default(),
        }
    }

    fn child(&self, step: u8) -> Self {
        Occurrence {
            origin: self.origin.clone(),
            path: self.path.push(step),
        }
    }

    fn key(&self) -> OccKey {
        let mut path: Vec<u8> = self.path.iter().copied().collect();
        path.reverse();
        (self.origin.clone(), path)
    }
}

/// Hypotheses added by implication goals, most recent first, in front of
/// the base program.
#[derive(Clone, Debug)]
struct Hypothesis {
    clause: DFormula,
    id: u64,
}

type Ctx = List<Hypothesis>;

#[derive(Clone, Debug)]
enum Cursor {
    Hyp(Ctx),
    Base(usize),
}

#[derive(Clone, Debug)]
enum Frame {
    Ex {
        goal: GFormula,
        ctx: Ctx,
        depth: u32,
    },
    Bchain {
        clause: DFormula,
        atom: Term,
        ctx: Ctx,
        depth: u32,
        occ: Occurrence,
        expanding: List<Sym>,
    },
    /// Reached when the left side of a committed choice has succeeded.
    Commit {
        choice_point: Option<(usize, u64)>,
        record: Option<(OccKey, Side)>,
    },
}

type Cont = List<Frame>;

#[derive(Debug)]
enum Alt {
    Resume {
        cont: Cont,
        note: Option<String>,
    },
    Clauses {
        atom: Term,
        ctx: Ctx,
        cursor: Cursor,
        depth: u32,
        cont: Cont,
    },
}

#[derive(Debug)]
struct ChoicePoint {
    id: u64,
    disabled: bool,
    subst: Substitution,
    log: List<(OccKey, Side)>,
    depth_used: u32,
    alt: Alt,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Phase {
    Running,
    Answered,
    Done,
}

/// Bundles a program, a module registry and a configuration.
#[derive(Clone)]
pub struct Engine<'a> {
    program: &'a Program,
    registry: &'a ModuleRegistry,
    config: Config,
}

/// All answers of a run plus whether the depth limit cut any branch.
#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub answers: Vec<Answer>,
    pub depth_exhausted: bool,
}

impl Outcome {
    pub fn answer_set(&self) -> BTreeSet<String> {
        self.answers.iter().map(Answer::canonical).collect()
    }
}

impl<'a> Engine<'a> {
    pub fn new(program: &'a Program, registry: &'a ModuleRegistry) -> Self {
        Engine {
            program,
            registry,
            config: Config::default(),
        }
    }

    pub fn with_config(mut self, config: Config) -> Self {
        self.config = config;
        self
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    /// Lazily enumerates answers to `goal`, depth-first, left to right.
    pub fn solve(&self, goal: &GFormula) -> Solutions<'a> {
        let mut sols = Solutions::new(self.program, self.registry, self.config.clone());
        let (goal, vars) = freshen_goal(goal, &mut sols.fresh);
        sols.query_vars = vars;
        sols.cont = Cont::default().push(Frame::Ex {
            goal,
            ctx: Ctx::default(),
            depth: 1,
        });
        sols
    }

    /// Answers of backchaining on the single clause `d` against `atom`.
    pub fn backchain(&self, d: &DFormula, atom: &Term) -> Solutions<'a> {
        let mut sols = Solutions::new(self.program, self.registry, self.config.clone());
        let (goal, vars) = freshen_goal(&GFormula::Atom(atom.clone()), &mut sols.fresh);
        let GFormula::Atom(atom) = goal else {
            unreachable!()
        };
        sols.query_vars = vars;
        sols.cont = Cont::default().push(Frame::Bchain {
            clause: d.clone(),
            atom,
            ctx: Ctx::default(),
            depth: 1,
            occ: Occurrence::root(Origin::Hypothesis(0)),
            expanding: List::default(),
        });
        sols
    }

    /// Runs `goal` to completion, or until `max_answers` answers.
    pub fn run(&self, goal: &GFormula, max_answers: Option<usize>) -> Result<Outcome, EngineError> {
        let mut sols = self.solve(goal);
        let mut answers = Vec::new();
        while max_answers.is_none_or(|m| answers.len() < m) {
            match sols.next() {
                Some(a) => answers.push(a?),
                None => break,
            }
        }
        Ok(Outcome {
            answers,
            depth_exhausted: sols.depth_exhausted(),
        })
    }
}

/// Convenience wrapper around [`Engine::solve`].
pub fn solve<'a>(
    program: &'a Program,
    registry: &'a ModuleRegistry,
    goal: &GFormula,
    config: &Config,
) -> Solutions<'a> {
    Engine::new(program, registry)
        .with_config(config.clone())
        .solve(goal)
}

type TraceSink<'a> = Box<dyn FnMut(&str) + 'a>;

/// Pull-based answer stream. After the stream ends,
/// [`Solutions::depth_exhausted`] tells whether the depth limit cut the
/// search, in which case missing answers mean "unknown" rather than "no".
pub struct Solutions<'a> {
    program: &'a Program,
    registry: &'a ModuleRegistry,
    config: Config,
    fresh: FreshSource,
    query_vars: Vec<(Var, Var)>,
    subst: Substitution,
    cont: Cont,
    log: List<(OccKey, Side)>,
    depth_used: u32,
    stack: Vec<ChoicePoint>,
    phase: Phase,
    truncated: bool,
    next_id: u64,
    trace_sink: Option<TraceSink<'a>>,
}

impl<'a> Solutions<'a> {
    fn new(program: &'a Program, registry: &'a ModuleRegistry, config: Config) -> Self {
        Solutions {
            program,
            registry,
            config,
            fresh: FreshSource::new(),
            query_vars: Vec::new(),
            subst: Substitution::new(),
            cont: Cont::default(),
            log: List::default(),
            depth_used: 0,
            stack: Vec::new(),
            phase: Phase::Running,
            truncated: false,
            next_id: 1,
            trace_sink: None,
        }
    }

    /// Routes trace lines to `sink` instead of standard error.
    pub fn with_trace_sink(mut self, sink: impl FnMut(&str) + 'a) -> Self {
        self.trace_sink = Some(Box::new(sink));
        self
    }

    /// True once some branch was abandoned at the depth limit.
    pub fn depth_exhausted(&self) -> bool {
        self.truncated
    }

    fn emit(&mut self, line: &str) {
        match &mut self.trace_sink {
            Some(sink) => sink(line),
            None => eprintln!("{line}"),
        }
    }

    fn trace_line(&mut self, rule: u8, phase: &str, what: String, depth: u32) {
        let line = format!("RULE{rule} {phase} {what} depth={depth}");
        self.emit(&line);
    }

    fn new_id(&mut self) -> u64 {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    fn push_choice(&mut self, alt: Alt) -> (usize, u64) {
        let id = self.new_id();
        let idx = self.stack.len();
        self.stack.push(ChoicePoint {
            id,
            disabled: false,
            subst: self.subst.clone(),
            log: self.log.clone(),
            depth_used: self.depth_used,
            alt,
        });
        (idx, id)
    }

    fn answer(&self) -> Answer {
        Answer {
            bindings: self
                .query_vars
                .iter()
                .map(|(orig, fresh)| (orig.clone(), self.subst.resolve(&Term::Var(fresh.clone()))))
                .collect(),
            depth_used: self.depth_used,
        }
    }

    fn backtrack(&mut self) -> bool {
        while let Some(cp) = self.stack.pop() {
            if cp.disabled {
                continue;
            }
            self.subst = cp.subst;
            self.log = cp.log;
            self.depth_used = cp.depth_used;
            match cp.alt {
                Alt::Resume { cont, note } => {
                    if let Some(note) = note {
                        self.emit(&note);
                    }
                    self.cont = cont;
                    return true;
                }
                Alt::Clauses {
                    atom,
                    ctx,
                    cursor,
                    depth,
                    cont,
                } => {
                    if self.try_clauses(atom, ctx, cursor, depth, cont) {
                        return true;
                    }
                }
            }
        }
        false
    }

    fn clause_at(&self, cursor: &Cursor) -> Option<(DFormula, Origin, Cursor)> {
        match cursor {
            Cursor::Hyp(ctx) => {
                let node = ctx.0.as_ref()?;
                let next = if node.tail.0.is_some() {
                    Cursor::Hyp(node.tail.clone())
                } else {
                    Cursor::Base(0)
                };
                Some((
                    node.head.clause.clone(),
                    Origin::Hypothesis(node.head.id),
                    next,
                ))
            }
            Cursor::Base(i) => self
                .program
                .clauses
                .get(*i)
                .map(|c| (c.clone(), Origin::Program(*i), Cursor::Base(i + 1))),
        }
    }

    fn has_clause(&self, cursor: &Cursor) -> bool {
        match cursor {
            Cursor::Hyp(ctx) => ctx.0.is_some(),
            Cursor::Base(i) => *i < self.program.clauses.len(),
        }
    }

    /// Rule 7 from `cursor` on: select the next clause, keep the rest as an
    /// alternative.
    fn try_clauses(
        &mut self,
        atom: Term,
        ctx: Ctx,
        cursor: Cursor,
        depth: u32,
        cont: Cont,
    ) -> bool {
        let Some((clause, origin, next)) = self.clause_at(&cursor) else {
            return false;
        };
        if self.has_clause(&next) {
            self.push_choice(Alt::Clauses {
                atom: atom.clone(),
                ctx: ctx.clone(),
                cursor: next,
                depth,
                cont: cont.clone(),
            });
        }
        self.cont = cont.push(Frame::Bchain {
            clause,
            atom,
            ctx,
            depth,
            occ: Occurrence::root(origin),
            expanding: List::default(),
        });
        true
    }

    fn step(&mut self, frame: Frame, rest: Cont) -> Result<bool, EngineError> {
        match frame {
            Frame::Ex { goal, ctx, depth } => self.ex(goal, ctx, depth, rest),
            Frame::Bchain {
                clause,
                atom,
                ctx,
                depth,
                occ,
                expanding,
            } => self.bchain(clause, atom, ctx, depth, occ, expanding, rest),
            Frame::Commit {
                choice_point,
                record,
            } => {
                if let Some((idx, id)) = choice_point {
                    if let Some(cp) = self.stack.get_mut(idx) {
                        if cp.id == id {
                            cp.disabled = true;
                        }
                    }
                }
                if let Some((key, side)) = record {
                    match lookup(&self.log, &key) {
                        Some(recorded) if recorded != side => return Ok(false),
                        Some(_) => {}
                        None => self.log = self.log.push((key, side)),
                    }
                }
                self.cont = rest;
                Ok(true)
            }
        }
    }

    fn ex(
        &mut self,
        goal: GFormula,
        ctx: Ctx,
        depth: u32,
        rest: Cont,
    ) -> Result<bool, EngineError> {
        match goal {
            GFormula::Atom(atom) => {
                if let Some((name, arity)) = atom.functor() {
                    if is_builtin(name, arity) {
                        let ok = call_builtin(name, atom.args(), &self.subst)?;
                        self.cont = rest;
                        return Ok(ok);
                    }
                    if name == "mod" && arity == 1 {
                        if let Term::Const(m) = &atom.args()[0] {
                            return Err(EngineError::ModuleAsGoal(m.clone()));
                        }
                    }
                }
                if self.config.depth_limit.is_some_and(|limit| depth > limit) {
                    self.truncated = true;
                    return Ok(false);
                }
                self.depth_used = self.depth_used.max(depth);
                if self.config.trace {
                    let shown = self.subst.resolve(&atom).to_string();
                    self.trace_line(7, "ex", shown, depth);
                }
                let cursor = Cursor::Hyp(ctx.clone());
                let cursor = if self.has_clause(&cursor) {
                    cursor
                } else {
                    Cursor::Base(0)
                };
                Ok(self.try_clauses(atom, ctx, cursor, depth, rest))
            }
            GFormula::And(l, r) => {
                if self.config.trace {
                    let shown =
                        g_summary(&GFormula::And(l.clone(), r.clone()).apply_resolved(&self.subst));
                    self.trace_line(8, "ex", shown, depth);
                }
                self.cont = rest
                    .push(Frame::Ex {
                        goal: (*r).clone(),
                        ctx: ctx.clone(),
                        depth,
                    })
                    .push(Frame::Ex {
                        goal: (*l).clone(),
                        ctx,
                        depth,
                    });
                Ok(true)
            }
            GFormula::Exists(v, body) => {
                if self.config.trace {
                    self.trace_line(9, "ex", format!("exists {v}. .."), depth);
                }
                let nv = self.fresh.fresh(&v);
                let body = instantiate_goal(&body, &v, Term::Var(nv));
                self.cont = rest.push(Frame::Ex {
                    goal: body,
                    ctx,
                    depth,
                });
                Ok(true)
            }
            GFormula::Imp(d, g) => {
                if self.config.trace {
                    self.trace_line(10, "ex", format!("{} => ..", d_summary(&d)), depth);
                }
                for name in top_level_modrefs(&d) {
                    if !self.registry.contains(&name) {
                        return Err(ModuleError::Unknown(name).into());
                    }
                }
                let id = self.new_id();
                let ctx = ctx.push(Hypothesis {
                    clause: (*d).clone(),
                    id,
                });
                self.cont = rest.push(Frame::Ex {
                    goal: (*g).clone(),
                    ctx,
                    depth,
                });
                Ok(true)
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn bchain(
        &mut self,
        clause: DFormula,
        atom: Term,
        ctx: Ctx,
        depth: u32,
        occ: Occurrence,
        expanding: List<Sym>,
        rest: Cont,
    ) -> Result<bool, EngineError> {
        let frame = |clause: DFormula, occ: Occurrence| Frame::Bchain {
            clause,
            atom: atom.clone(),
            ctx: ctx.clone(),
            depth,
            occ,
            expanding: expanding.clone(),
        };
        match &clause {
            DFormula::Atom(head) => {
                if self.config.trace {
                    let shown = self.subst.resolve(head).to_string();
                    self.trace_line(1, "bchain", shown, depth);
                }
                match unify(head, &atom, &self.subst, self.config.occurs_check) {
                    Some(s) => {
                        self.subst = s;
                        self.cont = rest;
                        Ok(true)
                    }
                    None => Ok(false),
                }
            }
            DFormula::Imp(body, head) => {
                if self.config.trace {
                    self.trace_line(2, "bchain", d_summary(&clause), depth);
                }
                let head = frame((**head).clone(), occ.child(step::HEAD));
                let body = Frame::Ex {
                    goal: (**body).clone(),
                    ctx: ctx.clone(),
                    depth: depth + 1,
                };
                self.cont = match self.config.rule2_order {
                    Rule2Order::HeadFirst => rest.push(body).push(head),
                    Rule2Order::BodyFirst => rest.push(head).push(body),
                };
                Ok(true)
            }
            DFormula::All(..) => {
                if self.config.trace {
                    self.trace_line(3, "bchain", d_summary(&clause), depth);
                }
                let inst = rename_fresh(&clause, &mut self.fresh);
                self.cont = rest.push(frame(inst, occ));
                Ok(true)
            }
            DFormula::And(l, r) => {
                let note = self
                    .config
                    .trace
                    .then(|| format!("RULE5 bchain {} depth={depth}", d_summary(r)));
                self.push_choice(Alt::Resume {
                    cont: rest.push(frame((**r).clone(), occ.child(step::AND_R))),
                    note,
                });
                if self.config.trace {
                    self.trace_line(4, "bchain", d_summary(l), depth);
                }
                self.cont = rest.push(frame((**l).clone(), occ.child(step::AND_L)));
                Ok(true)
            }
            DFormula::Choice(l, r) => {
                let left = frame((**l).clone(), occ.child(step::CHOICE_L));
                let right = frame((**r).clone(), occ.child(step::CHOICE_R));
                let note_r = self
                    .config
                    .trace
                    .then(|| format!("RULE6 bchain {} depth={depth}", d_summary(r)));
                let key = (self.config.commit_mode == CommitMode::Global).then(|| occ.key());

                if let Some(side) = key.as_ref().and_then(|k| lookup(&self.log, k)) {
                    let (chosen, shown) = match side {
                        Side::Left => (left, l),
                        Side::Right => (right, r),
                    };
                    if self.config.trace {
                        self.trace_line(6, "bchain", d_summary(shown), depth);
                    }
                    self.cont = rest.push(chosen);
                    return Ok(true);
                }

                let prune_on_entry = self.config.commit_mode != CommitMode::Off
                    && self.config.commit_trigger == CommitTrigger::Entry;
                let left_cont = match self.config.commit_mode {
                    CommitMode::Off => {
                        self.push_choice(Alt::Resume {
                            cont: rest.push(right),
                            note: note_r,
                        });
                        rest.push(left)
                    }
                    _ if prune_on_entry => rest.push(left),
                    CommitMode::Call | CommitMode::Global => {
                        let right_cont = match &key {
                            Some(k) => rest.push(Frame::Commit {
                                choice_point: None,
                                record: Some((k.clone(), Side::Right)),
                            }),
                            None => rest.clone(),
                        };
                        let cp = self.push_choice(Alt::Resume {
                            cont: right_cont.push(right),
                            note: note_r,
                        });
                        rest.push(Frame::Commit {
                            choice_point: Some(cp),
                            record: key.map(|k| (k, Side::Left)),
                        })
                        .push(left)
                    }
                };
                if self.config.trace {
                    self.trace_line(6, "bchain", d_summary(l), depth);
                }
                self.cont = left_cont;
                Ok(true)
            }
            DFormula::ModRef(name) => {
                if expanding.iter().any(|m| m == name) {
                    return Err(ModuleError::Cyclic(name.clone()).into());
                }
                match self.registry.resolve(name)? {
                    None => Ok(false),
                    Some(body) => {
                        self.cont = rest.push(Frame::Bchain {
                            clause: body,
                            atom,
                            ctx,
                            depth,
                            occ: Occurrence::root(Origin::Module(name.clone())),
                            expanding: expanding.push(name.clone()),
                        });
                        Ok(true)
                    }
                }
            }
        }
    }
}

fn lookup(log: &List<(OccKey, Side)>, key: &OccKey) -> Option<Side> {
    log.iter().find(|(k, _)| k == key).map(|(_, s)| *s)
}

/// Module names reachable in `d` without entering a clause body.
fn top_level_modrefs(d: &DFormula) -> Vec<Sym> {
    fn go(d: &DFormula, out: &mut Vec<Sym>) {
        match d {
            DFormula::ModRef(m) => out.push(m.clone()),
            DFormula::All(_, d) | DFormula::Imp(_, d) => go(d, out),
            DFormula::Choice(l, r) | DFormula::And(l, r) => {
                go(l, out);
                go(r, out);
            }
            DFormula::Atom(_) => {}
        }
    }
    let mut out = Vec::new();
    go(d, &mut out);
    out
}

impl Iterator for Solutions<'_> {
    type Item = Result<Answer, EngineError>;

    fn next(&mut self) -> Option<Self::Item> {
        match self.phase {
            Phase::Done => return None,
            Phase::Answered => {
                if !self.backtrack() {
                    self.phase = Phase::Done;
                    return None;
                }
                self.phase = Phase::Running;
            }
            Phase::Running => {}
        }
        loop {
            let Some(node) = self.cont.0.take() else {
                self.phase = Phase::Answered;
                return Some(Ok(self.answer()));
            };
            let frame = node.head.clone();
            let rest = node.tail.clone();
            match self.step(frame, rest) {
                Ok(true) => {}
                Ok(false) => {
                    if !self.backtrack() {
                        self.phase = Phase::Done;
                        return None;
                    }
                }
                Err(e) => {
                    self.phase = Phase::Done;
                    return Some(Err(e));
                }
            }
        }
    }
}
