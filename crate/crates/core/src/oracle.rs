//! Bounded-depth reference prover and random instance generator.
//!
//! The prover enumerates every answer of a goal by plain recursion over a
//! list of pending tasks. It shares unification, renaming and the builtins
//! with the engine but none of the engine's search machinery, so the two can
//! be checked against each other.

use std::collections::BTreeSet;
use std::rc::Rc;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ast::{
    desugar_clause, freshen_goal, instantiate_goal, rename_fresh, DFormula, FreshSource, GFormula,
    Program, Sym, Term,
};
use crate::engine::{call_builtin, is_builtin, Answer, EngineError, Rule2Order};
use crate::modsys::{ModuleError, ModuleRegistry};
use crate::unify::{unify, OccursCheck, Substitution};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Provable,
    NotProvableWithinDepth,
    /// No answer found, but the search was cut by the depth bound or the
    /// step budget.
    ExhaustedUnknown,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleVerdict {
    pub status: Status,
    /// Distinct answers, sorted by canonical form.
    pub answers: Vec<Answer>,
}

impl OracleVerdict {
    /// Whether the answer set can be trusted as complete for the bound.
    pub fn is_decisive(&self) -> bool {
        self.status != Status::ExhaustedUnknown
    }

    pub fn answer_set(&self) -> BTreeSet<String> {
        self.answers.iter().map(Answer::canonical).collect()
    }
}

/// How the prover treats `&` in clause position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum OracleMode {
    /// Both sides are tried, as for `,`.
    #[default]
    NoCommit,
    /// Soft-cut per backchaining call: the right side is used only when the
    /// left side has no solution at all.
    CommitCall,
}

#[derive(Clone, Debug)]
pub struct OracleConfig {
    pub mode: OracleMode,
    pub rule2_order: Rule2Order,
    pub occurs_check: OccursCheck,
    /// Search steps before giving up with [`Status::ExhaustedUnknown`].
    pub step_budget: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            mode: OracleMode::NoCommit,
            rule2_order: Rule2Order::HeadFirst,
            occurs_check: OccursCheck::On,
            step_budget: 5_000_000,
        }
    }
}

/// All answers to `g` with proofs of depth at most `depth`, choices read as
/// plain conjunctions.
pub fn enumerate_answers(
    p: &Program,
    g: &GFormula,
    depth: u32,
) -> Result<OracleVerdict, EngineError> {
    enumerate_with(
        p,
        &ModuleRegistry::new(),
        g,
        depth,
        &OracleConfig::default(),
    )
}

pub fn provable(p: &Program, g: &GFormula, depth: u32) -> Result<Status, EngineError> {
    enumerate_answers(p, g, depth).map(|v| v.status)
}

pub fn enumerate_with(
    p: &Program,
    registry: &ModuleRegistry,
    g: &GFormula,
    depth: u32,
    cfg: &OracleConfig,
) -> Result<OracleVerdict, EngineError> {
    assert!(depth >= 1, "depth bound must be positive");
    let mut fresh = FreshSource::new();
    let (goal, vars) = freshen_goal(g, &mut fresh);
    let mut search = Search {
        program: p,
        registry,
        cfg,
        limit: depth,
        fresh,
        steps: 0,
        truncated: false,
        over_budget: false,
    };
    let mut found = Vec::new();
    let tasks = Tasks::default().push(Task::Ex {
        goal,
        hyps: Hyps::default(),
        depth: 1,
    });
    search.run(&tasks, Substitution::new(), 0, &mut found)?;

    if search.over_budget {
        return Ok(OracleVerdict {
            status: Status::ExhaustedUnknown,
            answers: Vec::new(),
        });
    }
    let mut answers: Vec<(String, Answer)> = found
        .into_iter()
        .map(|(s, used)| {
            let a = Answer {
                bindings: vars
                    .iter()
                    .map(|(orig, v)| (orig.clone(), s.resolve(&Term::Var(v.clone()))))
                    .collect(),
                depth_used: used,
            };
            (a.canonical(), a)
        })
        .collect();
    // Keep the shallowest proof of each answer.
    answers.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.depth_used.cmp(&b.1.depth_used)));
    answers.dedup_by(|a, b| a.0 == b.0);
    let answers: Vec<Answer> = answers.into_iter().map(|(_, a)| a).collect();
    let status = if !answers.is_empty() {
        Status::Provable
    } else if search.truncated {
        Status::ExhaustedUnknown
    } else {
        Status::NotProvableWithinDepth
    };
    Ok(OracleVerdict { status, answers })
}

#[derive(Clone)]
struct Cell<T>(Option<Rc<(T, Cell<T>)>>);

impl<T> Default for Cell<T> {
    fn default() -> Self {
        Cell(None)
    }
}

impl<T> Cell<T> {
    fn push(&self, item: T) -> Self
    where
        T: Clone,
    {
        Cell(Some(Rc::new((item, self.clone()))))
    }
}

type Hyps = Cell<DFormula>;
type Tasks = Cell<Task>;

#[derive(Clone)]
enum Task {
    Ex {
        goal: GFormula,
        hyps: Hyps,
        depth: u32,
    },
    Bc {
        clause: DFormula,
        atom: Term,
        hyps: Hyps,
        depth: u32,
        modules: Vec<Sym>,
    },
}

struct Search<'a> {
    program: &'a Program,
    registry: &'a ModuleRegistry,
    cfg: &'a OracleConfig,
    limit: u32,
    fresh: FreshSource,
    steps: u64,
    truncated: bool,
    over_budget: bool,
}

type Found = Vec<(Substitution, u32)>;

impl Search<'_> {
    fn run(
        &mut self,
        tasks: &Tasks,
        s: Substitution,
        used: u32,
        out: &mut Found,
    ) -> Result<(), EngineError> {
        self.steps += 1;
        if self.steps > self.cfg.step_budget {
            self.over_budget = true;
        }
        if self.over_budget {
            return Ok(());
        }
        let Some(node) = &tasks.0 else {
            out.push((s, used));
            return Ok(());
        };
        let (task, rest) = (&node.0, &node.1);
        match task {
            Task::Ex { goal, hyps, depth } => self.goal(goal, hyps, *depth, rest, s, used, out),
            Task::Bc {
                clause,
                atom,
                hyps,
                depth,
                modules,
            } => self.clause(clause, atom, hyps, *depth, modules, rest, s, used, out),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn goal(
        &mut self,
        goal: &GFormula,
        hyps: &Hyps,
        depth: u32,
        rest: &Tasks,
        s: Substitution,
        used: u32,
        out: &mut Found,
    ) -> Result<(), EngineError> {
        match goal {
            GFormula::Atom(atom) => {
                let (name, arity) = atom.functor().expect("atomic goal");
                if is_builtin(name, arity) {
                    if call_builtin(name, atom.args(), &s)? {
                        self.run(rest, s, used, out)?;
                    }
                    return Ok(());
                }
                if name == "mod" && arity == 1 {
                    if let Term::Const(m) = &atom.args()[0] {
                        return Err(EngineError::ModuleAsGoal(m.clone()));
                    }
                }
                if depth > self.limit {
                    self.truncated = true;
                    return Ok(());
                }
                let used = used.max(depth);
                let mut candidates = Vec::new();
                let mut h = hyps.0.clone();
                while let Some(node) = h {
                    candidates.push(node.0.clone());
                    h = node.1 .0.clone();
                }
                candidates.extend(self.program.clauses.iter().cloned());
                for clause in candidates {
                    let t = rest.push(Task::Bc {
                        clause,
                        atom: atom.clone(),
                        hyps: hyps.clone(),
                        depth,
                        modules: Vec::new(),
                    });
                    self.run(&t, s.clone(), used, out)?;
                }
                Ok(())
            }
            GFormula::And(l, r) => {
                let t = rest
                    .push(Task::Ex {
                        goal: (**r).clone(),
                        hyps: hyps.clone(),
                        depth,
                    })
                    .push(Task::Ex {
                        goal: (**l).clone(),
                        hyps: hyps.clone(),
                        depth,
                    });
                self.run(&t, s, used, out)
            }
            GFormula::Imp(d, g) => {
                let mut refs = Vec::new();
                crate::modsys::collect_modrefs(&strip_bodies(d), &mut refs);
                if let Some(missing) = refs.into_iter().find(|m| !self.registry.contains(m)) {
                    return Err(ModuleError::Unknown(missing).into());
                }
                let t = rest.push(Task::Ex {
                    goal: (**g).clone(),
                    hyps: hyps.push((**d).clone()),
                    depth,
                });
                self.run(&t, s, used, out)
            }
            GFormula::Exists(v, g) => {
                let nv = self.fresh.fresh(v);
                let t = rest.push(Task::Ex {
                    goal: instantiate_goal(g, v, Term::Var(nv)),
                    hyps: hyps.clone(),
                    depth,
                });
                self.run(&t, s, used, out)
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn clause(
        &mut self,
        clause: &DFormula,
        atom: &Term,
        hyps: &Hyps,
        depth: u32,
        modules: &[Sym],
        rest: &Tasks,
        s: Substitution,
        used: u32,
        out: &mut Found,
    ) -> Result<(), EngineError> {
        let bc = |clause: &DFormula, modules: Vec<Sym>| Task::Bc {
            clause: clause.clone(),
            atom: atom.clone(),
            hyps: hyps.clone(),
            depth,
            modules,
        };
        match clause {
            DFormula::Atom(head) => match unify(head, atom, &s, self.cfg.occurs_check) {
                Some(s) => self.run(rest, s, used, out),
                None => Ok(()),
            },
            DFormula::Imp(body, head) => {
                let head = bc(head, modules.to_vec());
                let body = Task::Ex {
                    goal: (**body).clone(),
                    hyps: hyps.clone(),
                    depth: depth + 1,
                };
                let t = match self.cfg.rule2_order {
                    Rule2Order::HeadFirst => rest.push(body).push(head),
                    Rule2Order::BodyFirst => rest.push(head).push(body),
                };
                self.run(&t, s, used, out)
            }
            DFormula::All(..) => {
                let inst = rename_fresh(clause, &mut self.fresh);
                self.run(&rest.push(bc(&inst, modules.to_vec())), s, used, out)
            }
            DFormula::And(l, r) => {
                self.run(&rest.push(bc(l, modules.to_vec())), s.clone(), used, out)?;
                self.run(&rest.push(bc(r, modules.to_vec())), s, used, out)
            }
            DFormula::Choice(l, r) => match self.cfg.mode {
                OracleMode::NoCommit => {
                    self.run(&rest.push(bc(l, modules.to_vec())), s.clone(), used, out)?;
                    self.run(&rest.push(bc(r, modules.to_vec())), s, used, out)
                }
                OracleMode::CommitCall => {
                    let mut left = Vec::new();
                    let only_left = Tasks::default().push(bc(l, modules.to_vec()));
                    self.run(&only_left, s.clone(), used, &mut left)?;
                    if left.is_empty() {
                        self.run(&rest.push(bc(r, modules.to_vec())), s, used, out)
                    } else {
                        for (s, used) in left {
                            self.run(rest, s, used, out)?;
                        }
                        Ok(())
                    }
                }
            },
            DFormula::ModRef(m) => {
                if modules.contains(m) {
                    return Err(ModuleError::Cyclic(m.clone()).into());
                }
                match self.registry.resolve(m)? {
                    None => Ok(()),
                    Some(body) => {
                        let mut modules = modules.to_vec();
                        modules.push(m.clone());
                        self.run(&rest.push(bc(&body, modules)), s, used, out)
                    }
                }
            }
        }
    }
}

/// `d` with clause bodies removed, so only module references in clause
/// position remain visible.
fn strip_bodies(d: &DFormula) -> DFormula {
    match d {
        DFormula::Imp(_, h) => strip_bodies(h),
        DFormula::All(v, b) => DFormula::all(v.clone(), strip_bodies(b)),
        DFormula::Choice(l, r) => DFormula::choice(strip_bodies(l), strip_bodies(r)),
        DFormula::And(l, r) => DFormula::and(strip_bodies(l), strip_bodies(r)),
        DFormula::Atom(_) | DFormula::ModRef(_) => d.clone(),
    }
}

/// Predicate signature of generated instances, lowest stratum first.
const SIGNATURE: [(&str, usize); 4] = [("p", 1), ("q", 1), ("r", 2), ("s", 1)];
const CONSTANTS: [&str; 2] = ["a", "b"];
const VARS: [&str; 3] = ["X", "Y", "Z"];
/// Body atoms per program. Solving bodies before heads costs roughly
/// (body atoms)^depth steps, so this keeps both clause orders tractable.
const MAX_BODY_ATOMS: usize = 2;

/// A small random program and goal, deterministic in `seed`.
///
/// Programs have at most `size` (capped at 6) clauses over a fixed
/// signature. A clause body only calls predicates from its own stratum or
/// later ones, and calls its own predicate only as its last atom. Choice
/// statements pair two clauses for the same predicate. The first statement
/// is a choice with probability 1/2.
pub fn random_instance(seed: u64, size: usize) -> (Program, GFormula) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let size = size.clamp(1, 6);
    let mut clauses = Vec::new();
    let mut used = 0;
    let mut choice_preds = Vec::new();
    let mut body_budget = MAX_BODY_ATOMS;
    while used < size {
        let pred = rng.random_range(0..SIGNATURE.len());
        let choice = size - used >= 2 && rng.random_bool(0.5);
        if choice {
            let l = random_clause(&mut rng, pred, &mut body_budget);
            let r = random_clause(&mut rng, pred, &mut body_budget);
            clauses.push(DFormula::choice(l, r));
            choice_preds.push(pred);
            used += 2;
        } else {
            clauses.push(random_clause(&mut rng, pred, &mut body_budget));
            used += 1;
        }
    }

    let pred = match choice_preds.choose(&mut rng) {
        Some(&p) if rng.random_bool(0.8) => p,
        _ => rng.random_range(0..SIGNATURE.len()),
    };
    let mut goal = GFormula::atom(random_atom(&mut rng, pred, &VARS, 0.85));
    if rng.random_bool(0.15) {
        let other = rng.random_range(0..SIGNATURE.len());
        goal = GFormula::and(
            goal,
            GFormula::atom(random_atom(&mut rng, other, &VARS, 0.6)),
        );
    }
    if rng.random_bool(0.15) {
        let hyp_pred = rng.random_range(0..SIGNATURE.len());
        let fact = random_atom(&mut rng, hyp_pred, &[], 0.0);
        goal = GFormula::imp(DFormula::atom(fact), goal);
    }
    (Program::new(clauses), goal)
}

fn random_term(rng: &mut ChaCha8Rng, vars: &[&str], var_bias: f64, depth: u32) -> Term {
    if !vars.is_empty() && rng.random_bool(var_bias) {
        return Term::var(vars.choose(rng).expect("nonempty"));
    }
    if depth < 2 && rng.random_bool(0.25) {
        return Term::compound("f", vec![random_term(rng, vars, var_bias, depth + 1)]);
    }
    Term::constant(CONSTANTS.choose(rng).expect("nonempty"))
}

fn random_atom(rng: &mut ChaCha8Rng, pred: usize, vars: &[&str], var_bias: f64) -> Term {
    let (name, arity) = SIGNATURE[pred];
    let args = (0..arity)
        .map(|_| random_term(rng, vars, var_bias, 1))
        .collect();
    Term::compound(name, args)
}

fn random_clause(rng: &mut ChaCha8Rng, pred: usize, body_budget: &mut usize) -> DFormula {
    let head = random_atom(rng, pred, &VARS, 0.5);
    let n_body = (*[0usize, 0, 1, 1, 2].choose(rng).expect("nonempty")).min(*body_budget);
    *body_budget -= n_body;
    let mut body = Vec::new();
    for i in 0..n_body {
        let last = i + 1 == n_body;
        let lo = if last { pred } else { pred + 1 };
        if lo >= SIGNATURE.len() {
            break;
        }
        let callee = rng.random_range(lo..SIGNATURE.len());
        body.push(GFormula::atom(random_atom(rng, callee, &VARS, 0.6)));
    }
    desugar_clause(head, GFormula::conj(body)).expect("generated heads are atoms")
}
