//! Horn-clause logic programming with implication goals and
//! choice-conjunctive clauses.
//!
//! Programs are built from goals `G ::= A | G, G | D => G | exists X. G`
//! and clauses `D ::= A | G :- D | all X. D | D & D | D, D | mod(name)`.
//! A clause `D0 & D1` offers two mutually exclusive alternatives; the
//! engine commits to the first one that succeeds. Modules are named clause
//! sets that a goal can load for its own scope with `mod(name) => G`.
//!
//! ```
//! use mutexlog::{parse_goal, parse_program, Engine, ModuleRegistry, Program};
//!
//! let m = parse_program("memb(X,[X|_]) & memb(X,[Y|T]) :- neq(X,Y), memb(X,T).").unwrap();
//! let program = Program::new(m.clauses);
//! let registry = ModuleRegistry::new();
//! let out = Engine::new(&program, &registry)
//!     .run(&parse_goal("memb(X,[1,2])").unwrap(), None)
//!     .unwrap();
//! assert_eq!(out.answers.len(), 1);
//! assert_eq!(out.answers[0].to_string(), "X = 1");
//! ```

pub mod ast;
pub mod check;
pub mod engine;
pub mod lexer;
pub mod modsys;
pub mod oracle;
pub mod parser;
pub mod printer;
pub mod unify;

pub use ast::{
    apply_subst, desugar_clause, free_vars, rename_fresh, ClauseError, DFormula, FreshSource,
    GFormula, Program, Sym, Term, Var,
};
pub use engine::{
    solve, Answer, CommitMode, Config, Engine, EngineError, Outcome, Rule2Order, Solutions,
};
pub use modsys::{ModuleError, ModuleRegistry};
pub use oracle::{enumerate_answers, provable, random_instance, OracleVerdict, Status};
pub use parser::{parse_goal, parse_program, parse_term, print_formula, ModuleFile, ParseError};
pub use unify::{unify, OccursCheck, Substitution};
