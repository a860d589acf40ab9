//! Shared setup for the benchmarks.

use std::path::PathBuf;

use mutexlog::{DFormula, ModuleRegistry, Program, Term};

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures")
}

/// Registry holding `lists` and every module it references.
pub fn sorting_registry() -> ModuleRegistry {
    ModuleRegistry::new()
        .with_load_paths([fixtures_dir()])
        .autoload([DFormula::modref("lists")].iter())
        .expect("fixtures load")
}

/// The `lists` module's clauses as a base program.
pub fn lists_program(reg: &ModuleRegistry) -> Program {
    Program::new(reg.clauses("lists").expect("lists loaded").to_vec())
}

/// `n` integers in a scrambled but deterministic order.
pub fn scrambled(n: i64) -> Term {
    let values: Vec<i64> = (0..n).map(|i| (i * 37 + 11) % 101).collect();
    Term::int_list(&values)
}
