use std::path::PathBuf;

use mutexlog::check::{cross_check, CheckConfig};
use mutexlog::engine::CommitTrigger;
use mutexlog::{
    enumerate_answers, parse_goal, parse_program, parse_term, CommitMode, Config, Engine,
    EngineError, ModuleError, ModuleRegistry, Program, Status,
};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn sorting_registry() -> ModuleRegistry {
    ModuleRegistry::new()
        .with_load_paths([fixtures()])
        .autoload([mutexlog::DFormula::modref("lists")].iter())
        .unwrap()
}

fn lists_program() -> (Program, ModuleRegistry) {
    let reg = sorting_registry();
    (Program::new(reg.clauses("lists").unwrap().to_vec()), reg)
}

fn run(p: &Program, reg: &ModuleRegistry, goal: &str, mode: CommitMode) -> Vec<String> {
    Engine::new(p, reg)
        .with_config(Config::default().commit_mode(mode))
        .run(&parse_goal(goal).unwrap(), None)
        .unwrap()
        .answers
        .iter()
        .map(|a| a.canonical())
        .collect()
}

#[test]
fn quicksort_through_module_implication() {
    let reg = sorting_registry();
    let p = Program::default();
    let all = run(
        &p,
        &reg,
        "mod(lists) => qsort([2,60,3,5],L)",
        CommitMode::Call,
    );
    assert_eq!(all, vec!["L = [2,3,5,60]"]);
}

#[test]
fn heapsort_agrees_with_quicksort() {
    let reg = sorting_registry();
    let p = Program::new(reg.clauses("heapsort").unwrap().to_vec());
    let got = run(&p, &reg, "hsort([5,3,9,1,3],L)", CommitMode::Call);
    assert_eq!(got, vec!["L = [1,3,3,5,9]"]);
}

#[test]
fn memb_answers_in_order() {
    let (p, reg) = lists_program();
    assert_eq!(
        run(&p, &reg, "memb(X,[1,2])", CommitMode::Call),
        vec!["X = 1"]
    );
    assert_eq!(
        run(&p, &reg, "memb(X,[1,2])", CommitMode::Off),
        vec!["X = 1", "X = 2"]
    );
    assert_eq!(
        run(&p, &reg, "memb(1,[2,1])", CommitMode::Call),
        vec!["true"]
    );
}

#[test]
fn append_choice_by_backchaining() {
    let (p, reg) = lists_program();
    let append = reg.clauses("lists").unwrap()[1].clone();
    let atom = parse_term("append(A,B,[1,2])").unwrap();
    let answers = |mode| -> Vec<String> {
        Engine::new(&p, &reg)
            .with_config(Config::default().commit_mode(mode))
            .backchain(&append, &atom)
            .map(|a| a.unwrap().canonical())
            .collect()
    };
    assert_eq!(answers(CommitMode::Call), vec!["A = [], B = [1,2]"]);
    assert_eq!(
        answers(CommitMode::Off),
        vec!["A = [], B = [1,2]", "A = [1], B = [2]", "A = [1,2], B = []"]
    );
}

#[test]
fn sort_module_discriminates_commitment_scope() {
    let reg = sorting_registry()
        .load_path(&fixtures().join("sort.mw"))
        .unwrap()
        .0;
    let p = Program::new(reg.clauses("sort").unwrap().to_vec());
    let q = "qsort([2,1],L1), hsort([2,1],L2)";
    assert_eq!(
        run(&p, &reg, q, CommitMode::Call),
        vec!["L1 = [1,2], L2 = [1,2]"]
    );
    assert!(run(&p, &reg, q, CommitMode::Global).is_empty());
    assert!(!run(&p, &reg, q, CommitMode::Off).is_empty());
}

#[test]
fn oracle_examples() {
    let p = Program::new(parse_program("q.").unwrap().clauses);
    let v = enumerate_answers(&p, &parse_goal("q").unwrap(), 2).unwrap();
    assert_eq!(v.status, Status::Provable);
    assert_eq!(v.answers.len(), 1);
    let (lists, _) = lists_program();
    let memb = Program::new(lists.clauses[..1].to_vec());
    let v = enumerate_answers(&memb, &parse_goal("memb(X,[1,2])").unwrap(), 8).unwrap();
    assert_eq!(
        v.answers.iter().map(|a| a.canonical()).collect::<Vec<_>>(),
        ["X = 1", "X = 2"]
    );
}

#[test]
fn depth_limited_search_reports_unknown() {
    let (p, reg) = lists_program();
    let out = Engine::new(&p, &reg)
        .with_config(
            Config::default()
                .commit_mode(CommitMode::Off)
                .depth_limit(Some(2)),
        )
        .run(&parse_goal("memb(X,[1,2,3])").unwrap(), None)
        .unwrap();
    assert_eq!(out.answer_set().len(), 2);
    assert!(out.depth_exhausted);
}

#[test]
fn unknown_module_is_an_error() {
    let p = Program::default();
    let reg = ModuleRegistry::new();
    let err = Engine::new(&p, &reg)
        .run(&parse_goal("mod(missing) => p").unwrap(), None)
        .unwrap_err();
    assert!(matches!(err, EngineError::Module(ModuleError::Unknown(ref m)) if &**m == "missing"));
}

#[test]
fn instantiation_error_propagates() {
    let reg = sorting_registry();
    let p = Program::default();
    let err = Engine::new(&p, &reg)
        .run(&parse_goal("mod(lists) => qsort([X,1],L)").unwrap(), None)
        .unwrap_err();
    assert!(matches!(err, EngineError::Instantiation(_)));
}

#[test]
fn cross_check_passes_and_catches_early_commitment() {
    let cfg = CheckConfig {
        corpus_size: 60,
        ..CheckConfig::default()
    };
    let report = cross_check(&cfg);
    assert!(report.passed(), "{report}");

    let faulty = cross_check(&CheckConfig {
        commit_trigger: CommitTrigger::Entry,
        ..cfg
    });
    assert!(!faulty.passed());
    let repro = faulty.mismatches[0].reproduction();
    assert!(repro.contains("% query: "));
}

#[test]
fn cross_check_is_deterministic() {
    let cfg = CheckConfig {
        corpus_size: 1,
        seed: 7,
        ..CheckConfig::default()
    };
    assert_eq!(cross_check(&cfg).to_string(), cross_check(&cfg).to_string());
}
