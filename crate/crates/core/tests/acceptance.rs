//! Acceptance criteria AC-1 through AC-8. Prints one PASS/FAIL line per
//! criterion and exits nonzero if any fails.

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use mutexlog::check::{cross_check, CheckConfig, CheckReport};
use mutexlog::oracle::{enumerate_with, OracleConfig, OracleMode};
use mutexlog::{
    parse_goal, parse_program, random_instance, unify, CommitMode, Config, DFormula, Engine,
    GFormula, ModuleRegistry, OccursCheck, Program, Substitution, Term, Var,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(format!("{name}.mw"))
}

fn registry(names: &[&str]) -> ModuleRegistry {
    names.iter().fold(ModuleRegistry::new(), |reg, n| {
        reg.load_path(&fixture(n)).expect("fixture loads").0
    })
}

fn goal(src: &str) -> GFormula {
    parse_goal(src).expect("goal parses")
}

fn answers(p: &Program, reg: &ModuleRegistry, g: &str, mode: CommitMode) -> Vec<String> {
    Engine::new(p, reg)
        .with_config(Config::default().commit_mode(mode))
        .run(&goal(g), None)
        .expect("no engine error")
        .answers
        .iter()
        .map(|a| a.canonical())
        .collect()
}

fn oracle_answers(
    p: &Program,
    reg: &ModuleRegistry,
    g: &str,
    mode: OracleMode,
) -> BTreeSet<String> {
    let cfg = OracleConfig {
        mode,
        ..OracleConfig::default()
    };
    enumerate_with(p, reg, &goal(g), 8, &cfg)
        .expect("no oracle error")
        .answer_set()
}

/// Base program made of the `lists` module's clauses.
fn lists_program() -> (Program, ModuleRegistry) {
    let reg = registry(&["lists", "quicksort", "heapsort"]);
    let p = Program::new(reg.clauses("lists").expect("lists loaded").to_vec());
    (p, reg)
}

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        ok,
        detail: detail.into(),
    }
}

fn ac1() -> Outcome {
    let reg = registry(&["lists", "quicksort"]);
    let p = Program::default();
    let first = Engine::new(&p, &reg)
        .solve(&goal("mod(lists) => qsort([2,60,3,5],L)"))
        .next();
    match first {
        Some(Ok(a)) => {
            let got = a.canonical();
            outcome(got == "L = [2,3,5,60]", format!("first answer {got}"))
        }
        other => outcome(false, format!("no first answer: {other:?}")),
    }
}

fn ac2() -> Outcome {
    let (p, reg) = lists_program();
    let call = answers(&p, &reg, "memb(X,[1,2])", CommitMode::Call);
    let off = answers(&p, &reg, "memb(X,[1,2])", CommitMode::Off);
    let oracle_off = oracle_answers(&p, &reg, "memb(X,[1,2])", OracleMode::NoCommit);
    let oracle_call = oracle_answers(&p, &reg, "memb(X,[1,2])", OracleMode::CommitCall);
    let later = |mode| answers(&p, &reg, "memb(1,[2,1])", mode).len();
    let ok = call == ["X = 1"]
        && off == ["X = 1", "X = 2"]
        && oracle_call.len() == 1
        && oracle_off.len() == 2
        && later(CommitMode::Call) >= 1
        && later(CommitMode::Off) >= 1;
    outcome(
        ok,
        format!(
            "call {} answer(s), off {} answer(s), memb(1,[2,1]) call {} off {}",
            call.len(),
            off.len(),
            later(CommitMode::Call),
            later(CommitMode::Off)
        ),
    )
}

fn ac3() -> Outcome {
    let (p, reg) = lists_program();
    let q = "append(A,B,[1,2])";
    let call = answers(&p, &reg, q, CommitMode::Call);
    let off = answers(&p, &reg, q, CommitMode::Off);
    let oracle_off = oracle_answers(&p, &reg, q, OracleMode::NoCommit);
    let expected_off: BTreeSet<String> =
        ["A = [], B = [1,2]", "A = [1], B = [2]", "A = [1,2], B = []"]
            .iter()
            .map(|s| s.to_string())
            .collect();
    let ok = call == ["A = [], B = [1,2]"]
        && off.len() == 3
        && off.iter().cloned().collect::<BTreeSet<_>>() == expected_off
        && oracle_off == expected_off;
    outcome(
        ok,
        format!("call {} answer(s), off {} answer(s)", call.len(), off.len()),
    )
}

fn corpus() -> (CheckReport, Duration) {
    let start = Instant::now();
    let report = cross_check(&CheckConfig::default());
    (report, start.elapsed())
}

fn ac4(report: &CheckReport, elapsed: Duration) -> Outcome {
    let bad = report
        .mismatches
        .iter()
        .filter(|m| matches!(m.property, "off = oracle" | "body-first = oracle" | "error"))
        .count();
    for m in report
        .mismatches
        .iter()
        .filter(|m| m.property != "global <= call")
    {
        eprintln!("{}", m.reproduction());
    }
    outcome(
        bad == 0 && report.instances == 200 && elapsed < Duration::from_secs(60),
        format!(
            "{} instances, {} decisive, {bad} mismatches",
            report.instances, report.decisive
        ),
    )
}

fn ac5() -> Outcome {
    let reg = registry(&["sort", "quicksort", "heapsort"]);
    let p = Program::new(reg.clauses("sort").expect("sort loaded").to_vec());
    let q = goal("qsort([2,1],L1), hsort([2,1],L2)");
    let run = |mode| {
        let lines = RefCell::new(Vec::new());
        let got: Vec<_> = Engine::new(&p, &reg)
            .with_config(Config::default().commit_mode(mode).trace(true))
            .solve(&q)
            .with_trace_sink(|l| lines.borrow_mut().push(l.to_string()))
            .map(|a| a.expect("no engine error").canonical())
            .collect();
        (got, lines.into_inner())
    };
    let (call, call_trace) = run(CommitMode::Call);
    let (global, global_trace) = run(CommitMode::Global);
    let enters = |trace: &[String], m: &str| {
        trace
            .iter()
            .position(|l| l.starts_with("RULE6 bchain") && l.contains(&format!("mod({m})")))
    };
    let quicksort_first = enters(&global_trace, "quicksort").is_some();
    let heapsort_in_global = enters(&global_trace, "heapsort");
    let heapsort_in_call = enters(&call_trace, "heapsort").is_some();
    let ok = call.first().map(String::as_str) == Some("L1 = [1,2], L2 = [1,2]")
        && global.is_empty()
        && quicksort_first
        && heapsort_in_global.is_none()
        && heapsort_in_call;
    outcome(
        ok,
        format!(
            "call {} answer(s), global {} answer(s), heapsort entered: call {heapsort_in_call}, global {}",
            call.len(),
            global.len(),
            heapsort_in_global.is_some()
        ),
    )
}

fn ac6(report: &CheckReport) -> Outcome {
    let violations = report
        .mismatches
        .iter()
        .filter(|m| {
            matches!(
                m.property,
                "call <= off" | "global <= call" | "call = oracle(call)"
            )
        })
        .count();
    for m in report
        .mismatches
        .iter()
        .filter(|m| m.property == "global <= call")
    {
        eprintln!("{}", m.reproduction());
    }
    outcome(
        violations == 0 && report.pruned >= 50,
        format!(
            "{violations} violations, {} instances strictly pruned",
            report.pruned
        ),
    )
}

fn fresh_clause(i: u64) -> DFormula {
    let m = parse_program(&format!("zz_fresh{i}(X, a) :- zz_other{i}(X).")).expect("parses");
    m.clauses.into_iter().next().expect("one clause")
}

fn ac7() -> Outcome {
    let reg = ModuleRegistry::new();
    let cfg = Config::default().depth_limit(Some(8));
    let succeeds = |p: &Program, g: &GFormula| {
        Engine::new(p, &reg)
            .with_config(cfg.clone())
            .run(g, Some(1))
            .map(|o| !o.answers.is_empty())
            .unwrap_or(false)
    };
    let (mut checked, mut violations, mut seed) = (0, 0, 0u64);
    while checked < 100 && seed < 10_000 {
        let (p, g) = random_instance(seed, 6);
        seed += 1;
        if !succeeds(&p, &g) {
            continue;
        }
        checked += 1;
        let mut front = vec![fresh_clause(seed)];
        front.extend(p.clauses.iter().cloned());
        let mut back = p.clone();
        back.push(fresh_clause(seed));
        if !succeeds(&Program::new(front), &g) || !succeeds(&back, &g) {
            violations += 1;
        }
    }
    let reuse = parse_program("p :- q, q. q.").expect("parses");
    let reuse_ok = succeeds(&Program::new(reuse.clauses), &goal("p"));
    outcome(
        checked == 100 && violations == 0 && reuse_ok,
        format!(
            "{checked} succeeding instances weakened, {violations} violations, reuse {reuse_ok}"
        ),
    )
}

fn random_term(rng: &mut ChaCha8Rng, depth: u32) -> Term {
    match rng.random_range(0..if depth == 0 { 3 } else { 5 }) {
        0 => Term::var(["X", "Y", "Z", "W"][rng.random_range(0..4)]),
        1 => Term::constant(["a", "b", "c"][rng.random_range(0..3)]),
        2 => Term::int(rng.random_range(0..3)),
        _ => {
            let (f, n) = [("f", 1), ("g", 2), ("h", 3)][rng.random_range(0..3)];
            Term::compound(f, (0..n).map(|_| random_term(rng, depth - 1)).collect())
        }
    }
}

fn contains_var(t: &Term, v: &Var) -> bool {
    match t {
        Term::Var(w) => w == v,
        Term::Compound(_, args) => args.iter().any(|a| contains_var(a, v)),
        _ => false,
    }
}

fn ac8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let empty = Substitution::new();
    let (mut violations, mut unified, mut occurs_cases) = (0, 0, 0);
    for _ in 0..1000 {
        let a = random_term(&mut rng, 3);
        let b = random_term(&mut rng, 3);
        let ab = unify(&a, &b, &empty, OccursCheck::On);
        let ba = unify(&b, &a, &empty, OccursCheck::On);
        match (&ab, &ba) {
            (Some(s1), Some(s2)) => {
                unified += 1;
                // Both unifiers equate the terms, and give variants of the
                // same common instance.
                let i1 = s1.resolve(&a);
                let i2 = s2.resolve(&a);
                if i1 != s1.resolve(&b) || i2 != s2.resolve(&b) || !variants(&i1, &i2) {
                    violations += 1;
                }
            }
            (None, None) => {}
            _ => violations += 1,
        }

        // Failure purity: a failed unification leaves the caller's
        // substitution exactly as it was.
        let pre = Substitution::new().bind(Var::named("W"), Term::constant("a"));
        let snapshot = pre.clone();
        if unify(&a, &b, &pre, OccursCheck::On).is_none() {
            let same =
                pre.len() == snapshot.len() && pre.iter().all(|(v, t)| snapshot.get(v) == Some(t));
            if !same {
                violations += 1;
            }
        }

        // Occurs check: X against any compound containing X must fail.
        let x = Var::named("X");
        if matches!(a, Term::Compound(..)) && contains_var(&a, &x) {
            occurs_cases += 1;
            if unify(&Term::Var(x.clone()), &a, &empty, OccursCheck::On).is_some() {
                violations += 1;
            }
        }
    }
    let x_fx = unify(
        &Term::var("X"),
        &Term::compound("f", vec![Term::var("X")]),
        &empty,
        OccursCheck::On,
    );
    if x_fx.is_some() {
        violations += 1;
    }
    outcome(
        violations == 0,
        format!(
            "1000 pairs, {unified} unifiable, {occurs_cases} occurs cases, {violations} violations"
        ),
    )
}

/// Equal up to a consistent renaming of variables.
fn variants(a: &Term, b: &Term) -> bool {
    fn go(a: &Term, b: &Term, map: &mut Vec<(Var, Var)>) -> bool {
        match (a, b) {
            (Term::Var(x), Term::Var(y)) => match map.iter().find(|(p, q)| p == x || q == y) {
                Some((p, q)) => p == x && q == y,
                None => {
                    map.push((x.clone(), y.clone()));
                    true
                }
            },
            (Term::Compound(f, xs), Term::Compound(g, ys)) => {
                f == g
                    && xs.len() == ys.len()
                    && xs.iter().zip(ys.iter()).all(|(x, y)| go(x, y, map))
            }
            _ => a == b,
        }
    }
    go(a, b, &mut Vec::new())
}

fn timed(f: impl FnOnce() -> Outcome) -> (Outcome, Duration) {
    let start = Instant::now();
    let o = f();
    (o, start.elapsed())
}

fn main() {
    let mut all_ok = true;
    let mut report = |id: &str, name: &str, (o, elapsed): (Outcome, Duration), limit: Duration| {
        let ok = o.ok && elapsed < limit;
        all_ok &= ok;
        println!(
            "{id} {} {name}: {} [{:.3}s, limit {}s]",
            if ok { "PASS" } else { "FAIL" },
            o.detail,
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    };
    let secs = Duration::from_secs;

    report(
        "AC-1",
        "quicksort through lists module",
        timed(ac1),
        secs(1),
    );
    report("AC-2", "deterministic memb", timed(ac2), secs(1));
    report("AC-3", "deterministic append", timed(ac3), secs(1));
    let (corpus_report, corpus_time) = corpus();
    report(
        "AC-4",
        "oracle equivalence",
        (ac4(&corpus_report, corpus_time), corpus_time),
        secs(60),
    );
    report("AC-5", "commitment scope", timed(ac5), secs(1));
    report(
        "AC-6",
        "pruning soundness",
        (ac6(&corpus_report), corpus_time),
        secs(60),
    );
    report("AC-7", "weakening and reuse", timed(ac7), secs(10));
    report("AC-8", "unification properties", timed(ac8), secs(5));

    if !all_ok {
        std::process::exit(1);
    }
}
