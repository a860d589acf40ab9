//! Engine versus oracle over a seeded random corpus.

use std::collections::BTreeSet;
use std::fmt;

use crate::ast::{GFormula, Program};
use crate::engine::{CommitMode, CommitTrigger, Config, Engine, EngineError, Rule2Order};
use crate::modsys::ModuleRegistry;
use crate::oracle::{enumerate_with, random_instance, OracleConfig, OracleMode};

#[derive(Clone, Debug)]
pub struct CheckConfig {
    pub depth: u32,
    pub corpus_size: usize,
    /// Instance `i` uses seed `seed + i`.
    pub seed: u64,
    pub instance_size: usize,
    /// Oracle search steps per instance; instances that run out are not
    /// decisive and are only checked for the subset properties.
    pub oracle_budget: u64,
    #[doc(hidden)]
    pub commit_trigger: CommitTrigger,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            depth: 8,
            corpus_size: 200,
            seed: 0,
            instance_size: 6,
            oracle_budget: 200_000,
            commit_trigger: CommitTrigger::FirstAnswer,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Mismatch {
    pub seed: u64,
    pub property: &'static str,
    pub detail: String,
    pub program: Program,
    pub goal: GFormula,
}

impl Mismatch {
    /// The instance as a loadable `.mw` program with the query in a comment.
    pub fn reproduction(&self) -> String {
        let mut s = format!(
            "% seed {}: {}\n% {}\n",
            self.seed, self.property, self.detail
        );
        for c in &self.program.clauses {
            s.push_str(&format!("{c}.\n"));
        }
        s.push_str(&format!("% query: {}\n", self.goal));
        s
    }
}

#[derive(Clone, Debug, Default)]
pub struct CheckReport {
    pub instances: usize,
    /// Instances where the oracle's answer set is complete for the bound.
    pub decisive: usize,
    /// Instances where commit=call returns strictly fewer answers than the
    /// oracle.
    pub pruned: usize,
    pub mismatches: Vec<Mismatch>,
}

impl CheckReport {
    pub fn prune_rate(&self) -> f64 {
        if self.instances == 0 {
            0.0
        } else {
            self.pruned as f64 / self.instances as f64
        }
    }

    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "instances   {}", self.instances)?;
        writeln!(f, "decisive    {}", self.decisive)?;
        writeln!(f, "mismatches  {}", self.mismatches.len())?;
        write!(
            f,
            "prune-rate  {:.3} ({} pruned)",
            self.prune_rate(),
            self.pruned
        )
    }
}

/// Answer sets of one instance under each configuration that gets compared.
#[derive(Clone, Debug)]
pub struct InstanceResult {
    pub oracle: Option<BTreeSet<String>>,
    pub oracle_call: Option<BTreeSet<String>>,
    pub off: BTreeSet<String>,
    /// Only computed when the oracle is decisive; solving bodies first is
    /// exponentially more expensive.
    pub off_body_first: Option<BTreeSet<String>>,
    pub call: BTreeSet<String>,
    pub global: BTreeSet<String>,
}

type Sets = Result<BTreeSet<String>, String>;

fn engine_set(p: &Program, reg: &ModuleRegistry, g: &GFormula, cfg: Config) -> Sets {
    Engine::new(p, reg)
        .with_config(cfg)
        .run(g, None)
        .map(|o| o.answer_set())
        .map_err(|e: EngineError| e.to_string())
}

fn oracle_set(
    p: &Program,
    reg: &ModuleRegistry,
    g: &GFormula,
    depth: u32,
    mode: OracleMode,
    budget: u64,
) -> Result<Option<BTreeSet<String>>, String> {
    let cfg = OracleConfig {
        mode,
        rule2_order: Rule2Order::BodyFirst,
        step_budget: budget,
        ..OracleConfig::default()
    };
    match enumerate_with(p, reg, g, depth, &cfg) {
        Ok(v) if v.is_decisive() => Ok(Some(v.answer_set())),
        Ok(_) => Ok(None),
        Err(e) => Err(e.to_string()),
    }
}

/// Runs every comparison on one instance and returns the violated
/// properties with details.
pub fn check_instance(
    p: &Program,
    g: &GFormula,
    cfg: &CheckConfig,
) -> (Vec<(&'static str, String)>, Option<InstanceResult>) {
    let reg = ModuleRegistry::new();
    let base = Config {
        depth_limit: Some(cfg.depth),
        commit_trigger: cfg.commit_trigger,
        ..Config::default()
    };
    let run = || -> Result<InstanceResult, String> {
        let oracle = oracle_set(
            p,
            &reg,
            g,
            cfg.depth,
            OracleMode::NoCommit,
            cfg.oracle_budget,
        )?;
        let off_body_first = match oracle {
            Some(_) => Some(engine_set(
                p,
                &reg,
                g,
                base.clone()
                    .commit_mode(CommitMode::Off)
                    .rule2_order(Rule2Order::BodyFirst),
            )?),
            None => None,
        };
        Ok(InstanceResult {
            oracle,
            oracle_call: oracle_set(
                p,
                &reg,
                g,
                cfg.depth,
                OracleMode::CommitCall,
                cfg.oracle_budget,
            )?,
            off: engine_set(p, &reg, g, base.clone().commit_mode(CommitMode::Off))?,
            off_body_first,
            call: engine_set(p, &reg, g, base.clone().commit_mode(CommitMode::Call))?,
            global: engine_set(p, &reg, g, base.clone().commit_mode(CommitMode::Global))?,
        })
    };
    let r = match run() {
        Ok(r) => r,
        Err(e) => return (vec![("error", e)], None),
    };

    let mut bad = Vec::new();
    let show =
        |s: &BTreeSet<String>| format!("{{{}}}", s.iter().cloned().collect::<Vec<_>>().join("; "));
    if let Some(o) = &r.oracle {
        if &r.off != o {
            bad.push((
                "off = oracle",
                format!("engine {} oracle {}", show(&r.off), show(o)),
            ));
        }
        if let Some(bf) = r.off_body_first.as_ref().filter(|bf| *bf != o) {
            bad.push((
                "body-first = oracle",
                format!("engine {} oracle {}", show(bf), show(o)),
            ));
        }
    }
    if let Some(o) = &r.oracle_call {
        if &r.call != o {
            bad.push((
                "call = oracle(call)",
                format!("engine {} oracle {}", show(&r.call), show(o)),
            ));
        }
    }
    if !r.call.is_subset(&r.off) {
        bad.push((
            "call <= off",
            format!("call {} off {}", show(&r.call), show(&r.off)),
        ));
    }
    if !r.global.is_subset(&r.call) {
        bad.push((
            "global <= call",
            format!("global {} call {}", show(&r.global), show(&r.call)),
        ));
    }
    (bad, Some(r))
}

pub fn cross_check(cfg: &CheckConfig) -> CheckReport {
    let mut report = CheckReport::default();
    for i in 0..cfg.corpus_size {
        let seed = cfg.seed.wrapping_add(i as u64);
        let (p, g) = random_instance(seed, cfg.instance_size);
        let (bad, result) = check_instance(&p, &g, cfg);
        report.instances += 1;
        if let Some(r) = &result {
            if let Some(o) = &r.oracle {
                report.decisive += 1;
                if r.call.len() < o.len() {
                    report.pruned += 1;
                }
            }
        }
        for (property, detail) in bad {
            report.mismatches.push(Mismatch {
                seed,
                property,
                detail,
                program: p.clone(),
                goal: g.clone(),
            });
        }
    }
    report
}
