//! The end-to-end optimization pipeline shared by the CLI, the benchmark
//! runner, and the acceptance suite.

use crate::backend::{produce_proof, verify_chain, BackendError, ProofCertificate, VerifyReport};
use crate::engine::{run_saturation, EGraph, EngineError, Id, Limits, RunReport, StopReason};
use crate::extraction::{
    greedy_extract, ilp_extract, CostConfig, CostModel, ExtractError, ExtractionResult, Status,
};
use crate::frontend::{parse_verilog, DesignModule, FrontendError};
use crate::ir::Term;
use crate::rules::{RuleOptions, RuleSet};
use std::collections::HashMap;
use std::time::Duration;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum ExtractMode {
    Greedy,
    Ilp,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct RunConfig {
    /// default | all | mcm
    pub rules: String,
    pub max_iters: usize,
    pub max_nodes: usize,
    pub wallclock_s: u64,
    pub extract: ExtractMode,
    pub ilp_timeout_s: f64,
    pub verify: bool,
    /// Verification shrink target (bits per input).
    pub shrink: u32,
    pub cost: CostConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            rules: "default".into(),
            max_iters: 30,
            max_nodes: 100_000,
            wallclock_s: 300,
            extract: ExtractMode::Ilp,
            ilp_timeout_s: 120.0,
            verify: true,
            shrink: 5,
            cost: CostConfig::default(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Parse(#[from] FrontendError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Extract(#[from] ExtractError),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error("verification failed: {0}")]
    Verify(BackendError),
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct RunSummary {
    pub design: String,
    pub init_nodes: usize,
    pub final_nodes: usize,
    pub final_classes: usize,
    pub iterations: usize,
    pub stop_reason: StopReason,
    pub extract_status: Status,
    pub cost_before: u64,
    pub cost_after: u64,
    pub saturate_ms: u128,
    pub extract_ms: u128,
    pub verify_ms: u128,
    pub proof_steps: usize,
    /// Operator tally of the selected implementation.
    pub op_counts: std::collections::BTreeMap<String, usize>,
}

pub struct PipelineResult {
    pub optimized: String,
    pub summary: RunSummary,
    pub cert: Option<ProofCertificate>,
    pub verify: Option<VerifyReport>,
    pub egraph_json: serde_json::Value,
    pub egraph_dot: String,
}

/// Gate cost of a term DAG as written (shared subterms counted once;
/// literal constants drive the constant-operand formulas).
pub fn cost_of_terms(terms: &[(String, u32, Term)], model: &CostModel) -> u64 {
    let mut eg = EGraph::new();
    let mut roots = Vec::new();
    for (_, _, t) in terms {
        roots.push(eg.add_term(t).expect("concrete term"));
    }
    eg.rebuild().expect("no conflicts");
    let cf = CostModel::class_const(&eg);
    crate::extraction::live_classes(&eg, &roots)
        .iter()
        .map(|c| {
            // As-written designs have one node per class.
            model.node_cost(&eg.class(*c).nodes[0], &cf)
        })
        .sum()
}

pub(crate) fn rule_set_for(cfg: &RunConfig) -> RuleSet {
    match cfg.rules.as_str() {
        "mcm" => RuleSet::new(&RuleOptions::all()).with_mcm_extensions(),
        "all" => RuleSet::new(&RuleOptions::all()),
        _ => RuleSet::new(&RuleOptions::default()),
    }
}

/// Catalog plus extensions, for looking up conditions when re-verifying
/// certificates.
pub fn all_rules_for_verification() -> Vec<crate::rules::Rewrite> {
    let mut rules = crate::rules::builtin_ruleset(&RuleOptions::all());
    rules.extend(crate::rules::mcm_extension_rules());
    rules.extend(crate::rules::fig_example_rules());
    rules
}

/// Full pipeline over Verilog source text.
pub fn optimize_design(src: &str, cfg: &RunConfig) -> Result<PipelineResult, PipelineError> {
    let module = parse_verilog(src)?;
    let mut eg = EGraph::new();
    let mut roots: Vec<(String, u32, Id)> = Vec::new();
    for b in &module.bindings {
        let id = eg.add_term(&b.term)?;
        eg.retain_name(id, &b.name);
    }
    eg.rebuild()?;
    for o in &module.outputs {
        let sig = &module.output_map[&o.name];
        let b = module.binding(sig).expect("bound output");
        let id = eg.add_term(&b.term)?;
        roots.push((o.name.clone(), o.width, id));
    }
    let init_nodes = eg.num_nodes();
    let input_terms: Vec<(String, u32, Term)> = module
        .output_terms()
        .into_iter()
        .map(|(n, t)| {
            let w = module.outputs.iter().find(|o| o.name == n).unwrap().width;
            (n, w, t.as_ref().clone())
        })
        .collect();
    let model = CostModel::new(cfg.cost.clone());
    let cost_before = cost_of_terms(&input_terms, &model);

    let rules = rule_set_for(cfg);
    let limits = Limits {
        max_iters: cfg.max_iters,
        max_nodes: cfg.max_nodes,
        wallclock: Duration::from_secs(cfg.wallclock_s),
    };
    let report: RunReport = run_saturation(&mut eg, &rules.refs(), &limits)?;

    let t0 = std::time::Instant::now();
    let root_ids: Vec<Id> = roots.iter().map(|(_, _, id)| *id).collect();
    let ext: ExtractionResult = match cfg.extract {
        ExtractMode::Greedy => greedy_extract(&eg, &root_ids, &model)?,
        ExtractMode::Ilp => ilp_extract(
            &eg,
            &root_ids,
            &model,
            Duration::from_secs_f64(cfg.ilp_timeout_s),
        )?,
    };
    let extract_ms = t0.elapsed().as_millis();
    let extracted: Vec<(String, u32, Term)> = roots
        .iter()
        .map(|(n, w, id)| Ok((n.clone(), *w, ext.term_of(&eg, *id)?)))
        .collect::<Result<_, ExtractError>>()?;
    let cost_after = ext.dag_cost_of(&eg, &model, &root_ids);
    let op_counts = ext.op_counts(&eg, &root_ids);

    let cert = produce_proof(&mut eg, &module, &extracted)?;
    let t1 = std::time::Instant::now();
    let verify = if cfg.verify {
        let vr = verify_chain(&cert, cfg.shrink, &all_rules_for_verification())
            .map_err(PipelineError::Verify)?;
        Some(vr)
    } else {
        None
    };
    let verify_ms = t1.elapsed().as_millis();

    let optimized = cert.modules.last().expect("nonempty chain").clone();
    let summary = RunSummary {
        design: module.name.clone(),
        init_nodes,
        final_nodes: eg.num_nodes(),
        final_classes: eg.num_classes(),
        iterations: report.iterations.len(),
        stop_reason: report.stop_reason,
        extract_status: ext.status,
        cost_before,
        cost_after,
        saturate_ms: report.total_ms,
        extract_ms,
        verify_ms,
        proof_steps: cert.steps.len(),
        op_counts,
    };
    Ok(PipelineResult {
        optimized,
        summary,
        egraph_json: eg.dump_json(),
        egraph_dot: eg.dump_dot(),
        cert: Some(cert),
        verify,
    })
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct BenchRow {
    pub name: String,
    pub init_nodes: usize,
    pub final_nodes: usize,
    pub extract: String,
    pub status: String,
    pub cost_before: u64,
    pub cost_after: u64,
    pub runtime_s: f64,
    pub verified: bool,
    pub proof_steps: usize,
}

/// Per-benchmark configuration, mirroring the corpus table: ILP everywhere
/// except the mux-tree kernel, constant-expansion rules for the MCM family.
pub fn bench_config(name: &str) -> RunConfig {
    let mut cfg = RunConfig::default();
    if super::corpus::is_mcm(name) {
        cfg.rules = "mcm".into();
        cfg.max_iters = 16;
        cfg.max_nodes = 20_000;
    } else {
        cfg.max_iters = 10;
        cfg.max_nodes = 20_000;
    }
    if name == "adpcm" {
        cfg.extract = ExtractMode::Greedy;
    }
    cfg
}

pub fn bench(entries: &[(String, String)]) -> Vec<BenchRow> {
    let mut rows = Vec::new();
    for (name, src) in entries {
        let cfg = bench_config(name);
        let t0 = std::time::Instant::now();
        match optimize_design(src, &cfg) {
            Ok(res) => rows.push(BenchRow {
                name: name.clone(),
                init_nodes: res.summary.init_nodes,
                final_nodes: res.summary.final_nodes,
                extract: match cfg.extract {
                    ExtractMode::Greedy => "greedy".into(),
                    ExtractMode::Ilp => format!("{:?}", res.summary.extract_status).to_lowercase(),
                },
                status: "ok".into(),
                cost_before: res.summary.cost_before,
                cost_after: res.summary.cost_after,
                runtime_s: t0.elapsed().as_secs_f64(),
                verified: res.verify.map(|v| v.pass).unwrap_or(false),
                proof_steps: res.summary.proof_steps,
            }),
            Err(e) => rows.push(BenchRow {
                name: name.clone(),
                init_nodes: 0,
                final_nodes: 0,
                extract: String::new(),
                status: format!("error: {e}").chars().take(40).collect(),
                cost_before: 0,
                cost_after: 0,
                runtime_s: t0.elapsed().as_secs_f64(),
                verified: false,
                proof_steps: 0,
            }),
        }
    }
    rows
}

/// Detects whether `module` text still parses; used by the CLI for exit
/// code selection.
pub fn parses(src: &str) -> bool {
    parse_verilog(src).is_ok()
}

impl std::fmt::Display for DesignModule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", crate::frontend::print_verilog(self))
    }
}

/// Per-step implementation costs along a proof chain (cost trajectory).
pub fn chain_costs(cert: &ProofCertificate, model: &CostModel) -> Result<Vec<u64>, PipelineError> {
    let mut out = Vec::new();
    for m in &cert.modules {
        let dm = parse_verilog(m)?;
        let terms: Vec<(String, u32, Term)> = dm
            .output_terms()
            .into_iter()
            .map(|(n, t)| {
                let w = dm.outputs.iter().find(|o| o.name == n).unwrap().width;
                (n, w, t.as_ref().clone())
            })
            .collect();
        out.push(cost_of_terms(&terms, model));
    }
    Ok(out)
}

/// Used by tests constructing rule sets directly.
pub fn saturate_with(
    eg: &mut EGraph,
    rules: &RuleSet,
    limits: &Limits,
) -> Result<RunReport, EngineError> {
    run_saturation(eg, &rules.refs(), limits)
}

const _: fn(&HashMap<Term, String>) = |_| {};
