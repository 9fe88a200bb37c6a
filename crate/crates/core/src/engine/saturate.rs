//! Equality-saturation driver: repeatedly search all rules over the frozen
//! e-graph, apply the matches serially in catalog-then-match order, rebuild,
//! and stop on a fixpoint or a limit.

use super::{EGraph, EngineError, Match};
use std::time::{Duration, Instant};

/// Interface the saturation loop needs from a rewrite.
pub trait RewriteRule {
    fn name(&self) -> &str;
    fn search(&self, eg: &EGraph) -> Vec<Match>;
    fn apply(&self, eg: &mut EGraph, m: &Match) -> Result<ApplyOutcome, EngineError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApplyOutcome {
    Applied,
    SkippedCondition,
    SkippedNoop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum StopReason {
    Saturated,
    IterLimit,
    NodeLimit,
    TimeLimit,
}

#[derive(Debug, Clone)]
pub struct Limits {
    pub max_iters: usize,
    pub max_nodes: usize,
    pub wallclock: Duration,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_iters: 30,
            max_nodes: 100_000,
            wallclock: Duration::from_secs(300),
        }
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct IterStats {
    pub nodes: usize,
    pub classes: usize,
    pub matches: usize,
    pub applied: usize,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct RunReport {
    pub stop_reason: StopReason,
    pub iterations: Vec<IterStats>,
    pub total_ms: u128,
}

/// Runs rules to saturation or a limit. Deterministic for a fixed rule
/// order: matches are collected per iteration over the frozen graph and
/// applied in catalog order then match order.
pub fn run_saturation(
    eg: &mut EGraph,
    rules: &[&dyn RewriteRule],
    limits: &Limits,
) -> Result<RunReport, EngineError> {
    let start = Instant::now();
    let mut iterations = Vec::new();
    let stop_reason = loop {
        if iterations.len() >= limits.max_iters {
            break StopReason::IterLimit;
        }
        if eg.num_nodes() >= limits.max_nodes {
            break StopReason::NodeLimit;
        }
        if start.elapsed() >= limits.wallclock {
            break StopReason::TimeLimit;
        }
        let version_before = eg.version();
        let all_matches: Vec<(usize, Vec<Match>)> = rules
            .iter()
            .enumerate()
            .map(|(i, r)| (i, r.search(eg)))
            .collect();
        let mut matches = 0;
        let mut applied = 0;
        let mut hit_node_limit = false;
        'apply: for (ri, ms) in &all_matches {
            for m in ms {
                matches += 1;
                if rules[*ri].apply(eg, m)? == ApplyOutcome::Applied {
                    applied += 1;
                }
                if eg.num_nodes() >= limits.max_nodes {
                    hit_node_limit = true;
                    break 'apply;
                }
            }
        }
        eg.rebuild()?;
        iterations.push(IterStats {
            nodes: eg.num_nodes(),
            classes: eg.num_classes(),
            matches,
            applied,
        });
        if hit_node_limit {
            break StopReason::NodeLimit;
        }
        if eg.version() == version_before {
            break StopReason::Saturated;
        }
    };
    Ok(RunReport {
        stop_reason,
        iterations,
        total_ms: start.elapsed().as_millis(),
    })
}
