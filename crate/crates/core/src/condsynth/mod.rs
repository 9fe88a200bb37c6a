//! Automated synthesis of rewrite validity conditions: enumerate all small
//! width/signage assignments, label each by exhaustive equivalence checking,
//! fit a minimal-depth decision tree over the feature vocabulary, and emit
//! the tree's true-leaves as a sum-of-products condition.

mod storegen;
mod sweep;
mod tree;
mod vctx;

pub use tree::{fit_tree, tree_to_sop, DecisionTree, TreeNode};
pub use storegen::regenerate_store;
pub use sweep::{soundness_sweep, SweepOutcome};
pub use vctx::verilog_reinterpret;

/// How instantiated pattern pairs are interpreted before the exhaustive
/// check. `AnnotationExact` is the language semantics and backs the shipped
/// store; `VerilogContext` reproduces the round-trip through generated RTL
/// (IEEE signedness coercion) that an external equivalence checker sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelMode {
    AnnotationExact,
    VerilogContext,
}

use crate::engine::{instantiate_term, Bound, MapBinding};
use crate::ir::{equivalent_bounded_budget, IrError, Signage, Term};
use crate::rules::{Atom, Condition, Rhs};
use num_bigint::BigUint;
use std::collections::BTreeSet;
use std::time::Instant;

pub const DEFAULT_WMAX: u32 = 8;
pub const DEFAULT_MAP_CAP: u64 = 1_000_000;

#[derive(Debug, thiserror::Error)]
pub enum CondSynthError {
    #[error("map space of {size} assignments exceeds the cap of {cap}")]
    CombinatorialBudget { size: u64, cap: u64 },
    #[error("oracle budget exceeded on map {map}: {source}")]
    BudgetExceeded { map: String, source: IrError },
    #[error("features cannot separate the truth table (maps {0} and {1} agree on all features but differ)")]
    Inseparable(String, String),
    #[error("builder refused map {0}; builder-guarded rules are stored as unconditional")]
    BuilderRefusal(String),
    #[error(transparent)]
    Engine(#[from] crate::engine::EngineError),
}

/// Exhaustive equivalence data over the enumerated maps.
#[derive(Debug, Clone)]
pub struct TruthTable {
    pub maps: Vec<MapBinding>,
    pub labels: Vec<bool>,
}

impl TruthTable {
    pub fn true_count(&self) -> u64 {
        self.labels.iter().filter(|l| **l).count() as u64
    }

    pub fn first_false(&self) -> Option<&MapBinding> {
        self.labels.iter().position(|l| !*l).map(|i| &self.maps[i])
    }
}

/// Width and signage variables of a pattern pair, name-sorted.
pub fn pattern_type_vars(lhs: &Term, rhs: Option<&Term>) -> (Vec<String>, Vec<String>) {
    let (mut wv, mut sv) = lhs.type_vars();
    if let Some(r) = rhs {
        let (w2, s2) = r.type_vars();
        wv.extend(w2);
        sv.extend(s2);
    }
    (wv.into_iter().collect(), sv.into_iter().collect())
}

/// Enumerates the full cross product of widths `1..=wmax` and both signages
/// in lexicographic order (name-sorted variables, last variable fastest,
/// widths before signages).
pub fn enumerate_maps(
    lhs: &Term,
    rhs: &Term,
    wmax: u32,
    cap: u64,
) -> Result<Vec<MapBinding>, CondSynthError> {
    let (wv, sv) = pattern_type_vars(lhs, Some(rhs));
    enumerate_maps_vars(&wv, &sv, wmax, cap)
}

pub fn enumerate_maps_vars(
    width_vars: &[String],
    sign_vars: &[String],
    wmax: u32,
    cap: u64,
) -> Result<Vec<MapBinding>, CondSynthError> {
    let h = width_vars.len() as u32;
    let g = sign_vars.len() as u32;
    let size = (wmax as u64)
        .checked_pow(h)
        .and_then(|x| x.checked_mul(1u64 << g))
        .unwrap_or(u64::MAX);
    if size > cap {
        return Err(CondSynthError::CombinatorialBudget { size, cap });
    }
    let mut out = Vec::with_capacity(size as usize);
    let n = width_vars.len() + sign_vars.len();
    let mut counters = vec![0u32; n];
    loop {
        let mut m = MapBinding::new();
        for (i, v) in width_vars.iter().enumerate() {
            m.insert(v.clone(), Bound::Width(counters[i] + 1));
        }
        for (j, v) in sign_vars.iter().enumerate() {
            let s = if counters[width_vars.len() + j] == 0 {
                Signage::Unsign
            } else {
                Signage::Sign
            };
            m.insert(v.clone(), Bound::Sig(s));
        }
        out.push(m);
        // Odometer, last variable fastest.
        let mut k = n;
        loop {
            if k == 0 {
                return Ok(out);
            }
            k -= 1;
            counters[k] += 1;
            let max = if k < width_vars.len() { wmax } else { 2 };
            if counters[k] < max {
                break;
            }
            counters[k] = 0;
        }
    }
}

/// Labels each map with the oracle verdict on the instantiated pair.
pub fn label_maps(
    lhs: &Term,
    rhs: &Term,
    maps: &[MapBinding],
) -> Result<TruthTable, CondSynthError> {
    label_maps_rhs(lhs, &Rhs::Pattern(rhs.clone()), maps, &|_| None)
}

/// As `label_maps`, with a dynamic rhs and a constant source for builders.
pub fn label_maps_rhs(
    lhs: &Term,
    rhs: &Rhs,
    maps: &[MapBinding],
    consts: &dyn Fn(&str) -> Option<BigUint>,
) -> Result<TruthTable, CondSynthError> {
    label_maps_mode(lhs, rhs, maps, consts, LabelMode::AnnotationExact)
}

pub fn label_maps_mode(
    lhs: &Term,
    rhs: &Rhs,
    maps: &[MapBinding],
    consts: &dyn Fn(&str) -> Option<BigUint>,
    mode: LabelMode,
) -> Result<TruthTable, CondSynthError> {
    let mut labels = Vec::with_capacity(maps.len());
    for m in maps {
        let mut lt = instantiate_term(lhs, m)?;
        let rpat = rhs
            .resolve(m, &consts)
            .ok_or_else(|| CondSynthError::BuilderRefusal(crate::rules::render_binding(m)))?;
        let mut rt = instantiate_term(&rpat, m)?;
        if mode == LabelMode::VerilogContext {
            let (l2, r2) = verilog_reinterpret(&lt, &rt).ok_or_else(|| {
                CondSynthError::BuilderRefusal(crate::rules::render_binding(m))
            })?;
            lt = l2;
            rt = r2;
        }
        let verdict = equivalent_bounded_budget(&lt, &rt, 24).map_err(|e| {
            CondSynthError::BudgetExceeded {
                map: crate::rules::render_binding(m),
                source: e,
            }
        })?;
        labels.push(verdict.is_none());
    }
    Ok(TruthTable {
        maps: maps.to_vec(),
        labels,
    })
}

/// Deterministic feature enumeration over the pattern's variables. Indices
/// are stable: signage tests, width equality (unordered), strict less-than,
/// plus/minus-one comparisons (ordered), then sum and shift triples.
pub fn features_for(width_vars: &[String], sign_vars: &[String]) -> Vec<Atom> {
    let mut out = Vec::new();
    for s in sign_vars {
        out.push(Atom::SignUnsign(s.clone()));
    }
    let w = width_vars;
    for i in 0..w.len() {
        for j in i + 1..w.len() {
            out.push(Atom::WidthEq(w[i].clone(), w[j].clone()));
        }
    }
    for i in 0..w.len() {
        for j in 0..w.len() {
            if i != j {
                out.push(Atom::WidthLt(w[i].clone(), w[j].clone()));
            }
        }
    }
    for i in 0..w.len() {
        for j in 0..w.len() {
            if i != j {
                out.push(Atom::WidthPlus1Lt(w[i].clone(), w[j].clone()));
            }
        }
    }
    for i in 0..w.len() {
        for j in 0..w.len() {
            if i != j {
                out.push(Atom::WidthMinus1Lt(w[i].clone(), w[j].clone()));
            }
        }
    }
    for i in 0..w.len() {
        for j in i + 1..w.len() {
            for k in 0..w.len() {
                if k != i && k != j {
                    out.push(Atom::WidthSumLt(w[i].clone(), w[j].clone(), w[k].clone()));
                }
            }
        }
    }
    for i in 0..w.len() {
        for j in 0..w.len() {
            if i == j {
                continue;
            }
            for k in 0..w.len() {
                if k != i && k != j {
                    out.push(Atom::WidthShiftLt(w[i].clone(), w[j].clone(), w[k].clone()));
                }
            }
        }
    }
    for v in w {
        out.push(Atom::WidthIs1(v.clone()));
    }
    out
}

/// Full synthesis result for one rule variant.
#[derive(Debug, Clone)]
pub struct SynthReport {
    pub wmax: u32,
    pub maps: u64,
    pub true_maps: u64,
    pub depth: usize,
    pub cond: Condition,
    pub sample_false: Option<MapBinding>,
    pub label_ms: u128,
    pub fit_ms: u128,
}

/// Runs the full flow for a pattern pair: enumerate, label with the oracle,
/// fit the minimal-depth zero-error tree, convert to SOP.
pub fn synthesize(
    lhs: &Term,
    rhs: &Rhs,
    wmax: u32,
    cap: u64,
    consts: &dyn Fn(&str) -> Option<BigUint>,
) -> Result<SynthReport, CondSynthError> {
    synthesize_mode(lhs, rhs, wmax, cap, consts, LabelMode::AnnotationExact)
}

/// As `synthesize`, selecting the labeling semantics.
pub fn synthesize_mode(
    lhs: &Term,
    rhs: &Rhs,
    wmax: u32,
    cap: u64,
    consts: &dyn Fn(&str) -> Option<BigUint>,
    mode: LabelMode,
) -> Result<SynthReport, CondSynthError> {
    let rhs_vars = match rhs {
        Rhs::Pattern(p) => Some(p.clone()),
        Rhs::Builder(_) => None,
    };
    let (wv, sv) = pattern_type_vars(lhs, rhs_vars.as_ref());
    let mut maps = enumerate_maps_vars(&wv, &sv, wmax, cap)?;
    // Maps whose literal constants cannot be represented at the matched
    // annotation never arise from e-matching; keep the training domain
    // equal to the reachable domain.
    maps.retain(|m| {
        instantiate_term(lhs, m)
            .map(|t| sweep::const_annotations_faithful(&t))
            .unwrap_or(true)
    });
    let t0 = Instant::now();
    let table = label_maps_mode(lhs, rhs, &maps, consts, mode)?;
    let label_ms = t0.elapsed().as_millis();
    let t1 = Instant::now();
    let features = features_for(&wv, &sv);
    let (tree, depth) = fit_tree(&table, &features)?;
    let cond = tree_to_sop(&tree, &features);
    let fit_ms = t1.elapsed().as_millis();
    // Exactness on the training domain, by construction; assert anyway.
    for (m, l) in table.maps.iter().zip(&table.labels) {
        debug_assert_eq!(cond.eval(m), Some(*l));
    }
    Ok(SynthReport {
        wmax,
        maps: maps.len() as u64,
        true_maps: table.true_count(),
        depth,
        cond,
        sample_false: table.first_false().cloned(),
        label_ms,
        fit_ms,
    })
}

/// The enumeration width for a rule: large enough for fidelity, small
/// enough that `wmax^H * 2^G` stays under the cap and every oracle call
/// fits the 24-bit budget.
pub fn choose_wmax(lhs: &Term, rhs: Option<&Term>) -> u32 {
    let (wv, _) = pattern_type_vars(lhs, rhs);
    let h = wv.len() as u32;
    let mut term_vars: BTreeSet<String> = lhs.free_vars();
    if let Some(r) = rhs {
        term_vars.extend(r.free_vars());
    }
    let nterm = term_vars.len().max(1) as u32;
    let mut by_h = match h {
        0..=4 => 8,
        5 => 6,
        6 => 4,
        _ => 3,
    };
    // Shifter semantics enumerate amount values exponentially in the
    // amount width; one step smaller keeps labeling tractable.
    if contains_shift(lhs) {
        by_h = match by_h {
            8 => 6,
            6 => 5,
            _ => 3,
        };
    }
    by_h.min((24 / nterm).max(3))
}

fn contains_shift(t: &Term) -> bool {
    match t {
        Term::Node(n) => {
            matches!(n.op, crate::ir::Op::Shl | crate::ir::Op::Shr)
                || n.args.iter().any(|a| contains_shift(&a.term))
        }
        _ => false,
    }
}
