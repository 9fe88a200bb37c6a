//! Back end: Verilog generation from extracted term DAGs with original-name
//! retention, proof-certificate production from the e-graph's explanations,
//! and self-verification of the rewrite chain with the exhaustive oracle.

mod shrink;

pub use shrink::{module_widths, shrink_module, WidthMap};

use crate::engine::{EGraph, EngineError, ExplainStep, MapBinding};
use crate::frontend::{
    parse_verilog, print_verilog_named, Binding, DesignModule, FrontendError, NameArena, PortDecl,
};
use crate::ir::{equivalent_bounded, Env, IrError, Term};
use crate::rules::{parse_binding, render_binding, Condition, Rewrite};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;
use std::rc::Rc;

#[derive(Debug, thiserror::Error)]
pub enum BackendError {
    #[error("term is not concrete")]
    NonConcrete,
    #[error("selected implementation is cyclic")]
    CyclicDag,
    #[error("verification step {index} failed on output {output}: counterexample {env:?}")]
    StepFailed {
        index: usize,
        output: String,
        env: Env,
    },
    #[error(transparent)]
    Frontend(#[from] FrontendError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Ir(#[from] IrError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad certificate: {0}")]
    BadCertificate(String),
}

/// Generates a flat module from output cones. `names` assigns retained
/// signal names to term shapes; everything else gets stable `t<k>` names
/// from the arena.
pub fn generate_verilog(
    module_name: &str,
    inputs: &[PortDecl],
    outputs: &[(String, u32, Term)],
    names: &HashMap<Term, String>,
    arena: &mut NameArena,
) -> Result<String, BackendError> {
    let mut bindings = Vec::new();
    for (name, width, term) in outputs {
        if !term.is_concrete() {
            return Err(BackendError::NonConcrete);
        }
        bindings.push(Binding {
            name: name.clone(),
            width: *width,
            term: Rc::new(term.clone()),
        });
    }
    let dm = DesignModule {
        name: module_name.to_string(),
        inputs: inputs.to_vec(),
        outputs: outputs
            .iter()
            .map(|(n, w, _)| PortDecl {
                name: n.clone(),
                width: *w,
                signed: false,
            })
            .collect(),
        bindings,
        output_map: outputs
            .iter()
            .map(|(n, _, _)| (n.clone(), n.clone()))
            .collect(),
    };
    Ok(print_verilog_named(&dm, arena, names))
}

/// One certificate step: which rewrite related module i and i+1.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct StepMeta {
    pub rule: String,
    pub forward: bool,
    /// Output whose cone the step rewrote.
    pub output: String,
    /// Width/signage part of the matched map (conditions re-check on
    /// shrunk replays).
    pub binding: String,
    /// Signals whose definitions changed between the adjacent modules.
    pub modified_signals: Vec<String>,
    /// Oracle verdict, filled in by verification.
    pub verdict: Option<String>,
}

/// Machine-checkable chain: modules R0..Rn as Verilog text plus per-step
/// metadata; adjacent modules differ in one signal cone.
#[derive(Debug, Clone)]
pub struct ProofCertificate {
    pub design: String,
    pub modules: Vec<String>,
    pub steps: Vec<StepMeta>,
}

/// Builds the certificate for a whole module: per output, the e-graph
/// explanation from the parsed cone to the extracted cone, each
/// intermediate code-generated with stable names.
pub fn produce_proof(
    eg: &mut EGraph,
    input: &DesignModule,
    extracted: &[(String, u32, Term)],
) -> Result<ProofCertificate, BackendError> {
    // Explanations per output, in declaration order.
    let mut chains: Vec<(String, u32, Vec<Term>, Vec<ExplainStep>)> = Vec::new();
    for (name, width, out_term) in extracted {
        let in_term = input
            .output_terms()
            .into_iter()
            .find(|(n, _)| n == name)
            .ok_or_else(|| BackendError::BadCertificate(format!("output {name} missing")))?
            .1;
        let ex = eg.explain(&in_term, out_term)?;
        chains.push((name.clone(), *width, ex.terms, ex.steps));
    }

    // Class-name retention: term shape -> retained signal name, discovered
    // from the e-graph as chains are emitted.
    let mut arena = NameArena::new();
    let mut modules = Vec::new();
    let mut steps = Vec::new();
    let mut current: Vec<(String, u32, Term)> = chains
        .iter()
        .map(|(n, w, terms, _)| (n.clone(), *w, terms[0].clone()))
        .collect();

    let emit = |cur: &[(String, u32, Term)], arena: &mut NameArena| -> Result<String, BackendError> {
        let mut names: HashMap<Term, String> = HashMap::new();
        for (_, _, t) in cur {
            collect_retained_names(eg, t, &mut names);
        }
        generate_verilog(&input.name, &input.inputs, cur, &names, arena)
    };

    modules.push(emit(&current, &mut arena)?);
    for (oi, (oname, _, terms, exsteps)) in chains.iter().enumerate() {
        for (si, step) in exsteps.iter().enumerate() {
            current[oi].2 = terms[si + 1].clone();
            let text = emit(&current, &mut arena)?;
            let modified = diff_signals(modules.last().unwrap(), &text)?;
            modules.push(text);
            steps.push(StepMeta {
                rule: step.rule.clone(),
                forward: step.forward,
                output: oname.clone(),
                binding: render_binding(&step.binding),
                modified_signals: modified,
                verdict: None,
            });
        }
    }
    Ok(ProofCertificate {
        design: input.name.clone(),
        modules,
        steps,
    })
}

fn collect_retained_names(eg: &EGraph, t: &Term, out: &mut HashMap<Term, String>) {
    if let Term::Node(n) = t {
        if let Some(class) = eg.lookup_term(t) {
            if let Some((name, _)) = &eg.class(class).name {
                out.entry(t.clone()).or_insert_with(|| name.clone());
            }
        }
        for a in &n.args {
            collect_retained_names(eg, &a.term, out);
        }
    }
}

/// Signals whose definitions differ between two adjacent modules (changed
/// or newly added assigns).
fn diff_signals(before: &str, after: &str) -> Result<Vec<String>, BackendError> {
    let assigns = |text: &str| -> BTreeMap<String, String> {
        text.lines()
            .filter_map(|l| {
                let l = l.trim();
                let rest = l.strip_prefix("assign ")?;
                let (name, rhs) = rest.split_once('=')?;
                Some((name.trim().to_string(), rhs.trim().to_string()))
            })
            .collect()
    };
    let (a, b) = (assigns(before), assigns(after));
    let mut out = Vec::new();
    for (name, rhs) in &b {
        match a.get(name) {
            Some(old) if old == rhs => {}
            _ => out.push(name.clone()),
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, serde::Serialize)]
pub enum StepVerdict {
    /// Checked exhaustively at the given width cap.
    Pass { width_cap: u32 },
    /// No cap fit both the budget and the step's rewrite conditions.
    Unverified,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct VerifyReport {
    pub steps: Vec<StepVerdict>,
    pub endpoints_pass: bool,
    pub pass: bool,
}

/// The shrink ladder: smallest first, original widths last.
const LADDER: &[u32] = &[5, 8, 12, 16, u32::MAX];

/// Checks every adjacent pair of the certificate with the exhaustive oracle
/// at shrunk widths, re-validating each step's rewrite condition at the
/// shrunk map and escalating to wider checks when it no longer holds. Also
/// checks the endpoints directly. Aborts with `StepFailed` on any concrete
/// counterexample.
pub fn verify_chain(
    cert: &ProofCertificate,
    max_shrink: u32,
    rules: &[Rewrite],
) -> Result<VerifyReport, BackendError> {
    let parsed: Vec<DesignModule> = cert
        .modules
        .iter()
        .map(|m| parse_verilog(m))
        .collect::<Result<_, _>>()?;
    let cond_of = |rule: &str| -> Option<Vec<Condition>> {
        rules
            .iter()
            .find(|r| r.name == rule)
            .map(|r| r.variants.iter().map(|v| v.cond.clone()).collect())
    };
    let mut verdicts = Vec::new();
    for i in 0..parsed.len() - 1 {
        let meta = &cert.steps[i];
        let conds = cond_of(&meta.rule);
        let binding = parse_binding(&meta.binding).unwrap_or_default();
        let v = check_pair(
            &parsed[i],
            &parsed[i + 1],
            max_shrink,
            conds.as_deref(),
            &binding,
            i,
        )?;
        verdicts.push(v);
    }
    let endpoints = if parsed.len() >= 2 {
        check_pair(
            &parsed[0],
            &parsed[parsed.len() - 1],
            max_shrink,
            None,
            &MapBinding::new(),
            usize::MAX,
        )?
    } else {
        StepVerdict::Pass { width_cap: 0 }
    };
    let endpoints_pass = matches!(endpoints, StepVerdict::Pass { .. });
    let pass = endpoints_pass
        && verdicts
            .iter()
            .all(|v| matches!(v, StepVerdict::Pass { .. }));
    Ok(VerifyReport {
        steps: verdicts,
        endpoints_pass,
        pass,
    })
}

fn check_pair(
    a: &DesignModule,
    b: &DesignModule,
    max_shrink: u32,
    conds: Option<&[Condition]>,
    binding: &MapBinding,
    index: usize,
) -> Result<StepVerdict, BackendError> {
    let mut widths = BTreeSet::new();
    module_widths(a, &mut widths);
    module_widths(b, &mut widths);
    // A counterexample at a shrunk width is only authoritative at the
    // widest budget-fitting rung: shrinking can break the width slack a
    // dynamic right-hand side chose at full width, exactly like a failed
    // condition re-check. Escalate through the ladder; fail only when the
    // last runnable rung still disagrees.
    let mut last_failure: Option<(String, Env)> = None;
    for cap in LADDER.iter().filter(|c| **c >= max_shrink) {
        let wm = WidthMap::build(&widths, *cap);
        if !wm.identity() {
            if let Some(conds) = conds {
                let shrunk = shrink_binding(binding, &wm);
                let ok = conds.iter().any(|c| c.eval(&shrunk).unwrap_or(true));
                if !ok {
                    continue;
                }
            }
        }
        let (sa, sb) = (shrink_module(a, &wm), shrink_module(b, &wm));
        let bits: u64 = sa.inputs.iter().map(|p| p.width as u64).sum();
        if bits > 24 {
            continue;
        }
        let mut failed = None;
        for (name, ta) in sa.output_terms() {
            let tb = sb
                .output_terms()
                .into_iter()
                .find(|(n, _)| *n == name)
                .ok_or_else(|| BackendError::BadCertificate(format!("output {name} missing")))?
                .1;
            if let Some(env) = equivalent_bounded(&ta, &tb)? {
                failed = Some((name, env));
                break;
            }
        }
        match failed {
            None => return Ok(StepVerdict::Pass { width_cap: *cap }),
            Some(f) => last_failure = Some(f),
        }
        if wm.identity() {
            break; // nothing wider to escalate to
        }
    }
    match last_failure {
        Some((output, env)) => Err(BackendError::StepFailed { index, output, env }),
        None => Ok(StepVerdict::Unverified),
    }
}

fn shrink_binding(b: &MapBinding, wm: &WidthMap) -> MapBinding {
    use crate::engine::Bound;
    b.iter()
        .map(|(k, v)| {
            let nv = match v {
                Bound::Width(w) => Bound::Width(wm.get(*w)),
                other => other.clone(),
            };
            (k.clone(), nv)
        })
        .collect()
}

/// Writes `step_<i>.v` files plus `manifest.json`.
pub fn write_certificate(cert: &ProofCertificate, dir: &Path) -> Result<(), BackendError> {
    std::fs::create_dir_all(dir)?;
    for (i, m) in cert.modules.iter().enumerate() {
        std::fs::write(dir.join(format!("step_{i}.v")), m)?;
    }
    let manifest = serde_json::json!({
        "design": cert.design,
        "modules": cert.modules.len(),
        "steps": cert.steps,
    });
    std::fs::write(
        dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest).expect("serializable"),
    )?;
    Ok(())
}

/// Reads a certificate directory back for re-verification.
pub fn read_certificate(dir: &Path) -> Result<ProofCertificate, BackendError> {
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json"))?)
            .map_err(|e| BackendError::BadCertificate(e.to_string()))?;
    let n = manifest["modules"]
        .as_u64()
        .ok_or_else(|| BackendError::BadCertificate("missing module count".into()))? as usize;
    let mut modules = Vec::with_capacity(n);
    for i in 0..n {
        modules.push(std::fs::read_to_string(dir.join(format!("step_{i}.v")))?);
    }
    let steps: Vec<StepMeta> = serde_json::from_value(manifest["steps"].clone())
        .map_err(|e| BackendError::BadCertificate(e.to_string()))?;
    if steps.len() + 1 != n {
        return Err(BackendError::BadCertificate(
            "step/module count mismatch".into(),
        ));
    }
    Ok(ProofCertificate {
        design: manifest["design"].as_str().unwrap_or("design").to_string(),
        modules,
        steps,
    })
}
