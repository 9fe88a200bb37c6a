//! Exhaustive rule validation: over every width/signage map at small
//! widths, a true condition must imply oracle equivalence (soundness), and
//! conditional rules must reject at least one genuinely non-equivalent map
//! (the condition is not vacuous).

use super::{enumerate_maps_vars, pattern_type_vars, CondSynthError};
use crate::engine::MapBinding;
use crate::ir::{equivalent_bounded_budget, Term};
use crate::rules::{Rewrite, Rhs};
use num_bigint::BigUint;
use std::rc::Rc;

#[derive(Debug, Default)]
pub struct SweepOutcome {
    pub rule: String,
    /// (variant, map, counterexample text) for cond-true non-equivalences.
    pub violations: Vec<(usize, String, String)>,
    pub cond_true_checked: u64,
    pub cond_false_maps: u64,
    /// A cond-false map whose instances the oracle confirms non-equivalent.
    pub nonequiv_false_map: Option<String>,
    pub skipped_builder: u64,
}

fn substitute_constvars(t: &Term, value: &BigUint) -> Term {
    match t {
        Term::ConstVar(_) => Term::Const(value.clone()),
        Term::Node(n) => {
            let mut n2 = n.clone();
            for a in &mut n2.args {
                a.term = Rc::new(substitute_constvars(&a.term, value));
            }
            Term::Node(n2)
        }
        other => other.clone(),
    }
}

fn has_constvar(t: &Term) -> bool {
    match t {
        Term::ConstVar(_) => true,
        Term::Node(n) => n.args.iter().any(|a| has_constvar(&a.term)),
        _ => false,
    }
}

/// Sweeps one rule exhaustively at widths `1..=wmax`. Rules with constant
/// wildcards are checked over `const_samples`.
pub fn soundness_sweep(
    rule: &Rewrite,
    wmax: u32,
    const_samples: &[u64],
) -> Result<SweepOutcome, CondSynthError> {
    let mut out = SweepOutcome {
        rule: rule.name.clone(),
        ..Default::default()
    };
    for (vi, v) in rule.variants.iter().enumerate() {
        let rhs_pat = match &v.rhs {
            Rhs::Pattern(p) => Some(p.clone()),
            Rhs::Builder(_) => None,
        };
        let (wv, sv) = pattern_type_vars(&v.lhs, rhs_pat.as_ref());
        let maps = enumerate_maps_vars(&wv, &sv, wmax, 10_000_000)?;
        let samples: Vec<Option<BigUint>> = if has_constvar(&v.lhs) {
            const_samples.iter().map(|s| Some(BigUint::from(*s))).collect()
        } else {
            vec![None]
        };
        for m in &maps {
            let cond = v.cond.eval(m);
            for sample in &samples {
                let (lhs_t, rhs_t) = match instantiate_pair(v, m, sample) {
                    Some(p) => p,
                    None => {
                        out.skipped_builder += 1;
                        continue;
                    }
                };
                match cond {
                    Some(true) => {
                        out.cond_true_checked += 1;
                        if let Some(cex) = equivalent_bounded_budget(&lhs_t, &rhs_t, 24)
                            .map_err(|e| CondSynthError::BudgetExceeded {
                                map: crate::rules::render_binding(m),
                                source: e,
                            })?
                        {
                            out.violations.push((
                                vi,
                                crate::rules::render_binding(m),
                                format!("{cex:?}"),
                            ));
                            if out.violations.len() > 8 {
                                return Ok(out);
                            }
                        }
                    }
                    _ => {
                        out.cond_false_maps += 1;
                        if out.nonequiv_false_map.is_none()
                            && equivalent_bounded_budget(&lhs_t, &rhs_t, 24)
                                .ok()
                                .flatten()
                                .is_some()
                        {
                            out.nonequiv_false_map =
                                Some(crate::rules::render_binding(m));
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

fn instantiate_pair(
    v: &crate::rules::RuleVariant,
    m: &MapBinding,
    sample: &Option<BigUint>,
) -> Option<(Term, Term)> {
    let consts = |name: &str| -> Option<BigUint> {
        let _ = name;
        sample.clone()
    };
    let lhs_src = match sample {
        Some(c) => substitute_constvars(&v.lhs, c),
        None => v.lhs.clone(),
    };
    let rhs_pat = v.rhs.resolve(m, &consts)?;
    let rhs_src = match sample {
        Some(c) => substitute_constvars(&rhs_pat, c),
        None => rhs_pat,
    };
    let lhs_t = crate::engine::instantiate_term(&lhs_src, m).ok()?;
    let rhs_t = crate::engine::instantiate_term(&rhs_src, m).ok()?;
    // Constant leaves that the annotation cannot represent faithfully never
    // match at runtime; skip them exactly like the e-matcher does.
    if !const_annotations_faithful(&lhs_t) {
        return None;
    }
    Some((lhs_t, rhs_t))
}

/// Mirrors the matcher's representability guard on literal constants.
pub(crate) fn const_annotations_faithful(t: &Term) -> bool {
    match t {
        Term::Node(n) => n.args.iter().all(|a| {
            let ok = match (a.term.as_ref(), a.width.lit(), a.signage.lit()) {
                (Term::Const(c), Some(w), Some(s)) => {
                    let k = num_bigint::BigInt::from(c.clone());
                    crate::ir::residue(&k, w, s) == k
                }
                _ => true,
            };
            ok && const_annotations_faithful(&a.term)
        }),
        _ => true,
    }
}
