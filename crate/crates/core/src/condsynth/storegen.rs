//! Regenerates the shipped condition store: every catalog variant without a
//! hand-written True condition gets a freshly synthesized record. A build
//! task, not a runtime step.

use super::{choose_wmax, synthesize, CondSynthError, DEFAULT_MAP_CAP};
use crate::rules::{all_specs_for_synthesis, Condition, ConditionStore, Rhs, StoreRecord};

/// Rules whose right-hand sides are value-correct by construction, with the
/// remaining obligations enforced by builder guards (constant value range
/// and representability). Stored unconditional; the soundness sweep covers
/// them over sampled constants.
const BUILDER_GUARDED: &[&str] = &["mult-constant", "mult-const-factor"];

pub fn regenerate_store(progress: &mut dyn FnMut(&str)) -> Result<ConditionStore, CondSynthError> {
    let mut store = ConditionStore::empty();
    for spec in all_specs_for_synthesis() {
        if spec.table_true {
            continue;
        }
        for (vi, (lhs, rhs)) in spec.variants.iter().enumerate() {
            let key = format!("{}#{vi}", spec.name);
            if BUILDER_GUARDED.contains(&spec.name) {
                store.records.insert(
                    key,
                    StoreRecord {
                        cond: Condition::True,
                        wmax: 0,
                        depth: 0,
                        maps: 0,
                        true_maps: 0,
                        sample_false: None,
                    },
                );
                continue;
            }
            let rhs_pat = match rhs {
                Rhs::Pattern(p) => Some(p.clone()),
                Rhs::Builder(_) => None,
            };
            let wmax = choose_wmax(lhs, rhs_pat.as_ref());
            progress(&format!("synthesizing {key} at wmax={wmax}"));
            let rep = synthesize(lhs, rhs, wmax, DEFAULT_MAP_CAP, &|_| None)?;
            progress(&format!(
                "  maps={} true={} depth={} cond={}",
                rep.maps, rep.true_maps, rep.depth, rep.cond
            ));
            store.records.insert(
                key,
                StoreRecord {
                    cond: rep.cond,
                    wmax,
                    depth: rep.depth,
                    maps: rep.maps,
                    true_maps: rep.true_maps,
                    sample_false: rep.sample_false,
                },
            );
        }
    }
    Ok(store)
}
