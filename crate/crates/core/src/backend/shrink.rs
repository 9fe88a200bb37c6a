//! Width shrinking for oracle-checkable verification: maps the design's
//! declared widths order-preservingly into a small range so exhaustive
//! checking stays feasible while the inequalities the rewrite conditions
//! test are preserved wherever possible.

use crate::frontend::{Binding, DesignModule, PortDecl};
use crate::ir::{Arg, Node, Op, Term, WidthSpec};
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use std::collections::{BTreeMap, BTreeSet};
use std::rc::Rc;

/// Order-preserving width map onto `1..=cap` (strictness kept while the
/// range allows; beyond that, widths clamp and ties may collapse).
pub struct WidthMap {
    map: BTreeMap<u32, u32>,
}

impl WidthMap {
    pub fn build(widths: &BTreeSet<u32>, cap: u32) -> WidthMap {
        let mut map = BTreeMap::new();
        if widths.iter().all(|w| *w <= cap) {
            for w in widths {
                map.insert(*w, *w);
            }
            return WidthMap { map };
        }
        let mut budget = cap;
        for w in widths.iter().rev() {
            let t = (*w).min(budget).max(1);
            map.insert(*w, t);
            budget = t.saturating_sub(1).max(1);
        }
        WidthMap { map }
    }

    pub fn get(&self, w: u32) -> u32 {
        *self.map.get(&w).unwrap_or(&w.min(5).max(1))
    }

    pub fn identity(&self) -> bool {
        self.map.iter().all(|(k, v)| k == v)
    }
}

/// Collects every declared and annotated width in a module.
pub fn module_widths(m: &DesignModule, out: &mut BTreeSet<u32>) {
    for p in m.inputs.iter().chain(m.outputs.iter()) {
        out.insert(p.width);
    }
    for b in &m.bindings {
        out.insert(b.width);
        term_widths(&b.term, out);
    }
}

fn term_widths(t: &Term, out: &mut BTreeSet<u32>) {
    if let Term::Node(n) = t {
        if let Some(w) = n.width.lit() {
            out.insert(w);
        }
        if let Op::Slice { hi, lo } = n.op {
            out.insert(hi + 1);
            if lo > 0 {
                out.insert(lo);
            }
        }
        for a in &n.args {
            if let Some(w) = a.width.lit() {
                out.insert(w);
            }
            term_widths(&a.term, out);
        }
    }
}

fn shrink_term(t: &Term, wm: &WidthMap, parent_w: u32) -> Term {
    match t {
        Term::Var(_) | Term::ConstVar(_) => t.clone(),
        Term::Const(c) => Term::Const(c.clone()),
        Term::Node(n) => {
            let w = n.width.lit().map(|w| wm.get(w)).unwrap_or(parent_w);
            let op = match n.op {
                Op::Slice { hi, lo } => {
                    let hi2 = wm.get(hi + 1).saturating_sub(1);
                    let lo2 = if lo == 0 { 0 } else { wm.get(lo).min(hi2) };
                    Op::Slice { hi: hi2, lo: lo2 }
                }
                other => other,
            };
            let mut args = Vec::with_capacity(n.args.len());
            for (i, a) in n.args.iter().enumerate() {
                let aw = a.width.lit().map(|x| wm.get(x)).unwrap_or(1);
                let mut child = shrink_term(&a.term, wm, aw);
                // Shift amounts: keep the amount meaningful at the shrunk
                // width rather than always shifting everything out.
                if i == 1 && matches!(n.op, Op::Shl | Op::Shr) {
                    if let Term::Const(c) = &child {
                        if let Some(v) = c.to_u32() {
                            child = Term::Const(BigUint::from(v.min(w.saturating_sub(1).max(1))));
                        }
                    }
                }
                args.push(Arg {
                    width: WidthSpec::Lit(aw),
                    signage: a.signage.clone(),
                    term: Rc::new(child),
                });
            }
            Term::Node(Node {
                op,
                width: WidthSpec::Lit(w),
                args,
            })
        }
    }
}

/// Applies a width map to a whole module.
pub fn shrink_module(m: &DesignModule, wm: &WidthMap) -> DesignModule {
    let port = |p: &PortDecl| PortDecl {
        name: p.name.clone(),
        width: wm.get(p.width),
        signed: p.signed,
    };
    DesignModule {
        name: m.name.clone(),
        inputs: m.inputs.iter().map(port).collect(),
        outputs: m.outputs.iter().map(port).collect(),
        bindings: m
            .bindings
            .iter()
            .map(|b| Binding {
                name: b.name.clone(),
                width: wm.get(b.width),
                term: Rc::new(shrink_term(&b.term, wm, wm.get(b.width))),
            })
            .collect(),
        output_map: m.output_map.clone(),
    }
}
