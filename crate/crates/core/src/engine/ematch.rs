//! E-matching of typed patterns. A pattern is a term whose width/signage
//! positions may hold variables and whose leaves may be term variables
//! (match any class), literal constants, or constant wildcards (`#c`,
//! matching any class with a known constant value). A match binds each
//! variable to exactly one kind: width, signage, or e-class.

use super::{EGraph, ENode, Id};
use crate::ir::{residue, Signage, Term, WidthSpec};
use num_bigint::BigInt;
use std::collections::BTreeMap;

/// One binding of a pattern variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Bound {
    Width(u32),
    Sig(Signage),
    Class(Id),
}

/// Partial assignment of pattern variables.
pub type MapBinding = BTreeMap<String, Bound>;

/// A successful match of a rewrite's left-hand side.
#[derive(Debug, Clone)]
pub struct Match {
    /// Canonical class the pattern root matched in.
    pub root: Id,
    pub binding: MapBinding,
    /// Which lhs variant of a multi-pattern rewrite matched.
    pub variant: usize,
}

fn bind_width(b: &mut MapBinding, spec: &WidthSpec, actual: u32) -> bool {
    match spec {
        WidthSpec::Lit(w) => *w == actual,
        WidthSpec::Var(v) => match b.get(v) {
            Some(Bound::Width(w)) => *w == actual,
            Some(_) => false,
            None => {
                b.insert(v.clone(), Bound::Width(actual));
                true
            }
        },
    }
}

fn bind_sign(b: &mut MapBinding, spec: &crate::ir::SignSpec, actual: Signage) -> bool {
    match spec {
        crate::ir::SignSpec::Lit(s) => *s == actual,
        crate::ir::SignSpec::Var(v) => match b.get(v) {
            Some(Bound::Sig(s)) => *s == actual,
            Some(_) => false,
            None => {
                b.insert(v.clone(), Bound::Sig(actual));
                true
            }
        },
    }
}

fn bind_class(b: &mut MapBinding, var: &str, actual: Id) -> bool {
    match b.get(var) {
        Some(Bound::Class(c)) => *c == actual,
        Some(_) => false,
        None => {
            b.insert(var.to_string(), Bound::Class(actual));
            true
        }
    }
}

/// A literal constant in a pattern stands for its value; annotations that
/// cannot represent the value faithfully are not matches.
fn const_representable(c: &num_bigint::BigUint, w: u32, s: Signage) -> bool {
    residue(&BigInt::from(c.clone()), w, s) == BigInt::from(c.clone())
}

/// Matches `pat` against one class, extending `binding`; results collect all
/// consistent extensions in deterministic (class id, node order) order.
fn match_class(eg: &EGraph, pat: &Term, class: Id, binding: &MapBinding, out: &mut Vec<MapBinding>) {
    let class = eg.find(class);
    match pat {
        Term::Var(v) => {
            let mut b = binding.clone();
            if bind_class(&mut b, v, class) {
                out.push(b);
            }
        }
        Term::ConstVar(v) => {
            if eg.class(class).const_val.is_some() {
                let mut b = binding.clone();
                if bind_class(&mut b, v, class) {
                    out.push(b);
                }
            }
        }
        Term::Const(c) => {
            if eg
                .class(class)
                .nodes
                .iter()
                .any(|n| matches!(n, ENode::Const(v) if v == c))
            {
                out.push(binding.clone());
            }
        }
        Term::Node(pn) => {
            for node in &eg.class(class).nodes {
                match_node(eg, pn, node, binding, out);
            }
        }
    }
}

fn match_node(
    eg: &EGraph,
    pn: &crate::ir::Node,
    node: &ENode,
    binding: &MapBinding,
    out: &mut Vec<MapBinding>,
) {
    let (op, width, args) = match node {
        ENode::Op { op, width, args } => (op, width, args),
        _ => return,
    };
    if *op != pn.op || args.len() != pn.args.len() {
        return;
    }
    let mut b = binding.clone();
    if !bind_width(&mut b, &pn.width, *width) {
        return;
    }
    // Bind annotations first (cheap), then recurse into child classes.
    for (pa, ea) in pn.args.iter().zip(args.iter()) {
        if !bind_width(&mut b, &pa.width, ea.width) || !bind_sign(&mut b, &pa.signage, ea.signage) {
            return;
        }
        if let Term::Const(c) = pa.term.as_ref() {
            if !const_representable(c, ea.width, ea.signage) {
                return;
            }
        }
    }
    let mut partial = vec![b];
    for (pa, ea) in pn.args.iter().zip(args.iter()) {
        let mut next = Vec::new();
        for b in &partial {
            match_class(eg, &pa.term, ea.class, b, &mut next);
        }
        if next.is_empty() {
            return;
        }
        partial = next;
    }
    out.extend(partial);
}

/// All matches of a pattern across the e-graph, deduplicated, in canonical
/// class-id order.
pub fn ematch_pattern(eg: &EGraph, pat: &Term) -> Vec<Match> {
    let mut out = Vec::new();
    let empty = MapBinding::new();
    for class in eg.class_ids() {
        let mut found = Vec::new();
        match_class(eg, pat, class, &empty, &mut found);
        for binding in found {
            out.push(Match {
                root: class,
                binding,
                variant: 0,
            });
        }
    }
    // Deduplicate identical bindings reached through different member nodes.
    let mut seen = std::collections::HashSet::new();
    out.retain(|m| seen.insert((m.root, format!("{:?}", m.binding))));
    out
}

/// `ematch_pattern` restricted to matches rooted in one class.
pub fn ematch(eg: &EGraph, pat: &Term, class: Id) -> Vec<MapBinding> {
    let mut found = Vec::new();
    match_class(eg, pat, class, &MapBinding::new(), &mut found);
    let mut seen = std::collections::HashSet::new();
    found.retain(|m| seen.insert(format!("{m:?}")));
    found
}
