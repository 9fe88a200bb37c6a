//! The e-graph: hash-consed typed e-nodes in equivalence classes with
//! union-find, congruence-restoring rebuild, constant-folding and
//! name-retention analyses, and union provenance for proof production.

mod ematch;
mod explain;
mod saturate;

pub use ematch::{ematch, ematch_pattern, Bound, MapBinding, Match};
pub use explain::{ExplainStep, Explanation, Justification};
pub use saturate::{run_saturation, ApplyOutcome, IterStats, Limits, RewriteRule, RunReport, StopReason};

use crate::ir::{Arg, Env, IrError, Node, Signage, Term};
use explain::Explain;
use num_bigint::BigUint;
use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;

/// E-class id. Every id is also the identity of the node instance whose
/// insertion created it; the union-find maps instances to canonical classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Id(pub u32);

impl fmt::Display for Id {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0)
    }
}

/// Typed operand slot of an e-node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EArg {
    pub width: u32,
    pub signage: Signage,
    pub class: Id,
}

/// An e-node: operator with output width and annotated child classes, or a
/// leaf.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ENode {
    Var(String),
    Const(BigUint),
    Op {
        op: crate::ir::Op,
        width: u32,
        args: Vec<EArg>,
    },
}

impl ENode {
    pub fn children(&self) -> &[EArg] {
        match self {
            ENode::Op { args, .. } => args,
            _ => &[],
        }
    }

    fn map_children(&self, mut f: impl FnMut(Id) -> Id) -> ENode {
        match self {
            ENode::Op { op, width, args } => ENode::Op {
                op: *op,
                width: *width,
                args: args
                    .iter()
                    .map(|a| EArg {
                        width: a.width,
                        signage: a.signage,
                        class: f(a.class),
                    })
                    .collect(),
            },
            other => other.clone(),
        }
    }
}

/// One equivalence class.
#[derive(Debug, Clone)]
pub struct EClass {
    pub id: Id,
    pub nodes: Vec<ENode>,
    /// Uncanonical parent instances: (node as inserted, instance id).
    parents: Vec<(ENode, Id)>,
    /// Constant value shared by every member, when known.
    pub const_val: Option<BigUint>,
    /// Retained original signal name with its binding order.
    pub name: Option<(String, usize)>,
}

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error("rewrite references unbound variable {0}")]
    IncompleteMap(String),
    #[error("analysis conflict in {class}: constants {a} vs {b} (unsound rewrite applied)")]
    AnalysisConflict { class: Id, a: BigUint, b: BigUint },
    #[error("terms are not equivalent in the e-graph")]
    NotEquivalentInEGraph,
    #[error(transparent)]
    Ir(#[from] IrError),
}

/// Append-only record of class merges; replaying it over the initial
/// e-graph reproduces the union-find partition.
#[derive(Debug, Clone)]
pub struct ProvEntry {
    pub merged_from: Id,
    pub merged_into: Id,
    pub rule: String,
    pub binding: MapBinding,
}

pub struct EGraph {
    uf: Vec<Id>,
    classes: Vec<Option<EClass>>,
    /// Canonical node -> id of its first inserted instance.
    memo: HashMap<ENode, Id>,
    pending: Vec<(ENode, Id)>,
    analysis_pending: Vec<Id>,
    explain: Explain,
    pub provenance: Vec<ProvEntry>,
    name_order: usize,
    /// Bumped whenever the partition or node set changes.
    version: u64,
    /// Hash-cons links created at instance insertion (duplicate -> first).
    birth_links: Vec<(Id, Id)>,
    node_count: usize,
}

impl Default for EGraph {
    fn default() -> Self {
        Self::new()
    }
}

impl EGraph {
    pub fn new() -> Self {
        EGraph {
            uf: Vec::new(),
            classes: Vec::new(),
            memo: HashMap::new(),
            pending: Vec::new(),
            analysis_pending: Vec::new(),
            explain: Explain::default(),
            provenance: Vec::new(),
            name_order: 0,
            version: 0,
            birth_links: Vec::new(),
            node_count: 0,
        }
    }

    pub fn find(&self, id: Id) -> Id {
        let mut cur = id;
        while self.uf[cur.0 as usize] != cur {
            cur = self.uf[cur.0 as usize];
        }
        cur
    }

    fn find_compress(&mut self, id: Id) -> Id {
        let root = self.find(id);
        let mut cur = id;
        while self.uf[cur.0 as usize] != root {
            let next = self.uf[cur.0 as usize];
            self.uf[cur.0 as usize] = root;
            cur = next;
        }
        root
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn class(&self, id: Id) -> &EClass {
        self.classes[self.find(id).0 as usize]
            .as_ref()
            .expect("canonical class")
    }

    fn class_mut(&mut self, id: Id) -> &mut EClass {
        let root = self.find(id);
        self.classes[root.0 as usize]
            .as_mut()
            .expect("canonical class")
    }

    /// Canonical class ids in id order.
    pub fn class_ids(&self) -> Vec<Id> {
        (0..self.classes.len() as u32)
            .map(Id)
            .filter(|id| self.classes[id.0 as usize].is_some())
            .collect()
    }

    pub fn num_classes(&self) -> usize {
        self.classes.iter().filter(|c| c.is_some()).count()
    }

    /// Canonical nodes over all classes (exact after rebuild; counts not yet
    /// deduplicated members in between).
    pub fn num_nodes(&self) -> usize {
        self.node_count
    }

    fn canonicalize(&self, n: &ENode) -> ENode {
        n.map_children(|c| self.find(c))
    }

    fn fresh(&mut self) -> Id {
        let id = Id(self.uf.len() as u32);
        self.uf.push(id);
        self.classes.push(None);
        id
    }

    /// Inserts one node instance whose children are instance ids. Returns
    /// the instance id (re-adding the identical instance is a no-op).
    fn add_instance(&mut self, n: ENode) -> Id {
        if let Some(&prev) = self.explain.instance_of(&n) {
            return prev;
        }
        let canon = self.canonicalize(&n);
        let id = self.fresh();
        self.explain.add(id, n.clone());
        match self.memo.get(&canon) {
            Some(&first) => {
                let root = self.find(first);
                self.explain.link(id, first, Justification::Congruence);
                self.uf[id.0 as usize] = root;
                self.birth_links.push((id, first));
            }
            None => {
                self.memo.insert(canon.clone(), id);
                self.version += 1;
                let folded = self.fold_node(&canon);
                let mut cls = EClass {
                    id,
                    nodes: vec![canon.clone()],
                    parents: Vec::new(),
                    const_val: folded.clone(),
                    name: None,
                };
                if let ENode::Const(v) = &canon {
                    cls.const_val = Some(v.clone());
                }
                let has_const = cls.const_val.is_some();
                self.node_count += 1;
                self.classes[id.0 as usize] = Some(cls);
                for a in canon.children() {
                    let c = self.find(a.class);
                    self.class_mut(c).parents.push((n.clone(), id));
                }
                if has_const {
                    self.analysis_pending.push(id);
                }
            }
        }
        id
    }

    /// Evaluates a node whose children all carry constant values.
    fn fold_node(&self, n: &ENode) -> Option<BigUint> {
        let (op, width, args) = match n {
            ENode::Op { op, width, args } => (op, width, args),
            _ => return None,
        };
        let mut targs = Vec::with_capacity(args.len());
        for a in args {
            let child = self.find(a.class);
            let v = self.classes[child.0 as usize].as_ref()?.const_val.clone()?;
            targs.push(Arg::new(a.width, a.signage, Term::Const(v)));
        }
        let t = Term::Node(Node {
            op: *op,
            width: (*width).into(),
            args: targs,
        });
        crate::ir::eval_term(&t, &Env::new()).ok()
    }

    /// Hash-consed insertion of a concrete term; structurally identical
    /// subterms share e-classes. Returns the instance id (its `find` is the
    /// canonical class).
    pub fn add_term(&mut self, t: &Term) -> Result<Id, EngineError> {
        match t {
            Term::Var(n) => Ok(self.add_instance(ENode::Var(n.clone()))),
            Term::Const(c) => Ok(self.add_instance(ENode::Const(c.clone()))),
            Term::ConstVar(n) => Err(EngineError::IncompleteMap(n.clone())),
            Term::Node(n) => {
                let w = n
                    .width
                    .lit()
                    .ok_or_else(|| EngineError::IncompleteMap("width variable".into()))?;
                let mut args = Vec::with_capacity(n.args.len());
                for a in &n.args {
                    let cw = a
                        .width
                        .lit()
                        .ok_or_else(|| EngineError::IncompleteMap("width variable".into()))?;
                    let cs = a
                        .signage
                        .lit()
                        .ok_or_else(|| EngineError::IncompleteMap("signage variable".into()))?;
                    let child = self.add_term(&a.term)?;
                    args.push(EArg {
                        width: cw,
                        signage: cs,
                        class: child,
                    });
                }
                Ok(self.add_instance(ENode::Op { op: n.op, width: w, args }))
            }
        }
    }

    /// Attaches an original signal name to a class (first binding wins on
    /// merges).
    pub fn retain_name(&mut self, id: Id, name: &str) {
        let order = self.name_order;
        self.name_order += 1;
        let cls = self.class_mut(id);
        if cls.name.is_none() {
            cls.name = Some((name.to_string(), order));
        }
    }

    /// Merges the classes of two instances, recording the justification for
    /// proofs and provenance. Returns true if the partition changed.
    pub fn union_instances(
        &mut self,
        a: Id,
        b: Id,
        just: Justification,
    ) -> Result<bool, EngineError> {
        let (ra, rb) = (self.find_compress(a), self.find_compress(b));
        if ra == rb {
            return Ok(false);
        }
        self.explain.link(a, b, just.clone());
        // Lower id stays canonical.
        let (root, gone) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.uf[gone.0 as usize] = root;
        self.version += 1;
        self.provenance.push(ProvEntry {
            merged_from: gone,
            merged_into: root,
            rule: just.label(),
            binding: just.binding().cloned().unwrap_or_default(),
        });

        let old = self.classes[gone.0 as usize].take().expect("canonical");
        let had_const;
        {
            let cls = self.classes[root.0 as usize].as_mut().expect("canonical");
            had_const = cls.const_val.is_some();
            cls.nodes.extend(old.nodes);
            self.pending.extend(old.parents.iter().cloned());
            cls.parents.extend(old.parents);
            match (&cls.const_val, &old.const_val) {
                (Some(a), Some(b)) if a != b => {
                    return Err(EngineError::AnalysisConflict {
                        class: root,
                        a: a.clone(),
                        b: b.clone(),
                    });
                }
                (None, Some(v)) => cls.const_val = Some(v.clone()),
                _ => {}
            }
            cls.name = match (cls.name.take(), old.name) {
                (Some(x), Some(y)) => Some(if x.1 <= y.1 { x } else { y }),
                (x, y) => x.or(y),
            };
        }
        if !had_const && self.class(root).const_val.is_some() {
            self.analysis_pending.push(root);
        }
        Ok(true)
    }

    /// Restores congruence and propagates analyses to a fixpoint.
    pub fn rebuild(&mut self) -> Result<(), EngineError> {
        loop {
            while let Some((pnode, pinst)) = self.pending.pop() {
                let canon = self.canonicalize(&pnode);
                match self.memo.get(&canon) {
                    Some(&first) => {
                        if self.find(first) != self.find(pinst) {
                            self.union_instances(first, pinst, Justification::Congruence)?;
                        }
                    }
                    None => {
                        self.memo.insert(canon, pinst);
                    }
                }
            }
            while let Some(id) = self.analysis_pending.pop() {
                let root = self.find(id);
                let v = match self.class(root).const_val.clone() {
                    Some(v) => v,
                    None => continue,
                };
                // Inject the constant leaf into the class.
                let has_leaf = self
                    .class(root)
                    .nodes
                    .iter()
                    .any(|n| matches!(n, ENode::Const(c) if *c == v));
                if !has_leaf {
                    let leaf = self.add_instance(ENode::Const(v.clone()));
                    self.union_instances(
                        leaf,
                        root,
                        Justification::Rule {
                            name: "const-fold".into(),
                            variant: 0,
                            binding: MapBinding::new(),
                        },
                    )?;
                }
                // Parents may fold now.
                let parents: Vec<(ENode, Id)> = self.class(self.find(root)).parents.clone();
                for (pn, pi) in parents {
                    let proot = self.find(pi);
                    if self.class(proot).const_val.is_some() {
                        continue;
                    }
                    let canon = self.canonicalize(&pn);
                    if let Some(v) = self.fold_node(&canon) {
                        self.class_mut(proot).const_val = Some(v);
                        self.analysis_pending.push(proot);
                    }
                }
                if !self.pending.is_empty() {
                    break;
                }
            }
            if self.pending.is_empty() && self.analysis_pending.is_empty() {
                break;
            }
        }
        // Deduplicate canonical member nodes and refresh the exact count.
        let mut total = 0;
        for i in 0..self.classes.len() {
            if self.classes[i].is_none() {
                continue;
            }
            let nodes = self.classes[i].as_ref().unwrap().nodes.clone();
            let mut seen = std::collections::HashSet::new();
            let mut out = Vec::with_capacity(nodes.len());
            for n in nodes {
                let c = self.canonicalize(&n);
                if seen.insert(c.clone()) {
                    out.push(c);
                }
            }
            total += out.len();
            self.classes[i].as_mut().unwrap().nodes = out;
        }
        self.node_count = total;
        Ok(())
    }

    /// Looks up the class of a concrete term without inserting anything.
    pub fn lookup_term(&self, t: &Term) -> Option<Id> {
        match t {
            Term::Var(n) => self
                .memo
                .get(&ENode::Var(n.clone()))
                .map(|id| self.find(*id)),
            Term::Const(c) => self
                .memo
                .get(&ENode::Const(c.clone()))
                .map(|id| self.find(*id)),
            Term::ConstVar(_) => None,
            Term::Node(n) => {
                let mut args = Vec::with_capacity(n.args.len());
                for a in &n.args {
                    args.push(EArg {
                        width: a.width.lit()?,
                        signage: a.signage.lit()?,
                        class: self.lookup_term(&a.term)?,
                    });
                }
                let node = ENode::Op {
                    op: n.op,
                    width: n.width.lit()?,
                    args,
                };
                self.memo
                    .get(&self.canonicalize(&node))
                    .map(|id| self.find(*id))
            }
        }
    }

    /// Produces the step-by-step chain rewriting `before` into `after`;
    /// both must land in one class.
    pub fn explain(&mut self, before: &Term, after: &Term) -> Result<Explanation, EngineError> {
        let ia = self.add_term(before)?;
        let ib = self.add_term(after)?;
        if self.find(ia) != self.find(ib) {
            return Err(EngineError::NotEquivalentInEGraph);
        }
        Ok(self.explain.flat_proof(ia, ib))
    }

    /// JSON dump of classes, nodes and analyses for debugging.
    pub fn dump_json(&self) -> serde_json::Value {
        let classes: Vec<serde_json::Value> = self
            .class_ids()
            .iter()
            .map(|id| {
                let c = self.class(*id);
                serde_json::json!({
                    "id": id.0,
                    "name": c.name.as_ref().map(|(n, _)| n.clone()),
                    "const": c.const_val.as_ref().map(|v| v.to_string()),
                    "nodes": c.nodes.iter().map(|n| self.node_json(n)).collect::<Vec<_>>(),
                })
            })
            .collect();
        serde_json::json!({ "classes": classes })
    }

    fn node_json(&self, n: &ENode) -> serde_json::Value {
        match n {
            ENode::Var(v) => serde_json::json!({ "var": v }),
            ENode::Const(c) => serde_json::json!({ "const": c.to_string() }),
            ENode::Op { op, width, args } => serde_json::json!({
                "op": op.token(),
                "width": width,
                "args": args
                    .iter()
                    .map(|a| serde_json::json!([a.width, a.signage.to_string(), self.find(a.class).0]))
                    .collect::<Vec<_>>(),
            }),
        }
    }

    /// DOT export for figures.
    pub fn dump_dot(&self) -> String {
        let mut s = String::from("digraph egraph {\n  compound=true;\n  node [shape=box];\n");
        for id in self.class_ids() {
            let c = self.class(id);
            s.push_str(&format!(
                "  subgraph cluster_{} {{ label=\"{}\";\n",
                id.0, id
            ));
            for (i, n) in c.nodes.iter().enumerate() {
                let label = match n {
                    ENode::Var(v) => v.clone(),
                    ENode::Const(v) => v.to_string(),
                    ENode::Op { op, width, .. } => format!("{} @{}", op.token(), width),
                };
                s.push_str(&format!("    n{}_{} [label=\"{}\"];\n", id.0, i, label));
            }
            s.push_str("  }\n");
        }
        for id in self.class_ids() {
            let c = self.class(id);
            for (i, n) in c.nodes.iter().enumerate() {
                for (k, a) in n.children().iter().enumerate() {
                    let t = self.find(a.class);
                    s.push_str(&format!(
                        "  n{}_{} -> n{}_0 [label=\"{}:{}{}\", lhead=cluster_{}];\n",
                        id.0,
                        i,
                        t.0,
                        k,
                        a.width,
                        if a.signage == Signage::Sign { "s" } else { "u" },
                        t.0
                    ));
                }
            }
        }
        s.push_str("}\n");
        s
    }

    /// Materializes one member term of a class (test/debug helper).
    pub fn any_term(&self, id: Id) -> Option<Term> {
        self.any_term_guard(id, &mut Vec::new())
    }

    fn any_term_guard(&self, id: Id, stack: &mut Vec<Id>) -> Option<Term> {
        let root = self.find(id);
        if stack.contains(&root) {
            return None;
        }
        stack.push(root);
        let cls = self.class(root);
        let mut out = None;
        'outer: for n in &cls.nodes {
            match n {
                ENode::Var(v) => {
                    out = Some(Term::Var(v.clone()));
                    break;
                }
                ENode::Const(c) => {
                    out = Some(Term::Const(c.clone()));
                    break;
                }
                ENode::Op { op, width, args } => {
                    let mut targs = Vec::with_capacity(args.len());
                    for a in args {
                        match self.any_term_guard(a.class, stack) {
                            Some(t) => targs.push(Arg::new(a.width, a.signage, t)),
                            None => continue 'outer,
                        }
                    }
                    out = Some(Term::Node(Node {
                        op: *op,
                        width: (*width).into(),
                        args: targs,
                    }));
                    break;
                }
            }
        }
        stack.pop();
        out
    }

    pub(crate) fn birth_links(&self) -> &[(Id, Id)] {
        &self.birth_links
    }

    /// Direct node-instance insertion for dynamic rules that assemble
    /// e-nodes (n-ary flattening).
    pub(crate) fn add_enode_instance(&mut self, n: ENode) -> Id {
        self.add_instance(n)
    }

    /// Instantiates a rewrite pattern under a binding, adding the resulting
    /// nodes; term variables resolve to their bound classes. Returns the
    /// instance id.
    pub fn instantiate(&mut self, pat: &Term, binding: &MapBinding) -> Result<Id, EngineError> {
        match pat {
            Term::Var(v) | Term::ConstVar(v) => match binding.get(v) {
                Some(Bound::Class(c)) => Ok(self.find(*c)),
                _ => Err(EngineError::IncompleteMap(v.clone())),
            },
            Term::Const(c) => Ok(self.add_instance(ENode::Const(c.clone()))),
            Term::Node(n) => {
                let w = resolve_width(&n.width, binding)?;
                let mut args = Vec::with_capacity(n.args.len());
                for a in &n.args {
                    args.push(EArg {
                        width: resolve_width(&a.width, binding)?,
                        signage: resolve_sign(&a.signage, binding)?,
                        class: self.instantiate(&a.term, binding)?,
                    });
                }
                Ok(self.add_instance(ENode::Op { op: n.op, width: w, args }))
            }
        }
    }
}

pub(crate) fn resolve_width(
    w: &crate::ir::WidthSpec,
    binding: &MapBinding,
) -> Result<u32, EngineError> {
    match w {
        crate::ir::WidthSpec::Lit(v) => Ok(*v),
        crate::ir::WidthSpec::Var(name) => match binding.get(name) {
            Some(Bound::Width(v)) => Ok(*v),
            _ => Err(EngineError::IncompleteMap(name.clone())),
        },
    }
}

pub(crate) fn resolve_sign(
    s: &crate::ir::SignSpec,
    binding: &MapBinding,
) -> Result<Signage, EngineError> {
    match s {
        crate::ir::SignSpec::Lit(v) => Ok(*v),
        crate::ir::SignSpec::Var(name) => match binding.get(name) {
            Some(Bound::Sig(v)) => Ok(*v),
            _ => Err(EngineError::IncompleteMap(name.clone())),
        },
    }
}

/// Substitutes bound widths/signages into a pattern, leaving term variables
/// in place: the partial evaluation of a pattern by a map.
pub fn instantiate_term(pat: &Term, binding: &MapBinding) -> Result<Term, EngineError> {
    Ok(match pat {
        Term::Var(_) | Term::Const(_) => pat.clone(),
        Term::ConstVar(v) => return Err(EngineError::IncompleteMap(v.clone())),
        Term::Node(n) => {
            let w = resolve_width(&n.width, binding)?;
            let mut args = Vec::with_capacity(n.args.len());
            for a in &n.args {
                args.push(Arg {
                    width: resolve_width(&a.width, binding)?.into(),
                    signage: resolve_sign(&a.signage, binding)?.into(),
                    term: Rc::new(instantiate_term(&a.term, binding)?),
                });
            }
            Term::Node(Node {
                op: n.op,
                width: w.into(),
                args,
            })
        }
    })
}

#[cfg(test)]
mod tests;
