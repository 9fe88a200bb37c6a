//! Extraction: selecting one node per needed class to form the cheapest
//! acyclic implementation of the root classes — a fast greedy fixpoint and
//! an exact 0/1 branch-and-bound sharing the paper's ILP formulation (the
//! literal LP is exported for cross-checking).

mod cost;
mod ilp;
mod lp;

pub use cost::{csd_digits, CostConfig, CostModel};
pub use ilp::ilp_extract;
pub use lp::{export_lp, import_solution, solve_lp_bruteforce};

use crate::engine::{EGraph, ENode, Id};
use crate::ir::{Arg, Node, Term};
use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Status {
    Optimal,
    /// Best incumbent at timeout.
    Incumbent,
    Greedy,
}

#[derive(Debug, thiserror::Error)]
pub enum ExtractError {
    #[error("class {0} has no finite-cost acyclic implementation")]
    Unextractable(Id),
    #[error("no root classes given")]
    EmptyRoots,
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad solution file: {0}")]
    BadSolution(String),
}

/// Selected node per needed class plus cost accounting.
#[derive(Debug, Clone)]
pub struct ExtractionResult {
    /// Canonical class id -> index into the class's canonical node list.
    pub choices: BTreeMap<Id, usize>,
    /// Gate cost of the selected sub-DAG, each class counted once.
    pub dag_cost: u64,
    /// The extractor's own objective value (greedy double-counts shared
    /// subterms; the ILP objective equals `dag_cost`).
    pub reported_cost: u64,
    pub status: Status,
}

impl ExtractionResult {
    /// Materializes the implementation of `root` as a term; shared classes
    /// share subterms via `Rc`.
    pub fn term_of(&self, eg: &EGraph, root: Id) -> Result<Term, ExtractError> {
        let mut memo: HashMap<Id, Rc<Term>> = HashMap::new();
        let t = self.term_rec(eg, eg.find(root), &mut memo, &mut Vec::new())?;
        Ok(t.as_ref().clone())
    }

    fn term_rec(
        &self,
        eg: &EGraph,
        class: Id,
        memo: &mut HashMap<Id, Rc<Term>>,
        stack: &mut Vec<Id>,
    ) -> Result<Rc<Term>, ExtractError> {
        let class = eg.find(class);
        if let Some(t) = memo.get(&class) {
            return Ok(t.clone());
        }
        if stack.contains(&class) {
            return Err(ExtractError::Unextractable(class));
        }
        stack.push(class);
        let idx = *self
            .choices
            .get(&class)
            .ok_or(ExtractError::Unextractable(class))?;
        let node = &eg.class(class).nodes[idx];
        let t = match node {
            ENode::Var(n) => Rc::new(Term::Var(n.clone())),
            ENode::Const(c) => Rc::new(Term::Const(c.clone())),
            ENode::Op { op, width, args } => {
                let mut targs = Vec::with_capacity(args.len());
                for a in args {
                    let child = self.term_rec(eg, a.class, memo, stack)?;
                    targs.push(Arg {
                        width: a.width.into(),
                        signage: a.signage.into(),
                        term: child,
                    });
                }
                Rc::new(Term::Node(Node {
                    op: *op,
                    width: (*width).into(),
                    args: targs,
                }))
            }
        };
        stack.pop();
        memo.insert(class, t.clone());
        Ok(t)
    }

    /// Classes actually used by the roots under these choices.
    pub fn needed_classes(&self, eg: &EGraph, roots: &[Id]) -> Vec<Id> {
        let mut seen = Vec::new();
        let mut todo: Vec<Id> = roots.iter().map(|r| eg.find(*r)).collect();
        while let Some(c) = todo.pop() {
            if seen.contains(&c) {
                continue;
            }
            if let Some(&idx) = self.choices.get(&c) {
                seen.push(c);
                for a in eg.class(c).nodes[idx].children() {
                    todo.push(eg.find(a.class));
                }
            }
        }
        seen.sort();
        seen
    }

    pub fn dag_cost_of(&self, eg: &EGraph, model: &CostModel, roots: &[Id]) -> u64 {
        let cf = CostModel::class_const(eg);
        self.needed_classes(eg, roots)
            .iter()
            .map(|c| model.node_cost(&eg.class(*c).nodes[self.choices[c]], &cf))
            .sum()
    }

    /// Operator tally of the selected implementation (acceptance checks).
    pub fn op_counts(&self, eg: &EGraph, roots: &[Id]) -> BTreeMap<String, usize> {
        let mut out = BTreeMap::new();
        for c in self.needed_classes(eg, roots) {
            if let ENode::Op { op, .. } = &eg.class(c).nodes[self.choices[&c]] {
                *out.entry(op.token()).or_insert(0) += 1;
            }
        }
        out
    }
}

/// All classes reachable from the roots through any member node.
pub fn live_classes(eg: &EGraph, roots: &[Id]) -> Vec<Id> {
    let mut seen: Vec<Id> = Vec::new();
    let mut todo: Vec<Id> = roots.iter().map(|r| eg.find(*r)).collect();
    while let Some(c) = todo.pop() {
        if seen.contains(&c) {
            continue;
        }
        seen.push(c);
        for n in &eg.class(c).nodes {
            for a in n.children() {
                let k = eg.find(a.class);
                if !seen.contains(&k) {
                    todo.push(k);
                }
            }
        }
    }
    seen.sort();
    seen
}

/// Greedy fixpoint extraction: per-class minimum of node cost plus child
/// class costs (no sharing credit). Derivation height breaks zero-cost ties
/// so selections are always acyclic.
pub fn greedy_extract(
    eg: &EGraph,
    roots: &[Id],
    model: &CostModel,
) -> Result<ExtractionResult, ExtractError> {
    if roots.is_empty() {
        return Err(ExtractError::EmptyRoots);
    }
    let live = live_classes(eg, roots);
    let cf = CostModel::class_const(eg);
    const INF: u64 = u64::MAX / 4;
    let mut cost: HashMap<Id, (u64, u64, usize)> = HashMap::new(); // (cost, height, node)
    for c in &live {
        cost.insert(*c, (INF, INF, usize::MAX));
    }
    loop {
        let mut changed = false;
        for c in &live {
            let cls = eg.class(*c);
            let mut best = cost[c];
            for (i, n) in cls.nodes.iter().enumerate() {
                let mut total = model.node_cost(n, &cf);
                let mut height = 0u64;
                let mut ok = true;
                for a in n.children() {
                    let (cc, ch, _) = cost[&eg.find(a.class)];
                    if cc >= INF {
                        ok = false;
                        break;
                    }
                    total = total.saturating_add(cc);
                    height = height.max(ch + 1);
                }
                if ok && (total, height, i) < best {
                    best = (total, height, i);
                }
            }
            if best != cost[c] {
                cost.insert(*c, best);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let mut choices = BTreeMap::new();
    for c in &live {
        let (cc, _, i) = cost[c];
        if cc < INF {
            choices.insert(*c, i);
        }
    }
    for r in roots {
        if !choices.contains_key(&eg.find(*r)) {
            return Err(ExtractError::Unextractable(eg.find(*r)));
        }
    }
    let reported: u64 = roots
        .iter()
        .map(|r| cost[&eg.find(*r)].0)
        .fold(0u64, |a, b| a.saturating_add(b));
    let mut res = ExtractionResult {
        choices,
        dag_cost: 0,
        reported_cost: reported,
        status: Status::Greedy,
    };
    res.dag_cost = res.dag_cost_of(eg, model, roots);
    Ok(res)
}

#[cfg(test)]
mod tests;
