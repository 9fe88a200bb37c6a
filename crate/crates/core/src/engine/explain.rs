//! Proof forest: every inserted node instance is a tree node; unions link
//! trees with the justifying rewrite or congruence. A flat proof walks the
//! path between two instances and expands congruence edges recursively so
//! adjacent terms differ by exactly one rewrite at one position.

use super::{ENode, EGraph, Id, MapBinding};
use crate::ir::{Arg, Node, Term};
use std::collections::HashMap;
use std::rc::Rc;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Justification {
    Rule {
        name: String,
        variant: usize,
        binding: MapBinding,
    },
    Congruence,
}

impl Justification {
    pub fn label(&self) -> String {
        match self {
            Justification::Rule { name, .. } => name.clone(),
            Justification::Congruence => "congruence".into(),
        }
    }

    pub fn binding(&self) -> Option<&MapBinding> {
        match self {
            Justification::Rule { binding, .. } => Some(binding),
            Justification::Congruence => None,
        }
    }
}

#[derive(Debug, Clone)]
struct Connection {
    target: Id,
    just: Justification,
    forward: bool,
}

#[derive(Debug)]
struct ExplainNode {
    node: ENode,
    parent: Option<Connection>,
}

#[derive(Default)]
pub(crate) struct Explain {
    nodes: Vec<ExplainNode>,
    memo: HashMap<ENode, Id>,
}

/// One rewrite application within a proof chain.
#[derive(Debug, Clone)]
pub struct ExplainStep {
    pub rule: String,
    /// False when the rule was used right-to-left along the proof path.
    pub forward: bool,
    pub binding: MapBinding,
}

/// Chain of terms; `terms.len() == steps.len() + 1` and each adjacent pair
/// differs by the single rewrite recorded in the step.
#[derive(Debug, Clone)]
pub struct Explanation {
    pub terms: Vec<Term>,
    pub steps: Vec<ExplainStep>,
}

impl Explain {
    pub(crate) fn add(&mut self, id: Id, node: ENode) {
        debug_assert_eq!(id.0 as usize, self.nodes.len());
        self.memo.insert(node.clone(), id);
        self.nodes.push(ExplainNode { node, parent: None });
    }

    pub(crate) fn instance_of(&self, node: &ENode) -> Option<&Id> {
        self.memo.get(node)
    }

    /// Makes `a` the root of its tree, then hangs it below `b`.
    pub(crate) fn link(&mut self, a: Id, b: Id, just: Justification) {
        self.reroot(a);
        self.nodes[a.0 as usize].parent = Some(Connection {
            target: b,
            just,
            forward: true,
        });
    }

    fn reroot(&mut self, x: Id) {
        // Collect the chain up to the root, then reverse every edge.
        let mut chain = vec![x];
        let mut cur = x;
        while let Some(c) = &self.nodes[cur.0 as usize].parent {
            cur = c.target;
            chain.push(cur);
        }
        for w in chain.windows(2).rev() {
            let (u, v) = (w[0], w[1]);
            let conn = self.nodes[u.0 as usize].parent.clone().expect("edge");
            self.nodes[v.0 as usize].parent = Some(Connection {
                target: u,
                just: conn.just,
                forward: !conn.forward,
            });
        }
        self.nodes[x.0 as usize].parent = None;
    }

    /// Directed edges from `a` to `b` through the forest.
    fn path(&self, a: Id, b: Id) -> Vec<(Id, Connection)> {
        let mut a_chain = vec![a];
        let mut cur = a;
        while let Some(c) = &self.nodes[cur.0 as usize].parent {
            cur = c.target;
            a_chain.push(cur);
        }
        let a_index: HashMap<Id, usize> =
            a_chain.iter().enumerate().map(|(i, id)| (*id, i)).collect();
        // Walk up from b until we meet a's chain.
        let mut b_chain = vec![b];
        let mut cur = b;
        let lca = loop {
            if let Some(i) = a_index.get(&cur) {
                break *i;
            }
            let c = self.nodes[cur.0 as usize]
                .parent
                .as_ref()
                .expect("instances share a tree");
            cur = c.target;
            b_chain.push(cur);
        };
        let mut edges = Vec::new();
        for w in a_chain[..=lca].windows(2) {
            let conn = self.nodes[w[0].0 as usize].parent.clone().expect("edge");
            edges.push((w[0], conn));
        }
        // b-side edges reversed: stored at the child pointing up.
        let mut down = Vec::new();
        for w in b_chain.windows(2) {
            let (child, parent) = (w[0], w[1]);
            let conn = self.nodes[child.0 as usize].parent.clone().expect("edge");
            down.push((
                parent,
                Connection {
                    target: child,
                    just: conn.just,
                    forward: !conn.forward,
                },
            ));
        }
        down.reverse();
        edges.extend(down);
        edges
    }

    fn term_of(&self, id: Id, cache: &mut HashMap<Id, Rc<Term>>) -> Rc<Term> {
        if let Some(t) = cache.get(&id) {
            return t.clone();
        }
        let t = match &self.nodes[id.0 as usize].node {
            ENode::Var(n) => Rc::new(Term::Var(n.clone())),
            ENode::Const(c) => Rc::new(Term::Const(c.clone())),
            ENode::Op { op, width, args } => {
                let targs = args
                    .iter()
                    .map(|a| Arg {
                        width: a.width.into(),
                        signage: a.signage.into(),
                        term: self.term_of(a.class, cache),
                    })
                    .collect();
                Rc::new(Term::Node(Node {
                    op: *op,
                    width: (*width).into(),
                    args: targs,
                }))
            }
        };
        cache.insert(id, t.clone());
        t
    }

    pub(crate) fn flat_proof(&self, a: Id, b: Id) -> Explanation {
        let mut cache = HashMap::new();
        let first = self.term_of(a, &mut cache).as_ref().clone();
        let mut ex = Explanation {
            terms: vec![first],
            steps: Vec::new(),
        };
        self.walk(a, b, &[], &mut ex, &mut cache);
        ex
    }

    fn walk(
        &self,
        a: Id,
        b: Id,
        pos: &[usize],
        ex: &mut Explanation,
        cache: &mut HashMap<Id, Rc<Term>>,
    ) {
        if a == b {
            return;
        }
        for (u, conn) in self.path(a, b) {
            let v = conn.target;
            match &conn.just {
                Justification::Rule { name, variant, binding } => {
                    let replacement = self.term_of(v, cache).as_ref().clone();
                    let cur = ex.terms.last().expect("nonempty");
                    ex.terms.push(splice(cur, pos, &replacement));
                    ex.steps.push(ExplainStep {
                        rule: name.clone(),
                        forward: conn.forward,
                        binding: binding.clone(),
                    });
                    let _ = variant;
                }
                Justification::Congruence => {
                    let nu = self.nodes[u.0 as usize].node.clone();
                    let nv = self.nodes[v.0 as usize].node.clone();
                    let cu = nu.children();
                    let cv = nv.children();
                    debug_assert_eq!(cu.len(), cv.len());
                    for k in 0..cu.len() {
                        if cu[k].class != cv[k].class {
                            let mut p = pos.to_vec();
                            p.push(k);
                            self.walk(cu[k].class, cv[k].class, &p, ex, cache);
                        }
                    }
                }
            }
        }
    }
}

/// Replaces the subterm at an argument path.
fn splice(t: &Term, pos: &[usize], replacement: &Term) -> Term {
    if pos.is_empty() {
        return replacement.clone();
    }
    match t {
        Term::Node(n) => {
            let mut args = n.args.clone();
            let k = pos[0];
            args[k] = Arg {
                width: args[k].width.clone(),
                signage: args[k].signage.clone(),
                term: Rc::new(splice(&args[k].term, &pos[1..], replacement)),
            };
            Term::Node(Node {
                op: n.op,
                width: n.width.clone(),
                args,
            })
        }
        _ => unreachable!("path into a leaf"),
    }
}

impl EGraph {
    /// Replays the provenance log over the initial union-find (identity plus
    /// the hash-cons links created when duplicate instances were inserted)
    /// and checks it reproduces the live partition exactly (test support).
    pub fn provenance_replay_matches(&self) -> bool {
        let n = self.uf_len();
        let mut uf: Vec<u32> = (0..n as u32).collect();
        fn find(uf: &[u32], mut x: u32) -> u32 {
            while uf[x as usize] != x {
                x = uf[x as usize];
            }
            x
        }
        let union = |uf: &mut Vec<u32>, a: u32, b: u32| {
            let (ra, rb) = (find(uf, a), find(uf, b));
            if ra != rb {
                let (r, g) = if ra < rb { (ra, rb) } else { (rb, ra) };
                uf[g as usize] = r;
            }
        };
        for (inst, partner) in self.birth_links() {
            union(&mut uf, inst.0, partner.0);
        }
        for e in &self.provenance {
            union(&mut uf, e.merged_from.0, e.merged_into.0);
        }
        (0..n as u32).all(|i| {
            let live = self.find(Id(i)).0;
            find(&uf, i) == find(&uf, live) && {
                // Same partition both directions.
                let j = find(&uf, i);
                self.find(Id(j)) == self.find(Id(i))
            }
        })
    }

    pub(crate) fn uf_len(&self) -> usize {
        self.uf.len()
    }
}
