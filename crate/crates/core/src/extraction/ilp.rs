//! Exact common-subexpression-aware extraction: 0/1 branch-and-bound over
//! node selections with the greedy solution as incumbent. Cycle avoidance is
//! enforced lazily during search instead of carrying the big-N topological
//! rows; the exported LP keeps the literal formulation for cross-checks.

use super::{greedy_extract, live_classes, CostModel, ExtractError, ExtractionResult, Status};
use crate::engine::{EGraph, Id};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::time::{Duration, Instant};

struct Cand {
    cost: u64,
    idx: usize,
    children: Vec<Id>,
}

struct Search<'a> {
    eg: &'a EGraph,
    cands: HashMap<Id, Vec<Cand>>,
    min_cost: HashMap<Id, u64>,
    chosen: HashMap<Id, usize>, // class -> candidate index (into cands)
    need: BTreeSet<Id>,
    need_sum: u64,
    best_cost: u64,
    best: BTreeMap<Id, usize>, // class -> node idx
    deadline: Instant,
    timed_out: bool,
    tick: u32,
}

impl<'a> Search<'a> {
    fn reaches(&self, from: Id, target: Id, fuel: &mut u32) -> bool {
        if *fuel == 0 {
            return true; // conservative: treat as cyclic when out of fuel
        }
        *fuel -= 1;
        if from == target {
            return true;
        }
        if let Some(&ci) = self.chosen.get(&from) {
            for k in &self.cands[&from][ci].children {
                if self.reaches(*k, target, fuel) {
                    return true;
                }
            }
        }
        false
    }

    fn dfs(&mut self, selcost: u64) {
        self.tick = self.tick.wrapping_add(1);
        if self.tick % 64 == 0 && Instant::now() >= self.deadline {
            self.timed_out = true;
        }
        if self.timed_out {
            return;
        }
        let class = match self.need.iter().next() {
            None => {
                if selcost < self.best_cost {
                    self.best_cost = selcost;
                    self.best = self
                        .chosen
                        .iter()
                        .map(|(c, ci)| (*c, self.cands[c][*ci].idx))
                        .collect();
                }
                return;
            }
            Some(c) => *c,
        };
        self.need.remove(&class);
        self.need_sum -= self.min_cost[&class];
        let ncand = self.cands[&class].len();
        for ci in 0..ncand {
            let (cost, children) = {
                let c = &self.cands[&class][ci];
                (c.cost, c.children.clone())
            };
            // Admissible bound: chosen cost plus per-class minima of the
            // outstanding classes.
            if selcost + cost + self.need_sum >= self.best_cost {
                continue;
            }
            // A child that reaches back to this class would close a cycle.
            let mut fuel = 100_000u32;
            if children
                .iter()
                .any(|k| self.reaches(*k, class, &mut fuel))
            {
                continue;
            }
            self.chosen.insert(class, ci);
            let mut added = Vec::new();
            for k in &children {
                if !self.chosen.contains_key(k) && !self.need.contains(k) {
                    self.need.insert(*k);
                    self.need_sum += self.min_cost[k];
                    added.push(*k);
                }
            }
            self.dfs(selcost + cost);
            for k in added {
                self.need.remove(&k);
                self.need_sum -= self.min_cost[&k];
            }
            self.chosen.remove(&class);
            if self.timed_out {
                break;
            }
        }
        self.need.insert(class);
        self.need_sum += self.min_cost[&class];
    }
}

/// Solves the extraction program exactly; on timeout returns the best
/// incumbent (seeded by the greedy solution) with `Status::Incumbent`.
pub fn ilp_extract(
    eg: &EGraph,
    roots: &[Id],
    model: &CostModel,
    timeout: Duration,
) -> Result<ExtractionResult, ExtractError> {
    if roots.is_empty() {
        return Err(ExtractError::EmptyRoots);
    }
    let deadline = Instant::now() + timeout;
    let greedy = greedy_extract(eg, roots, model)?;
    let live = live_classes(eg, roots);
    let cf = CostModel::class_const(eg);

    let mut cands: HashMap<Id, Vec<Cand>> = HashMap::new();
    for c in &live {
        let cls = eg.class(*c);
        let mut v: Vec<Cand> = cls
            .nodes
            .iter()
            .enumerate()
            .map(|(idx, n)| {
                let mut children: Vec<Id> =
                    n.children().iter().map(|a| eg.find(a.class)).collect();
                children.sort();
                children.dedup();
                Cand {
                    cost: model.node_cost(n, &cf),
                    idx,
                    children,
                }
            })
            .collect();
        v.sort_by(|a, b| (a.cost, a.idx).cmp(&(b.cost, b.idx)));
        // Dominance: drop candidates no cheaper than another with a subset
        // of dependencies (value-preserving; first occurrence kept).
        let mut kept: Vec<Cand> = Vec::new();
        'cand: for c in v {
            for k in &kept {
                if k.cost <= c.cost && k.children.iter().all(|x| c.children.contains(x)) {
                    continue 'cand;
                }
            }
            kept.push(c);
        }
        cands.insert(*c, kept);
    }
    let min_cost: HashMap<Id, u64> = cands
        .iter()
        .map(|(c, v)| (*c, v.iter().map(|x| x.cost).min().unwrap_or(u64::MAX / 4)))
        .collect();

    let mut need: BTreeSet<Id> = roots.iter().map(|r| eg.find(*r)).collect();
    let need_sum = need.iter().map(|c| min_cost[c]).sum();
    let mut s = Search {
        eg,
        cands,
        min_cost,
        chosen: HashMap::new(),
        need: std::mem::take(&mut need),
        need_sum,
        best_cost: greedy.dag_cost,
        best: greedy.choices.clone(),
        deadline,
        timed_out: Instant::now() >= deadline,
        tick: 0,
    };
    s.dfs(0);
    let _ = s.eg;
    let status = if s.timed_out {
        Status::Incumbent
    } else {
        Status::Optimal
    };
    let mut res = ExtractionResult {
        choices: s.best,
        dag_cost: 0,
        reported_cost: s.best_cost,
        status,
    };
    res.dag_cost = res.dag_cost_of(eg, model, roots);
    debug_assert_eq!(res.dag_cost, res.reported_cost);
    Ok(res)
}
