//! LP-format export of the extraction program, matching the written
//! formulation: binary selection variables, child-implication and
//! root-coverage constraints, and big-N topological-order rows over integer
//! class variables. A small independent interpreter doubles as the external
//! solver in round-trip tests, and solution files can be imported back.

use super::{live_classes, CostModel, ExtractError, ExtractionResult, Status};
use crate::engine::{EGraph, Id};
use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

/// Writes the extraction problem in LP format. Rejects empty root sets.
pub fn export_lp(eg: &EGraph, roots: &[Id], model: &CostModel) -> Result<String, ExtractError> {
    if roots.is_empty() {
        return Err(ExtractError::EmptyRoots);
    }
    let live = live_classes(eg, roots);
    let cf = CostModel::class_const(eg);
    let nclasses = live.len() as i64;
    let mut obj = Vec::new();
    let mut rows = Vec::new();
    let mut binaries = Vec::new();
    for c in &live {
        for (i, n) in eg.class(*c).nodes.iter().enumerate() {
            let x = format!("x_{}_{}", c.0, i);
            obj.push(format!("{} {x}", model.node_cost(n, &cf)));
            binaries.push(x.clone());
            let mut kids: Vec<Id> = n.children().iter().map(|a| eg.find(a.class)).collect();
            kids.sort();
            kids.dedup();
            for k in kids {
                // x_n <= sum of the child class's nodes.
                let sum: Vec<String> = (0..eg.class(k).nodes.len())
                    .map(|j| format!("x_{}_{}", k.0, j))
                    .collect();
                rows.push(format!(
                    "child_{}_{}_{}: {x} - {} <= 0",
                    c.0,
                    i,
                    k.0,
                    sum.join(" - ")
                ));
                // t_{C(n)} - N x_n - t_k >= 1 - N.
                rows.push(format!(
                    "topo_{}_{}_{}: t_{} - {nclasses} x_{}_{} - t_{} >= {}",
                    c.0,
                    i,
                    k.0,
                    c.0,
                    c.0,
                    i,
                    k.0,
                    1 - nclasses
                ));
            }
        }
    }
    let mut root_set: Vec<Id> = roots.iter().map(|r| eg.find(*r)).collect();
    root_set.sort();
    root_set.dedup();
    for r in &root_set {
        let sum: Vec<String> = (0..eg.class(*r).nodes.len())
            .map(|j| format!("x_{}_{}", r.0, j))
            .collect();
        rows.push(format!("root_{}: {} = 1", r.0, sum.join(" + ")));
    }
    let mut out = String::new();
    let _ = writeln!(out, "\\ extraction problem: {} classes", live.len());
    let _ = writeln!(out, "Minimize");
    let _ = writeln!(out, " obj: {}", obj.join(" + "));
    let _ = writeln!(out, "Subject To");
    for r in &rows {
        let _ = writeln!(out, " {r}");
    }
    let _ = writeln!(out, "Bounds");
    for c in &live {
        let _ = writeln!(out, " 0 <= t_{} <= {nclasses}", c.0);
    }
    let _ = writeln!(out, "Binaries");
    let _ = writeln!(out, " {}", binaries.join(" "));
    let _ = writeln!(out, "End");
    Ok(out)
}

/// Reads a solution file of `name value` lines and reconstructs the choice.
pub fn import_solution(
    text: &str,
    eg: &EGraph,
    roots: &[Id],
    model: &CostModel,
) -> Result<ExtractionResult, ExtractError> {
    let mut choices: BTreeMap<Id, usize> = BTreeMap::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('\\') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (name, value) = (
            parts.next().ok_or_else(|| ExtractError::BadSolution(line.into()))?,
            parts.next().ok_or_else(|| ExtractError::BadSolution(line.into()))?,
        );
        let v: f64 = value
            .parse()
            .map_err(|_| ExtractError::BadSolution(line.into()))?;
        if let Some(rest) = name.strip_prefix("x_") {
            if v > 0.5 {
                let (c, i) = rest
                    .split_once('_')
                    .ok_or_else(|| ExtractError::BadSolution(line.into()))?;
                let class = Id(c.parse().map_err(|_| ExtractError::BadSolution(line.into()))?);
                let idx: usize = i.parse().map_err(|_| ExtractError::BadSolution(line.into()))?;
                if choices.insert(class, idx).is_some() {
                    return Err(ExtractError::BadSolution(format!(
                        "two selections for class {class}"
                    )));
                }
            }
        }
    }
    let mut res = ExtractionResult {
        choices,
        dag_cost: 0,
        reported_cost: 0,
        status: Status::Optimal,
    };
    res.dag_cost = res.dag_cost_of(eg, model, roots);
    res.reported_cost = res.dag_cost;
    // Structural validity: every root implemented, acyclic.
    for r in roots {
        res.term_of(eg, *r)?;
    }
    Ok(res)
}

#[derive(Debug, Clone)]
struct Constraint {
    terms: Vec<(i64, String)>,
    op: std::cmp::Ordering, // Less = <=, Greater = >=, Equal = =
    rhs: i64,
}

/// Minimal LP interpreter plus exhaustive 0/1 solver; the stand-in for an
/// external ILP tool in round-trip tests. Returns assignments of the binary
/// variables in an optimal solution.
pub fn solve_lp_bruteforce(lp: &str) -> Result<BTreeMap<String, u64>, ExtractError> {
    let bad = |m: &str| ExtractError::BadSolution(m.to_string());
    let mut section = "";
    let mut objective: Vec<(i64, String)> = Vec::new();
    let mut constraints: Vec<Constraint> = Vec::new();
    let mut bounds: HashMap<String, (i64, i64)> = HashMap::new();
    let mut binaries: Vec<String> = Vec::new();
    for raw in lp.lines() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('\\') {
            continue;
        }
        match line {
            "Minimize" | "Subject To" | "Bounds" | "Binaries" | "End" => {
                section = match line {
                    "Minimize" => "obj",
                    "Subject To" => "st",
                    "Bounds" => "bounds",
                    "Binaries" => "bin",
                    _ => "",
                };
                continue;
            }
            _ => {}
        }
        match section {
            "obj" => {
                let body = line.split_once(':').map(|x| x.1).unwrap_or(line);
                objective.extend(parse_terms(body).ok_or_else(|| bad("objective"))?);
            }
            "st" => {
                let body = line.split_once(':').map(|x| x.1).unwrap_or(line).trim();
                let (lhs, op, rhs) = if let Some((l, r)) = body.split_once("<=") {
                    (l, std::cmp::Ordering::Less, r)
                } else if let Some((l, r)) = body.split_once(">=") {
                    (l, std::cmp::Ordering::Greater, r)
                } else if let Some((l, r)) = body.split_once('=') {
                    (l, std::cmp::Ordering::Equal, r)
                } else {
                    return Err(bad("constraint"));
                };
                constraints.push(Constraint {
                    terms: parse_terms(lhs).ok_or_else(|| bad("terms"))?,
                    op,
                    rhs: rhs.trim().parse().map_err(|_| bad("rhs"))?,
                });
            }
            "bounds" => {
                // `lo <= var <= hi`
                let parts: Vec<&str> = line.split("<=").map(|s| s.trim()).collect();
                if parts.len() != 3 {
                    return Err(bad("bounds"));
                }
                bounds.insert(
                    parts[1].to_string(),
                    (
                        parts[0].parse().map_err(|_| bad("lo"))?,
                        parts[2].parse().map_err(|_| bad("hi"))?,
                    ),
                );
            }
            "bin" => {
                binaries.extend(line.split_whitespace().map(|s| s.to_string()));
            }
            _ => return Err(bad("line outside any section")),
        }
    }
    if binaries.len() > 24 {
        return Err(bad("brute-force solver handles <= 24 binaries"));
    }
    let mut best: Option<(i64, BTreeMap<String, u64>)> = None;
    for mask in 0u64..(1u64 << binaries.len()) {
        let assign: HashMap<&str, i64> = binaries
            .iter()
            .enumerate()
            .map(|(i, b)| (b.as_str(), (mask >> i & 1) as i64))
            .collect();
        if !feasible(&constraints, &assign, &bounds) {
            continue;
        }
        let cost: i64 = objective
            .iter()
            .map(|(k, v)| k * assign.get(v.as_str()).copied().unwrap_or(0))
            .sum();
        let better = match &best {
            None => true,
            Some((c, _)) => cost < *c,
        };
        if better {
            best = Some((
                cost,
                binaries
                    .iter()
                    .enumerate()
                    .map(|(i, b)| (b.clone(), mask >> i & 1))
                    .collect(),
            ));
        }
    }
    best.map(|(_, a)| a)
        .ok_or_else(|| ExtractError::BadSolution("infeasible".into()))
}

fn parse_terms(s: &str) -> Option<Vec<(i64, String)>> {
    let mut out = Vec::new();
    let mut sign = 1i64;
    let mut coef: Option<i64> = None;
    for tok in s.split_whitespace() {
        match tok {
            "+" => {
                sign = 1;
                coef = None;
            }
            "-" => {
                sign = -1;
                coef = None;
            }
            t => {
                if let Ok(k) = t.parse::<i64>() {
                    coef = Some(k);
                } else {
                    out.push((sign * coef.unwrap_or(1), t.to_string()));
                    sign = 1;
                    coef = None;
                }
            }
        }
    }
    Some(out)
}

/// Checks all constraints under the binary assignment; rows mentioning `t_`
/// variables become difference constraints solved by Bellman-Ford longest
/// paths within the declared bounds.
fn feasible(
    constraints: &[Constraint],
    assign: &HashMap<&str, i64>,
    bounds: &HashMap<String, (i64, i64)>,
) -> bool {
    // t-variable difference constraints: t_a - t_b >= w.
    let mut diff: Vec<(String, String, i64)> = Vec::new();
    for c in constraints {
        let mut tvars: Vec<(i64, &str)> = Vec::new();
        let mut fixed = 0i64;
        for (k, v) in &c.terms {
            if v.starts_with("t_") {
                tvars.push((*k, v.as_str()));
            } else {
                fixed += k * assign.get(v.as_str()).copied().unwrap_or(0);
            }
        }
        match (tvars.as_slice(), c.op) {
            ([], std::cmp::Ordering::Less) => {
                if fixed > c.rhs {
                    return false;
                }
            }
            ([], std::cmp::Ordering::Greater) => {
                if fixed < c.rhs {
                    return false;
                }
            }
            ([], std::cmp::Ordering::Equal) => {
                if fixed != c.rhs {
                    return false;
                }
            }
            ([(1, a), (-1, b)], std::cmp::Ordering::Greater) => {
                diff.push((a.to_string(), b.to_string(), c.rhs - fixed));
            }
            _ => return false,
        }
    }
    // Longest-path feasibility with bounds via Bellman-Ford on lower bounds;
    // a relaxation still changing after |V| rounds means a positive cycle.
    let mut lo: HashMap<String, i64> = HashMap::new();
    for (v, (l, _)) in bounds {
        lo.insert(v.clone(), *l);
    }
    let nv = lo.len().max(1);
    let mut changed = true;
    for _ in 0..=nv {
        changed = false;
        for (a, b, w) in &diff {
            let tb = *lo.get(b).unwrap_or(&0);
            let ta = lo.entry(a.clone()).or_insert(0);
            if *ta < tb + w {
                *ta = tb + w;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    !changed
        && lo
            .iter()
            .all(|(v, val)| bounds.get(v).map(|(_, hi)| val <= hi).unwrap_or(true))
}
