//! Rewrite validity conditions: sum-of-products formulas over a fixed
//! feature vocabulary of width/signage predicates, plus the constant True.
//! Conditions are data, shipped in a human-diffable text store and loaded
//! at catalog construction.

use crate::engine::{Bound, MapBinding};
use crate::ir::Signage;
use std::collections::BTreeMap;
use std::fmt;

/// One feature atom over pattern variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    /// `s == unsign`
    SignUnsign(String),
    /// `wi == wj`
    WidthEq(String, String),
    /// `wi < wj`
    WidthLt(String, String),
    /// `wi + 1 < wj`
    WidthPlus1Lt(String, String),
    /// `wi - 1 < wj`
    WidthMinus1Lt(String, String),
    /// `wi + wj < wk`
    WidthSumLt(String, String, String),
    /// `wi + 2^wj < wk`
    WidthShiftLt(String, String, String),
    /// `wi == 1`: separates the degenerate one-bit corners (a 1x1-bit
    /// product fits one bit) that no relative comparison can express.
    WidthIs1(String),
}

impl Atom {
    pub fn eval(&self, b: &MapBinding) -> Option<bool> {
        let w = |n: &str| match b.get(n) {
            Some(Bound::Width(v)) => Some(*v as u64),
            _ => None,
        };
        Some(match self {
            Atom::SignUnsign(s) => match b.get(s) {
                Some(Bound::Sig(v)) => *v == Signage::Unsign,
                _ => return None,
            },
            Atom::WidthEq(i, j) => w(i)? == w(j)?,
            Atom::WidthLt(i, j) => w(i)? < w(j)?,
            Atom::WidthPlus1Lt(i, j) => w(i)? + 1 < w(j)?,
            Atom::WidthMinus1Lt(i, j) => w(i)?.saturating_sub(1) < w(j)?,
            Atom::WidthSumLt(i, j, k) => w(i)? + w(j)? < w(k)?,
            Atom::WidthShiftLt(i, j, k) => {
                let e = w(j)?;
                e < 63 && w(i)? + (1u64 << e) < w(k)?
            }
            Atom::WidthIs1(i) => w(i)? == 1,
        })
    }

    pub fn vars(&self) -> Vec<&str> {
        match self {
            Atom::SignUnsign(a) => vec![a],
            Atom::WidthEq(a, b)
            | Atom::WidthLt(a, b)
            | Atom::WidthPlus1Lt(a, b)
            | Atom::WidthMinus1Lt(a, b) => vec![a, b],
            Atom::WidthSumLt(a, b, c) | Atom::WidthShiftLt(a, b, c) => vec![a, b, c],
            Atom::WidthIs1(a) => vec![a],
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::SignUnsign(s) => write!(f, "{s}=u"),
            Atom::WidthEq(a, b) => write!(f, "{a}=={b}"),
            Atom::WidthLt(a, b) => write!(f, "{a}<{b}"),
            Atom::WidthPlus1Lt(a, b) => write!(f, "{a}+1<{b}"),
            Atom::WidthMinus1Lt(a, b) => write!(f, "{a}-1<{b}"),
            Atom::WidthSumLt(a, b, c) => write!(f, "{a}+{b}<{c}"),
            Atom::WidthShiftLt(a, b, c) => write!(f, "{a}+2^{b}<{c}"),
            Atom::WidthIs1(a) => write!(f, "{a}==1"),
        }
    }
}

fn parse_atom(s: &str) -> Option<Atom> {
    let s = s.trim();
    if let Some(v) = s.strip_suffix("=u") {
        if !v.contains(['<', '=', '+', '-']) {
            return Some(Atom::SignUnsign(v.to_string()));
        }
    }
    if let Some((l, r)) = s.split_once("==") {
        let (l, r) = (l.trim(), r.trim());
        if r == "1" {
            return Some(Atom::WidthIs1(l.into()));
        }
        return Some(Atom::WidthEq(l.into(), r.into()));
    }
    let (l, r) = s.split_once('<')?;
    let (l, r) = (l.trim(), r.trim().to_string());
    if let Some((a, rest)) = l.split_once('+') {
        let a = a.trim();
        let rest = rest.trim();
        if rest == "1" {
            return Some(Atom::WidthPlus1Lt(a.into(), r));
        }
        if let Some(b) = rest.strip_prefix("2^") {
            return Some(Atom::WidthShiftLt(a.into(), b.trim().into(), r));
        }
        return Some(Atom::WidthSumLt(a.into(), rest.into(), r));
    }
    if let Some((a, one)) = l.split_once('-') {
        if one.trim() == "1" {
            return Some(Atom::WidthMinus1Lt(a.trim().into(), r));
        }
        return None;
    }
    Some(Atom::WidthLt(l.into(), r))
}

/// A literal in a product: feature atom with polarity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Literal {
    pub atom: Atom,
    pub positive: bool,
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "{}", self.atom)
        } else {
            write!(f, "!({})", self.atom)
        }
    }
}

/// Validity condition of a rewrite.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Condition {
    True,
    False,
    /// OR of ANDs of literals.
    Sop(Vec<Vec<Literal>>),
}

impl Condition {
    pub fn eval(&self, b: &MapBinding) -> Option<bool> {
        match self {
            Condition::True => Some(true),
            Condition::False => Some(false),
            Condition::Sop(products) => {
                for p in products {
                    let mut ok = true;
                    for l in p {
                        if l.atom.eval(b)? != l.positive {
                            ok = false;
                            break;
                        }
                    }
                    if ok {
                        return Some(true);
                    }
                }
                Some(false)
            }
        }
    }

    pub fn parse(s: &str) -> Option<Condition> {
        let s = s.trim();
        match s {
            "true" => return Some(Condition::True),
            "false" => return Some(Condition::False),
            _ => {}
        }
        let mut products = Vec::new();
        for prod in s.split('|') {
            let prod = prod.trim();
            let prod = prod.strip_prefix('(').unwrap_or(prod);
            let prod = prod.strip_suffix(')').unwrap_or(prod);
            let mut lits = Vec::new();
            for lit in prod.split('&') {
                let lit = lit.trim();
                let (positive, body) = match lit.strip_prefix("!(") {
                    Some(rest) => (false, rest.strip_suffix(')')?),
                    None => match lit.strip_prefix('!') {
                        Some(rest) => (false, rest),
                        None => (true, lit),
                    },
                };
                lits.push(Literal {
                    atom: parse_atom(body)?,
                    positive,
                });
            }
            products.push(lits);
        }
        Some(Condition::Sop(products))
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Condition::True => write!(f, "true"),
            Condition::False => write!(f, "false"),
            Condition::Sop(products) => {
                let parts: Vec<String> = products
                    .iter()
                    .map(|p| {
                        let lits: Vec<String> = p.iter().map(|l| l.to_string()).collect();
                        format!("({})", lits.join(" & "))
                    })
                    .collect();
                write!(f, "{}", parts.join(" | "))
            }
        }
    }
}

/// One shipped record: the condition plus generation metadata and, for
/// conditional rules, a sample rejected map with confirmed non-equivalence.
#[derive(Debug, Clone)]
pub struct StoreRecord {
    pub cond: Condition,
    pub wmax: u32,
    pub depth: usize,
    pub maps: u64,
    pub true_maps: u64,
    pub sample_false: Option<MapBinding>,
}

/// Text-backed condition store, one record per rule variant.
#[derive(Debug, Clone, Default)]
pub struct ConditionStore {
    pub records: BTreeMap<String, StoreRecord>,
}

impl ConditionStore {
    pub fn empty() -> Self {
        Self::default()
    }

    /// The checked-in store regenerated by `dpopt synth-cond --regen-store`.
    pub fn embedded() -> Self {
        Self::parse(include_str!("../../data/conditions.sop")).expect("embedded store parses")
    }

    pub fn get(&self, key: &str) -> Option<&StoreRecord> {
        self.records.get(key)
    }

    pub fn parse(text: &str) -> Option<Self> {
        let mut records = BTreeMap::new();
        let mut cur: Option<(String, StoreRecord)> = None;
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix("rule ") {
                let mut parts = rest.split_whitespace();
                let name = parts.next()?.to_string();
                let mut rec = StoreRecord {
                    cond: Condition::True,
                    wmax: 0,
                    depth: 0,
                    maps: 0,
                    true_maps: 0,
                    sample_false: None,
                };
                for kv in parts {
                    let (k, v) = kv.split_once('=')?;
                    match k {
                        "wmax" => rec.wmax = v.parse().ok()?,
                        "depth" => rec.depth = v.parse().ok()?,
                        "maps" => rec.maps = v.parse().ok()?,
                        "true" => rec.true_maps = v.parse().ok()?,
                        _ => return None,
                    }
                }
                cur = Some((name, rec));
            } else if let Some(rest) = line.strip_prefix("cond ") {
                cur.as_mut()?.1.cond = Condition::parse(rest)?;
            } else if let Some(rest) = line.strip_prefix("false ") {
                cur.as_mut()?.1.sample_false = Some(parse_binding(rest)?);
            } else if line == "end" {
                let (name, rec) = cur.take()?;
                records.insert(name, rec);
            } else {
                return None;
            }
        }
        Some(ConditionStore { records })
    }

    pub fn render(&self) -> String {
        let mut out = String::from("# condition store: one sum-of-products record per rule variant\n");
        for (name, r) in &self.records {
            out.push_str(&format!(
                "rule {name} wmax={} depth={} maps={} true={}\n",
                r.wmax, r.depth, r.maps, r.true_maps
            ));
            out.push_str(&format!("cond {}\n", r.cond));
            if let Some(m) = &r.sample_false {
                out.push_str(&format!("false {}\n", render_binding(m)));
            }
            out.push_str("end\n");
        }
        out
    }
}

pub fn render_binding(b: &MapBinding) -> String {
    b.iter()
        .filter_map(|(k, v)| match v {
            Bound::Width(w) => Some(format!("{k}={w}")),
            Bound::Sig(s) => Some(format!(
                "{k}={}",
                if *s == Signage::Unsign { "u" } else { "s" }
            )),
            Bound::Class(_) => None,
        })
        .collect::<Vec<_>>()
        .join(",")
}

pub fn parse_binding(s: &str) -> Option<MapBinding> {
    let mut b = MapBinding::new();
    for kv in s.split(',') {
        let (k, v) = kv.split_once('=')?;
        let bound = match v {
            "u" => Bound::Sig(Signage::Unsign),
            "s" => Bound::Sig(Signage::Sign),
            n => Bound::Width(n.parse().ok()?),
        };
        b.insert(k.trim().to_string(), bound);
    }
    Some(b)
}
