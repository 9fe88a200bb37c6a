//! The rewrite catalog: width/signage-conditional datapath rewrites over
//! typed terms, including the merging operators `SUM`, `FMA` and `MUXAR`.
//! Validity conditions ship as data in `data/conditions.sop`.

mod catalog;
mod cond;

pub use catalog::{
    all_specs_for_synthesis, builtin_ruleset, fig_example_rules, mcm_extension_rules,
    MergeAdditions, RuleClass, RuleOptions, RuleSpec, FULL_CATALOG_SIZE,
};
pub use cond::{
    parse_binding, render_binding, Atom, Condition, ConditionStore, Literal, StoreRecord,
};

use crate::engine::{
    ematch_pattern, instantiate_term, ApplyOutcome, Bound, EGraph, EngineError, Justification,
    MapBinding, Match, RewriteRule,
};
use crate::ir::Term;
use num_bigint::BigUint;

/// Access to constant analysis values during right-hand side construction,
/// abstracted so condition synthesis can run builders without an e-graph.
pub type ConstLookup<'a> = &'a dyn Fn(&str) -> Option<BigUint>;

/// Right-hand side: a static pattern or a builder constructing the pattern
/// from the matched map (dynamic rewrites).
#[derive(Clone)]
pub enum Rhs {
    Pattern(Term),
    Builder(fn(&MapBinding, ConstLookup) -> Option<Term>),
}

impl Rhs {
    pub fn resolve(&self, b: &MapBinding, consts: ConstLookup) -> Option<Term> {
        match self {
            Rhs::Pattern(p) => Some(p.clone()),
            Rhs::Builder(f) => f(b, consts),
        }
    }
}

/// One lhs/rhs pair of a rewrite (rows covering two operators or mirrored
/// operand orders carry several variants under one name).
#[derive(Clone)]
pub struct RuleVariant {
    pub lhs: Term,
    pub rhs: Rhs,
    pub cond: Condition,
}

/// A named rewrite: `(condition, lhs, rhs)` triples sharing a catalog entry.
#[derive(Clone)]
pub struct Rewrite {
    pub name: String,
    pub class: RuleClass,
    pub variants: Vec<RuleVariant>,
    /// True when the catalog table states the unconditional condition.
    pub table_true: bool,
}

impl Rewrite {
    /// Partial evaluation of the matched variant's rhs; term variables stay
    /// symbolic.
    pub fn instantiate(&self, m: &Match, consts: ConstLookup) -> Result<Term, EngineError> {
        let v = &self.variants[m.variant];
        let pat = v
            .rhs
            .resolve(&m.binding, consts)
            .ok_or_else(|| EngineError::IncompleteMap(format!("{} builder", self.name)))?;
        instantiate_term(&pat, &m.binding)
    }

    pub fn condition(&self, variant: usize) -> &Condition {
        &self.variants[variant].cond
    }
}

fn class_const<'a>(eg: &'a EGraph, binding: &MapBinding) -> impl Fn(&str) -> Option<BigUint> + 'a {
    let binding = binding.clone();
    move |name: &str| match binding.get(name) {
        Some(Bound::Class(c)) => eg.class(*c).const_val.clone(),
        _ => None,
    }
}

impl RewriteRule for Rewrite {
    fn name(&self) -> &str {
        &self.name
    }

    fn search(&self, eg: &EGraph) -> Vec<Match> {
        let mut out = Vec::new();
        for (vi, v) in self.variants.iter().enumerate() {
            for mut m in ematch_pattern(eg, &v.lhs) {
                m.variant = vi;
                out.push(m);
            }
        }
        out
    }

    fn apply(&self, eg: &mut EGraph, m: &Match) -> Result<ApplyOutcome, EngineError> {
        let v = &self.variants[m.variant];
        match v.cond.eval(&m.binding) {
            Some(true) => {}
            _ => return Ok(ApplyOutcome::SkippedCondition),
        }
        let rhs_pat = {
            let lookup = class_const(eg, &m.binding);
            match v.rhs.resolve(&m.binding, &lookup) {
                Some(t) => t,
                None => return Ok(ApplyOutcome::SkippedCondition),
            }
        };
        let before = eg.version();
        let lhs_inst = eg.instantiate(&v.lhs, &m.binding)?;
        let rhs_inst = eg.instantiate(&rhs_pat, &m.binding)?;
        let merged = eg.union_instances(
            lhs_inst,
            rhs_inst,
            Justification::Rule {
                name: self.name.clone(),
                variant: m.variant,
                binding: m.binding.clone(),
            },
        )?;
        if merged || eg.version() != before {
            Ok(ApplyOutcome::Applied)
        } else {
            Ok(ApplyOutcome::SkippedNoop)
        }
    }
}

pub(crate) fn get_width(b: &MapBinding, name: &str) -> Option<u32> {
    match b.get(name) {
        Some(Bound::Width(w)) => Some(*w),
        _ => None,
    }
}

pub(crate) fn bits_of(v: &BigUint) -> u32 {
    (v.bits() as u32).max(1)
}

/// An assembled rule set ready for saturation: the catalog rewrites with the
/// n-ary merge family swapped in for its placeholder, plus any extensions.
pub struct RuleSet {
    pub rewrites: Vec<Rewrite>,
    merge: Option<MergeAdditions>,
    pub extensions: Vec<Rewrite>,
}

impl RuleSet {
    pub fn new(opts: &RuleOptions) -> Self {
        let rewrites = builtin_ruleset(opts);
        let merge = opts.merge.then(MergeAdditions::new);
        RuleSet {
            rewrites,
            merge,
            extensions: Vec::new(),
        }
    }

    pub fn with_mcm_extensions(mut self) -> Self {
        self.extensions = mcm_extension_rules();
        self
    }

    pub fn from_rewrites(rewrites: Vec<Rewrite>) -> Self {
        RuleSet {
            rewrites,
            merge: None,
            extensions: Vec::new(),
        }
    }

    /// Rule references in catalog order (deterministic application order).
    pub fn refs(&self) -> Vec<&dyn RewriteRule> {
        let mut out: Vec<&dyn RewriteRule> = Vec::new();
        for r in &self.rewrites {
            if r.name == "merge-additions" {
                if let Some(m) = &self.merge {
                    out.push(m);
                    continue;
                }
            }
            out.push(r);
        }
        for r in &self.extensions {
            out.push(r);
        }
        out
    }

    /// Same rules in reversed order (phase-ordering experiments).
    pub fn refs_reversed(&self) -> Vec<&dyn RewriteRule> {
        let mut v = self.refs();
        v.reverse();
        v
    }
}
