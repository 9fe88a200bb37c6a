//! The shipped catalog. Patterns reuse a width variable wherever the table
//! row's validity statement depends on two positions being equal (e.g. an
//! inner node's output width and its consumption width), and leave all other
//! annotations free.

use super::cond::{Condition, ConditionStore};
use super::{bits_of, get_width, ConstLookup, Rewrite, Rhs, RuleVariant};
use crate::engine::{
    ApplyOutcome, Bound, EGraph, EngineError, Justification, MapBinding, Match, RewriteRule,
};
use crate::frontend::parse_vlng;
use crate::ir::{Arg, Node, Op, SignSpec, Signage, Term, WidthSpec};
use num_bigint::BigUint;
use num_traits::ToPrimitive;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum RuleClass {
    Arith,
    Logic,
    Exchange,
    Merge,
    ConstExp,
    Extension,
}

/// Rule-class toggles for building a rule set.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct RuleOptions {
    pub arith: bool,
    pub logic: bool,
    pub exchange: bool,
    pub merge: bool,
    pub constexp: bool,
    /// `1*x -> 2*x - x` grows the e-graph aggressively; off unless needed
    /// (constant-multiplication workloads).
    pub one_to_two: bool,
}

impl Default for RuleOptions {
    fn default() -> Self {
        RuleOptions {
            arith: true,
            logic: true,
            exchange: true,
            merge: true,
            constexp: true,
            one_to_two: false,
        }
    }
}

impl RuleOptions {
    pub fn all() -> Self {
        RuleOptions {
            one_to_two: true,
            ..Default::default()
        }
    }
}

fn pat(s: &str) -> Term {
    parse_vlng(s).unwrap_or_else(|e| panic!("bad catalog pattern {s}: {e}"))
}

/// Specification of one catalog entry before conditions are attached.
pub struct RuleSpec {
    pub name: &'static str,
    pub class: RuleClass,
    pub table_true: bool,
    pub variants: Vec<(Term, Rhs)>,
}

fn rhs_slice_a(b: &MapBinding, _c: ConstLookup) -> Option<Term> {
    let w = get_width(b, "w")?;
    Some(Term::Node(Node {
        op: Op::Slice { hi: w - 1, lo: 0 },
        width: w.into(),
        args: vec![Arg {
            width: WidthSpec::Var("wa".into()),
            signage: SignSpec::Var("sa".into()),
            term: Term::var("a").into(),
        }],
    }))
}

fn rhs_merge_shift(op: Op) -> fn(&MapBinding, ConstLookup) -> Option<Term> {
    match op {
        Op::Shl => |b, _| merge_shift_rhs(b, Op::Shl),
        _ => |b, _| merge_shift_rhs(b, Op::Shr),
    }
}

fn merge_shift_rhs(b: &MapBinding, op: Op) -> Option<Term> {
    let (wb, wc) = (get_width(b, "wb")?, get_width(b, "wc")?);
    let wsum = wb.max(wc) + 1;
    let amount_sum = Term::node(
        Op::Add,
        wsum,
        vec![
            Arg::new(wb, Signage::Unsign, Term::var("b")),
            Arg::new(wc, Signage::Unsign, Term::var("c")),
        ],
    );
    Some(Term::Node(Node {
        op,
        width: WidthSpec::Var("w".into()),
        args: vec![
            Arg {
                width: WidthSpec::Var("wa".into()),
                signage: SignSpec::Var("sa".into()),
                term: Term::var("a").into(),
            },
            Arg::new(wsum, Signage::Unsign, amount_sum),
        ],
    }))
}

/// `a + (b >> c)  ->  ((a << c) + b) >> c` at a width wide enough that the
/// inner sum is exact. Skipped for unbounded variable shift amounts.
fn rhs_add_shr(b: &MapBinding, consts: ConstLookup) -> Option<Term> {
    let w = get_width(b, "w")?;
    let wa = get_width(b, "wa")?;
    let wb = get_width(b, "wb")?;
    let wc = get_width(b, "wc")?;
    let max_amt = match consts("c") {
        Some(c) => c.to_u64()?,
        None if wc >= 7 => return None,
        None => (1u64 << wc) - 1,
    };
    if max_amt > 64 {
        return None;
    }
    let wide = w.max(wa).max(wb) as u64 + max_amt + 1;
    let wide = u32::try_from(wide).ok()?;
    let shifted = Term::node(
        Op::Shl,
        wide,
        vec![
            Arg {
                width: WidthSpec::Var("wa".into()),
                signage: SignSpec::Var("sa".into()),
                term: Term::var("a").into(),
            },
            Arg::new(wc, Signage::Unsign, Term::var("c")),
        ],
    );
    let sum = Term::node(
        Op::Add,
        wide,
        vec![
            Arg::new(wide, Signage::Unsign, shifted),
            Arg::new(wb, Signage::Unsign, Term::var("b")),
        ],
    );
    Some(Term::Node(Node {
        op: Op::Shr,
        width: WidthSpec::Var("w".into()),
        args: vec![
            Arg::new(wide, Signage::Unsign, sum),
            Arg::new(wc, Signage::Unsign, Term::var("c")),
        ],
    }))
}

/// `{a, b} -> (a << width(b)) + b`.
fn rhs_concat_to_add(b: &MapBinding, _c: ConstLookup) -> Option<Term> {
    let wb = get_width(b, "wb")?;
    let amt = BigUint::from(wb);
    let amtw = bits_of(&amt);
    let shifted = Term::Node(Node {
        op: Op::Shl,
        width: WidthSpec::Var("w".into()),
        args: vec![
            Arg {
                width: WidthSpec::Var("wa".into()),
                signage: SignSpec::Var("sa".into()),
                term: Term::var("a").into(),
            },
            Arg::new(amtw, Signage::Unsign, Term::Const(amt)),
        ],
    });
    Some(Term::Node(Node {
        op: Op::Add,
        width: WidthSpec::Var("w".into()),
        args: vec![
            Arg {
                width: WidthSpec::Var("w".into()),
                signage: Signage::Unsign.into(),
                term: shifted.into(),
            },
            Arg::new(wb, Signage::Unsign, Term::var("b")),
        ],
    }))
}

/// Constant representability at its matched annotation: the guard shared by
/// the constant-manipulation builders.
fn const_faithful(b: &MapBinding, v: &BigUint) -> Option<bool> {
    let wc = get_width(b, "wc")?;
    let sc = match b.get("sc") {
        Some(Bound::Sig(s)) => *s,
        _ => return None,
    };
    let k = num_bigint::BigInt::from(v.clone());
    Some(crate::ir::residue(&k, wc, sc) == k)
}

/// `c*x -> ((2*(c>>1))*x) + (c[0]*x)` with the constants pre-shifted; the
/// recursion bottoms out at c in {0, 1}.
fn rhs_mult_constant(b: &MapBinding, consts: ConstLookup) -> Option<Term> {
    let v = consts("c")?;
    if v < BigUint::from(2u32) || !const_faithful(b, &v)? {
        return None;
    }
    let half: BigUint = &v >> 1;
    let twice: BigUint = &half << 1;
    let bit: BigUint = &v & BigUint::from(1u32);
    let inner = Term::node(
        Op::Mul,
        bits_of(&twice),
        vec![
            Arg::new(2u32, Signage::Unsign, Term::constant(2)),
            Arg::new(bits_of(&half), Signage::Unsign, Term::Const(half)),
        ],
    );
    let high = Term::Node(Node {
        op: Op::Mul,
        width: WidthSpec::Var("w".into()),
        args: vec![
            Arg::new(bits_of(&twice), Signage::Unsign, inner),
            Arg {
                width: WidthSpec::Var("wx".into()),
                signage: SignSpec::Var("sx".into()),
                term: Term::var("x").into(),
            },
        ],
    });
    let low = Term::Node(Node {
        op: Op::Mul,
        width: WidthSpec::Var("w".into()),
        args: vec![
            Arg::new(1u32, Signage::Unsign, Term::Const(bit)),
            Arg {
                width: WidthSpec::Var("wx".into()),
                signage: SignSpec::Var("sx".into()),
                term: Term::var("x").into(),
            },
        ],
    });
    Some(Term::Node(Node {
        op: Op::Add,
        width: WidthSpec::Var("w".into()),
        args: vec![
            Arg {
                width: WidthSpec::Var("w".into()),
                signage: Signage::Unsign.into(),
                term: high.into(),
            },
            Arg {
                width: WidthSpec::Var("w".into()),
                signage: Signage::Unsign.into(),
                term: low.into(),
            },
        ],
    }))
}

fn smallest_odd_factor(v: u64) -> Option<u64> {
    let mut p = 3;
    while p * p <= v {
        if v % p == 0 {
            return Some(p);
        }
        p += 2;
    }
    None
}

/// Extension: `c*x -> p*(q*x)` for odd composite c = p*q, exposing factor
/// sharing that the binary expansion cannot reach.
fn rhs_mult_const_factor(b: &MapBinding, consts: ConstLookup) -> Option<Term> {
    let v = consts("c")?;
    if !const_faithful(b, &v)? {
        return None;
    }
    let v64 = v.to_u64()?;
    if v64 < 9 || v64 % 2 == 0 {
        return None;
    }
    let p = smallest_odd_factor(v64)?;
    let q = v64 / p;
    let inner = Term::Node(Node {
        op: Op::Mul,
        width: WidthSpec::Var("w".into()),
        args: vec![
            Arg::new(
                bits_of(&BigUint::from(q)),
                Signage::Unsign,
                Term::constant(q),
            ),
            Arg {
                width: WidthSpec::Var("wx".into()),
                signage: SignSpec::Var("sx".into()),
                term: Term::var("x").into(),
            },
        ],
    });
    Some(Term::Node(Node {
        op: Op::Mul,
        width: WidthSpec::Var("w".into()),
        args: vec![
            Arg::new(
                bits_of(&BigUint::from(p)),
                Signage::Unsign,
                Term::constant(p),
            ),
            Arg {
                width: WidthSpec::Var("w".into()),
                signage: Signage::Unsign.into(),
                term: inner.into(),
            },
        ],
    }))
}

fn sp(s: &str) -> Rhs {
    Rhs::Pattern(pat(s))
}

pub fn catalog_specs(opts: &RuleOptions) -> Vec<RuleSpec> {
    use RuleClass::*;
    let mut specs: Vec<RuleSpec> = Vec::new();
    let mut add = |name: &'static str, class: RuleClass, table_true: bool, variants: Vec<(Term, Rhs)>| {
        specs.push(RuleSpec {
            name,
            class,
            table_true,
            variants,
        });
    };

    if opts.arith {
        add("commutativity-add", Arith, true, vec![(
            pat("(+ w wa sa a wb sb b)"),
            sp("(+ w wb sb b wa sa a)"),
        )]);
        add("commutativity-mul", Arith, true, vec![(
            pat("(* w wa sa a wb sb b)"),
            sp("(* w wb sb b wa sa a)"),
        )]);
        add("associativity-add", Arith, false, vec![(
            pat("(+ w w2 s2 (+ w2 wa sa a wb sb b) wc sc c)"),
            sp("(+ w wa sa a w2 s2 (+ w2 wb sb b wc sc c))"),
        )]);
        add("associativity-mul", Arith, false, vec![(
            pat("(* w w2 s2 (* w2 wa sa a wb sb b) wc sc c)"),
            sp("(* w wa sa a w2 s2 (* w2 wb sb b wc sc c))"),
        )]);
        add("associativity-sub", Arith, false, vec![(
            pat("(- w w2 s2 (- w2 wa sa a wb sb b) wc sc c)"),
            sp("(- w wa sa a w2 s2 (+ w2 wb sb b wc sc c))"),
        )]);
        add("dist-mul-over-addsub", Arith, false, vec![
            (
                pat("(* w wa sa a w2 s2 (+ w2 wb sb b wc sc c))"),
                sp("(+ w w unsign (* w wa sa a wb sb b) w unsign (* w wa sa a wc sc c))"),
            ),
            (
                pat("(* w wa sa a w2 s2 (- w2 wb sb b wc sc c))"),
                sp("(- w w unsign (* w wa sa a wb sb b) w unsign (* w wa sa a wc sc c))"),
            ),
        ]);
        add("dist-addsub-over-mul", Arith, false, vec![
            (
                pat("(+ w wp s_p (* wp wa sa a wb sb b) wp2 sp2 (* wp2 wa sa a wc sc c))"),
                sp("(* w wa sa a w unsign (+ w wb sb b wc sc c))"),
            ),
            (
                pat("(- w wp s_p (* wp wa sa a wb sb b) wp2 sp2 (* wp2 wa sa a wc sc c))"),
                sp("(* w wa sa a w unsign (- w wb sb b wc sc c))"),
            ),
        ]);
        add("add-zero", Arith, false, vec![
            (pat("(+ w wa sa a w0 s0 0)"), Rhs::Builder(rhs_slice_a)),
            (pat("(+ w w0 s0 0 wa sa a)"), Rhs::Builder(rhs_slice_a)),
        ]);
        add("mul-zero", Arith, false, vec![
            (pat("(* w wa sa a w0 s0 0)"), Rhs::Pattern(Term::constant(0))),
            (pat("(* w w0 s0 0 wa sa a)"), Rhs::Pattern(Term::constant(0))),
        ]);
        add("mul-one", Arith, true, vec![
            (pat("(* w wa sa a w1 s1 1)"), Rhs::Builder(rhs_slice_a)),
            (pat("(* w w1 s1 1 wa sa a)"), Rhs::Builder(rhs_slice_a)),
        ]);
        add("mul-two", Arith, true, vec![
            (pat("(* w wa sa a w2c s2c 2)"), sp("(<< w wa sa a 1 unsign 1)")),
            (pat("(* w w2c s2c 2 wa sa a)"), sp("(<< w wa sa a 1 unsign 1)")),
        ]);
        add("sub-to-neg", Arith, true, vec![(
            pat("(- w wa sa a wb sb b)"),
            sp("(+ w wa sa a w unsign (- w wb sb b))"),
        )]);
        add("sum-same", Arith, false, vec![(
            pat("(+ w wa sa a wa2 sa2 a)"),
            sp("(* w wa sa a 2 unsign 2)"),
        )]);
        add("mult-sum-same", Arith, false, vec![(
            pat("(+ w wp s_p (* wp wa sa a wb sb b) wb2 sb2 b)"),
            sp("(* w w unsign (+ w wa sa a 2 unsign 1) wb sb b)"),
        )]);
    }

    if opts.logic {
        add("merge-shl", Logic, false, vec![(
            pat("(<< w w2 s2 (<< w2 wa sa a wb sb b) wc sc c)"),
            Rhs::Builder(rhs_merge_shift(Op::Shl)),
        )]);
        add("merge-shr", Logic, false, vec![(
            pat("(>> w w2 s2 (>> w2 wa sa a wb sb b) wc sc c)"),
            Rhs::Builder(rhs_merge_shift(Op::Shr)),
        )]);
        add("redundant-sel", Logic, true, vec![(
            pat("(mux w we se e wa sa a wa sa a)"),
            Rhs::Builder(rhs_slice_a),
        )]);
        add("nested-mux-left", Logic, false, vec![(
            pat("(mux w we se e wi si (mux wi we2 se2 e wb sb b wc sc c) wd sd d)"),
            sp("(mux w we se e wb sb b wd sd d)"),
        )]);
        add("nested-mux-right", Logic, false, vec![(
            pat("(mux w we se e wa sa a wi si (mux wi we2 se2 e wc sc c wd sd d))"),
            sp("(mux w we se e wa sa a wd sd d)"),
        )]);
        add("sel-shl", Logic, false, vec![(
            pat("(mux w we se e wi si (<< wi wa sa a wm sm b) wi si (<< wi wc sc c wm sm d))"),
            sp("(<< w w unsign (mux w we se e wa sa a wc sc c) wm unsign (mux wm we se e wm sm b wm sm d))"),
        )]);
        add("sel-shr", Logic, false, vec![(
            pat("(mux w we se e wi si (>> wi wa sa a wm sm b) wi si (>> wi wc sc c wm sm d))"),
            sp("(>> w w unsign (mux w we se e wa sa a wc sc c) wm unsign (mux wm we se e wm sm b wm sm d))"),
        )]);
        add("not-over-concat", Logic, false, vec![(
            pat("(~ w wcc scc (concat wcc wa sa a wb sb b))"),
            sp("(concat w wa unsign (~ wa wa sa a) wb unsign (~ wb wb sb b))"),
        )]);
    }

    if opts.exchange {
        add("shl-add", Exchange, false, vec![(
            pat("(<< w w2 s2 (+ w2 wa sa a wb sb b) wc sc c)"),
            sp("(+ w w unsign (<< w wa sa a wc unsign c) w unsign (<< w wb sb b wc unsign c))"),
        )]);
        add("add-shr", Exchange, false, vec![(
            pat("(+ w wa sa a w2 s2 (>> w2 wb sb b wc sc c))"),
            Rhs::Builder(rhs_add_shr),
        )]);
        add("shl-mul", Exchange, false, vec![(
            pat("(<< w w2 s2 (* w2 wa sa a wb sb b) wc sc c)"),
            sp("(* w w unsign (<< w wa sa a wc unsign c) wb sb b)"),
        )]);
        add("sel-add", Exchange, false, vec![(
            pat("(mux w we se e wi si (+ wi wa sa a wb sb b) wi si (+ wi wa sa c wb sb d))"),
            sp("(+ w w unsign (mux w we se e wa sa a wa sa c) w unsign (mux w we se e wb sb b wb sb d))"),
        )]);
        add("sel-mul", Exchange, false, vec![(
            pat("(mux w we se e wi si (* wi wa sa a wb sb b) wi si (* wi wa sa c wb sb d))"),
            sp("(* w w unsign (mux w we se e wa sa a wa sa c) w unsign (mux w we se e wb sb b wb sb d))"),
        )]);
        add("sel-add-zero-left", Exchange, false, vec![(
            pat("(mux w we se e wi si (+ wi wa sa a wb sb b) wc sc c)"),
            sp("(+ w w unsign (mux w we se e wa sa a wc sc c) w unsign (mux w we se e wb sb b 1 unsign 0))"),
        )]);
        add("sel-add-zero-right", Exchange, false, vec![(
            pat("(mux w we se e wa sa a wi si (+ wi wb sb b wc sc c))"),
            sp("(+ w w unsign (mux w we se e wa sa a wb sb b) w unsign (mux w we se e 1 unsign 0 wc sc c))"),
        )]);
        add("sel-mul-one-left", Exchange, false, vec![(
            pat("(mux w we se e wi si (* wi wa sa a wb sb b) wc sc c)"),
            sp("(* w w unsign (mux w we se e wa sa a wc sc c) w unsign (mux w we se e wb sb b 1 unsign 1))"),
        )]);
        add("sel-mul-one-right", Exchange, false, vec![(
            pat("(mux w we se e wa sa a wi si (* wi wb sb b wc sc c))"),
            sp("(* w w unsign (mux w we se e wa sa a wb sb b) w unsign (mux w we se e 1 unsign 1 wc sc c))"),
        )]);
        add("move-sel-zero", Exchange, false, vec![(
            pat("(* w wi si (mux wi wb sb b w0 s0 0 wa sa a) wc sc c)"),
            sp("(* w wa sa a w unsign (mux w wb sb b 1 unsign 0 wc sc c))"),
        )]);
        add("concat-to-add", Exchange, false, vec![(
            pat("(concat w wa sa a wb sb b)"),
            Rhs::Builder(rhs_concat_to_add),
        )]);
        add("neg-not", Exchange, false, vec![(
            pat("(- w wa sa a)"),
            sp("(+ w w unsign (~ w wa sa a) 1 unsign 1)"),
        )]);
    }

    if opts.merge {
        // merge-additions is a custom rule; see MergeAdditions below. The
        // base 3-term variants live here so conditions are synthesized and
        // stored like any other rule.
        add("merge-additions", Merge, false, vec![
            (
                pat("(+ w w2 s2 (+ w2 wa sa a wb sb b) wc sc c)"),
                sp("(SUM w wa sa a wb sb b wc sc c)"),
            ),
            (
                pat("(+ w wc sc c w2 s2 (+ w2 wa sa a wb sb b))"),
                sp("(SUM w wc sc c wa sa a wb sb b)"),
            ),
        ]);
        // Both merges require the product width to equal the merged output
        // width; the modular sums then agree identically at every width,
        // with no extrapolation exposure.
        add("merge-mult-array", Merge, false, vec![(
            pat("(+ w w s_p (* w wa sa a wb unsign b) w s_p (* w wc sc c wb unsign (~ wb wb unsign b)))"),
            sp("(MUXAR w wb unsign b wa sa a wc sc c)"),
        )]);
        add("fma-merge", Merge, false, vec![
            (
                pat("(+ w w s_p (* w wa sa a wb sb b) wc sc c)"),
                sp("(FMA w wa sa a wb sb b wc sc c)"),
            ),
            (
                pat("(+ w wc sc c w s_p (* w wa sa a wb sb b))"),
                sp("(FMA w wa sa a wb sb b wc sc c)"),
            ),
        ]);
    }

    if opts.constexp {
        add("mult-constant", ConstExp, false, vec![
            (pat("(* w wc sc #c wx sx x)"), Rhs::Builder(rhs_mult_constant)),
            (pat("(* w wx sx x wc sc #c)"), Rhs::Builder(rhs_mult_constant)),
        ]);
        if opts.one_to_two {
            add("one-to-two-mult", ConstExp, false, vec![
                (
                    pat("(* w w1 s1 1 wx sx x)"),
                    sp("(- w w unsign (* w wx sx x 2 unsign 2) wx sx x)"),
                ),
                (
                    pat("(* w wx sx x w1 s1 1)"),
                    sp("(- w w unsign (* w wx sx x 2 unsign 2) wx sx x)"),
                ),
            ]);
        }
    }

    specs
}

/// The complete catalog (all rule classes enabled) has exactly the table's
/// row count after `*` expansion.
pub const FULL_CATALOG_SIZE: usize = 39;

fn attach_conditions(
    specs: Vec<RuleSpec>,
    store: &ConditionStore,
    strict: bool,
) -> Vec<Rewrite> {
    specs
        .into_iter()
        .map(|s| {
            let variants = s
                .variants
                .into_iter()
                .enumerate()
                .map(|(vi, (lhs, rhs))| {
                    let cond = if s.table_true {
                        Condition::True
                    } else {
                        match store.get(&format!("{}#{vi}", s.name)) {
                            Some(rec) => rec.cond.clone(),
                            None if strict => {
                                panic!("condition store is missing {}#{vi}", s.name)
                            }
                            None => Condition::True,
                        }
                    };
                    RuleVariant { lhs, rhs, cond }
                })
                .collect();
            Rewrite {
                name: s.name.to_string(),
                class: s.class,
                variants,
                table_true: s.table_true,
            }
        })
        .collect()
}

/// Builds the catalog with conditions from the shipped store.
pub fn builtin_ruleset(opts: &RuleOptions) -> Vec<Rewrite> {
    let store = ConditionStore::embedded();
    attach_conditions(catalog_specs(opts), &store, true)
}

/// Catalog with a caller-supplied store (regeneration and tests).
pub(crate) fn catalog_with_store(opts: &RuleOptions, store: &ConditionStore, strict: bool) -> Vec<Rewrite> {
    attach_conditions(catalog_specs(opts), store, strict)
}

fn extension_specs() -> Vec<RuleSpec> {
    vec![
        RuleSpec {
            name: "mult-const-factor",
            class: RuleClass::Extension,
            table_true: false,
            variants: vec![
                (pat("(* w wc sc #c wx sx x)"), Rhs::Builder(rhs_mult_const_factor)),
                (pat("(* w wx sx x wc sc #c)"), Rhs::Builder(rhs_mult_const_factor)),
            ],
        },
        RuleSpec {
            name: "add-neg-to-sub",
            class: RuleClass::Extension,
            table_true: false,
            variants: vec![
                (
                    pat("(+ w wa sa a wn sn (- wn wb sb b))"),
                    sp("(- w wa sa a wb sb b)"),
                ),
                (
                    pat("(+ w wn sn (- wn wb sb b) wa sa a)"),
                    sp("(- w wa sa a wb sb b)"),
                ),
            ],
        },
    ]
}

/// Extra rewrites enabling constant-multiplication factor sharing; not part
/// of the table catalog, enabled by `--rules mcm`.
pub fn mcm_extension_rules() -> Vec<Rewrite> {
    let store = ConditionStore::embedded();
    attach_conditions(extension_specs(), &store, true)
}

fn fig_specs() -> Vec<RuleSpec> {
    vec![RuleSpec {
        name: "shift-cancel",
        class: RuleClass::Extension,
        table_true: false,
        variants: vec![(
            pat("(>> w w2 s2 (<< w2 wa sa a ws ss s) ws ss s)"),
            Rhs::Pattern(Term::var("a")),
        )],
    }]
}

/// The introductory-example rule set: multiply-by-two plus shift
/// cancellation.
pub fn fig_example_rules() -> Vec<Rewrite> {
    let store = ConditionStore::embedded();
    let shift_cancel = attach_conditions(fig_specs(), &store, true);
    let mut out: Vec<Rewrite> = builtin_ruleset(&RuleOptions::all())
        .into_iter()
        .filter(|r| r.name == "mul-two")
        .collect();
    out.extend(shift_cancel);
    out
}

/// All rules that need synthesized conditions, with extensions, for the
/// store generator and the soundness sweep.
pub fn all_specs_for_synthesis() -> Vec<RuleSpec> {
    let mut specs = catalog_specs(&RuleOptions::all());
    specs.extend(extension_specs());
    specs.extend(fig_specs());
    specs
}

/// The n-ary SUM merging family: base three-term merges (conditions from
/// the store) plus flattening of nested SUM/add rows into wider SUMs.
pub struct MergeAdditions {
    base: Rewrite,
}

impl MergeAdditions {
    pub fn new() -> Self {
        let store = ConditionStore::embedded();
        let mut rules = attach_conditions(
            catalog_specs(&RuleOptions {
                arith: false,
                logic: false,
                exchange: false,
                merge: true,
                constexp: false,
                one_to_two: false,
            }),
            &store,
            true,
        );
        let base = rules
            .drain(..)
            .find(|r| r.name == "merge-additions")
            .expect("merge rule");
        MergeAdditions { base }
    }
}

impl Default for MergeAdditions {
    fn default() -> Self {
        Self::new()
    }
}

const FLATTEN_SUM: usize = 100;
const FLATTEN_ADD: usize = 101;

impl RewriteRule for MergeAdditions {
    fn name(&self) -> &str {
        "merge-additions"
    }

    fn search(&self, eg: &EGraph) -> Vec<Match> {
        let mut out = self.base.search(eg);
        // Flattening: a SUM row whose class holds a SUM or a two-input add.
        for class in eg.class_ids() {
            for node in &eg.class(class).nodes {
                let (w, args) = match node {
                    crate::engine::ENode::Op {
                        op: Op::Sum,
                        width,
                        args,
                    } => (*width, args),
                    _ => continue,
                };
                for (ri, row) in args.iter().enumerate() {
                    let rc = eg.find(row.class);
                    for inner in &eg.class(rc).nodes {
                        let (variant, iw) = match inner {
                            crate::engine::ENode::Op {
                                op: Op::Sum,
                                width,
                                ..
                            } => (FLATTEN_SUM, *width),
                            crate::engine::ENode::Op {
                                op: Op::Add,
                                width,
                                ..
                            } => (FLATTEN_ADD, *width),
                            _ => continue,
                        };
                        let mut binding = MapBinding::new();
                        binding.insert("w".into(), Bound::Width(w));
                        binding.insert("_arity".into(), Bound::Width(args.len() as u32));
                        binding.insert("_row".into(), Bound::Width(ri as u32));
                        binding.insert("_rowcls".into(), Bound::Class(rc));
                        binding.insert("wi".into(), Bound::Width(row.width));
                        binding.insert("si".into(), Bound::Sig(row.signage));
                        binding.insert("w2".into(), Bound::Width(iw));
                        out.push(Match {
                            root: class,
                            binding,
                            variant,
                        });
                        break;
                    }
                }
            }
        }
        out
    }

    fn apply(&self, eg: &mut EGraph, m: &Match) -> Result<ApplyOutcome, EngineError> {
        if m.variant < self.base.variants.len() {
            return self.base.apply(eg, m);
        }
        // Flatten: the inner value must survive its row annotation and, for
        // a plain add, its own output wrap, below the outer width.
        let w = get_width(&m.binding, "w").unwrap();
        let wi = get_width(&m.binding, "wi").unwrap();
        let w2 = get_width(&m.binding, "w2").unwrap();
        if wi < w || (m.variant == FLATTEN_ADD && w2 < w) {
            return Ok(ApplyOutcome::SkippedCondition);
        }
        let arity = get_width(&m.binding, "_arity").unwrap() as usize;
        let row = get_width(&m.binding, "_row").unwrap() as usize;
        let rowcls = match m.binding.get("_rowcls") {
            Some(Bound::Class(c)) => eg.find(*c),
            _ => unreachable!(),
        };
        let root = eg.find(m.root);
        // Relocate the SUM node and the inner node deterministically.
        let outer = eg.class(root).nodes.iter().find_map(|n| match n {
            crate::engine::ENode::Op {
                op: Op::Sum,
                width,
                args,
            } if *width == w
                && args.len() == arity
                && row < args.len()
                && eg.find(args[row].class) == rowcls =>
            {
                Some(args.clone())
            }
            _ => None,
        });
        let outer = match outer {
            Some(a) => a,
            None => return Ok(ApplyOutcome::SkippedNoop),
        };
        let want_sum = m.variant == FLATTEN_SUM;
        let inner = eg.class(rowcls).nodes.iter().find_map(|n| match n {
            crate::engine::ENode::Op { op: Op::Sum, width, args } if want_sum && *width == w2 => {
                Some(args.clone())
            }
            crate::engine::ENode::Op { op: Op::Add, width, args } if !want_sum && *width == w2 => {
                Some(args.clone())
            }
            _ => None,
        });
        let inner = match inner {
            Some(a) => a,
            None => return Ok(ApplyOutcome::SkippedNoop),
        };
        let mut rows = Vec::with_capacity(outer.len() + inner.len() - 1);
        rows.extend_from_slice(&outer[..row]);
        rows.extend_from_slice(&inner);
        rows.extend_from_slice(&outer[row + 1..]);
        let before = eg.version();
        let lhs = eg.add_enode_instance(crate::engine::ENode::Op {
            op: Op::Sum,
            width: w,
            args: outer.clone(),
        });
        let rhs = eg.add_enode_instance(crate::engine::ENode::Op {
            op: Op::Sum,
            width: w,
            args: rows,
        });
        let merged = eg.union_instances(
            lhs,
            rhs,
            Justification::Rule {
                name: "merge-additions".into(),
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
