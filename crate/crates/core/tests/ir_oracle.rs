//! The integer semantics against the independent gate-level simulator,
//! exhaustively at small widths, for every operator.

mod support;

use dpopt::ir::{eval_term, Arg, Env, Op, Signage, Term};
use num_bigint::BigUint;
use support::bitsim::eval_gate_level;

fn exhaustive_agree(t: &Term) {
    let mut vw = std::collections::BTreeMap::new();
    t.var_widths(&mut vw).unwrap();
    let vars: Vec<(String, u32)> = vw.into_iter().collect();
    let bits: u32 = vars.iter().map(|(_, w)| *w).sum();
    assert!(bits <= 20, "keep the reference sweep small");
    for mask in 0u64..(1 << bits) {
        let mut env = Env::new();
        let mut off = 0;
        for (n, w) in &vars {
            env.insert(n.clone(), BigUint::from((mask >> off) & ((1 << w) - 1)));
            off += w;
        }
        let a = eval_term(t, &env).unwrap();
        let b = eval_gate_level(t, &env);
        assert_eq!(a, b, "term {t:?} env {env:?}");
    }
}

fn node(op: Op, w: u32, args: Vec<(u32, Signage, &str)>) -> Term {
    Term::node(
        op,
        w,
        args.into_iter()
            .map(|(w, s, n)| Arg::new(w, s, Term::var(n)))
            .collect(),
    )
}

#[test]
fn every_operator_matches_gate_level_reference() {
    use Signage::*;
    let mut cases: Vec<Term> = Vec::new();
    for (wa, sa, wb, sb, w) in [
        (3, Unsign, 3, Unsign, 4),
        (3, Sign, 2, Unsign, 4),
        (4, Sign, 4, Sign, 3),
        (2, Unsign, 4, Sign, 6),
    ] {
        for op in [Op::Add, Op::Sub, Op::Mul, Op::And, Op::Or, Op::Xor, Op::Shl, Op::Shr,
                   Op::Eq, Op::Ne, Op::Lt, Op::Le, Op::Gt, Op::Ge] {
            cases.push(node(op, w, vec![(wa, sa, "a"), (wb, sb, "b")]));
        }
    }
    for (wa, sa, w) in [(3, Unsign, 4), (4, Sign, 3), (4, Sign, 6)] {
        for op in [Op::Neg, Op::Not, Op::ReduceAnd, Op::ReduceOr, Op::ReduceXor,
                   Op::ReduceNand, Op::ReduceNor, Op::ReduceXnor] {
            cases.push(node(op, w, vec![(wa, sa, "a")]));
        }
        cases.push(node(Op::Slice { hi: 4, lo: 1 }, w, vec![(wa, sa, "a")]));
        cases.push(node(Op::Slice { hi: 2, lo: 0 }, w, vec![(wa, sa, "a")]));
    }
    for (w, ws) in [(5, 3), (4, 2)] {
        cases.push(node(Op::Mux, w, vec![(ws, Unsign, "s"), (4, Sign, "a"), (3, Unsign, "b")]));
        cases.push(node(Op::Muxar, w, vec![(ws, Unsign, "s"), (3, Sign, "a"), (3, Unsign, "b")]));
    }
    cases.push(node(Op::Sum, 5, vec![(3, Unsign, "a"), (3, Sign, "b"), (2, Unsign, "c")]));
    cases.push(node(Op::Fma, 6, vec![(3, Sign, "a"), (3, Unsign, "b"), (4, Sign, "c")]));
    cases.push(node(Op::Concat, 7, vec![(3, Sign, "a"), (4, Unsign, "b")]));
    cases.push(node(Op::Concat, 5, vec![(3, Sign, "a"), (4, Unsign, "b")]));
    for t in &cases {
        exhaustive_agree(t);
    }
}

#[test]
fn nested_design_matches_gate_level_reference() {
    // A composite cone with mixed signage, shifts and a mux.
    let inner = Term::node(
        Op::Mul,
        6,
        vec![
            Arg::new(3, Signage::Sign, Term::var("a")),
            Arg::new(3, Signage::Unsign, Term::var("b")),
        ],
    );
    let shifted = Term::node(
        Op::Shr,
        6,
        vec![
            Arg::new(6, Signage::Unsign, inner),
            Arg::new(2, Signage::Unsign, Term::var("s")),
        ],
    );
    let t = Term::node(
        Op::Mux,
        7,
        vec![
            Arg::new(1, Signage::Unsign, Term::var("e")),
            Arg::new(6, Signage::Unsign, shifted),
            Arg::new(3, Signage::Sign, Term::var("a")),
        ],
    );
    exhaustive_agree(&t);
}
