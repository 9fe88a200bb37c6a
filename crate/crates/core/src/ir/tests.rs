use super::*;
use num_bigint::BigInt;

fn env(pairs: &[(&str, u64)]) -> Env {
    pairs
        .iter()
        .map(|(n, v)| (n.to_string(), BigUint::from(*v)))
        .collect()
}

fn add2(w: u32, wa: u32, sa: Signage, a: Term, wb: u32, sb: Signage, b: Term) -> Term {
    Term::node(Op::Add, w, vec![Arg::new(wa, sa, a), Arg::new(wb, sb, b)])
}

#[test]
fn residue_examples() {
    assert_eq!(residue(&BigInt::from(255), 8, Signage::Sign), BigInt::from(-1));
    assert_eq!(residue(&BigInt::from(256), 9, Signage::Unsign), BigInt::from(256));
    assert_eq!(residue(&BigInt::from(-3), 4, Signage::Unsign), BigInt::from(13));
}

#[test]
fn residue_periodicity_and_idempotence() {
    for k in -40i64..40 {
        for w in 1..6u32 {
            for s in [Signage::Unsign, Signage::Sign] {
                let k = BigInt::from(k);
                let r = residue(&k, w, s);
                assert_eq!(residue(&(k.clone() + (BigInt::from(1) << w)), w, s), r);
                assert_eq!(residue(&r, w, s), r);
                if s == Signage::Unsign {
                    assert!(r >= BigInt::from(0) && r < (BigInt::from(1) << w));
                } else {
                    assert!(r >= -(BigInt::from(1) << (w - 1)));
                    assert!(r < (BigInt::from(1) << (w - 1)));
                }
            }
        }
    }
}

#[test]
fn residue_i128_matches_bigint() {
    for k in -600i64..600 {
        for w in 1..12u32 {
            for s in [Signage::Unsign, Signage::Sign] {
                assert_eq!(
                    BigInt::from(residue_i128(k as i128, w, s)),
                    residue(&BigInt::from(k), w, s)
                );
            }
        }
    }
}

#[test]
fn eval_unsigned_add_wraps_at_output() {
    let t = add2(9, 8, Signage::Unsign, Term::var("x"), 8, Signage::Unsign, Term::var("y"));
    let v = eval_term(&t, &env(&[("x", 255), ("y", 1)])).unwrap();
    assert_eq!(v, BigUint::from(256u32));
}

#[test]
fn eval_truncated_intermediate_discards_carry() {
    // 8-bit intermediate wraps 300 -> 44 before the outer 10-bit add.
    let inner = add2(8, 8, Signage::Unsign, Term::var("A"), 8, Signage::Unsign, Term::var("B"));
    let t = add2(10, 8, Signage::Unsign, inner, 8, Signage::Unsign, Term::var("C"));
    let v = eval_term(&t, &env(&[("A", 200), ("B", 100), ("C", 0)])).unwrap();
    assert_eq!(v, BigUint::from(44u32));
}

#[test]
fn eval_signed_multiply() {
    // 4-bit signed: 0b1000 = -8, 0b1111 = -1; product 8.
    let t = Term::node(
        Op::Mul,
        8,
        vec![
            Arg::new(4, Signage::Sign, Term::var("a")),
            Arg::new(4, Signage::Sign, Term::var("b")),
        ],
    );
    let v = eval_term(&t, &env(&[("a", 0b1000), ("b", 0b1111)])).unwrap();
    assert_eq!(v, BigUint::from(8u32));
}

#[test]
fn eval_is_deterministic() {
    let t = add2(6, 4, Signage::Sign, Term::var("x"), 4, Signage::Unsign, Term::var("y"));
    let e = env(&[("x", 9), ("y", 3)]);
    assert_eq!(eval_term(&t, &e).unwrap(), eval_term(&t, &e).unwrap());
}

#[test]
fn equivalent_fig4_retained_carry() {
    // (A+B)@9 + C @10 versus A + (B+C)@9 @10: both exact, equivalent.
    let left = add2(
        10,
        9,
        Signage::Unsign,
        add2(9, 8, Signage::Unsign, Term::var("A"), 8, Signage::Unsign, Term::var("B")),
        8,
        Signage::Unsign,
        Term::var("C"),
    );
    let right = add2(
        10,
        8,
        Signage::Unsign,
        Term::var("A"),
        9,
        Signage::Unsign,
        add2(9, 8, Signage::Unsign, Term::var("B"), 8, Signage::Unsign, Term::var("C")),
    );
    assert_eq!(equivalent_bounded(&left, &right).unwrap(), None);
}

#[test]
fn equivalent_fig4_discarded_carry_counterexample() {
    let left = add2(
        10,
        8,
        Signage::Unsign,
        add2(8, 8, Signage::Unsign, Term::var("A"), 8, Signage::Unsign, Term::var("B")),
        8,
        Signage::Unsign,
        Term::var("C"),
    );
    let right = add2(
        10,
        8,
        Signage::Unsign,
        Term::var("A"),
        9,
        Signage::Unsign,
        add2(9, 8, Signage::Unsign, Term::var("B"), 8, Signage::Unsign, Term::var("C")),
    );
    let cex = equivalent_bounded(&left, &right).unwrap().expect("must differ");
    let a = BigInt::from(cex["A"].clone());
    let b = BigInt::from(cex["B"].clone());
    assert!(a + b >= BigInt::from(256), "carry-out case: {cex:?}");
    // The counterexample really distinguishes the two terms.
    assert_ne!(eval_term(&left, &cex).unwrap(), eval_term(&right, &cex).unwrap());
}

#[test]
fn equivalent_reflexive() {
    let t = add2(9, 8, Signage::Unsign, Term::var("x"), 8, Signage::Unsign, Term::var("y"));
    assert_eq!(equivalent_bounded(&t, &t).unwrap(), None);
}

#[test]
fn budget_exceeded() {
    let t = add2(40, 20, Signage::Unsign, Term::var("x"), 20, Signage::Unsign, Term::var("y"));
    match equivalent_bounded(&t, &t) {
        Err(IrError::BudgetExceeded { bits: 40, .. }) => {}
        other => panic!("expected budget error, got {other:?}"),
    }
}

#[test]
fn compiled_matches_bigint_eval_on_operator_zoo() {
    // Cross-check the fast evaluator against eval_term over full input
    // spaces for every operator at small widths.
    let cases: Vec<Term> = vec![
        add2(3, 2, Signage::Sign, Term::var("a"), 3, Signage::Unsign, Term::var("b")),
        Term::node(Op::Sub, 4, vec![
            Arg::new(3, Signage::Unsign, Term::var("a")),
            Arg::new(3, Signage::Sign, Term::var("b")),
        ]),
        Term::node(Op::Neg, 4, vec![Arg::new(3, Signage::Sign, Term::var("a"))]),
        Term::node(Op::Mul, 5, vec![
            Arg::new(3, Signage::Sign, Term::var("a")),
            Arg::new(3, Signage::Sign, Term::var("b")),
        ]),
        Term::node(Op::Fma, 5, vec![
            Arg::new(2, Signage::Sign, Term::var("a")),
            Arg::new(3, Signage::Unsign, Term::var("b")),
            Arg::new(3, Signage::Sign, Term::var("c")),
        ]),
        Term::node(Op::Sum, 4, vec![
            Arg::new(2, Signage::Unsign, Term::var("a")),
            Arg::new(2, Signage::Sign, Term::var("b")),
            Arg::new(3, Signage::Unsign, Term::var("c")),
        ]),
        Term::node(Op::Muxar, 6, vec![
            Arg::new(3, Signage::Unsign, Term::var("a")),
            Arg::new(3, Signage::Sign, Term::var("b")),
            Arg::new(2, Signage::Unsign, Term::var("c")),
        ]),
        Term::node(Op::Shl, 5, vec![
            Arg::new(3, Signage::Sign, Term::var("a")),
            Arg::new(3, Signage::Unsign, Term::var("b")),
        ]),
        Term::node(Op::Shr, 3, vec![
            Arg::new(4, Signage::Sign, Term::var("a")),
            Arg::new(2, Signage::Sign, Term::var("b")),
        ]),
        Term::node(Op::Mux, 4, vec![
            Arg::new(2, Signage::Sign, Term::var("a")),
            Arg::new(3, Signage::Sign, Term::var("b")),
            Arg::new(3, Signage::Unsign, Term::var("c")),
        ]),
        Term::node(Op::Concat, 6, vec![
            Arg::new(2, Signage::Sign, Term::var("a")),
            Arg::new(3, Signage::Unsign, Term::var("b")),
        ]),
        Term::node(Op::Slice { hi: 4, lo: 1 }, 4, vec![
            Arg::new(3, Signage::Sign, Term::var("a")),
        ]),
        Term::node(Op::Lt, 2, vec![
            Arg::new(3, Signage::Sign, Term::var("a")),
            Arg::new(3, Signage::Unsign, Term::var("b")),
        ]),
        Term::node(Op::Ge, 1, vec![
            Arg::new(3, Signage::Sign, Term::var("a")),
            Arg::new(2, Signage::Sign, Term::var("b")),
        ]),
        Term::node(Op::Not, 5, vec![Arg::new(3, Signage::Sign, Term::var("a"))]),
        Term::node(Op::And, 4, vec![
            Arg::new(3, Signage::Sign, Term::var("a")),
            Arg::new(4, Signage::Unsign, Term::var("b")),
        ]),
        Term::node(Op::Xor, 4, vec![
            Arg::new(3, Signage::Sign, Term::var("a")),
            Arg::new(2, Signage::Sign, Term::var("b")),
        ]),
        Term::node(Op::ReduceNand, 2, vec![Arg::new(3, Signage::Unsign, Term::var("a"))]),
        Term::node(Op::ReduceXnor, 1, vec![Arg::new(4, Signage::Sign, Term::var("a"))]),
    ];
    for t in &cases {
        let mut vw = BTreeMap::new();
        t.var_widths(&mut vw).unwrap();
        let vars: Vec<(String, u32)> = vw.into_iter().collect();
        let p = Program::compile(&[t, t], &vars).expect("compilable");
        // Walk the full space via the slow evaluator and compare values.
        let mut counters = vec![0u64; vars.len()];
        loop {
            let e: Env = vars
                .iter()
                .zip(&counters)
                .map(|((n, _), v)| (n.clone(), BigUint::from(*v)))
                .collect();
            let fast = p.eval_once(&e).unwrap()[0].clone();
            let slow = eval_term(t, &e).unwrap();
            assert_eq!(fast, slow, "term {t:?} env {e:?}");
            let mut k = vars.len();
            let mut done = true;
            while k > 0 {
                k -= 1;
                counters[k] += 1;
                if counters[k] < (1u64 << vars[k].1) {
                    done = false;
                    break;
                }
                counters[k] = 0;
            }
            if done {
                break;
            }
        }
    }
}

#[test]
fn concreteness() {
    let pat = Term::node(
        Op::Add,
        WidthSpec::Var("w".into()),
        vec![
            Arg {
                width: WidthSpec::Var("wa".into()),
                signage: SignSpec::Var("sa".into()),
                term: Term::var("a").into(),
            },
            Arg::new(8, Signage::Unsign, Term::var("b")),
        ],
    );
    assert!(!pat.is_concrete());
    let t = add2(9, 8, Signage::Unsign, Term::var("x"), 8, Signage::Unsign, Term::var("y"));
    assert!(t.is_concrete());
}
