//! Independent bit-level reference simulator: evaluates concrete terms
//! gate-by-gate over explicit bit vectors (ripple-carry adders, shift-add
//! multipliers, mux trees, borrow comparators). Shares nothing with the
//! integer semantics in `dpopt::ir` beyond the term type; used to
//! cross-check `eval_term` exhaustively at small widths.

use dpopt::ir::{Env, Op, Signage, Term};
use num_bigint::BigUint;

type Bits = Vec<bool>;

fn of_biguint(v: &BigUint, w: usize) -> Bits {
    (0..w).map(|i| v.bit(i as u64)).collect()
}

fn to_biguint(b: &Bits) -> BigUint {
    let mut v = BigUint::from(0u32);
    for (i, bit) in b.iter().enumerate() {
        if *bit {
            v.set_bit(i as u64, true);
        }
    }
    v
}

/// Truncate or extend a pattern to w bits; `signed` extends with the
/// current top bit.
fn resize(b: &Bits, w: usize, signed: bool) -> Bits {
    let ext = if signed {
        *b.last().unwrap_or(&false)
    } else {
        false
    };
    (0..w).map(|i| *b.get(i).unwrap_or(&ext)).collect()
}

fn full_add(a: bool, b: bool, c: bool) -> (bool, bool) {
    (a ^ b ^ c, (a & b) | (a & c) | (b & c))
}

fn ripple_add(a: &Bits, b: &Bits, mut carry: bool) -> Bits {
    let mut out = Vec::with_capacity(a.len());
    for i in 0..a.len() {
        let (s, c) = full_add(a[i], b[i], carry);
        out.push(s);
        carry = c;
    }
    out
}

fn invert(a: &Bits) -> Bits {
    a.iter().map(|b| !b).collect()
}

fn shift_add_mul(a: &Bits, b: &Bits) -> Bits {
    let w = a.len();
    let mut acc = vec![false; w];
    for i in 0..w {
        if b[i] {
            let mut shifted = vec![false; w];
            for j in i..w {
                shifted[j] = a[j - i];
            }
            acc = ripple_add(&acc, &shifted, false);
        }
    }
    acc
}

/// Logical shifter as a mux tree over the amount bits.
fn mux_shift(a: &Bits, amt: &Bits, left: bool) -> Bits {
    let mut cur = a.clone();
    for (stage, sel) in amt.iter().enumerate() {
        if stage >= 20 {
            break;
        }
        let k = 1usize << stage;
        let shifted: Bits = (0..cur.len())
            .map(|i| {
                if left {
                    if i >= k { cur[i - k] } else { false }
                } else if i + k < cur.len() {
                    cur[i + k]
                } else {
                    false
                }
            })
            .collect();
        cur = (0..cur.len())
            .map(|i| if *sel { shifted[i] } else { cur[i] })
            .collect();
    }
    // Amounts at or beyond the width have shifted everything out already
    // provided enough stages existed; handle the huge-amount case exactly.
    let width_bits = 64 - (a.len() as u64).leading_zeros() as usize;
    if amt.len() > width_bits && amt[width_bits..].iter().any(|b| *b) {
        return vec![false; a.len()];
    }
    cur
}

/// Signed/unsigned borrow comparison: a < b.
fn less_than(a: &Bits, b: &Bits, signed: bool) -> bool {
    // Extend one bit so the subtraction sign is exact, then a - b < 0.
    let w = a.len() + 1;
    let ea = resize(a, w, signed);
    let eb = resize(b, w, signed);
    let diff = ripple_add(&ea, &invert(&eb), true);
    diff[w - 1]
}

fn arg_bits(t: &Term, i: usize, env: &Env) -> (Bits, usize, bool) {
    let n = t.as_node().expect("node");
    let a = &n.args[i];
    let w = a.width.lit().unwrap() as usize;
    let s = a.signage.lit().unwrap() == Signage::Sign;
    let child = eval_bits(&a.term, env);
    // Interpretation at (w, s): truncate to w; the sign flag tells later
    // resizes how to extend.
    (resize(&child, w, false), w, s)
}

/// Gate-level evaluation; returns the node's output bits.
pub fn eval_bits(t: &Term, env: &Env) -> Bits {
    match t {
        Term::Var(name) => {
            let v = env.get(name).expect("bound var");
            of_biguint(v, (v.bits() as usize).max(1))
        }
        Term::Const(c) => of_biguint(c, (c.bits() as usize).max(1)),
        Term::ConstVar(_) => panic!("non-concrete"),
        Term::Node(n) => {
            let w = n.width.lit().unwrap() as usize;
            let get = |i: usize| arg_bits(t, i, env);
            match n.op {
                Op::Add | Op::Sub => {
                    let (a, _, sa) = get(0);
                    let (b, _, sb) = get(1);
                    let ea = resize(&a, w, sa);
                    let eb = resize(&b, w, sb);
                    if n.op == Op::Add {
                        ripple_add(&ea, &eb, false)
                    } else {
                        ripple_add(&ea, &invert(&eb), true)
                    }
                }
                Op::Neg => {
                    let (a, _, sa) = get(0);
                    let ea = resize(&a, w, sa);
                    ripple_add(&vec![false; w], &invert(&ea), true)
                }
                Op::Mul => {
                    let (a, _, sa) = get(0);
                    let (b, _, sb) = get(1);
                    shift_add_mul(&resize(&a, w, sa), &resize(&b, w, sb))
                }
                Op::Fma => {
                    let (a, _, sa) = get(0);
                    let (b, _, sb) = get(1);
                    let (c, _, sc) = get(2);
                    let p = shift_add_mul(&resize(&a, w, sa), &resize(&b, w, sb));
                    ripple_add(&p, &resize(&c, w, sc), false)
                }
                Op::Sum => {
                    let mut acc = vec![false; w];
                    for i in 0..n.args.len() {
                        let (x, _, sx) = get(i);
                        acc = ripple_add(&acc, &resize(&x, w, sx), false);
                    }
                    acc
                }
                Op::Muxar => {
                    let (sel, ws, _) = get(0);
                    let (a, _, sa) = get(1);
                    let (c, _, sc) = get(2);
                    let ea = resize(&a, w, sa);
                    let ec = resize(&c, w, sc);
                    let mut acc = vec![false; w];
                    for i in 0..ws {
                        let row: Bits = ea
                            .iter()
                            .zip(&ec)
                            .map(|(x, y)| if sel[i] { *x } else { *y })
                            .collect();
                        let mut shifted = vec![false; w];
                        for j in i..w {
                            shifted[j] = row[j - i];
                        }
                        acc = ripple_add(&acc, &shifted, false);
                    }
                    acc
                }
                Op::Shl => {
                    let (a, _, sa) = get(0);
                    let (amt, _, _) = get(1);
                    mux_shift(&resize(&a, w, sa), &amt, true)
                }
                Op::Shr => {
                    let (a, wa, _) = get(0);
                    let out = mux_shift(&resize(&a, wa, false), &amt_of(t, env), false);
                    resize(&out, w, false)
                }
                Op::Mux => {
                    let (sel, _, _) = get(0);
                    let (a, _, sa) = get(1);
                    let (b, _, sb) = get(2);
                    let any = sel.iter().any(|b| *b);
                    let (ea, eb) = (resize(&a, w, sa), resize(&b, w, sb));
                    (0..w).map(|i| if any { ea[i] } else { eb[i] }).collect()
                }
                Op::Concat => {
                    let mut parts = Vec::new();
                    for i in (0..n.args.len()).rev() {
                        let (x, wi, _) = get(i);
                        parts.extend(resize(&x, wi, false));
                    }
                    resize(&parts, w, false)
                }
                Op::Slice { hi, lo } => {
                    let (a, wa, sa) = get(0);
                    let ea = resize(&resize(&a, wa, false), hi as usize + 1, sa);
                    let sliced: Bits = ea[lo as usize..=hi as usize].to_vec();
                    resize(&sliced, w, false)
                }
                Op::Eq | Op::Ne => {
                    let (a, wa, sa) = get(0);
                    let (b, wb, sb) = get(1);
                    let ww = wa.max(wb) + 1;
                    let ea = resize(&a, ww, sa);
                    let eb = resize(&b, ww, sb);
                    let eq = ea.iter().zip(&eb).all(|(x, y)| x == y);
                    let bit = if n.op == Op::Eq { eq } else { !eq };
                    resize(&vec![bit], w, false)
                }
                Op::Lt | Op::Le | Op::Gt | Op::Ge => {
                    let (a, wa, sa) = get(0);
                    let (b, wb, sb) = get(1);
                    let ww = wa.max(wb);
                    // Mixed signedness: widen so both values embed exactly.
                    let ea = resize(&resize(&a, wa, false), ww + 1, sa);
                    let eb = resize(&resize(&b, wb, false), ww + 1, sb);
                    let lt = less_than(&ea, &eb, true);
                    let eq = ea == eb;
                    let bit = match n.op {
                        Op::Lt => lt,
                        Op::Le => lt || eq,
                        Op::Gt => !(lt || eq),
                        _ => !lt,
                    };
                    resize(&vec![bit], w, false)
                }
                Op::Not => {
                    let (a, _, sa) = get(0);
                    invert(&resize(&a, w, sa))
                }
                Op::And | Op::Or | Op::Xor => {
                    let (a, _, sa) = get(0);
                    let (b, _, sb) = get(1);
                    let (ea, eb) = (resize(&a, w, sa), resize(&b, w, sb));
                    (0..w)
                        .map(|i| match n.op {
                            Op::And => ea[i] & eb[i],
                            Op::Or => ea[i] | eb[i],
                            _ => ea[i] ^ eb[i],
                        })
                        .collect()
                }
                Op::ReduceAnd | Op::ReduceNand | Op::ReduceOr | Op::ReduceNor
                | Op::ReduceXor | Op::ReduceXnor => {
                    let (a, wa, _) = get(0);
                    let bits = resize(&a, wa, false);
                    let r = match n.op {
                        Op::ReduceAnd | Op::ReduceNand => bits.iter().all(|b| *b),
                        Op::ReduceOr | Op::ReduceNor => bits.iter().any(|b| *b),
                        _ => bits.iter().filter(|b| **b).count() % 2 == 1,
                    };
                    let inv = matches!(n.op, Op::ReduceNand | Op::ReduceNor | Op::ReduceXnor);
                    resize(&vec![r ^ inv], w, false)
                }
            }
        }
    }
}

fn amt_of(t: &Term, env: &Env) -> Bits {
    let n = t.as_node().unwrap();
    let a = &n.args[1];
    let w = a.width.lit().unwrap() as usize;
    resize(&eval_bits(&a.term, env), w, false)
}

/// Gate-level value of a term as an unsigned integer at its output width.
pub fn eval_gate_level(t: &Term, env: &Env) -> BigUint {
    let bits = eval_bits(t, env);
    match t {
        Term::Node(n) => {
            let w = n.width.lit().unwrap() as usize;
            to_biguint(&resize(&bits, w, false))
        }
        _ => to_biguint(&bits),
    }
}
