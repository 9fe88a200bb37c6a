//! Integer semantics: operands are interpreted through their (width, signage)
//! annotations, the operator acts on unbounded integers, and the result wraps
//! to the node's output width as unsigned.

use super::{Arg, Env, IrError, Node, Op, Signage, Term};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Interpretation of a raw integer at a given width and signage, using the
/// least positive residue definition of modulus.
pub fn residue(k: &BigInt, w: u32, s: Signage) -> BigInt {
    let m = BigInt::one() << w;
    match s {
        Signage::Unsign => k.mod_floor(&m),
        Signage::Sign => {
            let mh = BigInt::one() << (w - 1);
            2 * k.mod_floor(&mh) - k.mod_floor(&m)
        }
    }
}

/// `residue` specialised to machine integers; valid for w <= 62.
pub fn residue_i128(k: i128, w: u32, s: Signage) -> i128 {
    debug_assert!(w >= 1 && w <= 62);
    let m = 1i128 << w;
    let p = k.rem_euclid(m);
    match s {
        Signage::Unsign => p,
        Signage::Sign => {
            if p >= (m >> 1) {
                p - m
            } else {
                p
            }
        }
    }
}

fn bit_pattern(v: &BigInt, w: u32) -> BigInt {
    v.mod_floor(&(BigInt::one() << w))
}

fn arg_width(a: &Arg) -> Result<u32, IrError> {
    a.width
        .lit()
        .ok_or_else(|| IrError::NonConcrete("width variable".into()))
}

fn conv_arg(a: &Arg, env: &Env) -> Result<BigInt, IrError> {
    let raw = eval_raw(&a.term, env)?;
    let w = arg_width(a)?;
    if w == 0 {
        return Err(IrError::ZeroWidth);
    }
    let s = a
        .signage
        .lit()
        .ok_or_else(|| IrError::NonConcrete("signage variable".into()))?;
    Ok(residue(&raw, w, s))
}

fn eval_raw(t: &Term, env: &Env) -> Result<BigInt, IrError> {
    match t {
        Term::Var(n) => env
            .get(n)
            .map(|v| BigInt::from(v.clone()))
            .ok_or_else(|| IrError::UnboundVar(n.clone())),
        Term::Const(c) => Ok(BigInt::from(c.clone())),
        Term::ConstVar(n) => Err(IrError::NonConcrete(n.clone())),
        Term::Node(n) => eval_node(n, env),
    }
}

fn eval_node(n: &Node, env: &Env) -> Result<BigInt, IrError> {
    let w = n
        .width
        .lit()
        .ok_or_else(|| IrError::NonConcrete("width variable".into()))?;
    if w == 0 {
        return Err(IrError::ZeroWidth);
    }
    if !n.op.arity().accepts(n.args.len()) {
        return Err(IrError::BadArity {
            op: n.op.token(),
            got: n.args.len(),
        });
    }
    let raw = apply_op(n, w, env)?;
    Ok(residue(&raw, w, Signage::Unsign))
}

fn apply_op(n: &Node, w: u32, env: &Env) -> Result<BigInt, IrError> {
    use Op::*;
    let a = &n.args;
    match n.op {
        Add => Ok(conv_arg(&a[0], env)? + conv_arg(&a[1], env)?),
        Sub => Ok(conv_arg(&a[0], env)? - conv_arg(&a[1], env)?),
        Neg => Ok(-conv_arg(&a[0], env)?),
        Mul => Ok(conv_arg(&a[0], env)? * conv_arg(&a[1], env)?),
        Sum => {
            let mut acc = BigInt::zero();
            for x in a {
                acc += conv_arg(x, env)?;
            }
            Ok(acc)
        }
        Fma => Ok(conv_arg(&a[0], env)? * conv_arg(&a[1], env)? + conv_arg(&a[2], env)?),
        Muxar => {
            // Row i selects between the second and third operand on bit i of
            // the first operand's pattern; rows are shifted and summed.
            let wb = arg_width(&a[0])?;
            let sel = bit_pattern(&conv_arg(&a[0], env)?, wb);
            let x = conv_arg(&a[1], env)?;
            let y = conv_arg(&a[2], env)?;
            let mut acc = BigInt::zero();
            for i in 0..wb {
                let row = if sel.bit(i as u64) { &x } else { &y };
                acc += row << i;
            }
            Ok(acc)
        }
        Shl => {
            let v = conv_arg(&a[0], env)?;
            let amt = bit_pattern(&conv_arg(&a[1], env)?, arg_width(&a[1])?);
            // Amounts >= out width wrap to zero; keep the shift small.
            match amt.to_u32() {
                Some(k) if k < w => Ok(v << k),
                _ => Ok(BigInt::zero()),
            }
        }
        Shr => {
            // Logical: operate on the operand's bit pattern.
            let p = bit_pattern(&conv_arg(&a[0], env)?, arg_width(&a[0])?);
            let amt = bit_pattern(&conv_arg(&a[1], env)?, arg_width(&a[1])?);
            match amt.to_u32() {
                Some(k) if k < arg_width(&a[0])? => Ok(p >> k),
                _ => Ok(BigInt::zero()),
            }
        }
        Mux => {
            let sel = conv_arg(&a[0], env)?;
            if !sel.is_zero() {
                conv_arg(&a[1], env)
            } else {
                conv_arg(&a[2], env)
            }
        }
        Concat => {
            // First operand is most significant.
            let mut acc = BigInt::zero();
            for x in a {
                let wi = arg_width(x)?;
                acc = (acc << wi) | bit_pattern(&conv_arg(x, env)?, wi);
            }
            Ok(acc)
        }
        Slice { hi, lo } => {
            // Two's-complement bit extraction of the converted value; floor
            // shift makes sign extension fall out for negative operands.
            let v = conv_arg(&a[0], env)?;
            Ok(bit_pattern(&(v >> lo), hi - lo + 1))
        }
        Eq => Ok(cmp01(conv_arg(&a[0], env)? == conv_arg(&a[1], env)?)),
        Ne => Ok(cmp01(conv_arg(&a[0], env)? != conv_arg(&a[1], env)?)),
        Lt => Ok(cmp01(conv_arg(&a[0], env)? < conv_arg(&a[1], env)?)),
        Le => Ok(cmp01(conv_arg(&a[0], env)? <= conv_arg(&a[1], env)?)),
        Gt => Ok(cmp01(conv_arg(&a[0], env)? > conv_arg(&a[1], env)?)),
        Ge => Ok(cmp01(conv_arg(&a[0], env)? >= conv_arg(&a[1], env)?)),
        Not => Ok(-(conv_arg(&a[0], env)? + BigInt::one())),
        And => {
            let (x, y) = (conv_arg(&a[0], env)?, conv_arg(&a[1], env)?);
            Ok(bit_pattern(&x, w) & bit_pattern(&y, w))
        }
        Or => {
            let (x, y) = (conv_arg(&a[0], env)?, conv_arg(&a[1], env)?);
            Ok(bit_pattern(&x, w) | bit_pattern(&y, w))
        }
        Xor => {
            let (x, y) = (conv_arg(&a[0], env)?, conv_arg(&a[1], env)?);
            Ok(bit_pattern(&x, w) ^ bit_pattern(&y, w))
        }
        ReduceAnd | ReduceNand => {
            let wi = arg_width(&a[0])?;
            let p = bit_pattern(&conv_arg(&a[0], env)?, wi);
            let full = p == (BigInt::one() << wi) - 1;
            Ok(cmp01(full ^ matches!(n.op, ReduceNand)))
        }
        ReduceOr | ReduceNor => {
            let wi = arg_width(&a[0])?;
            let p = bit_pattern(&conv_arg(&a[0], env)?, wi);
            let any = !p.is_zero();
            Ok(cmp01(any ^ matches!(n.op, ReduceNor)))
        }
        ReduceXor | ReduceXnor => {
            let wi = arg_width(&a[0])?;
            let p = bit_pattern(&conv_arg(&a[0], env)?, wi);
            let mut parity = false;
            for i in 0..wi {
                parity ^= p.bit(i as u64);
            }
            Ok(cmp01(parity ^ matches!(n.op, ReduceXnor)))
        }
    }
}

fn cmp01(b: bool) -> BigInt {
    if b {
        BigInt::one()
    } else {
        BigInt::zero()
    }
}

/// Evaluates a concrete term under an input assignment. The result is the
/// node's output value in `[0, 2^out_width)`; bare variables and constants
/// evaluate to their raw value.
pub fn eval_term(t: &Term, env: &Env) -> Result<BigUint, IrError> {
    let v = eval_raw(t, env)?;
    debug_assert!(
        !matches!(t, Term::Node(_)) || !v.is_negative(),
        "node outputs are wrapped unsigned"
    );
    if v.is_negative() {
        return Err(IrError::NonConcrete("negative raw value".into()));
    }
    Ok(v.to_biguint().expect("non-negative"))
}
