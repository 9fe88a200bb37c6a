//! Theoretical two-input-gate cost model. Closed-form per-operator gate
//! counts in the operand/output widths, with constant-operand variants;
//! wiring (slice, concat, constant shift) is free. All constants are
//! overridable through a config file.

use crate::engine::{EGraph, ENode, Id};
use crate::ir::Op;
use num_bigint::BigUint;
use num_traits::ToPrimitive;

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct CostConfig {
    /// Carry-propagate adder gates per output bit (add/sub/increment).
    pub cpa_per_bit: u64,
    /// Negation gates per bit (invert plus increment).
    pub neg_per_bit: u64,
    /// Multiplier array gates per operand-bit product.
    pub mul_array: u64,
    /// Multiplier final-adder gates per output bit.
    pub mul_out_per_bit: u64,
    /// Multiplexer gates per output bit.
    pub mux_per_bit: u64,
    /// Variable shifter gates per output bit per amount bit (mux tree).
    pub shift_per_bit: u64,
    /// Comparator gates per bit of the wider operand.
    pub cmp_per_bit: u64,
    /// Carry-save row compression gates per bit per extra row.
    pub csa_per_bit: u64,
    /// Two-input bitwise gate cost per bit.
    pub bitop_per_bit: u64,
}

impl Default for CostConfig {
    fn default() -> Self {
        CostConfig {
            cpa_per_bit: 12,
            neg_per_bit: 13,
            mul_array: 6,
            mul_out_per_bit: 12,
            mux_per_bit: 3,
            shift_per_bit: 3,
            cmp_per_bit: 12,
            csa_per_bit: 5,
            bitop_per_bit: 1,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct CostModel {
    pub cfg: CostConfig,
}

/// Nonzero digits of the canonical signed-digit form of a constant.
pub fn csd_digits(v: &BigUint) -> u64 {
    let mut n = match v.to_u128() {
        Some(n) => n,
        None => return v.count_ones(),
    };
    let mut d = 0u64;
    while n != 0 {
        if n & 1 == 1 {
            d += 1;
            if n & 3 == 3 {
                n += 1;
            } else {
                n -= 1;
            }
        }
        n >>= 1;
    }
    d
}

impl CostModel {
    pub fn new(cfg: CostConfig) -> Self {
        CostModel { cfg }
    }

    /// Gate count of one e-node given the constant analysis of its children.
    pub fn node_cost(&self, node: &ENode, const_of: &dyn Fn(Id) -> Option<BigUint>) -> u64 {
        let c = &self.cfg;
        let (op, w, args) = match node {
            ENode::Op { op, width, args } => (*op, *width as u64, args),
            _ => return 0,
        };
        match op {
            Op::Add | Op::Sub => c.cpa_per_bit * w,
            Op::Neg => c.neg_per_bit * w,
            Op::Mul => {
                let k0 = const_of(args[0].class);
                let k1 = const_of(args[1].class);
                match k0.or(k1) {
                    Some(k) => {
                        // Shift-add network per CSD digit of the constant.
                        let d = csd_digits(&k);
                        d.saturating_sub(1) * c.cpa_per_bit * w
                    }
                    None => {
                        c.mul_array * args[0].width as u64 * args[1].width as u64
                            + c.mul_out_per_bit * w
                    }
                }
            }
            Op::Fma => {
                c.mul_array * args[0].width as u64 * args[1].width as u64 + c.mul_out_per_bit * w
            }
            Op::Sum => {
                let n = args.len() as u64;
                c.csa_per_bit * w * (n - 2) + c.cpa_per_bit * w
            }
            Op::Muxar => {
                let r = args[0].width as u64;
                c.mux_per_bit * w * r + c.csa_per_bit * w * r.saturating_sub(1) + c.cpa_per_bit * w
            }
            Op::Shl | Op::Shr => {
                if const_of(args[1].class).is_some() {
                    0
                } else {
                    c.shift_per_bit * w * args[1].width as u64
                }
            }
            Op::Mux => c.mux_per_bit * w,
            Op::Concat | Op::Slice { .. } => 0,
            Op::Eq | Op::Ne | Op::Lt | Op::Le | Op::Gt | Op::Ge => {
                c.cmp_per_bit * (args[0].width.max(args[1].width) as u64)
            }
            Op::Not => c.bitop_per_bit * w,
            Op::And | Op::Or | Op::Xor => c.bitop_per_bit * w,
            Op::ReduceAnd | Op::ReduceOr | Op::ReduceXor | Op::ReduceNand | Op::ReduceNor
            | Op::ReduceXnor => (args[0].width as u64).saturating_sub(1) * c.bitop_per_bit,
        }
    }

    pub fn class_const<'a>(eg: &'a EGraph) -> impl Fn(Id) -> Option<BigUint> + 'a {
        |id| eg.class(id).const_val.clone()
    }
}
