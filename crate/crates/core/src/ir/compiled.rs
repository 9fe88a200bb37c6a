//! Flattened evaluator for exhaustive enumeration.
//!
//! A concrete term DAG is compiled to a topologically ordered instruction
//! list over `i128` registers. Inputs advance through an odometer; after a
//! step only instructions depending on the changed (or deeper) variables are
//! re-executed, which keeps full 24-bit sweeps tractable on one core.
//! Semantics mirror `eval_term` exactly; agreement is enforced by tests.

use super::{Env, Op, Signage, Term};
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use std::collections::HashMap;

const MAX_WIDTH: u32 = 30;

/// Operand conversion: `pattern = v & mask`, then subtract `mask + 1` when
/// the sign bit is set. `half` is `i128::MAX` for unsigned operands so the
/// branch never fires.
#[derive(Clone, Copy, Debug)]
struct Conv {
    mask: i128,
    half: i128,
}

impl Conv {
    fn new(w: u32, s: Signage) -> Conv {
        let mask = (1i128 << w) - 1;
        let half = match s {
            Signage::Unsign => i128::MAX,
            Signage::Sign => 1i128 << (w - 1),
        };
        Conv { mask, half }
    }
}

#[inline(always)]
fn cv(v: i128, c: Conv) -> i128 {
    let p = v & c.mask;
    if p >= c.half {
        p - c.mask - 1
    } else {
        p
    }
}

#[derive(Clone, Debug)]
enum Kind {
    LoadConst(i128),
    Add,
    Sub,
    Neg,
    Mul,
    Fma,
    Sum,
    Muxar { rows: u32 },
    Shl { wout: u32 },
    Shr { win: u32, in_mask: i128 },
    Mux,
    Concat { shifts: Vec<u32>, masks: Vec<i128> },
    Slice { lo: u32, mask: i128 },
    CmpEq,
    CmpNe,
    CmpLt,
    CmpLe,
    CmpGt,
    CmpGe,
    Not,
    BitAnd,
    BitOr,
    BitXor,
    RedAnd { in_mask: i128, inv: bool },
    RedOr { in_mask: i128, inv: bool },
    RedXor { in_mask: i128, inv: bool },
}

#[derive(Clone, Debug)]
struct Inst {
    kind: Kind,
    args: Vec<(u32, Conv)>,
    out_mask: i128,
    dst: u32,
    level: i64,
}

/// Compiled enumeration program over one or more root terms.
pub struct Program {
    vars: Vec<(String, u32)>,
    insts: Vec<Inst>,
    level_start: Vec<usize>,
    roots: Vec<u32>,
    nregs: usize,
}

/// Structural key for hash-consing compiled nodes across shared subterms.
#[derive(Hash, PartialEq, Eq)]
enum NodeKey {
    Const(u128),
    Node(Op, u32, Vec<(u32, u32, Signage)>),
}

struct Compiler<'a> {
    var_index: HashMap<&'a str, u32>,
    ptr_memo: HashMap<*const Term, (u32, i64)>,
    node_memo: HashMap<NodeKey, (u32, i64)>,
    insts: Vec<Inst>,
    next_reg: u32,
}

impl<'a> Compiler<'a> {
    /// Pointer-level memo first (cheap for `Rc`-shared DAGs), then structural
    /// consing keyed on (op, width, child regs, annotations).
    fn compile(&mut self, t: &Term) -> Option<(u32, i64)> {
        let ptr = t as *const Term;
        if let Some(hit) = self.ptr_memo.get(&ptr) {
            return Some(*hit);
        }
        let out = match t {
            Term::Var(n) => {
                let idx = *self.var_index.get(n.as_str())?;
                (idx, idx as i64)
            }
            Term::Const(c) => {
                let v = c.to_u128()?;
                if v >= (1u128 << 60) {
                    return None;
                }
                let key = NodeKey::Const(v);
                match self.node_memo.get(&key) {
                    Some(hit) => *hit,
                    None => {
                        let dst = self.alloc();
                        self.insts.push(Inst {
                            kind: Kind::LoadConst(v as i128),
                            args: vec![],
                            out_mask: i128::MAX,
                            dst,
                            level: -1,
                        });
                        self.node_memo.insert(key, (dst, -1));
                        (dst, -1)
                    }
                }
            }
            Term::ConstVar(_) => return None,
            Term::Node(n) => {
                let w = n.width.lit()?;
                if w == 0 || w > MAX_WIDTH {
                    return None;
                }
                let mut regs = Vec::with_capacity(n.args.len());
                let mut level = -1i64;
                let mut widths = Vec::with_capacity(n.args.len());
                let mut keyargs = Vec::with_capacity(n.args.len());
                for a in &n.args {
                    let aw = a.width.lit()?;
                    let s = a.signage.lit()?;
                    if aw == 0 || aw > MAX_WIDTH {
                        return None;
                    }
                    let (reg, lv) = self.compile(&a.term)?;
                    level = level.max(lv);
                    regs.push((reg, Conv::new(aw, s)));
                    widths.push(aw);
                    keyargs.push((reg, aw, s));
                }
                let key = NodeKey::Node(n.op, w, keyargs);
                match self.node_memo.get(&key) {
                    Some(hit) => *hit,
                    None => {
                        let kind = lower_op(n.op, w, &widths)?;
                        let dst = self.alloc();
                        self.insts.push(Inst {
                            kind,
                            args: regs,
                            out_mask: (1i128 << w) - 1,
                            dst,
                            level,
                        });
                        self.node_memo.insert(key, (dst, level));
                        (dst, level)
                    }
                }
            }
        };
        self.ptr_memo.insert(ptr, out);
        Some(out)
    }

    fn alloc(&mut self) -> u32 {
        let r = self.next_reg;
        self.next_reg += 1;
        r
    }
}

fn lower_op(op: Op, w: u32, arg_widths: &[u32]) -> Option<Kind> {
    use Op::*;
    Some(match op {
        Add => Kind::Add,
        Sub => Kind::Sub,
        Neg => Kind::Neg,
        Mul => Kind::Mul,
        Fma => Kind::Fma,
        Sum => Kind::Sum,
        Muxar => Kind::Muxar {
            rows: arg_widths[0],
        },
        Shl => Kind::Shl { wout: w },
        Shr => Kind::Shr {
            win: arg_widths[0],
            in_mask: (1i128 << arg_widths[0]) - 1,
        },
        Mux => Kind::Mux,
        Concat => {
            if arg_widths.iter().sum::<u32>() > 60 {
                return None;
            }
            let mut shifts = vec![0u32; arg_widths.len()];
            let mut acc = 0;
            for i in (0..arg_widths.len()).rev() {
                shifts[i] = acc;
                acc += arg_widths[i];
            }
            Kind::Concat {
                shifts,
                masks: arg_widths.iter().map(|w| (1i128 << w) - 1).collect(),
            }
        }
        Slice { hi, lo } => {
            if hi < lo || hi > 60 {
                return None;
            }
            Kind::Slice {
                lo,
                mask: (1i128 << (hi - lo + 1)) - 1,
            }
        }
        Eq => Kind::CmpEq,
        Ne => Kind::CmpNe,
        Lt => Kind::CmpLt,
        Le => Kind::CmpLe,
        Gt => Kind::CmpGt,
        Ge => Kind::CmpGe,
        Not => Kind::Not,
        And => Kind::BitAnd,
        Or => Kind::BitOr,
        Xor => Kind::BitXor,
        ReduceAnd | ReduceNand => Kind::RedAnd {
            in_mask: (1i128 << arg_widths[0]) - 1,
            inv: matches!(op, ReduceNand),
        },
        ReduceOr | ReduceNor => Kind::RedOr {
            in_mask: (1i128 << arg_widths[0]) - 1,
            inv: matches!(op, ReduceNor),
        },
        ReduceXor | ReduceXnor => Kind::RedXor {
            in_mask: (1i128 << arg_widths[0]) - 1,
            inv: matches!(op, ReduceXnor),
        },
    })
}

#[inline(always)]
fn exec(inst: &Inst, regs: &mut [i128]) {
    let a = &inst.args;
    let v = match &inst.kind {
        Kind::LoadConst(c) => *c,
        Kind::Add => cv(regs[a[0].0 as usize], a[0].1) + cv(regs[a[1].0 as usize], a[1].1),
        Kind::Sub => cv(regs[a[0].0 as usize], a[0].1) - cv(regs[a[1].0 as usize], a[1].1),
        Kind::Neg => -cv(regs[a[0].0 as usize], a[0].1),
        Kind::Mul => cv(regs[a[0].0 as usize], a[0].1) * cv(regs[a[1].0 as usize], a[1].1),
        Kind::Fma => {
            cv(regs[a[0].0 as usize], a[0].1) * cv(regs[a[1].0 as usize], a[1].1)
                + cv(regs[a[2].0 as usize], a[2].1)
        }
        Kind::Sum => {
            let mut acc = 0i128;
            for (r, c) in a {
                acc += cv(regs[*r as usize], *c);
            }
            acc
        }
        Kind::Muxar { rows } => {
            let sel = regs[a[0].0 as usize] & a[0].1.mask;
            let x = cv(regs[a[1].0 as usize], a[1].1);
            let y = cv(regs[a[2].0 as usize], a[2].1);
            let mut acc = 0i128;
            for i in 0..*rows {
                let row = if (sel >> i) & 1 != 0 { x } else { y };
                acc += row << i;
            }
            acc
        }
        Kind::Shl { wout } => {
            let amt = regs[a[1].0 as usize] & a[1].1.mask;
            if amt >= *wout as i128 {
                0
            } else {
                cv(regs[a[0].0 as usize], a[0].1) << amt
            }
        }
        Kind::Shr { win, in_mask } => {
            let amt = regs[a[1].0 as usize] & a[1].1.mask;
            if amt >= *win as i128 {
                0
            } else {
                (regs[a[0].0 as usize] & in_mask) >> amt
            }
        }
        Kind::Mux => {
            if regs[a[0].0 as usize] & a[0].1.mask != 0 {
                cv(regs[a[1].0 as usize], a[1].1)
            } else {
                cv(regs[a[2].0 as usize], a[2].1)
            }
        }
        Kind::Concat { shifts, masks } => {
            let mut acc = 0i128;
            for (i, (r, _)) in a.iter().enumerate() {
                acc |= (regs[*r as usize] & masks[i]) << shifts[i];
            }
            acc
        }
        Kind::Slice { lo, mask } => (cv(regs[a[0].0 as usize], a[0].1) >> lo) & mask,
        Kind::CmpEq => {
            (cv(regs[a[0].0 as usize], a[0].1) == cv(regs[a[1].0 as usize], a[1].1)) as i128
        }
        Kind::CmpNe => {
            (cv(regs[a[0].0 as usize], a[0].1) != cv(regs[a[1].0 as usize], a[1].1)) as i128
        }
        Kind::CmpLt => {
            (cv(regs[a[0].0 as usize], a[0].1) < cv(regs[a[1].0 as usize], a[1].1)) as i128
        }
        Kind::CmpLe => {
            (cv(regs[a[0].0 as usize], a[0].1) <= cv(regs[a[1].0 as usize], a[1].1)) as i128
        }
        Kind::CmpGt => {
            (cv(regs[a[0].0 as usize], a[0].1) > cv(regs[a[1].0 as usize], a[1].1)) as i128
        }
        Kind::CmpGe => {
            (cv(regs[a[0].0 as usize], a[0].1) >= cv(regs[a[1].0 as usize], a[1].1)) as i128
        }
        Kind::Not => -(cv(regs[a[0].0 as usize], a[0].1) + 1),
        Kind::BitAnd => {
            (cv(regs[a[0].0 as usize], a[0].1) & inst.out_mask)
                & (cv(regs[a[1].0 as usize], a[1].1) & inst.out_mask)
        }
        Kind::BitOr => {
            (cv(regs[a[0].0 as usize], a[0].1) & inst.out_mask)
                | (cv(regs[a[1].0 as usize], a[1].1) & inst.out_mask)
        }
        Kind::BitXor => {
            (cv(regs[a[0].0 as usize], a[0].1) & inst.out_mask)
                ^ (cv(regs[a[1].0 as usize], a[1].1) & inst.out_mask)
        }
        Kind::RedAnd { in_mask, inv } => {
            ((regs[a[0].0 as usize] & in_mask == *in_mask) ^ inv) as i128
        }
        Kind::RedOr { in_mask, inv } => ((regs[a[0].0 as usize] & in_mask != 0) ^ inv) as i128,
        Kind::RedXor { in_mask, inv } => {
            (((regs[a[0].0 as usize] & in_mask).count_ones() % 2 == 1) ^ inv) as i128
        }
    };
    regs[inst.dst as usize] = v & inst.out_mask;
}

impl Program {
    /// Compiles root terms over a shared variable space. `vars` supplies the
    /// enumeration width per variable (name-sorted). Returns `None` when the
    /// terms fall outside the machine-integer envelope; callers fall back to
    /// the big-integer evaluator.
    pub fn compile(roots: &[&Term], vars: &[(String, u32)]) -> Option<Program> {
        if vars.iter().any(|(_, w)| *w == 0 || *w > MAX_WIDTH) {
            return None;
        }
        let var_index: HashMap<&str, u32> = vars
            .iter()
            .enumerate()
            .map(|(i, (n, _))| (n.as_str(), i as u32))
            .collect();
        let mut c = Compiler {
            var_index,
            ptr_memo: HashMap::new(),
            node_memo: HashMap::new(),
            insts: Vec::new(),
            next_reg: vars.len() as u32,
        };
        let mut root_regs = Vec::new();
        for r in roots {
            let (reg, _) = c.compile(r)?;
            root_regs.push(reg);
        }
        let mut insts = c.insts;
        // Stable sort keeps topological order within each level.
        insts.sort_by_key(|i| i.level);
        let mut level_start = vec![insts.len(); vars.len() + 1];
        for (k, slot) in level_start.iter_mut().enumerate() {
            *slot = insts
                .iter()
                .position(|i| i.level >= k as i64)
                .unwrap_or(insts.len());
        }
        Some(Program {
            vars: vars.to_vec(),
            nregs: c.next_reg as usize,
            insts,
            level_start,
            roots: root_regs,
        })
    }

    /// Runs the full input space; returns the first assignment (lexicographic
    /// in name-sorted variable order, earlier variables most significant) on
    /// which the two roots disagree, or `None` if they agree everywhere.
    pub fn enumerate_equiv(&self) -> Option<Env> {
        assert_eq!(self.roots.len(), 2);
        let mut regs = vec![0i128; self.nregs];
        for i in &self.insts {
            exec(i, &mut regs);
        }
        let (r0, r1) = (self.roots[0] as usize, self.roots[1] as usize);
        let nv = self.vars.len();
        let maxes: Vec<i128> = self.vars.iter().map(|(_, w)| (1i128 << w) - 1).collect();
        loop {
            if regs[r0] != regs[r1] {
                return Some(self.env_of(&regs));
            }
            // Odometer: last variable fastest.
            let mut k = nv;
            loop {
                if k == 0 {
                    return None;
                }
                k -= 1;
                regs[k] += 1;
                if regs[k] <= maxes[k] {
                    break;
                }
                regs[k] = 0;
            }
            for i in &self.insts[self.level_start[k]..] {
                exec(i, &mut regs);
            }
        }
    }

    /// Evaluates the compiled roots under a single assignment.
    pub fn eval_once(&self, env: &Env) -> Option<Vec<BigUint>> {
        let mut regs = vec![0i128; self.nregs];
        for (i, (n, w)) in self.vars.iter().enumerate() {
            let v = env.get(n)?.to_u128()?;
            if v >= (1u128 << *w) {
                return None;
            }
            regs[i] = v as i128;
        }
        for i in &self.insts {
            exec(i, &mut regs);
        }
        Some(
            self.roots
                .iter()
                .map(|r| BigUint::from(regs[*r as usize] as u128))
                .collect(),
        )
    }

    fn env_of(&self, regs: &[i128]) -> Env {
        self.vars
            .iter()
            .enumerate()
            .map(|(i, (n, _))| (n.clone(), BigUint::from(regs[i] as u128)))
            .collect()
    }
}

/// Big-integer fallback sharing the same enumeration order.
pub(crate) fn slow_equiv(t1: &Term, t2: &Term, vars: &[(String, u32)]) -> Option<Env> {
    use super::eval::eval_term;
    let nv = vars.len();
    let mut counters = vec![BigUint::from(0u32); nv];
    let maxes: Vec<BigUint> = vars
        .iter()
        .map(|(_, w)| (BigUint::from(1u32) << *w) - 1u32)
        .collect();
    loop {
        let env: Env = vars
            .iter()
            .zip(&counters)
            .map(|((n, _), v)| (n.clone(), v.clone()))
            .collect();
        let v1 = eval_term(t1, &env).ok();
        let v2 = eval_term(t2, &env).ok();
        if v1 != v2 {
            return Some(env);
        }
        let mut k = nv;
        loop {
            if k == 0 {
                return None;
            }
            k -= 1;
            counters[k] += 1u32;
            if counters[k] <= maxes[k] {
                break;
            }
            counters[k] = BigUint::from(0u32);
        }
    }
}
