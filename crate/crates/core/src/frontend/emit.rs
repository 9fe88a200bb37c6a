//! Canonical Verilog emission: one operator per assign, topologically
//! ordered, original signal names retained where known and fresh `t<k>`
//! names otherwise. Signedness is encoded explicitly per operand (casts or
//! bit-replication), so declarations are always unsigned and the printed
//! module re-parses to the same interpretation.

use super::DesignModule;
use crate::ir::{Arg, Op, Signage, Term};
use num_bigint::BigUint;
use num_integer::Integer;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use std::rc::Rc;

/// Assigns stable signal names to structurally distinct terms. Reused across
/// the modules of a proof chain so unchanged cones keep their names.
#[derive(Default)]
pub struct NameArena {
    map: HashMap<Term, String>,
    used: HashSet<String>,
    next: usize,
}

impl NameArena {
    pub fn new() -> Self {
        Self::default()
    }

    /// Reserves `name` for `term` if neither is taken.
    pub fn reserve(&mut self, term: &Term, name: &str) {
        if !self.used.contains(name) && !self.map.contains_key(term) {
            self.map.insert(term.clone(), name.to_string());
            self.used.insert(name.to_string());
        }
    }

    pub fn reserve_name_only(&mut self, name: &str) {
        self.used.insert(name.to_string());
    }

    fn name_of(&mut self, term: &Term) -> String {
        if let Some(n) = self.map.get(term) {
            return n.clone();
        }
        loop {
            let cand = format!("t{}", self.next);
            self.next += 1;
            if !self.used.contains(&cand) {
                self.used.insert(cand.clone());
                self.map.insert(term.clone(), cand.clone());
                return cand;
            }
        }
    }
}

#[derive(Clone)]
enum Operand {
    Sig { name: String, width: u32 },
    Const(BigUint),
}

struct Emitter<'a> {
    arena: &'a mut NameArena,
    /// Per-module preferred names (signal names bound to term shapes for
    /// this module only; rewritten cones can re-take a name that an older
    /// definition holds in the arena).
    overrides: HashMap<Term, String>,
    input_widths: BTreeMap<String, u32>,
    memo: HashMap<*const Term, Operand>,
    emitted: HashSet<String>,
    wires: Vec<(String, u32)>,
    assigns: Vec<String>,
}

fn two_pow(w: u32) -> BigUint {
    BigUint::from(1u32) << w
}

impl<'a> Emitter<'a> {
    /// Ensures every operator node below (and including) `t` has a signal;
    /// returns how to reference `t` as an operand.
    fn emit_term(&mut self, t: &Rc<Term>) -> Operand {
        let key = Rc::as_ptr(t);
        if let Some(op) = self.memo.get(&key) {
            return op.clone();
        }
        let out = match t.as_ref() {
            Term::Var(n) => Operand::Sig {
                name: n.clone(),
                width: *self.input_widths.get(n).unwrap_or(&1),
            },
            Term::Const(c) => Operand::Const(c.clone()),
            Term::ConstVar(n) => panic!("cannot emit pattern leaf #{n}"),
            Term::Node(node) => {
                let args: Vec<(Operand, &Arg)> = node
                    .args
                    .iter()
                    .map(|a| (self.emit_term(&a.term), a))
                    .collect();
                let w = node.width.lit().expect("concrete term");
                let name = match self.overrides.get(t.as_ref()) {
                    Some(n) => n.clone(),
                    None => self.arena.name_of(t),
                };
                if !self.emitted.contains(&name) {
                    self.emitted.insert(name.clone());
                    let text = self.node_text(node.op, w, &args);
                    self.wires.push((name.clone(), w));
                    self.assigns.push(format!("  assign {name} = {text};"));
                }
                Operand::Sig { name, width: w }
            }
        };
        self.memo.insert(key, out.clone());
        out
    }

    /// Renders an operand interpreted at (w, s) inside a value context: a
    /// plain or truncated signal, `$signed(...)`, or a pre-wrapped literal.
    fn value_operand(&self, op: &Operand, a: &Arg) -> String {
        let w = a.width.lit().expect("concrete");
        let s = a.signage.lit().expect("concrete");
        match op {
            Operand::Const(c) => {
                let v = c.mod_floor(&two_pow(w));
                match s {
                    Signage::Unsign => format!("{w}'d{v}"),
                    Signage::Sign => format!("$signed({w}'d{v})"),
                }
            }
            Operand::Sig { name, width } => {
                let base = if w < *width {
                    format!("{name}[{}:0]", w - 1)
                } else {
                    name.clone()
                };
                match s {
                    Signage::Sign if w <= *width => format!("$signed({base})"),
                    _ => base,
                }
            }
        }
    }

    /// Renders an operand as its raw bit pattern at exactly (w) bits, for
    /// positions that ignore signage (shift amounts, concat parts, selects).
    fn pattern_operand(&self, op: &Operand, w: u32) -> String {
        match op {
            Operand::Const(c) => format!("{w}'d{}", c.mod_floor(&two_pow(w))),
            Operand::Sig { name, width } => {
                if w < *width {
                    format!("{name}[{}:0]", w - 1)
                } else if w > *width {
                    format!("{{{}'d0, {name}}}", w - *width)
                } else {
                    name.clone()
                }
            }
        }
    }

    fn node_text(&self, op: Op, w: u32, args: &[(Operand, &Arg)]) -> String {
        let v = |i: usize| self.value_operand(&args[i].0, args[i].1);
        let aw = |i: usize| args[i].1.width.lit().expect("concrete");
        match op {
            Op::Add => format!("{} + {}", v(0), v(1)),
            Op::Sub => format!("{} - {}", v(0), v(1)),
            Op::Neg => format!("-{}", v(0)),
            Op::Mul => format!("{} * {}", v(0), v(1)),
            Op::Sum => {
                let parts: Vec<String> = (0..args.len()).map(v).collect();
                parts.join(" + ")
            }
            Op::Fma => format!("{} * {} + {}", v(0), v(1), v(2)),
            Op::Muxar => self.muxar_text(args),
            Op::Shl | Op::Shr => {
                let amt = self.pattern_operand(&args[1].0, aw(1));
                let sym = if op == Op::Shl { "<<" } else { ">>" };
                if op == Op::Shr {
                    // Logical: shift the operand's bit pattern.
                    format!("{} {sym} {amt}", self.pattern_operand(&args[0].0, aw(0)))
                } else {
                    format!("{} {sym} {amt}", v(0))
                }
            }
            Op::Mux => {
                let sel = self.pattern_operand(&args[0].0, aw(0));
                format!("{sel} ? {} : {}", v(1), v(2))
            }
            Op::Concat => {
                let parts: Vec<String> = args
                    .iter()
                    .map(|(o, a)| self.pattern_operand(o, a.width.lit().unwrap()))
                    .collect();
                format!("{{{}}}", parts.join(", "))
            }
            Op::Slice { hi, lo } => self.slice_text(&args[0].0, args[0].1, hi, lo, w),
            Op::Eq => format!("{} == {}", v(0), v(1)),
            Op::Ne => format!("{} != {}", v(0), v(1)),
            Op::Lt => format!("{} < {}", v(0), v(1)),
            Op::Le => format!("{} <= {}", v(0), v(1)),
            Op::Gt => format!("{} > {}", v(0), v(1)),
            Op::Ge => format!("{} >= {}", v(0), v(1)),
            Op::Not => format!("~{}", v(0)),
            Op::And => format!("{} & {}", v(0), v(1)),
            Op::Or => format!("{} | {}", v(0), v(1)),
            Op::Xor => format!("{} ^ {}", v(0), v(1)),
            Op::ReduceAnd => format!("&{}", self.pattern_operand(&args[0].0, aw(0))),
            Op::ReduceOr => format!("|{}", self.pattern_operand(&args[0].0, aw(0))),
            Op::ReduceXor => format!("^{}", self.pattern_operand(&args[0].0, aw(0))),
            Op::ReduceNand => format!("~&{}", self.pattern_operand(&args[0].0, aw(0))),
            Op::ReduceNor => format!("~|{}", self.pattern_operand(&args[0].0, aw(0))),
            Op::ReduceXnor => format!("~^{}", self.pattern_operand(&args[0].0, aw(0))),
        }
    }

    fn muxar_text(&self, args: &[(Operand, &Arg)]) -> String {
        let rows = args[0].1.width.lit().expect("concrete");
        let x = self.value_operand(&args[1].0, args[1].1);
        let y = self.value_operand(&args[2].0, args[2].1);
        let mut parts = Vec::new();
        for i in 0..rows {
            let bit = match &args[0].0 {
                Operand::Sig { name, .. } => format!("{name}[{i}]"),
                Operand::Const(c) => format!("1'd{}", c.bit(i as u64) as u8),
            };
            parts.push(format!("(({bit} ? {x} : {y}) << {i})"));
        }
        parts.join(" + ")
    }

    fn slice_text(&self, op: &Operand, a: &Arg, hi: u32, lo: u32, _w: u32) -> String {
        let aw = a.width.lit().expect("concrete");
        let asig = a.signage.lit().expect("concrete");
        if let Operand::Const(c) = op {
            // Fold constant slices into a literal.
            let conv = crate::ir::residue(&c.clone().into(), aw, asig);
            let width = hi - lo + 1;
            let val = (conv >> lo).mod_floor(&(num_bigint::BigInt::from(1) << width));
            return format!("{width}'d{val}");
        }
        let (name, wd) = match op {
            Operand::Sig { name, width } => (name.clone(), *width),
            Operand::Const(_) => unreachable!(),
        };
        if hi < aw && hi < wd {
            if lo == 0 && hi + 1 == wd {
                return name;
            }
            return format!("{name}[{hi}:{lo}]");
        }
        // Sign-widening from the full operand: a cast extends on assignment.
        if lo == 0 && asig == Signage::Sign && aw <= wd {
            return format!("$signed({})", if aw < wd {
                format!("{name}[{}:0]", aw - 1)
            } else {
                name
            });
        }
        // General form: explicit extension to hi+1 bits, then shift.
        let w_low = aw.min(wd);
        let pad = hi + 1 - w_low;
        let base = if w_low < wd {
            format!("{name}[{}:0]", w_low - 1)
        } else {
            name.clone()
        };
        let padded = match asig {
            Signage::Sign if aw <= wd => {
                format!("{{{{{pad}{{{name}[{}]}}}}, {base}}}", w_low - 1)
            }
            _ => format!("{{{pad}'d0, {base}}}"),
        };
        if lo == 0 {
            padded
        } else {
            format!("({padded}) >> {lo}")
        }
    }
}

/// Canonical flat printing (one operator per assign). Parsing the output
/// reproduces the module: unchanged names, identical widths.
pub fn print_verilog(dm: &DesignModule) -> String {
    let mut arena = NameArena::new();
    print_verilog_with_arena(dm, &mut arena)
}

/// As `print_verilog`, with an externally owned name arena so a sequence of
/// related modules keeps stable names for shared cones.
pub fn print_verilog_with_arena(dm: &DesignModule, arena: &mut NameArena) -> String {
    print_verilog_named(dm, arena, &HashMap::new())
}

/// As `print_verilog_with_arena` with additional term-shape naming: any
/// emitted node structurally equal to a key takes the mapped name in this
/// module (name retention for rewritten cones).
pub fn print_verilog_named(
    dm: &DesignModule,
    arena: &mut NameArena,
    extra_names: &HashMap<Term, String>,
) -> String {
    for p in dm.inputs.iter().chain(dm.outputs.iter()) {
        arena.reserve_name_only(&p.name);
    }
    let mut overrides: HashMap<Term, String> = extra_names.clone();
    for b in &dm.bindings {
        arena.reserve_name_only(&b.name);
        overrides.entry(b.term.as_ref().clone()).or_insert_with(|| b.name.clone());
    }
    for n in extra_names.values() {
        arena.reserve_name_only(n);
    }
    let mut em = Emitter {
        arena,
        overrides,
        input_widths: dm.inputs.iter().map(|p| (p.name.clone(), p.width)).collect(),
        memo: HashMap::new(),
        emitted: HashSet::new(),
        wires: Vec::new(),
        assigns: Vec::new(),
    };
    let mut alias_assigns = Vec::new();
    let mut alias_wires = Vec::new();
    for b in &dm.bindings {
        let opnd = em.emit_term(&b.term);
        match opnd {
            Operand::Sig { name, .. } if name == b.name => {}
            other => {
                // Leaf bindings and shared cones become plain aliases.
                let text = match &other {
                    Operand::Sig { name, .. } => name.clone(),
                    Operand::Const(c) => format!("{}'d{}", b.width, c.mod_floor(&two_pow(b.width))),
                };
                alias_wires.push((b.name.clone(), b.width));
                alias_assigns.push(format!("  assign {} = {};", b.name, text));
            }
        }
    }

    let mut out = String::new();
    let _ = writeln!(out, "module {}(", dm.name);
    let mut ports = Vec::new();
    for p in &dm.inputs {
        ports.push(format!("  input {}{}", range_text(p.width), p.name));
    }
    for p in &dm.outputs {
        ports.push(format!("  output {}{}", range_text(p.width), p.name));
    }
    let _ = writeln!(out, "{}", ports.join(",\n"));
    let _ = writeln!(out, ");");
    let port_names: HashSet<&String> = dm
        .inputs
        .iter()
        .chain(dm.outputs.iter())
        .map(|p| &p.name)
        .collect();
    for (name, w) in em.wires.iter().chain(alias_wires.iter()) {
        if !port_names.contains(name) {
            let _ = writeln!(out, "  wire {}{};", range_text(*w), name);
        }
    }
    for a in em.assigns.iter().chain(alias_assigns.iter()) {
        let _ = writeln!(out, "{a}");
    }
    let _ = writeln!(out, "endmodule");
    out
}

fn range_text(w: u32) -> String {
    if w == 1 {
        String::new()
    } else {
        format!("[{}:0] ", w - 1)
    }
}
