//! Verilog-context labeling: the paper's flow converts both instantiated
//! patterns to RTL and defers semantic interpretation to the equivalence
//! checker. Reproduced here by emitting naive Verilog (declaration
//! signedness from annotations, no casts), re-parsing it, and running the
//! exhaustive oracle on the re-parsed cones — so IEEE context coercion
//! applies exactly as a Verilog tool would.

use crate::frontend::parse_verilog;
use crate::ir::{Signage, Term};
use std::collections::BTreeMap;
use std::fmt::Write as _;

struct Emit {
    decls: Vec<String>,
    assigns: Vec<String>,
    next: usize,
    inputs: BTreeMap<String, (u32, Signage)>,
}

impl Emit {
    /// Returns the signal text for a term consumed at (w, s); `None` when a
    /// variable or node is consumed at inconsistent annotations and plain
    /// Verilog cannot express the term without casts.
    fn emit(&mut self, t: &Term, w: u32, s: Signage) -> Option<String> {
        match t {
            Term::Var(n) => {
                match self.inputs.get(n) {
                    Some(prev) if *prev != (w, s) => return None,
                    None => {
                        self.inputs.insert(n.clone(), (w, s));
                    }
                    _ => {}
                }
                Some(n.clone())
            }
            Term::Const(c) => Some(format!("{w}'d{}", c % (num_bigint::BigUint::from(1u32) << w))),
            Term::ConstVar(_) => None,
            Term::Node(node) => {
                let nw = node.width.lit()?;
                let mut parts = Vec::new();
                for a in &node.args {
                    parts.push(self.emit(&a.term, a.width.lit()?, a.signage.lit()?)?);
                }
                let text = match (node.op, parts.as_slice()) {
                    (crate::ir::Op::Add, [a, b]) => format!("{a} + {b}"),
                    (crate::ir::Op::Sub, [a, b]) => format!("{a} - {b}"),
                    (crate::ir::Op::Mul, [a, b]) => format!("{a} * {b}"),
                    (crate::ir::Op::Neg, [a]) => format!("-{a}"),
                    (crate::ir::Op::Not, [a]) => format!("~{a}"),
                    (crate::ir::Op::Shl, [a, b]) => format!("{a} << {b}"),
                    (crate::ir::Op::Shr, [a, b]) => format!("{a} >> {b}"),
                    _ => return None,
                };
                let name = format!("n{}", self.next);
                self.next += 1;
                self.decls.push(format!(
                    "  wire {}{}{};",
                    if s == Signage::Sign { "signed " } else { "" },
                    range(nw),
                    name
                ));
                self.assigns.push(format!("  assign {name} = {text};"));
                let _ = w;
                Some(name)
            }
        }
    }
}

fn range(w: u32) -> String {
    if w == 1 {
        String::new()
    } else {
        format!("[{}:0] ", w - 1)
    }
}

/// Re-interprets an instantiated pattern pair through plain Verilog.
/// Both terms share the module's inputs; returns the re-parsed output cones.
pub fn verilog_reinterpret(lhs: &Term, rhs: &Term) -> Option<(Term, Term)> {
    let mut em = Emit {
        decls: Vec::new(),
        assigns: Vec::new(),
        next: 0,
        inputs: BTreeMap::new(),
    };
    let (lw, ls) = root_annotation(lhs)?;
    let (rw, rs) = root_annotation(rhs)?;
    let l = em.emit(lhs, lw, ls)?;
    let r = em.emit(rhs, rw, rs)?;
    let mut src = String::from("module check(\n");
    let mut ports = Vec::new();
    for (n, (w, s)) in &em.inputs {
        ports.push(format!(
            "  input {}{}{}",
            if *s == Signage::Sign { "signed " } else { "" },
            range(*w),
            n
        ));
    }
    ports.push(format!("  output {}l", range(lw)));
    ports.push(format!("  output {}r", range(rw)));
    let _ = writeln!(src, "{}", ports.join(",\n"));
    src.push_str(");\n");
    for d in &em.decls {
        let _ = writeln!(src, "{d}");
    }
    for a in &em.assigns {
        let _ = writeln!(src, "{a}");
    }
    let _ = writeln!(src, "  assign l = {l};");
    let _ = writeln!(src, "  assign r = {r};");
    src.push_str("endmodule\n");
    let m = parse_verilog(&src).ok()?;
    let outs = m.output_terms();
    let lt = outs.iter().find(|(n, _)| n == "l")?.1.as_ref().clone();
    let rt = outs.iter().find(|(n, _)| n == "r")?.1.as_ref().clone();
    Some((lt, rt))
}

fn root_annotation(t: &Term) -> Option<(u32, Signage)> {
    match t {
        Term::Node(n) => Some((n.width.lit()?, Signage::Unsign)),
        _ => None,
    }
}
