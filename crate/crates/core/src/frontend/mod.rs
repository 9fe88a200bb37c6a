//! Front end: a combinational Verilog subset and the `.vlng` term format,
//! parsed into term DAGs and pretty-printed back.

mod emit;
mod sexpr;
mod verilog;

pub use emit::{print_verilog, print_verilog_named, print_verilog_with_arena, NameArena};
pub use sexpr::{parse_vlng, print_vlng};
pub use verilog::parse_verilog;

use crate::ir::Term;
use std::collections::BTreeMap;
use std::rc::Rc;

/// Port declaration. Signedness only matters on inputs, where it sets the
/// default interpretation of references.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PortDecl {
    pub name: String,
    pub width: u32,
    pub signed: bool,
}

/// One named signal definition; the term is the fully inlined cone over the
/// module inputs, sharing subterms with other bindings via `Rc`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Binding {
    pub name: String,
    pub width: u32,
    pub term: Rc<Term>,
}

/// A parsed combinational module.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DesignModule {
    pub name: String,
    pub inputs: Vec<PortDecl>,
    pub outputs: Vec<PortDecl>,
    /// Topologically ordered (defs precede uses).
    pub bindings: Vec<Binding>,
    /// Output name -> defining signal name.
    pub output_map: BTreeMap<String, String>,
}

impl DesignModule {
    pub fn binding(&self, name: &str) -> Option<&Binding> {
        self.bindings.iter().find(|b| b.name == name)
    }

    pub fn input(&self, name: &str) -> Option<&PortDecl> {
        self.inputs.iter().find(|p| p.name == name)
    }

    /// Terms of the outputs, in declaration order.
    pub fn output_terms(&self) -> Vec<(String, Rc<Term>)> {
        self.outputs
            .iter()
            .filter_map(|o| {
                let sig = self.output_map.get(&o.name)?;
                let b = self.binding(sig)?;
                Some((o.name.clone(), b.term.clone()))
            })
            .collect()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum FrontendError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("arity error for '{op}' at {at:?}: {msg}")]
    Arity {
        op: String,
        at: (usize, usize),
        msg: String,
    },
    #[error("unsupported construct at {line}:{col}: {msg}")]
    Unsupported { line: usize, col: usize, msg: String },
    #[error("width inference error at {line}:{col}: {msg}")]
    WidthInference { line: usize, col: usize, msg: String },
}

impl FrontendError {
    fn syntax(at: (usize, usize), msg: String) -> Self {
        FrontendError::Syntax {
            line: at.0,
            col: at.1,
            msg,
        }
    }
}
