//! Typed term IR for combinational datapath expressions.
//!
//! Every operator application carries an output width and, per operand, a
//! (width, signage) annotation describing how the operand's raw bits are
//! interpreted before the operator's integer semantics apply. Widths and
//! signages may be pattern variables; only fully-literal ("concrete") terms
//! are evaluable or printable as Verilog.

mod compiled;
mod equiv;
mod eval;

pub use compiled::Program;
pub use equiv::{equivalent_bounded, equivalent_bounded_budget, DEFAULT_INPUT_BIT_BUDGET};
pub use eval::{eval_term, residue, residue_i128};

use num_bigint::BigUint;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::rc::Rc;

/// Signed/unsigned interpretation tag for an operand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum Signage {
    Unsign,
    Sign,
}

impl fmt::Display for Signage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Signage::Unsign => write!(f, "unsign"),
            Signage::Sign => write!(f, "sign"),
        }
    }
}

/// A width position: a literal bit count (>= 1) or a pattern variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum WidthSpec {
    Lit(u32),
    Var(String),
}

impl WidthSpec {
    pub fn lit(&self) -> Option<u32> {
        match self {
            WidthSpec::Lit(w) => Some(*w),
            WidthSpec::Var(_) => None,
        }
    }
}

impl From<u32> for WidthSpec {
    fn from(w: u32) -> Self {
        WidthSpec::Lit(w)
    }
}

/// A signage position: literal or pattern variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SignSpec {
    Lit(Signage),
    Var(String),
}

impl SignSpec {
    pub fn lit(&self) -> Option<Signage> {
        match self {
            SignSpec::Lit(s) => Some(*s),
            SignSpec::Var(_) => None,
        }
    }
}

impl From<Signage> for SignSpec {
    fn from(s: Signage) -> Self {
        SignSpec::Lit(s)
    }
}

/// Operator set: the Verilog-translatable core plus the merging operators
/// (`SUM`, `FMA`, `MUXAR`) and `slice`, which carries its two constant bit
/// indices in the node itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Op {
    Add,
    Sub,
    Neg,
    Mul,
    ReduceAnd,
    ReduceOr,
    ReduceXor,
    ReduceNand,
    ReduceNor,
    ReduceXnor,
    Shl,
    Shr,
    Mux,
    Concat,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Not,
    And,
    Or,
    Xor,
    Slice { hi: u32, lo: u32 },
    Sum,
    Fma,
    Muxar,
}

/// Operator arity contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arity {
    Exact(usize),
    AtLeast(usize),
}

impl Arity {
    pub fn accepts(&self, n: usize) -> bool {
        match self {
            Arity::Exact(k) => n == *k,
            Arity::AtLeast(k) => n >= *k,
        }
    }
}

impl Op {
    pub fn arity(&self) -> Arity {
        use Op::*;
        match self {
            Neg | Not | ReduceAnd | ReduceOr | ReduceXor | ReduceNand | ReduceNor
            | ReduceXnor | Slice { .. } => Arity::Exact(1),
            Add | Sub | Mul | Shl | Shr | Eq | Ne | Lt | Le | Gt | Ge | And | Or | Xor => {
                Arity::Exact(2)
            }
            Mux | Fma | Muxar => Arity::Exact(3),
            Concat | Sum => Arity::AtLeast(2),
        }
    }

    /// Canonical ASCII spelling used by the `.vlng` text format.
    pub fn token(&self) -> String {
        use Op::*;
        match self {
            Add => "+".into(),
            Sub | Neg => "-".into(),
            Mul => "*".into(),
            ReduceAnd | And => "&".into(),
            ReduceOr | Or => "|".into(),
            ReduceXor | Xor => "^".into(),
            ReduceNand => "~&".into(),
            ReduceNor => "~|".into(),
            ReduceXnor => "~^".into(),
            Shl => "<<".into(),
            Shr => ">>".into(),
            Mux => "mux".into(),
            Concat => "concat".into(),
            Eq => "==".into(),
            Ne => "!=".into(),
            Lt => "<".into(),
            Le => "<=".into(),
            Gt => ">".into(),
            Ge => ">=".into(),
            Not => "~".into(),
            Slice { hi, lo } => format!("slice[{hi}:{lo}]"),
            Sum => "SUM".into(),
            Fma => "FMA".into(),
            Muxar => "MUXAR".into(),
        }
    }

    /// Zero-gate wiring operators under the cost model.
    pub fn is_wiring(&self) -> bool {
        matches!(self, Op::Concat | Op::Slice { .. })
    }
}

/// Operand slot: interpretation annotation plus the operand term.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Arg {
    pub width: WidthSpec,
    pub signage: SignSpec,
    pub term: Rc<Term>,
}

impl Arg {
    pub fn new(width: impl Into<WidthSpec>, signage: impl Into<SignSpec>, term: Term) -> Self {
        Arg {
            width: width.into(),
            signage: signage.into(),
            term: Rc::new(term),
        }
    }

    pub fn shared(width: impl Into<WidthSpec>, signage: impl Into<SignSpec>, term: Rc<Term>) -> Self {
        Arg {
            width: width.into(),
            signage: signage.into(),
            term,
        }
    }
}

/// Operator application node.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Node {
    pub op: Op,
    pub width: WidthSpec,
    pub args: Vec<Arg>,
}

/// A term: input variable, non-negative constant, constant wildcard (patterns
/// only), or operator node.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    Const(BigUint),
    /// Pattern leaf matching any e-class known to be constant. Never concrete.
    ConstVar(String),
    Node(Node),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    pub fn constant(v: u64) -> Term {
        Term::Const(BigUint::from(v))
    }

    pub fn node(op: Op, width: impl Into<WidthSpec>, args: Vec<Arg>) -> Term {
        Term::Node(Node {
            op,
            width: width.into(),
            args,
        })
    }

    pub fn as_node(&self) -> Option<&Node> {
        match self {
            Term::Node(n) => Some(n),
            _ => None,
        }
    }

    /// True iff every width/signage in the term is a literal and no constant
    /// wildcards appear.
    pub fn is_concrete(&self) -> bool {
        match self {
            Term::Var(_) | Term::Const(_) => true,
            Term::ConstVar(_) => false,
            Term::Node(n) => {
                n.width.lit().is_some()
                    && n.args.iter().all(|a| {
                        a.width.lit().is_some()
                            && a.signage.lit().is_some()
                            && a.term.is_concrete()
                    })
            }
        }
    }

    /// Free term variables (input signals in concrete terms, term-pattern
    /// variables in rewrite patterns).
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(n) => {
                out.insert(n.clone());
            }
            Term::Const(_) | Term::ConstVar(_) => {}
            Term::Node(n) => {
                for a in &n.args {
                    a.term.collect_vars(out);
                }
            }
        }
    }

    /// Width and signage pattern variables, in name order.
    pub fn type_vars(&self) -> (BTreeSet<String>, BTreeSet<String>) {
        let mut w = BTreeSet::new();
        let mut s = BTreeSet::new();
        self.collect_type_vars(&mut w, &mut s);
        (w, s)
    }

    fn collect_type_vars(&self, w: &mut BTreeSet<String>, s: &mut BTreeSet<String>) {
        if let Term::Node(n) = self {
            if let WidthSpec::Var(v) = &n.width {
                w.insert(v.clone());
            }
            for a in &n.args {
                if let WidthSpec::Var(v) = &a.width {
                    w.insert(v.clone());
                }
                if let SignSpec::Var(v) = &a.signage {
                    s.insert(v.clone());
                }
                a.term.collect_type_vars(w, s);
            }
        }
    }

    /// Enumeration width per free variable: the widest annotation at which
    /// the variable is consumed. Errors if a variable is consumed at no
    /// concrete width (bare root variable).
    pub fn var_widths(&self, out: &mut BTreeMap<String, u32>) -> Result<(), IrError> {
        if let Term::Node(n) = self {
            for a in &n.args {
                if let Term::Var(name) = a.term.as_ref() {
                    let w = a
                        .width
                        .lit()
                        .ok_or_else(|| IrError::NonConcrete(name.clone()))?;
                    let e = out.entry(name.clone()).or_insert(w);
                    if w > *e {
                        *e = w;
                    }
                }
                a.term.var_widths(out)?;
            }
        }
        Ok(())
    }

    /// Number of operator nodes (tree count, shared subterms counted once
    /// per distinct `Rc` is not attempted; plain structural count).
    pub fn node_count(&self) -> usize {
        match self {
            Term::Node(n) => 1 + n.args.iter().map(|a| a.term.node_count()).sum::<usize>(),
            _ => 0,
        }
    }
}

/// Input assignment: variable name to raw bits.
pub type Env = BTreeMap<String, BigUint>;

#[derive(Debug, thiserror::Error)]
pub enum IrError {
    #[error("term is not concrete: {0}")]
    NonConcrete(String),
    #[error("unbound variable {0}")]
    UnboundVar(String),
    #[error("operator {op} applied to {got} operands")]
    BadArity { op: String, got: usize },
    #[error("unsupported operator {0}")]
    UnsupportedOperator(String),
    #[error("input space of {bits} bits exceeds exhaustive budget of {budget}")]
    BudgetExceeded { bits: u64, budget: u64 },
    #[error("width must be >= 1")]
    ZeroWidth,
}

#[cfg(test)]
mod tests;
