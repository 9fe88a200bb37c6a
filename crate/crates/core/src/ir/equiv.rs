//! Bounded exhaustive equivalence: the oracle standing in for an external
//! equivalence checker. Two concrete terms are equivalent iff `eval_term`
//! agrees on every assignment of their free variables.

use super::compiled::slow_equiv;
use super::{Env, IrError, Program, Term};
use std::collections::BTreeMap;

/// Total input bits an exhaustive check may enumerate by default (~16M
/// evaluations).
pub const DEFAULT_INPUT_BIT_BUDGET: u64 = 24;

/// `equivalent_bounded` with the default budget.
pub fn equivalent_bounded(t1: &Term, t2: &Term) -> Result<Option<Env>, IrError> {
    equivalent_bounded_budget(t1, t2, DEFAULT_INPUT_BIT_BUDGET)
}

/// Exhaustively enumerates all assignments over the union of both terms'
/// free variables. Each variable ranges over `[0, 2^w)` where `w` is the
/// widest annotation at which the variable is consumed in either term.
/// Returns `Ok(None)` on equivalence, `Ok(Some(env))` with the first
/// counterexample otherwise.
pub fn equivalent_bounded_budget(
    t1: &Term,
    t2: &Term,
    budget: u64,
) -> Result<Option<Env>, IrError> {
    let vars = shared_inputs(t1, t2)?;
    let bits: u64 = vars.iter().map(|(_, w)| *w as u64).sum();
    if bits > budget {
        return Err(IrError::BudgetExceeded { bits, budget });
    }
    match Program::compile(&[t1, t2], &vars) {
        Some(p) => Ok(p.enumerate_equiv()),
        None => Ok(slow_equiv(t1, t2, &vars)),
    }
}

/// Name-sorted enumeration variables with their widths.
pub(crate) fn shared_inputs(t1: &Term, t2: &Term) -> Result<Vec<(String, u32)>, IrError> {
    let mut vw: BTreeMap<String, u32> = BTreeMap::new();
    t1.var_widths(&mut vw)?;
    t2.var_widths(&mut vw)?;
    let mut names = t1.free_vars();
    names.extend(t2.free_vars());
    for n in &names {
        if !vw.contains_key(n) {
            // A variable appearing only as a bare root carries no consuming
            // annotation in either term; there is no width to enumerate.
            return Err(IrError::NonConcrete(format!(
                "variable {n} is never consumed at a concrete width"
            )));
        }
    }
    Ok(vw.into_iter().collect())
}
