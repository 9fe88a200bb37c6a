//! Text format for typed terms: parenthesized S-expressions
//! `(op width [width signage term]...)`, ASCII, whitespace-insensitive.
//! Width and signage positions may hold variables, which makes the same
//! syntax serve for rewrite patterns.

use super::FrontendError;
use crate::ir::{Arg, Op, SignSpec, Signage, Term, WidthSpec};
use num_bigint::BigUint;

#[derive(Debug)]
enum Sexp {
    Atom(String, usize),
    List(Vec<Sexp>, usize),
}

fn tokenize(text: &str) -> Result<Vec<(String, usize)>, FrontendError> {
    let mut toks = Vec::new();
    let mut cur = String::new();
    let mut start = 0;
    for (i, ch) in text.char_indices() {
        if !ch.is_ascii() && ch != '×' {
            return Err(FrontendError::syntax(
                line_col(text, i),
                format!("non-ASCII character {ch:?}"),
            ));
        }
        match ch {
            '(' | ')' => {
                if !cur.is_empty() {
                    toks.push((std::mem::take(&mut cur), start));
                }
                toks.push((ch.to_string(), i));
            }
            c if c.is_whitespace() => {
                if !cur.is_empty() {
                    toks.push((std::mem::take(&mut cur), start));
                }
            }
            c => {
                if cur.is_empty() {
                    start = i;
                }
                cur.push(c);
            }
        }
    }
    if !cur.is_empty() {
        toks.push((cur, start));
    }
    Ok(toks)
}

fn line_col(text: &str, byte: usize) -> (usize, usize) {
    let mut line = 1;
    let mut col = 1;
    for (i, ch) in text.char_indices() {
        if i >= byte {
            break;
        }
        if ch == '\n' {
            line += 1;
            col = 1;
        } else {
            col += 1;
        }
    }
    (line, col)
}

fn parse_sexp(text: &str) -> Result<Sexp, FrontendError> {
    let toks = tokenize(text)?;
    let mut pos = 0;
    let e = parse_one(text, &toks, &mut pos)?;
    if pos != toks.len() {
        return Err(FrontendError::syntax(
            line_col(text, toks[pos].1),
            "trailing tokens after term".into(),
        ));
    }
    Ok(e)
}

fn parse_one(text: &str, toks: &[(String, usize)], pos: &mut usize) -> Result<Sexp, FrontendError> {
    let (tok, at) = toks
        .get(*pos)
        .ok_or_else(|| FrontendError::syntax((0, 0), "unexpected end of input".into()))?;
    *pos += 1;
    match tok.as_str() {
        "(" => {
            let mut items = Vec::new();
            loop {
                match toks.get(*pos) {
                    None => {
                        return Err(FrontendError::syntax(
                            line_col(text, *at),
                            "unclosed parenthesis".into(),
                        ))
                    }
                    Some((t, _)) if t == ")" => {
                        *pos += 1;
                        return Ok(Sexp::List(items, *at));
                    }
                    _ => items.push(parse_one(text, toks, pos)?),
                }
            }
        }
        ")" => Err(FrontendError::syntax(
            line_col(text, *at),
            "unexpected ')'".into(),
        )),
        _ => Ok(Sexp::Atom(tok.clone(), *at)),
    }
}

fn is_int(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit())
}

fn op_from_token(tok: &str, arity: usize) -> Option<Op> {
    Some(match (tok, arity) {
        ("+", 2) => Op::Add,
        ("-", 2) => Op::Sub,
        ("-", 1) | ("neg", 1) => Op::Neg,
        ("*", 2) | ("×", 2) => Op::Mul,
        ("&", 1) => Op::ReduceAnd,
        ("|", 1) => Op::ReduceOr,
        ("^", 1) => Op::ReduceXor,
        ("~&", 1) => Op::ReduceNand,
        ("~|", 1) => Op::ReduceNor,
        ("~^", 1) => Op::ReduceXnor,
        ("&", 2) => Op::And,
        ("|", 2) => Op::Or,
        ("^", 2) => Op::Xor,
        ("~", 1) => Op::Not,
        ("<<", 2) => Op::Shl,
        (">>", 2) => Op::Shr,
        ("mux", 3) => Op::Mux,
        ("==", 2) => Op::Eq,
        ("!=", 2) => Op::Ne,
        ("<", 2) => Op::Lt,
        ("<=", 2) => Op::Le,
        (">", 2) => Op::Gt,
        (">=", 2) => Op::Ge,
        ("SUM", n) if n >= 2 => Op::Sum,
        ("FMA", 3) => Op::Fma,
        ("MUXAR", 3) => Op::Muxar,
        ("concat", n) if n >= 2 => Op::Concat,
        _ => {
            if let Some(rest) = tok.strip_prefix("slice[") {
                let body = rest.strip_suffix(']')?;
                let (hi, lo) = body.split_once(':')?;
                if arity == 1 && is_int(hi) && is_int(lo) {
                    return Some(Op::Slice {
                        hi: hi.parse().ok()?,
                        lo: lo.parse().ok()?,
                    });
                }
            }
            return None;
        }
    })
}

fn width_spec(tok: &str) -> WidthSpec {
    if is_int(tok) {
        WidthSpec::Lit(tok.parse().unwrap_or(u32::MAX))
    } else {
        WidthSpec::Var(tok.to_string())
    }
}

fn sign_spec(tok: &str) -> SignSpec {
    match tok {
        "unsign" => SignSpec::Lit(Signage::Unsign),
        "sign" => SignSpec::Lit(Signage::Sign),
        _ => SignSpec::Var(tok.to_string()),
    }
}

fn term_of_sexp(text: &str, e: &Sexp) -> Result<Term, FrontendError> {
    match e {
        Sexp::Atom(a, at) => {
            if is_int(a) {
                Ok(Term::Const(a.parse::<BigUint>().map_err(|_| {
                    FrontendError::syntax(line_col(text, *at), "bad integer".into())
                })?))
            } else if let Some(v) = a.strip_prefix('#') {
                Ok(Term::ConstVar(v.to_string()))
            } else {
                Ok(Term::Var(a.clone()))
            }
        }
        Sexp::List(items, at) => {
            let lc = line_col(text, *at);
            if items.len() < 2 {
                return Err(FrontendError::syntax(lc, "term needs op and width".into()));
            }
            let op_tok = match &items[0] {
                Sexp::Atom(a, _) => a.clone(),
                Sexp::List(_, at) => {
                    return Err(FrontendError::syntax(
                        line_col(text, *at),
                        "operator must be an atom".into(),
                    ))
                }
            };
            let width = match &items[1] {
                Sexp::Atom(a, _) => width_spec(a),
                Sexp::List(_, at) => {
                    return Err(FrontendError::syntax(
                        line_col(text, *at),
                        "width must be an atom".into(),
                    ))
                }
            };
            let rest = &items[2..];
            if rest.len() % 3 != 0 {
                return Err(FrontendError::Arity {
                    op: op_tok,
                    at: lc,
                    msg: "operands must come as width signage term triples".into(),
                });
            }
            let arity = rest.len() / 3;
            let op = op_from_token(&op_tok, arity).ok_or_else(|| FrontendError::Arity {
                op: op_tok.clone(),
                at: lc,
                msg: format!("unknown operator or wrong arity {arity}"),
            })?;
            let mut args = Vec::with_capacity(arity);
            for chunk in rest.chunks(3) {
                let w = match &chunk[0] {
                    Sexp::Atom(a, _) => width_spec(a),
                    Sexp::List(_, at) => {
                        return Err(FrontendError::syntax(
                            line_col(text, *at),
                            "operand width must be an atom".into(),
                        ))
                    }
                };
                let s = match &chunk[1] {
                    Sexp::Atom(a, _) => sign_spec(a),
                    Sexp::List(_, at) => {
                        return Err(FrontendError::syntax(
                            line_col(text, *at),
                            "operand signage must be an atom".into(),
                        ))
                    }
                };
                let t = term_of_sexp(text, &chunk[2])?;
                args.push(Arg {
                    width: w,
                    signage: s,
                    term: t.into(),
                });
            }
            Ok(Term::Node(crate::ir::Node { op, width, args }))
        }
    }
}

/// Parses the `.vlng` text format into a term (possibly with pattern
/// variables in width/signage positions).
pub fn parse_vlng(text: &str) -> Result<Term, FrontendError> {
    let e = parse_sexp(text)?;
    term_of_sexp(text, &e)
}

fn width_text(w: &WidthSpec) -> String {
    match w {
        WidthSpec::Lit(v) => v.to_string(),
        WidthSpec::Var(v) => v.clone(),
    }
}

fn sign_text(s: &SignSpec) -> String {
    match s {
        SignSpec::Lit(v) => v.to_string(),
        SignSpec::Var(v) => v.clone(),
    }
}

/// Canonical printing; `parse_vlng(print_vlng(t)) == t`.
pub fn print_vlng(t: &Term) -> String {
    match t {
        Term::Var(n) => n.clone(),
        Term::Const(c) => c.to_string(),
        Term::ConstVar(n) => format!("#{n}"),
        Term::Node(n) => {
            let mut s = format!("({} {}", n.op.token(), width_text(&n.width));
            for a in &n.args {
                s.push_str(&format!(
                    " {} {} {}",
                    width_text(&a.width),
                    sign_text(&a.signage),
                    print_vlng(&a.term)
                ));
            }
            s.push(')');
            s
        }
    }
}
