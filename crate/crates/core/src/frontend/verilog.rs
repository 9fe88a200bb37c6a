//! Parser for a combinational Verilog subset: ANSI module header, `wire`
//! declarations, `assign` statements, and the Table-1 operator set with
//! ternary, concatenation, replication, and constant bit/part selects.
//!
//! Width inference follows the context-determined rule: an operator's width
//! is the width of its largest operand including the assignment left-hand
//! side. A context is signed iff all its operands are signed; `$signed` /
//! `$unsigned` pin an individual operand's interpretation.

use super::{Binding, DesignModule, FrontendError, PortDecl};
use crate::ir::{Arg, Node, Op, Signage, Term};
use num_bigint::BigUint;
use num_traits::{Num, ToPrimitive};
use std::collections::BTreeMap;
use std::rc::Rc;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number {
        width: Option<u32>,
        signed: bool,
        value: BigUint,
    },
    Sym(&'static str),
}

struct Lexer {
    toks: Vec<(Tok, (usize, usize))>,
    pos: usize,
}

fn lex(text: &str) -> Result<Lexer, FrontendError> {
    let mut toks = Vec::new();
    let b = text.as_bytes();
    let mut i = 0;
    let mut line = 1;
    let mut col = 1;
    macro_rules! bump {
        ($n:expr) => {{
            for k in 0..$n {
                if b[i + k] == b'\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
            }
            i += $n;
        }};
    }
    while i < b.len() {
        let at = (line, col);
        let c = b[i];
        if !c.is_ascii() {
            return Err(FrontendError::syntax(at, "non-ASCII input".into()));
        }
        if c.is_ascii_whitespace() {
            bump!(1);
            continue;
        }
        if c == b'/' && i + 1 < b.len() && b[i + 1] == b'/' {
            while i < b.len() && b[i] != b'\n' {
                bump!(1);
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' || c == b'$' {
            let s = i;
            while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_' || b[i] == b'$') {
                bump!(1);
            }
            toks.push((Tok::Ident(text[s..i].to_string()), at));
            continue;
        }
        if c.is_ascii_digit() || c == b'\'' {
            // Optional size, then 'd/'b/'h/'o with optional s, else plain decimal.
            let s = i;
            while i < b.len() && b[i].is_ascii_digit() {
                bump!(1);
            }
            if i < b.len() && b[i] == b'\'' {
                let width = if s == i {
                    None
                } else {
                    Some(text[s..i].parse::<u32>().map_err(|_| {
                        FrontendError::syntax(at, "bad literal size".into())
                    })?)
                };
                bump!(1);
                let mut signed = false;
                if i < b.len() && (b[i] == b's' || b[i] == b'S') {
                    signed = true;
                    bump!(1);
                }
                if i >= b.len() {
                    return Err(FrontendError::syntax(at, "truncated literal".into()));
                }
                let radix = match b[i] {
                    b'd' | b'D' => 10,
                    b'b' | b'B' => 2,
                    b'h' | b'H' => 16,
                    b'o' | b'O' => 8,
                    _ => return Err(FrontendError::syntax(at, "bad literal base".into())),
                };
                bump!(1);
                let ds = i;
                while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_') {
                    bump!(1);
                }
                let digits: String = text[ds..i].chars().filter(|c| *c != '_').collect();
                let value = BigUint::from_str_radix(&digits, radix)
                    .map_err(|_| FrontendError::syntax(at, "bad literal digits".into()))?;
                toks.push((Tok::Number { width, signed, value }, at));
            } else {
                let value: BigUint = text[s..i]
                    .parse()
                    .map_err(|_| FrontendError::syntax(at, "bad integer".into()))?;
                toks.push((
                    Tok::Number {
                        width: None,
                        signed: false,
                        value,
                    },
                    at,
                ));
            }
            continue;
        }
        let two = if i + 1 < b.len() { &text[i..i + 2] } else { "" };
        let sym2 = ["<<", ">>", "==", "!=", "<=", ">=", "~&", "~|", "~^"]
            .iter()
            .find(|s| **s == two)
            .copied();
        if let Some(s) = sym2 {
            toks.push((Tok::Sym(s), at));
            bump!(2);
            continue;
        }
        let one = &text[i..i + 1];
        let sym1 = [
            "(", ")", "[", "]", "{", "}", ",", ";", ":", "?", "+", "-", "*", "&", "|", "^", "~",
            "=", "<", ">",
        ]
        .iter()
        .find(|s| **s == one)
        .copied();
        match sym1 {
            Some(s) => {
                toks.push((Tok::Sym(s), at));
                bump!(1);
            }
            None => {
                return Err(FrontendError::syntax(
                    at,
                    format!("unexpected character {:?}", c as char),
                ))
            }
        }
    }
    Ok(Lexer { toks, pos: 0 })
}

impl Lexer {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }
    fn at(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .map(|(_, p)| *p)
            .unwrap_or((0, 0))
    }
    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        self.pos += 1;
        t
    }
    fn eat_sym(&mut self, s: &str) -> bool {
        if let Some(Tok::Sym(t)) = self.peek() {
            if *t == s {
                self.pos += 1;
                return true;
            }
        }
        false
    }
    fn expect_sym(&mut self, s: &'static str) -> Result<(), FrontendError> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            Err(FrontendError::syntax(self.at(), format!("expected '{s}'")))
        }
    }
    fn expect_ident(&mut self) -> Result<String, FrontendError> {
        let at = self.at();
        match self.next() {
            Some(Tok::Ident(n)) => Ok(n),
            _ => Err(FrontendError::syntax(at, "expected identifier".into())),
        }
    }
    fn eat_kw(&mut self, kw: &str) -> bool {
        if let Some(Tok::Ident(n)) = self.peek() {
            if n == kw {
                self.pos += 1;
                return true;
            }
        }
        false
    }
}

#[derive(Debug, Clone)]
enum VExpr {
    Ref(String, (usize, usize)),
    Num {
        width: Option<u32>,
        signed: bool,
        value: BigUint,
    },
    Unary(&'static str, Box<VExpr>),
    Binary(&'static str, Box<VExpr>, Box<VExpr>),
    Ternary(Box<VExpr>, Box<VExpr>, Box<VExpr>),
    Concat(Vec<VExpr>),
    Select(String, u32, u32, (usize, usize)),
    Cast(bool, Box<VExpr>),
}

struct SigInfo {
    width: u32,
    signed: bool,
    is_input: bool,
    term: Option<Rc<Term>>,
}

struct Parser {
    lx: Lexer,
    sigs: BTreeMap<String, SigInfo>,
}

/// Parses a single module.
pub fn parse_verilog(text: &str) -> Result<DesignModule, FrontendError> {
    let lx = lex(text)?;
    let mut p = Parser {
        lx,
        sigs: BTreeMap::new(),
    };
    p.module()
}

impl Parser {
    fn module(&mut self) -> Result<DesignModule, FrontendError> {
        let at = self.lx.at();
        if !self.lx.eat_kw("module") {
            return Err(FrontendError::syntax(at, "expected 'module'".into()));
        }
        let name = self.lx.expect_ident()?;
        self.lx.expect_sym("(")?;
        let mut inputs = Vec::new();
        let mut outputs = Vec::new();
        loop {
            let at = self.lx.at();
            let is_input = if self.lx.eat_kw("input") {
                true
            } else if self.lx.eat_kw("output") {
                false
            } else {
                return Err(FrontendError::syntax(at, "expected input/output".into()));
            };
            let signed = self.lx.eat_kw("signed");
            self.lx.eat_kw("wire");
            let width = self.range()?;
            let pname = self.lx.expect_ident()?;
            let decl = PortDecl {
                name: pname.clone(),
                width,
                signed,
            };
            if self.sigs.contains_key(&pname) {
                return Err(FrontendError::syntax(at, format!("duplicate port {pname}")));
            }
            self.sigs.insert(
                pname.clone(),
                SigInfo {
                    width,
                    signed,
                    is_input,
                    term: if is_input {
                        Some(Rc::new(Term::Var(pname.clone())))
                    } else {
                        None
                    },
                },
            );
            if is_input {
                inputs.push(decl);
            } else {
                outputs.push(decl);
            }
            if self.lx.eat_sym(",") {
                continue;
            }
            self.lx.expect_sym(")")?;
            break;
        }
        self.lx.expect_sym(";")?;

        let mut bindings: Vec<Binding> = Vec::new();
        loop {
            let at = self.lx.at();
            if self.lx.eat_kw("endmodule") {
                break;
            } else if self.lx.eat_kw("wire") {
                let signed = self.lx.eat_kw("signed");
                let width = self.range()?;
                let wname = self.lx.expect_ident()?;
                if self.sigs.contains_key(&wname) {
                    return Err(FrontendError::syntax(at, format!("duplicate signal {wname}")));
                }
                self.sigs.insert(
                    wname,
                    SigInfo {
                        width,
                        signed,
                        is_input: false,
                        term: None,
                    },
                );
                self.lx.expect_sym(";")?;
            } else if self.lx.eat_kw("assign") {
                let lhs = self.lx.expect_ident()?;
                let info_at = self.lx.at();
                self.lx.expect_sym("=")?;
                let rhs = self.expr()?;
                self.lx.expect_sym(";")?;
                let (lw, bound) = match self.sigs.get(&lhs) {
                    None => {
                        return Err(FrontendError::syntax(
                            info_at,
                            format!("assignment to undeclared signal {lhs}"),
                        ))
                    }
                    Some(i) if i.is_input => {
                        return Err(FrontendError::syntax(
                            info_at,
                            format!("assignment to input {lhs}"),
                        ))
                    }
                    Some(i) => (i.width, i.term.is_some()),
                };
                if bound {
                    return Err(FrontendError::syntax(
                        info_at,
                        format!("signal {lhs} bound twice"),
                    ));
                }
                let term = self.bind_expr(&rhs, lw, info_at)?;
                self.sigs.get_mut(&lhs).unwrap().term = Some(term.clone());
                bindings.push(Binding {
                    name: lhs,
                    width: lw,
                    term,
                });
            } else if self.lx.eat_kw("always") || self.lx.eat_kw("reg") || self.lx.eat_kw("initial")
            {
                return Err(FrontendError::Unsupported {
                    line: at.0,
                    col: at.1,
                    msg: "only wire declarations and assign statements are supported".into(),
                });
            } else {
                return Err(FrontendError::syntax(at, "expected module item".into()));
            }
        }

        for o in &outputs {
            if self.sigs[&o.name].term.is_none() {
                return Err(FrontendError::WidthInference {
                    line: 0,
                    col: 0,
                    msg: format!("output {} never assigned", o.name),
                });
            }
        }
        let output_map = outputs
            .iter()
            .map(|o| (o.name.clone(), o.name.clone()))
            .collect();
        Ok(DesignModule {
            name,
            inputs,
            outputs,
            bindings,
            output_map,
        })
    }

    fn range(&mut self) -> Result<u32, FrontendError> {
        if !self.lx.eat_sym("[") {
            return Ok(1);
        }
        let at = self.lx.at();
        let hi = self.const_int()?;
        self.lx.expect_sym(":")?;
        let lo = self.const_int()?;
        self.lx.expect_sym("]")?;
        if lo != 0 {
            return Err(FrontendError::Unsupported {
                line: at.0,
                col: at.1,
                msg: "ranges must be [m:0]".into(),
            });
        }
        Ok(hi + 1)
    }

    fn const_int(&mut self) -> Result<u32, FrontendError> {
        let at = self.lx.at();
        match self.lx.next() {
            Some(Tok::Number { value, .. }) => value
                .to_u32()
                .ok_or_else(|| FrontendError::syntax(at, "index too large".into())),
            _ => Err(FrontendError::syntax(at, "expected integer".into())),
        }
    }

    // Precedence climbing, lowest first: ?: | ^ & ==,!= <,<=,>,>= <<,>> +,- * unary.
    fn expr(&mut self) -> Result<VExpr, FrontendError> {
        let c = self.or_expr()?;
        if self.lx.eat_sym("?") {
            let a = self.expr()?;
            self.lx.expect_sym(":")?;
            let b = self.expr()?;
            Ok(VExpr::Ternary(Box::new(c), Box::new(a), Box::new(b)))
        } else {
            Ok(c)
        }
    }

    fn or_expr(&mut self) -> Result<VExpr, FrontendError> {
        let mut e = self.xor_expr()?;
        while matches!(self.lx.peek(), Some(Tok::Sym("|"))) {
            self.lx.next();
            let r = self.xor_expr()?;
            e = VExpr::Binary("|", Box::new(e), Box::new(r));
        }
        Ok(e)
    }

    fn xor_expr(&mut self) -> Result<VExpr, FrontendError> {
        let mut e = self.and_expr()?;
        while matches!(self.lx.peek(), Some(Tok::Sym("^"))) {
            self.lx.next();
            let r = self.and_expr()?;
            e = VExpr::Binary("^", Box::new(e), Box::new(r));
        }
        Ok(e)
    }

    fn and_expr(&mut self) -> Result<VExpr, FrontendError> {
        let mut e = self.eq_expr()?;
        while matches!(self.lx.peek(), Some(Tok::Sym("&"))) {
            self.lx.next();
            let r = self.eq_expr()?;
            e = VExpr::Binary("&", Box::new(e), Box::new(r));
        }
        Ok(e)
    }

    fn eq_expr(&mut self) -> Result<VExpr, FrontendError> {
        let mut e = self.rel_expr()?;
        loop {
            let op = match self.lx.peek() {
                Some(Tok::Sym(s @ ("==" | "!="))) => *s,
                _ => break,
            };
            self.lx.next();
            let r = self.rel_expr()?;
            e = VExpr::Binary(op, Box::new(e), Box::new(r));
        }
        Ok(e)
    }

    fn rel_expr(&mut self) -> Result<VExpr, FrontendError> {
        let mut e = self.shift_expr()?;
        loop {
            let op = match self.lx.peek() {
                Some(Tok::Sym(s @ ("<" | "<=" | ">" | ">="))) => *s,
                _ => break,
            };
            self.lx.next();
            let r = self.shift_expr()?;
            e = VExpr::Binary(op, Box::new(e), Box::new(r));
        }
        Ok(e)
    }

    fn shift_expr(&mut self) -> Result<VExpr, FrontendError> {
        let mut e = self.add_expr()?;
        loop {
            let op = match self.lx.peek() {
                Some(Tok::Sym(s @ ("<<" | ">>"))) => *s,
                _ => break,
            };
            self.lx.next();
            let r = self.add_expr()?;
            e = VExpr::Binary(op, Box::new(e), Box::new(r));
        }
        Ok(e)
    }

    fn add_expr(&mut self) -> Result<VExpr, FrontendError> {
        let mut e = self.mul_expr()?;
        loop {
            let op = match self.lx.peek() {
                Some(Tok::Sym(s @ ("+" | "-"))) => *s,
                _ => break,
            };
            self.lx.next();
            let r = self.mul_expr()?;
            e = VExpr::Binary(op, Box::new(e), Box::new(r));
        }
        Ok(e)
    }

    fn mul_expr(&mut self) -> Result<VExpr, FrontendError> {
        let mut e = self.unary_expr()?;
        while matches!(self.lx.peek(), Some(Tok::Sym("*"))) {
            self.lx.next();
            let r = self.unary_expr()?;
            e = VExpr::Binary("*", Box::new(e), Box::new(r));
        }
        Ok(e)
    }

    fn unary_expr(&mut self) -> Result<VExpr, FrontendError> {
        for op in ["~&", "~|", "~^", "~", "-", "&", "|", "^"] {
            if matches!(self.lx.peek(), Some(Tok::Sym(s)) if *s == op) {
                self.lx.next();
                let e = self.unary_expr()?;
                return Ok(VExpr::Unary(
                    match op {
                        "~&" => "~&",
                        "~|" => "~|",
                        "~^" => "~^",
                        "~" => "~",
                        "-" => "neg",
                        "&" => "red&",
                        "|" => "red|",
                        _ => "red^",
                    },
                    Box::new(e),
                ));
            }
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<VExpr, FrontendError> {
        let at = self.lx.at();
        match self.lx.peek().cloned() {
            Some(Tok::Sym("(")) => {
                self.lx.next();
                let e = self.expr()?;
                self.lx.expect_sym(")")?;
                Ok(e)
            }
            Some(Tok::Sym("{")) => {
                self.lx.next();
                // Replication {n{e}} or concatenation {a, b, ...}.
                if let Some(Tok::Number { value, width: None, .. }) = self.lx.peek().cloned() {
                    let save = self.lx.pos;
                    self.lx.next();
                    if self.lx.eat_sym("{") {
                        let n = value
                            .to_u32()
                            .ok_or_else(|| FrontendError::syntax(at, "bad repetition".into()))?;
                        if n == 0 {
                            return Err(FrontendError::syntax(at, "zero repetition".into()));
                        }
                        let e = self.expr()?;
                        self.lx.expect_sym("}")?;
                        self.lx.expect_sym("}")?;
                        let parts = vec![e; n as usize];
                        return Ok(if parts.len() == 1 {
                            parts.into_iter().next().unwrap()
                        } else {
                            VExpr::Concat(parts)
                        });
                    }
                    self.lx.pos = save;
                }
                let mut parts = vec![self.expr()?];
                while self.lx.eat_sym(",") {
                    parts.push(self.expr()?);
                }
                self.lx.expect_sym("}")?;
                Ok(if parts.len() == 1 {
                    parts.into_iter().next().unwrap()
                } else {
                    VExpr::Concat(parts)
                })
            }
            Some(Tok::Ident(name)) if name == "$signed" || name == "$unsigned" => {
                self.lx.next();
                self.lx.expect_sym("(")?;
                let e = self.expr()?;
                self.lx.expect_sym(")")?;
                match &e {
                    VExpr::Ref(..) | VExpr::Select(..) | VExpr::Num { .. } => {}
                    _ => {
                        return Err(FrontendError::Unsupported {
                            line: at.0,
                            col: at.1,
                            msg: "casts are supported on signals, selects and literals only".into(),
                        })
                    }
                }
                Ok(VExpr::Cast(name == "$signed", Box::new(e)))
            }
            Some(Tok::Ident(name)) => {
                self.lx.next();
                if self.lx.eat_sym("[") {
                    let hi = self.const_int()?;
                    let lo = if self.lx.eat_sym(":") {
                        self.const_int()?
                    } else {
                        hi
                    };
                    self.lx.expect_sym("]")?;
                    if lo > hi {
                        return Err(FrontendError::syntax(at, "reversed part select".into()));
                    }
                    Ok(VExpr::Select(name, hi, lo, at))
                } else {
                    Ok(VExpr::Ref(name, at))
                }
            }
            Some(Tok::Number { width, signed, value }) => {
                self.lx.next();
                Ok(VExpr::Num { width, signed, value })
            }
            _ => Err(FrontendError::syntax(at, "expected expression".into())),
        }
    }

    fn sig(&self, name: &str, at: (usize, usize)) -> Result<&SigInfo, FrontendError> {
        self.sigs
            .get(name)
            .ok_or_else(|| FrontendError::syntax(at, format!("unknown signal {name}")))
    }

    fn self_size(&self, e: &VExpr) -> Result<u32, FrontendError> {
        Ok(match e {
            VExpr::Ref(n, at) => self.sig(n, *at)?.width,
            VExpr::Num { width, value, .. } => {
                width.unwrap_or_else(|| (value.bits() as u32).max(1))
            }
            VExpr::Unary("neg" | "~", a) => self.self_size(a)?,
            VExpr::Unary(_, _) => 1,
            VExpr::Binary(op, l, r) => match *op {
                "+" | "-" | "*" | "&" | "|" | "^" => self.self_size(l)?.max(self.self_size(r)?),
                "<<" | ">>" => self.self_size(l)?,
                _ => 1,
            },
            VExpr::Ternary(_, a, b) => self.self_size(a)?.max(self.self_size(b)?),
            VExpr::Concat(parts) => {
                let mut s = 0;
                for p in parts {
                    s += self.self_size(p)?;
                }
                s
            }
            VExpr::Select(_, hi, lo, _) => hi - lo + 1,
            VExpr::Cast(_, a) => self.self_size(a)?,
        })
    }

    fn self_signed(&self, e: &VExpr) -> Result<bool, FrontendError> {
        Ok(match e {
            VExpr::Ref(n, at) => self.sig(n, *at)?.signed,
            VExpr::Num { signed, .. } => *signed,
            VExpr::Unary("neg" | "~", a) => self.self_signed(a)?,
            VExpr::Unary(_, _) => false,
            VExpr::Binary(op, l, r) => match *op {
                "+" | "-" | "*" | "&" | "|" | "^" => {
                    self.self_signed(l)? && self.self_signed(r)?
                }
                "<<" | ">>" => self.self_signed(l)?,
                _ => false,
            },
            VExpr::Ternary(_, a, b) => self.self_signed(a)? && self.self_signed(b)?,
            VExpr::Concat(_) | VExpr::Select(..) => false,
            VExpr::Cast(s, _) => *s,
        })
    }

    /// Builds a binding's term at the declared width, inserting explicit
    /// truncation or sign-extension wrappers where the assignment width rule
    /// requires them.
    fn bind_expr(
        &mut self,
        rhs: &VExpr,
        lhs_width: u32,
        at: (usize, usize),
    ) -> Result<Rc<Term>, FrontendError> {
        let self_w = self.self_size(rhs)?;
        let eff = self.self_signed(rhs)?;
        let ctx = self_w.max(lhs_width);
        let (term, aw, asig) = self.build(rhs, ctx, eff)?;
        // Nested operators produce terms at the context width already; bare
        // references, literals, selects and concats may need adjustment.
        if aw == lhs_width || (aw < lhs_width && asig == Signage::Unsign) {
            Ok(term)
        } else {
            // Truncation (aw > lhs) or signed widening: both are exactly a
            // slice of the converted value.
            let _ = at;
            Ok(Rc::new(Term::Node(Node {
                op: Op::Slice {
                    hi: lhs_width - 1,
                    lo: 0,
                },
                width: lhs_width.into(),
                args: vec![Arg {
                    width: aw.into(),
                    signage: asig.into(),
                    term,
                }],
            })))
        }
    }

    /// Returns (term, annotation width, annotation signage) for consumption
    /// by the enclosing context.
    fn build(
        &mut self,
        e: &VExpr,
        ctx_w: u32,
        eff: bool,
    ) -> Result<(Rc<Term>, u32, Signage), FrontendError> {
        let sig_of = |eff: bool| if eff { Signage::Sign } else { Signage::Unsign };
        match e {
            VExpr::Ref(n, at) => {
                let info = self.sig(n, *at)?;
                let term = info.term.clone().ok_or_else(|| {
                    FrontendError::syntax(*at, format!("use of {n} before definition"))
                })?;
                Ok((term, info.width, sig_of(eff && info.signed)))
            }
            VExpr::Num { width, signed, value } => {
                let w = width.unwrap_or_else(|| (value.bits() as u32).max(1));
                Ok((
                    Rc::new(Term::Const(value.clone())),
                    w,
                    sig_of(eff && *signed),
                ))
            }
            VExpr::Cast(s, inner) => {
                let (term, aw, _) = self.build(inner, ctx_w, *s)?;
                Ok((term, aw, sig_of(*s)))
            }
            VExpr::Unary(op, a) => match *op {
                "neg" | "~" => {
                    let (t, aw, asig) = self.build(a, ctx_w, eff)?;
                    let node = Term::node(
                        if *op == "neg" { Op::Neg } else { Op::Not },
                        ctx_w,
                        vec![Arg {
                            width: aw.into(),
                            signage: asig.into(),
                            term: t,
                        }],
                    );
                    Ok((Rc::new(node), ctx_w, sig_of(eff)))
                }
                _ => {
                    let sw = self.self_size(a)?;
                    let (t, aw, asig) = self.build(a, sw, false)?;
                    let rop = match *op {
                        "red&" => Op::ReduceAnd,
                        "red|" => Op::ReduceOr,
                        "red^" => Op::ReduceXor,
                        "~&" => Op::ReduceNand,
                        "~|" => Op::ReduceNor,
                        _ => Op::ReduceXnor,
                    };
                    let node = Term::node(
                        rop,
                        1u32,
                        vec![Arg {
                            width: aw.into(),
                            signage: asig.into(),
                            term: t,
                        }],
                    );
                    Ok((Rc::new(node), 1, Signage::Unsign))
                }
            },
            VExpr::Binary(op, l, r) => {
                match *op {
                    "+" | "-" | "*" | "&" | "|" | "^" => {
                        let (lt, lw, ls) = self.build(l, ctx_w, eff)?;
                        let (rt, rw, rs) = self.build(r, ctx_w, eff)?;
                        let o = match *op {
                            "+" => Op::Add,
                            "-" => Op::Sub,
                            "*" => Op::Mul,
                            "&" => Op::And,
                            "|" => Op::Or,
                            _ => Op::Xor,
                        };
                        let node = Term::node(
                            o,
                            ctx_w,
                            vec![
                                Arg { width: lw.into(), signage: ls.into(), term: lt },
                                Arg { width: rw.into(), signage: rs.into(), term: rt },
                            ],
                        );
                        Ok((Rc::new(node), ctx_w, sig_of(eff)))
                    }
                    "<<" | ">>" => {
                        let (lt, lw, ls) = self.build(l, ctx_w, eff)?;
                        let rw_self = self.self_size(r)?;
                        let (rt, rw, rs) = self.build(r, rw_self, false)?;
                        let node = Term::node(
                            if *op == "<<" { Op::Shl } else { Op::Shr },
                            ctx_w,
                            vec![
                                Arg { width: lw.into(), signage: ls.into(), term: lt },
                                Arg { width: rw.into(), signage: rs.into(), term: rt },
                            ],
                        );
                        Ok((Rc::new(node), ctx_w, sig_of(eff)))
                    }
                    _ => {
                        // Comparisons form their own context.
                        let w = self.self_size(l)?.max(self.self_size(r)?);
                        let s = self.self_signed(l)? && self.self_signed(r)?;
                        let (lt, lw, ls) = self.build(l, w, s)?;
                        let (rt, rw, rs) = self.build(r, w, s)?;
                        let o = match *op {
                            "==" => Op::Eq,
                            "!=" => Op::Ne,
                            "<" => Op::Lt,
                            "<=" => Op::Le,
                            ">" => Op::Gt,
                            _ => Op::Ge,
                        };
                        let node = Term::node(
                            o,
                            1u32,
                            vec![
                                Arg { width: lw.into(), signage: ls.into(), term: lt },
                                Arg { width: rw.into(), signage: rs.into(), term: rt },
                            ],
                        );
                        Ok((Rc::new(node), 1, Signage::Unsign))
                    }
                }
            }
            VExpr::Ternary(c, a, b) => {
                let cw = self.self_size(c)?;
                let (ct, caw, cas) = self.build(c, cw, false)?;
                let (at_, aw, asig) = self.build(a, ctx_w, eff)?;
                let (bt, bw, bs) = self.build(b, ctx_w, eff)?;
                let node = Term::node(
                    Op::Mux,
                    ctx_w,
                    vec![
                        Arg { width: caw.into(), signage: cas.into(), term: ct },
                        Arg { width: aw.into(), signage: asig.into(), term: at_ },
                        Arg { width: bw.into(), signage: bs.into(), term: bt },
                    ],
                );
                Ok((Rc::new(node), ctx_w, sig_of(eff)))
            }
            VExpr::Concat(parts) => {
                let mut args = Vec::with_capacity(parts.len());
                let mut total = 0;
                for p in parts {
                    let pw = self.self_size(p)?;
                    total += pw;
                    let (t, aw, asig) = self.build(p, pw, false)?;
                    args.push(Arg {
                        width: aw.into(),
                        signage: asig.into(),
                        term: t,
                    });
                }
                let node = Term::node(Op::Concat, total, args);
                Ok((Rc::new(node), total, Signage::Unsign))
            }
            VExpr::Select(name, hi, lo, at) => {
                let info = self.sig(name, *at)?;
                if *hi >= info.width {
                    return Err(FrontendError::WidthInference {
                        line: at.0,
                        col: at.1,
                        msg: format!("select [{hi}:{lo}] exceeds width of {name}"),
                    });
                }
                let iw = info.width;
                let term = info.term.clone().ok_or_else(|| {
                    FrontendError::syntax(*at, format!("use of {name} before definition"))
                })?;
                let node = Term::node(
                    Op::Slice { hi: *hi, lo: *lo },
                    hi - lo + 1,
                    vec![Arg {
                        width: iw.into(),
                        signage: Signage::Unsign.into(),
                        term,
                    }],
                );
                Ok((Rc::new(node), hi - lo + 1, Signage::Unsign))
            }
        }
    }
}
