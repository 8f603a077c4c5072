//! A small arithmetic expression language for majorant functions and kernels.
//!
//! Grammar (whitespace is insignificant, identifiers are case-sensitive):
//!
//! ```text
//! expr    = term { ("+" | "-") term } ;
//! term    = unary { ("*" | "/") unary } ;
//! unary   = "-" unary | power ;
//! power   = primary [ "^" unary ] ;          (* right-associative *)
//! primary = number | ident | func "(" expr ")" | "(" expr ")" ;
//! func    = "sin" | "cos" | "tan" | "exp" | "log" | "sqrt" | "abs" ;
//! number  = digits [ "." digits ] [ ("e" | "E") [ "+" | "-" ] digits ] ;
//! ```
//!
//! `^` binds tighter than unary minus, so `-t^2` is `-(t^2)`.
//! Error offsets are 0-based byte offsets into the source text.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown variable `{name}` at byte {offset}")]
    UnknownVariable { name: String, offset: usize },
    #[error("unknown function `{name}` at byte {offset}")]
    UnknownFunction { name: String, offset: usize },
    #[error("unbound variable `{name}`")]
    Unbound { name: String },
    #[error("numeric domain error in {op}{}", location(*.offset))]
    Domain { op: &'static str, offset: Option<usize> },
}

fn location(offset: Option<usize>) -> String {
    match offset {
        Some(o) => format!(" at byte {o}"),
        None => String::new(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Abs,
}

impl Func {
    pub const ALL: [Func; 7] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Exp,
        Func::Log,
        Func::Sqrt,
        Func::Abs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Number(f64),
    /// `slot` is the position of `name` in the variable list given to [`parse`].
    Var { name: String, slot: usize },
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

/// A parsed expression. Equality compares tree structure only, not source offsets.
#[derive(Debug, Clone)]
pub struct Expr {
    pub kind: ExprKind,
    pub offset: usize,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

/// Variable bindings by name.
#[derive(Debug, Clone, Default)]
pub struct Env {
    bindings: Vec<(String, f64)>,
}

impl Env {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bind(mut self, name: &str, value: f64) -> Self {
        self.set(name, value);
        self
    }

    pub fn set(&mut self, name: &str, value: f64) {
        match self.bindings.iter_mut().find(|(n, _)| n == name) {
            Some(slot) => slot.1 = value,
            None => self.bindings.push((name.to_string(), value)),
        }
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.bindings.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }
}

impl Expr {
    fn new(kind: ExprKind, offset: usize) -> Self {
        Self { kind, offset }
    }

    /// Names of the variables occurring in the tree, sorted and deduplicated.
    pub fn variables(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_vars(&self, out: &mut Vec<String>) {
        match &self.kind {
            ExprKind::Number(_) => {}
            ExprKind::Var { name, .. } => out.push(name.clone()),
            ExprKind::Neg(e) | ExprKind::Call(_, e) => e.collect_vars(out),
            ExprKind::Binary(_, l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
        }
    }

    pub fn uses(&self, name: &str) -> bool {
        match &self.kind {
            ExprKind::Number(_) => false,
            ExprKind::Var { name: n, .. } => n == name,
            ExprKind::Neg(e) | ExprKind::Call(_, e) => e.uses(name),
            ExprKind::Binary(_, l, r) => l.uses(name) || r.uses(name),
        }
    }

    /// Evaluates with variables looked up by name.
    pub fn eval(&self, env: &Env) -> Result<f64, ExprError> {
        self.eval_by(&|name, _| {
            env.get(name).ok_or_else(|| ExprError::Unbound {
                name: name.to_string(),
            })
        })
    }

    /// Evaluates with variables looked up by slot (the order given to [`parse`]).
    pub fn eval_slots(&self, values: &[f64]) -> Result<f64, ExprError> {
        self.eval_by(&|name, slot| {
            values.get(slot).copied().ok_or_else(|| ExprError::Unbound {
                name: name.to_string(),
            })
        })
    }

    fn eval_by<L>(&self, lookup: &L) -> Result<f64, ExprError>
    where
        L: Fn(&str, usize) -> Result<f64, ExprError>,
    {
        let value = match &self.kind {
            ExprKind::Number(x) => return Ok(*x),
            ExprKind::Var { name, slot } => return lookup(name, *slot),
            ExprKind::Neg(e) => -e.eval_by(lookup)?,
            ExprKind::Binary(op, l, r) => {
                let a = l.eval_by(lookup)?;
                let b = r.eval_by(lookup)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(self.domain("division by zero"));
                        }
                        a / b
                    }
                    BinOp::Pow => a.powf(b),
                }
            }
            ExprKind::Call(f, e) => {
                let x = e.eval_by(lookup)?;
                match f {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Tan => x.tan(),
                    Func::Exp => x.exp(),
                    Func::Log => {
                        if x <= 0.0 {
                            return Err(self.domain("log of non-positive value"));
                        }
                        x.ln()
                    }
                    Func::Sqrt => {
                        if x < 0.0 {
                            return Err(self.domain("sqrt of negative value"));
                        }
                        x.sqrt()
                    }
                    Func::Abs => x.abs(),
                }
            }
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(self.domain(match &self.kind {
                ExprKind::Binary(BinOp::Pow, ..) => "power",
                _ => "non-finite result",
            }))
        }
    }

    fn domain(&self, op: &'static str) -> ExprError {
        ExprError::Domain {
            op,
            offset: Some(self.offset),
        }
    }
}

/// Fully parenthesized rendering; reparses to an identical tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ExprKind::Number(x) => write!(f, "{x:?}"),
            ExprKind::Var { name, .. } => f.write_str(name),
            ExprKind::Neg(e) => write!(f, "(-{e})"),
            ExprKind::Binary(op, l, r) => write!(f, "({l} {} {r})", op.symbol()),
            ExprKind::Call(func, e) => write!(f, "{}({e})", func.name()),
        }
    }
}

/// Parses `text`, accepting only the identifiers in `allowed_vars`.
pub fn parse(text: &str, allowed_vars: &[&str]) -> Result<Expr, ExprError> {
    let mut p = Parser {
        src: text,
        pos: 0,
        vars: allowed_vars,
    };
    p.skip_ws();
    if p.pos == text.len() {
        return Err(p.syntax("empty expression"));
    }
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != text.len() {
        return Err(p.syntax("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    vars: &'a [&'a str],
}

impl Parser<'_> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn syntax(&self, message: &str) -> ExprError {
        ExprError::Syntax {
            offset: self.pos,
            message: message.to_string(),
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            self.skip_ws();
            let at = self.pos;
            let op = if self.eat('+') {
                BinOp::Add
            } else if self.eat('-') {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.term()?;
            lhs = Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), at);
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            self.skip_ws();
            let at = self.pos;
            let op = if self.eat('*') {
                BinOp::Mul
            } else if self.eat('/') {
                BinOp::Div
            } else {
                return Ok(lhs);
            };
            let rhs = self.unary()?;
            lhs = Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), at);
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        self.skip_ws();
        let at = self.pos;
        if self.eat('-') {
            let inner = self.unary()?;
            return Ok(Expr::new(ExprKind::Neg(Box::new(inner)), at));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.primary()?;
        self.skip_ws();
        let at = self.pos;
        if self.eat('^') {
            let exponent = self.unary()?;
            return Ok(Expr::new(
                ExprKind::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)),
                at,
            ));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ExprError> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            None => Err(self.syntax("unexpected end of input")),
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(self.syntax("expected `)`"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(start),
            Some(c) if c.is_alphabetic() || c == '_' => {
                let name = self.ident().to_string();
                let name = name.as_str();
                self.skip_ws();
                if self.peek() == Some('(') {
                    let func = Func::from_name(name).ok_or_else(|| ExprError::UnknownFunction {
                        name: name.to_string(),
                        offset: start,
                    })?;
                    self.pos += 1;
                    let arg = self.expr()?;
                    if !self.eat(')') {
                        return Err(self.syntax("expected `)`"));
                    }
                    return Ok(Expr::new(ExprKind::Call(func, Box::new(arg)), start));
                }
                match self.vars.iter().position(|v| *v == name) {
                    Some(slot) => Ok(Expr::new(
                        ExprKind::Var {
                            name: name.to_string(),
                            slot,
                        },
                        start,
                    )),
                    None => Err(ExprError::UnknownVariable {
                        name: name.to_string(),
                        offset: start,
                    }),
                }
            }
            Some(_) => Err(self.syntax("unexpected character")),
        }
    }

    fn ident(&mut self) -> &str {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if !(c.is_alphanumeric() || c == '_') {
                break;
            }
            self.pos += c.len_utf8();
        }
        &self.src[start..self.pos]
    }

    fn number(&mut self, start: usize) -> Result<Expr, ExprError> {
        let bytes = self.src.as_bytes();
        let digits = |p: &mut usize| {
            let s = *p;
            while *p < bytes.len() && bytes[*p].is_ascii_digit() {
                *p += 1;
            }
            *p - s
        };
        let mut p = self.pos;
        let mut count = digits(&mut p);
        if p < bytes.len() && bytes[p] == b'.' {
            p += 1;
            count += digits(&mut p);
        }
        if count == 0 {
            return Err(self.syntax("malformed number"));
        }
        if p < bytes.len() && (bytes[p] == b'e' || bytes[p] == b'E') {
            let mut q = p + 1;
            if q < bytes.len() && (bytes[q] == b'+' || bytes[q] == b'-') {
                q += 1;
            }
            if digits(&mut q) == 0 {
                self.pos = q;
                return Err(self.syntax("malformed exponent"));
            }
            p = q;
        }
        let value: f64 = self.src[start..p]
            .parse()
            .map_err(|_| self.syntax("malformed number"))?;
        if !value.is_finite() {
            return Err(self.syntax("number out of range"));
        }
        self.pos = p;
        Ok(Expr::new(ExprKind::Number(value), start))
    }
}
