//! Parser and evaluator for the symbol expression language.
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := '-' factor | atom ('^' ('-')? atom)?
//! atom   := number | var | func '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! Variables are `x1`, `x2` (space) and `k<j>_<i>` (coordinate `i` of the
//! `j`-th frequency operand). `i` is the imaginary unit, `pi` the constant.

use std::fmt;

use num_complex::Complex64;

use super::jet::{ln_complex, pow_scalar, Jet, JetLayout};
use crate::{EvalError, FioError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Abs,
    Sqrt,
    Jb,
    Norm,
    Re,
    Im,
}

impl Func {
    fn lookup(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "abs" => Func::Abs,
            "sqrt" => Func::Sqrt,
            "jb" => Func::Jb,
            "norm" => Func::Norm,
            "re" => Func::Re,
            "im" => Func::Im,
            _ => return None,
        })
    }

    fn variadic(self) -> bool {
        matches!(self, Func::Jb | Func::Norm)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Const(Complex64),
    Space(usize),
    /// Operand index and coordinate, both zero-based.
    Freq(usize, usize),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    LParen,
    RParen,
    Comma,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(v) => write!(f, "number {v}"),
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Plus => f.write_str("`+`"),
            Tok::Minus => f.write_str("`-`"),
            Tok::Star => f.write_str("`*`"),
            Tok::Slash => f.write_str("`/`"),
            Tok::Caret => f.write_str("`^`"),
            Tok::End => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn parse_error(line: usize, column: usize, message: impl Into<String>) -> FioError {
    FioError::Parse {
        line,
        column,
        message: message.into(),
    }
}

fn lex(source: &str) -> Result<Vec<Spanned>> {
    let chars: Vec<char> = source.chars().collect();
    let mut out = Vec::new();
    let (mut line, mut column) = (1usize, 1usize);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, column);
        if c == '\n' {
            line += 1;
            column = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            column += 1;
            continue;
        }
        let single = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            _ => None,
        };
        if let Some(tok) = single {
            out.push(Spanned {
                tok,
                line: l0,
                column: c0,
            });
            i += 1;
            column += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || c == '.' {
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let value: f64 = text
                .parse()
                .map_err(|_| parse_error(l0, c0, format!("malformed number `{text}`")))?;
            out.push(Spanned {
                tok: Tok::Num(value),
                line: l0,
                column: c0,
            });
        } else if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Spanned {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                line: l0,
                column: c0,
            });
        } else {
            return Err(parse_error(l0, c0, format!("unexpected character `{c}`")));
        }
        column += i - start;
    }
    out.push(Spanned {
        tok: Tok::End,
        line,
        column,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<()> {
        let t = self.bump();
        if t.tok == want {
            Ok(())
        } else {
            Err(parse_error(
                t.line,
                t.column,
                format!("expected {want}, found {}", t.tok),
            ))
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            match self.peek().tok {
                Tok::Plus => {
                    self.bump();
                    lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek().tok {
                Tok::Star => {
                    self.bump();
                    lhs = Node::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Tok::Slash => {
                    self.bump();
                    lhs = Node::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Node> {
        if self.peek().tok == Tok::Minus {
            self.bump();
            return Ok(Node::Neg(Box::new(self.factor()?)));
        }
        let base = self.atom()?;
        if self.peek().tok == Tok::Caret {
            self.bump();
            let exponent = if self.peek().tok == Tok::Minus {
                self.bump();
                Node::Neg(Box::new(self.atom()?))
            } else {
                self.atom()?
            };
            return Ok(Node::Pow(Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        let t = self.bump();
        match t.tok {
            Tok::Num(v) => Ok(Node::Const(Complex64::new(v, 0.0))),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => self.identifier(&name, t.line, t.column),
            other => Err(parse_error(t.line, t.column, format!("unexpected {other}"))),
        }
    }

    fn identifier(&mut self, name: &str, line: usize, column: usize) -> Result<Node> {
        let called = self.peek().tok == Tok::LParen;
        match name {
            "i" => {
                if called {
                    self.bump();
                    self.expect(Tok::RParen)?;
                }
                return Ok(Node::Const(Complex64::new(0.0, 1.0)));
            }
            "pi" if !called => return Ok(Node::Const(Complex64::new(std::f64::consts::PI, 0.0))),
            _ => {}
        }
        if let Some(func) = Func::lookup(name) {
            if !called {
                return Err(parse_error(line, column, format!("function `{name}` needs arguments")));
            }
            self.bump();
            let mut args = vec![self.expr()?];
            while self.peek().tok == Tok::Comma {
                self.bump();
                args.push(self.expr()?);
            }
            self.expect(Tok::RParen)?;
            if !func.variadic() && args.len() != 1 {
                return Err(parse_error(
                    line,
                    column,
                    format!("arity mismatch: `{name}` takes 1 argument, got {}", args.len()),
                ));
            }
            return Ok(Node::Call(func, args));
        }
        if called {
            return Err(parse_error(line, column, format!("unknown function `{name}`")));
        }
        if let Some(rest) = name.strip_prefix('x') {
            if let Ok(i @ 1..=2) = rest.parse::<usize>() {
                return Ok(Node::Space(i - 1));
            }
        }
        if let Some(rest) = name.strip_prefix('k') {
            if let Some((j, i)) = rest.split_once('_') {
                if let (Ok(j @ 1..=9), Ok(i @ 1..=2)) = (j.parse::<usize>(), i.parse::<usize>()) {
                    return Ok(Node::Freq(j - 1, i - 1));
                }
            }
        }
        Err(parse_error(line, column, format!("unknown identifier `{name}`")))
    }
}

/// A parsed expression, not yet bound to a dimension and arity.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    source: String,
    root: Node,
}

pub fn parse_expression(source: &str) -> Result<Expression> {
    let mut p = Parser {
        toks: lex(source)?,
        pos: 0,
    };
    let root = p.expr()?;
    let t = p.peek();
    if t.tok != Tok::End {
        return Err(parse_error(t.line, t.column, format!("unexpected {}", t.tok)));
    }
    Ok(Expression {
        source: source.to_string(),
        root,
    })
}

fn scan(node: &Node, space: &mut usize, operands: &mut usize, coords: &mut usize) {
    match node {
        Node::Const(_) => {}
        Node::Space(i) => *space = (*space).max(i + 1),
        Node::Freq(j, i) => {
            *operands = (*operands).max(j + 1);
            *coords = (*coords).max(i + 1);
        }
        Node::Neg(a) => scan(a, space, operands, coords),
        Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Pow(a, b) => {
            scan(a, space, operands, coords);
            scan(b, space, operands, coords);
        }
        Node::Call(_, args) => args.iter().for_each(|a| scan(a, space, operands, coords)),
    }
}

impl Expression {
    pub fn source(&self) -> &str {
        &self.source
    }

    /// Binds the expression to `dim` space coordinates and `arity` frequency
    /// operands, rejecting variables outside that range.
    pub fn compile(&self, dim: usize, arity: usize) -> Result<CompiledExpr> {
        let (mut space, mut operands, mut coords) = (0, 0, 0);
        scan(&self.root, &mut space, &mut operands, &mut coords);
        if space > dim || coords > dim {
            return Err(FioError::invalid(format!(
                "expression `{}` uses coordinate {} but the grid dimension is {dim}",
                self.source,
                space.max(coords)
            )));
        }
        if operands > arity {
            return Err(FioError::invalid(format!(
                "expression `{}` refers to operand {operands} but the arity is {arity}",
                self.source
            )));
        }
        Ok(CompiledExpr {
            expr: self.clone(),
            dim,
            arity,
        })
    }
}

/// Expression bound to a dimension and arity. Frequency arguments are passed
/// as one flat slice `[ξ_1, …, ξ_N]` of length `arity * dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledExpr {
    expr: Expression,
    dim: usize,
    arity: usize,
}

trait Algebra {
    type V: Clone;
    fn constant(&self, c: Complex64) -> Self::V;
    fn space(&self, i: usize) -> Self::V;
    fn freq(&self, flat: usize) -> Self::V;
    fn neg(&self, a: &Self::V) -> Self::V;
    fn add(&self, a: &Self::V, b: &Self::V) -> Self::V;
    fn sub(&self, a: &Self::V, b: &Self::V) -> Self::V;
    fn mul(&self, a: &Self::V, b: &Self::V) -> Self::V;
    fn div(&self, a: &Self::V, b: &Self::V) -> std::result::Result<Self::V, EvalError>;
    fn pow(&self, a: &Self::V, b: &Self::V) -> std::result::Result<Self::V, EvalError>;
    fn call(&self, f: Func, args: &[Self::V]) -> std::result::Result<Self::V, EvalError>;
}

struct Scalars<'a> {
    x: &'a [f64],
    xi: &'a [f64],
}

impl Algebra for Scalars<'_> {
    type V = Complex64;

    fn constant(&self, c: Complex64) -> Complex64 {
        c
    }
    fn space(&self, i: usize) -> Complex64 {
        Complex64::new(self.x[i], 0.0)
    }
    fn freq(&self, flat: usize) -> Complex64 {
        Complex64::new(self.xi[flat], 0.0)
    }
    fn neg(&self, a: &Complex64) -> Complex64 {
        -a
    }
    fn add(&self, a: &Complex64, b: &Complex64) -> Complex64 {
        a + b
    }
    fn sub(&self, a: &Complex64, b: &Complex64) -> Complex64 {
        a - b
    }
    fn mul(&self, a: &Complex64, b: &Complex64) -> Complex64 {
        a * b
    }
    fn div(&self, a: &Complex64, b: &Complex64) -> std::result::Result<Complex64, EvalError> {
        if *b == Complex64::new(0.0, 0.0) {
            return Err(EvalError::DivisionByZero);
        }
        if b.im == 0.0 {
            return Ok(a / b.re);
        }
        Ok(a / b)
    }
    fn pow(&self, a: &Complex64, b: &Complex64) -> std::result::Result<Complex64, EvalError> {
        pow_scalar(*a, *b)
    }
    fn call(&self, f: Func, args: &[Complex64]) -> std::result::Result<Complex64, EvalError> {
        let a = args[0];
        let real = |v: f64| Complex64::new(v, 0.0);
        Ok(match f {
            Func::Sin => {
                if a.im == 0.0 {
                    real(a.re.sin())
                } else {
                    a.sin()
                }
            }
            Func::Cos => {
                if a.im == 0.0 {
                    real(a.re.cos())
                } else {
                    a.cos()
                }
            }
            Func::Exp => {
                if a.im == 0.0 {
                    real(a.re.exp())
                } else if a.re == 0.0 {
                    Complex64::new(a.im.cos(), a.im.sin())
                } else {
                    a.exp()
                }
            }
            Func::Log => {
                if a == Complex64::new(0.0, 0.0) {
                    return Err(EvalError::LogOfZero);
                }
                ln_complex(a)
            }
            Func::Abs => real(a.norm()),
            Func::Sqrt => {
                if a.im == 0.0 && a.re >= 0.0 {
                    real(a.re.sqrt())
                } else {
                    a.sqrt()
                }
            }
            Func::Jb => real((1.0 + args.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()),
            Func::Norm => real(args.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()),
            Func::Re => real(a.re),
            Func::Im => real(a.im),
        })
    }
}

struct Jets<'a> {
    layout: &'a std::sync::Arc<JetLayout>,
    x: &'a [Jet],
    xi: &'a [Jet],
}

impl Algebra for Jets<'_> {
    type V = Jet;

    fn constant(&self, c: Complex64) -> Jet {
        Jet::constant(self.layout, c)
    }
    fn space(&self, i: usize) -> Jet {
        self.x[i].clone()
    }
    fn freq(&self, flat: usize) -> Jet {
        self.xi[flat].clone()
    }
    fn neg(&self, a: &Jet) -> Jet {
        a.neg()
    }
    fn add(&self, a: &Jet, b: &Jet) -> Jet {
        a.add(b)
    }
    fn sub(&self, a: &Jet, b: &Jet) -> Jet {
        a.sub(b)
    }
    fn mul(&self, a: &Jet, b: &Jet) -> Jet {
        a.mul(b)
    }
    fn div(&self, a: &Jet, b: &Jet) -> std::result::Result<Jet, EvalError> {
        a.div(b)
    }
    fn pow(&self, a: &Jet, b: &Jet) -> std::result::Result<Jet, EvalError> {
        if b.is_constant() {
            a.powc(b.value(), "power")
        } else {
            Ok(b.mul(&a.ln()?).exp())
        }
    }
    fn call(&self, f: Func, args: &[Jet]) -> std::result::Result<Jet, EvalError> {
        let a = &args[0];
        match f {
            Func::Sin => Ok(a.sin()),
            Func::Cos => Ok(a.cos()),
            Func::Exp => Ok(a.exp()),
            Func::Log => a.ln(),
            Func::Abs => a.abs(),
            Func::Sqrt => a.sqrt(),
            Func::Jb => Jet::modulus_squared_sum(args)
                .add_constant(Complex64::new(1.0, 0.0))
                .sqrt(),
            Func::Norm => {
                let s = Jet::modulus_squared_sum(args);
                if s.value().re == 0.0 && !s.is_constant() {
                    return Err(EvalError::NonDifferentiable("norm"));
                }
                s.powc(Complex64::new(0.5, 0.0), "norm")
            }
            Func::Re => Ok(a.re()),
            Func::Im => Ok(a.im()),
        }
    }
}

fn eval<A: Algebra>(node: &Node, alg: &A, dim: usize) -> std::result::Result<A::V, EvalError> {
    Ok(match node {
        Node::Const(c) => alg.constant(*c),
        Node::Space(i) => alg.space(*i),
        Node::Freq(j, i) => alg.freq(j * dim + i),
        Node::Neg(a) => alg.neg(&eval(a, alg, dim)?),
        Node::Add(a, b) => alg.add(&eval(a, alg, dim)?, &eval(b, alg, dim)?),
        Node::Sub(a, b) => alg.sub(&eval(a, alg, dim)?, &eval(b, alg, dim)?),
        Node::Mul(a, b) => alg.mul(&eval(a, alg, dim)?, &eval(b, alg, dim)?),
        Node::Div(a, b) => alg.div(&eval(a, alg, dim)?, &eval(b, alg, dim)?)?,
        Node::Pow(a, b) => alg.pow(&eval(a, alg, dim)?, &eval(b, alg, dim)?)?,
        Node::Call(f, args) => {
            let vals = args
                .iter()
                .map(|a| eval(a, alg, dim))
                .collect::<std::result::Result<Vec<_>, _>>()?;
            alg.call(*f, &vals)?
        }
    })
}

impl CompiledExpr {
    pub fn source(&self) -> &str {
        self.expr.source()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Whether any space variable occurs in the expression.
    pub fn uses_space(&self) -> bool {
        let (mut space, mut operands, mut coords) = (0, 0, 0);
        scan(&self.expr.root, &mut space, &mut operands, &mut coords);
        space > 0
    }

    pub fn eval(&self, x: &[f64], xi: &[f64]) -> std::result::Result<Complex64, EvalError> {
        let v = eval(&self.expr.root, &Scalars { x, xi }, self.dim)?;
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite)
        }
    }

    /// Evaluates with jet-valued inputs; all inputs must share one layout.
    pub fn eval_jet(&self, x: &[Jet], xi: &[Jet]) -> std::result::Result<Jet, EvalError> {
        let layout = x
            .first()
            .or_else(|| xi.first())
            .map(|j| j.layout().clone())
            .expect("at least one jet input");
        let v = eval(
            &self.expr.root,
            &Jets {
                layout: &layout,
                x,
                xi,
            },
            self.dim,
        )?;
        if v.coeffs().iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
            Ok(v)
        } else {
            Err(EvalError::NonFinite)
        }
    }
}
