//! Problem-file DSL.
//!
//! ```text
//! # viscous Burgers
//! pde u_t = -u*u_x + nu*u_xx
//! scheme ftcs {
//!     (u[0,1] - u[0,0])/tau + (u[1,0]^2 - u[-1,0]^2)/(4*h)
//!       - nu*(u[1,0] - 2*u[0,0] + u[-1,0])/h^2 = 0
//! }
//! hint xi2 depends (t)
//! option ansatz_degree = 3
//! ```
//!
//! Declarations may appear in any order; exactly one `pde` is required.

mod lexer;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::prolong::Component;
use crate::symkernel::{Expr, GridSample, JetVar, Monomial, Rational, Symbol};
use lexer::{tokenize, Tok, Token};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("unexpected character `{0}`")]
    UnexpectedChar(char),
    #[error("expected {expected}, found {found}")]
    Expected { expected: String, found: String },
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("malformed grid offset: {0}")]
    MalformedOffset(String),
    #[error("division by `{0}`: only nonzero monomials in h and tau may divide")]
    NonMonomialDivisor(String),
    #[error("negative power of `{0}`: only monomials in h and tau may be inverted")]
    NegativePower(String),
    #[error("exponent too large")]
    ExponentTooLarge,
    #[error("the pde right-hand side may not contain t-derivatives (found `{0}`)")]
    TimeDerivativeInPde(String),
    #[error("the pde right-hand side may not contain `{0}`")]
    ForbiddenInPde(String),
    #[error("scheme expressions must be written with grid samples, found `{0}`")]
    ForbiddenInScheme(String),
    #[error("duplicate {0}")]
    Duplicate(String),
    #[error("missing `pde u_t = ...` declaration")]
    MissingPde,
    #[error("unknown infinitesimal `{0}` (expected xi1, xi2, eta, zeta1, zeta2 or chi)")]
    UnknownInfinitesimal(String),
    #[error("`{component}` may not depend on `{variable}`")]
    HintOutsideDefaults { component: String, variable: String },
    #[error("unknown option `{0}` (expected taylor_order, ansatz_degree or grading_degree)")]
    UnknownOption(String),
    #[error("option `{name}` = {value} is out of range")]
    OptionOutOfRange { name: String, value: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{position}: {kind}")]
pub struct ParseError {
    pub position: Position,
    pub kind: ParseErrorKind,
}

impl ParseError {
    fn new(position: Position, kind: ParseErrorKind) -> Self {
        ParseError { position, kind }
    }
}

/// A named difference scheme `expr = 0` over grid samples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scheme {
    pub name: String,
    pub expr: Expr,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Options {
    pub taylor_order: Option<u32>,
    pub ansatz_degree: Option<u32>,
    /// Retain every error grading of total `(τ, h)` degree up to this value
    /// in addition to the minimal ones.
    pub grading_degree: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Problem {
    /// `Q` in `u_t = Q`.
    pub pde_rhs: Expr,
    pub schemes: Vec<Scheme>,
    /// Restricted dependency sets, per infinitesimal component.
    pub hints: BTreeMap<Component, BTreeSet<Symbol>>,
    pub options: Options,
}

pub const MAX_TAYLOR_ORDER: u32 = 8;

pub fn parse_problem(text: &str) -> Result<Problem, ParseError> {
    let tokens = tokenize(text)?;
    let mut p = Parser { tokens, at: 0 };
    let mut pde: Option<Expr> = None;
    let mut schemes: Vec<Scheme> = Vec::new();
    let mut hints = BTreeMap::new();
    let mut options = Options::default();

    loop {
        let tok = p.peek().clone();
        match &tok.tok {
            Tok::Eof => break,
            Tok::Ident(kw) if kw == "pde" => {
                p.bump();
                p.expect_ident("u_t")?;
                p.expect(Tok::Eq)?;
                let start = p.peek().pos;
                let rhs = p.expr()?;
                check_pde_rhs(&rhs, start)?;
                if pde.replace(rhs).is_some() {
                    return Err(ParseError::new(tok.pos, ParseErrorKind::Duplicate("pde declaration".into())));
                }
            }
            Tok::Ident(kw) if kw == "scheme" => {
                p.bump();
                let (name, name_pos) = p.ident()?;
                p.expect(Tok::LBrace)?;
                let start = p.peek().pos;
                let expr = p.expr()?;
                check_scheme(&expr, start)?;
                p.expect(Tok::Eq)?;
                let zero = p.bump().clone();
                if !matches!(&zero.tok, Tok::Int(n) if n.is_zero()) {
                    return Err(expected("`0`", &zero));
                }
                p.expect(Tok::RBrace)?;
                if schemes.iter().any(|s| s.name == name) {
                    return Err(ParseError::new(name_pos, ParseErrorKind::Duplicate(format!("scheme `{name}`"))));
                }
                schemes.push(Scheme { name, expr });
            }
            Tok::Ident(kw) if kw == "hint" => {
                p.bump();
                let (inf, inf_pos) = p.ident()?;
                let component = Component::from_name(&inf)
                    .ok_or_else(|| ParseError::new(inf_pos, ParseErrorKind::UnknownInfinitesimal(inf.clone())))?;
                p.expect_ident("depends")?;
                p.expect(Tok::LParen)?;
                let mut vars = BTreeSet::new();
                if p.peek().tok != Tok::RParen {
                    loop {
                        let (v, v_pos) = p.ident()?;
                        let s = base_symbol(&v)
                            .ok_or_else(|| ParseError::new(v_pos, ParseErrorKind::UnknownIdentifier(v.clone())))?;
                        if !component.default_dependencies().contains(&s) {
                            return Err(ParseError::new(
                                v_pos,
                                ParseErrorKind::HintOutsideDefaults { component: inf.clone(), variable: v },
                            ));
                        }
                        vars.insert(s);
                        if p.peek().tok == Tok::Comma {
                            p.bump();
                        } else {
                            break;
                        }
                    }
                }
                p.expect(Tok::RParen)?;
                if hints.insert(component, vars).is_some() {
                    return Err(ParseError::new(tok.pos, ParseErrorKind::Duplicate(format!("hint for `{inf}`"))));
                }
            }
            Tok::Ident(kw) if kw == "option" => {
                p.bump();
                let (name, name_pos) = p.ident()?;
                p.expect(Tok::Eq)?;
                let value_tok = p.bump().clone();
                let Tok::Int(value) = &value_tok.tok else {
                    return Err(expected("an integer", &value_tok));
                };
                let out_of_range =
                    || ParseError::new(value_tok.pos, ParseErrorKind::OptionOutOfRange { name: name.clone(), value: value.to_string() });
                let v = value.to_u32().ok_or_else(out_of_range)?;
                match name.as_str() {
                    "taylor_order" => {
                        if v == 0 || v > MAX_TAYLOR_ORDER {
                            return Err(out_of_range());
                        }
                        options.taylor_order = Some(v);
                    }
                    "ansatz_degree" => {
                        if v > 8 {
                            return Err(out_of_range());
                        }
                        options.ansatz_degree = Some(v);
                    }
                    "grading_degree" => {
                        if v > 2 * MAX_TAYLOR_ORDER {
                            return Err(out_of_range());
                        }
                        options.grading_degree = Some(v);
                    }
                    _ => return Err(ParseError::new(name_pos, ParseErrorKind::UnknownOption(name))),
                }
            }
            _ => return Err(expected("`pde`, `scheme`, `hint` or `option`", &tok)),
        }
    }

    let pde_rhs = pde.ok_or_else(|| ParseError::new(p.peek().pos, ParseErrorKind::MissingPde))?;
    Ok(Problem { pde_rhs, schemes, hints, options })
}

/// Parses a standalone expression (the `expr` sub-grammar).
pub fn parse_expression(text: &str) -> Result<Expr, ParseError> {
    let tokens = tokenize(text)?;
    let mut p = Parser { tokens, at: 0 };
    let e = p.expr()?;
    let end = p.peek().clone();
    if end.tok != Tok::Eof {
        return Err(expected("an operator or end of input", &end));
    }
    Ok(e)
}

fn check_pde_rhs(rhs: &Expr, pos: Position) -> Result<(), ParseError> {
    for s in rhs.symbols() {
        match s {
            Symbol::Jet(j) if j.t_order() > 0 => {
                return Err(ParseError::new(pos, ParseErrorKind::TimeDerivativeInPde(s.to_string())))
            }
            Symbol::Sample(_) | Symbol::Coeff(_) | Symbol::H | Symbol::Tau => {
                return Err(ParseError::new(pos, ParseErrorKind::ForbiddenInPde(s.to_string())))
            }
            _ => {}
        }
    }
    Ok(())
}

fn check_scheme(e: &Expr, pos: Position) -> Result<(), ParseError> {
    for s in e.symbols() {
        if matches!(s, Symbol::Jet(_) | Symbol::Coeff(_)) {
            return Err(ParseError::new(pos, ParseErrorKind::ForbiddenInScheme(s.to_string())));
        }
    }
    Ok(())
}

fn base_symbol(name: &str) -> Option<Symbol> {
    Some(match name {
        "x" => Symbol::X,
        "t" => Symbol::T,
        "u" => Symbol::U,
        "nu" => Symbol::Nu,
        "h" => Symbol::H,
        "tau" => Symbol::Tau,
        _ => return None,
    })
}

fn resolve_identifier(name: &str) -> Option<Symbol> {
    if let Some(s) = base_symbol(name) {
        return Some(s);
    }
    if let Some(suffix) = name.strip_prefix("u_") {
        if suffix.is_empty() || !suffix.chars().all(|c| c == 'x' || c == 't') {
            return None;
        }
        let a = suffix.chars().filter(|&c| c == 'x').count();
        let b = suffix.len() - a;
        let (a, b) = (u8::try_from(a).ok()?, u8::try_from(b).ok()?);
        return JetVar::new(a, b).map(Symbol::Jet);
    }
    if let Some(digits) = name.strip_prefix('c') {
        if !digits.is_empty() && digits.chars().all(|c| c.is_ascii_digit()) {
            return digits.parse().ok().map(Symbol::Coeff);
        }
    }
    None
}

fn expected(what: &str, found: &Token) -> ParseError {
    ParseError::new(found.pos, ParseErrorKind::Expected { expected: what.to_string(), found: found.tok.to_string() })
}

struct Parser {
    tokens: Vec<Token>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.at]
    }

    fn bump(&mut self) -> &Token {
        let t = &self.tokens[self.at];
        if self.at + 1 < self.tokens.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        let t = self.bump().clone();
        if t.tok == tok {
            Ok(())
        } else {
            Err(expected(&tok.to_string(), &t))
        }
    }

    fn expect_ident(&mut self, name: &str) -> Result<(), ParseError> {
        let t = self.bump().clone();
        match &t.tok {
            Tok::Ident(s) if s == name => Ok(()),
            _ => Err(expected(&format!("`{name}`"), &t)),
        }
    }

    fn ident(&mut self) -> Result<(String, Position), ParseError> {
        let t = self.bump().clone();
        match t.tok {
            Tok::Ident(s) => Ok((s, t.pos)),
            _ => Err(expected("an identifier", &t)),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek().tok {
                Tok::Plus => {
                    self.bump();
                    let rhs = self.term()?;
                    acc += &rhs;
                }
                Tok::Minus => {
                    self.bump();
                    let rhs = self.term()?;
                    acc -= &rhs;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek().tok {
                Tok::Star => {
                    self.bump();
                    let rhs = self.unary()?;
                    acc = &acc * &rhs;
                }
                Tok::Slash => {
                    let pos = self.bump().pos;
                    let rhs = self.unary()?;
                    let inv = invert_step_monomial(&rhs)
                        .ok_or_else(|| ParseError::new(pos, ParseErrorKind::NonMonomialDivisor(rhs.to_string())))?;
                    acc = &acc * &inv;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek().tok == Tok::Minus {
            self.bump();
            return Ok(-self.unary()?);
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if self.peek().tok != Tok::Caret {
            return Ok(base);
        }
        let caret = self.bump().pos;
        let parens = self.peek().tok == Tok::LParen;
        if parens {
            self.bump();
        }
        let negative = self.peek().tok == Tok::Minus;
        if negative {
            self.bump();
        }
        let t = self.bump().clone();
        let Tok::Int(n) = &t.tok else {
            return Err(expected("an integer exponent", &t));
        };
        if parens {
            self.expect(Tok::RParen)?;
        }
        let n = n.to_u32().filter(|&n| n <= 64).ok_or_else(|| ParseError::new(t.pos, ParseErrorKind::ExponentTooLarge))?;
        if negative {
            let inv = invert_step_monomial(&base)
                .ok_or_else(|| ParseError::new(caret, ParseErrorKind::NegativePower(base.to_string())))?;
            Ok(inv.pow(n))
        } else {
            Ok(base.pow(n))
        }
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let t = self.bump().clone();
        match t.tok {
            Tok::Int(n) => Ok(Expr::constant(Rational::from_integer(n))),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if name == "u" && self.peek().tok == Tok::LBracket {
                    self.bump();
                    let x_half = self.offset(true)?;
                    self.expect(Tok::Comma)?;
                    let t_steps = self.offset(false)?;
                    self.expect(Tok::RBracket)?;
                    return Ok(Expr::symbol(Symbol::Sample(GridSample::new(x_half, t_steps))));
                }
                resolve_identifier(&name)
                    .map(Expr::symbol)
                    .ok_or_else(|| ParseError::new(t.pos, ParseErrorKind::UnknownIdentifier(name)))
            }
            _ => Err(expected("an expression", &t)),
        }
    }

    /// Parses `[-]INT[/DEN]`. Returns the offset doubled for the x axis
    /// (denominator 1 or 2) and as-is for t (denominator 1).
    fn offset(&mut self, x_axis: bool) -> Result<i32, ParseError> {
        let start = self.peek().pos;
        let malformed = |msg: &str| ParseError::new(start, ParseErrorKind::MalformedOffset(msg.to_string()));
        let negative = self.peek().tok == Tok::Minus;
        if negative {
            self.bump();
        }
        let t = self.bump().clone();
        let Tok::Int(num) = t.tok else {
            return Err(malformed("expected an integer"));
        };
        let mut den = BigInt::from(1);
        if self.peek().tok == Tok::Slash {
            self.bump();
            let d = self.bump().clone();
            let Tok::Int(d) = d.tok else {
                return Err(malformed("expected an integer denominator"));
            };
            den = d;
        }
        let num = num.to_i32().ok_or_else(|| malformed("offset too large"))?;
        let sign = if negative { -1 } else { 1 };
        match (den.to_i32(), x_axis) {
            (Some(1), true) => num.checked_mul(2).map(|v| sign * v).ok_or_else(|| malformed("offset too large")),
            (Some(2), true) => Ok(sign * num),
            (Some(1), false) => Ok(sign * num),
            (_, true) => Err(malformed("x offsets must have denominator 1 or 2")),
            (_, false) => Err(malformed("t offsets must be integers")),
        }
    }
}

/// Inverse of a nonzero monomial over `h` and `τ` only.
fn invert_step_monomial(e: &Expr) -> Option<Expr> {
    let (m, c) = e.as_monomial()?;
    if !m.symbols().all(|s| s.allows_negative_exponent()) {
        return None;
    }
    let inv: Monomial = m.inverse();
    Some(Expr::term(c.recip(), inv))
}
