//! A small expression language for complex functions of one variable.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' int)?
//! atom   := number | 'i' | 't' | 'z' | func '(' expr ')' | '(' expr ')'
//! func   := 'sqrt' | 'exp' | 'log'
//! ```
//!
//! `t` and `z` name the same variable. `^` binds tighter than unary minus, so
//! `-t^2` is `-(t^2)`. Exponents are integer literals, optionally signed.
//! `sqrt` and `log` use the principal branch with the argument in `(-pi, pi]`.

use std::fmt;

use thiserror::Error;

use crate::C64;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Number(C64),
    Variable,
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, i32),
    Sqrt(Box<Expr>),
    Exp(Box<Expr>),
    Log(Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at byte {offset}: expected one of [{}], found {found}", expected.join(", "))]
pub struct ParseError {
    pub offset: usize,
    pub expected: Vec<&'static str>,
    pub found: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("logarithm of zero")]
    LogOfZero,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("identifier '{s}'"),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Star => "'*'".into(),
            Tok::Slash => "'/'".into(),
            Tok::Caret => "'^'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::End => "end of input".into(),
        }
    }
}

const ATOM_START: &[&str] = &["number", "'i'", "'t'", "'z'", "'sqrt'", "'exp'", "'log'", "'('", "'-'"];

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut pos = 0;
    while pos < bytes.len() {
        let c = bytes[pos];
        if c.is_ascii_whitespace() {
            pos += 1;
            continue;
        }
        let start = pos;
        let tok = match c {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' | b'.' => {
                let mut end = pos;
                while end < bytes.len() && bytes[end].is_ascii_digit() {
                    end += 1;
                }
                if end < bytes.len() && bytes[end] == b'.' {
                    end += 1;
                    while end < bytes.len() && bytes[end].is_ascii_digit() {
                        end += 1;
                    }
                }
                // exponent only when digits follow, so "2e" never swallows an identifier
                if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
                    let mut k = end + 1;
                    if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                        k += 1;
                    }
                    if k < bytes.len() && bytes[k].is_ascii_digit() {
                        while k < bytes.len() && bytes[k].is_ascii_digit() {
                            k += 1;
                        }
                        end = k;
                    }
                }
                let text = &src[pos..end];
                let value: f64 = text.parse().map_err(|_| ParseError {
                    offset: start,
                    expected: vec!["number"],
                    found: format!("'{text}'"),
                })?;
                pos = end;
                out.push((start, Tok::Num(value)));
                continue;
            }
            c if c.is_ascii_alphabetic() => {
                let mut end = pos;
                while end < bytes.len() && bytes[end].is_ascii_alphanumeric() {
                    end += 1;
                }
                let word = src[pos..end].to_string();
                pos = end;
                out.push((start, Tok::Ident(word)));
                continue;
            }
            _ => {
                let ch = src[pos..].chars().next().unwrap_or('?');
                return Err(ParseError {
                    offset: start,
                    expected: ATOM_START.to_vec(),
                    found: format!("character '{ch}'"),
                });
            }
        };
        pos += 1;
        out.push((start, tok));
    }
    out.push((src.len(), Tok::End));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].1.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&'static str]) -> ParseError {
        ParseError {
            offset: self.offset(),
            expected: expected.to_vec(),
            found: self.peek().describe(),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Tok::Slash => {
                    self.bump();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let negative = match self.peek() {
            Tok::Minus => {
                self.bump();
                true
            }
            Tok::Plus => {
                self.bump();
                false
            }
            _ => false,
        };
        let at = self.offset();
        match self.peek().clone() {
            Tok::Num(v) if v.fract() == 0.0 && v <= i32::MAX as f64 => {
                self.bump();
                let n = v as i32;
                Ok(Expr::Pow(Box::new(base), if negative { -n } else { n }))
            }
            other => Err(ParseError {
                offset: at,
                expected: vec!["integer exponent"],
                found: other.describe(),
            }),
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::Number(C64::new(v, 0.0)))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Tok::Ident(word) => match word.as_str() {
                "i" => {
                    self.bump();
                    Ok(Expr::Number(C64::new(0.0, 1.0)))
                }
                "t" | "z" => {
                    self.bump();
                    Ok(Expr::Variable)
                }
                "sqrt" | "exp" | "log" => {
                    self.bump();
                    if *self.peek() != Tok::LParen {
                        return Err(self.error(&["'('"]));
                    }
                    self.bump();
                    let arg = Box::new(self.expr()?);
                    self.expect_rparen()?;
                    Ok(match word.as_str() {
                        "sqrt" => Expr::Sqrt(arg),
                        "exp" => Expr::Exp(arg),
                        _ => Expr::Log(arg),
                    })
                }
                _ => Err(self.error(ATOM_START)),
            },
            _ => Err(self.error(ATOM_START)),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        if *self.peek() == Tok::RParen {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&["')'", "'+'", "'-'", "'*'", "'/'", "'^'"]))
        }
    }
}

/// Parses `source` into an expression tree.
pub fn parse(source: &str) -> Result<Expr, ParseError> {
    let mut p = Parser { toks: lex(source)?, pos: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.error(&["'+'", "'-'", "'*'", "'/'", "'^'", "end of input"]));
    }
    Ok(e)
}

impl std::str::FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

/// Principal square root with `sqrt(-x - 0i) = i sqrt(x)`.
pub fn principal_sqrt(w: C64) -> C64 {
    if w.im == 0.0 {
        if w.re >= 0.0 {
            C64::new(w.re.sqrt(), 0.0)
        } else {
            C64::new(0.0, (-w.re).sqrt())
        }
    } else {
        w.sqrt()
    }
}

/// Principal logarithm with the argument in `(-pi, pi]`.
pub fn principal_ln(w: C64) -> C64 {
    if w.im == 0.0 && w.re < 0.0 {
        C64::new((-w.re).ln(), std::f64::consts::PI)
    } else {
        w.ln()
    }
}

fn int_pow(base: C64, n: i32) -> Result<C64, EvalError> {
    let mut e = n.unsigned_abs();
    let mut acc = C64::new(1.0, 0.0);
    let mut b = base;
    while e > 0 {
        if e & 1 == 1 {
            acc *= b;
        }
        b *= b;
        e >>= 1;
    }
    if n < 0 {
        if acc == C64::new(0.0, 0.0) {
            return Err(EvalError::DivisionByZero);
        }
        acc = C64::new(1.0, 0.0) / acc;
    }
    Ok(acc)
}

impl Expr {
    pub fn eval(&self, z: C64) -> Result<C64, EvalError> {
        Ok(match self {
            Expr::Number(c) => *c,
            Expr::Variable => z,
            Expr::Add(a, b) => a.eval(z)? + b.eval(z)?,
            Expr::Sub(a, b) => a.eval(z)? - b.eval(z)?,
            Expr::Mul(a, b) => a.eval(z)? * b.eval(z)?,
            Expr::Div(a, b) => {
                let num = a.eval(z)?;
                let den = b.eval(z)?;
                if den.re == 0.0 && den.im == 0.0 {
                    return Err(EvalError::DivisionByZero);
                }
                num / den
            }
            Expr::Neg(a) => -a.eval(z)?,
            Expr::Pow(a, n) => int_pow(a.eval(z)?, *n)?,
            Expr::Sqrt(a) => principal_sqrt(a.eval(z)?),
            Expr::Exp(a) => a.eval(z)?.exp(),
            Expr::Log(a) => {
                let w = a.eval(z)?;
                if w.re == 0.0 && w.im == 0.0 {
                    return Err(EvalError::LogOfZero);
                }
                principal_ln(w)
            }
        })
    }
}

fn fmt_number(c: &C64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if c.im == 0.0 && c.re >= 0.0 && !c.re.is_sign_negative() {
        write!(f, "{}", c.re)
    } else if c.re == 0.0 && c.im == 1.0 {
        write!(f, "i")
    } else if c.im == 0.0 {
        write!(f, "(-{})", -c.re)
    } else {
        write!(f, "({}+({})*i)", c.re, c.im)
    }
}

/// Canonical fully parenthesized form; parsing the output reproduces the tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Number(c) => fmt_number(c, f),
            Expr::Variable => write!(f, "t"),
            Expr::Add(a, b) => write!(f, "({a}+{b})"),
            Expr::Sub(a, b) => write!(f, "({a}-{b})"),
            Expr::Mul(a, b) => write!(f, "({a}*{b})"),
            Expr::Div(a, b) => write!(f, "({a}/{b})"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Pow(a, n) => write!(f, "({a}^{n})"),
            Expr::Sqrt(a) => write!(f, "sqrt({a})"),
            Expr::Exp(a) => write!(f, "exp({a})"),
            Expr::Log(a) => write!(f, "log({a})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn num(v: f64) -> Box<Expr> {
        Box::new(Expr::Number(C64::new(v, 0.0)))
    }

    fn var() -> Box<Expr> {
        Box::new(Expr::Variable)
    }

    fn imag() -> Box<Expr> {
        Box::new(Expr::Number(C64::new(0.0, 1.0)))
    }

    #[test]
    fn parses_eq1_rational_part() {
        let e = parse("(t-i+2)/(t+i+3/2)").unwrap();
        let num_side = Expr::Add(Box::new(Expr::Sub(var(), imag())), num(2.0));
        let den_side = Expr::Add(
            Box::new(Expr::Add(var(), imag())),
            Box::new(Expr::Div(num(3.0), num(2.0))),
        );
        assert_eq!(e, Expr::Div(Box::new(num_side), Box::new(den_side)));
    }

    #[test]
    fn parses_minus_factor() {
        let e = parse("sqrt((t-i-1/2)/(t-2*i))*(t-i+2)").unwrap();
        match e {
            Expr::Mul(lhs, rhs) => {
                assert!(matches!(*lhs, Expr::Sqrt(_)));
                assert!(matches!(*rhs, Expr::Add(_, _)));
            }
            other => panic!("unexpected tree {other:?}"),
        }
    }

    #[test]
    fn incomplete_input_reports_offset() {
        let err = parse("t+").unwrap_err();
        assert_eq!(err.offset, 2);
        assert!(err.expected.contains(&"number"));
        assert!(err.expected.contains(&"'('"));
    }

    #[test]
    fn other_syntax_errors() {
        assert_eq!(parse("(t").unwrap_err().offset, 2);
        assert_eq!(parse("t^1.5").unwrap_err().offset, 2);
        assert_eq!(parse("t t").unwrap_err().offset, 2);
        assert_eq!(parse("sin(t)").unwrap_err().offset, 0);
        assert_eq!(parse("").unwrap_err().offset, 0);
        assert_eq!(parse("2 # 3").unwrap_err().offset, 2);
    }

    #[test]
    fn power_binds_tighter_than_negation() {
        assert_eq!(parse("-t^2").unwrap(), Expr::Neg(Box::new(Expr::Pow(var(), 2))));
        assert_eq!(parse("t^-2").unwrap(), Expr::Pow(var(), -2));
        let v = parse("-t^2").unwrap().eval(C64::new(3.0, 0.0)).unwrap();
        assert_eq!(v, C64::new(-9.0, 0.0));
    }

    #[test]
    fn left_associative() {
        let v = parse("8/4/2").unwrap().eval(C64::new(0.0, 0.0)).unwrap();
        assert_eq!(v, C64::new(1.0, 0.0));
        let v = parse("1-2-3").unwrap().eval(C64::new(0.0, 0.0)).unwrap();
        assert_eq!(v, C64::new(-4.0, 0.0));
    }

    #[test]
    fn i_squared() {
        let v = parse("i*i").unwrap().eval(C64::new(0.7, -2.0)).unwrap();
        assert_eq!(v, C64::new(-1.0, 0.0));
    }

    #[test]
    fn sqrt_branch_on_negative_axis() {
        let e = parse("sqrt(t)").unwrap();
        assert_eq!(e.eval(C64::new(-1.0, 0.0)).unwrap(), C64::new(0.0, 1.0));
        assert_eq!(e.eval(C64::new(-1.0, -0.0)).unwrap(), C64::new(0.0, 1.0));
        let l = parse("log(t)").unwrap().eval(C64::new(-1.0, -0.0)).unwrap();
        assert_eq!(l.im, std::f64::consts::PI);
    }

    #[test]
    fn plus_factor_at_origin() {
        // sqrt(1+i)/(3/2+i); reference digits from a 50-digit mpmath evaluation
        let e = parse("sqrt((t+1/2*i-1/2)/(t+1/2*i))/(t+i+3/2)").unwrap();
        let v = e.eval(C64::new(0.0, 0.0)).unwrap();
        let expected = C64::new(0.647_112_624_850_443_8, -0.128_015_176_192_144_3);
        assert!((v - expected).norm() < 1e-15, "{v}");
    }

    #[test]
    fn singular_evaluations() {
        assert_eq!(parse("1/t").unwrap().eval(C64::new(0.0, 0.0)), Err(EvalError::DivisionByZero));
        assert_eq!(parse("log(t)").unwrap().eval(C64::new(0.0, 0.0)), Err(EvalError::LogOfZero));
        assert_eq!(parse("t^-1").unwrap().eval(C64::new(0.0, 0.0)), Err(EvalError::DivisionByZero));
        assert_eq!(parse("sqrt(t)").unwrap().eval(C64::new(0.0, 0.0)), Ok(C64::new(0.0, 0.0)));
    }

    #[test]
    fn numbers_and_synonyms() {
        let e = parse(" 1.5e1 + .5 * z ").unwrap();
        assert_eq!(e.eval(C64::new(2.0, 0.0)).unwrap(), C64::new(16.0, 0.0));
        assert!(parse("2e").is_err());
    }

    #[test]
    fn display_round_trip() {
        for src in ["(t-i+2)/(t+i+3/2)", "-t^2", "exp(-sqrt(t*t))", "log(1/(t^-3))", "0.1*t-1e-7"] {
            let e = parse(src).unwrap();
            assert_eq!(parse(&e.to_string()).unwrap(), e, "{src}");
        }
    }
}
