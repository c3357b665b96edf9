//! A small analytic-expression language for scenario files: arithmetic over
//! a whitelisted set of functions (`sin`, `cos`, `exp`), the constant `pi`,
//! and the variables permitted by the calling context.

use std::fmt;

/// Variables an expression may reference; the allowed set depends on where
/// the expression appears (signals use `t`, `x`; initial fields use `x`, `y`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    T,
    X,
    Y,
}

impl Var {
    fn name(self) -> &'static str {
        match self {
            Var::T => "t",
            Var::X => "x",
            Var::Y => "y",
        }
    }
}

/// Parse error with the byte offset of the offending token.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprError {
    pub offset: usize,
    pub message: String,
}

impl fmt::Display for ExprError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (at offset {})", self.message, self.offset)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Exp(Box<Expr>),
}

impl Expr {
    /// Parse `src`, permitting only the listed variables.
    pub fn parse(src: &str, allowed: &[Var]) -> Result<Expr, ExprError> {
        let tokens = lex(src)?;
        let mut parser = Parser {
            tokens: &tokens,
            pos: 0,
            allowed,
            src_len: src.len(),
        };
        let e = parser.expression()?;
        if parser.pos != parser.tokens.len() {
            let tok = &parser.tokens[parser.pos];
            return Err(ExprError {
                offset: tok.offset,
                message: format!("unexpected trailing token '{}'", tok.kind),
            });
        }
        Ok(e)
    }

    /// Evaluate with the given variable values (unused ones are ignored).
    pub fn eval(&self, t: f64, x: f64, y: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var(Var::T) => t,
            Expr::Var(Var::X) => x,
            Expr::Var(Var::Y) => y,
            Expr::Neg(a) => -a.eval(t, x, y),
            Expr::Add(a, b) => a.eval(t, x, y) + b.eval(t, x, y),
            Expr::Sub(a, b) => a.eval(t, x, y) - b.eval(t, x, y),
            Expr::Mul(a, b) => a.eval(t, x, y) * b.eval(t, x, y),
            Expr::Div(a, b) => a.eval(t, x, y) / b.eval(t, x, y),
            Expr::Pow(a, b) => a.eval(t, x, y).powf(b.eval(t, x, y)),
            Expr::Sin(a) => a.eval(t, x, y).sin(),
            Expr::Cos(a) => a.eval(t, x, y).cos(),
            Expr::Exp(a) => a.eval(t, x, y).exp(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum TokenKind {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Num(v) => write!(f, "{v}"),
            TokenKind::Ident(s) => write!(f, "{s}"),
            TokenKind::Plus => write!(f, "+"),
            TokenKind::Minus => write!(f, "-"),
            TokenKind::Star => write!(f, "*"),
            TokenKind::Slash => write!(f, "/"),
            TokenKind::Caret => write!(f, "^"),
            TokenKind::LParen => write!(f, "("),
            TokenKind::RParen => write!(f, ")"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokenKind,
    offset: usize,
}

fn lex(src: &str) -> Result<Vec<Token>, ExprError> {
    let bytes = src.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let offset = i;
        match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
            }
            '+' | '-' | '*' | '/' | '^' | '(' | ')' => {
                let kind = match c {
                    '+' => TokenKind::Plus,
                    '-' => TokenKind::Minus,
                    '*' => TokenKind::Star,
                    '/' => TokenKind::Slash,
                    '^' => TokenKind::Caret,
                    '(' => TokenKind::LParen,
                    _ => TokenKind::RParen,
                };
                tokens.push(Token { kind, offset });
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut k = i + 1;
                    if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                        k += 1;
                    }
                    if k < bytes.len() && bytes[k].is_ascii_digit() {
                        i = k;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &src[start..i];
                let value: f64 = text.parse().map_err(|_| ExprError {
                    offset: start,
                    message: format!("malformed number '{text}'"),
                })?;
                tokens.push(Token {
                    kind: TokenKind::Num(value),
                    offset,
                });
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len()
                    && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                tokens.push(Token {
                    kind: TokenKind::Ident(src[start..i].to_string()),
                    offset,
                });
            }
            _ => {
                return Err(ExprError {
                    offset,
                    message: format!("unexpected character '{c}'"),
                })
            }
        }
    }
    Ok(tokens)
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    allowed: &'a [Var],
    src_len: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn eof_error(&self, expected: &str) -> ExprError {
        ExprError {
            offset: self.src_len,
            message: format!("expected {expected}, found end of expression"),
        }
    }

    fn expression(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        while let Some(tok) = self.peek() {
            match tok.kind {
                TokenKind::Plus => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = Expr::Add(Box::new(lhs), Box::new(rhs));
                }
                TokenKind::Minus => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(rhs));
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        while let Some(tok) = self.peek() {
            match tok.kind {
                TokenKind::Star => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(rhs));
                }
                TokenKind::Slash => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    lhs = Expr::Div(Box::new(lhs), Box::new(rhs));
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if let Some(tok) = self.peek() {
            if tok.kind == TokenKind::Minus {
                self.pos += 1;
                let inner = self.unary()?;
                return Ok(Expr::Neg(Box::new(inner)));
            }
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.primary()?;
        if let Some(tok) = self.peek() {
            if tok.kind == TokenKind::Caret {
                self.pos += 1;
                let exponent = self.unary()?;
                return Ok(Expr::Pow(Box::new(base), Box::new(exponent)));
            }
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ExprError> {
        let tok = self
            .peek()
            .cloned()
            .ok_or_else(|| self.eof_error("a value"))?;
        match tok.kind {
            TokenKind::Num(v) => {
                self.pos += 1;
                Ok(Expr::Num(v))
            }
            TokenKind::LParen => {
                self.pos += 1;
                let inner = self.expression()?;
                match self.peek() {
                    Some(t) if t.kind == TokenKind::RParen => {
                        self.pos += 1;
                        Ok(inner)
                    }
                    Some(t) => Err(ExprError {
                        offset: t.offset,
                        message: format!("expected ')', found '{}'", t.kind),
                    }),
                    None => Err(self.eof_error("')'")),
                }
            }
            TokenKind::Ident(name) => {
                self.pos += 1;
                match name.as_str() {
                    "pi" => Ok(Expr::Num(std::f64::consts::PI)),
                    "sin" | "cos" | "exp" => {
                        let arg = self.function_argument(&name, tok.offset)?;
                        Ok(match name.as_str() {
                            "sin" => Expr::Sin(Box::new(arg)),
                            "cos" => Expr::Cos(Box::new(arg)),
                            _ => Expr::Exp(Box::new(arg)),
                        })
                    }
                    "t" | "x" | "y" => {
                        let var = match name.as_str() {
                            "t" => Var::T,
                            "x" => Var::X,
                            _ => Var::Y,
                        };
                        if !self.allowed.contains(&var) {
                            return Err(ExprError {
                                offset: tok.offset,
                                message: format!(
                                    "variable '{}' is not available here (allowed: {})",
                                    var.name(),
                                    self.allowed
                                        .iter()
                                        .map(|v| v.name())
                                        .collect::<Vec<_>>()
                                        .join(", ")
                                ),
                            });
                        }
                        Ok(Expr::Var(var))
                    }
                    other => Err(ExprError {
                        offset: tok.offset,
                        message: format!(
                            "unknown name '{other}' (functions: sin, cos, exp; constant: pi)"
                        ),
                    }),
                }
            }
            other => Err(ExprError {
                offset: tok.offset,
                message: format!("expected a value, found '{other}'"),
            }),
        }
    }

    fn function_argument(&mut self, name: &str, at: usize) -> Result<Expr, ExprError> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::LParen => {
                self.pos += 1;
            }
            Some(t) => {
                return Err(ExprError {
                    offset: t.offset,
                    message: format!("expected '(' after '{name}', found '{}'", t.kind),
                })
            }
            None => {
                return Err(ExprError {
                    offset: at + name.len(),
                    message: format!("expected '(' after '{name}', found end of expression"),
                })
            }
        }
        let arg = self.expression()?;
        match self.peek() {
            Some(t) if t.kind == TokenKind::RParen => {
                self.pos += 1;
                Ok(arg)
            }
            Some(t) => Err(ExprError {
                offset: t.offset,
                message: format!("expected ')', found '{}'", t.kind),
            }),
            None => Err(self.eof_error("')'")),
        }
    }
}
