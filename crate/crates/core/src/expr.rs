//! Lexer, parser and printer for univariate real expressions in `t`.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' unary)?          right-associative
//! atom    := number | 't' | func '(' sum ')' | '(' sum ')'
//! ```
//!
//! Unary minus binds looser than `^` (so `-t^2` is `-(t^2)`) and tighter
//! than the binary operators (so `-t+1` is `(-t)+1`).

use std::fmt;

use thiserror::Error;

/// The only variable name accepted by the parser.
pub const VARIABLE: &str = "t";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Number,
    Identifier,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    /// Character offset of the first character of the lexeme.
    pub position: usize,
}

/// Elementary functions with a jet recurrence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Ln,
    Sin,
    Cos,
    Sqrt,
}

impl Func {
    pub const ALL: [Func; 5] = [Func::Exp, Func::Ln, Func::Sin, Func::Cos, Func::Sqrt];

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }

    pub fn apply(self, x: f64) -> f64 {
        match self {
            Func::Exp => x.exp(),
            Func::Ln => x.ln(),
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Sqrt => x.sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Constant(f64),
    Variable,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("unknown character at offset {0}")]
    UnknownCharacter(usize),
    #[error("malformed number at offset {0}")]
    MalformedNumber(usize),
    #[error("unexpected token at offset {0}")]
    UnexpectedToken(usize),
    #[error("unknown function `{0}` at offset {1}")]
    UnknownFunction(String, usize),
    #[error("unknown variable `{0}` at offset {1}; only `t` is allowed")]
    UnknownVariable(String, usize),
    #[error("unbalanced parentheses at offset {0}")]
    UnbalancedParens(usize),
}

impl ParseError {
    pub fn position(&self) -> usize {
        match self {
            ParseError::UnknownCharacter(p)
            | ParseError::MalformedNumber(p)
            | ParseError::UnexpectedToken(p)
            | ParseError::UnknownFunction(_, p)
            | ParseError::UnknownVariable(_, p)
            | ParseError::UnbalancedParens(p) => *p,
        }
    }
}

pub fn tokenize(source: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = source.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let single = match c {
            '+' => Some(TokenKind::Plus),
            '-' => Some(TokenKind::Minus),
            '*' => Some(TokenKind::Star),
            '/' => Some(TokenKind::Slash),
            '^' => Some(TokenKind::Caret),
            '(' => Some(TokenKind::LParen),
            ')' => Some(TokenKind::RParen),
            ',' => Some(TokenKind::Comma),
            _ => None,
        };
        if let Some(kind) = single {
            tokens.push(Token {
                kind,
                lexeme: c.to_string(),
                position: i,
            });
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let end = scan_number(&chars, i)?;
            let lexeme: String = chars[i..end].iter().collect();
            match lexeme.parse::<f64>() {
                Ok(v) if v.is_finite() => {}
                _ => return Err(ParseError::MalformedNumber(i)),
            }
            tokens.push(Token {
                kind: TokenKind::Number,
                lexeme,
                position: i,
            });
            i = end;
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            tokens.push(Token {
                kind: TokenKind::Identifier,
                lexeme: chars[start..i].iter().collect(),
                position: start,
            });
        } else {
            return Err(ParseError::UnknownCharacter(i));
        }
    }
    Ok(tokens)
}

/// Returns the end offset of the numeric literal starting at `start`.
/// A decimal point must be followed by a digit; an exponent is taken only
/// when `e`/`E` is followed by an optional sign and a digit.
fn scan_number(chars: &[char], start: usize) -> Result<usize, ParseError> {
    let digits = |mut i: usize| {
        while i < chars.len() && chars[i].is_ascii_digit() {
            i += 1;
        }
        i
    };
    let mut i = digits(start);
    if i < chars.len() && chars[i] == '.' {
        let dot = i;
        let after = digits(dot + 1);
        if after == dot + 1 {
            return Err(ParseError::MalformedNumber(dot));
        }
        i = after;
        if i < chars.len() && chars[i] == '.' {
            return Err(ParseError::MalformedNumber(dot));
        }
    }
    if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
        let mut j = i + 1;
        if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
            j += 1;
        }
        if j < chars.len() && chars[j].is_ascii_digit() {
            i = digits(j);
        }
    }
    Ok(i)
}

pub fn parse(tokens: &[Token]) -> Result<Expr, ParseError> {
    let end = tokens
        .last()
        .map(|t| t.position + t.lexeme.chars().count())
        .unwrap_or(0);
    let mut parser = Parser {
        tokens,
        pos: 0,
        end,
        open: Vec::new(),
    };
    let expr = parser.sum()?;
    if let Some(tok) = parser.peek() {
        return Err(match tok.kind {
            TokenKind::RParen => ParseError::UnbalancedParens(tok.position),
            _ => ParseError::UnexpectedToken(tok.position),
        });
    }
    Ok(expr)
}

/// Tokenizes and parses in one step.
pub fn parse_str(source: &str) -> Result<Expr, ParseError> {
    parse(&tokenize(source)?)
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    end: usize,
    /// Offsets of currently unmatched opening parentheses.
    open: Vec<usize>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.tokens.get(self.pos)
    }

    fn peek_kind(&self) -> Option<TokenKind> {
        self.peek().map(|t| t.kind)
    }

    fn bump(&mut self) -> Option<&'a Token> {
        let tok = self.tokens.get(self.pos);
        self.pos += 1;
        tok
    }

    fn unexpected(&self) -> ParseError {
        match self.peek() {
            Some(tok) => ParseError::UnexpectedToken(tok.position),
            None => match self.open.last() {
                Some(&p) => ParseError::UnbalancedParens(p),
                None => ParseError::UnexpectedToken(self.end),
            },
        }
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.product()?;
        loop {
            match self.peek_kind() {
                Some(TokenKind::Plus) => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.product()?));
                }
                Some(TokenKind::Minus) => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.product()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek_kind() {
                Some(TokenKind::Star) => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Some(TokenKind::Slash) => {
                    self.bump();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek_kind() == Some(TokenKind::Minus) {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.peek_kind() == Some(TokenKind::Caret) {
            self.bump();
            let exponent = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let Some(tok) = self.peek() else {
            return Err(self.unexpected());
        };
        match tok.kind {
            TokenKind::Number => {
                self.bump();
                let value = tok
                    .lexeme
                    .parse::<f64>()
                    .map_err(|_| ParseError::MalformedNumber(tok.position))?;
                Ok(Expr::Constant(value))
            }
            TokenKind::Identifier => {
                self.bump();
                if self.peek_kind() == Some(TokenKind::LParen) {
                    let func = Func::from_name(&tok.lexeme).ok_or_else(|| {
                        ParseError::UnknownFunction(tok.lexeme.clone(), tok.position)
                    })?;
                    let arg = self.group()?;
                    Ok(Expr::Call(func, Box::new(arg)))
                } else if tok.lexeme == VARIABLE {
                    Ok(Expr::Variable)
                } else if Func::from_name(&tok.lexeme).is_some() {
                    // function name without an argument list
                    Err(self.unexpected())
                } else {
                    Err(ParseError::UnknownVariable(
                        tok.lexeme.clone(),
                        tok.position,
                    ))
                }
            }
            TokenKind::LParen => self.group(),
            TokenKind::RParen => Err(if self.open.is_empty() {
                ParseError::UnbalancedParens(tok.position)
            } else {
                ParseError::UnexpectedToken(tok.position)
            }),
            _ => Err(ParseError::UnexpectedToken(tok.position)),
        }
    }

    /// Parses `'(' sum ')'`; the current token must be the opening paren.
    fn group(&mut self) -> Result<Expr, ParseError> {
        let open = self.bump().expect("caller checked for '('");
        self.open.push(open.position);
        let inner = self.sum()?;
        match self.peek_kind() {
            Some(TokenKind::RParen) => {
                self.bump();
                self.open.pop();
                Ok(inner)
            }
            Some(_) => Err(self.unexpected()),
            None => Err(ParseError::UnbalancedParens(open.position)),
        }
    }
}

/// Canonical fully-parenthesized rendering; `parse_str(&format(e))`
/// reproduces `e` for any tree with non-negative finite constants.
pub fn format(expr: &Expr) -> String {
    expr.to_string()
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Constant(v) => write!(f, "{v}"),
            Expr::Variable => f.write_str(VARIABLE),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a}+{b})"),
            Expr::Sub(a, b) => write!(f, "({a}-{b})"),
            Expr::Mul(a, b) => write!(f, "({a}*{b})"),
            Expr::Div(a, b) => write!(f, "({a}/{b})"),
            Expr::Pow(a, b) => write!(f, "({a}^{b})"),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

impl Expr {
    /// Plain floating-point evaluation at `t`.
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Expr::Constant(v) => *v,
            Expr::Variable => t,
            Expr::Neg(a) => -a.eval(t),
            Expr::Add(a, b) => a.eval(t) + b.eval(t),
            Expr::Sub(a, b) => a.eval(t) - b.eval(t),
            Expr::Mul(a, b) => a.eval(t) * b.eval(t),
            Expr::Div(a, b) => a.eval(t) / b.eval(t),
            Expr::Pow(a, b) => a.eval(t).powf(b.eval(t)),
            Expr::Call(func, a) => func.apply(a.eval(t)),
        }
    }

    /// True when the subtree does not mention `t`.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Constant(_) => true,
            Expr::Variable => false,
            Expr::Neg(a) | Expr::Call(_, a) => a.is_constant(),
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Div(a, b)
            | Expr::Pow(a, b) => a.is_constant() && b.is_constant(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Expr::Constant(_) | Expr::Variable => 1,
            Expr::Neg(a) | Expr::Call(_, a) => 1 + a.depth(),
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Div(a, b)
            | Expr::Pow(a, b) => 1 + a.depth().max(b.depth()),
        }
    }
}

impl std::str::FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_str(s)
    }
}
