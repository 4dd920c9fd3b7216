//! Recursive descent parser for the textual form of ADL sentences.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! formula     := implication
//! implication := disjunction ( "->" implication )?          (right assoc)
//! disjunction := conjunction ( "|" conjunction )*           (left assoc)
//! conjunction := unary ( "&" unary )*                       (left assoc)
//! unary       := "!" unary | primary
//! primary     := "always" | "never" | number | identifier
//!              | "(" formula ")"
//!              | "(" formula "?" formula ":" formula ")"
//!              | "[" identifier "]" "(" formula ("given" formula)? ")"
//!              | "exists" "(" identifier ")"
//! ```
//!
//! Numbers are decimal literals in [0, 1]. Identifiers are
//! `[A-Za-z_][A-Za-z0-9_]*` minus the keywords. `#` starts a line comment.
//! Sugar operators desugar while parsing, so the resulting tree contains
//! only primitive nodes.

use crate::ast::Formula;

/// Maximum formula nesting accepted by the parser. Keeps pathological
/// inputs from overflowing the stack; failures stay ordinary errors.
const MAX_DEPTH: usize = 256;

/// A positioned syntax error. `offset` counts characters, not bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub message: String,
    pub offset: usize,
    pub expected: Vec<String>,
}

impl std::fmt::Display for ParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "at offset {}: {}", self.offset, self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected {})", self.expected.join(", "))?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseError {}

impl ParseError {
    fn new(message: impl Into<String>, offset: usize, expected: &[&str]) -> Self {
        ParseError {
            message: message.into(),
            offset,
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Always,
    Never,
    Given,
    Exists,
    Ident(String),
    Number(f64),
    Bang,
    Amp,
    Pipe,
    Arrow,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Question,
    Colon,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Always => "`always`".into(),
            Tok::Never => "`never`".into(),
            Tok::Given => "`given`".into(),
            Tok::Exists => "`exists`".into(),
            Tok::Ident(name) => format!("identifier `{name}`"),
            Tok::Number(_) => "number".into(),
            Tok::Bang => "`!`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Pipe => "`|`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Question => "`?`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

struct Token {
    tok: Tok,
    offset: usize,
}

fn lex(input: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = input.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let tok = match c {
            '!' => {
                i += 1;
                Tok::Bang
            }
            '&' => {
                i += 1;
                Tok::Amp
            }
            '|' => {
                i += 1;
                Tok::Pipe
            }
            '(' => {
                i += 1;
                Tok::LParen
            }
            ')' => {
                i += 1;
                Tok::RParen
            }
            '[' => {
                i += 1;
                Tok::LBracket
            }
            ']' => {
                i += 1;
                Tok::RBracket
            }
            '?' => {
                i += 1;
                Tok::Question
            }
            ':' => {
                i += 1;
                Tok::Colon
            }
            '-' => {
                if chars.get(i + 1) == Some(&'>') {
                    i += 2;
                    Tok::Arrow
                } else {
                    return Err(ParseError::new("unexpected `-`", start, &["`->`"]));
                }
            }
            c if c.is_ascii_digit() => {
                let mut text = String::new();
                while i < chars.len() && chars[i].is_ascii_digit() {
                    text.push(chars[i]);
                    i += 1;
                }
                if chars.get(i) == Some(&'.') {
                    if !chars.get(i + 1).is_some_and(|c| c.is_ascii_digit()) {
                        return Err(ParseError::new(
                            "expected digits after decimal point",
                            i,
                            &["digit"],
                        ));
                    }
                    text.push('.');
                    i += 1;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        text.push(chars[i]);
                        i += 1;
                    }
                }
                let value: f64 = text
                    .parse()
                    .map_err(|_| ParseError::new(format!("invalid number `{text}`"), start, &[]))?;
                if !(0.0..=1.0).contains(&value) {
                    return Err(ParseError::new(
                        format!("probability {text} is outside [0, 1]"),
                        start,
                        &[],
                    ));
                }
                Tok::Number(value)
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut text = String::new();
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    text.push(chars[i]);
                    i += 1;
                }
                match text.as_str() {
                    "always" => Tok::Always,
                    "never" => Tok::Never,
                    "given" => Tok::Given,
                    "exists" => Tok::Exists,
                    _ => Tok::Ident(text),
                }
            }
            other => {
                return Err(ParseError::new(
                    format!("unexpected character `{other}`"),
                    start,
                    &[],
                ));
            }
        };
        tokens.push(Token { tok, offset: start });
    }
    tokens.push(Token {
        tok: Tok::Eof,
        offset: chars.len(),
    });
    Ok(tokens)
}

/// Parses `input` into a [`Formula`]. Never panics; every failure is a
/// positioned [`ParseError`].
pub fn parse(input: &str) -> Result<Formula, ParseError> {
    let tokens = lex(input)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        depth: 0,
    };
    let formula = parser.implication()?;
    let next = parser.peek();
    if next.tok != Tok::Eof {
        return Err(ParseError::new(
            format!("unexpected {} after formula", next.tok.describe()),
            next.offset,
            &["end of input"],
        ));
    }
    Ok(formula)
}

impl std::str::FromStr for Formula {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    depth: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn advance(&mut self) -> &Token {
        let token = &self.tokens[self.pos];
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        token
    }

    fn eat(&mut self, expected: &Tok, description: &str) -> Result<(), ParseError> {
        if &self.peek().tok == expected {
            self.advance();
            Ok(())
        } else {
            let found = self.peek();
            Err(ParseError::new(
                format!("unexpected {}", found.tok.describe()),
                found.offset,
                &[description],
            ))
        }
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            let offset = self.peek().offset;
            return Err(ParseError::new("formula is nested too deeply", offset, &[]));
        }
        Ok(())
    }

    fn leave(&mut self) {
        self.depth -= 1;
    }

    fn implication(&mut self) -> Result<Formula, ParseError> {
        self.enter()?;
        let lhs = self.disjunction()?;
        let result = if self.peek().tok == Tok::Arrow {
            self.advance();
            // Right associative.
            let rhs = self.implication()?;
            lhs.implies(rhs)
        } else {
            lhs
        };
        self.leave();
        Ok(result)
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.conjunction()?;
        while self.peek().tok == Tok::Pipe {
            self.advance();
            let rhs = self.conjunction()?;
            lhs = lhs.or(rhs);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.unary()?;
        while self.peek().tok == Tok::Amp {
            self.advance();
            let rhs = self.unary()?;
            lhs = lhs.and(rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        if self.peek().tok == Tok::Bang {
            self.enter()?;
            self.advance();
            let operand = self.unary()?;
            self.leave();
            Ok(operand.negate())
        } else {
            self.primary()
        }
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        let token = self.advance();
        let offset = token.offset;
        match token.tok.clone() {
            Tok::Always => Ok(Formula::Always),
            Tok::Never => Ok(Formula::Never),
            Tok::Number(value) => Ok(Formula::Prob(value)),
            Tok::Ident(name) => Ok(Formula::Atom(name)),
            Tok::LParen => {
                let first = self.implication()?;
                if self.peek().tok == Tok::Question {
                    self.advance();
                    let if_yes = self.implication()?;
                    self.eat(&Tok::Colon, "`:`")?;
                    let if_no = self.implication()?;
                    self.eat(&Tok::RParen, "`)`")?;
                    Ok(Formula::conditional(first, if_yes, if_no))
                } else {
                    self.eat(&Tok::RParen, "`)` or `?`")?;
                    Ok(first)
                }
            }
            Tok::LBracket => {
                let role = self.role_name()?;
                self.eat(&Tok::RBracket, "`]`")?;
                self.eat(&Tok::LParen, "`(`")?;
                let body = self.implication()?;
                let condition = if self.peek().tok == Tok::Given {
                    self.advance();
                    self.implication()?
                } else {
                    Formula::Always
                };
                self.eat(&Tok::RParen, "`)`")?;
                Ok(Formula::Expectation {
                    role,
                    body: Box::new(body),
                    condition: Box::new(condition),
                })
            }
            Tok::Exists => {
                self.eat(&Tok::LParen, "`(`")?;
                let role = self.role_name()?;
                self.eat(&Tok::RParen, "`)`")?;
                Ok(Formula::Exists { role })
            }
            other => Err(ParseError::new(
                format!("unexpected {}", other.describe()),
                offset,
                &[
                    "`always`",
                    "`never`",
                    "number",
                    "identifier",
                    "`!`",
                    "`(`",
                    "`[`",
                    "`exists`",
                ],
            )),
        }
    }

    fn role_name(&mut self) -> Result<String, ParseError> {
        let token = self.advance();
        match token.tok.clone() {
            Tok::Ident(name) => Ok(name),
            other => Err(ParseError::new(
                format!("unexpected {}", other.describe()),
                token.offset,
                &["role name"],
            )),
        }
    }
}
