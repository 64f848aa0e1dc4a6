//! Human-readable surface syntax.
//!
//! ```text
//! layout  = expr
//! csg     = "POS" "(" [ expr { "," expr } ] ")" "NEG" "(" [ expr { "," expr } ] ")"
//! expr    = comb "(" expr "," expr ")"
//!         | "Prim" "(" shape ")"
//!         | transform "(" param { "," param } ")" "(" expr ")"
//! ```
//!
//! Quantized parameters are written as decimal numbers and snap to the nearest
//! grid value. `#` starts a comment that runs to the end of the line.

use thiserror::Error;

use super::grammar::{combinators, signature};
use super::{param_from_word, tokens, Domain, Func, Param, ParamSlot, Program, Quant, Token};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct TextSyntaxError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Lexeme {
    Ident(String),
    Number(String),
    Open,
    Close,
    Comma,
}

#[derive(Debug, Clone)]
struct Lexed {
    lexeme: Lexeme,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Lexed>, TextSyntaxError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut column) = (1, 1);
    while let Some(&c) = chars.peek() {
        let (l, col) = (line, column);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars<'_>>| {
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                column = 1;
            } else {
                column += 1;
            }
            c
        };
        match c {
            '#' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    bump(&mut chars);
                }
            }
            c if c.is_whitespace() || c == ';' => {
                bump(&mut chars);
            }
            '(' | ')' | ',' => {
                bump(&mut chars);
                let lexeme = match c {
                    '(' => Lexeme::Open,
                    ')' => Lexeme::Close,
                    _ => Lexeme::Comma,
                };
                out.push(Lexed { lexeme, line: l, column: col });
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if !(c.is_ascii_alphanumeric() || c == '_') {
                        break;
                    }
                    s.push(c);
                    bump(&mut chars);
                }
                out.push(Lexed { lexeme: Lexeme::Ident(s), line: l, column: col });
            }
            c if c.is_ascii_digit() || c == '-' || c == '+' || c == '.' => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if !(c.is_ascii_digit() || matches!(c, '-' | '+' | '.' | 'e' | 'E')) {
                        break;
                    }
                    s.push(c);
                    bump(&mut chars);
                }
                out.push(Lexed { lexeme: Lexeme::Number(s), line: l, column: col });
            }
            other => {
                return Err(TextSyntaxError {
                    line: l,
                    column: col,
                    message: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    Ok(out)
}

struct TextParser {
    items: Vec<Lexed>,
    pos: usize,
    domain: Domain,
    quant: Quant,
    end: (usize, usize),
}

impl TextParser {
    fn err(&self, message: impl Into<String>) -> TextSyntaxError {
        let (line, column) = self
            .items
            .get(self.pos)
            .map(|l| (l.line, l.column))
            .unwrap_or(self.end);
        TextSyntaxError { line, column, message: message.into() }
    }

    fn peek(&self) -> Option<&Lexeme> {
        self.items.get(self.pos).map(|l| &l.lexeme)
    }

    fn punct(&mut self, want: Lexeme, name: &str) -> Result<(), TextSyntaxError> {
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected `{name}`, found {}", self.describe())))
        }
    }

    fn describe(&self) -> String {
        match self.peek() {
            None => "end of input".into(),
            Some(Lexeme::Ident(s)) | Some(Lexeme::Number(s)) => format!("`{s}`"),
            Some(Lexeme::Open) => "`(`".into(),
            Some(Lexeme::Close) => "`)`".into(),
            Some(Lexeme::Comma) => "`,`".into(),
        }
    }

    fn program(&mut self, out: &mut Vec<Token>) -> Result<(), TextSyntaxError> {
        if !self.domain.is_csg() {
            return self.expr(out);
        }
        for (kw, tok) in [("POS", Token::Pos), ("NEG", Token::Neg)] {
            match self.peek() {
                Some(Lexeme::Ident(s)) if s.eq_ignore_ascii_case(kw) => self.pos += 1,
                _ => return Err(self.err(format!("expected `{kw}`, found {}", self.describe()))),
            }
            out.push(tok);
            self.punct(Lexeme::Open, "(")?;
            if self.peek() != Some(&Lexeme::Close) {
                loop {
                    self.expr(out)?;
                    if self.peek() == Some(&Lexeme::Comma) {
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
            }
            self.punct(Lexeme::Close, ")")?;
        }
        Ok(())
    }

    fn expr(&mut self, out: &mut Vec<Token>) -> Result<(), TextSyntaxError> {
        let name = match self.peek() {
            Some(Lexeme::Ident(s)) => s.clone(),
            _ => return Err(self.err(format!("expected a shape expression, found {}", self.describe()))),
        };
        let func = Func::from_name(&name).ok_or_else(|| self.err(format!("unknown function `{name}`")))?;
        let valid = combinators(self.domain).contains(&func) || signature(self.domain, func).is_some();
        if !valid {
            return Err(self.err(format!("function `{name}` is not part of the {} language", self.domain)));
        }
        self.pos += 1;
        out.push(Token::Func(func));
        self.punct(Lexeme::Open, "(")?;
        if func.is_combinator() {
            self.expr(out)?;
            self.punct(Lexeme::Comma, ",")?;
            self.expr(out)?;
            return self.punct(Lexeme::Close, ")");
        }
        let sig = signature(self.domain, func).expect("checked above");
        for (i, slot) in sig.iter().enumerate() {
            if i > 0 {
                self.punct(Lexeme::Comma, ",")?;
            }
            let p = self.param(*slot)?;
            out.push(Token::Param(p));
        }
        self.punct(Lexeme::Close, ")")?;
        if func == Func::Prim {
            return Ok(());
        }
        self.punct(Lexeme::Open, "(")?;
        self.expr(out)?;
        self.punct(Lexeme::Close, ")")
    }

    fn param(&mut self, slot: ParamSlot) -> Result<Param, TextSyntaxError> {
        let lexeme = self.peek().cloned();
        let param = match (slot, lexeme) {
            (ParamSlot::Quant, Some(Lexeme::Number(s))) => {
                let v: f64 = s.parse().map_err(|_| self.err(format!("bad number `{s}`")))?;
                let idx = self
                    .quant
                    .nearest(v)
                    .ok_or_else(|| self.err(format!("parameter `{s}` outside [-1, 1]")))?;
                Param::Quant(idx)
            }
            (ParamSlot::Count, Some(Lexeme::Number(s))) => {
                let n: u8 = s.parse().map_err(|_| self.err(format!("bad count `{s}`")))?;
                Param::Count(n)
            }
            (_, Some(Lexeme::Ident(s))) => {
                param_from_word(&s).ok_or_else(|| self.err(format!("unknown parameter `{s}`")))?
            }
            _ => return Err(self.err(format!("expected a parameter, found {}", self.describe()))),
        };
        if !super::param_fits(self.domain, self.quant, slot, param) {
            return Err(self.err(format!("parameter not allowed here: {}", self.describe())));
        }
        self.pos += 1;
        Ok(param)
    }
}

fn parser(text: &str, domain: Domain, quant: Quant) -> Result<TextParser, TextSyntaxError> {
    let items = lex(text)?;
    let lines = text.split('\n').count();
    let last = text.rsplit('\n').next().map_or(0, |l| l.chars().count());
    Ok(TextParser { items, pos: 0, domain, quant, end: (lines, last + 1) })
}

fn finish(p: &TextParser, start: usize, toks: &[Token]) -> Result<Program, TextSyntaxError> {
    tokens::parse(toks, p.domain, p.quant).map_err(|e| {
        let at = &p.items[start];
        TextSyntaxError { line: at.line, column: at.column, message: e.to_string() }
    })
}

/// Parses exactly one program.
pub fn parse_text(text: &str, domain: Domain, quant: Quant) -> Result<Program, TextSyntaxError> {
    let mut p = parser(text, domain, quant)?;
    let mut toks = Vec::new();
    p.program(&mut toks)?;
    if p.pos != p.items.len() {
        return Err(p.err(format!("trailing input {}", p.describe())));
    }
    finish(&p, 0, &toks)
}

/// Parses a sequence of programs; layout and line breaks are free.
pub fn parse_text_many(text: &str, domain: Domain, quant: Quant) -> Result<Vec<Program>, TextSyntaxError> {
    let mut p = parser(text, domain, quant)?;
    let mut out = Vec::new();
    while p.pos < p.items.len() {
        let start = p.pos;
        let mut toks = Vec::new();
        p.program(&mut toks)?;
        out.push(finish(&p, start, &toks)?);
    }
    Ok(out)
}
