use thiserror::Error;

use super::grammar::{combinators, param_fits, signature};
use super::{Body, Domain, Expr, ExprList, Func, Node, NodeId, Param, Program, Quant, Token};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at token {position}: expected {}, found {}", expected.join(" | "), found.as_deref().unwrap_or("end of input"))]
    Syntax { position: usize, expected: Vec<String>, found: Option<String> },
    #[error("program has {len} tokens, limit is {max}")]
    Length { len: usize, max: usize },
}

/// Parses a canonical token sequence. Node ids are assigned in pre-order.
pub fn parse(tokens: &[Token], domain: Domain, quant: Quant) -> Result<Program, ParseError> {
    let max = domain.max_program_len();
    if tokens.len() > max {
        return Err(ParseError::Length { len: tokens.len(), max });
    }
    let mut p = Parser { tokens, pos: 0, next_id: 0, domain, quant };
    let body = match domain {
        Domain::Layout => Body::Layout(p.expr()?),
        Domain::Csg2d | Domain::Csg3d => {
            p.expect(Token::Pos, "POS")?;
            let pos = p.list(Some(Token::Neg))?;
            p.expect(Token::Neg, "NEG")?;
            let neg = p.list(None)?;
            Body::Csg { pos, neg }
        }
    };
    if p.pos != tokens.len() {
        return Err(p.error(&["end of input"]));
    }
    Ok(Program::from_parts(domain, quant, body, p.next_id))
}

/// Parses a single shape-typed expression that must span all of `tokens`.
/// Ids start at `first_id`.
pub(crate) fn parse_expr(
    tokens: &[Token],
    domain: Domain,
    quant: Quant,
    first_id: u32,
) -> Result<(Expr, u32), ParseError> {
    let mut p = Parser { tokens, pos: 0, next_id: first_id, domain, quant };
    let e = p.expr()?;
    if p.pos != tokens.len() {
        return Err(p.error(&["end of input"]));
    }
    Ok((e, p.next_id))
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    next_id: u32,
    domain: Domain,
    quant: Quant,
}

impl Parser<'_> {
    fn error(&self, expected: &[&str]) -> ParseError {
        ParseError::Syntax {
            position: self.pos,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.tokens.get(self.pos).map(Token::to_string),
        }
    }

    fn fresh(&mut self) -> NodeId {
        let id = NodeId(self.next_id);
        self.next_id += 1;
        id
    }

    fn expect(&mut self, tok: Token, name: &str) -> Result<(), ParseError> {
        if self.tokens.get(self.pos) == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&[name]))
        }
    }

    fn list(&mut self, stop: Option<Token>) -> Result<ExprList, ParseError> {
        let id = self.fresh();
        let mut items = Vec::new();
        loop {
            match self.tokens.get(self.pos) {
                None if stop.is_none() => break,
                Some(t) if Some(*t) == stop => break,
                None => return Err(self.error(&["NEG", "shape expression"])),
                Some(_) => items.push(self.expr()?),
            }
        }
        Ok(ExprList { id, items })
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let func = match self.tokens.get(self.pos) {
            Some(Token::Func(f)) => *f,
            _ => return Err(self.error(&["shape expression"])),
        };
        let id = self.fresh();
        if func.is_combinator() {
            if !combinators(self.domain).contains(&func) {
                return Err(self.error(&["shape expression"]));
            }
            self.pos += 1;
            let left = self.expr()?;
            let right = self.expr()?;
            return Ok(Expr { id, node: Node::Comb { op: func, children: Box::new([left, right]) } });
        }
        let Some(sig) = signature(self.domain, func) else {
            return Err(self.error(&["shape expression"]));
        };
        self.pos += 1;
        let mut params = Vec::with_capacity(sig.len());
        for slot in sig {
            match self.tokens.get(self.pos) {
                Some(Token::Param(p)) if param_fits(self.domain, self.quant, *slot, *p) => {
                    params.push(*p);
                    self.pos += 1;
                }
                _ => return Err(self.error(&[slot_name(*slot)])),
            }
        }
        if func == Func::Prim {
            let Param::Shape(shape) = params[0] else { unreachable!() };
            return Ok(Expr { id, node: Node::Prim { shape } });
        }
        let child = self.expr()?;
        Ok(Expr { id, node: Node::Transform { func, params, child: Box::new(child) } })
    }
}

fn slot_name(slot: super::ParamSlot) -> &'static str {
    use super::ParamSlot as S;
    match slot {
        S::Quant => "quantized parameter",
        S::Axis => "axis",
        S::Color => "color",
        S::Count => "count",
        S::Shape => "primitive type",
    }
}
