//! Vocabulary, expression trees and grammar rules for the Layout, CSG2D and
//! CSG3D languages.
//!
//! A [`Program`] is a typed expression tree. Its canonical token form is the
//! pre-order walk of that tree: every function token is followed by its
//! parameter tokens and then by its shape-typed arguments. CSG programs start
//! with a `POS` token, list their positive sub-expressions, then a `NEG` token
//! and their negative sub-expressions. Arities are fixed by the grammar, so no
//! closing tokens are needed for the encoding to be prefix-free.
//!
//! Every tree node carries a [`NodeId`]. Ids are bookkeeping only: they are not
//! serialized, they are assigned in pre-order by the parser, and they survive
//! edits on untouched nodes.

mod grammar;
mod text;
mod tokens;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::edit::EditKind;

pub use grammar::{combinators, param_fits, shapes, signature, transforms, ParamSlot, COUNT_RANGE};
pub use text::{parse_text, parse_text_many, TextSyntaxError};
pub use tokens::{parse, ParseError};
pub(crate) use grammar::{params_fit as grammar_params_fit, slot_values};
pub(crate) use tokens::parse_expr;

/// One of the three visual languages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Layout,
    Csg2d,
    Csg3d,
}

impl Domain {
    pub const ALL: [Domain; 3] = [Domain::Layout, Domain::Csg2d, Domain::Csg3d];

    /// Maximum program length in tokens.
    pub fn max_program_len(self) -> usize {
        match self {
            Domain::Layout => 128,
            Domain::Csg2d => 164,
            Domain::Csg3d => 256,
        }
    }

    /// Maximum edit parameter sequence length, END token included.
    pub fn max_edit_len(self) -> usize {
        match self {
            Domain::Layout | Domain::Csg2d => 32,
            Domain::Csg3d => 48,
        }
    }

    pub fn is_csg(self) -> bool {
        !matches!(self, Domain::Layout)
    }

    pub fn dims(self) -> usize {
        match self {
            Domain::Csg3d => 3,
            _ => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Domain::Layout => "layout",
            Domain::Csg2d => "csg2d",
            Domain::Csg3d => "csg3d",
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Domain {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "layout" => Ok(Domain::Layout),
            "csg2d" => Ok(Domain::Csg2d),
            "csg3d" => Ok(Domain::Csg3d),
            other => Err(format!("unknown domain `{other}`")),
        }
    }
}

/// Uniform quantization grid over `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Quant {
    levels: u16,
}

impl Quant {
    pub const DEFAULT_LEVELS: u16 = 33;

    /// Returns `None` for fewer than two levels.
    pub fn new(levels: u16) -> Option<Self> {
        (levels >= 2).then_some(Quant { levels })
    }

    pub fn levels(self) -> u16 {
        self.levels
    }

    pub fn value(self, index: u16) -> f64 {
        let span = f64::from(self.levels - 1);
        (2.0 * f64::from(index) - span) / span
    }

    /// Index of the grid value nearest to `v`, or `None` outside `[-1, 1]`.
    pub fn nearest(self, v: f64) -> Option<u16> {
        if !v.is_finite() || !(-1.0 - 1e-9..=1.0 + 1e-9).contains(&v) {
            return None;
        }
        let span = f64::from(self.levels - 1);
        let idx = ((v + 1.0) * span / 2.0).round().clamp(0.0, span);
        Some(idx as u16)
    }

    /// Index of the value `0.0`, or the nearest one for even grids.
    pub fn zero(self) -> u16 {
        (self.levels - 1) / 2
    }
}

impl Default for Quant {
    fn default() -> Self {
        Quant { levels: Self::DEFAULT_LEVELS }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Func {
    Union,
    Difference,
    Intersection,
    Move,
    Scale,
    Rotate,
    Reflect,
    Color,
    SymReflect,
    SymRotate,
    SymTranslate,
    Prim,
}

impl Func {
    pub const ALL: [Func; 12] = [
        Func::Union,
        Func::Difference,
        Func::Intersection,
        Func::Move,
        Func::Scale,
        Func::Rotate,
        Func::Reflect,
        Func::Color,
        Func::SymReflect,
        Func::SymRotate,
        Func::SymTranslate,
        Func::Prim,
    ];

    pub fn is_combinator(self) -> bool {
        matches!(self, Func::Union | Func::Difference | Func::Intersection)
    }

    pub fn is_transform(self) -> bool {
        !self.is_combinator() && self != Func::Prim
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Union => "Union",
            Func::Difference => "Difference",
            Func::Intersection => "Intersection",
            Func::Move => "Move",
            Func::Scale => "Scale",
            Func::Rotate => "Rotate",
            Func::Reflect => "Reflect",
            Func::Color => "Color",
            Func::SymReflect => "SymReflect",
            Func::SymRotate => "SymRotate",
            Func::SymTranslate => "SymTranslate",
            Func::Prim => "Prim",
        }
    }

    fn from_name(s: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name().eq_ignore_ascii_case(s))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    X,
    Y,
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ColorName {
    Red,
    Green,
    Blue,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Shape {
    Square,
    Circle,
    Triangle,
    Cuboid,
    Sphere,
    Cylinder,
}

impl Shape {
    pub fn name(self) -> &'static str {
        match self {
            Shape::Square => "square",
            Shape::Circle => "circle",
            Shape::Triangle => "triangle",
            Shape::Cuboid => "cuboid",
            Shape::Sphere => "sphere",
            Shape::Cylinder => "cylinder",
        }
    }
}

/// A non-shape argument of a function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Param {
    /// Index into the program's quantization grid.
    Quant(u16),
    Axis(Axis),
    Color(ColorName),
    /// Symmetry group size.
    Count(u8),
    Shape(Shape),
}

impl Param {
    fn text(self, quant: Quant) -> String {
        match self {
            Param::Quant(i) => format!("{}", quant.value(i)),
            Param::Count(n) => n.to_string(),
            other => Token::Param(other).to_string(),
        }
    }
}

/// A vocabulary entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Token {
    Func(Func),
    Param(Param),
    Pos,
    Neg,
    Sentinel(EditKind),
    End,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    FuncName,
    ParamQuant,
    ParamEnum,
    Structural,
    Sentinel,
    End,
}

impl Token {
    pub fn kind(self) -> TokenKind {
        match self {
            Token::Func(_) => TokenKind::FuncName,
            Token::Param(Param::Quant(_)) => TokenKind::ParamQuant,
            Token::Param(_) => TokenKind::ParamEnum,
            Token::Pos | Token::Neg => TokenKind::Structural,
            Token::Sentinel(_) => TokenKind::Sentinel,
            Token::End => TokenKind::End,
        }
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Func(func) => f.write_str(func.name()),
            Token::Param(Param::Quant(i)) => write!(f, "q{i}"),
            Token::Param(Param::Count(n)) => write!(f, "n{n}"),
            Token::Param(Param::Axis(a)) => write!(f, "{a:?}"),
            Token::Param(Param::Color(c)) => f.write_str(match c {
                ColorName::Red => "red",
                ColorName::Green => "green",
                ColorName::Blue => "blue",
            }),
            Token::Param(Param::Shape(s)) => f.write_str(s.name()),
            Token::Pos => f.write_str("POS"),
            Token::Neg => f.write_str("NEG"),
            Token::Sentinel(k) => write!(f, "${k}"),
            Token::End => f.write_str("END"),
        }
    }
}

impl FromStr for Token {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("unknown token `{s}`");
        if let Some(rest) = s.strip_prefix('$') {
            return rest.parse::<EditKind>().map(Token::Sentinel).map_err(|_| bad());
        }
        if let Some(rest) = s.strip_prefix('q') {
            if let Ok(i) = rest.parse::<u16>() {
                return Ok(Token::Param(Param::Quant(i)));
            }
        }
        if let Some(rest) = s.strip_prefix('n') {
            if let Ok(n) = rest.parse::<u8>() {
                return Ok(Token::Param(Param::Count(n)));
            }
        }
        match s {
            "POS" => return Ok(Token::Pos),
            "NEG" => return Ok(Token::Neg),
            "END" => return Ok(Token::End),
            _ => {}
        }
        if let Some(func) = Func::from_name(s) {
            return Ok(Token::Func(func));
        }
        param_from_word(s).map(Token::Param).ok_or_else(bad)
    }
}

fn param_from_word(s: &str) -> Option<Param> {
    let p = match s.to_ascii_lowercase().as_str() {
        "x" => Param::Axis(Axis::X),
        "y" => Param::Axis(Axis::Y),
        "z" => Param::Axis(Axis::Z),
        "red" => Param::Color(ColorName::Red),
        "green" => Param::Color(ColorName::Green),
        "blue" => Param::Color(ColorName::Blue),
        "square" => Param::Shape(Shape::Square),
        "circle" => Param::Shape(Shape::Circle),
        "triangle" => Param::Shape(Shape::Triangle),
        "cuboid" => Param::Shape(Shape::Cuboid),
        "sphere" => Param::Shape(Shape::Sphere),
        "cylinder" => Param::Shape(Shape::Cylinder),
        _ => return None,
    };
    Some(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone)]
pub struct Expr {
    pub id: NodeId,
    pub node: Node,
}

#[derive(Debug, Clone)]
pub enum Node {
    Comb { op: Func, children: Box<[Expr; 2]> },
    Transform { func: Func, params: Vec<Param>, child: Box<Expr> },
    Prim { shape: Shape },
}

impl Expr {
    pub fn token_len(&self) -> usize {
        match &self.node {
            Node::Comb { children, .. } => 1 + children[0].token_len() + children[1].token_len(),
            Node::Transform { params, child, .. } => 1 + params.len() + child.token_len(),
            Node::Prim { .. } => 2,
        }
    }

    pub fn write_tokens(&self, out: &mut Vec<Token>) {
        match &self.node {
            Node::Comb { op, children } => {
                out.push(Token::Func(*op));
                children[0].write_tokens(out);
                children[1].write_tokens(out);
            }
            Node::Transform { func, params, child } => {
                out.push(Token::Func(*func));
                out.extend(params.iter().map(|p| Token::Param(*p)));
                child.write_tokens(out);
            }
            Node::Prim { shape } => {
                out.push(Token::Func(Func::Prim));
                out.push(Token::Param(Param::Shape(*shape)));
            }
        }
    }

    pub fn tokens(&self) -> Vec<Token> {
        let mut out = Vec::with_capacity(self.token_len());
        self.write_tokens(&mut out);
        out
    }

    pub fn has_combinator(&self) -> bool {
        match &self.node {
            Node::Comb { .. } => true,
            Node::Transform { child, .. } => child.has_combinator(),
            Node::Prim { .. } => false,
        }
    }

    /// Pre-order visit of every node in this subtree.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        match &self.node {
            Node::Comb { children, .. } => {
                children[0].visit(f);
                children[1].visit(f);
            }
            Node::Transform { child, .. } => child.visit(f),
            Node::Prim { .. } => {}
        }
    }

    pub fn ids(&self) -> Vec<NodeId> {
        let mut out = Vec::new();
        self.visit(&mut |e| out.push(e.id));
        out
    }

    pub fn find(&self, id: NodeId) -> Option<&Expr> {
        if self.id == id {
            return Some(self);
        }
        match &self.node {
            Node::Comb { children, .. } => children[0].find(id).or_else(|| children[1].find(id)),
            Node::Transform { child, .. } => child.find(id),
            Node::Prim { .. } => None,
        }
    }

    pub fn find_mut(&mut self, id: NodeId) -> Option<&mut Expr> {
        if self.id == id {
            return Some(self);
        }
        match &mut self.node {
            Node::Comb { children, .. } => {
                let [l, r] = &mut **children;
                match l.find_mut(id) {
                    Some(e) => Some(e),
                    None => r.find_mut(id),
                }
            }
            Node::Transform { child, .. } => child.find_mut(id),
            Node::Prim { .. } => None,
        }
    }

    /// Structural equality ignoring node ids.
    pub fn same_shape(&self, other: &Expr) -> bool {
        match (&self.node, &other.node) {
            (Node::Comb { op: a, children: ca }, Node::Comb { op: b, children: cb }) => {
                a == b && ca[0].same_shape(&cb[0]) && ca[1].same_shape(&cb[1])
            }
            (
                Node::Transform { func: fa, params: pa, child: ca },
                Node::Transform { func: fb, params: pb, child: cb },
            ) => fa == fb && pa == pb && ca.same_shape(cb),
            (Node::Prim { shape: a }, Node::Prim { shape: b }) => a == b,
            _ => false,
        }
    }

    /// Re-assigns every id in pre-order starting from `*next`.
    pub fn renumber(&mut self, next: &mut u32) {
        self.id = NodeId(*next);
        *next += 1;
        match &mut self.node {
            Node::Comb { children, .. } => {
                children[0].renumber(next);
                children[1].renumber(next);
            }
            Node::Transform { child, .. } => child.renumber(next),
            Node::Prim { .. } => {}
        }
    }

    pub(crate) fn write_text(&self, quant: Quant, out: &mut String) {
        match &self.node {
            Node::Comb { op, children } => {
                out.push_str(op.name());
                out.push('(');
                children[0].write_text(quant, out);
                out.push(',');
                children[1].write_text(quant, out);
                out.push(')');
            }
            Node::Transform { func, params, child } => {
                out.push_str(func.name());
                out.push('(');
                for (i, p) in params.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    out.push_str(&p.text(quant));
                }
                out.push_str(")(");
                child.write_text(quant, out);
                out.push(')');
            }
            Node::Prim { shape } => {
                out.push_str("Prim(");
                out.push_str(shape.name());
                out.push(')');
            }
        }
    }

    pub fn to_text(&self, quant: Quant) -> String {
        let mut s = String::new();
        self.write_text(quant, &mut s);
        s
    }
}

/// A top-level CSG block (`POS` or `NEG`): a list of sub-expressions with an
/// id of its own so that edits can address the list.
#[derive(Debug, Clone)]
pub struct ExprList {
    pub id: NodeId,
    pub items: Vec<Expr>,
}

#[derive(Debug, Clone)]
pub enum Body {
    Layout(Expr),
    Csg { pos: ExprList, neg: ExprList },
}

/// Reference to any addressable node of a program.
#[derive(Debug, Clone, Copy)]
pub enum NodeRef<'a> {
    Expr(&'a Expr),
    List(&'a ExprList),
}

/// A complete program of one domain.
///
/// Equality is structural: node ids are ignored.
#[derive(Debug, Clone)]
pub struct Program {
    domain: Domain,
    quant: Quant,
    body: Body,
    next_id: u32,
}

impl PartialEq for Program {
    fn eq(&self, other: &Self) -> bool {
        self.domain == other.domain && self.quant == other.quant && self.tokens() == other.tokens()
    }
}

impl Eq for Program {}

impl Program {
    /// Builds a program from a body whose ids may be arbitrary; ids are
    /// re-assigned in pre-order.
    pub fn from_body(domain: Domain, quant: Quant, mut body: Body) -> Program {
        let mut next = 0;
        match &mut body {
            Body::Layout(e) => e.renumber(&mut next),
            Body::Csg { pos, neg } => {
                for list in [pos, neg] {
                    list.id = NodeId(next);
                    next += 1;
                    for item in &mut list.items {
                        item.renumber(&mut next);
                    }
                }
            }
        }
        Program { domain, quant, body, next_id: next }
    }

    pub(crate) fn from_parts(domain: Domain, quant: Quant, body: Body, next_id: u32) -> Program {
        Program { domain, quant, body, next_id }
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn quant(&self) -> Quant {
        self.quant
    }

    pub fn body(&self) -> &Body {
        &self.body
    }

    pub(crate) fn body_mut(&mut self) -> &mut Body {
        &mut self.body
    }

    pub(crate) fn next_id(&self) -> u32 {
        self.next_id
    }

    pub(crate) fn set_next_id(&mut self, next: u32) {
        self.next_id = next;
    }

    pub fn tokens(&self) -> Vec<Token> {
        let mut out = Vec::with_capacity(self.token_len());
        match &self.body {
            Body::Layout(e) => e.write_tokens(&mut out),
            Body::Csg { pos, neg } => {
                out.push(Token::Pos);
                pos.items.iter().for_each(|e| e.write_tokens(&mut out));
                out.push(Token::Neg);
                neg.items.iter().for_each(|e| e.write_tokens(&mut out));
            }
        }
        out
    }

    pub fn token_len(&self) -> usize {
        match &self.body {
            Body::Layout(e) => e.token_len(),
            Body::Csg { pos, neg } => {
                2 + pos.items.iter().chain(&neg.items).map(Expr::token_len).sum::<usize>()
            }
        }
    }

    /// Pre-order list of every addressable node with the index of its first
    /// token in [`Program::tokens`].
    pub fn node_offsets(&self) -> Vec<(NodeId, usize)> {
        fn walk(e: &Expr, offset: &mut usize, out: &mut Vec<(NodeId, usize)>) {
            out.push((e.id, *offset));
            match &e.node {
                Node::Comb { children, .. } => {
                    *offset += 1;
                    walk(&children[0], offset, out);
                    walk(&children[1], offset, out);
                }
                Node::Transform { params, child, .. } => {
                    *offset += 1 + params.len();
                    walk(child, offset, out);
                }
                Node::Prim { .. } => *offset += 2,
            }
        }
        let mut out = Vec::new();
        let mut offset = 0;
        match &self.body {
            Body::Layout(e) => walk(e, &mut offset, &mut out),
            Body::Csg { pos, neg } => {
                for list in [pos, neg] {
                    out.push((list.id, offset));
                    offset += 1;
                    for item in &list.items {
                        walk(item, &mut offset, &mut out);
                    }
                }
            }
        }
        out
    }

    pub fn node_ids(&self) -> Vec<NodeId> {
        self.node_offsets().into_iter().map(|(id, _)| id).collect()
    }

    pub fn find(&self, id: NodeId) -> Option<NodeRef<'_>> {
        match &self.body {
            Body::Layout(e) => e.find(id).map(NodeRef::Expr),
            Body::Csg { pos, neg } => [pos, neg].into_iter().find_map(|list| {
                if list.id == id {
                    Some(NodeRef::List(list))
                } else {
                    list.items.iter().find_map(|e| e.find(id)).map(NodeRef::Expr)
                }
            }),
        }
    }

    /// Top-level sub-expressions: the flattened `Union` spine for Layout, the
    /// `POS` list followed by the `NEG` list for CSG.
    pub fn top_level(&self) -> Vec<&Expr> {
        match &self.body {
            Body::Layout(e) => {
                let mut out = Vec::new();
                layout_items(e, &mut out);
                out
            }
            Body::Csg { pos, neg } => pos.items.iter().chain(&neg.items).collect(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        match &self.body {
            Body::Layout(e) => e.write_text(self.quant, &mut s),
            Body::Csg { pos, neg } => {
                for (name, list) in [("POS", pos), ("NEG", neg)] {
                    if name == "NEG" {
                        s.push(' ');
                    }
                    s.push_str(name);
                    s.push('(');
                    for (i, e) in list.items.iter().enumerate() {
                        if i > 0 {
                            s.push(',');
                        }
                        e.write_text(self.quant, &mut s);
                    }
                    s.push(')');
                }
            }
        }
        s
    }

    /// True when both programs have identical trees including node ids.
    pub fn same_ids(&self, other: &Program) -> bool {
        self == other && self.node_ids() == other.node_ids()
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Collects the items of a Layout `Union` spine in layering order (topmost
/// first).
pub fn layout_items<'a>(e: &'a Expr, out: &mut Vec<&'a Expr>) {
    match &e.node {
        Node::Comb { op: Func::Union, children } => {
            layout_items(&children[0], out);
            layout_items(&children[1], out);
        }
        _ => out.push(e),
    }
}

/// Renders a token list with the wire spelling, space separated.
pub fn tokens_to_string(tokens: &[Token]) -> String {
    tokens.iter().map(Token::to_string).collect::<Vec<_>>().join(" ")
}

/// Parses a space separated wire-spelled token list.
pub fn tokens_from_str(s: &str) -> Result<Vec<Token>, String> {
    s.split_whitespace().map(str::parse).collect()
}
