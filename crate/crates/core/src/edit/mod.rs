//! The seven local edit operations.
//!
//! Edits address nodes by [`NodeId`]. On the wire they address the index of the
//! node's first token instead (see [`wire`]).
//!
//! | kind | anchor | params |
//! |------|--------|--------|
//! | MP | transform or `Prim` | new parameters |
//! | MT | transform | new function and its parameters |
//! | AT | any expression | function and parameters of the new parent |
//! | RT | transform | none |
//! | MC | combinator | new operator |
//! | RC | branch root below a combinator, or a CSG list item | none |
//! | AC | any expression, or a CSG list | operator and the new branch tokens |

mod enumerate;
pub mod wire;

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::{
    combinators, tokens_to_string, transforms, Body, Domain, Expr, ExprList, Func, Node, NodeId, NodeRef, Param,
    Program, Token,
};

pub use enumerate::{enumerate_edits, EnumConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EditKind {
    #[serde(rename = "MP")]
    Mp,
    #[serde(rename = "MT")]
    Mt,
    #[serde(rename = "AT")]
    At,
    #[serde(rename = "RT")]
    Rt,
    #[serde(rename = "MC")]
    Mc,
    #[serde(rename = "RC")]
    Rc,
    #[serde(rename = "AC")]
    Ac,
}

impl EditKind {
    pub const ALL: [EditKind; 7] =
        [EditKind::Mp, EditKind::Mt, EditKind::At, EditKind::Rt, EditKind::Mc, EditKind::Rc, EditKind::Ac];

    pub fn name(self) -> &'static str {
        match self {
            EditKind::Mp => "MP",
            EditKind::Mt => "MT",
            EditKind::At => "AT",
            EditKind::Rt => "RT",
            EditKind::Mc => "MC",
            EditKind::Rc => "RC",
            EditKind::Ac => "AC",
        }
    }
}

impl fmt::Display for EditKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EditKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EditKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown edit kind `{s}`"))
    }
}

/// Where an added branch goes relative to the anchor.
///
/// `Slot(i)` only applies to CSG lists and inserts the new item at index `i`;
/// on a list `Left` prepends and `Right` appends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BranchSide {
    Left,
    Right,
    Slot(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EditOp {
    pub kind: EditKind,
    pub anchor: NodeId,
    /// Required for AC, ignored otherwise.
    pub side: Option<BranchSide>,
    pub params: Vec<Token>,
    /// Ids given to the created nodes instead of fresh ones. Only inverse edits
    /// set this, so that undoing a removal restores the removed ids.
    pub(crate) restore_ids: Vec<NodeId>,
}

impl EditOp {
    pub fn new(kind: EditKind, anchor: NodeId, side: Option<BranchSide>, params: Vec<Token>) -> EditOp {
        EditOp { kind, anchor, side, params, restore_ids: Vec::new() }
    }

    /// One per edit plus one per parameter token.
    pub fn cost(&self) -> usize {
        1 + self.params.len()
    }

    /// Parameter tokens terminated by `END`.
    pub fn target_params(&self) -> Vec<Token> {
        let mut t = self.params.clone();
        t.push(Token::End);
        t
    }
}

impl fmt::Display for EditOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} @{}", self.kind, self.anchor)?;
        if let Some(side) = self.side {
            write!(f, " {side:?}")?;
        }
        if !self.params.is_empty() {
            write!(f, " [{}]", tokens_to_string(&self.params))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EditError {
    #[error("invalid anchor {anchor} for {kind}: {reason}")]
    InvalidAnchor { kind: EditKind, anchor: NodeId, reason: String },
    #[error("no node starts at token {index} for {kind}")]
    NoNodeAtToken { kind: EditKind, index: usize },
    #[error("bad parameters for {kind}: {reason}")]
    ArityViolation { kind: EditKind, reason: String },
    #[error("edited program has {len} tokens, limit is {max}")]
    LengthOverflow { len: usize, max: usize },
    #[error("{0}")]
    DomainViolation(String),
    #[error("order violates dependency {before} -> {after}")]
    DependencyViolation { before: usize, after: usize },
    #[error("order is not a permutation of the script's edits")]
    BadOrder,
}

/// A set of edits with ordering constraints. An edge `(i, j)` means edit `i`
/// must be applied before edit `j`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EditScript {
    pub edits: Vec<EditOp>,
    pub deps: Vec<(usize, usize)>,
}

impl EditScript {
    pub fn len(&self) -> usize {
        self.edits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edits.is_empty()
    }

    pub fn cost(&self) -> usize {
        self.edits.iter().map(EditOp::cost).sum()
    }

    /// Builds a script where every pair of edits sharing an anchor is ordered
    /// as listed.
    pub fn with_anchor_deps(edits: Vec<EditOp>) -> EditScript {
        let mut deps = Vec::new();
        for j in 0..edits.len() {
            for i in 0..j {
                if edits[i].anchor == edits[j].anchor {
                    deps.push((i, j));
                }
            }
        }
        EditScript { edits, deps }
    }

    /// Indices of the edits that must precede edit `j`.
    pub fn predecessors(&self, j: usize) -> Vec<usize> {
        self.deps.iter().filter(|(_, b)| *b == j).map(|(a, _)| *a).collect()
    }

    pub fn check_order(&self, order: &[usize]) -> Result<(), EditError> {
        let n = self.edits.len();
        let mut pos = vec![usize::MAX; n];
        for (k, &i) in order.iter().enumerate() {
            if i >= n || pos[i] != usize::MAX {
                return Err(EditError::BadOrder);
            }
            pos[i] = k;
        }
        if order.len() != n {
            return Err(EditError::BadOrder);
        }
        for &(a, b) in &self.deps {
            if pos[a] > pos[b] {
                return Err(EditError::DependencyViolation { before: a, after: b });
            }
        }
        Ok(())
    }
}

/// Applies the edits of `script` in the given order.
pub fn apply_script(program: &Program, script: &EditScript, order: &[usize]) -> Result<Program, EditError> {
    script.check_order(order)?;
    let mut p = program.clone();
    for &i in order {
        p = apply_edit(&p, &script.edits[i])?;
    }
    Ok(p)
}

/// Applies the script in listed order.
pub fn apply_script_in_order(program: &Program, script: &EditScript) -> Result<Program, EditError> {
    let order: Vec<usize> = (0..script.len()).collect();
    apply_script(program, script, &order)
}

pub fn apply_edit(program: &Program, op: &EditOp) -> Result<Program, EditError> {
    apply(program, op).map(|(p, _)| p)
}

/// Applies `op` and returns the edit that undoes it.
pub fn apply_with_inverse(program: &Program, op: &EditOp) -> Result<(Program, EditOp), EditError> {
    let (p, inv) = apply(program, op)?;
    Ok((p, inv))
}

/// Token index of the first token of a node.
pub fn token_anchor(program: &Program, id: NodeId) -> Result<usize, EditError> {
    program
        .node_offsets()
        .into_iter()
        .find(|(n, _)| *n == id)
        .map(|(_, off)| off)
        .ok_or_else(|| EditError::InvalidAnchor { kind: EditKind::Mp, anchor: id, reason: "no such node".into() })
}

/// Node whose first token is at `index`, checked against what `kind` can
/// anchor on.
pub fn anchor_from_token(program: &Program, index: usize, kind: EditKind) -> Result<NodeId, EditError> {
    let id = program
        .node_offsets()
        .into_iter()
        .find(|(_, off)| *off == index)
        .map(|(n, _)| n)
        .ok_or(EditError::NoNodeAtToken { kind, index })?;
    check_anchor_kind(program, kind, id)?;
    Ok(id)
}

fn bad_anchor(kind: EditKind, anchor: NodeId, reason: impl Into<String>) -> EditError {
    EditError::InvalidAnchor { kind, anchor, reason: reason.into() }
}

fn bad_params(kind: EditKind, reason: impl Into<String>) -> EditError {
    EditError::ArityViolation { kind, reason: reason.into() }
}

/// True when the expression `id` is a direct child of a combinator.
fn has_comb_parent(program: &Program, id: NodeId) -> bool {
    fn walk(e: &Expr, id: NodeId) -> bool {
        match &e.node {
            Node::Comb { children, .. } => children.iter().any(|c| c.id == id || walk(c, id)),
            Node::Transform { child, .. } => walk(child, id),
            Node::Prim { .. } => false,
        }
    }
    match program.body() {
        Body::Layout(e) => walk(e, id),
        Body::Csg { pos, neg } => pos.items.iter().chain(&neg.items).any(|e| walk(e, id)),
    }
}

fn list_item_position(program: &Program, id: NodeId) -> Option<(NodeId, usize)> {
    match program.body() {
        Body::Layout(_) => None,
        Body::Csg { pos, neg } => [pos, neg]
            .into_iter()
            .find_map(|l| l.items.iter().position(|e| e.id == id).map(|i| (l.id, i))),
    }
}

fn check_anchor_kind(program: &Program, kind: EditKind, id: NodeId) -> Result<(), EditError> {
    let node = program.find(id).ok_or_else(|| bad_anchor(kind, id, "no such node"))?;
    let ok = match (kind, node) {
        (EditKind::Ac, _) => true,
        (_, NodeRef::List(_)) => false,
        (EditKind::Mp, NodeRef::Expr(e)) => matches!(e.node, Node::Transform { .. } | Node::Prim { .. }),
        (EditKind::Mt | EditKind::Rt, NodeRef::Expr(e)) => matches!(e.node, Node::Transform { .. }),
        (EditKind::At, NodeRef::Expr(_)) => true,
        (EditKind::Mc, NodeRef::Expr(e)) => matches!(e.node, Node::Comb { .. }),
        (EditKind::Rc, NodeRef::Expr(_)) => has_comb_parent(program, id) || list_item_position(program, id).is_some(),
    };
    if ok {
        Ok(())
    } else {
        Err(bad_anchor(kind, id, "node type does not fit the edit kind"))
    }
}

fn param_tokens(kind: EditKind, tokens: &[Token]) -> Result<Vec<Param>, EditError> {
    tokens
        .iter()
        .map(|t| match t {
            Token::Param(p) => Ok(*p),
            other => Err(bad_params(kind, format!("expected a parameter token, found {other}"))),
        })
        .collect()
}

/// Splits `[Func, params...]` and checks it against the domain grammar.
fn transform_params(program: &Program, kind: EditKind, tokens: &[Token]) -> Result<(Func, Vec<Param>), EditError> {
    let Some(Token::Func(func)) = tokens.first() else {
        return Err(bad_params(kind, "expected a transform name"));
    };
    if !transforms(program.domain()).contains(func) {
        return Err(bad_params(kind, format!("{} is not a {} transform", func.name(), program.domain())));
    }
    let params = param_tokens(kind, &tokens[1..])?;
    if !crate::dsl::grammar_params_fit(program.domain(), program.quant(), *func, &params) {
        return Err(bad_params(kind, format!("parameters do not fit {}", func.name())));
    }
    Ok((*func, params))
}

fn combinator_param(program: &Program, kind: EditKind, tok: Option<&Token>) -> Result<Func, EditError> {
    match tok {
        Some(Token::Func(f)) if combinators(program.domain()).contains(f) => Ok(*f),
        _ => Err(bad_params(kind, format!("expected a {} combinator", program.domain()))),
    }
}

/// Hands out ids for created nodes: the restore list first, then fresh ids.
struct IdSource {
    restore: std::vec::IntoIter<NodeId>,
    next: u32,
}

impl IdSource {
    fn take(&mut self) -> NodeId {
        if let Some(id) = self.restore.next() {
            return id;
        }
        let id = NodeId(self.next);
        self.next += 1;
        id
    }

    fn relabel(&mut self, e: &mut Expr) {
        e.id = self.take();
        match &mut e.node {
            Node::Comb { children, .. } => {
                self.relabel(&mut children[0]);
                self.relabel(&mut children[1]);
            }
            Node::Transform { child, .. } => self.relabel(child),
            Node::Prim { .. } => {}
        }
    }
}

fn find_expr_mut(body: &mut Body, id: NodeId) -> Option<&mut Expr> {
    match body {
        Body::Layout(e) => e.find_mut(id),
        Body::Csg { pos, neg } => {
            for list in [pos, neg] {
                for item in &mut list.items {
                    if let Some(e) = item.find_mut(id) {
                        return Some(e);
                    }
                }
            }
            None
        }
    }
}

fn find_list_mut(body: &mut Body, id: NodeId) -> Option<&mut ExprList> {
    match body {
        Body::Layout(_) => None,
        Body::Csg { pos, neg } => [pos, neg].into_iter().find(|l| l.id == id),
    }
}

fn placeholder() -> Expr {
    Expr { id: NodeId(u32::MAX), node: Node::Prim { shape: crate::dsl::Shape::Square } }
}

/// Removes the branch `id` below a combinator; the sibling takes the
/// combinator's place. Returns (combinator id, op, side of the removed branch,
/// removed branch, sibling id).
fn remove_branch(e: &mut Expr, id: NodeId) -> Option<(NodeId, Func, BranchSide, Expr, NodeId)> {
    match &mut e.node {
        Node::Comb { op, children } => {
            let side = if children[0].id == id {
                Some(0)
            } else if children[1].id == id {
                Some(1)
            } else {
                None
            };
            if let Some(k) = side {
                let (comb_id, op) = (e.id, *op);
                let Node::Comb { children, .. } = std::mem::replace(&mut e.node, Node::Prim { shape: crate::dsl::Shape::Square }) else {
                    unreachable!()
                };
                let [l, r] = *children;
                let (removed, kept) = if k == 0 { (l, r) } else { (r, l) };
                let kept_id = kept.id;
                *e = kept;
                let side = if k == 0 { BranchSide::Left } else { BranchSide::Right };
                return Some((comb_id, op, side, removed, kept_id));
            }
            let [l, r] = &mut **children;
            remove_branch(l, id).or_else(|| remove_branch(r, id))
        }
        Node::Transform { child, .. } => remove_branch(child, id),
        Node::Prim { .. } => None,
    }
}

fn apply(program: &Program, op: &EditOp) -> Result<(Program, EditOp), EditError> {
    let kind = op.kind;
    let domain = program.domain();
    let anchor = op.anchor;
    check_anchor_kind(program, kind, anchor)?;
    if !op.restore_ids.is_empty() {
        let present: HashSet<NodeId> = program.node_ids().into_iter().collect();
        if let Some(id) = op.restore_ids.iter().find(|id| present.contains(id)) {
            return Err(bad_anchor(kind, anchor, format!("restored id {id} already in use")));
        }
    }
    let mut ids = IdSource { restore: op.restore_ids.clone().into_iter(), next: program.next_id() };
    let mut out = program.clone();
    let body = out.body_mut();

    let inverse = match kind {
        EditKind::Mp => {
            let new = param_tokens(kind, &op.params)?;
            let e = find_expr_mut(body, anchor).expect("anchor checked");
            match &mut e.node {
                Node::Transform { func, params, .. } => {
                    if !crate::dsl::grammar_params_fit(domain, program.quant(), *func, &new) {
                        return Err(bad_params(kind, format!("parameters do not fit {}", func.name())));
                    }
                    let old = std::mem::replace(params, new);
                    EditOp::new(kind, anchor, None, old.into_iter().map(Token::Param).collect())
                }
                Node::Prim { shape } => {
                    let [Param::Shape(s)] = new[..] else {
                        return Err(bad_params(kind, "a primitive takes exactly one shape"));
                    };
                    if !crate::dsl::shapes(domain).contains(&s) {
                        return Err(bad_params(kind, format!("{} is not a {domain} primitive", s.name())));
                    }
                    let old = std::mem::replace(shape, s);
                    EditOp::new(kind, anchor, None, vec![Token::Param(Param::Shape(old))])
                }
                Node::Comb { .. } => unreachable!(),
            }
        }
        EditKind::Mt => {
            let (f, new) = transform_params(program, kind, &op.params)?;
            let e = find_expr_mut(body, anchor).expect("anchor checked");
            let Node::Transform { func, params, .. } = &mut e.node else { unreachable!() };
            let old_f = std::mem::replace(func, f);
            let old = std::mem::replace(params, new);
            let mut inv = vec![Token::Func(old_f)];
            inv.extend(old.into_iter().map(Token::Param));
            EditOp::new(kind, anchor, None, inv)
        }
        EditKind::At => {
            let (func, params) = transform_params(program, kind, &op.params)?;
            let e = find_expr_mut(body, anchor).expect("anchor checked");
            let inner = std::mem::replace(e, placeholder());
            let id = ids.take();
            *e = Expr { id, node: Node::Transform { func, params, child: Box::new(inner) } };
            EditOp::new(EditKind::Rt, id, None, Vec::new())
        }
        EditKind::Rt => {
            if !op.params.is_empty() {
                return Err(bad_params(kind, "RT takes no parameters"));
            }
            let e = find_expr_mut(body, anchor).expect("anchor checked");
            let old = std::mem::replace(e, placeholder());
            let Node::Transform { func, params, child } = old.node else { unreachable!() };
            let child = *child;
            let child_id = child.id;
            *e = child;
            let mut toks = vec![Token::Func(func)];
            toks.extend(params.into_iter().map(Token::Param));
            EditOp { kind: EditKind::At, anchor: child_id, side: None, params: toks, restore_ids: vec![anchor] }
        }
        EditKind::Mc => {
            if domain == Domain::Layout {
                return Err(EditError::DomainViolation("layout has a single combinator; MC does not apply".into()));
            }
            if op.params.len() != 1 {
                return Err(bad_params(kind, "MC takes exactly one operator"));
            }
            let new = combinator_param(program, kind, op.params.first())?;
            let e = find_expr_mut(body, anchor).expect("anchor checked");
            let Node::Comb { op: cur, .. } = &mut e.node else { unreachable!() };
            let old = std::mem::replace(cur, new);
            EditOp::new(kind, anchor, None, vec![Token::Func(old)])
        }
        EditKind::Rc => {
            if !op.params.is_empty() {
                return Err(bad_params(kind, "RC takes no parameters"));
            }
            if let Some((list_id, index)) = list_item_position(program, anchor) {
                let list = find_list_mut(body, list_id).expect("list exists");
                let removed = list.items.remove(index);
                let mut toks = vec![Token::Func(Func::Union)];
                removed.write_tokens(&mut toks);
                EditOp {
                    kind: EditKind::Ac,
                    anchor: list_id,
                    side: Some(BranchSide::Slot(index)),
                    params: toks,
                    restore_ids: removed.ids(),
                }
            } else {
                let found = match body {
                    Body::Layout(e) => remove_branch(e, anchor),
                    Body::Csg { pos, neg } => {
                        pos.items.iter_mut().chain(neg.items.iter_mut()).find_map(|e| remove_branch(e, anchor))
                    }
                };
                let (comb_id, comb_op, side, removed, kept) = found.expect("anchor checked");
                let mut toks = vec![Token::Func(comb_op)];
                removed.write_tokens(&mut toks);
                let mut restore = vec![comb_id];
                restore.extend(removed.ids());
                EditOp { kind: EditKind::Ac, anchor: kept, side: Some(side), params: toks, restore_ids: restore }
            }
        }
        EditKind::Ac => {
            let comb = combinator_param(program, kind, op.params.first())?;
            let side = op.side.ok_or_else(|| bad_params(kind, "AC needs a branch side"))?;
            let (mut branch, _) =
                crate::dsl::parse_expr(&op.params[1..], domain, program.quant(), 0).map_err(|e| bad_params(kind, format!("branch: {e}")))?;
            if let Some(list) = find_list_mut(body, anchor) {
                if comb != Func::Union {
                    return Err(bad_params(kind, "list items are joined by Union"));
                }
                let index = match side {
                    BranchSide::Left => 0,
                    BranchSide::Right => list.items.len(),
                    BranchSide::Slot(i) if i <= list.items.len() => i,
                    BranchSide::Slot(i) => {
                        return Err(bad_params(kind, format!("slot {i} past the end of a list of {}", list.items.len())))
                    }
                };
                ids.relabel(&mut branch);
                let root = branch.id;
                list.items.insert(index, branch);
                EditOp::new(EditKind::Rc, root, None, Vec::new())
            } else {
                let k = match side {
                    BranchSide::Left => 0,
                    BranchSide::Right => 1,
                    BranchSide::Slot(_) => return Err(bad_params(kind, "slots only apply to CSG lists")),
                };
                let e = find_expr_mut(body, anchor).expect("anchor checked");
                let existing = std::mem::replace(e, placeholder());
                let comb_id = ids.take();
                ids.relabel(&mut branch);
                let root = branch.id;
                let children = if k == 0 { [branch, existing] } else { [existing, branch] };
                *e = Expr { id: comb_id, node: Node::Comb { op: comb, children: Box::new(children) } };
                EditOp::new(EditKind::Rc, root, None, Vec::new())
            }
        }
    };

    let max = domain.max_program_len();
    let len = out.token_len();
    if len > max {
        return Err(EditError::LengthOverflow { len, max });
    }
    let next = ids.next.max(op.restore_ids.iter().map(|i| i.0 + 1).max().unwrap_or(0)).max(program.next_id());
    out.set_next_id(next);
    Ok((out, inverse))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{parse_text, Quant};
    use crate::exec::execute;

    fn prog(domain: Domain, text: &str) -> Program {
        parse_text(text, domain, Quant::default()).unwrap()
    }

    fn toks(s: &str) -> Vec<Token> {
        crate::dsl::tokens_from_str(s).unwrap()
    }

    #[test]
    fn rt_splices_out_move() {
        let p = prog(Domain::Layout, "Move(0.5,0)(Prim(square))");
        let q = apply_edit(&p, &EditOp::new(EditKind::Rt, NodeId(0), None, vec![])).unwrap();
        assert_eq!(q, prog(Domain::Layout, "Prim(square)"));
        assert_eq!(q.node_ids(), vec![NodeId(1)]);
    }

    #[test]
    fn ac_right_at_root() {
        let p = prog(Domain::Layout, "Prim(square)");
        let op = EditOp::new(EditKind::Ac, NodeId(0), Some(BranchSide::Right), toks("Union Prim circle"));
        let q = apply_edit(&p, &op).unwrap();
        assert_eq!(q, prog(Domain::Layout, "Union(Prim(square),Prim(circle))"));
    }

    #[test]
    fn mp_restores_with_original_params() {
        let p = prog(Domain::Csg2d, "POS(Move(0.25,-0.5)(Prim(circle))) NEG()");
        let zero = toks("q16 q16");
        let (q, inv) = apply_with_inverse(&p, &EditOp::new(EditKind::Mp, NodeId(1), None, zero)).unwrap();
        assert_eq!(q.to_text(), "POS(Move(0,0)(Prim(circle))) NEG()");
        assert!(apply_edit(&q, &inv).unwrap().same_ids(&p));
    }

    #[test]
    fn mc_is_rejected_in_layout() {
        let p = prog(Domain::Layout, "Union(Prim(square),Prim(circle))");
        let op = EditOp::new(EditKind::Mc, NodeId(0), None, toks("Union"));
        assert!(matches!(apply_edit(&p, &op), Err(EditError::DomainViolation(_))));
    }

    #[test]
    fn dependent_at_after_ac() {
        let p = prog(Domain::Csg2d, "POS(Prim(square)) NEG()");
        // the AC creates the combinator (id 3) and the branch root (id 4)
        let ac = EditOp::new(EditKind::Ac, NodeId(1), Some(BranchSide::Right), toks("Difference Prim circle"));
        let at = EditOp::new(EditKind::At, NodeId(4), None, toks("Move q20 q16"));
        let script = EditScript { edits: vec![ac, at], deps: vec![(0, 1)] };
        let q = apply_script(&p, &script, &[0, 1]).unwrap();
        assert_eq!(q.to_text(), "POS(Difference(Prim(square),Move(0.25,0)(Prim(circle)))) NEG()");
        assert_eq!(
            apply_script(&p, &script, &[1, 0]),
            Err(EditError::DependencyViolation { before: 0, after: 1 })
        );
    }

    #[test]
    fn rc_inverse_restores_ids_in_list() {
        let p = prog(Domain::Csg2d, "POS(Prim(square),Union(Prim(circle),Prim(triangle))) NEG(Prim(circle))");
        for id in p.node_ids() {
            let op = EditOp::new(EditKind::Rc, id, None, vec![]);
            let Ok((q, inv)) = apply_with_inverse(&p, &op) else { continue };
            let back = apply_edit(&q, &inv).unwrap();
            assert!(back.same_ids(&p), "{id}: {back}");
            assert_eq!(execute(&back).unwrap(), execute(&p).unwrap());
        }
    }

    #[test]
    fn length_overflow_is_reported() {
        let mut text = String::from("Prim(square)");
        for _ in 0..41 {
            text = format!("Move(0,0)({text})");
        }
        let p = prog(Domain::Layout, &text);
        assert_eq!(p.token_len(), 125);
        let op = EditOp::new(EditKind::At, NodeId(0), None, toks("Move q16 q16"));
        let op2 = EditOp::new(EditKind::At, NodeId(0), None, toks("SymTranslate n2 q16 q16"));
        let q = apply_edit(&p, &op).unwrap();
        assert_eq!(apply_edit(&q, &op2), Err(EditError::LengthOverflow { len: 132, max: 128 }));
    }

    #[test]
    fn anchors_round_trip() {
        let p = prog(Domain::Csg2d, "POS(Union(Prim(square),Move(0,0)(Prim(circle)))) NEG(Prim(circle))");
        for (id, off) in p.node_offsets() {
            assert_eq!(token_anchor(&p, id).unwrap(), off);
            assert_eq!(anchor_from_token(&p, off, EditKind::Ac).unwrap(), id);
        }
        assert_eq!(token_anchor(&p, NodeId(0)).unwrap(), 0);
        assert!(anchor_from_token(&p, 999, EditKind::Ac).is_err());
    }
}
