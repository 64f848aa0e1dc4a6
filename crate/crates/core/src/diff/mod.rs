//! Minimum-cost edit scripts between two programs, training tuples drawn
//! from them, and random corruption of programs.

mod corrupt;
mod hungarian;
mod tuples;

use std::collections::HashMap;

use thiserror::Error;

use crate::dsl::{layout_items, Body, Domain, Expr, Func, Node, NodeId, Param, Program, Token};
use crate::edit::{BranchSide, EditKind, EditOp, EditScript};

pub use corrupt::{corrupt, CorruptError, CorruptionTrace};
pub use hungarian::hungarian;
pub use tuples::{extract_tuples, strip_sentinels, validate_tuple, TrainingTuple, TupleStats};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiffError {
    #[error("programs are in different domains ({0} vs {1})")]
    DomainMismatch(Domain, Domain),
    #[error("programs use different quantization grids")]
    QuantMismatch,
}

/// Edits turning one sub-expression into another, with their total cost.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchCost {
    pub cost: usize,
    pub script: EditScript,
}

/// Ordering weight for a (cost, edit count) pair. Cost dominates; the count
/// breaks ties toward shorter scripts.
pub fn match_weight(cost: usize, edits: usize) -> i64 {
    ((cost as i64) << 16) + edits as i64
}

/// Cheapest script turning `start` into `end`.
pub fn find_edits(start: &Program, end: &Program) -> Result<EditScript, DiffError> {
    if start.domain() != end.domain() {
        return Err(DiffError::DomainMismatch(start.domain(), end.domain()));
    }
    if start.quant() != end.quant() {
        return Err(DiffError::QuantMismatch);
    }
    let mut d = Differ::new(start.domain());
    let frag = match (start.body(), end.body()) {
        (Body::Layout(a), Body::Layout(b)) => {
            let tree = d.sub(&[], a, b);
            let flat = d.layout_flat(a, b);
            if flat.key() < tree.key() {
                flat
            } else {
                tree
            }
        }
        (Body::Csg { pos: pa, neg: na }, Body::Csg { pos: pb, neg: nb }) => {
            let mut f = d.csg_group(pa.id, &pa.items, &pb.items).0;
            f.append(d.csg_group(na.id, &na.items, &nb.items).0);
            f
        }
        _ => unreachable!("domain fixes the body kind"),
    };
    Ok(with_deps(shrink_first(frag.edits, start), start))
}

/// Cheapest edits turning expression `a` into `b`, anchored on `a`'s ids.
pub fn subexpr_edits(a: &Expr, b: &Expr, domain: Domain) -> MatchCost {
    let f = Differ::new(domain).sub(&[], a, b);
    MatchCost { cost: f.cost as usize, script: EditScript::with_anchor_deps(f.edits) }
}

/// Result of matching the items of one CSG list against another.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    /// Sum of [`match_weight`] over matched pairs, removals and insertions.
    pub weight: i64,
    /// For each start item, the end item it is rewritten into, if any.
    pub matches: Vec<Option<usize>>,
}

/// Optimal matching of one CSG item list onto another. Unmatched start items
/// are removed and unmatched end items appended.
pub fn assign_items(list: NodeId, start: &[Expr], end: &[Expr], domain: Domain) -> Assignment {
    Differ::new(domain).csg_group(list, start, end).1
}

/// Appending `item` to a CSG list: the AC tokens are the combinator plus the
/// item.
pub fn insertion_cost(item: &Expr) -> usize {
    2 + item.token_len()
}

#[derive(Debug, Clone, Default)]
struct Frag {
    cost: u32,
    count: u32,
    edits: Vec<EditOp>,
}

impl Frag {
    fn key(&self) -> (u32, u32) {
        (self.cost, self.count)
    }

    fn push(&mut self, op: EditOp) {
        self.cost += op.cost() as u32;
        self.count += 1;
        self.edits.push(op);
    }

    fn append(&mut self, other: Frag) {
        self.cost += other.cost;
        self.count += other.count;
        self.edits.extend(other.edits);
    }
}

fn keep_better(best: &mut Option<Frag>, f: Frag) {
    if best.as_ref().is_none_or(|b| f.key() < b.key()) {
        *best = Some(f);
    }
}

fn func_tokens(func: Func, params: &[Param]) -> Vec<Token> {
    let mut t = vec![Token::Func(func)];
    t.extend(params.iter().map(|p| Token::Param(*p)));
    t
}

/// Splits a view into its transform chain and the first non-transform node.
/// The view is `prefix` stacked on top of `root`.
fn chain<'a>(prefix: &[&'a Expr], root: &'a Expr) -> (Vec<&'a Expr>, &'a Expr) {
    let mut out = prefix.to_vec();
    let mut cur = root;
    while let Node::Transform { child, .. } = &cur.node {
        out.push(cur);
        cur = child;
    }
    (out, cur)
}

fn transform_parts(e: &Expr) -> (Func, &[Param]) {
    match &e.node {
        Node::Transform { func, params, .. } => (*func, params),
        _ => unreachable!("chains hold transforms only"),
    }
}

struct Differ {
    domain: Domain,
    memo: HashMap<(NodeId, NodeId, NodeId), Frag>,
}

#[derive(Clone, Copy, PartialEq)]
enum Step {
    Pair,
    Delete,
    Insert,
}

impl Differ {
    fn new(domain: Domain) -> Differ {
        Differ { domain, memo: HashMap::new() }
    }

    /// Edits turning the view (`prefix` over `root`) into `b`. Every node of
    /// `prefix` is a transform whose real subtree may hold parts that other
    /// edits remove; only the transforms themselves belong to the view.
    fn sub(&mut self, prefix: &[&Expr], root: &Expr, b: &Expr) -> Frag {
        let key = (prefix.first().map_or(root.id, |e| e.id), root.id, b.id);
        if let Some(f) = self.memo.get(&key) {
            return f.clone();
        }
        let (ca, acore) = chain(prefix, root);
        let (cb, bcore) = chain(&[], b);
        let mut best = None;

        if let (Node::Prim { shape: sa }, Node::Prim { shape: sb }) = (&acore.node, &bcore.node) {
            let mut f = self.align(&ca, &cb, acore.id);
            if sa != sb {
                f.push(EditOp::new(EditKind::Mp, acore.id, None, vec![Token::Param(Param::Shape(*sb))]));
            }
            keep_better(&mut best, f);
        }

        if let (Node::Comb { op: aop, children: ach }, Node::Comb { op: bop, children: bch }) =
            (&acore.node, &bcore.node)
        {
            let mut f = self.align(&ca, &cb, acore.id);
            if aop != bop {
                f.push(EditOp::new(EditKind::Mc, acore.id, None, vec![Token::Func(*bop)]));
            }
            let mut kids = self.sub(&[], &ach[0], &bch[0]);
            kids.append(self.sub(&[], &ach[1], &bch[1]));
            if self.domain.is_csg() && matches!(bop, Func::Union | Func::Intersection) {
                let mut crossed = self.sub(&[], &ach[0], &bch[1]);
                crossed.append(self.sub(&[], &ach[1], &bch[0]));
                if crossed.key() < kids.key() {
                    kids = crossed;
                }
            }
            f.append(kids);
            keep_better(&mut best, f);
        }

        // drop one branch of a's combinator, keep working on the other
        if let Node::Comb { children: ach, .. } = &acore.node {
            for keep in 0..2 {
                let mut f = Frag::default();
                f.push(EditOp::new(EditKind::Rc, ach[1 - keep].id, None, vec![]));
                f.append(self.sub(&ca, &ach[keep], b));
                keep_better(&mut best, f);
            }
        }

        // wrap some node of a's chain in b's combinator
        if let Node::Comb { op: bop, children: bch } = &bcore.node {
            for k in 0..=ca.len() {
                let n = if k < ca.len() { ca[k] } else { acore };
                for m in 0..2 {
                    let other = &bch[1 - m];
                    let side = if m == 1 { BranchSide::Left } else { BranchSide::Right };
                    let mut params = vec![Token::Func(*bop)];
                    other.write_tokens(&mut params);
                    let mut f = self.align(&ca[..k], &cb, n.id);
                    f.push(EditOp::new(EditKind::Ac, n.id, Some(side), params));
                    let lower = if k < prefix.len() {
                        self.sub(&prefix[k..], root, &bch[m])
                    } else {
                        self.sub(&[], n, &bch[m])
                    };
                    // wrapping a node that then gets removed; a deeper k
                    // gives the same result without the ordering knot
                    if lower.edits.iter().any(|e| e.kind == EditKind::Rt && e.anchor == n.id) {
                        continue;
                    }
                    f.append(lower);
                    keep_better(&mut best, f);
                }
            }
        }

        let best = best.expect("at least one case applies");
        self.memo.insert(key, best.clone());
        best
    }

    /// Aligns two transform chains. `below` is the node under `ca`, used as
    /// the anchor for insertions after the last kept transform.
    fn align(&self, ca: &[&Expr], cb: &[&Expr], below: NodeId) -> Frag {
        let (n, m) = (ca.len(), cb.len());
        let at_cost = |j: usize| {
            let (_, p) = transform_parts(cb[j]);
            (2 + p.len()) as u32
        };
        let pair_cost = |i: usize, j: usize| {
            let (fa, pa) = transform_parts(ca[i]);
            let (fb, pb) = transform_parts(cb[j]);
            if fa == fb {
                if pa == pb {
                    (0, 0)
                } else {
                    (1 + pb.len() as u32, 1)
                }
            } else {
                (2 + pb.len() as u32, 1)
            }
        };
        // dp[i][j]: cheapest alignment of ca[i..] with cb[j..]
        let mut dp = vec![vec![(u32::MAX, u32::MAX); m + 1]; n + 1];
        let mut step = vec![vec![Step::Pair; m + 1]; n + 1];
        dp[n][m] = (0, 0);
        for i in (0..=n).rev() {
            for j in (0..=m).rev() {
                if i == n && j == m {
                    continue;
                }
                let mut best = (u32::MAX, u32::MAX);
                let mut choice = Step::Pair;
                if i < n && j < m {
                    let (c, e) = pair_cost(i, j);
                    let r = dp[i + 1][j + 1];
                    best = (r.0 + c, r.1 + e);
                }
                if i < n {
                    let r = dp[i + 1][j];
                    let cand = (r.0 + 1, r.1 + 1);
                    if cand < best {
                        best = cand;
                        choice = Step::Delete;
                    }
                }
                if j < m {
                    let r = dp[i][j + 1];
                    let cand = (r.0 + at_cost(j), r.1 + 1);
                    if cand < best {
                        best = cand;
                        choice = Step::Insert;
                    }
                }
                dp[i][j] = best;
                step[i][j] = choice;
            }
        }
        let mut path = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < n || j < m {
            let s = step[i][j];
            path.push((s, i, j));
            match s {
                Step::Pair => {
                    i += 1;
                    j += 1
                }
                Step::Delete => i += 1,
                Step::Insert => j += 1,
            }
        }
        let mut f = Frag::default();
        for (k, &(s, i, j)) in path.iter().enumerate() {
            match s {
                Step::Pair => {
                    let (fa, pa) = transform_parts(ca[i]);
                    let (fb, pb) = transform_parts(cb[j]);
                    if fa != fb {
                        f.push(EditOp::new(EditKind::Mt, ca[i].id, None, func_tokens(fb, pb)));
                    } else if pa != pb {
                        f.push(EditOp::new(
                            EditKind::Mp,
                            ca[i].id,
                            None,
                            pb.iter().map(|p| Token::Param(*p)).collect(),
                        ));
                    }
                }
                Step::Delete => f.push(EditOp::new(EditKind::Rt, ca[i].id, None, vec![])),
                Step::Insert => {
                    let anchor = path[k + 1..]
                        .iter()
                        .find(|(s, _, _)| *s == Step::Pair)
                        .map_or(below, |&(_, i2, _)| ca[i2].id);
                    let (fb, pb) = transform_parts(cb[j]);
                    f.push(EditOp::new(EditKind::At, anchor, None, func_tokens(fb, pb)));
                }
            }
        }
        debug_assert_eq!(f.key(), dp[0][0]);
        f
    }

    /// Layout matching on the flattened `Union` spine: items are paired in
    /// order, runs of start items under one spine node are removed with a
    /// single RC, and runs of end items are inserted as one branch.
    fn layout_flat(&mut self, a: &Expr, b: &Expr) -> Frag {
        let mut sa = Vec::new();
        layout_items(a, &mut sa);
        let mut sb = Vec::new();
        layout_items(b, &mut sb);
        let (n, m) = (sa.len(), sb.len());

        // removable spine nodes by the item range they cover
        let mut runs: Vec<Vec<(usize, NodeId)>> = vec![Vec::new(); n + 1];
        fn spine(e: &Expr, is_root: bool, next: &mut usize, runs: &mut Vec<Vec<(usize, NodeId)>>) {
            let lo = *next;
            match &e.node {
                Node::Comb { op: Func::Union, children } => {
                    spine(&children[0], false, next, runs);
                    spine(&children[1], false, next, runs);
                }
                _ => *next += 1,
            }
            if !is_root {
                runs[lo].push((*next, e.id));
            }
        }
        spine(a, true, &mut 0, &mut runs);

        let ins_cost = |j: usize, k: usize| {
            let len: usize = sb[j..k].iter().map(|e| e.token_len()).sum();
            (2 + (k - j - 1) + len) as u32
        };
        let mut pair = vec![vec![Frag::default(); m]; n];
        for i in 0..n {
            for j in 0..m {
                pair[i][j] = self.sub(&[], sa[i], sb[j]);
            }
        }

        #[derive(Clone, Copy)]
        enum Mv {
            Match,
            Delete(NodeId),
            Insert(usize),
        }
        const NONE: (u32, u32) = (u32::MAX, u32::MAX);
        // state (i, j, matched any)
        let mut dp = vec![[NONE; 2]; (n + 1) * (m + 1)];
        let mut back: Vec<[Option<(usize, usize, usize, Mv)>; 2]> = vec![[None; 2]; (n + 1) * (m + 1)];
        let at = |i: usize, j: usize| i * (m + 1) + j;
        dp[0][0] = (0, 0);
        for i in 0..=n {
            for j in 0..=m {
                for f in 0..2 {
                    let cur = dp[at(i, j)][f];
                    if cur == NONE {
                        continue;
                    }
                    let mut relax = |ni: usize, nj: usize, nf: usize, add: (u32, u32), mv: Mv| {
                        let cand = (cur.0 + add.0, cur.1 + add.1);
                        if cand < dp[at(ni, nj)][nf] {
                            dp[at(ni, nj)][nf] = cand;
                            back[at(ni, nj)][nf] = Some((i, j, f, mv));
                        }
                    };
                    if i < n && j < m {
                        relax(i + 1, j + 1, 1, pair[i][j].key(), Mv::Match);
                    }
                    for &(r, id) in &runs[i] {
                        relax(r, j, f, (1, 1), Mv::Delete(id));
                    }
                    for k in j + 1..=m {
                        relax(i, k, f, (ins_cost(j, k), 1), Mv::Insert(k));
                    }
                }
            }
        }
        if dp[at(n, m)][1] == NONE {
            return Frag { cost: u32::MAX, count: u32::MAX, edits: Vec::new() };
        }

        let mut moves = Vec::new();
        let (mut i, mut j, mut f) = (n, m, 1);
        while let Some((pi, pj, pf, mv)) = back[at(i, j)][f] {
            moves.push((pi, pj, mv));
            (i, j, f) = (pi, pj, pf);
        }
        moves.reverse();

        let mut matched_j = vec![None; n];
        for &(i, j, mv) in &moves {
            if matches!(mv, Mv::Match) {
                matched_j[i] = Some(j);
            }
        }
        let mut removals = Frag::default();
        // per start item: insertions above it, insertions below it, own edits
        let mut above: Vec<Vec<EditOp>> = vec![Vec::new(); n];
        let mut below: Vec<Vec<EditOp>> = vec![Vec::new(); n];
        let mut own: Vec<Frag> = vec![Frag::default(); n];
        let mut total = Frag::default();
        for (k, &(i, j, mv)) in moves.iter().enumerate() {
            match mv {
                Mv::Match => own[i] = pair[i][j].clone(),
                Mv::Delete(id) => removals.push(EditOp::new(EditKind::Rc, id, None, vec![])),
                Mv::Insert(end) => {
                    let mut params = Vec::new();
                    for (x, e) in sb[j..end].iter().enumerate() {
                        if x + 1 < end - j {
                            params.push(Token::Func(Func::Union));
                        }
                        e.write_tokens(&mut params);
                    }
                    params.insert(0, Token::Func(Func::Union));
                    let next = moves[k + 1..].iter().find(|mv| matches!(mv.2, Mv::Match)).map(|mv| mv.0);
                    match next {
                        Some(ni) => {
                            let at = surviving_top(sa[ni], &pair[ni][matched_j[ni].expect("matched")].edits);
                            above[ni].push(EditOp::new(EditKind::Ac, at, Some(BranchSide::Left), params))
                        }
                        None => {
                            let pi = moves[..k]
                                .iter()
                                .rev()
                                .find(|mv| matches!(mv.2, Mv::Match))
                                .map(|mv| mv.0)
                                .expect("at least one item is matched");
                            let at = surviving_top(sa[pi], &pair[pi][matched_j[pi].expect("matched")].edits);
                            below[pi].push(EditOp::new(EditKind::Ac, at, Some(BranchSide::Right), params));
                        }
                    }
                }
            }
        }
        total.append(removals);
        for i in 0..n {
            for op in above[i].drain(..) {
                total.push(op);
            }
            for op in below[i].drain(..).rev() {
                total.push(op);
            }
            total.append(std::mem::take(&mut own[i]));
        }
        debug_assert_eq!(total.key(), dp[at(n, m)][1]);
        total
    }

    fn csg_group(&mut self, list: NodeId, start: &[Expr], end: &[Expr]) -> (Frag, Assignment) {
        let (n, m) = (start.len(), end.len());
        let size = n + m;
        let del = match_weight(1, 1);
        let mut pair = vec![vec![Frag::default(); m]; n];
        let mut cost = vec![vec![0i64; size]; size];
        for i in 0..size {
            for j in 0..size {
                cost[i][j] = match (i < n, j < m) {
                    (true, true) => {
                        pair[i][j] = self.sub(&[], &start[i], &end[j]);
                        let k = pair[i][j].key();
                        match_weight(k.0 as usize, k.1 as usize)
                    }
                    (true, false) => del,
                    (false, true) => match_weight(insertion_cost(&end[j]), 1),
                    (false, false) => 0,
                };
            }
        }
        let (weight, rows) = hungarian(&cost);
        let mut f = Frag::default();
        let mut matches = vec![None; n];
        for i in 0..n {
            if rows[i] < m {
                matches[i] = Some(rows[i]);
            } else {
                f.push(EditOp::new(EditKind::Rc, start[i].id, None, vec![]));
            }
        }
        for i in 0..n {
            if let Some(j) = matches[i] {
                f.append(std::mem::take(&mut pair[i][j]));
            }
        }
        let matched: Vec<bool> = (0..m).map(|j| matches.contains(&Some(j))).collect();
        for j in 0..m {
            if !matched[j] {
                let mut params = vec![Token::Func(Func::Union)];
                end[j].write_tokens(&mut params);
                f.push(EditOp::new(EditKind::Ac, list, Some(BranchSide::Right), params));
            }
        }
        (f, Assignment { weight, matches })
    }
}

/// Highest node of `item` that the item's own edits keep. Wrapping this node
/// commutes with those edits, while wrapping a node they remove does not.
fn surviving_top(item: &Expr, own: &[EditOp]) -> NodeId {
    let removed = |id: NodeId, kind: EditKind| own.iter().any(|e| e.kind == kind && e.anchor == id);
    let mut cur = item;
    loop {
        match &cur.node {
            Node::Transform { child, .. } if removed(cur.id, EditKind::Rt) => cur = child,
            Node::Comb { children, .. } if removed(children[0].id, EditKind::Rc) => cur = &children[1],
            Node::Comb { children, .. } if removed(children[1].id, EditKind::Rc) => cur = &children[0],
            _ => return cur.id,
        }
    }
}

/// Sign of the token length change an edit makes. Removed subtrees and
/// transforms are never edited first, so the change does not depend on
/// order.
fn growth(op: &EditOp, start: &Program) -> std::cmp::Ordering {
    use std::cmp::Ordering::*;
    match op.kind {
        EditKind::Rc | EditKind::Rt => Less,
        EditKind::At | EditKind::Ac => Greater,
        EditKind::Mp | EditKind::Mc => Equal,
        EditKind::Mt => match start.find(op.anchor) {
            Some(crate::dsl::NodeRef::Expr(Expr { node: Node::Transform { params, .. }, .. })) => {
                (op.params.len() - 1).cmp(&params.len())
            }
            _ => Equal,
        },
    }
}

fn is_insert(k: EditKind) -> bool {
    matches!(k, EditKind::At | EditKind::Ac)
}

fn is_removal(k: EditKind) -> bool {
    matches!(k, EditKind::Rc | EditKind::Rt)
}

/// Whether two edits listed in this order must keep it: both wrap the same
/// node, or one removes the other's anchor.
fn must_precede(a: &EditOp, b: &EditOp) -> bool {
    a.anchor == b.anchor && ((is_insert(a.kind) && is_insert(b.kind)) || is_removal(a.kind) || is_removal(b.kind))
}

/// Reorders edits so that shrinking edits come first and growing ones last,
/// keeping the relative order of edits that do not commute.
fn shrink_first(edits: Vec<EditOp>, start: &Program) -> Vec<EditOp> {
    let rank: Vec<std::cmp::Ordering> = edits.iter().map(|e| growth(e, start)).collect();
    let mut done = vec![false; edits.len()];
    let mut order = Vec::with_capacity(edits.len());
    for _ in 0..edits.len() {
        let pick = (0..edits.len())
            .filter(|&j| !done[j] && (0..j).all(|i| done[i] || !must_precede(&edits[i], &edits[j])))
            .min_by_key(|&j| (rank[j], j))
            .expect("some edit is ready");
        done[pick] = true;
        order.push(pick);
    }
    let mut slots: Vec<Option<EditOp>> = edits.into_iter().map(Some).collect();
    order.into_iter().map(|i| slots[i].take().expect("each index once")).collect()
}

/// Orders edits that do not commute and puts every shrinking edit before every
/// growing one. The length of a partially applied script then never exceeds
/// the larger of the start and end lengths.
fn with_deps(edits: Vec<EditOp>, start: &Program) -> EditScript {
    use std::cmp::Ordering::*;
    let rank: Vec<_> = edits.iter().map(|e| growth(e, start)).collect();
    let mut deps = Vec::new();
    for j in 0..edits.len() {
        for i in 0..j {
            if must_precede(&edits[i], &edits[j]) || (rank[i] == Less && rank[j] == Greater) {
                deps.push((i, j));
            }
        }
    }
    debug_assert!((0..edits.len()).all(|j| (0..j).all(|i| !(rank[j] == Less && rank[i] == Greater))), "{}", edits.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; "));
    EditScript { edits, deps }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{parse_text, Quant};
    use crate::edit::apply_script_in_order;
    use crate::exec::execute;

    fn prog(s: &str, d: Domain) -> Program {
        parse_text(s, d, Quant::default()).unwrap()
    }

    fn check(a: &str, b: &str, d: Domain) -> EditScript {
        let (pa, pb) = (prog(a, d), prog(b, d));
        let s = find_edits(&pa, &pb).unwrap();
        let got = apply_script_in_order(&pa, &s).unwrap();
        assert_eq!(execute(&got).unwrap(), execute(&pb).unwrap(), "{a} -> {b} via {:?}", s.edits.iter().map(|e| e.to_string()).collect::<Vec<_>>());
        s
    }

    #[test]
    fn identical_programs_need_nothing() {
        let s = check("Union(Prim(square),Move(0.25,0)(Prim(circle)))", "Union(Prim(square),Move(0.25,0)(Prim(circle)))", Domain::Layout);
        assert!(s.is_empty());
    }

    #[test]
    fn single_parameter_change() {
        let s = check("Move(0.25,0)(Prim(circle))", "Move(0.5,0)(Prim(circle))", Domain::Layout);
        assert_eq!(s.len(), 1);
        assert_eq!(s.cost(), 3);
    }

    #[test]
    fn chain_insert_and_delete() {
        let s = check("Move(0.25,0)(Prim(circle))", "Scale(0.5,0.5)(Move(0.25,0)(Prim(circle)))", Domain::Layout);
        assert_eq!(s.cost(), 4);
        let s = check("Scale(0.5,0.5)(Move(0.25,0)(Prim(circle)))", "Move(0.25,0)(Prim(circle))", Domain::Layout);
        assert_eq!(s.cost(), 1);
    }

    #[test]
    fn adding_a_branch_costs_its_tokens() {
        let s = check("Prim(square)", "Union(Prim(square),Prim(circle))", Domain::Layout);
        assert_eq!(s.cost(), 1 + 1 + 2);
        let s = check("Union(Prim(square),Prim(circle))", "Prim(circle)", Domain::Layout);
        assert_eq!(s.cost(), 1);
    }

    #[test]
    fn csg_lists_match_by_assignment() {
        let s = check(
            "POS(Prim(circle),Move(0.25,0)(Prim(square))) NEG()",
            "POS(Move(0.25,0)(Prim(square)),Prim(circle)) NEG(Prim(square))",
            Domain::Csg2d,
        );
        assert_eq!(s.cost(), 2 + 2);
    }

    #[test]
    fn crossed_children_under_union() {
        let s = check(
            "POS(Union(Prim(circle),Prim(square))) NEG()",
            "POS(Union(Prim(square),Prim(circle))) NEG()",
            Domain::Csg2d,
        );
        assert!(s.is_empty());
    }

    #[test]
    fn layout_run_insertions() {
        check(
            "Union(Prim(square),Prim(circle))",
            "Union(Prim(triangle),Union(Prim(square),Union(Prim(circle),Prim(square))))",
            Domain::Layout,
        );
        check(
            "Union(Prim(square),Union(Prim(circle),Prim(triangle)))",
            "Prim(triangle)",
            Domain::Layout,
        );
    }

    #[test]
    fn removals_come_first() {
        let s = check(
            "POS(Prim(circle),Move(0.25,0)(Prim(square))) NEG(Prim(circle))",
            "POS(Scale(0.5,0.5)(Prim(circle))) NEG()",
            Domain::Csg2d,
        );
        let first_non_removal = s.edits.iter().position(|e| !is_removal(e.kind));
        if let Some(p) = first_non_removal {
            assert!(s.edits[p..].iter().all(|e| !is_removal(e.kind)));
        }
    }
}
