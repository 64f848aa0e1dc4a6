use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{apply_edit, has_comb_parent, list_item_position, BranchSide, EditKind, EditOp};
use crate::dsl::{combinators, shapes, slot_values, transforms, Domain, Expr, Func, Node, Param, Program, Token};
use crate::hash::Fnv;
use crate::sampler::{random_expr, random_params, random_transform, ExprDist};

/// Bounds for [`enumerate_edits`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnumConfig {
    /// Grid steps tried for each quantized parameter, in both directions.
    pub mp_offsets: Vec<u16>,
    /// Sampled candidates per site for AT and AC. MT gets one sample per
    /// alternative function.
    pub max_per_site: usize,
    pub seed: u64,
    pub branch: ExprDist,
}

impl EnumConfig {
    pub fn new(domain: Domain, seed: u64) -> EnumConfig {
        EnumConfig { mp_offsets: vec![1, 2, 4, 8], max_per_site: 2, seed, branch: ExprDist::branch(domain) }
    }
}

/// Every site a kind can anchor on, with candidate parameters. Sampled
/// parameters come from an rng seeded by the config seed and the program, so
/// the same program always yields the same list. Only candidates that apply
/// cleanly are returned.
pub fn enumerate_edits(program: &Program, cfg: &EnumConfig) -> Vec<EditOp> {
    let domain = program.domain();
    let quant = program.quant();
    let mut fp = Fnv::default().u64(cfg.seed);
    for t in program.tokens() {
        fp = fp.str(&t.to_string());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(fp.finish());
    let mut out = Vec::new();
    let ids = program.node_ids();
    let max_branch = domain.max_edit_len().saturating_sub(3);

    for id in ids {
        let node = program.find(id).expect("listed id");
        let expr = match node {
            crate::dsl::NodeRef::List(_) => {
                for _ in 0..cfg.max_per_site {
                    let side = if rng.random_bool(0.5) { BranchSide::Left } else { BranchSide::Right };
                    if let Some(branch) = sample_branch(domain, quant, &cfg.branch, max_branch, &mut rng) {
                        let mut params = vec![Token::Func(Func::Union)];
                        params.extend(branch);
                        out.push(EditOp::new(EditKind::Ac, id, Some(side), params));
                    }
                }
                continue;
            }
            crate::dsl::NodeRef::Expr(e) => e,
        };
        match &expr.node {
            Node::Transform { func, params, .. } => {
                for alt in param_variants(domain, quant, *func, params, &cfg.mp_offsets) {
                    out.push(EditOp::new(EditKind::Mp, id, None, alt.into_iter().map(Token::Param).collect()));
                }
                for f in transforms(domain).iter().filter(|f| *f != func) {
                    let p = random_params(domain, quant, *f, &cfg.branch, &mut rng);
                    out.push(EditOp::new(EditKind::Mt, id, None, func_tokens(*f, &p)));
                }
            }
            Node::Prim { shape } => {
                for s in shapes(domain).iter().filter(|s| *s != shape) {
                    out.push(EditOp::new(EditKind::Mp, id, None, vec![Token::Param(Param::Shape(*s))]));
                }
            }
            Node::Comb { .. } => {}
        }
        for _ in 0..cfg.max_per_site {
            let (f, p) = random_transform(domain, quant, &cfg.branch, &mut rng);
            out.push(EditOp::new(EditKind::At, id, None, func_tokens(f, &p)));
        }
        if matches!(expr.node, Node::Transform { .. }) {
            out.push(EditOp::new(EditKind::Rt, id, None, vec![]));
        }
        if let Node::Comb { op, .. } = &expr.node {
            if domain != Domain::Layout {
                for alt in combinators(domain).iter().filter(|c| *c != op) {
                    out.push(EditOp::new(EditKind::Mc, id, None, vec![Token::Func(*alt)]));
                }
            }
        }
        if has_comb_parent(program, id) || list_item_position(program, id).is_some() {
            out.push(EditOp::new(EditKind::Rc, id, None, vec![]));
        }
        for _ in 0..cfg.max_per_site {
            let op = *combinators(domain).choose(&mut rng).expect("domain has combinators");
            let side = if rng.random_bool(0.5) { BranchSide::Left } else { BranchSide::Right };
            if let Some(branch) = sample_branch(domain, quant, &cfg.branch, max_branch, &mut rng) {
                let mut params = vec![Token::Func(op)];
                params.extend(branch);
                out.push(EditOp::new(EditKind::Ac, id, Some(side), params));
            }
        }
    }
    out.retain(|op| apply_edit(program, op).is_ok());
    out
}

fn func_tokens(f: Func, params: &[Param]) -> Vec<Token> {
    let mut t = vec![Token::Func(f)];
    t.extend(params.iter().map(|p| Token::Param(*p)));
    t
}

/// A branch whose tokens fit in `max_len`, or `None` if sampling keeps
/// overshooting.
fn sample_branch<R: Rng>(
    domain: Domain,
    quant: crate::dsl::Quant,
    dist: &ExprDist,
    max_len: usize,
    rng: &mut R,
) -> Option<Vec<Token>> {
    for _ in 0..8 {
        let e: Expr = random_expr(domain, quant, dist, rng);
        if e.token_len() <= max_len {
            return Some(e.tokens());
        }
    }
    None
}

/// Parameter lists differing from `params` in exactly one slot.
fn param_variants(
    domain: Domain,
    quant: crate::dsl::Quant,
    func: Func,
    params: &[Param],
    offsets: &[u16],
) -> Vec<Vec<Param>> {
    let sig = crate::dsl::signature(domain, func).expect("valid transform");
    let mut out = Vec::new();
    for (i, slot) in sig.iter().enumerate() {
        match params[i] {
            Param::Quant(v) => {
                let mut seen = Vec::new();
                for &off in offsets {
                    for cand in [v.checked_sub(off), v.checked_add(off)].into_iter().flatten() {
                        if cand < quant.levels() && !seen.contains(&cand) {
                            seen.push(cand);
                            let mut alt = params.to_vec();
                            alt[i] = Param::Quant(cand);
                            out.push(alt);
                        }
                    }
                }
            }
            cur => {
                for alt_v in slot_values(domain, quant, *slot) {
                    if alt_v != cur {
                        let mut alt = params.to_vec();
                        alt[i] = alt_v;
                        out.push(alt);
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{parse_text, Quant};

    #[test]
    fn bare_primitive_gets_only_insertions_and_shape_changes() {
        let p = parse_text("Prim(square)", Domain::Layout, Quant::default()).unwrap();
        let ops = enumerate_edits(&p, &EnumConfig::new(Domain::Layout, 0));
        assert!(ops.iter().any(|o| o.kind == EditKind::At));
        assert!(ops.iter().any(|o| o.kind == EditKind::Ac));
        for o in &ops {
            assert!(matches!(o.kind, EditKind::At | EditKind::Ac | EditKind::Mp), "{o}");
        }
    }

    #[test]
    fn rt_count_matches_transforms() {
        let p = parse_text(
            "POS(Move(0,0)(Scale(0.5,0.5)(Prim(square))),Rotate(0.25)(Prim(circle))) NEG()",
            Domain::Csg2d,
            Quant::default(),
        )
        .unwrap();
        let ops = enumerate_edits(&p, &EnumConfig::new(Domain::Csg2d, 3));
        assert_eq!(ops.iter().filter(|o| o.kind == EditKind::Rt).count(), 3);
        assert_eq!(ops, enumerate_edits(&p, &EnumConfig::new(Domain::Csg2d, 3)));
    }

    #[test]
    fn body_kinds_are_covered() {
        let p = parse_text(
            "POS(Difference(Move(0,0)(Prim(square)),Prim(circle))) NEG(Prim(circle))",
            Domain::Csg2d,
            Quant::default(),
        )
        .unwrap();
        let ops = enumerate_edits(&p, &EnumConfig::new(Domain::Csg2d, 3));
        for k in crate::edit::EditKind::ALL {
            assert!(ops.iter().any(|o| o.kind == k), "{k} missing");
        }
    }
}
