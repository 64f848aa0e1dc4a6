use std::collections::BTreeSet;

use rand::seq::{index, IndexedRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dsl::{parse, Program, Token};
use crate::edit::wire::{from_wire, WireEdit, WireSide};
use crate::edit::{apply_edit, token_anchor, BranchSide, EditKind, EditScript};
use crate::exec::execute;

/// Subsets drawn per size.
const PER_SIZE: usize = 5;
/// Scripts up to this many edits have their closed subsets enumerated.
const EXACT_LIMIT: usize = 16;

/// One supervised example: a program with sentinels marking where an edit
/// goes, and the edit itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainingTuple {
    /// Program tokens with a sentinel before the anchor token and another
    /// at the end.
    pub input_tokens: Vec<Token>,
    pub sentinel_kind: EditKind,
    /// Position of the first sentinel in `input_tokens`.
    pub sentinel_index: usize,
    pub target_kind: EditKind,
    /// Anchor token index in the program without sentinels.
    pub target_location: usize,
    /// Edit parameters followed by `END`.
    pub target_params: Vec<Token>,
    pub branch_side: Option<BranchSide>,
    /// Script edits already applied to reach this program.
    pub prior: Vec<usize>,
    /// Script index of the target edit.
    pub edit_index: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TupleStats {
    /// Tuples whose target parameters exceed the domain's edit length.
    pub skipped_long: usize,
    /// Partial scripts that could not be applied.
    pub skipped_apply: usize,
}

/// Draws training tuples from a script. For each size below the script
/// length, up to five dependency-closed subsets of edits are applied to
/// `start`; every remaining edit whose prerequisites are met then yields one
/// tuple.
pub fn extract_tuples<R: Rng>(start: &Program, script: &EditScript, rng: &mut R) -> (Vec<TrainingTuple>, TupleStats) {
    let n = script.len();
    let preds: Vec<Vec<usize>> = (0..n).map(|j| script.predecessors(j)).collect();
    let mut stats = TupleStats::default();
    let mut out = Vec::new();
    let max_params = start.domain().max_edit_len();
    for size in 0..n {
        for subset in closed_subsets(&preds, size, rng) {
            let mut p = start.clone();
            let mut ok = true;
            for &i in &subset {
                match apply_edit(&p, &script.edits[i]) {
                    Ok(q) => p = q,
                    Err(_) => {
                        ok = false;
                        break;
                    }
                }
            }
            if !ok {
                stats.skipped_apply += 1;
                continue;
            }
            let tokens = p.tokens();
            for e in 0..n {
                if subset.contains(&e) || !preds[e].iter().all(|x| subset.contains(x)) {
                    continue;
                }
                let op = &script.edits[e];
                let target_params = op.target_params();
                if target_params.len() > max_params {
                    stats.skipped_long += 1;
                    continue;
                }
                let loc = token_anchor(&p, op.anchor).expect("script anchors exist once prerequisites ran");
                let mut input = Vec::with_capacity(tokens.len() + 2);
                input.extend_from_slice(&tokens[..loc]);
                input.push(Token::Sentinel(op.kind));
                input.extend_from_slice(&tokens[loc..]);
                input.push(Token::Sentinel(op.kind));
                out.push(TrainingTuple {
                    input_tokens: input,
                    sentinel_kind: op.kind,
                    sentinel_index: loc,
                    target_kind: op.kind,
                    target_location: loc,
                    target_params,
                    branch_side: op.side,
                    prior: subset.clone(),
                    edit_index: e,
                });
            }
        }
    }
    (out, stats)
}

/// Dependency-closed subsets of the given size, sorted ascending, at most
/// [`PER_SIZE`] of them.
fn closed_subsets<R: Rng>(preds: &[Vec<usize>], size: usize, rng: &mut R) -> Vec<Vec<usize>> {
    let n = preds.len();
    if n <= EXACT_LIMIT {
        let masks: Vec<u32> = (0u32..1 << n)
            .filter(|m| m.count_ones() as usize == size)
            .filter(|m| (0..n).all(|j| m & (1 << j) == 0 || preds[j].iter().all(|&i| m & (1 << i) != 0)))
            .collect();
        let picked: Vec<u32> = if masks.len() <= PER_SIZE {
            masks
        } else {
            let mut idx = index::sample(rng, masks.len(), PER_SIZE).into_vec();
            idx.sort_unstable();
            idx.into_iter().map(|i| masks[i]).collect()
        };
        return picked.into_iter().map(|m| (0..n).filter(|j| m & (1 << j) != 0).collect()).collect();
    }
    // too many to list: random prefixes of random topological orders
    let mut found = BTreeSet::new();
    for _ in 0..PER_SIZE * 5 {
        let mut done = vec![false; n];
        let mut chosen = Vec::with_capacity(size);
        for _ in 0..size {
            let ready: Vec<usize> =
                (0..n).filter(|&j| !done[j] && preds[j].iter().all(|&i| done[i])).collect();
            let &j = ready.choose(rng).expect("acyclic deps leave a ready edit");
            done[j] = true;
            chosen.push(j);
        }
        chosen.sort_unstable();
        found.insert(chosen);
        if found.len() == PER_SIZE {
            break;
        }
    }
    found.into_iter().collect()
}

/// Drops sentinel tokens.
pub fn strip_sentinels(tokens: &[Token]) -> Vec<Token> {
    tokens.iter().copied().filter(|t| !matches!(t, Token::Sentinel(_))).collect()
}

/// Replays a tuple: the de-sentineled input must parse to the program
/// reached by its prior edits, its target edit must apply there, and the
/// rest of the script must then reach `end`'s output.
pub fn validate_tuple(start: &Program, end: &Program, script: &EditScript, t: &TrainingTuple) -> Result<(), String> {
    let mut p = start.clone();
    for &i in &t.prior {
        p = apply_edit(&p, &script.edits[i]).map_err(|e| format!("prior edit {i}: {e}"))?;
    }
    let q = parse(&strip_sentinels(&t.input_tokens), start.domain(), start.quant()).map_err(|e| e.to_string())?;
    if q != p {
        return Err("input does not match the partially edited program".into());
    }
    let mut params = t.target_params.clone();
    if params.pop() != Some(Token::End) {
        return Err("target parameters lack END".into());
    }
    let wire = WireEdit {
        kind: t.target_kind.to_string(),
        token_index: t.target_location,
        branch_side: t.branch_side.map(|s| match s {
            BranchSide::Left => WireSide::Named("left".into()),
            BranchSide::Right => WireSide::Named("right".into()),
            BranchSide::Slot(i) => WireSide::Slot(i),
        }),
        params: params.iter().map(Token::to_string).collect(),
    };
    let op = from_wire(&q, &wire).map_err(|e| e.to_string())?;
    let via_tuple = apply_edit(&q, &op).map_err(|e| e.to_string())?;
    let mut p = apply_edit(&p, &script.edits[t.edit_index]).map_err(|e| e.to_string())?;
    if via_tuple != p {
        return Err("target edit disagrees with the script edit".into());
    }
    for i in 0..script.len() {
        if i != t.edit_index && !t.prior.contains(&i) {
            p = apply_edit(&p, &script.edits[i]).map_err(|e| format!("remaining edit {i}: {e}"))?;
        }
    }
    let got = execute(&p).map_err(|e| e.to_string())?;
    let want = execute(end).map_err(|e| e.to_string())?;
    if got != want {
        return Err("remaining edits do not reach the end output".into());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diff::find_edits;
    use crate::dsl::{parse_text, Domain, Quant};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn two_independent_edits_give_four_tuples() {
        let d = Domain::Layout;
        let a = parse_text("Union(Move(0.25,0)(Prim(square)),Prim(circle))", d, Quant::default()).unwrap();
        let b = parse_text("Union(Move(0.5,0)(Prim(square)),Prim(triangle))", d, Quant::default()).unwrap();
        let s = find_edits(&a, &b).unwrap();
        assert_eq!(s.len(), 2);
        let (tuples, stats) = extract_tuples(&a, &s, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(tuples.len(), 4);
        assert_eq!(stats, TupleStats::default());
        for t in &tuples {
            validate_tuple(&a, &b, &s, t).unwrap();
            assert_eq!(t.input_tokens[t.sentinel_index], Token::Sentinel(t.sentinel_kind));
            assert_eq!(*t.input_tokens.last().unwrap(), Token::Sentinel(t.sentinel_kind));
        }
    }
}
