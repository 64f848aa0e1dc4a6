use std::collections::HashMap;
use std::sync::Mutex;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{EditPolicy, PolicyError};
use crate::dsl::{tokens_to_string, Program};
use crate::edit::{apply_edit, enumerate_edits, token_anchor, EditOp, EnumConfig};
use crate::exec::{encode_visual, execute, Visual};
use crate::hash::Fnv;
use crate::metrics::score;

/// Uniform draws from the enumerated edits. The rng is seeded from the
/// policy seed and the program, so proposals do not depend on call order.
#[derive(Debug, Clone)]
pub struct RandomEditPolicy {
    pub cfg: EnumConfig,
    pub seed: u64,
}

impl RandomEditPolicy {
    pub fn new(cfg: EnumConfig, seed: u64) -> RandomEditPolicy {
        RandomEditPolicy { cfg, seed }
    }
}

impl EditPolicy for RandomEditPolicy {
    fn propose(&self, program: &Program, _: &Visual, _: &Visual, max: usize) -> Result<Vec<EditOp>, PolicyError> {
        let key = Fnv::default().u64(self.seed).str(&tokens_to_string(&program.tokens())).finish();
        let mut cfg = self.cfg.clone();
        cfg.seed = key;
        let ops = enumerate_edits(program, &cfg);
        let mut rng = ChaCha8Rng::seed_from_u64(key);
        let k = max.min(ops.len());
        let mut picked = index::sample(&mut rng, ops.len(), k).into_vec();
        picked.sort_unstable();
        Ok(picked.into_iter().map(|i| ops[i].clone()).collect())
    }
}

/// Scores every enumerated edit against the target and proposes the best
/// strict improvements.
#[derive(Debug)]
pub struct GreedyEnumPolicy {
    pub cfg: EnumConfig,
    cache: Mutex<HashMap<(u64, String), Vec<EditOp>>>,
}

const CACHE_LIMIT: usize = 1 << 14;

impl GreedyEnumPolicy {
    pub fn new(cfg: EnumConfig) -> GreedyEnumPolicy {
        GreedyEnumPolicy { cfg, cache: Mutex::new(HashMap::new()) }
    }

    /// All strictly improving edits, best first. Equal gains go to the lower
    /// anchor token, then to enumeration order.
    pub fn ranked(&self, program: &Program, visual: &Visual, target: &Visual) -> Vec<EditOp> {
        let Ok(base) = score(visual, target) else {
            return Vec::new();
        };
        let mut scored = Vec::new();
        for (i, op) in enumerate_edits(program, &self.cfg).into_iter().enumerate() {
            let Ok(p) = apply_edit(program, &op) else { continue };
            let Ok(v) = execute(&p) else { continue };
            let Ok(s) = score(&v, target) else { continue };
            if s.better(&base).unwrap_or(false) {
                let anchor = token_anchor(program, op.anchor).unwrap_or(usize::MAX);
                scored.push((s, anchor, i, op));
            }
        }
        scored.sort_by(|a, b| a.0.rank_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        scored.into_iter().map(|(_, _, _, op)| op).collect()
    }
}

impl EditPolicy for GreedyEnumPolicy {
    fn propose(&self, program: &Program, visual: &Visual, target: &Visual, max: usize)
        -> Result<Vec<EditOp>, PolicyError> {
        let key = (Fnv::default().bytes(&encode_visual(target)).finish(), tokens_to_string(&program.tokens()));
        if let Some(hit) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(hit.iter().take(max).cloned().collect());
        }
        let ranked = self.ranked(program, visual, target);
        let mut cache = self.cache.lock().expect("cache lock");
        if cache.len() >= CACHE_LIMIT {
            cache.clear();
        }
        cache.insert(key, ranked.clone());
        Ok(ranked.into_iter().take(max).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{parse_text, Domain, Quant};
    use crate::metrics::score;

    #[test]
    fn greedy_is_empty_at_the_optimum_and_sorted_otherwise() {
        let d = Domain::Layout;
        let a = parse_text("Move(0.25,0.25)(Prim(square))", d, Quant::default()).unwrap();
        let va = execute(&a).unwrap();
        let g = GreedyEnumPolicy::new(EnumConfig::new(d, 0));
        assert!(g.propose(&a, &va, &va, 3).unwrap().is_empty());
        let b = parse_text("Move(0.5,0.25)(Prim(square))", d, Quant::default()).unwrap();
        let vb = execute(&b).unwrap();
        let ranked = g.ranked(&a, &va, &vb);
        let scores: Vec<_> =
            ranked.iter().map(|op| score(&execute(&apply_edit(&a, op).unwrap()).unwrap(), &vb).unwrap()).collect();
        assert!(scores[0].is_optimal());
        for w in scores.windows(2) {
            assert!(!w[1].better(&w[0]).unwrap());
        }
    }

    #[test]
    fn random_policy_respects_width_and_seed() {
        let d = Domain::Csg2d;
        let a = parse_text("POS(Move(0.25,0.25)(Prim(square))) NEG(Prim(circle))", d, Quant::default()).unwrap();
        let va = execute(&a).unwrap();
        let r = RandomEditPolicy::new(EnumConfig::new(d, 0), 7);
        let x = r.propose(&a, &va, &va, 3).unwrap();
        assert_eq!(x.len(), 3);
        assert_eq!(x, r.propose(&a, &va, &va, 3).unwrap());
        for op in &x {
            apply_edit(&a, op).unwrap();
        }
    }
}
