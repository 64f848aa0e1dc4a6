//! Shared fixtures for the acceptance suite and the search calibration.

#![allow(dead_code)]

use std::collections::HashSet;
use std::sync::atomic::{AtomicUsize, Ordering};

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use vpedit_core::dsl::{Domain, Program};
use vpedit_core::edit::{apply_edit, enumerate_edits, EnumConfig};
use vpedit_core::exec::{execute, Visual};
use vpedit_core::hash::derive_seed;
use vpedit_core::par::Parallelism;
use vpedit_core::sampler::{sample_programs, SamplerConfig};
use vpedit_core::search::{
    run_search_observed, EditPolicy, GreedyEnumPolicy, InitSource, SearchConfig, SearchError, SearchState,
};

pub const RECOVERY_SEED: u64 = 20_240_601;
pub const RECOVERY_TARGETS: usize = 100;
pub const CALIBRATION_INSTANCES: usize = 20;

/// Frozen thresholds for the search recovery experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecoveryThresholds {
    pub seed: u64,
    pub calibration_instances: usize,
    pub oracle_exact_k1: f64,
    pub oracle_exact_k12: f64,
    pub greedy_exact_k1: f64,
    pub greedy_improved_all: f64,
    pub min_exact_k1: f64,
    pub min_improved_all: f64,
}

pub fn thresholds_path() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/search_recovery.json")
}

pub struct RecoveryInstance {
    pub k: usize,
    pub start: Program,
    pub target_program: Program,
    pub target: Visual,
}

/// Enumeration config shared by target construction, the greedy policy and
/// the oracle, so all three work in the same edit space.
pub fn policy_enum() -> EnumConfig {
    EnumConfig::new(Domain::Layout, derive_seed(RECOVERY_SEED, "policy"))
}

/// Target `i` applies `k = 1 + i % max_k` random edits to a sampled Layout
/// program, each of which changes the raster.
pub fn recovery_instances(count: usize, max_k: usize) -> Vec<RecoveryInstance> {
    let starts = sample_programs(&SamplerConfig::new(Domain::Layout, RECOVERY_SEED), count * 2).unwrap();
    let ecfg = policy_enum();
    let mut out = Vec::new();
    for (i, start) in starts.into_iter().enumerate() {
        if out.len() == count {
            break;
        }
        let k = 1 + out.len() % max_k;
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(RECOVERY_SEED, &format!("walk{i}")));
        let v0 = execute(&start).unwrap();
        let mut cur = start.clone();
        let mut seen = HashSet::from([v0.clone()]);
        let mut ok = true;
        for _ in 0..k {
            let cands = enumerate_edits(&cur, &ecfg);
            let mut next = None;
            for _ in 0..50 {
                let Some(op) = cands.choose(&mut rng) else { break };
                let Ok(p) = apply_edit(&cur, op) else { continue };
                let Ok(v) = execute(&p) else { continue };
                if seen.insert(v) {
                    next = Some(p);
                    break;
                }
            }
            match next {
                Some(p) => cur = p,
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            let target = execute(&cur).unwrap();
            out.push(RecoveryInstance { k, start, target_program: cur, target });
        }
    }
    assert_eq!(out.len(), count, "not enough usable walks");
    out
}

/// Population: the start program plus sampled fillers. Fillers that already
/// reproduce the target are left out.
pub fn recovery_config(inst: &RecoveryInstance, idx: usize, mode: Parallelism) -> SearchConfig {
    let mut cfg = SearchConfig::new(Domain::Layout, derive_seed(RECOVERY_SEED, &format!("search{idx}")));
    cfg.pop_size = 32;
    cfg.proposals = 3;
    cfg.rounds = 2 * inst.k;
    cfg.parallelism = mode;
    let fill = SamplerConfig::new(Domain::Layout, derive_seed(RECOVERY_SEED, &format!("fill{idx}")));
    let mut init = vec![inst.start.clone()];
    init.extend(
        sample_programs(&fill, 64)
            .unwrap()
            .into_iter()
            .filter(|p| execute(p).ok().as_ref() != Some(&inst.target))
            .take(31),
    );
    cfg.init = InitSource::Programs(init);
    cfg
}

pub struct RecoveryResult {
    pub exact: bool,
    pub improved: bool,
}

pub fn run_recovery(inst: &RecoveryInstance, idx: usize, policy: &GreedyEnumPolicy) -> RecoveryResult {
    let cfg = recovery_config(inst, idx, Parallelism::Sequential);
    let state = observed_search(&inst.target, Domain::Layout, &cfg, policy).unwrap();
    let initial = state.history[0].best;
    RecoveryResult {
        exact: state.best_ever.score.is_optimal(),
        improved: state.best_ever.score.better(&initial).unwrap(),
    }
}

/// Whether some program within `k` enumerated edits of `start` reproduces
/// the target exactly.
pub fn oracle_reaches(start: &Program, target: &Visual, k: usize, cfg: &EnumConfig) -> bool {
    let mut frontier = vec![start.clone()];
    let mut seen: HashSet<String> = HashSet::from([start.to_text()]);
    for _ in 0..k {
        let mut next = Vec::new();
        for p in &frontier {
            for op in enumerate_edits(p, cfg) {
                let Ok(q) = apply_edit(p, &op) else { continue };
                if !seen.insert(q.to_text()) {
                    continue;
                }
                if execute(&q).ok().as_ref() == Some(target) {
                    return true;
                }
                next.push(q);
            }
        }
        frontier = next;
    }
    false
}

/// Searches observed so far, and how many times `bestEver` got worse.
pub static SEARCHES: AtomicUsize = AtomicUsize::new(0);
pub static ROUNDS_SEEN: AtomicUsize = AtomicUsize::new(0);
pub static BEST_DECREASES: AtomicUsize = AtomicUsize::new(0);

/// Runs a search and checks after every round that the best-ever score did
/// not get worse.
pub fn observed_search(
    target: &Visual,
    domain: Domain,
    cfg: &SearchConfig,
    policy: &dyn EditPolicy,
) -> Result<SearchState, SearchError> {
    SEARCHES.fetch_add(1, Ordering::Relaxed);
    let mut last: Option<vpedit_core::Score> = None;
    let r = run_search_observed(target, domain, cfg, policy, &mut |s| {
        ROUNDS_SEEN.fetch_add(1, Ordering::Relaxed);
        if let Some(prev) = last {
            if prev.better(&s.best_ever.score).unwrap() {
                BEST_DECREASES.fetch_add(1, Ordering::Relaxed);
            }
        }
        last = Some(s.best_ever.score);
    });
    r
}
