//! Population search toward a visual target: each round every member gets
//! edit proposals from a policy, parents and children are scored together,
//! and the best `P` survive.

mod external;
mod policy;

use std::cmp::Ordering;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::dsl::{tokens_to_string, Domain, Program};
use crate::edit::{apply_edit, EditOp};
use crate::exec::{execute, Visual};
use crate::hash::derive_seed;
use crate::metrics::{score, Metric, Score};
use crate::par::{self, Parallelism};
use crate::sampler::{sample_programs, SamplerConfig};

pub use external::{ExternalPolicy, PolicyRequest, PolicyResponse, DEFAULT_TIMEOUT};
pub use policy::{GreedyEnumPolicy, RandomEditPolicy};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolicyError {
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("policy did not answer within {0} ms")]
    Timeout(u64),
    #[error("policy process: {0}")]
    Io(String),
}

/// Source of edit proposals for one member.
pub trait EditPolicy: Send + Sync {
    /// Up to `max` edits for `program`, whose output is `visual`.
    fn propose(&self, program: &Program, visual: &Visual, target: &Visual, max: usize)
        -> Result<Vec<EditOp>, PolicyError>;

    /// Returned edits that failed validation and were discarded.
    fn dropped(&self) -> usize {
        0
    }
}

/// Source of whole programs for the initial population.
pub trait ProgramProposer: Send + Sync {
    fn propose_programs(&self, target: &Visual, count: usize) -> Result<Vec<Program>, PolicyError>;
}

#[derive(Clone)]
pub enum InitSource {
    /// Fresh programs from the sampler, seeded from the search seed.
    Sampler,
    /// Given programs, repeated cyclically up to the population size.
    Programs(Vec<Program>),
    Policy(Arc<dyn ProgramProposer>),
}

impl std::fmt::Debug for InitSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InitSource::Sampler => write!(f, "Sampler"),
            InitSource::Programs(p) => write!(f, "Programs({})", p.len()),
            InitSource::Policy(_) => write!(f, "Policy"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Selection {
    /// Keep the `P` best of the pool.
    TruncateTopP,
    /// Draw `P` distinct members with weight `exp(-rank / temperature)`.
    StochasticRank(f64),
}

#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub pop_size: usize,
    pub rounds: usize,
    pub proposals: usize,
    pub init: InitSource,
    pub selection: Selection,
    pub elitism: bool,
    pub seed: u64,
    pub time_budget_ms: Option<u64>,
    pub parallelism: Parallelism,
}

impl SearchConfig {
    pub fn new(domain: Domain, seed: u64) -> SearchConfig {
        let (pop_size, rounds) = match domain {
            Domain::Layout | Domain::Csg2d => (32, 32),
            Domain::Csg3d => (80, 25),
        };
        SearchConfig {
            pop_size,
            rounds,
            proposals: 3,
            init: InitSource::Sampler,
            selection: Selection::TruncateTopP,
            elitism: true,
            seed,
            time_budget_ms: None,
            parallelism: Parallelism::Parallel,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Member {
    pub program: Program,
    pub visual: Visual,
    pub score: Score,
}

/// Summary line of one round. Round 0 is the initial population.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundStats {
    pub round: usize,
    pub best: Score,
    pub mean: f64,
    pub pool: usize,
    pub wallclock_ms: u64,
}

#[derive(Debug, Clone)]
pub struct SearchState {
    pub population: Vec<Member>,
    pub best_ever: Member,
    pub round: usize,
    pub history: Vec<RoundStats>,
    /// Proposed edits that failed to apply or execute.
    pub dropped: usize,
    pub rng: ChaCha8Rng,
}

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("initial population is empty: {0}")]
    Init(String),
    #[error("target is a {found} visual, search is over {expected}")]
    Target { expected: Domain, found: Domain },
    /// The state is the one reached at the end of the last full round.
    #[error("policy failed on member {member} in round {round}: {source}")]
    Policy { member: usize, round: usize, source: PolicyError, state: Box<SearchState> },
}

/// Best first; equal scores ordered by token text so the order never depends
/// on scheduling.
fn member_cmp(a: &Member, b: &Member, ka: &str, kb: &str) -> Ordering {
    a.score.rank_cmp(&b.score).then_with(|| ka.cmp(kb))
}

fn sort_members(members: Vec<Member>) -> Vec<Member> {
    let mut keyed: Vec<(String, Member)> =
        members.into_iter().map(|m| (tokens_to_string(&m.program.tokens()), m)).collect();
    keyed.sort_by(|(ka, a), (kb, b)| member_cmp(a, b, ka, kb));
    keyed.dedup_by(|(ka, _), (kb, _)| ka == kb);
    keyed.into_iter().map(|(_, m)| m).collect()
}

fn evaluate(program: Program, target: &Visual) -> Option<Member> {
    let visual = execute(&program).ok()?;
    let score = score(&visual, target).ok()?;
    Some(Member { program, visual, score })
}

fn round_stats(round: usize, pool: usize, pop: &[Member], best: &Member, started: Instant) -> RoundStats {
    let mean = pop.iter().map(|m| m.score.value).sum::<f64>() / pop.len() as f64;
    RoundStats { round, best: best.score, mean, pool, wallclock_ms: started.elapsed().as_millis() as u64 }
}

fn init_population(domain: Domain, target: &Visual, cfg: &SearchConfig) -> Result<Vec<Member>, SearchError> {
    let programs = match &cfg.init {
        InitSource::Sampler => {
            let sc = SamplerConfig::new(domain, derive_seed(cfg.seed, "init"));
            sample_programs(&sc, cfg.pop_size).map_err(|e| SearchError::Init(e.to_string()))?
        }
        InitSource::Programs(p) => p.clone(),
        InitSource::Policy(p) => {
            p.propose_programs(target, cfg.pop_size).map_err(|e| SearchError::Init(e.to_string()))?
        }
    };
    if let Some(p) = programs.iter().find(|p| p.domain() != domain) {
        return Err(SearchError::Init(format!("program in domain {}", p.domain())));
    }
    let scored: Vec<Member> =
        par::map_with(cfg.parallelism, &programs, |p| evaluate(p.clone(), target)).into_iter().flatten().collect();
    if scored.is_empty() {
        return Err(SearchError::Init("no initial program executes".into()));
    }
    Ok((0..cfg.pop_size).map(|i| scored[i % scored.len()].clone()).collect())
}

/// Picks `p` members from a pool sorted best first.
fn select(pool: &[Member], p: usize, selection: Selection, rng: &mut ChaCha8Rng) -> Vec<Member> {
    match selection {
        Selection::TruncateTopP => (0..p).map(|i| pool[i % pool.len()].clone()).collect(),
        Selection::StochasticRank(temp) => {
            if pool.len() <= p {
                return (0..p).map(|i| pool[i % pool.len()].clone()).collect();
            }
            let t = temp.max(1e-9);
            let mut weights: Vec<f64> = (0..pool.len()).map(|r| (-(r as f64) / t).exp()).collect();
            let mut chosen = Vec::with_capacity(p);
            for _ in 0..p {
                let total: f64 = weights.iter().sum();
                let mut x = rng.random::<f64>() * total;
                let mut pick = weights.iter().rposition(|w| *w > 0.0).expect("pool larger than p");
                for (i, w) in weights.iter().enumerate() {
                    if *w > 0.0 && x < *w {
                        pick = i;
                        break;
                    }
                    x -= w;
                }
                weights[pick] = 0.0;
                chosen.push(pick);
            }
            chosen.sort_unstable();
            chosen.into_iter().map(|i| pool[i].clone()).collect()
        }
    }
}

/// Runs the search. With a deterministic policy the result depends only on
/// the target and the config.
pub fn run_search(target: &Visual, domain: Domain, cfg: &SearchConfig, policy: &dyn EditPolicy)
    -> Result<SearchState, SearchError> {
    run_search_observed(target, domain, cfg, policy, &mut |_| {})
}

/// [`run_search`] calling `observe` after the initial population and after
/// every round.
pub fn run_search_observed(
    target: &Visual,
    domain: Domain,
    cfg: &SearchConfig,
    policy: &dyn EditPolicy,
    observe: &mut dyn FnMut(&SearchState),
) -> Result<SearchState, SearchError> {
    if target.domain() != domain {
        return Err(SearchError::Target { expected: domain, found: target.domain() });
    }
    assert!(cfg.pop_size >= 1 && cfg.proposals >= 1, "population and proposal width must be positive");
    let started = Instant::now();
    let population = sort_members(init_population(domain, target, cfg)?);
    let population: Vec<Member> = (0..cfg.pop_size).map(|i| population[i % population.len()].clone()).collect();
    let best_ever = population[0].clone();
    let mut state = SearchState {
        history: vec![round_stats(0, population.len(), &population, &best_ever, started)],
        population,
        best_ever,
        round: 0,
        dropped: 0,
        rng: ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, "select")),
    };
    observe(&state);
    let metric = Metric::for_domain(domain);
    debug_assert_eq!(state.best_ever.score.metric, metric);

    for round in 1..=cfg.rounds {
        if cfg.time_budget_ms.is_some_and(|b| started.elapsed().as_millis() as u64 >= b) {
            break;
        }
        let proposals = par::map_with(cfg.parallelism, &state.population, |m| {
            policy.propose(&m.program, &m.visual, target, cfg.proposals)
        });
        let mut edits = Vec::with_capacity(state.population.len());
        for (member, r) in proposals.into_iter().enumerate() {
            match r {
                Ok(mut ops) => {
                    ops.truncate(cfg.proposals);
                    edits.push(ops);
                }
                Err(source) => {
                    return Err(SearchError::Policy { member, round, source, state: Box::new(state) });
                }
            }
        }
        let jobs: Vec<(usize, EditOp)> =
            edits.into_iter().enumerate().flat_map(|(i, ops)| ops.into_iter().map(move |op| (i, op))).collect();
        let children = par::map_with(cfg.parallelism, &jobs, |(i, op)| {
            apply_edit(&state.population[*i].program, op).ok().and_then(|p| evaluate(p, target))
        });
        let mut pool = state.population.clone();
        for child in children {
            match child {
                Some(m) => pool.push(m),
                None => state.dropped += 1,
            }
        }
        let pool_size = pool.len();
        let pool = sort_members(pool);
        let mut next = select(&pool, cfg.pop_size, cfg.selection, &mut state.rng);
        if pool[0].score.better(&state.best_ever.score).unwrap_or(false) {
            state.best_ever = pool[0].clone();
        }
        if cfg.elitism && !next.iter().any(|m| m.program == state.best_ever.program) {
            let last = next.len() - 1;
            next[last] = state.best_ever.clone();
        }
        state.population = sort_members_keep_len(next, cfg.pop_size);
        state.round = round;
        state.history.push(round_stats(round, pool_size, &state.population, &state.best_ever, started));
        observe(&state);
    }
    Ok(state)
}

/// Sorts without dropping duplicates, so the population keeps its size.
fn sort_members_keep_len(members: Vec<Member>, p: usize) -> Vec<Member> {
    let mut keyed: Vec<(String, Member)> =
        members.into_iter().map(|m| (tokens_to_string(&m.program.tokens()), m)).collect();
    keyed.sort_by(|(ka, a), (kb, b)| member_cmp(a, b, ka, kb));
    debug_assert_eq!(keyed.len(), p);
    keyed.into_iter().map(|(_, m)| m).collect()
}

/// Per-round CSV with a header line.
pub fn history_csv(target_id: &str, history: &[RoundStats]) -> String {
    let mut out = String::from("target-id,round,best-score,mean-score,wallclock-ms\n");
    for h in history {
        out.push_str(&format!("{},{},{},{},{}\n", target_id, h.round, h.best.value, h.mean, h.wallclock_ms));
    }
    out
}
