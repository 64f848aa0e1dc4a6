//! Random programs with rejection.
//!
//! Structure is drawn from geometric distributions: the number of top-level
//! sub-expressions and the length of each transform chain. Candidates are
//! rejected when they are too long, fail to execute, touch the canvas border,
//! render empty or duplicate an earlier output. Every rejection except the
//! length bound can be switched off.

use std::collections::HashSet;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::{
    combinators, shapes, signature, slot_values, transforms, Body, Domain, Expr, ExprList, Func, Node, NodeId, Param,
    ParamSlot, Program, Quant,
};
use crate::exec::{encode_visual, execute, occupancy, ExecError, Visual};
use crate::hash::Fnv;

/// Shape of random expression trees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExprDist {
    /// Mean number of transforms stacked above each core.
    pub mean_chain: f64,
    /// Probability that a core is a combinator rather than a primitive.
    pub comb_prob: f64,
    /// Maximum combinator nesting.
    pub max_depth: usize,
    /// Move offsets are drawn from `[-move_range, move_range]`.
    pub move_range: f64,
    /// Scale parameters are drawn from `[scale_lo, scale_hi]`.
    pub scale_lo: f64,
    pub scale_hi: f64,
    /// SymTranslate offsets are drawn from `[-sym_range, sym_range]`.
    pub sym_range: f64,
}

impl ExprDist {
    pub fn for_domain(domain: Domain) -> ExprDist {
        ExprDist {
            mean_chain: 2.0,
            comb_prob: if domain.is_csg() { 0.3 } else { 0.1 },
            max_depth: 2,
            move_range: 0.5,
            scale_lo: -0.5,
            scale_hi: 0.25,
            sym_range: 0.3,
        }
    }

    /// Small trees for added branches.
    pub fn branch(domain: Domain) -> ExprDist {
        ExprDist { mean_chain: 1.0, max_depth: 1, ..ExprDist::for_domain(domain) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectToggles {
    pub exec_error: bool,
    pub out_of_canvas: bool,
    pub empty_output: bool,
    pub duplicate_output: bool,
}

impl Default for RejectToggles {
    fn default() -> Self {
        RejectToggles { exec_error: true, out_of_canvas: true, empty_output: true, duplicate_output: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub domain: Domain,
    pub quant: Quant,
    pub seed: u64,
    /// Mean number of top-level sub-expressions (Layout items, or POS plus NEG).
    pub mean_items: f64,
    pub expr: ExprDist,
    /// Candidates tried per requested program before giving up.
    pub max_attempts: usize,
    pub reject: RejectToggles,
}

impl SamplerConfig {
    pub fn new(domain: Domain, seed: u64) -> SamplerConfig {
        SamplerConfig {
            domain,
            quant: Quant::default(),
            seed,
            mean_items: 3.0,
            expr: ExprDist::for_domain(domain),
            max_attempts: 2000,
            reject: RejectToggles::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RejectReason {
    TooLong(usize),
    ExecError(ExecError),
    OutOfCanvas,
    EmptyOutput,
    DuplicateOutput,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SampleError {
    #[error("sampler gave up after {attempts} attempts with {produced} programs produced")]
    Exhausted { attempts: usize, produced: usize },
}

/// Number of trials before the first success, shifted by `min`, with the
/// given mean.
fn geometric<R: Rng>(rng: &mut R, min: usize, mean: f64, cap: usize) -> usize {
    let extra = (mean - min as f64).max(0.0);
    let p = 1.0 / (extra + 1.0);
    let mut n = min;
    while n < cap && !rng.random_bool(p) {
        n += 1;
    }
    n
}

fn quant_in<R: Rng>(rng: &mut R, quant: Quant, lo: f64, hi: f64) -> Param {
    let a = quant.nearest(lo.max(-1.0)).unwrap_or(0);
    let b = quant.nearest(hi.min(1.0)).unwrap_or(quant.levels() - 1);
    Param::Quant(rng.random_range(a.min(b)..=a.max(b)))
}

/// Random parameters for a transform or `Prim`.
pub fn random_params<R: Rng>(domain: Domain, quant: Quant, func: Func, dist: &ExprDist, rng: &mut R) -> Vec<Param> {
    let sig = signature(domain, func).expect("transform or primitive of this domain");
    sig.iter()
        .enumerate()
        .map(|(i, slot)| match (func, slot) {
            (Func::Move, _) => quant_in(rng, quant, -dist.move_range, dist.move_range),
            (Func::Scale, _) => quant_in(rng, quant, dist.scale_lo, dist.scale_hi),
            (Func::SymTranslate, ParamSlot::Quant) if i > 0 => quant_in(rng, quant, -dist.sym_range, dist.sym_range),
            _ => *slot_values(domain, quant, *slot).choose(rng).expect("slot has values"),
        })
        .collect()
}

/// A random transform function with parameters.
pub fn random_transform<R: Rng>(domain: Domain, quant: Quant, dist: &ExprDist, rng: &mut R) -> (Func, Vec<Param>) {
    let func = *transforms(domain).choose(rng).expect("domain has transforms");
    (func, random_params(domain, quant, func, dist, rng))
}

/// A random shape-typed expression. Ids are placeholders.
pub fn random_expr<R: Rng>(domain: Domain, quant: Quant, dist: &ExprDist, rng: &mut R) -> Expr {
    random_expr_depth(domain, quant, dist, rng, dist.max_depth)
}

fn random_expr_depth<R: Rng>(domain: Domain, quant: Quant, dist: &ExprDist, rng: &mut R, depth: usize) -> Expr {
    let chain = geometric(rng, 0, dist.mean_chain, 8);
    let mut e = if depth > 0 && rng.random_bool(dist.comb_prob) {
        let op = *combinators(domain).choose(rng).expect("domain has combinators");
        let l = random_expr_depth(domain, quant, dist, rng, depth - 1);
        let r = random_expr_depth(domain, quant, dist, rng, depth - 1);
        Expr { id: NodeId(0), node: Node::Comb { op, children: Box::new([l, r]) } }
    } else {
        let shape = *shapes(domain).choose(rng).expect("domain has primitives");
        Expr { id: NodeId(0), node: Node::Prim { shape } }
    };
    for _ in 0..chain {
        let (func, params) = random_transform(domain, quant, dist, rng);
        e = Expr { id: NodeId(0), node: Node::Transform { func, params, child: Box::new(e) } };
    }
    e
}

fn union_all(mut items: Vec<Expr>) -> Expr {
    let mut acc = items.pop().expect("at least one item");
    while let Some(e) = items.pop() {
        acc = Expr { id: NodeId(0), node: Node::Comb { op: Func::Union, children: Box::new([e, acc]) } };
    }
    acc
}

/// Stateful sampler; the seed fixes the whole output sequence.
pub struct Sampler {
    cfg: SamplerConfig,
    rng: ChaCha8Rng,
    seen: HashSet<u64>,
}

impl Sampler {
    pub fn new(cfg: SamplerConfig) -> Sampler {
        let rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        Sampler { cfg, rng, seen: HashSet::new() }
    }

    pub fn config(&self) -> &SamplerConfig {
        &self.cfg
    }

    /// One candidate program without any rejection.
    pub fn propose(&mut self) -> Program {
        let (domain, quant) = (self.cfg.domain, self.cfg.quant);
        let dist = self.cfg.expr.clone();
        let body = if domain.is_csg() {
            let n_pos = geometric(&mut self.rng, 1, (self.cfg.mean_items * 2.0 / 3.0).max(1.0), 8);
            let n_neg = geometric(&mut self.rng, 0, self.cfg.mean_items / 3.0, 8);
            let mut list = |n: usize| ExprList {
                id: NodeId(0),
                items: (0..n).map(|_| random_expr(domain, quant, &dist, &mut self.rng)).collect(),
            };
            let pos = list(n_pos);
            let neg = list(n_neg);
            Body::Csg { pos, neg }
        } else {
            let n = geometric(&mut self.rng, 1, self.cfg.mean_items, 10);
            let items = (0..n).map(|_| random_expr(domain, quant, &dist, &mut self.rng)).collect();
            Body::Layout(union_all(items))
        };
        Program::from_body(domain, quant, body)
    }

    /// Runs the enabled rejection checks on a candidate.
    pub fn check(&mut self, p: &Program) -> Result<Option<Visual>, RejectReason> {
        check_candidate(p, &self.cfg.reject, &mut self.seen)
    }

    pub fn next_program(&mut self) -> Result<Program, SampleError> {
        for _ in 0..self.cfg.max_attempts {
            let p = self.propose();
            if self.check(&p).is_ok() {
                return Ok(p);
            }
        }
        Err(SampleError::Exhausted { attempts: self.cfg.max_attempts, produced: 0 })
    }
}

/// Applies the rejection checks enabled in `toggles`. Returns the executed
/// visual when execution succeeded.
pub fn check_candidate(
    p: &Program,
    toggles: &RejectToggles,
    seen: &mut HashSet<u64>,
) -> Result<Option<Visual>, RejectReason> {
    let len = p.token_len();
    if len > p.domain().max_program_len() {
        return Err(RejectReason::TooLong(len));
    }
    let v = match execute(p) {
        Ok(v) => v,
        Err(e) if toggles.exec_error => return Err(RejectReason::ExecError(e)),
        Err(_) => return Ok(None),
    };
    let occ = occupancy(&v);
    if toggles.out_of_canvas && occ.touches_border() {
        return Err(RejectReason::OutOfCanvas);
    }
    if toggles.empty_output && occ.count() == 0 {
        return Err(RejectReason::EmptyOutput);
    }
    if toggles.duplicate_output {
        let h = Fnv::default().bytes(&encode_visual(&v)).finish();
        if !seen.insert(h) {
            return Err(RejectReason::DuplicateOutput);
        }
    }
    Ok(Some(v))
}

/// Draws `count` programs that pass every enabled rejection check.
pub fn sample_programs(cfg: &SamplerConfig, count: usize) -> Result<Vec<Program>, SampleError> {
    let mut s = Sampler::new(cfg.clone());
    let mut out = Vec::with_capacity(count);
    let budget = cfg.max_attempts.saturating_mul(count.max(1));
    let mut attempts = 0;
    while out.len() < count {
        if attempts == budget {
            return Err(SampleError::Exhausted { attempts, produced: out.len() });
        }
        attempts += 1;
        let p = s.propose();
        if s.check(&p).is_ok() {
            out.push(p);
        }
    }
    Ok(out)
}

/// One random sub-expression that fits in a program on its own.
pub fn sample_subexpression(cfg: &SamplerConfig) -> Result<Expr, SampleError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let limit = cfg.domain.max_program_len() - if cfg.domain.is_csg() { 2 } else { 0 };
    for _ in 0..cfg.max_attempts {
        let mut e = random_expr(cfg.domain, cfg.quant, &cfg.expr, &mut rng);
        if e.token_len() <= limit {
            e.renumber(&mut 0);
            return Ok(e);
        }
    }
    Err(SampleError::Exhausted { attempts: cfg.max_attempts, produced: 0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;

    #[test]
    fn same_seed_same_programs() {
        for d in Domain::ALL {
            let cfg = SamplerConfig::new(d, 7);
            let a = sample_programs(&cfg, 20).unwrap();
            let b = sample_programs(&cfg, 20).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn outputs_satisfy_postconditions() {
        for d in Domain::ALL {
            let cfg = SamplerConfig::new(d, 11);
            for p in sample_programs(&cfg, 30).unwrap() {
                assert_eq!(parse(&p.tokens(), d, p.quant()).unwrap(), p);
                let v = execute(&p).unwrap();
                let occ = occupancy(&v);
                assert!(occ.count() > 0 && !occ.touches_border());
            }
        }
    }

    #[test]
    fn geometric_mean_is_close() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 20000;
        let total: usize = (0..n).map(|_| geometric(&mut rng, 1, 3.0, 1000)).sum();
        let mean = total as f64 / n as f64;
        assert!((mean - 3.0).abs() < 0.1, "{mean}");
    }

    #[test]
    fn subexpression_is_deterministic() {
        let cfg = SamplerConfig::new(Domain::Csg3d, 5);
        let a = sample_subexpression(&cfg).unwrap();
        let b = sample_subexpression(&cfg).unwrap();
        assert!(a.same_shape(&b));
    }
}
