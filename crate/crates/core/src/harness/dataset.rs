use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{write_atomic, HarnessError};
use crate::diff::{corrupt, extract_tuples, find_edits, TrainingTuple, TupleStats};
use crate::dsl::{Domain, Program};
use crate::edit::wire::WireSide;
use crate::edit::{BranchSide, EditKind, EnumConfig};
use crate::exec::{encode_visual, execute, file_extension};
use crate::hash::derive_seed;
use crate::par::{self, Parallelism};
use crate::sampler::{sample_programs, SamplerConfig};
use crate::search::ProgramProposer;

/// One JSONL line of an edit dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DatasetRecord {
    pub domain: Domain,
    pub input_tokens: Vec<String>,
    pub sentinel_kind: String,
    pub sentinel_index: usize,
    pub target_kind: String,
    pub target_location: usize,
    pub target_params: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branch_side: Option<WireSide>,
    pub target_visual_ref: String,
    pub start_ref: String,
    pub end_ref: String,
}

impl DatasetRecord {
    fn new(domain: Domain, t: &TrainingTuple, pair: usize, ext: &str) -> DatasetRecord {
        let strs = |ts: &[crate::dsl::Token]| ts.iter().map(|x| x.to_string()).collect();
        DatasetRecord {
            domain,
            input_tokens: strs(&t.input_tokens),
            sentinel_kind: t.sentinel_kind.to_string(),
            sentinel_index: t.sentinel_index,
            target_kind: t.target_kind.to_string(),
            target_location: t.target_location,
            target_params: strs(&t.target_params),
            branch_side: t.branch_side.map(|s| match s {
                BranchSide::Left => WireSide::Named("left".into()),
                BranchSide::Right => WireSide::Named("right".into()),
                BranchSide::Slot(i) => WireSide::Slot(i),
            }),
            target_visual_ref: format!("visuals/{pair:06}.{ext}"),
            start_ref: format!("starts.prog#{pair}"),
            end_ref: format!("ends.prog#{pair}"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DatasetStats {
    pub pairs: usize,
    pub failed: usize,
    pub tuples: usize,
    pub mean_script_len: f64,
    pub kind_histogram: BTreeMap<String, usize>,
    pub skipped_long: usize,
    pub skipped_apply: usize,
}

fn program_file(ps: &[Program]) -> String {
    ps.iter().map(|p| p.to_text() + "\n").collect()
}

/// Diffs every (start, end) pair, extracts training tuples and writes
/// `tuples.jsonl`, the end visuals, both program lists and `stats.json`
/// into `out`. Failed pairs are logged and skipped; more than 1% failing is
/// an error, reported after the output is written.
pub fn build_edit_dataset(
    ends: &[Program],
    starts: &[Program],
    out: &Path,
    seed: u64,
    mode: Parallelism,
) -> Result<DatasetStats, HarnessError> {
    if ends.len() != starts.len() {
        return Err(HarnessError::Format(format!("{} end programs but {} start programs", ends.len(), starts.len())));
    }
    let Some(domain) = ends.first().map(|p| p.domain()) else {
        return Err(HarnessError::Format("no programs".into()));
    };
    if ends.iter().chain(starts).any(|p| p.domain() != domain) {
        return Err(HarnessError::Format("programs from more than one domain".into()));
    }
    fs::create_dir_all(out.join("visuals"))?;
    write_atomic(&out.join("ends.prog"), program_file(ends).as_bytes())?;
    write_atomic(&out.join("starts.prog"), program_file(starts).as_bytes())?;
    let ext = file_extension(domain);

    let work = par::map_range_with(mode, ends.len(), |i| {
        let (start, end) = (&starts[i], &ends[i]);
        let visual = execute(end).map_err(|e| format!("end program: {e}"))?;
        let script = find_edits(start, end).map_err(|e| e.to_string())?;
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &format!("pair{i}")));
        let (tuples, st) = extract_tuples(start, &script, &mut rng);
        Ok::<_, String>((visual, script.len(), tuples, st))
    });

    let mut stats = DatasetStats { pairs: ends.len(), ..Default::default() };
    for k in EditKind::ALL {
        stats.kind_histogram.insert(k.to_string(), 0);
    }
    let mut lines = String::new();
    let mut script_total = 0usize;
    for (i, r) in work.into_iter().enumerate() {
        match r {
            Ok((visual, len, tuples, TupleStats { skipped_long, skipped_apply })) => {
                write_atomic(&out.join(format!("visuals/{i:06}.{ext}")), &encode_visual(&visual))?;
                script_total += len;
                stats.skipped_long += skipped_long;
                stats.skipped_apply += skipped_apply;
                for t in &tuples {
                    *stats.kind_histogram.entry(t.target_kind.to_string()).or_default() += 1;
                    lines.push_str(&serde_json::to_string(&DatasetRecord::new(domain, t, i, ext))?);
                    lines.push('\n');
                }
                stats.tuples += tuples.len();
            }
            Err(e) => {
                log::warn!("pair {i}: {e}");
                stats.failed += 1;
            }
        }
    }
    let ok = stats.pairs - stats.failed;
    stats.mean_script_len = if ok == 0 { 0.0 } else { script_total as f64 / ok as f64 };
    write_atomic(&out.join("tuples.jsonl"), lines.as_bytes())?;
    write_atomic(&out.join("stats.json"), &serde_json::to_vec_pretty(&stats)?)?;
    if stats.failed * 100 > stats.pairs {
        return Err(HarnessError::TooManyFailures { failed: stats.failed, pairs: stats.pairs, stats: Box::new(stats) });
    }
    Ok(stats)
}

/// Where the start programs of a pretraining dataset come from.
#[derive(Clone)]
pub enum StartSource {
    /// A second, independently seeded sampler draw.
    Sampler,
    /// The end program after this many random edits.
    Corrupt(usize),
    /// One proposal per end program from an external source.
    Proposer(Arc<dyn ProgramProposer>),
}

/// Dataset over sampled end programs.
pub fn pretrain_dataset(
    cfg: &SamplerConfig,
    pairs: usize,
    starts: StartSource,
    out: &Path,
    mode: Parallelism,
) -> Result<DatasetStats, HarnessError> {
    let ends = sample_programs(cfg, pairs).map_err(|e| HarnessError::Format(e.to_string()))?;
    let starts = match starts {
        StartSource::Sampler => {
            let mut c = cfg.clone();
            c.seed = derive_seed(cfg.seed, "starts");
            sample_programs(&c, pairs).map_err(|e| HarnessError::Format(e.to_string()))?
        }
        StartSource::Corrupt(steps) => {
            let ecfg = EnumConfig::new(cfg.domain, derive_seed(cfg.seed, "corrupt"));
            let traces = par::map_range_with(mode, ends.len(), |i| {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &format!("corrupt{i}")));
                corrupt(&ends[i], steps, &ecfg, &mut rng).map(|t| t.corrupted().clone())
            });
            traces.into_iter().collect::<Result<Vec<_>, _>>().map_err(|e| HarnessError::Format(e.to_string()))?
        }
        StartSource::Proposer(p) => {
            let mut v = Vec::with_capacity(ends.len());
            for e in &ends {
                let target = execute(e).map_err(|e| HarnessError::Format(e.to_string()))?;
                let got = p.propose_programs(&target, 1).map_err(|e| HarnessError::Format(e.to_string()))?;
                v.push(got.into_iter().next().ok_or_else(|| HarnessError::Format("proposer returned nothing".into()))?);
            }
            v
        }
    };
    build_edit_dataset(&ends, &starts, out, cfg.seed, mode)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_pairs_give_no_tuples() {
        let dir = tempfile::tempdir().unwrap();
        let ps = sample_programs(&SamplerConfig::new(Domain::Csg2d, 2), 6).unwrap();
        let st = build_edit_dataset(&ps, &ps, dir.path(), 0, Parallelism::Sequential).unwrap();
        assert_eq!(st.tuples, 0);
        assert_eq!(st.failed, 0);
        assert_eq!(fs::read_to_string(dir.path().join("tuples.jsonl")).unwrap(), "");
    }

    #[test]
    fn records_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = SamplerConfig::new(Domain::Layout, 3);
        let st = pretrain_dataset(&cfg, 8, StartSource::Corrupt(2), dir.path(), Parallelism::Sequential).unwrap();
        let text = fs::read_to_string(dir.path().join("tuples.jsonl")).unwrap();
        let recs: Vec<DatasetRecord> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
        assert_eq!(recs.len(), st.tuples);
        assert!(st.tuples > 0);
        for r in &recs {
            assert!(r.target_params.len() <= Domain::Layout.max_edit_len());
        }
    }
}
