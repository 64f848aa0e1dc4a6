//! Bootstrap bookkeeping: the best-program store, the round manifest,
//! inference rounds over a target set and edit-dataset export.

mod dataset;
mod store;

use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::Domain;
use crate::exec::Visual;
use crate::hash::derive_seed;
use crate::par;
use crate::search::{run_search, EditPolicy, SearchConfig, SearchError};

pub use dataset::{build_edit_dataset, pretrain_dataset, DatasetRecord, DatasetStats, StartSource};
pub use store::{write_atomic, PBestStore, StoreEntry};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Format(String),
    #[error("{failed} of {pairs} pairs failed")]
    TooManyFailures { failed: usize, pairs: usize, stats: Box<DatasetStats> },
}

/// One line of the append-only round log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RoundManifest {
    pub round: usize,
    pub targets: String,
    pub config_hash: String,
    pub scores: std::collections::BTreeMap<String, f64>,
    pub updated: Vec<String>,
    pub datasets: Vec<String>,
}

impl RoundManifest {
    pub fn append(&self, path: &Path) -> Result<(), HarnessError> {
        let mut f = OpenOptions::new().create(true).append(true).open(path)?;
        writeln!(f, "{}", serde_json::to_string(self)?)?;
        f.sync_all()?;
        Ok(())
    }

    pub fn read_all(path: &Path) -> Result<Vec<RoundManifest>, HarnessError> {
        if !path.exists() {
            return Ok(Vec::new());
        }
        std::fs::read_to_string(path)?
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| serde_json::from_str(l).map_err(HarnessError::from))
            .collect()
    }
}

/// Per-target outcome of an inference round.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetOutcome {
    pub id: String,
    pub score: Option<f64>,
    pub updated: bool,
    pub error: Option<String>,
}

/// Searches every target and offers the results to the store. Each target
/// gets its own seed derived from the config seed and its id; failures are
/// logged and do not stop the round.
pub fn infer_round(
    store: &mut PBestStore,
    targets: &[(String, Visual)],
    cfg: &SearchConfig,
    policy: &dyn EditPolicy,
    round: usize,
) -> Result<Vec<TargetOutcome>, HarnessError> {
    let domain: Domain = store.domain();
    let results = par::map_with(cfg.parallelism, targets, |(id, target)| {
        let mut c = cfg.clone();
        c.seed = derive_seed(cfg.seed, id);
        run_search(target, domain, &c, policy)
    });
    let mut out = Vec::with_capacity(targets.len());
    for ((id, _), r) in targets.iter().zip(results) {
        match r {
            Ok(state) => {
                let best = &state.best_ever;
                let updated = store.offer(id, &best.program, best.score, round)?;
                out.push(TargetOutcome { id: id.clone(), score: Some(best.score.value), updated, error: None });
            }
            Err(e) => {
                let msg = match &e {
                    SearchError::Policy { member, source, .. } => format!("member {member}: {source}"),
                    other => other.to_string(),
                };
                log::warn!("target {id}: {msg}");
                out.push(TargetOutcome { id: id.clone(), score: None, updated: false, error: Some(msg) });
            }
        }
    }
    Ok(out)
}

/// Summary CSV of an inference round.
pub fn round_csv(outcomes: &[TargetOutcome]) -> String {
    let mut s = String::from("target-id,score,updated,error\n");
    for o in outcomes {
        s.push_str(&format!(
            "{},{},{},{}\n",
            o.id,
            o.score.map(|v| v.to_string()).unwrap_or_default(),
            o.updated,
            o.error.as_deref().unwrap_or("").replace([',', '\n'], ";")
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{parse_text, Quant};
    use crate::edit::EnumConfig;
    use crate::exec::execute;
    use crate::search::GreedyEnumPolicy;

    #[test]
    fn repeated_round_changes_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let d = Domain::Layout;
        let q = Quant::default();
        let t = execute(&parse_text("Move(0.25,0)(Prim(circle))", d, q).unwrap()).unwrap();
        let targets = vec![("a".to_string(), t)];
        let mut cfg = SearchConfig::new(d, 5);
        cfg.pop_size = 4;
        cfg.rounds = 2;
        let policy = GreedyEnumPolicy::new(EnumConfig::new(d, 0));
        let mut store = PBestStore::open(dir.path(), d, q).unwrap();
        let first = infer_round(&mut store, &targets, &cfg, &policy, 0).unwrap();
        assert!(first[0].updated);
        let second = infer_round(&mut store, &targets, &cfg, &policy, 1).unwrap();
        assert!(!second[0].updated);
        let m = RoundManifest {
            round: 0,
            targets: "t".into(),
            config_hash: "h".into(),
            scores: [("a".to_string(), 1.0)].into(),
            updated: vec![],
            datasets: vec![],
        };
        let log = dir.path().join("manifest.jsonl");
        m.append(&log).unwrap();
        m.append(&log).unwrap();
        assert_eq!(RoundManifest::read_all(&log).unwrap(), vec![m.clone(), m]);
    }
}
