use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::dsl::{parse_text, Domain, Program, Quant};
use crate::metrics::Score;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoreEntry {
    pub score: Score,
    pub round: usize,
    /// Program file, relative to the store directory.
    pub path: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Index {
    domain: Domain,
    levels: u16,
    entries: BTreeMap<String, StoreEntry>,
}

/// Best program found so far per target, kept in a directory as
/// `index.json` plus one program file per target.
#[derive(Debug)]
pub struct PBestStore {
    dir: PathBuf,
    index: Index,
}

/// Writes through a temporary file and a rename so readers never see a
/// partial file.
pub fn write_atomic(path: &Path, data: &[u8]) -> std::io::Result<()> {
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("")
    ));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(data)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

fn safe_id(id: &str) -> bool {
    !id.is_empty() && id.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.')) && id != "." && id != ".."
}

impl PBestStore {
    /// Opens the store in `dir`, creating it if absent.
    pub fn open(dir: &Path, domain: Domain, quant: Quant) -> Result<PBestStore, HarnessError> {
        fs::create_dir_all(dir.join("programs"))?;
        let path = dir.join("index.json");
        let index = if path.exists() {
            let index: Index = serde_json::from_slice(&fs::read(&path)?)?;
            if index.domain != domain || index.levels != quant.levels() {
                return Err(HarnessError::Format(format!(
                    "store holds {} programs on a {}-level grid",
                    index.domain,
                    index.levels
                )));
            }
            index
        } else {
            Index { domain, levels: quant.levels(), entries: BTreeMap::new() }
        };
        Ok(PBestStore { dir: dir.to_path_buf(), index })
    }

    pub fn domain(&self) -> Domain {
        self.index.domain
    }

    pub fn entries(&self) -> &BTreeMap<String, StoreEntry> {
        &self.index.entries
    }

    pub fn get(&self, id: &str) -> Option<&StoreEntry> {
        self.index.entries.get(id)
    }

    pub fn program(&self, id: &str) -> Result<Option<Program>, HarnessError> {
        let Some(e) = self.index.entries.get(id) else { return Ok(None) };
        let text = fs::read_to_string(self.dir.join(&e.path))?;
        let quant = Quant::new(self.index.levels).expect("stored grid is valid");
        parse_text(text.trim(), self.index.domain, quant).map(Some).map_err(|e| HarnessError::Format(e.to_string()))
    }

    /// Records `program` for `id` if it beats the stored score. Returns
    /// whether the store changed.
    pub fn offer(&mut self, id: &str, program: &Program, score: Score, round: usize) -> Result<bool, HarnessError> {
        if !safe_id(id) {
            return Err(HarnessError::Format(format!("bad target id `{id}`")));
        }
        if let Some(old) = self.index.entries.get(id) {
            if !score.better(&old.score).map_err(|e| HarnessError::Format(e.to_string()))? {
                return Ok(false);
            }
        }
        let rel = format!("programs/{id}.prog");
        write_atomic(&self.dir.join(&rel), format!("{}\n", program.to_text()).as_bytes())?;
        self.index.entries.insert(id.to_string(), StoreEntry { score, round, path: rel });
        let json = serde_json::to_vec_pretty(&self.index)?;
        write_atomic(&self.dir.join("index.json"), &json)?;
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::Metric;

    #[test]
    fn strict_improvement_and_reload() {
        let dir = tempfile::tempdir().unwrap();
        let q = Quant::default();
        let p = parse_text("Prim(square)", Domain::Layout, q).unwrap();
        let mut s = PBestStore::open(dir.path(), Domain::Layout, q).unwrap();
        assert!(s.offer("t1", &p, Score::new(Metric::Ciou, 0.5), 0).unwrap());
        assert!(!s.offer("t1", &p, Score::new(Metric::Ciou, 0.5), 1).unwrap());
        assert!(s.offer("t1", &p, Score::new(Metric::Ciou, 0.75), 2).unwrap());
        let r = PBestStore::open(dir.path(), Domain::Layout, q).unwrap();
        assert_eq!(r.entries(), s.entries());
        assert_eq!(r.program("t1").unwrap().unwrap(), p);
        assert!(s.offer("../x", &p, Score::new(Metric::Ciou, 1.0), 0).is_err());
    }

    #[test]
    fn scores_survive_reload_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let q = Quant::default();
        let p = parse_text("Prim(circle)", Domain::Layout, q).unwrap();
        let mut s = PBestStore::open(dir.path(), Domain::Layout, q).unwrap();
        let v = 49.0 / 52.0;
        s.offer("t1", &p, Score::new(Metric::Ciou, v), 0).unwrap();
        let before = fs::read(dir.path().join("index.json")).unwrap();
        let mut r = PBestStore::open(dir.path(), Domain::Layout, q).unwrap();
        assert_eq!(r.entries()["t1"].score.value.to_bits(), v.to_bits());
        r.offer("t2", &p, Score::new(Metric::Ciou, 0.5), 1).unwrap();
        let after = fs::read(dir.path().join("index.json")).unwrap();
        let t1 = |b: &[u8]| serde_json::from_slice::<serde_json::Value>(b).unwrap()["entries"]["t1"].clone();
        assert_eq!(t1(&before), t1(&after));
    }
}
