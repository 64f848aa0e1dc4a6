use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::dsl::Program;
use crate::edit::{apply_edit, apply_with_inverse, enumerate_edits, EditError, EditOp, EnumConfig};
use crate::exec::execute;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CorruptError {
    #[error("no executable edit found at corruption step {step}")]
    Exhausted { step: usize },
}

/// A chain of random edits away from an original program.
#[derive(Debug, Clone)]
pub struct CorruptionTrace {
    pub original: Program,
    /// Edits applied, in order.
    pub applied: Vec<EditOp>,
    /// Program after each applied edit.
    pub programs: Vec<Program>,
    /// `fixes[k]` undoes `applied[k]`.
    pub fixes: Vec<EditOp>,
}

impl CorruptionTrace {
    pub fn corrupted(&self) -> &Program {
        self.programs.last().unwrap_or(&self.original)
    }

    /// Applies the fixes last to first, recovering the original.
    pub fn restore(&self) -> Result<Program, EditError> {
        let mut p = self.corrupted().clone();
        for fix in self.fixes.iter().rev() {
            p = apply_edit(&p, fix)?;
        }
        Ok(p)
    }
}

/// Applies `steps` random edits to `program`, each chosen among the
/// enumerated edits whose result still executes.
pub fn corrupt<R: Rng>(program: &Program, steps: usize, cfg: &EnumConfig, rng: &mut R) -> Result<CorruptionTrace, CorruptError> {
    let mut trace =
        CorruptionTrace { original: program.clone(), applied: Vec::new(), programs: Vec::new(), fixes: Vec::new() };
    let mut cur = program.clone();
    for step in 0..steps {
        let mut cfg = cfg.clone();
        cfg.seed = rng.random();
        let mut ops = enumerate_edits(&cur, &cfg);
        ops.shuffle(rng);
        let found = ops.into_iter().find_map(|op| {
            let (next, inv) = apply_with_inverse(&cur, &op).ok()?;
            execute(&next).ok()?;
            Some((op, next, inv))
        });
        let Some((op, next, inv)) = found else {
            return Err(CorruptError::Exhausted { step });
        };
        trace.applied.push(op);
        trace.fixes.push(inv);
        trace.programs.push(next.clone());
        cur = next;
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::Domain;
    use crate::sampler::{sample_programs, SamplerConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fixes_restore_the_original() {
        for d in Domain::ALL {
            let progs = sample_programs(&SamplerConfig::new(d, 4), 5).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            for p in &progs {
                let t = corrupt(p, 4, &EnumConfig::new(d, 0), &mut rng).unwrap();
                assert_eq!(t.applied.len(), 4);
                let r = t.restore().unwrap();
                assert!(r.same_ids(p), "{} vs {}", r.to_text(), p.to_text());
            }
        }
    }
}
