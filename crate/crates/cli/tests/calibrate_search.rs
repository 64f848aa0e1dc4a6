//! One-off calibration of the search recovery thresholds.
//!
//! Run with `cargo test -p vpedit --release --test calibrate_search -- --ignored`
//! to rewrite `tests/data/search_recovery.json`. The acceptance suite reads
//! the frozen file and never recalibrates.

mod common;

use common::*;
use vpedit_core::search::GreedyEnumPolicy;

#[test]
#[ignore]
fn calibrate_recovery_thresholds() {
    // depth-3 enumeration is out of reach, so calibration uses k <= 2
    let insts = recovery_instances(CALIBRATION_INSTANCES, 2);
    let ecfg = policy_enum();
    let policy = GreedyEnumPolicy::new(ecfg.clone());
    let (mut k1, mut oracle_k1, mut greedy_k1) = (0, 0, 0);
    let (mut oracle_all, mut improved) = (0, 0);
    for (i, inst) in insts.iter().enumerate() {
        // the walk from start to target is k edits, so the oracle looks
        // exactly that deep
        let t0 = std::time::Instant::now();
        let reach = oracle_reaches(&inst.start, &inst.target, inst.k, &ecfg);
        let r = run_recovery(inst, i, &policy);
        println!(
            "instance {i}: k={} oracle={reach} exact={} improved={} ({:.1}s)",
            inst.k,
            r.exact,
            r.improved,
            t0.elapsed().as_secs_f64()
        );
        oracle_all += usize::from(reach);
        improved += usize::from(r.improved);
        if inst.k == 1 {
            k1 += 1;
            oracle_k1 += usize::from(reach);
            greedy_k1 += usize::from(r.exact);
        }
    }
    let frac = |a: usize, b: usize| a as f64 / b as f64;
    let oracle_exact_k1 = frac(oracle_k1, k1);
    let greedy_exact_k1 = frac(greedy_k1, k1);
    let greedy_improved_all = frac(improved, insts.len());
    let t = RecoveryThresholds {
        seed: RECOVERY_SEED,
        calibration_instances: insts.len(),
        oracle_exact_k1,
        oracle_exact_k12: frac(oracle_all, insts.len()),
        greedy_exact_k1,
        greedy_improved_all,
        // the targets cannot demand more than the oracle shows is reachable
        min_exact_k1: 0.90f64.min(oracle_exact_k1),
        min_improved_all: 0.95,
    };
    println!("{t:#?}");
    let path = thresholds_path();
    std::fs::create_dir_all(path.parent().unwrap()).unwrap();
    std::fs::write(&path, serde_json::to_string_pretty(&t).unwrap() + "\n").unwrap();
}
