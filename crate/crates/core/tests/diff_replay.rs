use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vpedit_core::diff::{corrupt, extract_tuples, find_edits, validate_tuple};
use vpedit_core::dsl::Domain;
use vpedit_core::edit::{apply_script, EditScript, EnumConfig};
use vpedit_core::execute;
use vpedit_core::sampler::{sample_programs, SamplerConfig};

fn random_order(s: &EditScript, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let n = s.len();
    let mut done = vec![false; n];
    let mut order = Vec::new();
    while order.len() < n {
        let ready: Vec<usize> = (0..n).filter(|&j| !done[j] && s.predecessors(j).iter().all(|&i| done[i])).collect();
        let &j = ready.choose(rng).unwrap();
        done[j] = true;
        order.push(j);
    }
    order
}

#[test]
fn scripts_replay_in_any_valid_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for d in Domain::ALL {
        let progs = sample_programs(&SamplerConfig::new(d, 21), 200).unwrap();
        for pair in progs.chunks(2) {
            let (a, b) = (&pair[0], &pair[1]);
            let s = find_edits(a, b).unwrap();
            let want = execute(b).unwrap();
            for _ in 0..3 {
                let order = random_order(&s, &mut rng);
                let got = apply_script(a, &s, &order).unwrap_or_else(|e| panic!("{}\n{}\n{e}", a.to_text(), b.to_text()));
                assert_eq!(execute(&got).unwrap(), want, "{} -> {}", a.to_text(), b.to_text());
            }
        }
    }
}

#[test]
fn script_cost_is_bounded_by_known_corruption_paths() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for d in Domain::ALL {
        let progs = sample_programs(&SamplerConfig::new(d, 33), 100).unwrap();
        for p in &progs {
            let t = corrupt(p, 3, &EnumConfig::new(d, 1), &mut rng).unwrap();
            let bound: usize = t.fixes.iter().map(|f| f.cost()).sum();
            let s = find_edits(t.corrupted(), p).unwrap();
            assert!(s.cost() <= bound, "{} > {bound}: {} -> {}", s.cost(), t.corrupted().to_text(), p.to_text());
            assert_eq!(execute(&apply_script(t.corrupted(), &s, &(0..s.len()).collect::<Vec<_>>()).unwrap()).unwrap(), execute(p).unwrap());
        }
    }
}

#[test]
fn every_extracted_tuple_replays() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for d in Domain::ALL {
        let progs = sample_programs(&SamplerConfig::new(d, 55), 60).unwrap();
        let mut count = 0;
        for pair in progs.chunks(2) {
            let s = find_edits(&pair[0], &pair[1]).unwrap();
            let (tuples, stats) = extract_tuples(&pair[0], &s, &mut rng);
            assert_eq!(stats.skipped_apply, 0);
            for t in &tuples {
                validate_tuple(&pair[0], &pair[1], &s, t).unwrap_or_else(|e| panic!("{e}"));
            }
            count += tuples.len();
        }
        assert!(count > 0);
    }
}
