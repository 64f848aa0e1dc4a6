use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use vpedit_core::diff::find_edits;
use vpedit_core::dsl::Domain;
use vpedit_core::edit::EnumConfig;
use vpedit_core::exec::execute;
use vpedit_core::metrics::score;
use vpedit_core::par::{map_range_with, Parallelism};
use vpedit_core::sampler::{sample_programs, SamplerConfig};
use vpedit_core::search::{run_search, GreedyEnumPolicy, SearchConfig};

const MODES: [(&str, Parallelism); 2] = [("sequential", Parallelism::Sequential), ("parallel", Parallelism::Parallel)];

fn exec_and_score(c: &mut Criterion) {
    let mut group = c.benchmark_group("exec_score");
    for d in [Domain::Layout, Domain::Csg2d, Domain::Csg3d] {
        let ps = sample_programs(&SamplerConfig::new(d, 1), 64).unwrap();
        let target = execute(&ps[0]).unwrap();
        for (name, mode) in MODES {
            group.bench_with_input(BenchmarkId::new(name, d.name()), &ps, |b, ps| {
                b.iter(|| map_range_with(mode, ps.len(), |i| score(&execute(&ps[i]).unwrap(), &target).unwrap()))
            });
        }
    }
    group.finish();
}

fn diff_pairs(c: &mut Criterion) {
    let mut group = c.benchmark_group("find_edits");
    let ps = sample_programs(&SamplerConfig::new(Domain::Csg2d, 2), 64).unwrap();
    for (name, mode) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| map_range_with(mode, ps.len() / 2, |i| find_edits(&ps[2 * i], &ps[2 * i + 1]).unwrap().cost()))
        });
    }
    group.finish();
}

fn search_rounds(c: &mut Criterion) {
    let mut group = c.benchmark_group("search");
    group.sample_size(10);
    let d = Domain::Layout;
    let target = execute(&sample_programs(&SamplerConfig::new(d, 9), 1).unwrap()[0]).unwrap();
    let policy = GreedyEnumPolicy::new(EnumConfig::new(d, 0));
    for (name, mode) in MODES {
        let mut cfg = SearchConfig::new(d, 3);
        cfg.pop_size = 16;
        cfg.rounds = 2;
        cfg.parallelism = mode;
        group.bench_function(name, |b| b.iter(|| run_search(&target, d, &cfg, &policy).unwrap().best_ever.score.value));
    }
    group.finish();
}

criterion_group!(benches, exec_and_score, diff_pairs, search_rounds);
criterion_main!(benches);
