//! `vpedit`: every pipeline stage as a subcommand.
//!
//! Exit codes: 0 success, 1 usage, 2 bad input, 3 internal error. Errors
//! are also printed to stderr as one JSON object.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use vpedit_core::diff::{corrupt, find_edits};
use vpedit_core::dsl::{parse_text, parse_text_many, Domain, Program, Quant};
use vpedit_core::edit::wire::{from_wire, to_wire, WireEdit};
use vpedit_core::edit::{apply_edit, apply_script_in_order, EnumConfig};
use vpedit_core::exec::{decode_visual, encode_visual, execute, file_extension, Visual};
use vpedit_core::harness::{
    build_edit_dataset, infer_round, round_csv, write_atomic, HarnessError, PBestStore, RoundManifest,
};
use vpedit_core::hash::derive_seed;
use vpedit_core::metrics::score;
use vpedit_core::par::Parallelism;
use vpedit_core::sampler::{sample_programs, SamplerConfig};
use vpedit_core::search::{
    history_csv, run_search, EditPolicy, ExternalPolicy, GreedyEnumPolicy, InitSource, RandomEditPolicy,
    SearchConfig, SearchError, Selection, DEFAULT_TIMEOUT,
};

#[derive(Parser, Debug)]
#[command(name = "vpedit", version, about = "Visual program editing: execute, diff, edit, search")]
struct Cli {
    #[arg(long, global = true, default_value = "layout")]
    domain: Domain,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file or directory, depending on the subcommand.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Quantization levels per parameter.
    #[arg(long, global = true, default_value_t = Quant::DEFAULT_LEVELS)]
    quant: u16,
    /// Worker threads; 1 runs everything sequentially.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Sample random programs into `<out>/programs.prog`.
    Sample {
        #[arg(long, default_value_t = 16)]
        count: usize,
        /// Also write each program's output under `<out>/renders/`.
        #[arg(long)]
        render: bool,
    },
    /// Execute every program of a file into `<out>/<index>.<ext>`.
    Exec { programs: PathBuf },
    /// Score a candidate visual against a target visual.
    Metric {
        candidate: PathBuf,
        target: PathBuf,
        /// Append `candidate,target,metric,value` to this CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Apply one wire-format edit to a program.
    EditApply {
        #[arg(long)]
        program: PathBuf,
        /// Edit JSON, inline or `@file`.
        #[arg(long)]
        edit: String,
    },
    /// Edit script from one program to another, verified by replay.
    Diff {
        #[arg(long)]
        start: PathBuf,
        #[arg(long)]
        end: PathBuf,
    },
    /// Build an edit dataset from end programs and start programs.
    MakeData {
        #[arg(long)]
        ends: PathBuf,
        /// Start programs, aligned with `ends`.
        #[arg(long, conflicts_with = "corrupt")]
        starts: Option<PathBuf>,
        /// Use each end program after this many random edits as its start.
        #[arg(long)]
        corrupt: Option<usize>,
    },
    /// Apply random edits to a program and record how to undo them.
    Corrupt {
        #[arg(long)]
        program: PathBuf,
        #[arg(long, default_value_t = 3)]
        steps: usize,
    },
    /// Search for a program reproducing a target visual.
    Search {
        #[arg(long)]
        target: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Bootstrap rounds over a target set: inference, store update, dataset.
    Bootstrap {
        /// Directory of visual files, or a program file whose outputs are
        /// the targets.
        #[arg(long)]
        targets: PathBuf,
        /// Total bootstrap rounds. Rounds already in the manifest are kept, so
        /// an interrupted run picks up where it stopped.
        #[arg(long = "bootstrap-rounds", default_value_t = 1)]
        bootstrap_rounds: usize,
        /// Random edits applied to best programs to make dataset starts.
        #[arg(long, default_value_t = 2)]
        corrupt_steps: usize,
        #[command(flatten)]
        search: SearchArgs,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PolicyKind {
    Greedy,
    Random,
    External,
}

#[derive(Args, Debug)]
struct SearchArgs {
    #[arg(long, value_enum, default_value = "greedy")]
    policy: PolicyKind,
    /// Command started through `sh -c` for the external policy.
    #[arg(long)]
    policy_cmd: Option<String>,
    #[arg(long, default_value_t = DEFAULT_TIMEOUT.as_millis() as u64)]
    policy_timeout_ms: u64,
    /// Search rounds; the domain default if unset.
    #[arg(long)]
    rounds: Option<usize>,
    /// Population size; the domain default if unset.
    #[arg(long)]
    pop: Option<usize>,
    #[arg(long, default_value_t = 3)]
    proposals: usize,
    /// Initial programs; sampled if unset.
    #[arg(long)]
    init: Option<PathBuf>,
    /// `truncate` or `stochastic:<temperature>`.
    #[arg(long, default_value = "truncate")]
    selection: String,
    #[arg(long)]
    no_elitism: bool,
    #[arg(long)]
    time_budget_ms: Option<u64>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Input(String),
    Internal(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Input(_) => 2,
            CliError::Internal(_) => 3,
        }
    }

    fn report(&self) {
        let (kind, msg) = match self {
            CliError::Usage(m) => ("usage", m),
            CliError::Input(m) => ("input", m),
            CliError::Internal(m) => ("internal", m),
        };
        eprintln!("{}", serde_json::json!({ "error": kind, "message": msg }));
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Format(m) => CliError::Input(m),
            other => CliError::Internal(other.to_string()),
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Input(format!("{}: {e}", path.display()))
}

type Res<T> = Result<T, CliError>;

struct Ctx {
    domain: Domain,
    quant: Quant,
    seed: u64,
    out: Option<PathBuf>,
    mode: Parallelism,
}

impl Ctx {
    fn out_dir(&self) -> Res<PathBuf> {
        let dir = self.out.clone().ok_or_else(|| CliError::Usage("--out is required".into()))?;
        fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
        Ok(dir)
    }

    fn read_programs(&self, path: &Path) -> Res<Vec<Program>> {
        let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        parse_text_many(&text, self.domain, self.quant).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }

    fn read_program(&self, path: &Path) -> Res<Program> {
        let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        parse_text(text.trim(), self.domain, self.quant).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }

    fn read_visual(&self, path: &Path) -> Res<Visual> {
        let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
        decode_visual(&bytes, self.domain).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }

    /// Writes to `--out` if given, stdout otherwise.
    fn emit(&self, text: &str) -> Res<()> {
        match &self.out {
            Some(p) => write(p, text.as_bytes()),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

fn write(path: &Path, data: &[u8]) -> Res<()> {
    write_atomic(path, data).map_err(|e| CliError::Internal(format!("{}: {e}", path.display())))
}

fn programs_text(ps: &[Program]) -> String {
    ps.iter().map(|p| p.to_text() + "\n").collect()
}

fn config_hash(cli: &Cli) -> String {
    // worker count never changes outputs, so it stays out of the hash
    let text = format!("{:?}|{}|{}|{}|{:?}|{:?}", cli.domain, cli.seed, cli.quant, cli.out.is_some(), cli.out, cli.cmd);
    let digest = Sha256::digest(text.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    eprintln!("config-hash: {}", config_hash(&cli));
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            e.report();
            ExitCode::from(e.code())
        }
    }
}

fn run(cli: Cli) -> Res<()> {
    let quant = Quant::new(cli.quant).ok_or_else(|| CliError::Usage(format!("bad --quant {}", cli.quant)))?;
    if cli.jobs == 0 {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    let mode = if cli.jobs == 1 { Parallelism::Sequential } else { Parallelism::Parallel };
    #[cfg(feature = "parallel")]
    if cli.jobs > 1 {
        // a second call only fails if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global();
    }
    let ctx = Ctx { domain: cli.domain, quant, seed: cli.seed, out: cli.out.clone(), mode };
    match cli.cmd {
        Cmd::Sample { count, render } => cmd_sample(&ctx, count, render),
        Cmd::Exec { programs } => cmd_exec(&ctx, &programs),
        Cmd::Metric { candidate, target, csv } => cmd_metric(&ctx, &candidate, &target, csv.as_deref()),
        Cmd::EditApply { program, edit } => cmd_edit_apply(&ctx, &program, &edit),
        Cmd::Diff { start, end } => cmd_diff(&ctx, &start, &end),
        Cmd::MakeData { ends, starts, corrupt } => cmd_make_data(&ctx, &ends, starts.as_deref(), corrupt),
        Cmd::Corrupt { program, steps } => cmd_corrupt(&ctx, &program, steps),
        Cmd::Search { target, search } => cmd_search(&ctx, &target, &search),
        Cmd::Bootstrap { targets, bootstrap_rounds, corrupt_steps, search } => {
            cmd_bootstrap(&ctx, &targets, bootstrap_rounds, corrupt_steps, &search)
        }
    }
}

fn cmd_sample(ctx: &Ctx, count: usize, render: bool) -> Res<()> {
    let dir = ctx.out_dir()?;
    let mut cfg = SamplerConfig::new(ctx.domain, ctx.seed);
    cfg.quant = ctx.quant;
    let ps = sample_programs(&cfg, count).map_err(|e| CliError::Internal(e.to_string()))?;
    write(&dir.join("programs.prog"), programs_text(&ps).as_bytes())?;
    if render {
        let rdir = dir.join("renders");
        fs::create_dir_all(&rdir).map_err(|e| io_err(&rdir, e))?;
        for (i, p) in ps.iter().enumerate() {
            let v = execute(p).map_err(|e| CliError::Internal(e.to_string()))?;
            write(&rdir.join(format!("{i:06}.{}", file_extension(ctx.domain))), &encode_visual(&v))?;
        }
    }
    println!("{}", ps.len());
    Ok(())
}

fn cmd_exec(ctx: &Ctx, path: &Path) -> Res<()> {
    let dir = ctx.out_dir()?;
    for (i, p) in ctx.read_programs(path)?.iter().enumerate() {
        let v = execute(p).map_err(|e| CliError::Input(format!("program {i}: {e}")))?;
        write(&dir.join(format!("{i:06}.{}", file_extension(ctx.domain))), &encode_visual(&v))?;
    }
    Ok(())
}

fn cmd_metric(ctx: &Ctx, a: &Path, b: &Path, csv: Option<&Path>) -> Res<()> {
    let (va, vb) = (ctx.read_visual(a)?, ctx.read_visual(b)?);
    let s = score(&va, &vb).map_err(|e| CliError::Input(e.to_string()))?;
    println!("{}", s.value);
    if let Some(csv) = csv {
        use std::io::Write;
        let new = !csv.exists();
        let mut f = fs::OpenOptions::new().create(true).append(true).open(csv).map_err(|e| io_err(csv, e))?;
        let mut line = String::new();
        if new {
            line.push_str("candidate,target,metric,value\n");
        }
        line.push_str(&format!("{},{},{:?},{}\n", a.display(), b.display(), s.metric, s.value).to_lowercase());
        f.write_all(line.as_bytes()).map_err(|e| io_err(csv, e))?;
    }
    Ok(())
}

fn cmd_edit_apply(ctx: &Ctx, program: &Path, edit: &str) -> Res<()> {
    let p = ctx.read_program(program)?;
    let json = match edit.strip_prefix('@') {
        Some(f) => fs::read_to_string(f).map_err(|e| io_err(Path::new(f), e))?,
        None => edit.to_string(),
    };
    let w: WireEdit = serde_json::from_str(&json).map_err(|e| CliError::Input(format!("edit: {e}")))?;
    let op = from_wire(&p, &w).map_err(|e| CliError::Input(e.to_string()))?;
    let q = apply_edit(&p, &op).map_err(|e| CliError::Input(e.to_string()))?;
    ctx.emit(&(q.to_text() + "\n"))
}

#[derive(Serialize)]
struct DiffOutput {
    cost: usize,
    edits: Vec<WireEdit>,
    deps: Vec<(usize, usize)>,
    replay: &'static str,
}

fn cmd_diff(ctx: &Ctx, start: &Path, end: &Path) -> Res<()> {
    let (a, b) = (ctx.read_program(start)?, ctx.read_program(end)?);
    let s = find_edits(&a, &b).map_err(|e| CliError::Input(e.to_string()))?;
    // wire anchors are token indices in the start program
    let edits = s
        .edits
        .iter()
        .map(|op| to_wire(&a, op))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Internal(e.to_string()))?;
    let verified = match (apply_script_in_order(&a, &s), execute(&b)) {
        (Ok(got), Ok(want)) => execute(&got).ok() == Some(want),
        _ => false,
    };
    let out = DiffOutput { cost: s.cost(), edits, deps: s.deps.clone(), replay: if verified { "verified" } else { "failed" } };
    let text = serde_json::to_string_pretty(&out).expect("serializable") + "\n";
    ctx.emit(&text)?;
    if !verified {
        return Err(CliError::Internal("edit script does not reproduce the end program".into()));
    }
    Ok(())
}

fn cmd_make_data(ctx: &Ctx, ends: &Path, starts: Option<&Path>, steps: Option<usize>) -> Res<()> {
    let dir = ctx.out_dir()?;
    let ends = ctx.read_programs(ends)?;
    let starts = match (starts, steps) {
        (Some(s), _) => ctx.read_programs(s)?,
        (None, Some(k)) => corrupt_all(ctx, &ends, k)?,
        (None, None) => return Err(CliError::Usage("give --starts or --corrupt".into())),
    };
    let stats = build_edit_dataset(&ends, &starts, &dir, ctx.seed, ctx.mode).map_err(|e| match e {
        HarnessError::TooManyFailures { failed, pairs, .. } => {
            CliError::Input(format!("{failed} of {pairs} pairs failed"))
        }
        other => other.into(),
    })?;
    println!("{}", serde_json::to_string(&stats).expect("serializable"));
    Ok(())
}

fn corrupt_all(ctx: &Ctx, ends: &[Program], steps: usize) -> Res<Vec<Program>> {
    let ecfg = EnumConfig::new(ctx.domain, derive_seed(ctx.seed, "corrupt"));
    let mut out = Vec::with_capacity(ends.len());
    for (i, p) in ends.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(ctx.seed, &format!("corrupt{i}")));
        let t = corrupt(p, steps, &ecfg, &mut rng).map_err(|e| CliError::Input(format!("program {i}: {e}")))?;
        out.push(t.corrupted().clone());
    }
    Ok(out)
}

fn cmd_corrupt(ctx: &Ctx, program: &Path, steps: usize) -> Res<()> {
    let dir = ctx.out_dir()?;
    let p = ctx.read_program(program)?;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let t = corrupt(&p, steps, &EnumConfig::new(ctx.domain, ctx.seed), &mut rng)
        .map_err(|e| CliError::Input(e.to_string()))?;
    write(&dir.join("original.prog"), (p.to_text() + "\n").as_bytes())?;
    let mut fixes = String::new();
    for (k, (q, fix)) in t.programs.iter().zip(&t.fixes).enumerate() {
        write(&dir.join(format!("step_{:03}.prog", k + 1)), (q.to_text() + "\n").as_bytes())?;
        let w = to_wire(q, fix).map_err(|e| CliError::Internal(e.to_string()))?;
        fixes.push_str(&serde_json::to_string(&w).expect("serializable"));
        fixes.push('\n');
    }
    write(&dir.join("fixes.jsonl"), fixes.as_bytes())?;
    let restored = t.restore().map_err(|e| CliError::Internal(e.to_string()))?;
    if restored != p {
        return Err(CliError::Internal("fixes do not restore the original".into()));
    }
    Ok(())
}

fn make_policy(ctx: &Ctx, a: &SearchArgs) -> Res<Box<dyn EditPolicy>> {
    let ecfg = EnumConfig::new(ctx.domain, derive_seed(ctx.seed, "enum"));
    Ok(match a.policy {
        PolicyKind::Greedy => Box::new(GreedyEnumPolicy::new(ecfg)),
        PolicyKind::Random => Box::new(RandomEditPolicy::new(ecfg, derive_seed(ctx.seed, "policy"))),
        PolicyKind::External => {
            let cmd = a.policy_cmd.as_deref().ok_or_else(|| CliError::Usage("--policy-cmd is required".into()))?;
            Box::new(
                ExternalPolicy::spawn(cmd, Duration::from_millis(a.policy_timeout_ms))
                    .map_err(|e| CliError::Input(e.to_string()))?,
            )
        }
    })
}

fn search_config(ctx: &Ctx, a: &SearchArgs) -> Res<SearchConfig> {
    let mut cfg = SearchConfig::new(ctx.domain, ctx.seed);
    if let Some(r) = a.rounds {
        cfg.rounds = r;
    }
    if let Some(p) = a.pop {
        if p == 0 {
            return Err(CliError::Usage("--pop must be at least 1".into()));
        }
        cfg.pop_size = p;
    }
    if a.proposals == 0 {
        return Err(CliError::Usage("--proposals must be at least 1".into()));
    }
    cfg.proposals = a.proposals;
    cfg.elitism = !a.no_elitism;
    cfg.time_budget_ms = a.time_budget_ms;
    cfg.parallelism = ctx.mode;
    cfg.selection = match a.selection.as_str() {
        "truncate" => Selection::TruncateTopP,
        s => match s.strip_prefix("stochastic:").and_then(|t| t.parse::<f64>().ok()) {
            Some(t) if t > 0.0 => Selection::StochasticRank(t),
            _ => return Err(CliError::Usage(format!("bad --selection `{s}`"))),
        },
    };
    if let Some(init) = &a.init {
        cfg.init = InitSource::Programs(ctx.read_programs(init)?);
    }
    Ok(cfg)
}

fn search_error(e: SearchError) -> CliError {
    match e {
        SearchError::Init(m) => CliError::Input(m),
        SearchError::Target { .. } => CliError::Input(e.to_string()),
        SearchError::Policy { .. } => CliError::Input(e.to_string()),
    }
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct SearchSummary {
    best_program: String,
    best_score: f64,
    rounds: usize,
    dropped_edits: usize,
}

fn cmd_search(ctx: &Ctx, target: &Path, a: &SearchArgs) -> Res<()> {
    let dir = ctx.out_dir()?;
    let t = ctx.read_visual(target)?;
    let cfg = search_config(ctx, a)?;
    let policy = make_policy(ctx, a)?;
    let state = run_search(&t, ctx.domain, &cfg, policy.as_ref()).map_err(search_error)?;
    let best = &state.best_ever;
    write(&dir.join("best.prog"), (best.program.to_text() + "\n").as_bytes())?;
    write(&dir.join(format!("best.{}", file_extension(ctx.domain))), &encode_visual(&best.visual))?;
    let id = target.file_stem().and_then(|s| s.to_str()).unwrap_or("target");
    write(&dir.join("rounds.csv"), history_csv(id, &state.history).as_bytes())?;
    let summary = SearchSummary {
        best_program: best.program.to_text(),
        best_score: best.score.value,
        rounds: state.round,
        dropped_edits: state.dropped + policy.dropped(),
    };
    let json = serde_json::to_string_pretty(&summary).expect("serializable") + "\n";
    write(&dir.join("summary.json"), json.as_bytes())?;
    println!("{}", best.score.value);
    Ok(())
}

fn load_targets(ctx: &Ctx, path: &Path) -> Res<Vec<(String, Visual)>> {
    if path.is_dir() {
        let ext = file_extension(ctx.domain);
        let mut files: Vec<PathBuf> = fs::read_dir(path)
            .map_err(|e| io_err(path, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().and_then(|e| e.to_str()) == Some(ext))
            .collect();
        files.sort();
        files
            .iter()
            .map(|f| {
                let id = f.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
                Ok((id, ctx.read_visual(f)?))
            })
            .collect()
    } else {
        ctx.read_programs(path)?
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let v = execute(p).map_err(|e| CliError::Input(format!("target program {i}: {e}")))?;
                Ok((format!("t{i:05}"), v))
            })
            .collect()
    }
}

fn cmd_bootstrap(ctx: &Ctx, targets: &Path, rounds: usize, steps: usize, a: &SearchArgs) -> Res<()> {
    let dir = ctx.out_dir()?;
    let targets = load_targets(ctx, targets)?;
    let policy = make_policy(ctx, a)?;
    let mut store = PBestStore::open(&dir.join("store"), ctx.domain, ctx.quant)?;
    let manifest_path = dir.join("manifest.jsonl");
    let done = RoundManifest::read_all(&manifest_path)?.len();
    let hash = {
        let text = format!("{:?}|{}|{}|{steps}|{a:?}", ctx.domain, ctx.seed, ctx.quant.levels());
        Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect::<String>()
    };
    for round in done..rounds {
        let mut cfg = search_config(ctx, a)?;
        cfg.seed = derive_seed(ctx.seed, &format!("round{round}"));
        let outcomes = infer_round(&mut store, &targets, &cfg, policy.as_ref(), round)?;
        write(&dir.join(format!("round_{round:03}.csv")), round_csv(&outcomes).as_bytes())?;
        let ids: Vec<String> = store.entries().keys().cloned().collect();
        let mut ends = Vec::with_capacity(ids.len());
        for id in &ids {
            ends.extend(store.program(id)?);
        }
        let mut datasets = Vec::new();
        if !ends.is_empty() {
            let rctx = Ctx { seed: derive_seed(ctx.seed, &format!("data{round}")), out: None, ..*ctx };
            let starts = corrupt_all(&rctx, &ends, steps)?;
            let rel = format!("datasets/round_{round:03}");
            build_edit_dataset(&ends, &starts, &dir.join(&rel), rctx.seed, ctx.mode)?;
            datasets.push(rel);
        }
        RoundManifest {
            round,
            targets: targets.len().to_string(),
            config_hash: hash.clone(),
            scores: outcomes.iter().filter_map(|o| o.score.map(|s| (o.id.clone(), s))).collect(),
            updated: outcomes.iter().filter(|o| o.updated).map(|o| o.id.clone()).collect(),
            datasets,
        }
        .append(&manifest_path)?;
    }
    println!("{}", store.entries().len());
    Ok(())
}
