mod report;

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use congest::approx::{approx_apsp, Epsilon};
use congest::blocker::compute_blocker_set;
use congest::csssp::{build_csssp, CsSspCollection, CssspMethod};
use congest::generate::{generate, GeneratorSpec, GraphKind};
use congest::graph::WeightedGraph;
use congest::ksp::{run_ksp, HopRule, KspConfig};
use congest::oracle::{bellman_ford_oracle, dijkstra_apsp, verify_blocker, verify_csssp};
use congest::rand_apsp::run_randomized_apsp;
use congest::short_range::{multi_source_pipelined, short_range, short_range_extension, NO_CAP};
use congest::{Dist, NodeId};

use report::{ConfigEcho, Phase, RunReport, Verdict, SCHEMA_VERSION};

#[derive(Parser)]
#[command(
    name = "congest",
    version,
    about = "Generate graphs, run the distributed shortest-path suite, and report rounds and congestion",
    after_help = "Every run is verified against a sequential oracle; the verdict decides the exit \
code (0 ok, 2 verification failure, 3 usage error, 4 algorithm error). \
CONGEST_ROUND_LIMIT=<rounds> overrides the engine's default round limit."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated graph in the text edge-list format.
    Generate(GenerateArgs),
    /// Run one algorithm on a graph file, verify it, and emit a JSON report.
    Run(RunArgs),
    /// Sweep generated sizes and emit a rounds/congestion CSV.
    Bench(BenchArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    kind: KindArg,
    /// Node count.
    #[arg(long)]
    n: u32,
    /// Edge probability (gnp and layered kinds).
    #[arg(long, default_value_t = 0.0)]
    p: f64,
    /// Maximum edge weight.
    #[arg(long, default_value_t = 1)]
    lambda: i64,
    /// Minimum edge weight; negative switches to arbitrary-weight mode.
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    weight_low: i64,
    /// Fixed weight for every edge; shorthand for equal bounds.
    #[arg(long, conflicts_with_all = ["lambda", "weight_low"])]
    w: Option<i64>,
    /// Fraction of edges drawn as weight zero.
    #[arg(long, default_value_t = 0.0)]
    zero_frac: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// Graph file in the text edge-list format.
    graph: PathBuf,
    #[arg(value_enum)]
    algorithm: AlgorithmArg,
    /// Comma-separated sources: ids or single letters (a=0, b=1, ...), or "all".
    #[arg(long)]
    sources: Option<String>,
    /// Hop bound.
    #[arg(long)]
    h: Option<u32>,
    /// Distance cap for the pipelined family; unlimited when omitted.
    #[arg(long)]
    cap: Option<i64>,
    /// Collection back-end (csssp, blocker, ksp, apsp).
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    /// Hop-bound rule instead of an explicit --h (ksp, apsp).
    #[arg(long, value_enum)]
    rule: Option<RuleArg>,
    /// Seeded start distances for extension, e.g. "a=0,d=2".
    #[arg(long)]
    seeds: Option<String>,
    /// Approximation quality as a decimal, e.g. 0.1 (approx).
    #[arg(long)]
    epsilon: Option<String>,
    /// Center-sampling seed (rand-apsp).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Write a source,target,distance CSV here.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_enum)]
    algorithm: AlgorithmArg,
    /// Comma-separated node counts; an empty string gives a header-only CSV.
    #[arg(long, default_value = "20,40,80")]
    sizes: String,
    /// Sources per run, spread evenly over the nodes.
    #[arg(long, default_value_t = 4)]
    k: u32,
    #[arg(long, default_value_t = 3)]
    h: u32,
    #[arg(long, default_value_t = 0.3)]
    p: f64,
    #[arg(long, default_value_t = 10)]
    lambda: i64,
    #[arg(long, default_value_t = 0.0)]
    zero_frac: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    cap: Option<i64>,
    #[arg(long)]
    epsilon: Option<String>,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy)]
enum KindArg {
    Gnp,
    Path,
    Cycle,
    Grid,
    Layered,
}

impl From<KindArg> for GraphKind {
    fn from(k: KindArg) -> GraphKind {
        match k {
            KindArg::Gnp => GraphKind::Gnp,
            KindArg::Path => GraphKind::Path,
            KindArg::Cycle => GraphKind::Cycle,
            KindArg::Grid => GraphKind::Grid,
            KindArg::Layered => GraphKind::Layered,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum AlgorithmArg {
    ShortRange,
    Extension,
    MultiSource,
    Csssp,
    Blocker,
    Ksp,
    Apsp,
    RandApsp,
    Approx,
}

impl AlgorithmArg {
    fn name(self) -> &'static str {
        match self {
            AlgorithmArg::ShortRange => "short-range",
            AlgorithmArg::Extension => "extension",
            AlgorithmArg::MultiSource => "multi-source",
            AlgorithmArg::Csssp => "csssp",
            AlgorithmArg::Blocker => "blocker",
            AlgorithmArg::Ksp => "ksp",
            AlgorithmArg::Apsp => "apsp",
            AlgorithmArg::RandApsp => "rand-apsp",
            AlgorithmArg::Approx => "approx",
        }
    }
}

#[derive(ValueEnum, Clone, Copy)]
enum MethodArg {
    Pipelined,
    BellmanFord,
}

impl MethodArg {
    fn to_lib(self) -> CssspMethod {
        match self {
            MethodArg::Pipelined => CssspMethod::Pipelined,
            MethodArg::BellmanFord => CssspMethod::BellmanFord,
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            MethodArg::Pipelined => "pipelined",
            MethodArg::BellmanFord => "bellman-ford",
        }
    }
}

#[derive(ValueEnum, Clone, Copy)]
enum RuleArg {
    WeightBalanced,
    CapBalanced,
}

impl RuleArg {
    fn to_lib(self) -> HopRule {
        match self {
            RuleArg::WeightBalanced => HopRule::WeightBalanced,
            RuleArg::CapBalanced => HopRule::CapBalanced,
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            RuleArg::WeightBalanced => "weight-balanced",
            RuleArg::CapBalanced => "cap-balanced",
        }
    }
}

/// Usage problems exit 3, everything operational (I/O, algorithm errors,
/// negative cycles, guards) exits 4. A FAIL verdict is not an error: the
/// report is still written and the process exits 2.
enum CliError {
    Usage(anyhow::Error),
    Run(anyhow::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 3,
            CliError::Run(_) => 4,
        }
    }

    fn inner(&self) -> &anyhow::Error {
        match self {
            CliError::Usage(e) | CliError::Run(e) => e,
        }
    }
}

fn usage(e: impl Into<anyhow::Error>) -> CliError {
    CliError::Usage(e.into())
}

fn run_err(e: impl Into<anyhow::Error>) -> CliError {
    CliError::Run(e.into())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            // Help and version are not errors; everything else is the
            // documented usage exit instead of clap's default 2.
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 3,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Run(args) => cmd_run(args),
        Command::Bench(args) => cmd_bench(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {:#}", e.inner());
            ExitCode::from(e.exit_code())
        }
    }
}

// ---------------------------------------------------------------------------
// generate

fn cmd_generate(args: GenerateArgs) -> Result<u8, CliError> {
    let (low, high) = match args.w {
        Some(w) => (w, w),
        None => (args.weight_low, args.lambda),
    };
    let spec = GeneratorSpec {
        kind: args.kind.into(),
        n: args.n,
        p: args.p,
        weight_low: low,
        weight_high: high,
        zero_fraction: args.zero_frac,
        seed: args.seed,
    };
    let graph = generate(&spec).map_err(usage)?;
    let text = graph.to_text();
    match &args.out {
        Some(path) => fs::write(path, &text)
            .with_context(|| format!("writing {}", path.display()))
            .map_err(run_err)?,
        None => print!("{text}"),
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// run

/// Everything an algorithm invocation needs, after flag parsing and node
/// name resolution.
struct Resolved {
    sources: Vec<NodeId>,
    h: Option<u32>,
    cap: i64,
    method: CssspMethod,
    rule: Option<HopRule>,
    epsilon: Option<Epsilon>,
    seed: u64,
    seeds: Option<BTreeMap<NodeId, i64>>,
}

struct Executed {
    phases: Vec<(String, u64)>,
    congestion: u64,
    result: serde_json::Value,
    /// Pre-formatted source,target,distance rows.
    rows: Vec<(String, String, String)>,
    verdict: Verdict,
}

fn cmd_run(args: RunArgs) -> Result<u8, CliError> {
    let text = fs::read_to_string(&args.graph)
        .with_context(|| format!("reading {}", args.graph.display()))
        .map_err(run_err)?;
    let graph = WeightedGraph::parse(&text).map_err(run_err)?;
    let n = graph.n();
    let algo = args.algorithm;

    let sources = match (&args.sources, algo) {
        (Some(raw), _) => parse_sources(raw, n)?,
        (
            None,
            AlgorithmArg::Csssp
            | AlgorithmArg::Blocker
            | AlgorithmArg::Apsp
            | AlgorithmArg::RandApsp
            | AlgorithmArg::Approx,
        ) => (0..n).collect(),
        (None, AlgorithmArg::Extension) if args.seeds.is_some() => Vec::new(),
        (None, _) => {
            return Err(usage(anyhow!(
                "--sources is required for {}",
                algo.name()
            )))
        }
    };
    let seeds = match (&args.seeds, algo) {
        (Some(raw), _) => Some(parse_seeds(raw, n)?),
        (None, AlgorithmArg::Extension) => {
            // A bare source list seeds those nodes at distance zero.
            Some(sources.iter().map(|&s| (s, 0i64)).collect())
        }
        (None, _) => None,
    };
    let epsilon = match &args.epsilon {
        Some(raw) => Some(
            Epsilon::parse_decimal(raw)
                .ok_or_else(|| usage(anyhow!("--epsilon '{raw}' is not a positive decimal")))?,
        ),
        None => None,
    };

    let resolved = Resolved {
        sources,
        h: args.h,
        cap: args.cap.unwrap_or(NO_CAP),
        method: args.method.map(MethodArg::to_lib).unwrap_or(CssspMethod::Pipelined),
        rule: args.rule.map(RuleArg::to_lib),
        epsilon,
        seed: args.seed,
        seeds,
    };

    let started = Instant::now();
    let executed = execute(algo, &graph, &resolved)?;
    let wall_time_ms = started.elapsed().as_millis() as u64;

    let report = RunReport {
        schema_version: SCHEMA_VERSION,
        algorithm: algo.name().to_string(),
        config: ConfigEcho {
            graph: args.graph.display().to_string(),
            n,
            directed: graph.directed(),
            sources: Some(resolved.sources.clone()).filter(|s| !s.is_empty()),
            h: args.h,
            cap: args.cap,
            method: args.method.map(|m| m.as_str().to_string()),
            rule: args.rule.map(|r| r.as_str().to_string()),
            epsilon: args.epsilon.clone(),
            seed: (algo == AlgorithmArg::RandApsp).then_some(args.seed),
            seeds: resolved
                .seeds
                .as_ref()
                .map(|m| m.iter().map(|(&v, &d)| (v, d)).collect()),
        },
        total_rounds: executed.phases.iter().map(|(_, r)| r).sum(),
        phases: executed
            .phases
            .iter()
            .map(|(name, rounds)| Phase {
                name: name.clone(),
                rounds: *rounds,
            })
            .collect(),
        congestion: executed.congestion,
        verdict: executed.verdict,
        result: executed.result,
        wall_time_ms,
    };
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    match &args.report {
        Some(path) => fs::write(path, format!("{json}\n"))
            .with_context(|| format!("writing {}", path.display()))
            .map_err(run_err)?,
        None => println!("{json}"),
    }
    if let Some(path) = &args.csv {
        let mut csv = String::from("source,target,distance\n");
        for (s, t, d) in &executed.rows {
            csv.push_str(&format!("{s},{t},{d}\n"));
        }
        fs::write(path, csv)
            .with_context(|| format!("writing {}", path.display()))
            .map_err(run_err)?;
    }
    Ok(if executed.verdict == Verdict::Fail { 2 } else { 0 })
}

fn parse_node(token: &str, n: u32) -> Result<NodeId, CliError> {
    let t = token.trim();
    let v = if t.len() == 1 && t.as_bytes()[0].is_ascii_lowercase() {
        u32::from(t.as_bytes()[0] - b'a')
    } else {
        t.parse::<u32>()
            .map_err(|_| usage(anyhow!("node '{t}' is neither an id nor a letter")))?
    };
    if v >= n {
        return Err(usage(anyhow!("node '{t}' ({v}) is out of range for n={n}")));
    }
    Ok(v)
}

fn parse_sources(raw: &str, n: u32) -> Result<Vec<NodeId>, CliError> {
    if raw.trim() == "all" {
        return Ok((0..n).collect());
    }
    let mut out = Vec::new();
    for token in raw.split(',') {
        out.push(parse_node(token, n)?);
    }
    let mut dedup = out.clone();
    dedup.sort_unstable();
    dedup.dedup();
    if dedup.len() != out.len() {
        return Err(usage(anyhow!("duplicate source in '{raw}'")));
    }
    Ok(out)
}

fn parse_seeds(raw: &str, n: u32) -> Result<BTreeMap<NodeId, i64>, CliError> {
    let mut seeds = BTreeMap::new();
    for token in raw.split(',') {
        let (node, dist) = token
            .split_once('=')
            .ok_or_else(|| usage(anyhow!("seed '{token}' must look like node=dist")))?;
        let v = parse_node(node, n)?;
        let d: i64 = dist
            .trim()
            .parse()
            .map_err(|_| usage(anyhow!("seed distance '{dist}' is not an integer")))?;
        if seeds.insert(v, d).is_some() {
            return Err(usage(anyhow!("node {v} seeded twice")));
        }
    }
    Ok(seeds)
}

fn need_h(p: &Resolved) -> Result<u32, CliError> {
    p.h.ok_or_else(|| usage(anyhow!("this algorithm needs --h")))
}

fn single_source(p: &Resolved) -> Result<NodeId, CliError> {
    match p.sources.as_slice() {
        [s] => Ok(*s),
        _ => Err(usage(anyhow!("this algorithm needs exactly one source"))),
    }
}

/// Layered relaxation over capped seeded walks, tracking the lexicographic
/// (weight, hops) minimum per node the way the library's canonical rule does.
struct LexDp {
    /// layers[j][v]: minimum weight over seeded capped walks of at most j hops.
    layers: Vec<Vec<Dist>>,
    /// Final (weight, hops) pair per node.
    pairs: Vec<(Dist, u32)>,
}

fn lex_better(cand: (i64, u32), cur: (Dist, u32)) -> bool {
    match cur.0 {
        Dist::Finite(b) => (cand.0, cand.1) < (b, cur.1),
        Dist::Unreachable => true,
    }
}

fn seeded_lex_dp(
    graph: &WeightedGraph,
    seeds: &BTreeMap<NodeId, i64>,
    h: u32,
    cap: i64,
) -> LexDp {
    let n = graph.n() as usize;
    let mut pairs: Vec<(Dist, u32)> = vec![(Dist::Unreachable, 0); n];
    for (&v, &d) in seeds {
        if d <= cap && lex_better((d, 0), pairs[v as usize]) {
            pairs[v as usize] = (Dist::Finite(d), 0);
        }
    }
    let mut layers = vec![pairs.iter().map(|p| p.0).collect::<Vec<_>>()];
    for _ in 1..=h {
        let prev = pairs.clone();
        for u in 0..n as NodeId {
            let (Dist::Finite(d), l) = prev[u as usize] else {
                continue;
            };
            for &(v, w) in graph.out_neighbors(u) {
                let wide = i128::from(d) + i128::from(w);
                if wide > i128::from(cap) {
                    continue;
                }
                if lex_better((wide as i64, l + 1), pairs[v as usize]) {
                    pairs[v as usize] = (Dist::Finite(wide as i64), l + 1);
                }
            }
        }
        layers.push(pairs.iter().map(|p| p.0).collect());
    }
    LexDp { layers, pairs }
}

struct PipeCheck {
    ok: bool,
    settled: u32,
    witnessed: u32,
}

/// The pipelined contract has two tiers. A node whose unrestricted shortest
/// path fits the hop budget must settle on the exact canonical pair; any
/// other label only has to be backed by a real capped walk of its recorded
/// hop count.
fn verify_pipelined(
    graph: &WeightedGraph,
    seeds: &BTreeMap<NodeId, i64>,
    h: u32,
    cap: i64,
    got: impl Fn(NodeId) -> Option<(i64, u32)>,
) -> PipeCheck {
    let n = graph.n();
    let hdp = seeded_lex_dp(graph, seeds, h, cap);
    let full = seeded_lex_dp(graph, seeds, h.max(n.saturating_sub(1)), cap);
    let mut check = PipeCheck {
        ok: true,
        settled: 0,
        witnessed: 0,
    };
    for v in 0..n {
        let vi = v as usize;
        let (fd, fl) = full.pairs[vi];
        match (fd.is_finite() && fl <= h, got(v)) {
            (true, Some((d, l))) => {
                check.settled += 1;
                check.ok &= Dist::Finite(d) == fd && l == fl;
            }
            (true, None) => check.ok = false,
            (false, Some((d, l))) => {
                check.witnessed += 1;
                check.ok &= l <= h
                    && d <= cap
                    && matches!(hdp.layers[l as usize][vi], Dist::Finite(f) if f <= d);
            }
            (false, None) => {}
        }
    }
    check
}

fn node_names(ids: &[NodeId], n: u32) -> Option<Vec<String>> {
    (n <= 26).then(|| {
        ids.iter()
            .map(|&v| ((b'a' + v as u8) as char).to_string())
            .collect()
    })
}

fn dist_rows(rows: &[(NodeId, Vec<Dist>)]) -> Vec<(String, String, String)> {
    let mut out = Vec::new();
    for (s, dists) in rows {
        for (v, d) in dists.iter().enumerate() {
            if let Dist::Finite(d) = d {
                out.push((s.to_string(), v.to_string(), d.to_string()));
            }
        }
    }
    out
}

fn collection_rows(collection: &CsSspCollection) -> Vec<(String, String, String)> {
    let mut out = Vec::new();
    for (&root, tree) in &collection.trees {
        for (v, entry) in tree.entries() {
            out.push((root.to_string(), v.to_string(), entry.dist.to_string()));
        }
    }
    out
}

fn verdict_from(ok: bool) -> Verdict {
    if ok {
        Verdict::Exact
    } else {
        Verdict::Fail
    }
}

fn execute(
    algo: AlgorithmArg,
    graph: &WeightedGraph,
    p: &Resolved,
) -> Result<Executed, CliError> {
    let n = graph.n();
    match algo {
        AlgorithmArg::ShortRange => {
            let s = single_source(p)?;
            let h = need_h(p)?;
            let out = short_range(graph, s, h, p.cap).map_err(run_err)?;
            let seeds = BTreeMap::from([(s, 0)]);
            let check =
                verify_pipelined(graph, &seeds, h, p.cap, |v| {
                    out.label(s, v).map(|(d, l, _)| (d, l))
                });
            Ok(Executed {
                phases: vec![("short-range".to_string(), out.metrics.rounds)],
                congestion: out.metrics.congestion(),
                result: json!({
                    "late_adoptions": out.total_late_adoptions(),
                    "max_sends_per_node": out.max_fires(),
                    "settled_nodes": check.settled,
                    "witnessed_nodes": check.witnessed,
                }),
                verdict: verdict_from(check.ok),
                rows: dist_rows(&[(s, out.dist_row(s))]),
            })
        }
        AlgorithmArg::Extension => {
            let seeds = p
                .seeds
                .clone()
                .ok_or_else(|| usage(anyhow!("extension needs --seeds or --sources")))?;
            let h = need_h(p)?;
            let out = short_range_extension(graph, &seeds, h, p.cap).map_err(run_err)?;
            let check = verify_pipelined(graph, &seeds, h, p.cap, |v| {
                match out.dist[v as usize] {
                    Dist::Finite(d) => Some((d, out.hops[v as usize])),
                    Dist::Unreachable => None,
                }
            });
            // Rows are labeled with the smallest seeded node.
            let origin = *seeds.keys().next().expect("nonempty seeds");
            Ok(Executed {
                phases: vec![("extension".to_string(), out.metrics.rounds)],
                congestion: out.metrics.congestion(),
                result: json!({
                    "late_adoptions": out.late_adoptions,
                    "seeded_nodes": seeds.len(),
                    "settled_nodes": check.settled,
                    "witnessed_nodes": check.witnessed,
                }),
                verdict: verdict_from(check.ok),
                rows: dist_rows(&[(origin, out.dist.clone())]),
            })
        }
        AlgorithmArg::MultiSource => {
            let h = need_h(p)?;
            let out = multi_source_pipelined(graph, &p.sources, h, p.cap).map_err(run_err)?;
            let mut ok = true;
            let mut settled = 0;
            let mut witnessed = 0;
            let mut rows = Vec::new();
            for &s in &p.sources {
                let seeds = BTreeMap::from([(s, 0)]);
                let check = verify_pipelined(graph, &seeds, h, p.cap, |v| {
                    out.label(s, v).map(|(d, l, _)| (d, l))
                });
                ok &= check.ok;
                settled += check.settled;
                witnessed += check.witnessed;
                rows.push((s, out.dist_row(s)));
            }
            Ok(Executed {
                phases: vec![("multi-source".to_string(), out.metrics.rounds)],
                congestion: out.metrics.congestion(),
                result: json!({
                    "late_adoptions": out.total_late_adoptions(),
                    "max_sends_per_node_per_source": out.max_fires(),
                    "settled_nodes": settled,
                    "witnessed_nodes": witnessed,
                }),
                verdict: verdict_from(ok),
                rows: dist_rows(&rows),
            })
        }
        AlgorithmArg::Csssp => {
            let h = need_h(p)?;
            let (collection, metrics) =
                build_csssp(graph, &p.sources, h, p.cap, p.method).map_err(run_err)?;
            let violations = verify_csssp(graph, &collection);
            Ok(Executed {
                phases: metrics
                    .phases
                    .iter()
                    .map(|(s, m)| (s.clone(), m.rounds))
                    .collect(),
                congestion: metrics.combined().congestion(),
                result: json!({
                    "trees": collection.trees.len(),
                    "violations": violations.len(),
                }),
                verdict: verdict_from(violations.is_empty()),
                rows: collection_rows(&collection),
            })
        }
        AlgorithmArg::Blocker => {
            let h = need_h(p)?;
            let (collection, mut metrics) =
                build_csssp(graph, &p.sources, h, p.cap, p.method).map_err(run_err)?;
            let (set, _, loop_phases) =
                compute_blocker_set(graph, &collection, h).map_err(run_err)?;
            metrics.phases.extend(loop_phases);
            let covered = verify_blocker(&collection, h, &set.q).is_empty();
            let sized = set.q.len() as u64 <= set.target;
            Ok(Executed {
                phases: metrics
                    .phases
                    .iter()
                    .map(|(s, m)| (s.clone(), m.rounds))
                    .collect(),
                congestion: metrics.combined().congestion(),
                result: json!({
                    "q": set.q,
                    "q_names": node_names(&set.q, n),
                    "size_target": set.target,
                }),
                verdict: verdict_from(covered && sized),
                rows: collection_rows(&collection),
            })
        }
        AlgorithmArg::Ksp | AlgorithmArg::Apsp => {
            if p.h.is_none() && p.rule.is_none() {
                return Err(usage(anyhow!("{} needs --h or --rule", algo.name())));
            }
            let mut config = KspConfig::new(p.sources.clone(), p.h.unwrap_or(1));
            if let Some(rule) = p.rule {
                config = config.with_rule(rule);
            }
            config = config.with_cap(p.cap).with_method(p.method);
            let out = run_ksp(graph, &config).map_err(run_err)?;
            let oracle = dijkstra_apsp(graph).map_err(run_err)?;
            let mut ok = true;
            let mut rows = Vec::new();
            for &x in &p.sources {
                let got = out.row(x).to_vec();
                ok &= got
                    .iter()
                    .enumerate()
                    .all(|(v, d)| *d == oracle.get(x, v as NodeId));
                rows.push((x, got));
            }
            let combined = out.metrics.combined();
            Ok(Executed {
                phases: out
                    .metrics
                    .phases
                    .iter()
                    .map(|(s, m)| (s.clone(), m.rounds))
                    .collect(),
                congestion: combined.congestion(),
                result: json!({
                    "h": out.h,
                    "blocker": out.blocker.q,
                    "blocker_names": node_names(&out.blocker.q, n),
                }),
                verdict: verdict_from(ok),
                rows: dist_rows(&rows),
            })
        }
        AlgorithmArg::RandApsp => {
            let out = run_randomized_apsp(graph, &p.sources, p.seed).map_err(run_err)?;
            let max_hops = n.saturating_sub(1).max(1);
            let mut ok = true;
            let mut rows = Vec::new();
            for &x in &p.sources {
                let want = bellman_ford_oracle(graph, x, max_hops).map_err(run_err)?;
                let got = out.row(x).to_vec();
                ok &= got
                    .iter()
                    .enumerate()
                    .all(|(v, d)| *d == want[v].dist);
                rows.push((x, got));
            }
            let combined = out.metrics.combined();
            Ok(Executed {
                phases: out
                    .metrics
                    .phases
                    .iter()
                    .map(|(s, m)| (s.clone(), m.rounds))
                    .collect(),
                congestion: combined.congestion(),
                result: json!({
                    "h": out.h,
                    "centers": out.centers.centers.len(),
                    "center_target": out.centers.q,
                }),
                verdict: verdict_from(ok),
                rows: dist_rows(&rows),
            })
        }
        AlgorithmArg::Approx => {
            let epsilon = p
                .epsilon
                .ok_or_else(|| usage(anyhow!("approx needs --epsilon")))?;
            let out = approx_apsp(graph, epsilon).map_err(run_err)?;
            let oracle = dijkstra_apsp(graph).map_err(run_err)?;
            let mut all_exact = true;
            let mut sandwich = true;
            let mut rows = Vec::new();
            for u in graph.node_ids() {
                for v in graph.node_ids() {
                    match (oracle.get(u, v), out.est(u, v)) {
                        (Dist::Unreachable, None) => {}
                        (Dist::Finite(d), Some((num, den))) => {
                            let d = d as u128;
                            let num = u128::from(num);
                            let den = u128::from(den);
                            all_exact &= num == d * den;
                            sandwich &= d * den <= num
                                && num * u128::from(epsilon.den)
                                    <= d * den * u128::from(epsilon.den + epsilon.num);
                            rows.push((
                                u.to_string(),
                                v.to_string(),
                                format!("{}", num as f64 / den as f64),
                            ));
                        }
                        _ => {
                            all_exact = false;
                            sandwich = false;
                        }
                    }
                }
            }
            let combined = out.metrics.combined();
            Ok(Executed {
                phases: out
                    .metrics
                    .phases
                    .iter()
                    .map(|(s, m)| (s.clone(), m.rounds))
                    .collect(),
                congestion: combined.congestion(),
                result: json!({ "denominator": out.den }),
                verdict: if all_exact {
                    Verdict::Exact
                } else if sandwich {
                    Verdict::WithinEpsilon
                } else {
                    Verdict::Fail
                },
                rows,
            })
        }
    }
}

// ---------------------------------------------------------------------------
// bench

fn cmd_bench(args: BenchArgs) -> Result<u8, CliError> {
    let sizes = parse_sizes(&args.sizes)?;
    let mut csv = String::from("n,k,h,total_rounds,congestion,phases\n");
    for &n in &sizes {
        let graph = generate(&GeneratorSpec {
            kind: GraphKind::Gnp,
            n,
            p: args.p,
            weight_low: 0,
            weight_high: args.lambda,
            zero_fraction: args.zero_frac,
            seed: args.seed,
        })
        .map_err(usage)?;
        let k = args.k.clamp(1, n);
        let step = (n / k).max(1);
        let sources: Vec<NodeId> = (0..k).map(|i| i * step).collect();
        let epsilon = match &args.epsilon {
            Some(raw) => Some(Epsilon::parse_decimal(raw).ok_or_else(|| {
                usage(anyhow!("--epsilon '{raw}' is not a positive decimal"))
            })?),
            None => None,
        };
        let resolved = Resolved {
            sources,
            h: Some(args.h),
            cap: args.cap.unwrap_or(NO_CAP),
            method: CssspMethod::Pipelined,
            rule: None,
            epsilon,
            seed: args.seed,
            seeds: None,
        };
        let resolved = match args.algorithm {
            // single-source algorithms bench from node 0
            AlgorithmArg::ShortRange | AlgorithmArg::Extension => Resolved {
                sources: vec![0],
                seeds: Some(BTreeMap::from([(0, 0)])),
                ..resolved
            },
            AlgorithmArg::Apsp | AlgorithmArg::RandApsp | AlgorithmArg::Approx => Resolved {
                sources: (0..n).collect(),
                ..resolved
            },
            _ => resolved,
        };
        let executed = execute(args.algorithm, &graph, &resolved)?;
        let total: u64 = executed.phases.iter().map(|(_, r)| r).sum();
        // Indexed and repeated phases collapse into per-family totals so a
        // row stays one line; the run subcommand keeps the full breakdown.
        let mut families: Vec<(String, u64)> = Vec::new();
        for (name, rounds) in &executed.phases {
            let family = name.trim_end_matches(|c: char| c.is_ascii_digit() || c == '-');
            let family = if family.is_empty() { name.as_str() } else { family };
            match families.iter_mut().find(|(f, _)| f == family) {
                Some((_, sum)) => *sum += rounds,
                None => families.push((family.to_string(), *rounds)),
            }
        }
        let phases = families
            .iter()
            .map(|(name, rounds)| format!("{name}={rounds}"))
            .collect::<Vec<_>>()
            .join(";");
        csv.push_str(&format!(
            "{n},{k},{h},{total},{congestion},{phases}\n",
            h = args.h,
            congestion = executed.congestion,
        ));
    }
    match &args.out {
        Some(path) => fs::write(path, csv)
            .with_context(|| format!("writing {}", path.display()))
            .map_err(run_err)?,
        None => print!("{csv}"),
    }
    Ok(0)
}

fn parse_sizes(raw: &str) -> Result<Vec<u32>, CliError> {
    if raw.trim().is_empty() {
        return Ok(Vec::new());
    }
    raw.split(',')
        .map(|t| {
            t.trim()
                .parse::<u32>()
                .map_err(|_| usage(anyhow!("size '{t}' is not a node count")))
        })
        .collect()
}
