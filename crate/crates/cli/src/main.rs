//! `hyperttsv` — generate, inspect, compute TTSV1 and H-eigenvector
//! centrality, and benchmark, with machine-readable output.
//!
//! Exit codes: 0 success; 1 I/O or input-format failure; 2 invalid flags;
//! 3 dimension mismatch; 4 oracle guard exceeded; 5 rank above the supported
//! maximum order; 6 centrality did not converge; 7 disconnected input
//! without `--force-disconnected`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hyperttsv::ccss::{build_ccss, worst_case_bound, BuildMode};
use hyperttsv::centrality::{hec_nqz, CentralityError, NqzOptions};
use hyperttsv::hypergraph::{generate_synthetic, parse_hypergraph, GenSpec};
use hyperttsv::oracle::OracleError;
use hyperttsv::ttsv::{Algo, Ttsv1Engine, TtsvError, TtsvOptions};
use hyperttsv::Hypergraph;

const EXIT_IO: u8 = 1;
const EXIT_DIMENSION: u8 = 3;
const EXIT_ORACLE_GUARD: u8 = 4;
const EXIT_RANK: u8 = 5;
const EXIT_NOT_CONVERGED: u8 = 6;
const EXIT_DISCONNECTED: u8 = 7;

#[derive(Parser)]
#[command(name = "hyperttsv", version, about = "TTSV1 and H-eigenvector centrality on non-uniform hypergraphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded synthetic hypergraph (edge-list text format).
    Gen(GenArgs),
    /// Compute s = TTSV1(b) with a chosen engine.
    Ttsv1(TtsvArgs),
    /// Compute H-eigenvector centrality by NQZ iteration.
    Hec(HecArgs),
    /// Print storage statistics of the compressed forest.
    Stats(StatsArgs),
    /// Benchmark engines across worker counts into a CSV.
    Bench(BenchArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    nodes: usize,
    #[arg(long)]
    edges: usize,
    /// Maximum edge size; must be a positive multiple of 5.
    #[arg(long)]
    rank: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TtsvArgs {
    #[arg(long)]
    input: PathBuf,
    /// Use the all-ones vector (s is then the degree vector).
    #[arg(long, group = "vec")]
    ones: bool,
    /// Read b from a file, one value per line.
    #[arg(long, group = "vec")]
    vector: Option<PathBuf>,
    /// Draw b uniformly from (0.1, 2) with this seed.
    #[arg(long, group = "vec")]
    random_seed: Option<u64>,
    #[arg(long, default_value = "memo", value_parser = parse_algo)]
    algo: Algo,
    /// Worker threads; 0 = platform default.
    #[arg(long, env = "HYPERTTSV_THREADS", default_value_t = 0)]
    threads: usize,
    /// Bit-identical output for any worker count.
    #[arg(long)]
    deterministic: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Drop edges larger than this before computing.
    #[arg(long)]
    max_size: Option<usize>,
    /// Also print conv_count and wall time.
    #[arg(long)]
    stats: bool,
    /// Rerun with a second engine and report the max relative difference.
    #[arg(long, value_parser = parse_algo)]
    compare: Option<Algo>,
}

#[derive(Args)]
struct HecArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 1000)]
    max_iters: usize,
    #[arg(long, default_value = "memo", value_parser = parse_algo)]
    algo: Algo,
    #[arg(long, env = "HYPERTTSV_THREADS", default_value_t = 0)]
    threads: usize,
    /// Run on disconnected inputs anyway (uniqueness is not guaranteed).
    #[arg(long)]
    force_disconnected: bool,
    /// Print only the K vertices with highest centrality.
    #[arg(long)]
    top: Option<usize>,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    input: PathBuf,
    /// Also build and report the untrimmed forest.
    #[arg(long)]
    full: bool,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    input: PathBuf,
    /// Comma-separated engines.
    #[arg(long, default_value = "aay,direct,fft,memo", value_delimiter = ',', value_parser = parse_algo)]
    algos: Vec<Algo>,
    /// Comma-separated worker counts.
    #[arg(long = "threads-list", default_value = "1,2,4,8", value_delimiter = ',')]
    threads_list: Vec<usize>,
    #[arg(long, default_value_t = 3)]
    repeats: usize,
    /// Per-run wall-time limit in seconds; a cell that exceeds it records
    /// status=timeout and skips its remaining repeats. 0 = no limit.
    #[arg(long, default_value_t = 0.0)]
    timeout: f64,
    /// CSV output path; stdout when omitted.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Seed for the shared input vector b.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn parse_algo(s: &str) -> Result<Algo, String> {
    s.parse()
}

#[derive(Debug)]
struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::new(EXIT_IO, format!("i/o error: {e}"))
    }
}

impl From<hyperttsv::hypergraph::HypergraphError> for CliError {
    fn from(e: hyperttsv::hypergraph::HypergraphError) -> Self {
        Self::new(EXIT_IO, format!("input error: {e}"))
    }
}

impl From<TtsvError> for CliError {
    fn from(e: TtsvError) -> Self {
        let code = match &e {
            TtsvError::DimensionMismatch { .. } => EXIT_DIMENSION,
            TtsvError::OrderTooLarge(_) => EXIT_RANK,
            TtsvError::Oracle(OracleError::OracleTooLarge { .. }) => EXIT_ORACLE_GUARD,
            _ => EXIT_IO,
        };
        Self::new(code, e.to_string())
    }
}

impl From<CentralityError> for CliError {
    fn from(e: CentralityError) -> Self {
        let code = match &e {
            CentralityError::Disconnected => EXIT_DISCONNECTED,
            CentralityError::IsolatedVertex(_) => EXIT_DISCONNECTED,
            CentralityError::RankTooSmall(_) => EXIT_IO,
            CentralityError::Ttsv(t) => match t {
                TtsvError::DimensionMismatch { .. } => EXIT_DIMENSION,
                TtsvError::OrderTooLarge(_) => EXIT_RANK,
                TtsvError::Oracle(OracleError::OracleTooLarge { .. }) => EXIT_ORACLE_GUARD,
                _ => EXIT_IO,
            },
        };
        Self::new(code, e.to_string())
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Ttsv1(args) => cmd_ttsv1(args),
        Command::Hec(args) => cmd_hec(args),
        Command::Stats(args) => cmd_stats(args),
        Command::Bench(args) => cmd_bench(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn load(path: &Path) -> Result<Hypergraph, CliError> {
    let file = File::open(path)
        .map_err(|e| CliError::new(EXIT_IO, format!("cannot open {}: {e}", path.display())))?;
    Ok(parse_hypergraph(BufReader::new(file), false)?)
}

fn out_writer(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    match path {
        Some(p) => Ok(Box::new(BufWriter::new(File::create(p)?))),
        None => Ok(Box::new(std::io::stdout().lock())),
    }
}

fn cmd_gen(args: GenArgs) -> Result<u8, CliError> {
    let spec = GenSpec { n: args.nodes, m: args.edges, rank: args.rank, seed: args.seed };
    if args.rank == 0 || args.rank % 5 != 0 {
        return Err(CliError::new(2, "rank must be a positive multiple of 5"));
    }
    let h: Hypergraph = generate_synthetic(&spec)?;
    let mut w = out_writer(args.out.as_deref())?;
    w.write_all(h.to_edge_list(false).as_bytes())?;
    w.flush()?;
    let mut per_order = std::collections::BTreeMap::new();
    for e in h.edges() {
        *per_order.entry(e.size()).or_insert(0usize) += 1;
    }
    eprintln!("n = {}, m = {}, rank = {}", h.n(), h.edges().len(), h.rank());
    for (k, c) in per_order {
        eprintln!("  order {k}: {c} edges");
    }
    Ok(0)
}

fn input_vector(args: &TtsvArgs, n: usize) -> Result<Vec<f64>, CliError> {
    if args.ones {
        return Ok(vec![1.0; n]);
    }
    if let Some(path) = &args.vector {
        let file = File::open(path)?;
        let mut b = Vec::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let v: f64 = t
                .parse()
                .map_err(|e| CliError::new(EXIT_IO, format!("vector line {}: {e}", i + 1)))?;
            b.push(v);
        }
        return Ok(b);
    }
    if let Some(seed) = args.random_seed {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        return Ok((0..n).map(|_| rng.gen_range(0.1..2.0)).collect());
    }
    Err(CliError::new(2, "one of --ones, --vector, --random-seed is required"))
}

fn random_b(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(0.1..2.0)).collect()
}

fn cmd_ttsv1(args: TtsvArgs) -> Result<u8, CliError> {
    let mut h = load(&args.input)?;
    if let Some(k) = args.max_size {
        h = h.filter_by_max_size(k);
    }
    let b = input_vector(&args, h.n())?;
    let opts = TtsvOptions { workers: args.threads, deterministic: args.deterministic };
    let engine = Ttsv1Engine::new(&h, args.algo, opts)?;
    let report = engine.apply(&b)?;
    let mut w = out_writer(args.out.as_deref())?;
    for (v, x) in report.s.iter().enumerate() {
        writeln!(w, "{}\t{:.16e}", v + 1, x)?;
    }
    w.flush()?;
    if args.stats {
        eprintln!(
            "algo = {}, workers = {}, conv_count = {}, wall_time_s = {:.6}",
            report.algo.name(),
            report.workers,
            report.conv_count,
            report.wall_time.as_secs_f64()
        );
    }
    if let Some(other) = args.compare {
        let other_engine = Ttsv1Engine::new(&h, other, opts)?;
        let s2 = other_engine.apply(&b)?.s;
        let mut max_rel = 0.0f64;
        for (a, b) in report.s.iter().zip(&s2) {
            let scale = a.abs().max(b.abs()).max(1e-300);
            max_rel = max_rel.max((a - b).abs() / scale);
        }
        println!("max_rel_diff\t{:.3e}", max_rel);
    }
    Ok(0)
}

fn cmd_hec(args: HecArgs) -> Result<u8, CliError> {
    let h = load(&args.input)?;
    let topts = TtsvOptions { workers: args.threads, deterministic: false };
    let engine = Ttsv1Engine::new(&h, args.algo, topts)?;
    let opts = NqzOptions { tol: args.tol, max_iters: args.max_iters, force: args.force_disconnected };
    let r = hec_nqz(&h, &engine, opts)?;
    println!("lambda_min\t{:.16e}", r.lambda_min);
    println!("lambda_max\t{:.16e}", r.lambda_max);
    println!("iterations\t{}", r.iterations);
    println!("converged\t{}", r.converged);
    match args.top {
        Some(k) => {
            let mut order: Vec<usize> = (0..r.x.len()).collect();
            order.sort_by(|&a, &b| r.x[b].partial_cmp(&r.x[a]).unwrap().then(a.cmp(&b)));
            for &v in order.iter().take(k) {
                println!("{}\t{:.16e}", v + 1, r.x[v]);
            }
        }
        None => {
            for (v, x) in r.x.iter().enumerate() {
                println!("{}\t{:.16e}", v + 1, x);
            }
        }
    }
    Ok(if r.converged { 0 } else { EXIT_NOT_CONVERGED })
}

fn cmd_stats(args: StatsArgs) -> Result<u8, CliError> {
    let h = load(&args.input)?;
    let t0 = Instant::now();
    let forest = build_ccss(&h, BuildMode::Trimmed).map_err(TtsvError::from)?;
    let build_time = t0.elapsed();
    let stats = forest.stats(&h);
    println!("mode\ttrimmed");
    print_stats(&stats);
    println!("worst_case_bound\t{}", worst_case_bound(&h));
    println!("build_time_s\t{:.6}", build_time.as_secs_f64());
    if args.full {
        let t0 = Instant::now();
        let full = build_ccss(&h, BuildMode::Full).map_err(TtsvError::from)?;
        let fs = full.stats(&h);
        println!("mode\tfull");
        print_stats(&fs);
        println!("build_time_s\t{:.6}", t0.elapsed().as_secs_f64());
    }
    Ok(0)
}

fn print_stats(stats: &hyperttsv::ccss::CcssStats) {
    println!("node_count\t{}", stats.node_count);
    println!("leaf_count\t{}", stats.leaf_count);
    println!("root_count\t{}", stats.root_count);
    let per_level: Vec<String> = stats.per_level.iter().map(|c| c.to_string()).collect();
    println!("per_level\t{}", per_level.join(","));
    println!("coo_units\t{}", stats.coo_units);
    println!("ccss_units\t{}", stats.ccss_units);
    println!("compression_ratio\t{:.6}", stats.compression_ratio);
}

fn cmd_bench(args: BenchArgs) -> Result<u8, CliError> {
    let h = load(&args.input)?;
    let dataset = args
        .input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "input".into());
    let b = random_b(h.n(), args.seed);
    let mut w = out_writer(args.csv.as_deref())?;
    writeln!(w, "dataset,algo,workers,repeat,wall_time_s,conv_count,checksum,status")?;
    w.flush()?;
    for &algo in &args.algos {
        for &workers in &args.threads_list {
            let opts = TtsvOptions { workers, deterministic: false };
            let engine = Ttsv1Engine::new(&h, algo, opts)?;
            for repeat in 0..args.repeats {
                let report = engine.apply(&b)?;
                let wall = report.wall_time.as_secs_f64();
                let timed_out = args.timeout > 0.0 && wall > args.timeout;
                let checksum: f64 = report.s.iter().sum();
                let status = if timed_out { "timeout" } else { "ok" };
                writeln!(
                    w,
                    "{dataset},{},{workers},{repeat},{:.6},{},{:.16e},{status}",
                    algo.name(),
                    wall,
                    report.conv_count,
                    checksum
                )?;
                w.flush()?;
                if timed_out {
                    // Mirror batch-queue practice: a cell that blows the
                    // budget is recorded once and its remaining repeats skipped.
                    break;
                }
            }
        }
    }
    Ok(0)
}
