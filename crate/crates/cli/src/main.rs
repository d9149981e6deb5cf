use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use trapmap::driver::path_bound;
use trapmap::generators::{gen_adversarial_blocks, gen_random_disjoint, gen_sqrt_blocks, Profile};
use trapmap::geometry::{format_segments, parse_points, parse_segments, validate_input, Violation};
use trapmap::ply::registry_ply;
use trapmap::verify::{max_query_path, max_query_path_bounded};
use trapmap::{
    build_guaranteed, identity_order, random_order, Boundary, BuildConfig, DriverError, HistoryDag, LocateError,
    SearchTree, Segment, SegmentId, VerifierKind,
};

const SEED_ENV: &str = "TRAPMAP_SEED";

#[derive(Parser)]
#[command(name = "trapmap", version, about = "Trapezoidal map point location with certified query time")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a certified history DAG and print its manifest.
    Build {
        segments: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Build, then locate every point of a query file.
    Query {
        segments: PathBuf,
        queries: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Build one structure in a fixed order and check it against a bound.
    Verify {
        segments: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Recursive)]
        method: Method,
        /// Defaults to ⌈3λ ln(n+1)⌉.
        #[arg(long)]
        bound: Option<usize>,
        #[command(flatten)]
        order: OrderArgs,
    },
    /// Size and depth counts, optionally against the search tree.
    Stats {
        segments: PathBuf,
        /// Also build the search tree and report the tree/DAG node ratio.
        #[arg(long)]
        tree: bool,
        #[command(flatten)]
        order: OrderArgs,
    },
    /// Write a generated instance in the segment text format.
    Gen {
        #[arg(value_enum)]
        family: Family,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Doubling experiment on random instances; prints CSV of thread CPU times.
    Bench {
        /// Smallest n is 2^from.
        #[arg(long, default_value_t = 10)]
        from: u32,
        #[arg(long, default_value_t = 15)]
        to: u32,
        /// Rounds over all sizes; the fastest run of each size is reported.
        #[arg(long, default_value_t = 7)]
        reps: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Family::Levels)]
        family: Family,
    },
}

#[derive(Args)]
struct ConfigArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 20.0)]
    lambda: f64,
    #[arg(long, default_value_t = 3.0)]
    rho: f64,
    #[arg(long, value_enum, default_value_t = Method::Recursive)]
    verifier: Method,
    #[arg(long, default_value_t = 64)]
    max_rebuilds: u32,
    /// Replace the computed path bound.
    #[arg(long)]
    bound: Option<usize>,
}

#[derive(Args)]
struct OrderArgs {
    #[arg(long, value_enum, default_value_t = Order::Random)]
    order: Order,
    /// Seed of the random order.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 20.0)]
    lambda: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Recursive,
    Ply,
    Depth,
}

impl Method {
    fn kind(self) -> VerifierKind {
        match self {
            Method::Recursive => VerifierKind::Recursive,
            Method::Ply => VerifierKind::Ply,
            Method::Depth => VerifierKind::DepthOnly,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Method::Recursive => "recursive",
            Method::Ply => "ply",
            Method::Depth => "depth",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Order {
    /// Seeded shuffle, the same one the first build attempt uses.
    Random,
    /// File order; the block generators write their prescribed order this way.
    Input,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    /// Horizontal segments at distinct heights.
    Levels,
    /// Random segments kept while the set stays interior-disjoint.
    Rejection,
    /// Recursive blocks with depth Θ(n) and query path O(log n).
    Adversarial,
    /// √n blocks of √n segments.
    Sqrt,
}

enum Failure {
    /// Verification failed or rebuilds ran out.
    Rejected(Value),
    /// Unreadable, malformed or invalid input, or a bad flag.
    Input(Value),
}

impl Failure {
    fn input(kind: &str, message: impl ToString) -> Self {
        Failure::Input(json!({ "error": kind, "message": message.to_string() }))
    }
}

struct Input {
    path: PathBuf,
    sha256: String,
    text: String,
}

impl Input {
    fn read(path: &Path) -> Result<Self, Failure> {
        let bytes = std::fs::read(path).map_err(|e| Failure::input("UNREADABLE", format!("{}: {e}", path.display())))?;
        let text = String::from_utf8(bytes).map_err(|_| Failure::input("MALFORMED", "input is not UTF-8"))?;
        Ok(Input { path: path.to_path_buf(), sha256: hex::encode(Sha256::digest(text.as_bytes())), text })
    }

    fn echo(&self) -> Value {
        json!({ "path": self.path.display().to_string(), "sha256": self.sha256 })
    }
}

fn violation_kind(v: &Violation) -> &'static str {
    match v {
        Violation::Crossing(..) => "CROSSING",
        Violation::EndpointOnInterior(..) => "ENDPOINT_ON_INTERIOR",
        Violation::Degenerate(_) => "DEGENERATE",
        Violation::Duplicate(..) => "DUPLICATE",
        Violation::OutOfRange(_) => "OUT_OF_RANGE",
    }
}

fn load_segments(input: &Input) -> Result<Vec<Segment>, Failure> {
    let segments = parse_segments(&input.text).map_err(|e| Failure::input("MALFORMED", e))?;
    validate_input(&segments).map_err(|v| {
        Failure::Input(json!({ "error": violation_kind(&v), "message": v.to_string(), "violation": v }))
    })?;
    Ok(segments)
}

fn effective_seed(flag: u64) -> Result<u64, Failure> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| Failure::input("BAD_SEED", format!("{SEED_ENV}={v} is not a u64"))),
        Err(_) => Ok(flag),
    }
}

fn manifest(command: &str, inputs: Vec<Value>, config: Value, seed: u64, result: Value, timing: Value) -> Value {
    json!({
        "command": command,
        "inputs": inputs,
        "config": config,
        "seed": seed,
        "result": result,
        "timing": timing,
    })
}

fn build_config(args: &ConfigArgs) -> Result<BuildConfig, Failure> {
    let config = BuildConfig {
        lambda: args.lambda,
        size_rho: args.rho,
        verifier: args.verifier.kind(),
        max_rebuilds: args.max_rebuilds,
        seed: effective_seed(args.seed)?,
        bound_override: args.bound,
    };
    config.validate().map_err(|e| Failure::input("BAD_CONFIG", e))?;
    Ok(config)
}

fn config_echo(c: &BuildConfig) -> Value {
    json!({
        "lambda": c.lambda,
        "size_rho": c.size_rho,
        "verifier": c.verifier,
        "max_rebuilds": c.max_rebuilds,
        "bound_override": c.bound_override,
    })
}

fn guaranteed(segments: &[Segment], config: &BuildConfig) -> Result<(HistoryDag, Value, Value), Failure> {
    match build_guaranteed(segments, config) {
        Ok((dag, report)) => {
            let mut result = serde_json::to_value(&report).expect("report serializes");
            let timing = result.as_object_mut().and_then(|o| o.remove("timing")).unwrap_or(Value::Null);
            Ok((dag, result, timing))
        }
        Err(DriverError::RebuildLimitExceeded { attempts, outcomes }) => Err(Failure::Rejected(json!({
            "error": "REBUILD_LIMIT_EXCEEDED",
            "attempts": attempts,
            "outcomes": outcomes,
        }))),
        Err(e) => Err(Failure::input("BUILD", e)),
    }
}

fn cmd_build(path: &Path, args: &ConfigArgs) -> Result<Value, Failure> {
    let input = Input::read(path)?;
    let segments = load_segments(&input)?;
    let config = build_config(args)?;
    let (_, result, timing) = guaranteed(&segments, &config)?;
    Ok(manifest("build", vec![input.echo()], config_echo(&config), config.seed, result, timing))
}

fn boundary(b: Boundary) -> String {
    match b {
        Boundary::Floor => "FLOOR".into(),
        Boundary::Ceiling => "CEILING".into(),
        Boundary::Segment(id) => format!("s{id}"),
    }
}

fn cmd_query(segments_path: &Path, queries_path: &Path, args: &ConfigArgs) -> Result<(), Failure> {
    let input = Input::read(segments_path)?;
    let segments = load_segments(&input)?;
    let queries = Input::read(queries_path)?;
    let points = parse_points(&queries.text).map_err(|e| Failure::input("MALFORMED", e))?;
    let config = build_config(args)?;
    let (dag, ..) = guaranteed(&segments, &config)?;
    let mut out = String::new();
    for q in points {
        let line = match dag.locate(q) {
            Ok(loc) => {
                let t = dag.trapezoid(loc.trapezoid);
                format!(
                    "{} {} bottom={} top={} left={} right={} path={}",
                    q.x,
                    q.y,
                    boundary(t.bottom),
                    boundary(t.top),
                    t.left_wall,
                    t.right_wall,
                    loc.path_length
                )
            }
            Err(LocateError::OnVertex(_)) => format!("{} {} ON_VERTEX", q.x, q.y),
            Err(LocateError::OnSegment(id)) => format!("{} {} ON_SEGMENT s{id}", q.x, q.y),
        };
        out.push_str(&line);
        out.push('\n');
    }
    print!("{out}");
    Ok(())
}

fn ordered(n: usize, args: &OrderArgs) -> Result<(Vec<SegmentId>, u64), Failure> {
    let seed = effective_seed(args.seed)?;
    Ok(match args.order {
        Order::Random => (random_order(n, seed), seed),
        Order::Input => (identity_order(n), seed),
    })
}

fn order_echo(args: &OrderArgs) -> Value {
    let order = match args.order {
        Order::Random => "random",
        Order::Input => "input",
    };
    json!({ "order": order, "lambda": args.lambda })
}

fn ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// CPU time of the calling thread in milliseconds; time spent preempted does not count.
fn thread_cpu_ms() -> f64 {
    let mut ts = libc::timespec { tv_sec: 0, tv_nsec: 0 };
    // SAFETY: `ts` is a valid, writable timespec.
    let rc = unsafe { libc::clock_gettime(libc::CLOCK_THREAD_CPUTIME_ID, &mut ts) };
    assert_eq!(rc, 0, "thread CPU clock unavailable");
    ts.tv_sec as f64 * 1e3 + ts.tv_nsec as f64 / 1e6
}

fn cmd_verify(path: &Path, method: Method, bound: Option<usize>, args: &OrderArgs) -> Result<Value, Failure> {
    let input = Input::read(path)?;
    let segments = load_segments(&input)?;
    let (order, seed) = ordered(segments.len(), args)?;
    let start = Instant::now();
    let dag = HistoryDag::build(&segments, &order).map_err(|e| Failure::input("BUILD", e))?;
    let build_ms = ms(start);
    let bound = bound.unwrap_or_else(|| path_bound(args.lambda, segments.len()));
    let depth = dag.depth() as usize;
    let start = Instant::now();
    let mut result = json!({ "method": method.name(), "depth": depth, "bound": bound, "n": segments.len() });
    let pass = match method {
        Method::Recursive => {
            let r = max_query_path_bounded(&dag, Some(bound)).map_err(|e| Failure::input("VERIFY", e))?;
            result["L"] = json!(r.max_length);
            result["aborted"] = json!(r.aborted);
            result["certificate"] = json!(r.max_length);
            !r.aborted && r.max_length <= bound
        }
        Method::Ply => {
            let r = registry_ply(&dag).map_err(|e| Failure::input("VERIFY", e))?;
            result["ply"] = json!(r.ply);
            result["certificate"] = json!(3 * r.ply);
            3 * r.ply <= bound
        }
        Method::Depth => {
            result["certificate"] = json!(depth);
            depth <= bound
        }
    };
    let verify_ms = ms(start);
    result["pass"] = json!(pass);
    result["certifying"] = json!(!matches!(method, Method::Depth));
    let mut config = order_echo(args);
    config["method"] = json!(method.name());
    config["bound"] = json!(bound);
    let m = manifest(
        "verify",
        vec![input.echo()],
        config,
        seed,
        result,
        json!({ "build_ms": build_ms, "verify_ms": verify_ms }),
    );
    if pass {
        Ok(m)
    } else {
        Err(Failure::Rejected(m))
    }
}

fn cmd_stats(path: &Path, with_tree: bool, args: &OrderArgs) -> Result<Value, Failure> {
    let input = Input::read(path)?;
    let segments = load_segments(&input)?;
    let (order, seed) = ordered(segments.len(), args)?;
    let start = Instant::now();
    let dag = HistoryDag::build(&segments, &order).map_err(|e| Failure::input("BUILD", e))?;
    let build_ms = ms(start);
    let start = Instant::now();
    let l = max_query_path(&dag).map_err(|e| Failure::input("VERIFY", e))?.max_length;
    let verify_ms = ms(start);
    let mut result = serde_json::to_value(dag.stats()).expect("stats serialize");
    result["max_path"] = json!(l);
    result["vertex_count"] = json!(dag.vertex_count());
    let mut timing = json!({ "build_ms": build_ms, "verify_ms": verify_ms });
    if with_tree {
        let start = Instant::now();
        let tree = SearchTree::build(&segments, &order).map_err(|e| Failure::input("BUILD", e))?;
        timing["tree_ms"] = json!(ms(start));
        result["tree"] = serde_json::to_value(tree.stats()).expect("stats serialize");
        result["tree_dag_node_ratio"] = json!(tree.node_count() as f64 / dag.node_count() as f64);
    }
    let mut config = order_echo(args);
    config["tree"] = json!(with_tree);
    Ok(manifest("stats", vec![input.echo()], config, seed, result, timing))
}

fn generate(family: Family, n: usize, seed: u64) -> Result<Vec<Segment>, Failure> {
    let gen = match family {
        Family::Levels => gen_random_disjoint(n, seed, Profile::HorizontalLevels),
        Family::Rejection => gen_random_disjoint(n, seed, Profile::NoncrossingRejection),
        Family::Adversarial => gen_adversarial_blocks(n).map(|(s, _)| s),
        Family::Sqrt => gen_sqrt_blocks(n).map(|(s, _)| s),
    };
    gen.map_err(|e| Failure::input("GENERATOR", e))
}

fn cmd_gen(family: Family, n: usize, seed: u64, out: Option<&Path>) -> Result<(), Failure> {
    let text = format_segments(&generate(family, n, effective_seed(seed)?)?);
    match out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| Failure::input("UNWRITABLE", format!("{}: {e}", path.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_bench(from: u32, to: u32, reps: u32, seed: u64, family: Family) -> Result<(), Failure> {
    if from > to || to > 20 || reps == 0 {
        return Err(Failure::input("BAD_FLAGS", "need from <= to <= 20 and reps >= 1"));
    }
    let seed = effective_seed(seed)?;
    let mut sizes = Vec::new();
    for e in from..=to {
        let n = 1usize << e;
        sizes.push((generate(family, n, seed)?, random_order(n, seed)));
    }
    // rounds sweep every size once so a slow stretch of the machine is shared out
    let mut best = vec![(f64::INFINITY, f64::INFINITY); sizes.len()];
    let mut rows = vec![(0, 0, 0, 0); sizes.len()];
    for _ in 0..reps {
        for (i, (segments, order)) in sizes.iter().enumerate() {
            let start = thread_cpu_ms();
            let dag = HistoryDag::build(segments, order).map_err(|e| Failure::input("BUILD", e))?;
            let mid = thread_cpu_ms();
            let l = max_query_path(&dag).map_err(|e| Failure::input("VERIFY", e))?.max_length;
            let (build_ms, verify_ms) = (mid - start, thread_cpu_ms() - mid);
            if build_ms + verify_ms < best[i].0 + best[i].1 {
                best[i] = (build_ms, verify_ms);
            }
            rows[i] = (dag.depth() as usize, l, dag.node_count(), dag.leaf_count());
        }
    }
    println!("n,build_ms,verify_ms,total_ms,doubling_ratio,depth,max_path,node_count,leaf_count");
    let mut previous: Option<f64> = None;
    for (((segments, _), (b, v)), row) in sizes.iter().zip(best).zip(rows) {
        let ratio = previous.map_or(String::new(), |p| format!("{:.3}", (b + v) / p));
        println!("{},{b:.3},{v:.3},{:.3},{ratio},{},{},{},{}", segments.len(), b + v, row.0, row.1, row.2, row.3);
        previous = Some(b + v);
    }
    Ok(())
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("json serializes"));
}

fn run(cli: Cli) -> Result<Option<Value>, Failure> {
    match cli.command {
        Command::Build { segments, config } => cmd_build(&segments, &config).map(Some),
        Command::Query { segments, queries, config } => cmd_query(&segments, &queries, &config).map(|_| None),
        Command::Verify { segments, method, bound, order } => cmd_verify(&segments, method, bound, &order).map(Some),
        Command::Stats { segments, tree, order } => cmd_stats(&segments, tree, &order).map(Some),
        Command::Gen { family, n, seed, out } => cmd_gen(family, n, seed, out.as_deref()).map(|_| None),
        Command::Bench { from, to, reps, seed, family } => cmd_bench(from, to, reps, seed, family).map(|_| None),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(Some(v)) => {
            print_json(&v);
            ExitCode::SUCCESS
        }
        Ok(None) => ExitCode::SUCCESS,
        Err(Failure::Rejected(v)) => {
            print_json(&v);
            ExitCode::from(1)
        }
        Err(Failure::Input(v)) => {
            if let Some(msg) = v.get("message").and_then(Value::as_str) {
                eprintln!("error: {msg}");
            }
            print_json(&v);
            ExitCode::from(2)
        }
    }
}
