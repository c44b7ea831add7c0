use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use cvrp_bench::experiments::{
    final_medians, measure_speedup, record_from_cover, record_from_report, run_crossover_bench,
    run_mutation_bench, run_tsp_prd, summarize_crossover, CrossoverBenchConfig, MutationBenchConfig,
    SpeedupConfig, TspPrdConfig, DEFAULT_COORD_BOUND,
};
use cvrp_bench::{format_prd, Optima};
use cvrp_core::memetic::{
    default_pr_cross, DEFAULT_MIGRATION_COUNT, DEFAULT_MIGRATION_FREQ, DEFAULT_POPULATION_SIZE,
    DEFAULT_PR_MUT, DEFAULT_SA_COOLING, DEFAULT_SA_STEPS,
};
use cvrp_core::oracle::{brute_force_best_route, DEFAULT_MAX_CLIENTS};
use cvrp_core::tsplib::{
    generate_random_instance, random_instance_name, random_points, read_tsplib, write_euc_2d,
};
use cvrp_core::{cost_model, run_island_model, solve_capacity2, CrossoverKind, Instance, IslandConfig, MemeticParams};
use serde::Serialize;

/// Environment variable naming the directory relative `--out` paths resolve against.
const OUT_DIR_ENV: &str = "CVRP_BENCH_OUT_DIR";

#[derive(Parser)]
#[command(name = "cvrp-bench", version, about = "Unit-demand CVRP solvers and experiment protocols")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance with the island-model memetic search (or the exact
    /// capacity-2 solver with --exact) and print a JSON record.
    Solve(SolveArgs),
    /// Exact capacity-2 solution through minimum perfect matching.
    Exact2(Exact2Args),
    /// Exhaustive optimum for small instances.
    Oracle(OracleArgs),
    /// Median iterations to reach a reference weight per crossover operator.
    BenchCrossover(BenchCrossoverArgs),
    /// Median best-weight trajectories for several mutation probabilities.
    BenchMutation(BenchMutationArgs),
    /// TSP-mode percentage relative deviation for a directory of TSPLIB files.
    TspPrd(TspPrdArgs),
    /// Measured against theoretical speedup under equal total work.
    Speedup(SpeedupArgs),
    /// Theoretical speedup curve.
    SpeedupCurve(SpeedupCurveArgs),
    /// Write a random Euclidean instance as a TSPLIB file.
    Gen(GenArgs),
}

#[derive(Args, Clone)]
struct InstanceArgs {
    /// TSPLIB file to solve.
    #[arg(required_unless_present = "random", conflicts_with = "random")]
    instance: Option<PathBuf>,
    /// Generate a random Euclidean instance with this many vertices instead.
    #[arg(long, value_name = "N")]
    random: Option<usize>,
    /// Seed of the random instance.
    #[arg(long, default_value_t = 0)]
    instance_seed: u64,
}

impl InstanceArgs {
    fn load(&self) -> Result<Instance> {
        match (&self.instance, self.random) {
            (Some(path), _) => {
                read_tsplib(path).with_context(|| format!("reading {}", path.display()))
            }
            (None, Some(n)) => Ok(generate_random_instance(n, self.instance_seed, DEFAULT_COORD_BOUND)?),
            (None, None) => bail!("give an instance path or --random N"),
        }
    }
}

#[derive(Args, Clone)]
struct SearchArgs {
    /// Population size per island.
    #[arg(long, default_value_t = DEFAULT_POPULATION_SIZE)]
    pop_size: usize,
    #[arg(long, default_value_t = 1000)]
    iterations: usize,
    /// Iterations between migrations (50 was best in the original experiments).
    #[arg(long, default_value_t = DEFAULT_MIGRATION_FREQ)]
    migration_freq: usize,
    /// Genomes each island broadcasts per migration.
    #[arg(long, default_value_t = DEFAULT_MIGRATION_COUNT)]
    migration_count: usize,
    /// Per-pair crossover probability [default: 2 / pop-size].
    #[arg(long)]
    pr_cross: Option<f64>,
    /// Mutation probability (0.15 was best in the original experiments).
    #[arg(long, default_value_t = DEFAULT_PR_MUT)]
    pr_mut: f64,
    /// Crossover operator (CX converged fastest in the original experiments).
    #[arg(long, default_value = "cx")]
    crossover: CrossoverKind,
    /// Initial annealing temperature [default: mean edge weight].
    #[arg(long)]
    sa_temp: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_SA_COOLING)]
    sa_cooling: f64,
    /// Annealing proposals per local-search call.
    #[arg(long, default_value_t = DEFAULT_SA_STEPS)]
    sa_steps: usize,
    /// Stop after this many iterations without improvement.
    #[arg(long)]
    stagnation: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SearchArgs {
    fn params(&self) -> Result<MemeticParams> {
        let p = MemeticParams {
            population_size: self.pop_size,
            pr_cross: self.pr_cross.unwrap_or_else(|| default_pr_cross(self.pop_size)),
            pr_mut: self.pr_mut,
            iterations: self.iterations,
            migration_freq: self.migration_freq,
            migration_count: self.migration_count,
            sa_initial_temp: self.sa_temp,
            sa_cooling: self.sa_cooling,
            sa_steps: self.sa_steps,
            crossover: self.crossover,
            seed: self.seed,
            stagnation_limit: self.stagnation,
        };
        p.validate()?;
        Ok(p)
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Truck capacity [default: all clients, i.e. TSP mode].
    #[arg(long)]
    capacity: Option<usize>,
    #[arg(long, default_value_t = 4)]
    islands: usize,
    /// Worker threads [default: one per island].
    #[arg(long)]
    workers: Option<usize>,
    #[command(flatten)]
    search: SearchArgs,
    /// Wall-clock budget in seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    /// Stop once the best weight is at most this.
    #[arg(long)]
    target: Option<u64>,
    /// Known optimum for the PRD [default: looked up in the optima file].
    #[arg(long)]
    optimum: Option<u64>,
    /// Optima file [default: bundled TSPLIB optima].
    #[arg(long)]
    optima: Option<PathBuf>,
    /// Use the exact matching solver (capacity 2, even client count).
    #[arg(long)]
    exact: bool,
    /// Per-iteration best weights of every island as CSV.
    #[arg(long)]
    history: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Exact2Args {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long)]
    capacity: usize,
    /// Refuse instances with more clients than this.
    #[arg(long, default_value_t = DEFAULT_MAX_CLIENTS)]
    max_clients: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchCrossoverArgs {
    /// Client counts, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "30,51,99")]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 20)]
    seeds: usize,
    /// Success threshold as a multiple of the reference weight.
    #[arg(long, default_value_t = 1.05)]
    reference_quality: f64,
    /// Annealing restarts used to compute the reference weight.
    #[arg(long, default_value_t = 4)]
    reference_restarts: usize,
    /// Iteration budget per run; runs that exhaust it are censored.
    #[arg(long, default_value_t = 1000)]
    budget: usize,
    #[arg(long, default_value_t = 5)]
    capacity: usize,
    /// Also write one row per run to this CSV file.
    #[arg(long)]
    cells: Option<PathBuf>,
    #[command(flatten)]
    search: SearchArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchMutationArgs {
    /// Mutation probabilities, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0.01,0.15,0.5,0.9")]
    values: Vec<f64>,
    #[arg(long, default_value_t = 20)]
    seeds: usize,
    /// Client count of the random instance.
    #[arg(long, default_value_t = 100)]
    clients: usize,
    #[arg(long, default_value_t = 5)]
    capacity: usize,
    #[arg(long, default_value_t = 0)]
    instance_seed: u64,
    #[command(flatten)]
    search: SearchArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TspPrdArgs {
    /// Directory of TSPLIB `.tsp` files.
    #[arg(long)]
    instances: PathBuf,
    /// Optima file [default: bundled TSPLIB optima].
    #[arg(long)]
    optima: Option<PathBuf>,
    /// Seconds per instance.
    #[arg(long, default_value_t = 60.0)]
    budget: f64,
    #[arg(long, default_value_t = 4)]
    islands: usize,
    #[arg(long)]
    workers: Option<usize>,
    #[command(flatten)]
    search: SearchArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SpeedupArgs {
    #[arg(long, default_value_t = 4)]
    g_max: usize,
    #[command(flatten)]
    instance: InstanceArgs,
    /// Truck capacity [default: all clients].
    #[arg(long)]
    capacity: Option<usize>,
    #[arg(long, default_value_t = 3)]
    repeats: usize,
    #[command(flatten)]
    search: SearchArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SpeedupCurveArgs {
    #[arg(long, default_value_t = 64)]
    g_max: usize,
    /// Migration frequency.
    #[arg(long, default_value_t = cost_model::DEFAULT_FREQUENCY)]
    f: f64,
    #[arg(long, default_value_t = cost_model::DEFAULT_LOG_BASE)]
    log_base: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    /// Vertices including the base.
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Coordinates are drawn from [0, bound].
    #[arg(long, default_value_t = DEFAULT_COORD_BOUND)]
    bound: i64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Where output goes: a file (relative paths honour the env var) or stdout.
fn open_out(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    match out {
        None => Ok(Box::new(io::stdout().lock())),
        Some(p) => {
            let path = resolve_out(p);
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            }
            let f = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
            Ok(Box::new(io::BufWriter::new(f)))
        }
    }
}

fn resolve_out(p: &Path) -> PathBuf {
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if p.is_relative() => Path::new(&dir).join(p),
        _ => p.to_path_buf(),
    }
}

fn write_json<T: Serialize>(out: &Option<PathBuf>, value: &T) -> Result<()> {
    let mut w = open_out(out)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn write_csv<T: Serialize>(out: &Option<PathBuf>, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(open_out(out)?);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn load_optima(path: &Option<PathBuf>) -> Result<Optima> {
    match path {
        Some(p) => Optima::load(p),
        None => Ok(Optima::bundled()),
    }
}

fn command_echo() -> Vec<String> {
    std::env::args().collect()
}

fn solve(args: SolveArgs) -> Result<()> {
    let inst = args.instance.load()?;
    let optimum = match args.optimum {
        Some(o) => Some(o),
        None => load_optima(&args.optima)?.get(inst.name()),
    };
    let record = if args.exact {
        if args.capacity.is_some_and(|c| c != 2) {
            bail!("--exact solves capacity 2 only");
        }
        let start = Instant::now();
        let (cover, weight) = solve_capacity2(&inst)?;
        record_from_cover(command_echo(), &inst, &cover, weight, start.elapsed().as_secs_f64())
    } else {
        let capacity = args.capacity.unwrap_or(inst.num_clients());
        let mut cfg = IslandConfig::new(args.islands, args.search.params()?);
        cfg.workers = args.workers;
        cfg.time_limit = args.time_limit.map(Duration::from_secs_f64);
        cfg.target_weight = args.target;
        let report = run_island_model(&inst, capacity, &cfg)?;
        if let Some(path) = &args.history {
            write_history(path, &report.per_island_history)?;
        }
        record_from_report(command_echo(), &inst, &report)
    };
    let record = record.with_optimum(optimum)?;
    for w in &record.warnings {
        eprintln!("warning: {w}");
    }
    write_json(&args.out, &record)
}

#[derive(Serialize)]
struct HistoryRow {
    island: usize,
    iteration: usize,
    best_weight: u64,
}

fn write_history(path: &Path, history: &[Vec<u64>]) -> Result<()> {
    let rows: Vec<HistoryRow> = history
        .iter()
        .enumerate()
        .flat_map(|(island, h)| {
            h.iter().enumerate().map(move |(t, &w)| HistoryRow {
                island,
                iteration: t + 1,
                best_weight: w,
            })
        })
        .collect();
    write_csv(&Some(path.to_path_buf()), &rows)
}

#[derive(Serialize)]
struct CoverOutput {
    instance: String,
    weight: u64,
    cycles: Vec<Vec<usize>>,
}

fn exact2(args: Exact2Args) -> Result<()> {
    let inst = args.instance.load()?;
    let (cover, weight) = solve_capacity2(&inst)?;
    write_json(
        &args.out,
        &CoverOutput {
            instance: inst.name().to_string(),
            weight,
            cycles: cover.cycles,
        },
    )
}

#[derive(Serialize)]
struct OracleOutput {
    instance: String,
    capacity: usize,
    weight: u64,
    permutation: Vec<usize>,
    trips: Vec<Vec<usize>>,
}

fn oracle(args: OracleArgs) -> Result<()> {
    let inst = args.instance.load()?;
    let (plan, weight) = brute_force_best_route(&inst, args.capacity, args.max_clients)?;
    write_json(
        &args.out,
        &OracleOutput {
            instance: inst.name().to_string(),
            capacity: args.capacity,
            weight,
            trips: plan.blocks().map(<[usize]>::to_vec).collect(),
            permutation: plan.into_perm(),
        },
    )
}

/// Marker written for a censored median.
const CENSORED: &str = "censored";

#[derive(Serialize)]
struct CrossoverTableRow {
    n: usize,
    #[serde(rename = "OX")]
    ox: String,
    #[serde(rename = "PMX")]
    pmx: String,
    #[serde(rename = "CX")]
    cx: String,
}

#[derive(Serialize)]
struct CrossoverCellRow {
    n: usize,
    seed_index: usize,
    instance: String,
    reference_weight: u64,
    threshold: u64,
    crossover: String,
    iterations: String,
    best_weight: u64,
}

fn bench_crossover(args: BenchCrossoverArgs) -> Result<()> {
    let cfg = CrossoverBenchConfig {
        sizes: args.sizes,
        seeds: args.seeds,
        base_seed: args.search.seed,
        capacity: args.capacity,
        reference_quality: args.reference_quality,
        reference_restarts: args.reference_restarts,
        budget: args.budget,
        params: args.search.params()?,
    };
    let cells = run_crossover_bench(&cfg)?;
    let fmt = |m: Option<f64>| m.map_or_else(|| CENSORED.to_string(), |v| v.to_string());
    let table: Vec<CrossoverTableRow> = summarize_crossover(&cells)
        .into_iter()
        .map(|s| CrossoverTableRow {
            n: s.clients,
            ox: fmt(s.median_of(CrossoverKind::Ox)),
            pmx: fmt(s.median_of(CrossoverKind::Pmx)),
            cx: fmt(s.median_of(CrossoverKind::Cx)),
        })
        .collect();
    if let Some(path) = &args.cells {
        let rows: Vec<CrossoverCellRow> = cells
            .into_iter()
            .map(|c| CrossoverCellRow {
                n: c.clients,
                seed_index: c.seed_index,
                instance: c.instance,
                reference_weight: c.reference_weight,
                threshold: c.threshold,
                crossover: c.crossover.to_string(),
                iterations: c.iterations.map_or_else(|| CENSORED.to_string(), |i| i.to_string()),
                best_weight: c.best_weight,
            })
            .collect();
        write_csv(&Some(path.clone()), &rows)?;
    }
    write_csv(&args.out, &table)
}

fn bench_mutation(args: BenchMutationArgs) -> Result<()> {
    let cfg = MutationBenchConfig {
        values: args.values,
        seeds: args.seeds,
        base_seed: args.search.seed,
        clients: args.clients,
        capacity: args.capacity,
        instance_seed: args.instance_seed,
        params: args.search.params()?,
    };
    let rows = run_mutation_bench(&cfg)?;
    for (p, w) in final_medians(&rows) {
        eprintln!("pr_mut {p}: final median weight {w}");
    }
    write_csv(&args.out, &rows)
}

#[derive(Serialize)]
struct PrdRow {
    instance: String,
    dimension: usize,
    optimum: Option<u64>,
    weight: u64,
    prd: Option<String>,
    iterations: usize,
    wall_time_secs: f64,
}

fn tsp_prd(args: TspPrdArgs) -> Result<()> {
    let optima = load_optima(&args.optima)?;
    let cfg = TspPrdConfig {
        islands: args.islands,
        params: MemeticParams {
            iterations: usize::MAX,
            ..args.search.params()?
        },
        budget_secs: args.budget,
        workers: args.workers,
    };
    let (rows, warnings) = run_tsp_prd(&args.instances, &optima, &cfg)?;
    for w in warnings {
        eprintln!("warning: {w}");
    }
    let rows: Vec<PrdRow> = rows
        .into_iter()
        .map(|r| PrdRow {
            instance: r.instance,
            dimension: r.dimension,
            optimum: r.optimum,
            weight: r.weight,
            prd: r.prd.map(format_prd),
            iterations: r.iterations,
            wall_time_secs: r.wall_time_secs,
        })
        .collect();
    write_csv(&args.out, &rows)
}

fn speedup(args: SpeedupArgs) -> Result<()> {
    let inst = args.instance.load()?;
    let capacity = args.capacity.unwrap_or(inst.num_clients());
    let cfg = SpeedupConfig {
        g_max: args.g_max,
        iterations: args.search.iterations,
        repeats: args.repeats,
        params: args.search.params()?,
    };
    let rows = measure_speedup(&inst, capacity, &cfg)?;
    if let Some(r) = rows.first() {
        if r.available_parallelism < args.g_max {
            eprintln!(
                "note: {} hardware threads available for up to {} islands",
                r.available_parallelism, args.g_max
            );
        }
    }
    write_csv(&args.out, &rows)
}

fn speedup_curve(args: SpeedupCurveArgs) -> Result<()> {
    if args.g_max < 1 {
        bail!("--g-max must be at least 1");
    }
    let rows: Vec<cost_model::SpeedupRow> = (1..=args.g_max)
        .map(|g| {
            Ok(cost_model::SpeedupRow {
                g,
                s_theoretical: cost_model::speedup_with_base(g, args.f, args.log_base)?,
            })
        })
        .collect::<Result<_>>()?;
    write_csv(&args.out, &rows)
}

fn gen(args: GenArgs) -> Result<()> {
    if args.n < 2 {
        bail!("--n must be at least 2");
    }
    if args.bound < 1 {
        bail!("--bound must be positive");
    }
    let points = random_points(args.n, args.seed, args.bound);
    let name = random_instance_name(args.n, args.seed);
    let comment = format!("uniform random points in [0, {}]^2, seed {}", args.bound, args.seed);
    let mut w = open_out(&args.out)?;
    w.write_all(write_euc_2d(&name, &comment, &points).as_bytes())?;
    w.flush()?;
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Solve(a) => solve(a),
        Command::Exact2(a) => exact2(a),
        Command::Oracle(a) => oracle(a),
        Command::BenchCrossover(a) => bench_crossover(a),
        Command::BenchMutation(a) => bench_mutation(a),
        Command::TspPrd(a) => tsp_prd(a),
        Command::Speedup(a) => speedup(a),
        Command::SpeedupCurve(a) => speedup_curve(a),
        Command::Gen(a) => gen(a),
    }
}
