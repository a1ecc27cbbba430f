//! `cpsim`: generation, simulation, estimation and experiment pipelines
//! for the contact process on random d-regular graphs.
//!
//! Exit codes: 0 ok, 2 usage/config, 3 I/O, 4 capacity.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use contact_core::contact::run_until;
use contact_core::graph::{sample_matching, sample_simple, Multigraph, Topology};
use contact_core::rng::replica_rng;
use contact_core::stats::MeanVar;
use contact_core::tree::{run_tree, TreeMode};

use contact_sim::config::Config;
use contact_sim::error::{Result, SimError};
use contact_sim::experiments::{
    calibrate, cutoff_experiment, density_experiment, estimate_pipeline, good_pair_census,
    intersection_experiment,
};
use contact_sim::io::{read_graph_file, write_graph_file, SeriesCsv, TreeSeriesCsv};
use contact_sim::manifest::{read_manifest, ManifestBuilder};
use contact_sim::runner;

#[derive(Parser)]
#[command(name = "cpsim", version, about = "Contact process on random regular graphs")]
struct Cli {
    /// Master seed for all replica streams.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory (created if missing).
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// Configuration file (TOML); flags override file values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Also write gnuplot-ready .dat files.
    #[arg(long, global = true)]
    plot: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a random d-regular (multi)graph and write it to a file.
    Gen(GenArgs),
    /// Contact process replicas on a finite graph (time series + hits).
    Simulate(SimulateArgs),
    /// Contact process replicas on the infinite d-regular tree.
    Tree(TreeArgs),
    /// Estimate the tree growth rate and survival probability.
    Estimate(EstimateArgs),
    /// Cutoff hitting-time experiment over a list of graph sizes.
    Cutoff(CutoffArgs),
    /// Infection density at t_plus from full occupancy.
    Density(DensityArgs),
    /// Two independent processes: intersection probability experiment.
    Intersect(IntersectArgs),
    /// Good-pair / good-vertex census on one fixed graph.
    Census(CensusArgs),
    /// Re-run a command from a manifest (bit-identical outputs).
    Replay(ReplayArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    /// Condition on the graph being simple (rejection sampling).
    #[arg(long)]
    simple: bool,
    /// Output file name inside the out dir.
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Default)]
struct SimulateArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    /// Fixed graph file; otherwise a fresh simple graph per replica.
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    replicas: Option<u64>,
    /// Initially infected vertices (comma-separated).
    #[arg(long, value_delimiter = ',')]
    init: Option<Vec<u32>>,
    /// Target vertices; each replica stops at its first hit.
    #[arg(long, value_delimiter = ',')]
    targets: Option<Vec<u32>>,
}

#[derive(Args, Default)]
struct TreeArgs {
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    replicas: Option<u64>,
    #[arg(long)]
    horizon: Option<f64>,
    /// Sever all but one root edge.
    #[arg(long)]
    severed: bool,
}

#[derive(Args, Default)]
struct EstimateArgs {
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    replicas: Option<u64>,
    #[arg(long)]
    horizon: Option<f64>,
    /// Fit window, two values: lo hi.
    #[arg(long, num_args = 2)]
    window: Option<Vec<f64>>,
    #[arg(long)]
    survival_replicas: Option<u64>,
    #[arg(long)]
    survival_threshold: Option<usize>,
    #[arg(long)]
    severed: bool,
}

#[derive(Args, Default)]
struct CutoffArgs {
    #[arg(long, value_delimiter = ',')]
    n_list: Option<Vec<usize>>,
    #[arg(long)]
    replicas: Option<u64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    c_hat: Option<f64>,
    #[arg(long)]
    p_hat: Option<f64>,
    /// Fix one graph per n instead of resampling per replica.
    #[arg(long)]
    quenched: bool,
}

#[derive(Args, Default)]
struct DensityArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    replicas: Option<u64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    c_hat: Option<f64>,
    #[arg(long)]
    p_hat: Option<f64>,
}

#[derive(Args, Default)]
struct IntersectArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    replicas: Option<u64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    c_hat: Option<f64>,
    #[arg(long)]
    p_hat: Option<f64>,
}

#[derive(Args, Default)]
struct CensusArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    replicas_per_source: Option<u64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    c_hat: Option<f64>,
    #[arg(long)]
    p_hat: Option<f64>,
}

#[derive(Args)]
struct ReplayArgs {
    /// Path to a manifest.json written by a previous run.
    manifest: PathBuf,
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}

/// Wraps every report with the resolved config and seed.
#[derive(Serialize)]
struct ReportEnvelope<'a, T: Serialize> {
    command: &'a str,
    master_seed: u64,
    config: &'a Config,
    report: T,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| SimError::Config(format!("serialization: {e}")))?;
    std::fs::write(path, text + "\n").map_err(|e| SimError::io(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).map_err(|e| SimError::io(path, e))?,
    ))
}

fn load_config(cli: &Cli) -> Result<Config> {
    let mut cfg = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.master_seed = seed;
    }
    if let Some(threads) = cli.threads {
        cfg.threads = threads;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    std::fs::create_dir_all(&cli.out_dir).map_err(|e| SimError::io(&cli.out_dir, e))?;
    let cfg = load_config(&cli)?;
    match &cli.command {
        Command::Gen(args) => dispatch(&cli, resolve_gen(cfg, args), "gen"),
        Command::Simulate(args) => dispatch(&cli, resolve_simulate(cfg, args), "simulate"),
        Command::Tree(args) => dispatch(&cli, resolve_tree(cfg, args), "tree"),
        Command::Estimate(args) => dispatch(&cli, resolve_estimate(cfg, args), "estimate"),
        Command::Cutoff(args) => dispatch(&cli, resolve_cutoff(cfg, args), "cutoff"),
        Command::Density(args) => dispatch(&cli, resolve_density(cfg, args), "density"),
        Command::Intersect(args) => dispatch(&cli, resolve_intersect(cfg, args), "intersect"),
        Command::Census(args) => dispatch(&cli, resolve_census(cfg, args), "census"),
        Command::Replay(args) => {
            let manifest = read_manifest(&args.manifest)?;
            let command = manifest.command.clone();
            dispatch(&cli, manifest.config, &command)
        }
    }
}

/// Runs one named command against a fully resolved config.
fn dispatch(cli: &Cli, cfg: Config, command: &str) -> Result<()> {
    cfg.validate()?;
    match command {
        "gen" => cmd_gen(cli, cfg),
        "simulate" => cmd_simulate(cli, cfg),
        "tree" => cmd_tree(cli, cfg),
        "estimate" => cmd_estimate(cli, cfg),
        "cutoff" => cmd_cutoff(cli, cfg),
        "density" => cmd_density(cli, cfg),
        "intersect" => cmd_intersect(cli, cfg),
        "census" => cmd_census(cli, cfg),
        other => Err(SimError::Config(format!(
            "unknown command in manifest: {other}"
        ))),
    }
}

fn resolve_gen(mut cfg: Config, a: &GenArgs) -> Config {
    if let Some(n) = a.n {
        cfg.gen.n = n;
    }
    if let Some(d) = a.d {
        cfg.d = d;
    }
    if a.simple {
        cfg.gen.simple = true;
    }
    if let Some(out) = &a.out {
        cfg.gen.out = out.clone();
    }
    cfg
}

fn resolve_simulate(mut cfg: Config, a: &SimulateArgs) -> Config {
    if let Some(n) = a.n {
        cfg.simulate.n = n;
    }
    if let Some(d) = a.d {
        cfg.d = d;
    }
    if let Some(l) = a.lambda {
        cfg.lambda = l;
    }
    if a.graph.is_some() {
        cfg.simulate.graph = a.graph.clone();
    }
    if let Some(h) = a.horizon {
        cfg.simulate.horizon = h;
    }
    if let Some(r) = a.replicas {
        cfg.simulate.replicas = r;
    }
    if let Some(init) = &a.init {
        cfg.simulate.init = init.clone();
    }
    if let Some(t) = &a.targets {
        cfg.simulate.targets = t.clone();
    }
    cfg
}

fn resolve_tree(mut cfg: Config, a: &TreeArgs) -> Config {
    if let Some(d) = a.d {
        cfg.d = d;
    }
    if let Some(l) = a.lambda {
        cfg.lambda = l;
    }
    if let Some(r) = a.replicas {
        cfg.tree.replicas = r;
    }
    if let Some(h) = a.horizon {
        cfg.tree.horizon = h;
    }
    if a.severed {
        cfg.tree.severed = true;
    }
    cfg
}

fn resolve_estimate(mut cfg: Config, a: &EstimateArgs) -> Config {
    if let Some(d) = a.d {
        cfg.d = d;
    }
    if let Some(l) = a.lambda {
        cfg.lambda = l;
    }
    if let Some(r) = a.replicas {
        cfg.estimate.replicas = r;
    }
    if let Some(h) = a.horizon {
        cfg.estimate.horizon = h;
    }
    if let Some(w) = &a.window {
        cfg.estimate.window = [w[0], w[1]];
    }
    if let Some(r) = a.survival_replicas {
        cfg.estimate.survival_replicas = r;
    }
    if let Some(m) = a.survival_threshold {
        cfg.estimate.survival_threshold = m;
    }
    if a.severed {
        cfg.estimate.severed = true;
    }
    cfg
}

fn resolve_cutoff(mut cfg: Config, a: &CutoffArgs) -> Config {
    if let Some(ns) = &a.n_list {
        cfg.cutoff.n_list = ns.clone();
    }
    if let Some(r) = a.replicas {
        cfg.cutoff.replicas = r;
    }
    if let Some(l) = a.lambda {
        cfg.lambda = l;
    }
    if let Some(e) = a.epsilon {
        cfg.epsilon = e;
    }
    if a.c_hat.is_some() {
        cfg.c_hat = a.c_hat;
    }
    if a.p_hat.is_some() {
        cfg.p_hat = a.p_hat;
    }
    if a.quenched {
        cfg.cutoff.quenched = true;
    }
    cfg
}

fn resolve_density(mut cfg: Config, a: &DensityArgs) -> Config {
    if let Some(n) = a.n {
        cfg.density.n = n;
    }
    if let Some(r) = a.replicas {
        cfg.density.replicas = r;
    }
    if let Some(l) = a.lambda {
        cfg.lambda = l;
    }
    if let Some(dl) = a.delta {
        cfg.density.delta = dl;
    }
    if a.c_hat.is_some() {
        cfg.c_hat = a.c_hat;
    }
    if a.p_hat.is_some() {
        cfg.p_hat = a.p_hat;
    }
    cfg
}

fn resolve_intersect(mut cfg: Config, a: &IntersectArgs) -> Config {
    if let Some(n) = a.n {
        cfg.intersect.n = n;
    }
    if let Some(r) = a.replicas {
        cfg.intersect.replicas = r;
    }
    if let Some(l) = a.lambda {
        cfg.lambda = l;
    }
    if a.c_hat.is_some() {
        cfg.c_hat = a.c_hat;
    }
    if a.p_hat.is_some() {
        cfg.p_hat = a.p_hat;
    }
    cfg
}

fn resolve_census(mut cfg: Config, a: &CensusArgs) -> Config {
    if let Some(n) = a.n {
        cfg.census.n = n;
    }
    if let Some(r) = a.replicas_per_source {
        cfg.census.replicas_per_source = r;
    }
    if let Some(l) = a.lambda {
        cfg.lambda = l;
    }
    if a.c_hat.is_some() {
        cfg.c_hat = a.c_hat;
    }
    if a.p_hat.is_some() {
        cfg.p_hat = a.p_hat;
    }
    cfg
}

fn cmd_gen(cli: &Cli, cfg: Config) -> Result<()> {
    let (n, d) = (cfg.gen.n, cfg.d);
    if n * d % 2 != 0 {
        return Err(SimError::Config(format!(
            "n*d must be even (n = {n}, d = {d})"
        )));
    }
    let mut manifest = ManifestBuilder::new("gen", &cfg);
    let mut rng = replica_rng(cfg.master_seed, "gen", 0);
    let path = cli.out_dir.join(&cfg.gen.out);
    let attempts;
    if cfg.gen.simple {
        let (g, tries) = sample_simple(n, d, &mut rng, 1000)?;
        attempts = tries;
        write_graph_file(&g, &path)?;
    } else {
        let g = sample_matching(n, d, &mut rng)?;
        attempts = 1;
        write_multigraph_file(&g, &path)?;
    }
    manifest.output(&cfg.gen.out);
    let report_path = cli.out_dir.join("gen_report.json");
    write_json(
        &report_path,
        &ReportEnvelope {
            command: "gen",
            master_seed: cfg.master_seed,
            config: &cfg,
            report: serde_json::json!({
                "n": n,
                "d": d,
                "simple": cfg.gen.simple,
                "attempts": attempts,
                "file": cfg.gen.out,
            }),
        },
    )?;
    manifest.output("gen_report.json");
    manifest.write(&cli.out_dir)?;
    Ok(())
}

/// Multigraph variant of the graph file: same format, neighbor ids with
/// multiplicity (a self-loop is listed twice).
fn write_multigraph_file(g: &Multigraph, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    let (n, d) = (g.n(), g.degree());
    writeln!(w, "{n} {d}").map_err(|e| SimError::io(path, e))?;
    for v in 0..n as u32 {
        let mut row: Vec<u32> = (0..d as u32).map(|s| g.neighbor(v, s)).collect();
        row.sort_unstable();
        let row: Vec<String> = row.iter().map(u32::to_string).collect();
        writeln!(w, "{}", row.join(" ")).map_err(|e| SimError::io(path, e))?;
    }
    w.flush().map_err(|e| SimError::io(path, e))
}

fn cmd_simulate(cli: &Cli, cfg: Config) -> Result<()> {
    let mut manifest = ManifestBuilder::new("simulate", &cfg);
    let pool = runner::pool(cfg.threads);
    let sim = &cfg.simulate;
    let fixed = match &sim.graph {
        Some(path) => Some(read_graph_file(path)?),
        None => None,
    };
    let n = fixed.as_ref().map(|g| g.n()).unwrap_or(sim.n);
    for &v in sim.init.iter().chain(&sim.targets) {
        if v as usize >= n {
            return Err(SimError::Config(format!(
                "vertex {v} out of range (n = {n})"
            )));
        }
    }
    let targets = (!sim.targets.is_empty()).then_some(sim.targets.as_slice());
    let results = runner::run_replicas(
        &pool,
        cfg.master_seed,
        "simulate",
        sim.replicas,
        |_, rng| -> Result<_> {
            let out = match &fixed {
                Some(g) => run_until(g, cfg.lambda, &sim.init, sim.horizon, targets, Some(cfg.grid), rng),
                None => {
                    let (g, _) = sample_simple(n, cfg.d, rng, 1000)?;
                    run_until(&g, cfg.lambda, &sim.init, sim.horizon, targets, Some(cfg.grid), rng)
                }
            };
            Ok((out.hit, out.series))
        },
    );
    let series_path = cli.out_dir.join("series.csv");
    let mut series =
        SeriesCsv::new(create(&series_path)?).map_err(|e| SimError::io(&series_path, e))?;
    let hits_path = cli.out_dir.join("hits.jsonl");
    let mut hits = create(&hits_path)?;
    for (rep, out) in results.into_iter().enumerate() {
        let (hit, points) = out?;
        for p in &points {
            series
                .row(rep as u64, p)
                .map_err(|e| SimError::io(&series_path, e))?;
        }
        contact_sim::io::hit_jsonl(&mut hits, rep as u64, &hit)
            .map_err(|e| SimError::io(&hits_path, e))?;
    }
    hits.flush().map_err(|e| SimError::io(&hits_path, e))?;
    manifest.output("series.csv");
    manifest.output("hits.jsonl");
    manifest.write(&cli.out_dir)?;
    Ok(())
}

#[derive(Serialize)]
struct TreeReport {
    replicas: u64,
    horizon: f64,
    severed: bool,
    survived_frac: f64,
    mean_extinction_time: Option<f64>,
    extinction_time_se: Option<f64>,
    mean_final_infected: f64,
    mean_final_ever: f64,
    capacity_truncated: u64,
}

fn cmd_tree(cli: &Cli, cfg: Config) -> Result<()> {
    let mut manifest = ManifestBuilder::new("tree", &cfg);
    let pool = runner::pool(cfg.threads);
    let mode = if cfg.tree.severed {
        TreeMode::Severed
    } else {
        TreeMode::Full
    };
    let results = runner::run_replicas(&pool, cfg.master_seed, "tree", cfg.tree.replicas, |_, rng| {
        run_tree(cfg.d, cfg.lambda, cfg.tree.horizon, mode, cfg.node_cap, cfg.grid, rng)
    });
    let series_path = cli.out_dir.join("tree_series.csv");
    let mut series =
        TreeSeriesCsv::new(create(&series_path)?).map_err(|e| SimError::io(&series_path, e))?;
    let mut extinction = MeanVar::default();
    let mut final_infected = MeanVar::default();
    let mut final_ever = MeanVar::default();
    let mut survived = 0u64;
    let mut truncated = 0u64;
    let mut mean_series: Vec<MeanVar> = Vec::new();
    for (rep, run) in results.iter().enumerate() {
        for p in &run.series {
            series
                .row(rep as u64, p)
                .map_err(|e| SimError::io(&series_path, e))?;
        }
        if mean_series.len() < run.series.len() {
            mean_series.resize(run.series.len(), MeanVar::default());
        }
        for (acc, p) in mean_series.iter_mut().zip(&run.series) {
            acc.push(p.infected as f64);
        }
        match run.extinction_time {
            Some(t) => extinction.push(t),
            None => survived += 1,
        }
        final_infected.push(run.final_infected as f64);
        final_ever.push(run.final_ever as f64);
        truncated += run.capacity_reached_at.is_some() as u64;
    }
    manifest.output("tree_series.csv");
    let report = TreeReport {
        replicas: cfg.tree.replicas,
        horizon: cfg.tree.horizon,
        severed: cfg.tree.severed,
        survived_frac: survived as f64 / cfg.tree.replicas as f64,
        mean_extinction_time: (extinction.count() > 0).then(|| extinction.mean()),
        extinction_time_se: (extinction.count() > 0).then(|| extinction.se()),
        mean_final_infected: final_infected.mean(),
        mean_final_ever: final_ever.mean(),
        capacity_truncated: truncated,
    };
    let report_path = cli.out_dir.join("tree_report.json");
    write_json(
        &report_path,
        &ReportEnvelope {
            command: "tree",
            master_seed: cfg.master_seed,
            config: &cfg,
            report: &report,
        },
    )?;
    manifest.output("tree_report.json");
    if cli.plot {
        let dat_path = cli.out_dir.join("tree_mean.dat");
        let mut dat = create(&dat_path)?;
        writeln!(dat, "# t mean_infected").map_err(|e| SimError::io(&dat_path, e))?;
        for (i, acc) in mean_series.iter().enumerate() {
            writeln!(dat, "{} {}", i as f64 * cfg.grid, acc.mean())
                .map_err(|e| SimError::io(&dat_path, e))?;
        }
        dat.flush().map_err(|e| SimError::io(&dat_path, e))?;
        manifest.output("tree_mean.dat");
    }
    manifest.write(&cli.out_dir)?;
    if truncated > 0 {
        return Err(SimError::Capacity(format!(
            "{truncated} replicas hit the arena cap; partial series flagged in tree_report.json"
        )));
    }
    Ok(())
}

fn cmd_estimate(cli: &Cli, cfg: Config) -> Result<()> {
    let mut manifest = ManifestBuilder::new("estimate", &cfg);
    let pool = runner::pool(cfg.threads);
    let est = estimate_pipeline(&pool, &cfg)?;
    let path = cli.out_dir.join("estimates.json");
    write_json(&path, &est)?;
    manifest.output("estimates.json");
    if !cfg.estimate.lambda_grid.is_empty() {
        // Survival transition across infection rates: reported only —
        // the sign change brackets the critical rate, nothing is
        // asserted against it.
        let mut rows = Vec::new();
        for &lambda in &cfg.estimate.lambda_grid {
            let mut grid_cfg = cfg.clone();
            grid_cfg.lambda = lambda;
            let (p_hat, p_se) =
                contact_sim::experiments::parallel_survival(&pool, &grid_cfg, cfg.estimate.survival_replicas)?;
            rows.push(serde_json::json!({
                "lambda": lambda,
                "p_hat": p_hat,
                "p_se": p_se,
            }));
        }
        let grid_path = cli.out_dir.join("survival_grid.json");
        write_json(
            &grid_path,
            &ReportEnvelope {
                command: "estimate",
                master_seed: cfg.master_seed,
                config: &cfg,
                report: rows,
            },
        )?;
        manifest.output("survival_grid.json");
    }
    if !cfg.estimate.tail_times.is_empty() && cfg.estimate.tail_replicas > 0 {
        let pts = contact_core::estimate::tail_check(
            cfg.d,
            cfg.lambda,
            est.c_hat,
            cfg.estimate.tail_delta,
            &cfg.estimate.tail_times,
            cfg.estimate.tail_replicas,
            cfg.node_cap,
            cfg.master_seed,
        )?;
        let tail: Vec<_> = pts
            .iter()
            .map(|p| {
                serde_json::json!({
                    "t": p.t,
                    "threshold": p.threshold,
                    "exceedances": p.exceedances,
                    "frequency": p.frequency,
                    "se": p.se,
                })
            })
            .collect();
        let tail_path = cli.out_dir.join("tail_check.json");
        write_json(
            &tail_path,
            &ReportEnvelope {
                command: "estimate",
                master_seed: cfg.master_seed,
                config: &cfg,
                report: tail,
            },
        )?;
        manifest.output("tail_check.json");
    }
    manifest.write(&cli.out_dir)?;
    Ok(())
}

fn cmd_cutoff(cli: &Cli, cfg: Config) -> Result<()> {
    let mut manifest = ManifestBuilder::new("cutoff", &cfg);
    let pool = runner::pool(cfg.threads);
    let cal = calibrate(&pool, &cfg)?;
    let (report, rows) = cutoff_experiment(&pool, &cfg, &cal, false)?;
    let json_path = cli.out_dir.join("cutoff_report.json");
    write_json(
        &json_path,
        &ReportEnvelope {
            command: "cutoff",
            master_seed: cfg.master_seed,
            config: &cfg,
            report: &report,
        },
    )?;
    manifest.output("cutoff_report.json");
    let csv_path = cli.out_dir.join("cutoff_replicas.csv");
    let mut csv = create(&csv_path)?;
    writeln!(
        csv,
        "n,replica,source,target,hit_time,occupied_at_t_plus,survived_to_t_plus"
    )
    .map_err(|e| SimError::io(&csv_path, e))?;
    for r in &rows {
        writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            r.n,
            r.replica,
            r.source,
            r.target,
            r.hit_time.map(|t| t.to_string()).unwrap_or_default(),
            r.occupied_at_t_plus,
            r.survived_to_t_plus
        )
        .map_err(|e| SimError::io(&csv_path, e))?;
    }
    csv.flush().map_err(|e| SimError::io(&csv_path, e))?;
    manifest.output("cutoff_replicas.csv");
    // Summary CSV: one row per n.
    let points_path = cli.out_dir.join("cutoff_points.csv");
    let mut pts = create(&points_path)?;
    writeln!(
        pts,
        "n,t_minus,t_plus,replicas,hit_by_t_minus,occupied_at_t_plus,survived_frac,hit_time_q25,hit_time_q50,hit_time_q75,normalized_iqr"
    )
    .map_err(|e| SimError::io(&points_path, e))?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for p in &report.points {
        writeln!(
            pts,
            "{},{},{},{},{},{},{},{},{},{},{}",
            p.n,
            p.t_minus,
            p.t_plus,
            p.replicas,
            p.hit_by_t_minus,
            p.occupied_at_t_plus,
            p.survived_frac,
            opt(p.hit_time_q25),
            opt(p.hit_time_q50),
            opt(p.hit_time_q75),
            opt(p.normalized_iqr)
        )
        .map_err(|e| SimError::io(&points_path, e))?;
    }
    pts.flush().map_err(|e| SimError::io(&points_path, e))?;
    manifest.output("cutoff_points.csv");
    if cli.plot {
        let dat_path = cli.out_dir.join("cutoff.dat");
        let mut dat = create(&dat_path)?;
        writeln!(
            dat,
            "# n t_minus t_plus hit_by_t_minus occupied_at_t_plus normalized_iqr"
        )
        .map_err(|e| SimError::io(&dat_path, e))?;
        for p in &report.points {
            writeln!(
                dat,
                "{} {} {} {} {} {}",
                p.n,
                p.t_minus,
                p.t_plus,
                p.hit_by_t_minus,
                p.occupied_at_t_plus,
                p.normalized_iqr.unwrap_or(f64::NAN)
            )
            .map_err(|e| SimError::io(&dat_path, e))?;
        }
        dat.flush().map_err(|e| SimError::io(&dat_path, e))?;
        manifest.output("cutoff.dat");
    }
    manifest.write(&cli.out_dir)?;
    Ok(())
}

fn cmd_density(cli: &Cli, cfg: Config) -> Result<()> {
    let mut manifest = ManifestBuilder::new("density", &cfg);
    let pool = runner::pool(cfg.threads);
    let cal = calibrate(&pool, &cfg)?;
    let (report, densities) = density_experiment(&pool, &cfg, &cal)?;
    let json_path = cli.out_dir.join("density_report.json");
    write_json(
        &json_path,
        &ReportEnvelope {
            command: "density",
            master_seed: cfg.master_seed,
            config: &cfg,
            report: &report,
        },
    )?;
    manifest.output("density_report.json");
    let csv_path = cli.out_dir.join("density_replicas.csv");
    let mut csv = create(&csv_path)?;
    writeln!(csv, "replica,density").map_err(|e| SimError::io(&csv_path, e))?;
    for (rep, rho) in densities.iter().enumerate() {
        writeln!(csv, "{rep},{rho}").map_err(|e| SimError::io(&csv_path, e))?;
    }
    csv.flush().map_err(|e| SimError::io(&csv_path, e))?;
    manifest.output("density_replicas.csv");
    manifest.write(&cli.out_dir)?;
    Ok(())
}

fn cmd_intersect(cli: &Cli, cfg: Config) -> Result<()> {
    let mut manifest = ManifestBuilder::new("intersect", &cfg);
    let pool = runner::pool(cfg.threads);
    let cal = calibrate(&pool, &cfg)?;
    let (report, rows) = intersection_experiment(&pool, &cfg, &cal)?;
    let json_path = cli.out_dir.join("intersect_report.json");
    write_json(
        &json_path,
        &ReportEnvelope {
            command: "intersect",
            master_seed: cfg.master_seed,
            config: &cfg,
            report: &report,
        },
    )?;
    manifest.output("intersect_report.json");
    let csv_path = cli.out_dir.join("intersect_replicas.csv");
    let mut csv = create(&csv_path)?;
    writeln!(
        csv,
        "replica,source_u,source_v,intersects,u_survived,v_survived,label_reused,label_overlap"
    )
    .map_err(|e| SimError::io(&csv_path, e))?;
    for r in &rows {
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{}",
            r.replica,
            r.source_u,
            r.source_v,
            r.intersects,
            r.u_survived,
            r.v_survived,
            r.label_reused,
            r.label_overlap
        )
        .map_err(|e| SimError::io(&csv_path, e))?;
    }
    csv.flush().map_err(|e| SimError::io(&csv_path, e))?;
    manifest.output("intersect_replicas.csv");
    manifest.write(&cli.out_dir)?;
    Ok(())
}

fn cmd_census(cli: &Cli, cfg: Config) -> Result<()> {
    let mut manifest = ManifestBuilder::new("census", &cfg);
    let pool = runner::pool(cfg.threads);
    let cal = calibrate(&pool, &cfg)?;
    let (report, pairs) = good_pair_census(&pool, &cfg, &cal)?;
    let json_path = cli.out_dir.join("census_report.json");
    write_json(
        &json_path,
        &ReportEnvelope {
            command: "census",
            master_seed: cfg.master_seed,
            config: &cfg,
            report: &report,
        },
    )?;
    manifest.output("census_report.json");
    let csv_path = cli.out_dir.join("census_pairs.csv");
    let mut csv = create(&csv_path)?;
    writeln!(csv, "source,target,hit_probability").map_err(|e| SimError::io(&csv_path, e))?;
    for (u, v, p) in &pairs {
        writeln!(csv, "{u},{v},{p}").map_err(|e| SimError::io(&csv_path, e))?;
    }
    csv.flush().map_err(|e| SimError::io(&csv_path, e))?;
    manifest.output("census_pairs.csv");
    manifest.write(&cli.out_dir)?;
    Ok(())
}
