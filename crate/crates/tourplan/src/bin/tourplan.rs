//! Command-line front end: solve instances, generate synthetic ones,
//! validate solution files, export GeoJSON, and run benchmark grids.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};

use tourplan::clustering::{self, ClusterParams};
use tourplan::instance::{
    generate_synthetic, load_instance_file, GenerateParams, Instance, InstanceFile,
};
use tourplan::report::{
    self, bench_markdown, compute_deviations, metrics_of, to_geojson, to_solution_file, BenchRecord,
};
use tourplan::{solve, SolveConfig};

#[derive(Parser)]
#[command(
    name = "tourplan",
    version,
    about = "Multi-day tourist itinerary planner with walking and driving"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan itineraries for an instance and write the solution as JSON.
    Solve(SolveArgs),
    /// Generate a synthetic instance file.
    Generate(GenerateArgs),
    /// Check a solution file against its instance from first principles.
    Validate(ValidateArgs),
    /// Convert a solution file to GeoJSON for map display.
    ExportGeojson(ExportArgs),
    /// Run a grid of solves and report comparative metrics.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OnOff {
    On,
    Off,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BenchClustering {
    Both,
    On,
    Off,
}

/// Radius filter in kilometres; `inf` (or `none`) disables the filter.
#[derive(Clone, Copy, Debug)]
struct Radius(Option<f64>);

fn parse_radius(s: &str) -> Result<Radius, String> {
    if s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("none") {
        return Ok(Radius(None));
    }
    let v: f64 = s.parse().map_err(|e| format!("bad radius {s:?}: {e}"))?;
    if v.is_finite() && v > 0.0 {
        Ok(Radius(Some(v)))
    } else if v.is_infinite() && v > 0.0 {
        Ok(Radius(None))
    } else {
        Err(format!("radius must be positive, got {s}"))
    }
}

#[derive(Args)]
struct SolveArgs {
    /// Instance file (JSON).
    #[arg(long, short = 'i')]
    instance: PathBuf,
    /// Override the number of daily itineraries in the instance.
    #[arg(long)]
    days: Option<usize>,
    /// Only consider PoIs within this distance of the start (km); `inf` keeps all.
    #[arg(long, value_parser = parse_radius)]
    radius_km: Option<Radius>,
    /// Restrict insertions so each day stays within walkable PoI clusters.
    #[arg(long, value_enum, default_value = "off")]
    clustering: OnOff,
    /// Wall-clock limit for the search, in seconds.
    #[arg(long, default_value_t = 60.0)]
    time_limit: f64,
    /// Stop after this many consecutive non-improving rounds.
    #[arg(long, default_value_t = 150)]
    max_iter: usize,
    /// Write the solution here instead of stdout.
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
    /// Also write a GeoJSON rendering of the solution.
    #[arg(long)]
    geojson: Option<PathBuf>,
    /// Also write aggregate time-use metrics (JSON).
    #[arg(long)]
    metrics: Option<PathBuf>,
    /// Also write a reproducibility manifest for this run (JSON).
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    /// Number of candidate PoIs.
    #[arg(long, default_value_t = 100)]
    pois: usize,
    /// Number of daily itineraries.
    #[arg(long, default_value_t = 1)]
    days: usize,
    /// RNG seed; same seed, same instance.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Daily time budget in minutes.
    #[arg(long, default_value_t = 720.0)]
    c_max: f64,
    /// Where to write the instance file.
    #[arg(long, short = 'o')]
    output: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    /// Instance file the solution claims to schedule (JSON).
    #[arg(long, short = 'i')]
    instance: PathBuf,
    /// Solution file to check (JSON).
    #[arg(long, short = 's')]
    solution: PathBuf,
    /// Override the number of days, matching the solve that produced the file.
    #[arg(long)]
    days: Option<usize>,
    /// Recheck cluster contiguity with this radius filter (km or `inf`).
    #[arg(long, value_parser = parse_radius)]
    radius_km: Option<Radius>,
    /// Recheck cluster contiguity (uses the same clustering as the solver).
    #[arg(long, value_enum, default_value = "off")]
    clustering: OnOff,
}

#[derive(Args)]
struct ExportArgs {
    /// Instance file the solution schedules (JSON).
    #[arg(long, short = 'i')]
    instance: PathBuf,
    /// Solution file to render (JSON).
    #[arg(long, short = 's')]
    solution: PathBuf,
    /// Override the number of days, matching the solve that produced the file.
    #[arg(long)]
    days: Option<usize>,
    /// Where to write the GeoJSON.
    #[arg(long, short = 'o')]
    output: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Instance files; the grid runs over every combination.
    #[arg(long, short = 'i', required = true, num_args = 1..)]
    instance: Vec<PathBuf>,
    /// Day counts to plan, comma separated (e.g. 1,2,3).
    #[arg(long, value_delimiter = ',', default_value = "1")]
    days: Vec<usize>,
    /// Radius filters in km, comma separated; `inf` disables (e.g. 10,20,50,inf).
    #[arg(long, value_delimiter = ',', value_parser = parse_radius, default_value = "inf")]
    radius_km: Vec<Radius>,
    /// Run with clustering on, off, or both.
    #[arg(long, value_enum, default_value = "both")]
    clustering: BenchClustering,
    #[arg(long, default_value_t = 60.0)]
    time_limit: f64,
    #[arg(long, default_value_t = 150)]
    max_iter: usize,
    /// Write the full results table as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write the results table as Markdown.
    #[arg(long)]
    markdown: Option<PathBuf>,
}

fn load_with_days(path: &Path, days: Option<usize>) -> anyhow::Result<Instance> {
    let mut file =
        load_instance_file(path).with_context(|| format!("loading instance {}", path.display()))?;
    if let Some(d) = days {
        file.days = d;
    }
    Ok(file.into_instance()?)
}

fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let json = serde_json::to_string_pretty(value)?;
    std::fs::write(path, json).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn cmd_solve(args: SolveArgs) -> anyhow::Result<()> {
    let inst = load_with_days(&args.instance, args.days)?;
    let radius_km = args.radius_km.and_then(|r| r.0);
    let clusters = (args.clustering == OnOff::On).then(|| {
        clustering::load_or_build(
            &inst,
            radius_km,
            &ClusterParams::for_instance(&inst),
            &args.instance,
        )
    });
    let cfg = SolveConfig {
        max_iter: args.max_iter,
        time_limit_secs: args.time_limit,
        radius_km,
        clusters,
    };
    let started = unix_now();
    let outcome = solve(&inst, &cfg);
    let file = to_solution_file(&inst, &outcome.solution);

    match &args.output {
        Some(path) => report::write_solution(path, &file)?,
        None => println!("{}", serde_json::to_string_pretty(&file)?),
    }
    if let Some(path) = &args.geojson {
        write_json(path, &to_geojson(&inst, &outcome.solution))?;
    }
    if let Some(path) = &args.metrics {
        write_json(path, &metrics_of(&inst, &outcome.solution))?;
    }
    if let Some(path) = &args.manifest {
        let manifest = report::manifest_for(&args.instance, &inst, &cfg, &outcome, started);
        write_json(path, &manifest)?;
    }
    eprintln!(
        "score {:.1}  violations {}  days {}  visits {}  iterations {}  elapsed {:.2}s",
        outcome.solution.total_score,
        outcome.solution.violations(),
        inst.days,
        metrics_of(&inst, &outcome.solution).pois_visited,
        outcome.iterations,
        outcome.elapsed_secs,
    );
    Ok(())
}

fn cmd_generate(args: GenerateArgs) -> anyhow::Result<()> {
    let params = GenerateParams {
        n_pois: args.pois,
        days: args.days,
        seed: args.seed,
        c_max: args.c_max,
        ..GenerateParams::default()
    };
    let file = generate_synthetic(&params);
    write_json(&args.output, &file)?;
    eprintln!(
        "wrote {} PoIs, {} days, seed {} to {}",
        args.pois,
        args.days,
        args.seed,
        args.output.display()
    );
    Ok(())
}

fn cmd_validate(args: ValidateArgs) -> anyhow::Result<()> {
    let inst = load_with_days(&args.instance, args.days)?;
    let file = report::read_solution(&args.solution)?;
    let clusters = (args.clustering == OnOff::On).then(|| {
        clustering::load_or_build(
            &inst,
            args.radius_km.and_then(|r| r.0),
            &ClusterParams::for_instance(&inst),
            &args.instance,
        )
    });
    let result = report::validate(&inst, &file, clusters.as_ref());
    if result.is_ok() {
        println!("OK: solution is feasible and consistent");
        Ok(())
    } else {
        for failure in &result.failures {
            println!("FAIL: {failure}");
        }
        std::process::exit(2);
    }
}

fn cmd_export(args: ExportArgs) -> anyhow::Result<()> {
    let inst = load_with_days(&args.instance, args.days)?;
    let file = report::read_solution(&args.solution)?;
    let sol = report::solution_from_file(&inst, &file)?;
    write_json(&args.output, &to_geojson(&inst, &sol))?;
    Ok(())
}

fn bench_cell(
    path: &Path,
    base: &InstanceFile,
    days: usize,
    radius_km: Option<f64>,
    use_clusters: bool,
    args: &BenchArgs,
) -> anyhow::Result<BenchRecord> {
    let mut file = base.clone();
    file.days = days;
    let inst = file.into_instance()?;
    let clusters = use_clusters.then(|| {
        clustering::load_or_build(&inst, radius_km, &ClusterParams::for_instance(&inst), path)
    });
    let cfg = SolveConfig {
        max_iter: args.max_iter,
        time_limit_secs: args.time_limit,
        radius_km,
        clusters,
    };
    let eligible = clustering::radius_filter(&inst, radius_km);
    let candidates = inst.candidates().filter(|&p| eligible[p]).count();
    let outcome = solve(&inst, &cfg);
    let m = metrics_of(&inst, &outcome.solution);
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    Ok(BenchRecord {
        instance: name,
        days,
        radius_km,
        clustering: use_clusters,
        candidates,
        score: outcome.solution.total_score,
        dev_percent: 0.0,
        time_secs: outcome.elapsed_secs,
        visits: m.pois_visited,
        iterations: outcome.iterations,
        final_streak: outcome.no_improve_streak,
        improvements: outcome.improvements,
        violations: m.violations,
        drive_share: m.drive_share,
        walk_share: m.walk_share,
        visit_share: m.visit_share,
        wait_share: m.wait_share,
    })
}

fn cmd_bench(args: BenchArgs) -> anyhow::Result<()> {
    let clustering_modes: &[bool] = match args.clustering {
        BenchClustering::Both => &[false, true],
        BenchClustering::On => &[true],
        BenchClustering::Off => &[false],
    };
    let mut records = Vec::new();
    for path in &args.instance {
        let base = load_instance_file(path)
            .with_context(|| format!("loading instance {}", path.display()))?;
        for &days in &args.days {
            for &Radius(radius) in &args.radius_km {
                for &use_clusters in clustering_modes {
                    let rec = bench_cell(path, &base, days, radius, use_clusters, &args)?;
                    eprintln!(
                        "done: {} m={} r={} clustering={} score={:.1} in {:.2}s",
                        rec.instance,
                        rec.days,
                        rec.radius_km
                            .map_or("inf".to_string(), |v| format!("{v:.0}")),
                        if rec.clustering { "on" } else { "off" },
                        rec.score,
                        rec.time_secs,
                    );
                    records.push(rec);
                }
            }
        }
    }
    compute_deviations(&mut records);
    let table = bench_markdown(&records);
    if let Some(path) = &args.csv {
        report::write_bench_csv(path, &records)?;
    }
    if let Some(path) = &args.markdown {
        std::fs::write(path, &table).with_context(|| format!("writing {}", path.display()))?;
    }
    print!("{table}");
    Ok(())
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Solve(args) => cmd_solve(args),
        Command::Generate(args) => cmd_generate(args),
        Command::Validate(args) => cmd_validate(args),
        Command::ExportGeojson(args) => cmd_export(args),
        Command::Bench(args) => cmd_bench(args),
    }
}
