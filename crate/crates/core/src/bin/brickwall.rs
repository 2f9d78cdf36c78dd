use brickwall::forest::StripForest;
use brickwall::harness::{self, Config, ExperimentId, ExperimentSpec, Format, LawSpec, Report, DEFAULT_SEED};
use brickwall::population::{simulate_paths, write_paths_csv, CsvMeta, RunOptions};
use brickwall::{Error, Result, SeedTree};
use clap::{Parser, Subcommand};
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "brickwall", version, about = "Brick-wall forests: simulation and verification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    replicas: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file (default: stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate slice populations and dump the paths.
    Simulate,
    /// Run one experiment.
    Verify {
        #[arg(value_parser = parse_id)]
        experiment: ExperimentId,
    },
    /// Run every experiment with its default sizes.
    VerifyAll,
    /// Build a strip and dump its bricks (`.svg`/`.txt` outputs are drawn).
    ExportStrip,
}

fn parse_id(s: &str) -> std::result::Result<ExperimentId, String> {
    s.parse().map_err(|_| {
        let names: Vec<_> = ExperimentId::ALL.iter().map(|id| id.name()).collect();
        format!("unknown experiment `{s}`; expected one of {}", names.join(", "))
    })
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn first_law(config: &Config) -> LawSpec {
    config.law_specs().and_then(|v| v.into_iter().next()).unwrap_or_else(|| LawSpec::atoms(&[(1, 2, "1/2"), (2, 1, "1/2")]))
}

fn simulate(cli: &Cli, config: &Config) -> Result<bool> {
    let law = first_law(config).build()?;
    let sim = config.simulate.clone().unwrap_or_default();
    let seed = cli.seed.or(config.master_seed).unwrap_or(DEFAULT_SEED);
    let replicas = cli.replicas.or(config.replicas).unwrap_or(10);
    let seeds = SeedTree::new(seed).named("simulate");
    let paths = simulate_paths(&law, &sim.endpoints, sim.horizon, &RunOptions::default(), replicas, seeds)?;
    let mut out = open_out(cli.out.as_deref().or(config.output.as_deref()))?;
    match cli.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let meta = CsvMeta { law: law.to_string(), seed, horizon: sim.horizon };
            write_paths_csv(&paths, &meta, &mut out)?;
        }
        Format::Json => {
            let doc = serde_json::json!({ "law": law.to_string(), "seed": seed, "horizon": sim.horizon, "paths": paths });
            serde_json::to_writer_pretty(&mut out, &doc).map_err(|e| Error::Io(e.to_string()))?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    Ok(true)
}

fn emit_reports(cli: &Cli, config: &Config, reports: &[Report]) -> Result<bool> {
    let mut out = open_out(cli.out.as_deref().or(config.output.as_deref()))?;
    harness::write_reports(reports, cli.format.unwrap_or_default(), &mut out)?;
    out.flush()?;
    for r in reports {
        let failed = r.records.iter().filter(|rec| rec.verdict == harness::Verdict::Fail).count();
        eprintln!(
            "{:<20} {} ({} checks, {} failed, {} ms)",
            r.experiment.name(),
            if r.passed() { "PASS" } else { "FAIL" },
            r.records.len(),
            failed,
            r.elapsed_ms
        );
    }
    Ok(reports.iter().all(Report::passed))
}

fn verify(cli: &Cli, config: &Config, id: ExperimentId) -> Result<bool> {
    let mut spec = ExperimentSpec::from_config(id, config)?;
    if let Some(s) = cli.seed {
        spec.master_seed = s;
    }
    if let Some(r) = cli.replicas {
        spec.replicas = r;
    }
    let report = harness::run_experiment(&spec)?;
    emit_reports(cli, config, &[report])
}

fn verify_all(cli: &Cli, config: &Config) -> Result<bool> {
    let reports = harness::verify_all(cli.seed.or(config.master_seed), cli.replicas.or(config.replicas))?;
    emit_reports(cli, config, &reports)
}

fn export_strip(cli: &Cli, config: &Config) -> Result<bool> {
    let law = first_law(config).build()?;
    let strip = config.strip.clone().unwrap_or_default();
    let seed = cli.seed.or(config.master_seed).unwrap_or(DEFAULT_SEED);
    let window = strip.window.0..strip.window.1;
    let mut rng = SeedTree::new(seed).named("export-strip").rng(0);
    let forest = StripForest::build(&law, strip.height, window.clone(), &mut rng)?;
    let out_path = cli.out.as_deref().or(config.output.as_deref());
    let drawing = match out_path.and_then(|p| p.extension()).and_then(|e| e.to_str()) {
        Some("svg") => Some(forest.export_svg(window.clone())?),
        Some("txt") => Some(forest.export_text(window.clone())?),
        _ => None,
    };
    let mut out = open_out(out_path)?;
    if let Some(text) = drawing {
        out.write_all(text.as_bytes())?;
    } else {
        let bricks: Vec<_> = (0..forest.height())
            .flat_map(|k| forest.row(k).bricks().map(move |b| (k, b)))
            .filter(|(_, b)| b.s < window.end && b.bottom_end() > window.start)
            .collect();
        match cli.format.unwrap_or(Format::Csv) {
            Format::Csv => {
                writeln!(out, "level,s,b,t,h")?;
                for (k, b) in &bricks {
                    writeln!(out, "{k},{},{},{},{}", b.s, b.b, b.t, b.h)?;
                }
            }
            Format::Json => {
                let rows: Vec<_> = bricks
                    .iter()
                    .map(|(k, b)| serde_json::json!({ "level": k, "s": b.s, "b": b.b, "t": b.t, "h": b.h }))
                    .collect();
                let doc = serde_json::json!({
                    "law": law.to_string(),
                    "seed": seed,
                    "height": strip.height,
                    "window": [window.start, window.end],
                    "bricks": rows,
                });
                serde_json::to_writer_pretty(&mut out, &doc).map_err(|e| Error::Io(e.to_string()))?;
                writeln!(out)?;
            }
        }
    }
    out.flush()?;
    Ok(true)
}

fn run(cli: &Cli) -> Result<bool> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Error::Config(e.to_string()))?;
    }
    let config = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    match &cli.command {
        Command::Simulate => simulate(cli, &config),
        Command::Verify { experiment } => verify(cli, &config, *experiment),
        Command::VerifyAll => verify_all(cli, &config),
        Command::ExportStrip => export_strip(cli, &config),
    }
}

/// Exit status: 0 all checks passed, 1 some check failed, 2 error.
fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
