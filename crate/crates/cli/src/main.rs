use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use stlab::config::{apply_overrides, defines_key};
use stlab::{build_graph, parse_config, run, ExperimentConfig, Kind, RunError};
use stlab_core::graph::{write_bipartite_edge_list, write_edge_list};
use stlab_core::Generated;

#[derive(Parser)]
#[command(name = "stlab", version, about = "Spanning-tree and balls-into-bins experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a graph and print it as an edge list
    Gen(Common),
    /// Count spanning trees
    Count(Common),
    /// Sample uniform spanning trees and tabulate their isomorphism classes
    SampleTrees(Common),
    /// Simulate the balls-into-bins process and compare with exact moments
    BallsBins(Common),
    /// Evaluate the concentration and tree-copy bounds
    Bounds(Common),
    /// List all unlabeled trees in a size range
    EnumerateTrees(Common),
    /// Fit the growth rate of unlabeled tree counts
    OtterFit(Common),
}

#[derive(Args)]
struct Common {
    /// Configuration file (`key = value` lines)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Extra `key=value` setting; may be repeated
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (an edge-list file for `gen`)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    samples: Option<u64>,
}

fn load(common: &Common, kind: Kind, out_is_dir: bool) -> Result<ExperimentConfig, RunError> {
    let text = match &common.config {
        Some(path) => fs::read_to_string(path)
            .map_err(|e| RunError::config(format!("cannot read `{}`: {e}", path.display())))?,
        None => String::new(),
    };
    let mut overrides = Vec::new();
    if !defines_key(&text, "kind") {
        overrides.push(("kind".to_string(), kind.to_string()));
    }
    for pair in &common.set {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| RunError::config(format!("--set expects KEY=VALUE, got `{pair}`")))?;
        overrides.push((k.trim().to_string(), v.trim().to_string()));
    }
    if let Some(seed) = common.seed {
        overrides.push(("seed".into(), seed.to_string()));
    }
    if let Some(samples) = common.samples {
        overrides.push(("samples".into(), samples.to_string()));
    }
    if let (true, Some(out)) = (out_is_dir, &common.out) {
        overrides.push(("out".into(), out.display().to_string()));
    }
    Ok(parse_config(&apply_overrides(&text, &overrides))?)
}

fn experiment(common: &Common, kind: Kind) -> Result<(), RunError> {
    let cfg = load(common, kind, true)?;
    if cfg.kind != kind {
        return Err(RunError::config(format!(
            "config is for kind {}, but the subcommand runs {kind}",
            cfg.kind
        )));
    }
    let manifest = run(&cfg)?;
    let mut stdout = io::stdout().lock();
    for o in &manifest.outputs {
        writeln!(stdout, "{}  {}", o.sha256, cfg.out.join(&o.file).display())?;
    }
    Ok(())
}

fn gen(common: &Common) -> Result<(), RunError> {
    let cfg = load(common, Kind::Count, false)?;
    let graph = build_graph(&cfg)?;
    let mut buf = Vec::new();
    match &graph {
        Generated::Graph(g) => write_edge_list(g, &mut buf)?,
        Generated::Bipartite(h) => write_bipartite_edge_list(h, &mut buf)?,
    }
    match &common.out {
        Some(path) => fs::write(path, buf)?,
        None => io::stdout().lock().write_all(&buf)?,
    }
    Ok(())
}

fn configure_threads() -> Result<(), RunError> {
    let Ok(raw) = std::env::var("STLAB_THREADS") else { return Ok(()) };
    let threads: usize = raw
        .trim()
        .parse()
        .map_err(|_| RunError::config(format!("STLAB_THREADS must be a nonnegative integer, got `{raw}`")))?;
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| RunError::config(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = configure_threads().and_then(|()| match &cli.command {
        Command::Gen(c) => gen(c),
        Command::Count(c) => experiment(c, Kind::Count),
        Command::SampleTrees(c) => experiment(c, Kind::SampleCensus),
        Command::BallsBins(c) => experiment(c, Kind::BallsBins),
        Command::Bounds(c) => experiment(c, Kind::Bounds),
        Command::EnumerateTrees(c) => experiment(c, Kind::EnumerateTrees),
        Command::OtterFit(c) => experiment(c, Kind::OtterFit),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("stlab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
