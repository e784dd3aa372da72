mod commands;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use magcrit::atlas::AtlasError;
use magcrit::experiments::ExperimentError;

use commands::{Outcome, Verdict};

#[derive(Parser, Debug)]
#[command(name = "magcrit", version, about = "Critical points of magnetic eigenvalues on graphs")]
struct Cli {
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (defaults to one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Gradient tolerance for refined critical points; also bounds the
    /// criticality residual of reported samples.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

/// A graph file with an optional matrix, or a random cubic graph.
#[derive(Args, Debug, Clone)]
struct Instance {
    /// Graph JSON `{"n": .., "edges": [[r, s], ..]}` with 1-based labels.
    #[arg(required_unless_present = "n")]
    graph: Option<PathBuf>,
    /// Matrix JSON `{"dim": .., "re": [[..]]}`; defaults to adjacency plus
    /// the irrational diagonal `sqrt(2) s mod 1`.
    matrix: Option<PathBuf>,
    /// Use a random 3-regular graph on `n` vertices (seeded by `--seed`).
    #[arg(long, conflicts_with = "graph")]
    n: Option<usize>,
}

#[derive(Args, Debug, Clone)]
struct Genericity {
    /// Induced subgraphs to examine before falling back to supports only.
    #[arg(long, default_value_t = 4096)]
    budget: usize,
    /// Skip the genericity check.
    #[arg(long)]
    no_genericity_check: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Enumerate critical data and describe every critical set.
    Atlas {
        #[command(flatten)]
        instance: Instance,
        #[command(flatten)]
        genericity: Genericity,
        /// Samples per positive-dimensional critical set.
        #[arg(long, default_value_t = 16)]
        samples: usize,
    },
    /// Scan the flux torus for critical points and match them against the atlas.
    GridSearch {
        #[command(flatten)]
        instance: Instance,
        #[command(flatten)]
        genericity: Genericity,
        /// Eigenvalue label; all labels when omitted.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 12)]
        resolution: usize,
        /// Torus distance within which a point counts as matched.
        #[arg(long, default_value_t = 1e-4)]
        match_dist: f64,
        #[arg(long, default_value_t = 8)]
        samples: usize,
    },
    /// Nodal-surplus histograms over all signings.
    SigningsSweep {
        #[command(flatten)]
        instance: Instance,
    },
    /// Largest KS distance to the normal law over random cubic graphs.
    KsReport {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        graphs: usize,
    },
    /// Critical points of a cubic graph by size of the zero set.
    CpCensus {
        #[command(flatten)]
        instance: Instance,
    },
    /// Range of each eigenvalue over the flux torus.
    BandEdges {
        #[command(flatten)]
        instance: Instance,
        #[arg(long, value_enum, default_value_t = BandModeArg::Grid)]
        mode: BandModeArg,
        #[arg(long, default_value_t = 16)]
        resolution: usize,
        #[arg(long, default_value_t = 16)]
        samples: usize,
    },
    /// Run a built-in worked example and check its known answers.
    Example {
        #[arg(value_enum)]
        name: ExampleName,
        /// Diagonal entry at the hub of the multiplicity example.
        #[arg(long, default_value_t = 3.0)]
        gamma: f64,
        /// Graph for the Laplacian example (default K4).
        #[arg(long)]
        graph: Option<PathBuf>,
    },
    /// Generate a random simple connected 3-regular graph.
    #[command(name = "gen-3reg")]
    Gen3reg {
        #[arg(long)]
        n: usize,
        /// Also emit the default matrix.
        #[arg(long)]
        with_matrix: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BandModeArg {
    Grid,
    Atlas,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ExampleName {
    IndexJump,
    Multiplicity,
    Laplacian,
}

fn run(cli: &Cli) -> anyhow::Result<Outcome> {
    let seed = cli.seed;
    match &cli.command {
        Command::Atlas { instance, genericity, samples } => {
            commands::atlas(&load(instance, seed)?, genericity, *samples, seed, cli.tol)
        }
        Command::GridSearch { instance, genericity, k, resolution, match_dist, samples } => {
            let opts = commands::GridOptions {
                k: *k,
                resolution: *resolution,
                match_dist: *match_dist,
                samples: *samples,
                tol: cli.tol.unwrap_or(1e-8),
            };
            commands::grid_search(&load(instance, seed)?, genericity, &opts, seed)
        }
        Command::SigningsSweep { instance } => commands::signings_sweep(&load(instance, seed)?),
        Command::KsReport { n, graphs } => commands::ks_report(*n, *graphs, seed),
        Command::CpCensus { instance } => commands::cp_census(&load(instance, seed)?),
        Command::BandEdges { instance, mode, resolution, samples } => {
            let mode = match mode {
                BandModeArg::Grid => magcrit::experiments::BandMode::Grid { resolution: *resolution },
                BandModeArg::Atlas => magcrit::experiments::BandMode::Atlas { samples: *samples, seed },
            };
            commands::band_edges(&load(instance, seed)?, mode)
        }
        Command::Example { name, gamma, graph } => match name {
            ExampleName::IndexJump => commands::example_index_jump(seed),
            ExampleName::Multiplicity => commands::example_multiplicity(*gamma, seed),
            ExampleName::Laplacian => {
                let g = match graph {
                    Some(path) => Some(read_graph(path)?),
                    None => None,
                };
                commands::example_laplacian(g)
            }
        },
        Command::Gen3reg { n, with_matrix } => commands::gen_3reg(*n, seed, *with_matrix),
    }
}

fn read_graph(path: &PathBuf) -> anyhow::Result<magcrit::graph::Graph> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let json: magcrit::graph::GraphJson =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(json.to_graph()?)
}

fn load(instance: &Instance, seed: u64) -> anyhow::Result<magcrit::magnetic::BaseMatrix> {
    let g = match (&instance.graph, instance.n) {
        (Some(path), _) => read_graph(path)?,
        (None, Some(n)) => magcrit::experiments::random_3regular(n, seed)?,
        (None, None) => anyhow::bail!("give a graph file or --n"),
    };
    match &instance.matrix {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let json = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
            Ok(magcrit::magnetic::BaseMatrix::from_json(g, &json)?)
        }
        None => Ok(magcrit::fixtures::default_matrix(g)),
    }
}

fn write(cli: &Cli, outcome: &Outcome) -> anyhow::Result<()> {
    let body = match cli.format {
        Format::Json => serde_json::to_string_pretty(&outcome.json)? + "\n",
        Format::Csv => outcome.csv.join("\n") + "\n",
    };
    match &cli.out {
        Some(path) => fs::write(path, body).with_context(|| format!("writing {}", path.display()))?,
        None => std::io::stdout().lock().write_all(body.as_bytes())?,
    }
    Ok(())
}

/// Library errors that mean the input matrix is not generic.
fn is_genericity_error(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        matches!(c.downcast_ref::<AtlasError>(), Some(AtlasError::NotGeneric(_)))
            || matches!(c.downcast_ref::<ExperimentError>(), Some(ExperimentError::Atlas(AtlasError::NotGeneric(_))))
    })
}

fn main() -> ExitCode {
    // clap exits with 2 on usage errors, which is reserved for failed checks
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::FAILURE } else { ExitCode::SUCCESS };
        }
    };
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    }
    let outcome = match run(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return if is_genericity_error(&e) { ExitCode::from(3) } else { ExitCode::FAILURE };
        }
    };
    if let Err(e) = write(&cli, &outcome) {
        eprintln!("error: {e:#}");
        return ExitCode::FAILURE;
    }
    match &outcome.verdict {
        Verdict::Pass => ExitCode::SUCCESS,
        Verdict::VerificationFailed(why) => {
            eprintln!("verification failed: {why}");
            ExitCode::from(2)
        }
        Verdict::NotGeneric(why) => {
            eprintln!("not generic: {why}");
            ExitCode::from(3)
        }
    }
}
