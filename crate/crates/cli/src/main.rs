use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pfdesign::catalog::load_ensemble;
use pfdesign::experiment::{
    default_checkpoints, run_mc_experiment, write_trajectories_csv, ExperimentConfig,
};
use pfdesign::linalg::SchattenIndex;
use pfdesign::moments::Space;
use pfdesign::report::{bounds_table, design_report, haar_reference};
use pfdesign::Error;

/// Moment operators and pushforward bounds for approximate t-designs.
#[derive(Debug, Parser)]
#[command(name = "pfdesign", version)]
struct Cli {
    /// Worker threads for parallel runs (defaults to the number of CPUs).
    #[arg(long, global = true, env = "PFDESIGN_WORKERS")]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Monte Carlo convergence experiment on Haar-random bipartite states.
    Mc(McArgs),
    /// Distances of an ensemble file from the matching Haar reference.
    Report(ReportArgs),
    /// Lipschitz constants of every pushforward map.
    Bounds(BoundsArgs),
    /// Write an exact Haar moment operator as JSON.
    Haar(HaarArgs),
}

#[derive(Debug, Args)]
struct McArgs {
    #[arg(long = "dA")]
    d_a: usize,
    #[arg(long = "dB")]
    d_b: usize,
    #[arg(short = 't', default_value_t = 2)]
    t: usize,
    /// Samples per run.
    #[arg(short = 'N', default_value_t = pfdesign::experiment::DEFAULT_SAMPLES)]
    n_samples: usize,
    #[arg(long, default_value_t = pfdesign::experiment::DEFAULT_RUNS)]
    runs: usize,
    #[arg(long, default_value_t = pfdesign::experiment::DEFAULT_SEED)]
    seed: u64,
    /// Schatten indices, e.g. `1,2,3,inf`.
    #[arg(long = "p", value_delimiter = ',', default_value = "1,2,3,inf")]
    p: Vec<SchattenIndex>,
    /// Sample counts at which to evaluate (default: 20 per decade up to N).
    #[arg(long, value_delimiter = ',')]
    checkpoints: Option<Vec<usize>>,
    /// Output directory for `trajectories.csv` and `summary.json`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit with status 1 if any record violates a bound.
    #[arg(long)]
    strict: bool,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// Ensemble JSON file.
    ensemble: PathBuf,
    #[arg(short = 't', default_value_t = 2)]
    t: usize,
    #[arg(long = "p", value_delimiter = ',', default_value = "1,2,3,inf")]
    p: Vec<SchattenIndex>,
    /// Split the space as `C^dA ⊗ C^dB` (requires `--dB`).
    #[arg(long = "dA", requires = "d_b")]
    d_a: Option<usize>,
    #[arg(long = "dB", requires = "d_a")]
    d_b: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BoundsArgs {
    #[arg(long = "dA")]
    d_a: usize,
    #[arg(long = "dB")]
    d_b: usize,
    #[arg(short = 't', default_value_t = 2)]
    t: usize,
    #[arg(long = "p", default_value = "2")]
    p: SchattenIndex,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SpaceArg {
    Projective,
    Simplex,
    Mixed,
    Channel,
}

impl From<SpaceArg> for Space {
    fn from(s: SpaceArg) -> Space {
        match s {
            SpaceArg::Projective => Space::Projective,
            SpaceArg::Simplex => Space::Simplex,
            SpaceArg::Mixed => Space::Mixed,
            SpaceArg::Channel => Space::Channel,
        }
    }
}

#[derive(Debug, Args)]
struct HaarArgs {
    #[arg(long, value_enum)]
    space: SpaceArg,
    /// Dimension, or `dA,dB` for the mixed space.
    #[arg(short = 'd', long = "dims", value_delimiter = ',', required = true)]
    dims: Vec<usize>,
    #[arg(short = 't', default_value_t = 2)]
    t: usize,
    /// Write the operator here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn io_error(path: &Path, source: io::Error) -> Error {
    Error::Io {
        path: path.to_owned(),
        source,
    }
}

fn write_json(value: &impl serde::Serialize, out: Option<&Path>) -> Result<(), Error> {
    let mut text = serde_json::to_string_pretty(value).expect("report types serialize");
    text.push('\n');
    match out {
        Some(path) => fs::write(path, text).map_err(|e| io_error(path, e)),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| io_error(Path::new("<stdout>"), e)),
    }
}

fn run_mc(args: McArgs) -> Result<ExitCode, Error> {
    let cfg = ExperimentConfig {
        d_a: args.d_a,
        d_b: args.d_b,
        t: args.t,
        n_samples: args.n_samples,
        n_runs: args.runs,
        p_list: args.p,
        master_seed: args.seed,
        checkpoints: args
            .checkpoints
            .unwrap_or_else(|| default_checkpoints(args.n_samples)),
    };
    let output = run_mc_experiment(&cfg)?;
    match &args.out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
            let csv_path = dir.join("trajectories.csv");
            let file = fs::File::create(&csv_path).map_err(|e| io_error(&csv_path, e))?;
            let mut w = BufWriter::new(file);
            write_trajectories_csv(&output.records, &mut w)
                .and_then(|_| w.flush())
                .map_err(|e| io_error(&csv_path, e))?;
            write_json(&output.summary, Some(&dir.join("summary.json")))?;
        }
        None => write_json(&output.summary, None)?,
    }
    let violations = output.summary.total_violations;
    if violations > 0 {
        eprintln!("pfdesign: {violations} bound violations");
        if args.strict {
            return Ok(ExitCode::from(1));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn run_report(args: ReportArgs) -> Result<ExitCode, Error> {
    let e = load_ensemble(&args.ensemble)?;
    let split = args.d_a.zip(args.d_b);
    let report = design_report(&e, args.t, &args.p, split)?;
    write_json(&report, args.out.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Mc(args) => run_mc(args),
        Command::Report(args) => run_report(args),
        Command::Bounds(args) => {
            write_json(&bounds_table(args.d_a, args.d_b, args.t, args.p)?, None)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Haar(args) => {
            let m = haar_reference(args.space.into(), &args.dims, args.t)?;
            write_json(&m, args.out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("pfdesign: cannot set worker count: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("pfdesign: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
