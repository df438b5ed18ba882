//! `ferroconnect`: minimal connections, liftings, lower-bound audits,
//! ferronematic simulations and renormalized-energy minimization from the shell.
//!
//! Exit codes: 0 ok, 2 usage or input error, 3 numerical failure, 4 capacity exceeded.

use clap::{Args, Parser, Subcommand};
use ferroconnect::error::Error;
use ferroconnect_cli::spec::{ExperimentSpec, Mode};
use ferroconnect_cli::{report, run};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "ferroconnect", version, about = "Minimal connections and ferronematic vortex-wall experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct Common {
    /// Flat TOML experiment spec; flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `disk`, `kidney`, `rounded-square`, `ellipse:a,b`, `disk:r` or a domain file.
    #[arg(long)]
    domain: Option<String>,
    /// JSON array of `[x, y]` points.
    #[arg(long)]
    points: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Run directory.
    #[arg(long, default_value = "run")]
    out: PathBuf,
}

#[derive(Args, Default)]
struct Physics {
    #[arg(long, allow_negative_numbers = true)]
    degree: Option<i32>,
    #[arg(long)]
    beta: Option<f64>,
    /// Target eps; `--continuation` takes precedence.
    #[arg(long)]
    eps: Option<f64>,
    /// Comma-separated eps levels, ending at the target.
    #[arg(long, value_delimiter = ',')]
    continuation: Option<Vec<f64>>,
    #[arg(long)]
    grid: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Minimal connection of the given points relative to the domain.
    Connect {
        #[command(flatten)]
        common: Common,
    },
    /// Detect defects of a q-field, connect them and lift through the cover.
    Lift {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        physics: Physics,
        /// Field file (text or binary); defaults to a vortex field at the points.
        #[arg(long)]
        field: Option<String>,
    },
    /// Jump-length lower bound over random pixel sets.
    AuditLowerBound {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Minimize the ferronematic energy from a recovery competitor.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        physics: Physics,
        #[arg(long)]
        restarts: Option<usize>,
    },
    /// Evaluate or minimize the modified renormalized energy.
    Renorm {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        physics: Physics,
        #[arg(long)]
        minimize: bool,
        /// Points to evaluate (JSON array of `[x, y]`).
        #[arg(long, conflicts_with = "minimize")]
        eval: Option<PathBuf>,
        #[arg(long)]
        starts: Option<usize>,
    },
    /// Simulate, detect defects and walls, and compare with the renormalized-energy argmin.
    Pipeline {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        physics: Physics,
        #[arg(long)]
        restarts: Option<usize>,
        #[arg(long)]
        starts: Option<usize>,
    },
    /// Export plot-ready CSV and geometry files from a run directory.
    Report {
        /// Run directory.
        dir: PathBuf,
    },
}

fn read_points(path: &PathBuf) -> Result<Vec<[f64; 2]>, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn base(common: &Common, mode: Mode) -> Result<ExperimentSpec, Error> {
    let mut s = match &common.config {
        Some(p) => ExperimentSpec::load(p)?,
        None => ExperimentSpec::default(),
    };
    s.mode = mode;
    if let Some(d) = &common.domain {
        s.domain = d.clone();
    }
    if let Some(p) = &common.points {
        s.points = read_points(p)?;
    }
    if let Some(seed) = common.seed {
        s.seed = seed;
    }
    Ok(s)
}

fn apply(s: &mut ExperimentSpec, p: &Physics) {
    if let Some(d) = p.degree {
        s.degree = d;
    }
    if let Some(b) = p.beta {
        s.beta = b;
    }
    if let Some(e) = p.eps {
        s.eps = vec![e];
    }
    if let Some(c) = &p.continuation {
        s.eps = c.clone();
    }
    if let Some(g) = p.grid {
        s.grid = g;
    }
}

fn spec_of(cmd: &Command) -> Result<(ExperimentSpec, PathBuf), Error> {
    let (s, out) = match cmd {
        Command::Connect { common } => (base(common, Mode::Connect)?, &common.out),
        Command::Lift { common, physics, field } => {
            let mut s = base(common, Mode::Lift)?;
            apply(&mut s, physics);
            if field.is_some() {
                s.field = field.clone();
            }
            (s, &common.out)
        }
        Command::AuditLowerBound { common, grid, samples } => {
            let mut s = base(common, Mode::AuditLowerBound)?;
            s.grid = grid.unwrap_or(s.grid);
            s.samples = samples.unwrap_or(s.samples);
            (s, &common.out)
        }
        Command::Simulate { common, physics, restarts } => {
            let mut s = base(common, Mode::Simulate)?;
            apply(&mut s, physics);
            s.restarts = restarts.unwrap_or(s.restarts);
            (s, &common.out)
        }
        Command::Renorm {
            common,
            physics,
            minimize,
            eval,
            starts,
        } => {
            let mut s = base(common, Mode::Renorm)?;
            apply(&mut s, physics);
            s.minimize |= *minimize;
            if let Some(p) = eval {
                s.points = read_points(p)?;
                s.minimize = false;
            }
            s.starts = starts.unwrap_or(s.starts);
            (s, &common.out)
        }
        Command::Pipeline {
            common,
            physics,
            restarts,
            starts,
        } => {
            let mut s = base(common, Mode::Pipeline)?;
            apply(&mut s, physics);
            s.restarts = restarts.unwrap_or(s.restarts);
            s.starts = starts.unwrap_or(s.starts);
            (s, &common.out)
        }
        Command::Report { .. } => unreachable!("report has no spec"),
    };
    Ok((s, out.clone()))
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Capacity { .. } => 4,
        Error::Input(_) | Error::Parse(_) | Error::Domain(_) | Error::Io(_) => 2,
        _ => 3,
    }
}

fn configure_threads() -> Result<(), Error> {
    let Ok(v) = std::env::var("FERROCONNECT_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Input(format!("FERROCONNECT_THREADS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Input(format!("thread pool: {e}")))
}

fn execute(cli: Cli) -> Result<(), Error> {
    configure_threads()?;
    if let Command::Report { dir } = &cli.command {
        for p in report::export_report(dir)? {
            println!("{}", p.display());
        }
        return Ok(());
    }
    let (spec, out) = spec_of(&cli.command)?;
    let rec = run::run(&spec, &out)?;
    print!("{}", rec.summary_text());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
