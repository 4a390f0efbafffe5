use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use adhyp::commands::{self, parse_times, RunConfig, RunOverrides};
use adhyp::compare::Norm;
use adhyp::{Error, FluxKind, Initialization, Strategy, TauRefresh};

const EXIT_USAGE: u8 = 1;
const EXIT_ABORT: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(
    name = "adhyp",
    version,
    about = "Central-upwind Euler solver with smoothness-adaptive SBM limiting"
)]
struct Cli {
    /// More log output (-v info, -vv debug). RUST_LOG takes precedence.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a problem and write snapshots, metadata and a step log.
    Run(RunArgs),
    /// Fine-mesh run with the fixed dissipative limiter.
    Reference {
        #[command(flatten)]
        run: RunArgs,
        /// Reference mesh; defaults to the problem's reference mesh.
        #[arg(long)]
        ref_nx: Option<usize>,
    },
    /// Density error between two field files.
    Error {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value = "L1")]
        norm: Norm,
        /// x-range `lo,hi`.
        #[arg(long, value_parser = parse_window, allow_hyphen_values = true)]
        window: Option<(f64, f64)>,
    },
    /// Observed order of accuracy over a mesh sequence (1-D).
    Convergence {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated cell counts, at least three.
        #[arg(long, value_delimiter = ',', required = true)]
        meshes: Vec<usize>,
        #[arg(long, default_value = "L1")]
        norm: Norm,
    },
    /// List problem ids and their defaults.
    ListProblems,
}

#[derive(Args, Clone, Default)]
struct RunArgs {
    /// Problem id (ex1..ex7, smooth1d).
    #[arg(long)]
    problem: Option<String>,
    /// `key = value` config file; a run's metadata file works as one.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    ny: Option<usize>,
    /// new | old | fixed:<tau>
    #[arg(long)]
    scheme: Option<Strategy>,
    /// Adaption constant.
    #[arg(long = "C", alias = "c")]
    c: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    cfl: Option<f64>,
    /// cu | ldcu
    #[arg(long)]
    flux: Option<FluxKind>,
    /// step | stage
    #[arg(long)]
    tau_refresh: Option<TauRefresh>,
    /// Zero slopes everywhere (debug aid).
    #[arg(long)]
    first_order: bool,
    /// midpoint | gauss4
    #[arg(long)]
    init: Option<Initialization>,
    #[arg(long)]
    t_end: Option<f64>,
    /// Comma-separated output times before t_end.
    #[arg(long, value_parser = parse_snapshots)]
    snapshots: Option<Snapshots>,
    /// Also write ln(Ebar) per cell at the final time.
    #[arg(long)]
    dump_indicator: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone)]
struct Snapshots(Vec<f64>);

fn parse_snapshots(s: &str) -> Result<Snapshots, String> {
    parse_times(s).map(Snapshots).map_err(|e| e.to_string())
}

fn parse_window(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected `lo,hi`")?;
    let lo: f64 = a.trim().parse().map_err(|e| format!("{e}"))?;
    let hi: f64 = b.trim().parse().map_err(|e| format!("{e}"))?;
    if lo >= hi {
        return Err("window must have lo < hi".into());
    }
    Ok((lo, hi))
}

impl RunArgs {
    fn resolve(self) -> Result<RunConfig, Error> {
        let cli = RunOverrides {
            problem: self.problem,
            nx: self.nx,
            ny: self.ny,
            strategy: self.scheme,
            c: self.c,
            epsilon: self.epsilon,
            theta: self.theta,
            cfl: self.cfl,
            flux: self.flux,
            tau_refresh: self.tau_refresh,
            first_order: self.first_order.then_some(true),
            init: self.init,
            t_end: self.t_end,
            snapshots: self.snapshots.map(|s| s.0),
            dump_indicator: self.dump_indicator.then_some(true),
            out_dir: self.out,
        };
        let merged = match &self.config {
            Some(path) => cli.or(RunOverrides::from_file(path)?),
            None => cli,
        };
        RunConfig::resolve(merged)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Aborted { .. } | Error::InvalidState { .. } | Error::Decomposition { .. } => {
            EXIT_ABORT
        }
        Error::Io(_) | Error::Parse { .. } => EXIT_IO,
        Error::InvalidParameter { .. } | Error::UnknownProblem(_) | Error::IncompatibleMesh(_) => {
            EXIT_USAGE
        }
    }
}

fn configure_threads() -> Result<(), Error> {
    let Ok(v) = std::env::var("ADHYP_THREADS") else {
        return Ok(());
    };
    let n: usize =
        v.trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::InvalidParameter {
                name: "ADHYP_THREADS",
                reason: format!("expected a positive integer, got `{v}`"),
            })?;
    // Fails only if a pool already exists, which cannot happen this early.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

fn dispatch(command: Command) -> Result<(), Error> {
    match command {
        Command::Run(args) => {
            let config = args.resolve()?;
            let out = commands::cmd_run(&config)?;
            for f in out.fields.iter().chain(&out.indicator) {
                println!("{}", f.display());
            }
        }
        Command::Reference { run, ref_nx } => {
            let config = run.resolve()?;
            let out = commands::cmd_reference(&config, ref_nx)?;
            for f in &out.fields {
                println!("{}", f.display());
            }
        }
        Command::Error { a, b, norm, window } => {
            let e = commands::cmd_error(&a, &b, norm, window)?;
            println!("{e:e}");
        }
        Command::Convergence { run, meshes, norm } => {
            let config = run.resolve()?;
            let rows = commands::cmd_convergence(&config, &meshes, norm)?;
            println!("{:>8} {:>14} {:>8}", "nx", format!("{norm} error"), "order");
            for r in rows {
                let order = r.order.map_or("-".to_string(), |o| format!("{o:.3}"));
                println!("{:>8} {:>14.6e} {:>8}", r.nx, r.error, order);
            }
        }
        Command::ListProblems => {
            for line in commands::list_problems() {
                println!("{line}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match configure_threads().and_then(|()| dispatch(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
