//! `flatcover`: scripted experiments on translation surfaces and their
//! Z-covers. Exit status 0 on success, 2 on invalid input, 3 when a verdict
//! is inconclusive at the requested bound.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod report;
mod svg;

#[derive(Parser)]
#[command(name = "flatcover", version, about = "Straightline flows on translation surfaces and their Z-covers")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
pub struct Src {
    /// Surface file, or `example:NAME` for a shipped example.
    #[arg(long)]
    pub surface: String,
    /// Cycle defining the cover; defaults to the first one in the file.
    #[arg(long)]
    pub cycle: Option<String>,
}

#[derive(Args, Clone)]
pub struct Dir {
    /// Exact direction "a,b" with coordinates in the surface field.
    #[arg(long, allow_hyphen_values = true)]
    pub direction: Option<String>,
    /// Float direction in degrees; diagnostics only.
    #[arg(long, alias = "theta", allow_hyphen_values = true)]
    pub theta_deg: Option<f64>,
}

#[derive(Args, Clone)]
pub struct Start {
    /// Start point "x,y" in the coordinates of `--polygon`.
    #[arg(long, alias = "x", allow_hyphen_values = true)]
    pub point: String,
    #[arg(long, default_value_t = 0)]
    pub polygon: usize,
}

#[derive(Args, Clone)]
pub struct Out {
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads for parallel sweeps; output does not depend on it.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Subcommand)]
pub enum Cmd {
    /// Check a surface and print genus, area and cone angles.
    Validate {
        #[command(flatten)]
        src: Src,
        #[command(flatten)]
        out: Out,
    },
    /// Cylinder decomposition in an exact direction.
    Cylinders {
        #[command(flatten)]
        src: Src,
        #[command(flatten)]
        dir: Dir,
        #[arg(long, default_value = "10")]
        lmax: String,
        #[command(flatten)]
        out: Out,
    },
    /// Search periodic directions up to `--lmax` for strips of the cover.
    Strips {
        #[command(flatten)]
        src: Src,
        #[arg(long, default_value = "10")]
        lmax: String,
        #[command(flatten)]
        out: Out,
    },
    /// Describe the cover defined by a cycle.
    Cover {
        #[command(flatten)]
        src: Src,
        #[command(flatten)]
        out: Out,
    },
    /// Signed crossings of a flow segment with the cycle.
    Cocycle {
        #[command(flatten)]
        src: Src,
        #[command(flatten)]
        dir: Dir,
        #[command(flatten)]
        start: Start,
        /// Flow parameter, in units of the direction vector.
        #[arg(long)]
        time: String,
        #[command(flatten)]
        out: Out,
    },
    /// Trace a trajectory on the cover; SVG when `--out` ends in `.svg`.
    Simulate {
        #[command(flatten)]
        src: Src,
        #[command(flatten)]
        dir: Dir,
        #[command(flatten)]
        start: Start,
        #[arg(long)]
        time: Option<String>,
        #[arg(long)]
        crossings: Option<usize>,
        #[command(flatten)]
        out: Out,
    },
    /// First-return interval exchange with integer displacements.
    Iet {
        #[command(flatten)]
        src: Src,
        #[command(flatten)]
        dir: Dir,
        /// Transversal "P:x0,y0:x1,y1" inside polygon P.
        #[arg(long, allow_hyphen_values = true)]
        transversal: String,
        #[arg(long, default_value_t = 100_000)]
        crossings: usize,
        #[command(flatten)]
        out: Out,
    },
    /// Maximal |level| along a cover trajectory at evenly spaced times.
    ProbeBounded {
        #[command(flatten)]
        src: Src,
        #[command(flatten)]
        dir: Dir,
        #[command(flatten)]
        start: Start,
        #[arg(long)]
        time: String,
        #[arg(long, default_value_t = 10)]
        checkpoints: usize,
        #[command(flatten)]
        out: Out,
    },
    /// Strip approximation verdict (`--eps`) or orbit approximation count
    /// (`--d`) for one direction.
    Approx {
        #[command(flatten)]
        src: Src,
        #[command(flatten)]
        dir: Dir,
        #[command(flatten)]
        bounds: ApproxBounds,
        #[command(flatten)]
        out: Out,
    },
    /// Approximation over a uniform grid of directions in [0, pi).
    Scan {
        #[command(flatten)]
        src: Src,
        #[command(flatten)]
        bounds: ApproxBounds,
        /// Number of grid directions, e.g. 4096 or 2^12.
        #[arg(long, default_value = "1024")]
        grid: String,
        #[command(flatten)]
        out: Out,
    },
    /// Rectangle test and band measure for the strips in a direction.
    Admits {
        #[command(flatten)]
        src: Src,
        #[command(flatten)]
        dir: Dir,
        #[command(flatten)]
        start: Start,
        /// Exact strip direction "a,b".
        #[arg(long, alias = "strip-direction", allow_hyphen_values = true)]
        strip: String,
        #[arg(long)]
        eps: String,
        #[arg(long, default_value = "20")]
        lmax: String,
        /// Monte Carlo samples for the band measure; none when absent.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: Out,
    },
    /// Shipped examples.
    Examples {
        #[command(subcommand)]
        cmd: ExamplesCmd,
    },
}

#[derive(Args, Clone)]
pub struct ApproxBounds {
    #[arg(long)]
    pub eps: Option<String>,
    #[arg(long)]
    pub d: Option<String>,
    /// Bound on the entries of enumerated group elements.
    #[arg(long, default_value = "20")]
    pub radius: String,
    /// Length bound for collecting strips.
    #[arg(long, default_value = "6")]
    pub lmax: String,
    #[arg(long, default_value_t = 1)]
    pub min_count: usize,
    /// Orbit base "a,b" for `--d`.
    #[arg(long, default_value = "1,0", allow_hyphen_values = true)]
    pub vector: String,
}

#[derive(Subcommand)]
pub enum ExamplesCmd {
    List {
        #[command(flatten)]
        out: Out,
    },
    /// Write an example in the surface file format.
    Export {
        name: String,
        #[command(flatten)]
        out: Out,
    },
}

impl Cmd {
    fn jobs(&self) -> usize {
        match self {
            Cmd::Validate { out, .. }
            | Cmd::Cylinders { out, .. }
            | Cmd::Strips { out, .. }
            | Cmd::Cover { out, .. }
            | Cmd::Cocycle { out, .. }
            | Cmd::Simulate { out, .. }
            | Cmd::Iet { out, .. }
            | Cmd::ProbeBounded { out, .. }
            | Cmd::Approx { out, .. }
            | Cmd::Scan { out, .. }
            | Cmd::Admits { out, .. } => out.jobs,
            Cmd::Examples { cmd: ExamplesCmd::List { out } | ExamplesCmd::Export { out, .. } } => out.jobs,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let jobs = cli.cmd.jobs().max(1);
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match commands::run(cli.cmd) {
        Ok(commands::Status::Done) => ExitCode::SUCCESS,
        Ok(commands::Status::Inconclusive) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
