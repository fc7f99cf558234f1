//! Thin command-line front end: parses flags into a `RunConfig` and hands
//! off to the library's command dispatch.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use bandgrowth::cli::{self, Command, RunConfig};
use bandgrowth::construct::{parse_frac, Frac};
use bandgrowth::field::FieldConfig;
use bandgrowth::DEFAULT_SEED;

#[derive(Parser)]
#[command(
    name = "bandgrowth",
    about = "Exact windowed calculus for banded infinite matrices",
    version
)]
struct Args {
    /// Coefficient field: `gfp:<p>` or `q`.
    #[arg(long, global = true, default_value = "gfp:7")]
    field: String,

    /// Growth parameter r as an exact rational (`1/2`, `0.5`).
    #[arg(long, global = true)]
    r: Option<String>,

    /// Target exponent s as an exact rational.
    #[arg(long, global = true)]
    s: Option<String>,

    /// Window size.
    #[arg(long, global = true)]
    window: Option<u64>,

    /// Maximum word length.
    #[arg(long, global = true, default_value_t = 3)]
    max_len: usize,

    /// Seed for every randomized routine.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,

    /// Output directory for JSON/CSV artifacts.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Round block sizes up to powers of two.
    #[arg(long, global = true)]
    padded: bool,

    /// Also write static SVG plots.
    #[arg(long, global = true)]
    svg: bool,

    #[command(subcommand)]
    command: Cli,
}

#[derive(Subcommand)]
enum Cli {
    /// Band profile and log-log fit of a matrix (builtin or file).
    Profile {
        /// `identity`, `shift`, `shift_t`, `unit:i,j`, `R:r=1/2`,
        /// `generic:<n>`, or a matrix file path.
        input: String,
    },
    /// Block structure n_k = [k^t] plus growth checks of random elements.
    Construct,
    /// Matrix-unit word recipes for all units of blocks 1..=K.
    Keyprop {
        #[arg(long, default_value_t = 16)]
        k_max: u64,
    },
    /// Cross-element recipes for blocks 1..=K.
    Cross {
        #[arg(long, default_value_t = 15)]
        k_max: u64,
    },
    /// Simultaneous block tridiagonalization.
    Tridiag {
        /// Matrix inputs; empty means random banded samples.
        inputs: Vec<String>,
        /// Number of random runs when no inputs are given.
        #[arg(long, default_value_t = 10)]
        count: usize,
        /// Bandwidth of random samples.
        #[arg(long, default_value_t = 3)]
        bandwidth: u64,
    },
    /// Iterated power-growth bound (exponent grid from --s, else 1/4,1/2,3/4).
    Step1 {
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, default_value_t = 64)]
        m_max: u32,
    },
    /// Stretch placements and homomorphism checks (needs --r and --s).
    Stretch {
        #[arg(long, default_value_t = 1.0)]
        c: f64,
    },
    /// Representation growth-exponent estimation (needs --r).
    Estimate {
        #[arg(long, default_value_t = 2)]
        generators: usize,
    },
    /// Word-independence check on two matrices.
    Free { x: String, y: String },
    /// Compact verification battery at desk scale.
    Report,
}

fn parse_opt_frac(v: &Option<String>) -> Result<Option<Frac>, String> {
    match v {
        None => Ok(None),
        Some(text) => parse_frac(text).map(Some).map_err(|e| e.to_string()),
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let field = match FieldConfig::parse(&args.field) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let (r, s) = match (parse_opt_frac(&args.r), parse_opt_frac(&args.s)) {
        (Ok(r), Ok(s)) => (r, s),
        (Err(e), _) | (_, Err(e)) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let command = match args.command {
        Cli::Profile { input } => Command::Profile { input },
        Cli::Construct => Command::Construct,
        Cli::Keyprop { k_max } => Command::Keyprop { k_max },
        Cli::Cross { k_max } => Command::Cross { k_max },
        Cli::Tridiag { inputs, count, bandwidth } => Command::Tridiag { inputs, count, bandwidth },
        Cli::Step1 { c, m_max } => Command::Step1 { c, m_max },
        Cli::Stretch { c } => Command::Stretch { c },
        Cli::Estimate { generators } => Command::Estimate { generators },
        Cli::Free { x, y } => Command::Free { x, y },
        Cli::Report => Command::Report,
    };
    let cfg = RunConfig {
        command,
        field,
        r,
        s,
        window: args.window,
        max_len: args.max_len,
        seed: args.seed,
        out: args.out,
        padded: args.padded,
        svg: args.svg,
    };
    ExitCode::from(cli::run(&cfg) as u8)
}
