use std::path::PathBuf;
use std::process;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use deriva::report::{self, Command, ExitCode, Format, Grid, GroupSource, RunConfig};
use deriva::scalar::{make_field, FieldSpec};
use deriva::Family;

/// Exact derivation spaces of finite group algebras.
#[derive(Parser)]
#[command(name = "deriva", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// List conjugacy classes.
    Classes(Common),
    /// Dimensions of the derivation, inner and outer spaces.
    Dimensions(Common),
    /// Check one family instance against its closed-form predictions.
    Verify(Common),
    /// Verify every cell of a grid and emit one row per cell.
    Sweep(SweepArgs),
    /// Solve d = d_beta for a derivation matrix, or report OUTER.
    Witness(WitnessArgs),
}

#[derive(Args)]
struct Common {
    #[arg(long, value_parser = parse_family, requires = "n", conflicts_with = "cayley")]
    family: Option<Family>,
    #[arg(long)]
    n: Option<usize>,
    /// Cayley table as CSV (N rows of N zero-based indices) or JSON.
    #[arg(long)]
    cayley: Option<PathBuf>,
    /// 0 for Q, or a prime p for GF(p).
    #[arg(long = "char", default_value = "0", value_parser = parse_char)]
    characteristic: FieldSpec,
    #[arg(long, default_value = "text", value_parser = parse_format)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0: one per core).
    #[arg(long, default_value_t = 0)]
    parallel: usize,
    /// Permit dicyclic n = 1.
    #[arg(long)]
    allow_degenerate: bool,
    /// Only the inner-derivation checks (valid in characteristic 2).
    #[arg(long)]
    inner_only: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Comma-separated families to keep.
    #[arg(long, value_delimiter = ',', value_parser = parse_family)]
    families: Option<Vec<Family>>,
    /// Comma-separated characteristics to use.
    #[arg(long, value_delimiter = ',')]
    chars: Option<Vec<u64>>,
}

#[derive(Args)]
struct WitnessArgs {
    #[command(flatten)]
    common: Common,
    /// JSON file `{"columns": [[...], ...]}`, column g holding d(g).
    #[arg(long)]
    derivation: PathBuf,
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse()
}

fn parse_char(s: &str) -> Result<FieldSpec, String> {
    let c: u64 = s.parse().map_err(|_| format!("{s:?} is not a natural number"))?;
    make_field(c).map_err(|e| e.to_string())
}

fn parse_format(s: &str) -> Result<Format, String> {
    s.parse()
}

fn config(command: Command, c: &Common) -> RunConfig {
    let mut cfg = RunConfig::new(command);
    cfg.source = match (&c.family, c.n, &c.cayley) {
        (Some(family), Some(n), _) => Some(GroupSource::Family { family: *family, n }),
        (_, _, Some(path)) => Some(GroupSource::Cayley(path.clone())),
        _ => None,
    };
    cfg.field = c.characteristic;
    cfg.format = c.format;
    cfg.parallel = c.parallel;
    cfg.allow_degenerate = c.allow_degenerate;
    cfg.inner_only = c.inner_only;
    cfg
}

fn build(cli: Cli) -> Result<(RunConfig, Option<PathBuf>), report::CliError> {
    Ok(match cli.command {
        Cmd::Classes(c) => (config(Command::Classes, &c), c.out),
        Cmd::Dimensions(c) => (config(Command::Dimensions, &c), c.out),
        Cmd::Verify(c) => (config(Command::Verify, &c), c.out),
        Cmd::Sweep(s) => {
            let mut cfg = config(Command::Sweep, &s.common);
            if let Ok(doc) = std::env::var("DERIVA_GRID") {
                cfg.grid = Grid::from_json(&doc)?;
            }
            cfg.grid.restrict(s.families.as_deref(), s.chars.as_deref());
            (cfg, s.common.out)
        }
        Cmd::Witness(w) => {
            let mut cfg = config(Command::Witness, &w.common);
            cfg.derivation = Some(w.derivation);
            (cfg, w.common.out)
        }
    })
}

fn emit(text: &str, out: Option<&PathBuf>) -> anyhow::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let (cfg, out) = match build(cli) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("error: {e}");
            process::exit(e.code as i32);
        }
    };
    match report::run(&cfg) {
        Ok(output) => {
            if let Err(e) = emit(&output.text, out.as_ref()) {
                eprintln!("error: {e:#}");
                process::exit(ExitCode::InvalidInput as i32);
            }
            process::exit(output.code as i32);
        }
        Err(e) => {
            eprintln!("error: {e}");
            process::exit(e.code as i32);
        }
    }
}
