//! `wowarp`: generate synthetic series, align pairs, run paired benchmarks
//! and dump diffusion wavelet trees.

mod bench;
mod config;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::Result;
use clap::{CommandFactory, Parser, Subcommand};
use wowarp::data::{
    alignment_error, gen_synthetic_with_latent, load_timeseries_csv, synthetic_pair, write_matrix_csv,
    AlignmentPath, Synthetic, SyntheticKind, TimeSeries,
};
use wowarp::graph::laplacians;
use wowarp::warp::{self, BaselineVariant, WarpConfig, WarpResult};
use wowarp::wavelets::build_dwt;

/// Error with a stable code for the diagnostic line.
#[derive(Debug)]
pub struct CliError {
    code: &'static str,
    message: String,
}

impl CliError {
    pub fn new(code: &'static str, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Dtw,
    Wow,
    Wamm,
    Cw,
    Cw2,
    MwLinear,
    MwNonlinear,
    MwTwoStep,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::Dtw,
        Method::Wow,
        Method::Wamm,
        Method::Cw,
        Method::Cw2,
        Method::MwLinear,
        Method::MwNonlinear,
        Method::MwTwoStep,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Dtw => "dtw",
            Method::Wow => "wow",
            Method::Wamm => "wamm",
            Method::Cw => "cw",
            Method::Cw2 => "cw2",
            Method::MwLinear => "mw-linear",
            Method::MwNonlinear => "mw-nonlinear",
            Method::MwTwoStep => "mw-two-step",
        }
    }

    pub fn run(self, x: &TimeSeries, y: &TimeSeries, cfg: &WarpConfig) -> wowarp::Result<WarpResult> {
        match self {
            Method::Dtw => warp::dtw_baseline(x, y),
            Method::Wow => warp::wow(x, y, cfg),
            Method::Wamm => warp::wamm(x, y, cfg),
            Method::Cw => warp::curve_warp(x, y, cfg, false),
            Method::Cw2 => warp::curve_warp(x, y, cfg, true),
            Method::MwLinear => warp::manifold_warp_baseline(x, y, cfg, BaselineVariant::Linear),
            Method::MwNonlinear => warp::manifold_warp_baseline(x, y, cfg, BaselineVariant::Nonlinear),
            Method::MwTwoStep => warp::manifold_warp_baseline(x, y, cfg, BaselineVariant::TwoStep),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Self::ALL.into_iter().find(|m| m.as_str() == s).ok_or_else(|| {
            let all: Vec<&str> = Self::ALL.iter().map(|m| m.as_str()).collect();
            format!("unknown method {s:?} (expected one of {})", all.join(", "))
        })
    }
}

fn parse_kind(s: &str) -> std::result::Result<SyntheticKind, String> {
    s.parse().map_err(|_| {
        let all: Vec<&str> = SyntheticKind::ALL.iter().map(|k| k.as_str()).collect();
        format!("unknown kind {s:?} (expected one of {})", all.join(", "))
    })
}

#[derive(Parser)]
#[command(name = "wowarp", version, about = "Multiscale manifold alignment of time series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic series (or, with --pair-kind, an aligned pair)
    Gen {
        #[arg(long, value_parser = parse_kind)]
        kind: SyntheticKind,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// second generator; writes x.csv, y.csv and truth.csv into --out
        #[arg(long, value_parser = parse_kind)]
        pair_kind: Option<SyntheticKind>,
        /// length of the second series (default: n)
        #[arg(long)]
        m: Option<usize>,
        /// CSV file, or directory with --pair-kind
        #[arg(long)]
        out: PathBuf,
    },
    /// Align two series and write the result directory
    Align {
        #[arg(long, default_value = "wow")]
        method: Method,
        #[arg(long)]
        x: PathBuf,
        #[arg(long)]
        y: PathBuf,
        /// ground-truth path CSV (i,j); adds alignment_error.txt
        #[arg(long)]
        truth: Option<PathBuf>,
        #[command(flatten)]
        cfg: config::CfgFlags,
        #[arg(long)]
        out: PathBuf,
    },
    /// Paired benchmark over seeded trials
    Bench {
        /// key=value experiment spec
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        cfg: config::CfgFlags,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build and dump the diffusion wavelet tree of a series' graph
    Tree {
        #[arg(long)]
        x: PathBuf,
        #[command(flatten)]
        cfg: config::CfgFlags,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Reads a series CSV, skipping a header row when the first cell is not
/// numeric.
pub fn load_series(path: &Path) -> Result<TimeSeries> {
    let text = config::read_text(path)?;
    let first = text.lines().next().unwrap_or("");
    let header = first
        .split(',')
        .next()
        .is_some_and(|c| c.trim().parse::<f64>().is_err());
    Ok(load_timeseries_csv(path, header)?)
}

fn io_at(path: &Path) -> impl FnOnce(std::io::Error) -> anyhow::Error + '_ {
    move |source| {
        wowarp::Error::Io {
            path: path.to_path_buf(),
            source,
        }
        .into()
    }
}

fn create(path: &Path) -> Result<std::fs::File> {
    std::fs::File::create(path).map_err(io_at(path))
}

fn mkdir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(io_at(path))
}

fn write_series(s: &Synthetic, path: &Path) -> Result<()> {
    let header: Vec<String> = (1..=s.series.dim()).map(|c| format!("x{c}")).collect();
    write_matrix_csv(s.series.samples(), Some(&header), create(path)?)?;
    let sidecar = path.with_extension("latent.csv");
    s.write_latent_csv(create(&sidecar)?)?;
    Ok(())
}

fn cmd_gen(
    kind: SyntheticKind,
    n: usize,
    noise: f64,
    seed: u64,
    pair_kind: Option<SyntheticKind>,
    m: Option<usize>,
    out: &Path,
) -> Result<()> {
    match pair_kind {
        None => {
            if m.is_some() {
                return Err(CliError::new("E_USAGE", "--m needs --pair-kind").into());
            }
            if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
                mkdir(dir)?;
            }
            write_series(&gen_synthetic_with_latent(kind, n, noise, seed)?, out)
        }
        Some(ky) => {
            let p = synthetic_pair(kind, ky, n, m.unwrap_or(n), noise, seed)?;
            mkdir(out)?;
            write_series(&p.x, &out.join("x.csv"))?;
            write_series(&p.y, &out.join("y.csv"))?;
            p.truth.write_csv(create(&out.join("truth.csv"))?)?;
            Ok(())
        }
    }
}

fn cmd_align(
    method: Method,
    x: &Path,
    y: &Path,
    truth: Option<&Path>,
    flags: &config::CfgFlags,
    out: &Path,
) -> Result<()> {
    let cfg = flags.resolve(&Default::default())?;
    let xs = load_series(x)?;
    let ys = load_series(y)?;
    let truth = truth.map(AlignmentPath::read_csv).transpose()?;
    let res = method.run(&xs, &ys, &cfg)?;
    mkdir(out)?;
    res.write_dir(out, &cfg, method.as_str())?;
    if let Some(t) = truth {
        let t = AlignmentPath::with_shape(t.pairs().to_vec(), xs.len(), ys.len())?;
        let err = alignment_error(&res.path, &t)?;
        std::fs::write(out.join("alignment_error.txt"), format!("{err}\n"))?;
        println!("alignment_error={err}");
    }
    println!("iterations={} converged={}", res.iterations, res.converged);
    Ok(())
}

fn cmd_bench(spec: &Path, trials: Option<usize>, seed: Option<u64>, flags: &config::CfgFlags, out: &Path) -> Result<()> {
    let spec = bench::ExperimentSpec::load(spec, flags, trials, seed)?;
    let report = bench::run(&spec)?;
    mkdir(out)?;
    report.write_dir(out, &spec)?;
    print!("{}", std::fs::read_to_string(out.join("summary.txt"))?);
    Ok(())
}

fn cmd_tree(x: &Path, flags: &config::CfgFlags, out: &Path) -> Result<()> {
    let cfg = flags.resolve(&Default::default())?;
    let xs = load_series(x)?;
    let w = warp::series_graph(xs.samples(), &cfg, cfg.graph_kind)?;
    let t = laplacians(&w)?.diffusion;
    let tree = build_dwt(&t, None, cfg.epsilon, cfg.max_levels)?;
    mkdir(out)?;
    tree.write_dir(out)?;
    let dims: Vec<String> = tree.dims().iter().map(|d| d.to_string()).collect();
    println!("dims={}", dims.join(","));
    Ok(())
}

fn error_code(e: &anyhow::Error) -> &'static str {
    for cause in e.chain() {
        if let Some(c) = cause.downcast_ref::<CliError>() {
            return c.code;
        }
        if let Some(w) = cause.downcast_ref::<wowarp::Error>() {
            return w.code();
        }
        if cause.is::<std::io::Error>() {
            return "E_IO";
        }
    }
    "E_FAILED"
}

/// The error chain on one line, skipping causes already quoted by the
/// message before them.
fn describe(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain() {
        let msg = cause.to_string();
        if out.ends_with(&msg) {
            continue;
        }
        if !out.is_empty() {
            out.push_str(": ");
        }
        out.push_str(&msg);
    }
    out
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            if !e.use_stderr() {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            eprintln!("error[E_USAGE]: invalid command line");
            let _ = e.print();
            let mut cmd = Cli::command();
            let sub = std::env::args().nth(1).unwrap_or_default();
            let usage = match cmd.find_subcommand_mut(&sub) {
                Some(sc) => sc.clone().bin_name(format!("wowarp {sub}")).render_usage(),
                None => cmd.render_usage(),
            };
            eprintln!("{usage}");
            return ExitCode::from(2);
        }
    };
    let result = match &cli.command {
        Command::Gen {
            kind,
            n,
            noise,
            seed,
            pair_kind,
            m,
            out,
        } => cmd_gen(*kind, *n, *noise, *seed, *pair_kind, *m, out),
        Command::Align {
            method,
            x,
            y,
            truth,
            cfg,
            out,
        } => cmd_align(*method, x, y, truth.as_deref(), cfg, out),
        Command::Bench {
            spec,
            trials,
            seed,
            cfg,
            out,
        } => cmd_bench(spec, *trials, *seed, cfg, out),
        Command::Tree { x, cfg, out } => cmd_tree(x, cfg, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {}", error_code(&e), describe(&e));
            ExitCode::FAILURE
        }
    }
}
