use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rmt_charpoly::harness::{selftest, Harness, OutputFormat, RunReport};
use rmt_charpoly::mc::{EntryDist, EntryKind, MCConfig};
use rmt_charpoly::oracle::EnsembleKind;
use rmt_charpoly::Error;

const EXIT_NUMERICAL: u8 = 2;
const EXIT_USAGE: u8 = 3;

/// Convergence tables for characteristic-polynomial correlations of Wigner matrices.
#[derive(Debug, Parser)]
#[command(name = "rmt-charpoly", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct Common {
    /// Kernel index α
    #[arg(long, global = true, default_value_t = 1.0)]
    alpha: f64,
    /// Fourth-moment parameter b*
    #[arg(long, global = true, default_value_t = 0.0)]
    bstar: f64,
    #[arg(
        long,
        global = true,
        default_value_t = 0.0,
        allow_negative_numbers = true
    )]
    mu: f64,
    #[arg(
        long,
        global = true,
        default_value_t = 0.0,
        allow_negative_numbers = true
    )]
    nu: f64,
    /// Single order N
    #[arg(long, global = true, conflicts_with = "n_list")]
    n: Option<u64>,
    /// Ascending list of orders, e.g. 125,1000,8000
    #[arg(long, global = true, value_delimiter = ',')]
    n_list: Option<Vec<u64>>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write the report here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Omit wall-clock timing so output is byte-reproducible
    #[arg(long, global = true)]
    deterministic: bool,
    /// Skip orders N ≥ 4096
    #[arg(long, global = true)]
    fast: bool,
}

#[derive(Debug, Args)]
struct McFlags {
    #[arg(long, value_enum, default_value_t = Ensemble::Hermitian)]
    ensemble: Ensemble,
    #[arg(long, value_enum, default_value_t = Dist::Gaussian)]
    dist: Dist,
    /// Probability of the positive atom for --dist two-point
    #[arg(long, default_value_t = 0.25)]
    p: f64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Edge-scaled f_N against exp(b*) I^(α)(μ, ν)
    Edge,
    /// Correlation coefficient at edge points against the kernel ratio
    Corr,
    /// Bulk-scaled f_N against the sine or T kernel
    Bulk {
        /// Bulk position ξ, |ξ| ≤ 1.8
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        xi: f64,
    },
    /// Monte Carlo estimates against the exact and contour values
    Mc {
        #[command(flatten)]
        flags: McFlags,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Evaluation points as mu:nu pairs; defaults to --mu:--nu
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, value_parser = parse_point)]
        points: Option<Vec<(f64, f64)>>,
    },
    /// Exact small-N values against contour extraction
    Oracle {
        #[command(flatten)]
        flags: McFlags,
    },
    /// Every limit kernel at (μ, ν) with a cross-check
    Kernel,
    /// Run the invariant suite and report pass/fail per group
    Selftest,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Ensemble {
    Hermitian,
    Symmetric,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Dist {
    Gaussian,
    Rademacher,
    Uniform,
    TwoPoint,
}

fn parse_point(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("expected mu:nu, got {s:?}"))?;
    let parse = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    Ok((parse(a)?, parse(b)?))
}

impl McFlags {
    fn ensemble(&self) -> EnsembleKind {
        match self.ensemble {
            Ensemble::Hermitian => EnsembleKind::Hermitian,
            Ensemble::Symmetric => EnsembleKind::RealSymmetric,
        }
    }

    fn dist(&self) -> Result<EntryDist, Error> {
        let kind = match self.dist {
            Dist::Gaussian => EntryKind::Gaussian,
            Dist::Rademacher => EntryKind::Rademacher,
            Dist::Uniform => EntryKind::Uniform,
            Dist::TwoPoint => EntryKind::TwoPoint { p: self.p },
        };
        EntryDist::for_ensemble(kind, self.ensemble())
    }
}

impl Common {
    fn orders(&self, default: &[u64]) -> Vec<u64> {
        let list = match (&self.n_list, self.n) {
            (Some(list), _) => list.clone(),
            (None, Some(n)) => vec![n],
            (None, None) => default.to_vec(),
        };
        if self.fast {
            list.into_iter().filter(|&n| n < 4096).collect()
        } else {
            list
        }
    }
}

enum Failure {
    Usage(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("RMT_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().map_err(|_| {
        Failure::Usage(format!(
            "RMT_THREADS must be a non-negative integer, got {raw:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::Usage(e.to_string()))
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), Failure> {
    match out {
        Some(path) => {
            fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli, line: String) -> Result<(), Failure> {
    configure_threads()?;
    let c = &cli.common;
    let format = match c.format {
        Format::Csv => OutputFormat::Csv,
        Format::Json => OutputFormat::Json,
    };

    if let Command::Selftest = cli.command {
        let report = selftest(c.fast);
        let text = match format {
            OutputFormat::Csv => report.to_string(),
            OutputFormat::Json => report.to_json(),
        };
        emit(&text, c.out.as_ref())?;
        return if report.passed() {
            Ok(())
        } else {
            Err(Failure::Numerical("selftest failed".into()))
        };
    }

    let mut harness = Harness::new()
        .deterministic(c.deterministic)
        .command_line(line);
    let report: RunReport = match &cli.command {
        Command::Edge => {
            harness.edge(c.alpha, c.bstar, c.mu, c.nu, &c.orders(&[125, 1000, 8000]))?
        }
        Command::Corr => harness.corr(c.alpha, c.bstar, c.mu, c.nu, &c.orders(&[1024, 4096]))?,
        Command::Bulk { xi } => harness.bulk(
            c.alpha,
            c.bstar,
            *xi,
            c.mu,
            c.nu,
            &c.orders(&[64, 128, 256]),
        )?,
        Command::Mc {
            flags,
            samples,
            seed,
            points,
        } => {
            let n = c.n.unwrap_or(4);
            if c.n_list.is_some() {
                return Err(Failure::Usage("mc takes a single --n".into()));
            }
            let cfg = MCConfig {
                ensemble: flags.ensemble(),
                dist: flags.dist()?,
                n: usize::try_from(n).map_err(|_| Failure::Usage(format!("--n {n} too large")))?,
                samples: *samples,
                seed: *seed,
                points: points.clone().unwrap_or_else(|| vec![(c.mu, c.nu)]),
            };
            harness.mc(&cfg)?
        }
        Command::Oracle { flags } => harness.oracle(
            flags.ensemble(),
            flags.dist()?,
            c.mu,
            c.nu,
            &c.orders(&[1, 2, 3, 4, 5]),
        )?,
        Command::Kernel => harness.kernel(c.alpha, c.mu, c.nu)?,
        Command::Selftest => unreachable!(),
    };
    emit(&report.render(format), c.out.as_ref())?;
    if report.warnings() > 0 {
        eprintln!(
            "rmt-charpoly: warning: {} row(s) ill-conditioned; see diagnostics",
            report.warnings()
        );
    }
    match report.flagged() {
        0 => Ok(()),
        k => Err(Failure::Numerical(format!(
            "{k} row(s) flagged; see diagnostics"
        ))),
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let line = std::iter::once("rmt-charpoly")
        .chain(argv.iter().skip(1).map(String::as_str))
        .collect::<Vec<_>>()
        .join(" ");
    match run(cli, line) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("rmt-charpoly: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("rmt-charpoly: {msg}");
            ExitCode::from(EXIT_NUMERICAL)
        }
    }
}
