//! Command-line interface. Each subcommand is a thin composition of library calls.

use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::indicators::{analyze, Indicator};
use crate::io::{load_document, render_report, ExportFormat, FrontDocument, Precision};
use crate::model::{AttributeKey, BoundKind, BoundSpec, BoundValue, LevelPolicy, ObjectiveSpec, ProblemConfig};
use crate::run::run;
use crate::solvers::{Algorithm, SolverParams, DEFAULT_CAP};

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Parser)]
#[command(name = "nrp", version, about = "Pick requirements for the next release")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a problem file; diagnostics go to stderr.
    Validate { file: PathBuf },
    /// Preprocess and solve a problem file, writing the Pareto front.
    Solve(SolveArgs),
    /// Handpick near-bound solutions from a front and score them.
    Analyze(AnalyzeArgs),
    /// Serve the HTTP API (and the explorer UI, if given).
    Serve(ServeArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AlgoArg {
    Exhaustive,
    Greedy,
    Hillclimb,
}

impl From<AlgoArg> for Algorithm {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::Exhaustive => Algorithm::Exhaustive,
            AlgoArg::Greedy => Algorithm::Greedy,
            AlgoArg::Hillclimb => Algorithm::HillClimb,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum LevelArg {
    Leaf,
    Root,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub file: PathBuf,
    #[arg(long, value_enum, default_value_t = AlgoArg::Exhaustive)]
    pub algo: AlgoArg,
    /// Seed for the hill climber.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Front file to write; without it the front goes to stdout.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Replace the file's objectives (together with --minimize).
    #[arg(long, value_delimiter = ',')]
    pub maximize: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    pub minimize: Vec<String>,
    /// Replace the file's bounds, e.g. `effort<=14`, `value>=3`, `effort<=21%`.
    #[arg(long = "bound", value_parser = parse_bound)]
    pub bounds: Vec<BoundSpec>,
    #[arg(long, value_enum)]
    pub level: Option<LevelArg>,
    #[arg(long, default_value_t = DEFAULT_CAP)]
    pub cap: usize,
    #[arg(long, default_value_t = 32)]
    pub restarts: usize,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_iters: u64,
    /// Greedy: also construct from every single requirement.
    #[arg(long)]
    pub seeded: bool,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    pub front: PathBuf,
    /// Number of solutions closest to the bound to keep.
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
    pub near_bound: u64,
    /// Comma-separated indicators; omit for the defaults, pass "" for none.
    #[arg(long, value_parser = parse_indicator_list)]
    pub indicators: Option<IndicatorList>,
    /// Attribute whose bound drives handpicking (defaults to the first upper bound).
    #[arg(long)]
    pub attribute: Option<String>,
    #[arg(long, value_enum, default_value_t = FormatArg::Table)]
    pub format: FormatArg,
    /// Decimals for ratio columns.
    #[arg(long, default_value_t = 2)]
    pub ratio_decimals: usize,
    /// Decimals for percentage columns.
    #[arg(long, default_value_t = 0)]
    pub percent_decimals: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Table,
    Csv,
    Json,
}

#[derive(Clone, Debug)]
pub struct IndicatorList(pub Vec<Indicator>);

fn parse_indicator_list(s: &str) -> std::result::Result<IndicatorList, String> {
    crate::indicators::parse_indicators(s)
        .map(IndicatorList)
        .map_err(|e| e.to_string())
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: IpAddr,
    /// Directory of problem files.
    #[arg(long, env = "NRP_DATA_DIR", default_value = "datasets")]
    pub data_dir: PathBuf,
    /// Static explorer UI assets.
    #[arg(long, env = "NRP_UI_DIR")]
    pub ui_dir: Option<PathBuf>,
}

/// Parses `attr<=v`, `attr>=v` and `attr<=p%`.
pub fn parse_bound(s: &str) -> std::result::Result<BoundSpec, String> {
    let (attr, kind, rest) = if let Some((a, r)) = s.split_once("<=") {
        (a, BoundKind::Upper, r)
    } else if let Some((a, r)) = s.split_once(">=") {
        (a, BoundKind::Lower, r)
    } else {
        return Err(format!("bound `{s}` must look like attr<=value or attr>=value"));
    };
    let attr = attr.trim();
    let rest = rest.trim();
    if attr.is_empty() {
        return Err(format!("bound `{s}` names no attribute"));
    }
    let value = match rest.strip_suffix('%') {
        Some(p) => BoundValue::Fraction(p.trim().parse::<f64>().map_err(|e| format!("bound `{s}`: {e}"))? / 100.0),
        None => BoundValue::Absolute(rest.parse::<f64>().map_err(|e| format!("bound `{s}`: {e}"))?),
    };
    Ok(BoundSpec {
        attribute: AttributeKey::parse(attr),
        kind,
        value,
    })
}

/// Domain failures exit 1; clap handles usage errors with exit 2.
pub fn execute(cli: Cli) -> ExitCode {
    let result = match cli.command {
        Command::Validate { file } => validate(&file),
        Command::Solve(args) => solve(args),
        Command::Analyze(args) => analyze_cmd(args),
        Command::Serve(args) => serve(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn validate(file: &PathBuf) -> Result<ExitCode> {
    let doc = load_document(file)?;
    if doc.diagnostics.is_empty() {
        println!(
            "{}: ok ({} requirements, {} stakeholders)",
            doc.catalog.name,
            doc.catalog.requirements.len(),
            doc.catalog.stakeholders.len()
        );
        return Ok(ExitCode::SUCCESS);
    }
    for d in &doc.diagnostics {
        eprintln!("{}: {d}", file.display());
    }
    Ok(ExitCode::from(1))
}

fn solve_config(args: &SolveArgs, base: Option<ProblemConfig>) -> ProblemConfig {
    let mut config = base.unwrap_or_default();
    if !args.maximize.is_empty() || !args.minimize.is_empty() {
        config.objectives = args
            .maximize
            .iter()
            .map(|a| ObjectiveSpec::maximize(a))
            .chain(args.minimize.iter().map(|a| ObjectiveSpec::minimize(a)))
            .collect();
    }
    if !args.bounds.is_empty() {
        config.bounds = args.bounds.clone();
    }
    match args.level {
        Some(LevelArg::Leaf) => config.level = LevelPolicy::Leaf,
        Some(LevelArg::Root) => config.level = LevelPolicy::Root,
        None => {}
    }
    config
}

fn solve(args: SolveArgs) -> Result<ExitCode> {
    let doc = load_document(&args.file)?;
    if !doc.diagnostics.is_empty() {
        return Err(Error::InvalidCatalog(doc.diagnostics));
    }
    let config = solve_config(&args, doc.config.clone());
    let algorithm: Algorithm = args.algo.into();
    let mut params = SolverParams {
        exhaustive_cap: args.cap,
        ..Default::default()
    };
    params.hillclimb.seed = args.seed;
    params.hillclimb.restarts = args.restarts;
    params.hillclimb.max_iters = args.max_iters as usize;
    params.greedy.seeded = args.seeded;

    let start = Instant::now();
    let front = run(&doc.catalog, &config, algorithm, &params)?;
    let elapsed = start.elapsed();
    let json = front.to_json()?;

    let mut summary = format!("{} solutions", front.solutions.len());
    if front.branches > 1 {
        summary.push_str(&format!(" across {} branches", front.branches));
    }
    summary.push_str(&format!(" ({}", algorithm.name()));
    if algorithm.is_stochastic() {
        summary.push_str(&format!(", seed {}", args.seed));
    }
    summary.push_str(&format!(") in {:.3} s", elapsed.as_secs_f64()));

    match &args.out {
        Some(path) => {
            std::fs::write(path, json)?;
            println!("{summary}");
            println!("front written to {}", path.display());
        }
        None => {
            std::io::stdout().write_all(json.as_bytes())?;
            eprintln!("{summary}");
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn analyze_cmd(args: AnalyzeArgs) -> Result<ExitCode> {
    let front = FrontDocument::load(&args.front)?;
    let ctx = front.context();
    let indicators = match args.indicators {
        Some(IndicatorList(list)) => list,
        None => ctx.default_indicators(),
    };
    let attribute = args.attribute.as_deref().map(AttributeKey::parse);
    let report = analyze(&front.front(), &ctx, args.near_bound as usize, &indicators, attribute.as_ref())?;
    let precision = Precision {
        ratio: args.ratio_decimals,
        percent: args.percent_decimals,
    };
    let text = match args.format {
        FormatArg::Table => render_report(&report, ExportFormat::Table, precision)?,
        FormatArg::Csv => render_report(&report, ExportFormat::Delimited, precision)?,
        FormatArg::Json => {
            let mut s = serde_json::to_string_pretty(&report).map_err(|e| Error::schema("report", e.to_string()))?;
            s.push('\n');
            s
        }
    };
    std::io::stdout().write_all(text.as_bytes())?;
    Ok(ExitCode::SUCCESS)
}

fn serve(args: ServeArgs) -> Result<ExitCode> {
    let runtime = tokio::runtime::Runtime::new()?;
    let addr = SocketAddr::new(args.host, args.port);
    runtime
        .block_on(crate::service::serve(addr, args.data_dir, args.ui_dir))
        .map_err(|e| {
            Error::Io(std::io::Error::new(e.kind(), format!("cannot serve on {addr}: {e}")))
        })?;
    Ok(ExitCode::SUCCESS)
}
