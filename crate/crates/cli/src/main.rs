//! `cohpert` command-line front end: reproduction scenarios, single checks
//! and parameter scans with CSV/JSON output.

mod config;
mod error;
mod output;
mod scenarios;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use cohpert::Tolerances;

use config::{parse_key_value, Grid, ScenarioConfig, ScenarioName};
use error::{CliError, CliResult};

const CSV_HELP: &str = "\
CSV columns (header row, `.` decimals, 17 significant digits, empty = not applicable):
  parameter        swept value (p, gamma, q, or the custom `scan_param`)
  criterion        decisive criterion: C1, C2, C3, THM1_FULLRANK, THM2_FULL2
  verdict          fires | fails | inapplicable
  margin           sense-adjusted margin; fires when above the decision tolerance
  lhs, rhs         the two sides of the criterion inequality, positive-f orientation
  ic_base          coherent information (bits) at the reference input:
                     depolarizing-n2, platypus-ad: single-letter sum at the optimal states
                     gap-depolarizing, hashing-curve: I_c(I/2) of the channel
                     dephrasure-gap: best value on the diagonal line
                     custom: I_c at the family base state
  ic_probe         depolarizing-n2, platypus-ad: product-channel I_c at the witness
                   dephrasure-gap: best complement I_c over qubit inputs
  conclusion       superadditive | gap_detected | inconclusive
  witness_epsilon  epsilon of the numeric witness
  witness_f        f(epsilon) in bits at the witness
  admissible_r     largest r with sigma - r rho(epsilon) >= 0 (gap-depolarizing)

Exit status is 0 whenever the run completes, whatever the verdicts; 1 on errors.";

#[derive(Debug, Parser)]
#[command(name = "cohpert", version, about = "Coherent-information perturbation criteria and scans", after_long_help = CSV_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Directory for report files.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Scan grid as lo:hi:steps, overriding the config or scenario default.
    #[arg(long, global = true, value_parser = parse_grid)]
    grid: Option<Grid>,

    /// Seed for randomly generated families.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Both)]
    format: Format,

    /// Tolerance override, e.g. `decision=1e-8`. Repeatable.
    #[arg(long = "tol", global = true, value_parser = parse_pair)]
    tolerances: Vec<(String, f64)>,

    /// Scenario parameter override, e.g. `p=0.15`. Repeatable.
    #[arg(long = "param", global = true, value_parser = parse_pair)]
    params: Vec<(String, f64)>,

    /// Worker threads for grid evaluation (0 = all cores).
    #[arg(long, global = true, env = "COHPERT_JOBS")]
    jobs: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a named scenario over its default grid and write reports.
    Scenario {
        #[arg(value_enum)]
        name: ScenarioName,
    },
    /// Evaluate a config at a single point and print JSON to stdout.
    Check { config: PathBuf },
    /// Scan a config over its grid and write reports.
    Scan { config: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Both,
}

fn parse_grid(s: &str) -> Result<Grid, String> {
    s.parse().map_err(|e: CliError| e.to_string())
}

fn parse_pair(s: &str) -> Result<(String, f64), String> {
    parse_key_value(s).map_err(|e| e.to_string())
}

fn tolerances(overrides: &[(String, f64)]) -> CliResult<Tolerances> {
    let mut tol = Tolerances::default();
    for (k, v) in overrides {
        tol.set(k, *v).map_err(|e| CliError::Argument {
            arg: format!("{k}={v}"),
            message: e.to_string(),
        })?;
    }
    Ok(tol)
}

fn write_reports(cli: &Cli, cfg: &ScenarioConfig, run: &scenarios::ScenarioRun) -> CliResult<()> {
    let name = run.scenario.as_str();
    if cli.format != Format::Json {
        let path = output::resolve(&cli.out, cfg.output.csv.as_deref(), format!("{name}.csv"));
        output::write_file(&path, &output::csv_bytes(&run.rows)?)?;
        println!("wrote {}", path.display());
    }
    if cli.format != Format::Csv {
        let path = output::resolve(&cli.out, cfg.output.json.as_deref(), format!("{name}.json"));
        let mut bytes = serde_json::to_vec_pretty(&run.report)?;
        bytes.push(b'\n');
        output::write_file(&path, &bytes)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn scan(cli: &Cli, cfg: &ScenarioConfig, tol: &Tolerances) -> CliResult<()> {
    let grid = cfg
        .grid
        .or_else(|| scenarios::axis(cfg.scenario).2)
        .ok_or_else(|| CliError::Invalid("no grid: set `grid` in the config or pass --grid".into()))?;
    let run = scenarios::run_scan(cfg, &grid, tol)?;
    write_reports(cli, cfg, &run)
}

fn run(cli: &Cli) -> CliResult<()> {
    let mut cfg = match &cli.command {
        Command::Scenario { name } => ScenarioConfig::named(*name),
        Command::Check { config } | Command::Scan { config } => ScenarioConfig::load(config)?,
    };
    cfg.params.extend(cli.params.iter().cloned());
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if cli.grid.is_some() {
        cfg.grid = cli.grid;
    }
    let tol = tolerances(&cli.tolerances)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Invalid(format!("thread pool: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Check { .. } => {
            let value = scenarios::run_check(&cfg, &tol)?;
            println!("{}", serde_json::to_string_pretty(&value)?);
            Ok(())
        }
        Command::Scenario { .. } | Command::Scan { .. } => scan(cli, &cfg, &tol),
    })
}

fn report_error(e: &CliError) {
    eprintln!("error: {e}");
    let mut source = std::error::Error::source(e);
    while let Some(s) = source {
        if !e.to_string().contains(&s.to_string()) {
            eprintln!("  caused by: {s}");
        }
        source = s.source();
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report_error(&e);
            ExitCode::FAILURE
        }
    }
}
