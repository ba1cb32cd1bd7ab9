use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use psh_lab::config::{RunConfig, Suite};
use psh_lab::report::curves_csv;
use psh_lab::suites::run_suites;
use psh_lab::LabError;

/// Verification suites for plurisubharmonic interpolants and reverse
/// isoperimetric inequalities in the flat model.
#[derive(Parser, Debug)]
#[command(name = "psh-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Random points per lemma sweep (overrides the config).
    #[arg(long, global = true)]
    points: Option<usize>,
    /// Random seed (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory receiving the report and the sweep CSV.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Print only the summary line.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Eigenstructure lemmas, the product identity and strict plurisubharmonicity.
    VerifyLemmas,
    /// Negative Levi eigenvalues for a cutoff violating the convexity condition.
    Counterexample,
    /// Searches for D and C0, the Duval conditions and the sweep over r.
    Constants,
    /// Curve family: K table and monotonicity.
    Curves,
    /// Every suite listed in the config.
    All,
}

const USAGE: u8 = 2;

fn is_config_error(e: &LabError) -> bool {
    matches!(
        e,
        LabError::Config(_) | LabError::Params(_) | LabError::InvalidCurve(_) | LabError::Json(_)
    )
}

fn run(cli: Cli) -> Result<bool, (u8, String)> {
    let usage = |e: LabError| (USAGE, e.to_string());
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path).map_err(usage)?,
        None => RunConfig::default(),
    };
    if let Some(p) = cli.points {
        config.grids.lemma_points = p;
    }
    if let Some(s) = cli.seed {
        config.seed = s;
    }
    let warnings = config.validate().map_err(usage)?;
    let suites = match cli.command {
        Command::VerifyLemmas => vec![Suite::Lemmas],
        Command::Counterexample => vec![Suite::Counterexample],
        Command::Constants => vec![Suite::Construction, Suite::Constants],
        Command::Curves => vec![Suite::Curves],
        Command::All => config.suites.clone(),
    };
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let quiet = cli.quiet;
    let mut log = |c: &psh_lab::report::CheckRecord| {
        if !quiet {
            println!("{}", c.line());
        }
    };
    let report = run_suites(&config, &suites, warnings, &mut log).map_err(|e| {
        if is_config_error(&e) {
            (USAGE, e.to_string())
        } else {
            (1, e.to_string())
        }
    })?;

    let io = |e: std::io::Error| (1, format!("{}: {e}", cli.out.display()));
    std::fs::create_dir_all(&cli.out).map_err(io)?;
    let report_path = cli.out.join(&config.output.report);
    std::fs::write(&report_path, report.to_json()).map_err(io)?;
    if suites.contains(&Suite::Curves) {
        std::fs::write(
            cli.out.join(&config.output.csv),
            curves_csv(&report.curve_rows),
        )
        .map_err(io)?;
    }
    println!("{} (report: {})", report.summary(), report_path.display());
    Ok(report.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
