use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use rinverse::geometry::{fixture, fixture_names};
use rinverse::harness::{
    emit, evaluate, HarnessError, Mode, OutputFormat, ResidualReport, Scenario, EXIT_CONFIG, EXIT_FAIL, EXIT_PASS,
};

#[derive(Parser)]
#[command(name = "rinverse", version, about = "Right inverses of directional operators on Whitney jets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its residual report.
    Run {
        scenario: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
        #[arg(long)]
        jet_order: Option<usize>,
        #[arg(long)]
        quad_tol: Option<f64>,
    },
    /// Evaluate only the identity rows of a scenario.
    Verify {
        scenario: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Bundled fixtures.
    Fixtures {
        #[command(subcommand)]
        action: FixturesAction,
    },
}

#[derive(Subcommand)]
enum FixturesAction {
    List,
}

fn init_threads() -> Result<(), HarnessError> {
    let Ok(value) = std::env::var("RINVERSE_THREADS") else {
        return Ok(());
    };
    let n: usize = value.trim().parse().map_err(|_| HarnessError::Config {
        message: format!("RINVERSE_THREADS must be a positive integer, got {value:?}"),
    })?;
    if n == 0 {
        return Err(HarnessError::Config {
            message: "RINVERSE_THREADS must be positive".into(),
        });
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| HarnessError::Config { message: e.to_string() })
}

fn summarize(report: &ResidualReport) {
    for c in &report.checks {
        let dev = c.max_deviation.map_or("failed".to_string(), |d| format!("{d:.3e}"));
        let mark = if c.pass { "ok  " } else { "FAIL" };
        println!("{mark} {:<24} {dev:>10}  (tol {:.0e})", c.name, c.tolerance);
    }
    for e in &report.errors {
        println!("error: {e}");
    }
    println!(
        "{}: {} ({} points)",
        report.scenario,
        if report.pass { "PASS" } else { "FAIL" },
        report.points.len()
    );
}

fn execute(
    path: &Path,
    mode: Mode,
    out: Option<PathBuf>,
    format: Option<Format>,
    jet_order: Option<usize>,
    quad_tol: Option<f64>,
) -> Result<i32, HarnessError> {
    let mut scenario = Scenario::load(path)?;
    if let Some(m) = jet_order {
        scenario.jet_order = m;
    }
    if let Some(t) = quad_tol {
        scenario.quadrature.tol = t;
    }
    let resolved = scenario.resolve()?;
    let (report, timings) = evaluate(&resolved, mode);
    let spec = scenario.output.clone();
    let dir = out
        .or_else(|| spec.as_ref().and_then(|s| s.dir.clone()))
        .unwrap_or_else(|| PathBuf::from("."));
    let format = match format {
        Some(Format::Json) => OutputFormat::Json,
        Some(Format::Csv) => OutputFormat::Csv,
        None => spec.and_then(|s| s.format).unwrap_or(OutputFormat::Json),
    };
    let written = emit(&report, Some(&timings), &format, &dir)?;
    summarize(&report);
    for p in written {
        log::info!("wrote {}", p.display());
    }
    Ok(if report.pass { EXIT_PASS } else { EXIT_FAIL })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = init_threads().and_then(|()| match cli.command {
        Command::Run {
            scenario,
            out,
            format,
            jet_order,
            quad_tol,
        } => execute(&scenario, Mode::Run, out, format, jet_order, quad_tol),
        Command::Verify { scenario, out, format } => execute(&scenario, Mode::Verify, out, format, None, None),
        Command::Fixtures {
            action: FixturesAction::List,
        } => {
            for name in fixture_names() {
                let ds = fixture(name).map_err(|e| HarnessError::Config { message: e.to_string() })?;
                let d = &ds[0];
                println!(
                    "{name:<12} dim {} direction {:?} base samples {}",
                    d.dim(),
                    d.direction(),
                    d.base_samples().len()
                );
            }
            Ok(EXIT_PASS)
        }
    });
    let code = match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("rinverse: {e}");
            e.exit_code()
        }
    };
    debug_assert!([EXIT_PASS, EXIT_FAIL, EXIT_CONFIG].contains(&code));
    ExitCode::from(code as u8)
}
