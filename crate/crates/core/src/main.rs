use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use almost_hermitian::analysis::{DEFAULT_SAMPLES, DEFAULT_SEED, FD_TOL};
use almost_hermitian::chart::{parse_chart, Chart, FdConfig};
use almost_hermitian::models::{all_models, model};
use almost_hermitian::report::{analyze, check_expectations, AnalysisOptions, Target, FIXTURE_TOL};
use almost_hermitian::selftest;

/// Curvature diagnostics for almost Hermitian manifolds given in a chart.
#[derive(Parser)]
#[command(name = "ahm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze a bundled model or a chart file at one or more points.
    Analyze(AnalyzeArgs),
    /// List the bundled models with their expected results.
    Models {
        /// Print the chart file of one model instead of the table.
        #[arg(long, value_name = "NAME")]
        emit: Option<String>,
    },
    /// Run the algebraic property suite.
    Selftest {
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Random instances per check.
        #[arg(long, default_value_t = 200)]
        instances: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(clap::Args)]
struct AnalyzeArgs {
    #[arg(long, conflicts_with = "chart", required_unless_present = "chart")]
    model: Option<String>,
    #[arg(long)]
    chart: Option<PathBuf>,
    /// Comma-separated coordinates; repeat for several points. Defaults to
    /// the points listed by the model or chart.
    #[arg(long = "point", value_name = "V1,V2,...", value_parser = parse_point, allow_hyphen_values = true)]
    points: Vec<Vec<f64>>,
    #[arg(long, default_value_t = FD_TOL)]
    tol: f64,
    #[arg(long, default_value_t = FdConfig::default().step)]
    fd_step: f64,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

fn parse_point(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}")))
        .collect()
}

const EXIT_CHECKS_FAILED: u8 = 1;
const EXIT_ERROR: u8 = 2;

fn run_analyze(args: AnalyzeArgs) -> Result<u8, String> {
    let (chart, target, expected): (Arc<dyn Chart>, Target, _) = match (&args.model, &args.chart) {
        (Some(name), _) => {
            let d = model(name).map_err(|e| e.to_string())?;
            let target = Target {
                kind: "model",
                name: d.name.clone(),
                complex_dim: d.chart.complex_dim(),
            };
            (d.chart.clone(), target, Some(d.expected))
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            let chart = parse_chart(&text).map_err(|e| format!("{}: {e}", path.display()))?;
            let target = Target {
                kind: "chart",
                name: path.display().to_string(),
                complex_dim: chart.complex_dim(),
            };
            (Arc::new(chart), target, None)
        }
        (None, None) => return Err("one of --model or --chart is required".into()),
    };
    let points = if args.points.is_empty() {
        chart.default_points()
    } else {
        args.points
    };
    let opts = AnalysisOptions {
        tol: args.tol,
        fd_step: args.fd_step,
        samples: args.samples,
        seed: args.seed,
        fixture_tol: FIXTURE_TOL,
    };
    let mut report = analyze(chart.as_ref(), target, &points, &opts).map_err(|e| e.to_string())?;
    if let Some(expected) = &expected {
        report.global.checks = Some(check_expectations(&report, expected));
    }
    match args.format {
        Format::Text => print!("{}", report.to_text()),
        Format::Json => println!("{}", report.to_json()),
    }
    Ok(if report.passed() { 0 } else { EXIT_CHECKS_FAILED })
}

fn run_models(emit: Option<String>) -> Result<u8, String> {
    if let Some(name) = emit {
        let d = model(&name).map_err(|e| e.to_string())?;
        let text = d
            .chart_text
            .ok_or_else(|| format!("{name} is evaluated natively and has no chart file"))?;
        print!("{text}");
        return Ok(0);
    }
    println!(
        "{:<7} {:<6} {:<22} {:<14} {:<14} {:<14} {:<28} summary",
        "name", "dim", "K NK AK AH1 AH2 AH3", "antiholo", "holo", "einstein", "verdict"
    );
    for d in all_models() {
        let e = &d.expected;
        let flags: Vec<&str> = e.flags.as_array().iter().map(|(_, ok)| if *ok { "y" } else { "n" }).collect();
        println!(
            "{:<7} {:<6} {:<22} {:<14} {:<14} {:<14} {:<28} {}",
            d.name,
            d.chart.complex_dim(),
            flags.join(" "),
            e.antiholomorphic.to_string(),
            e.holomorphic.to_string(),
            e.einstein.to_string(),
            e.verdict.to_string(),
            d.summary
        );
    }
    Ok(0)
}

fn run_selftest(seed: u64, instances: usize) -> Result<u8, String> {
    let start = Instant::now();
    let lines = selftest::run(seed, instances);
    for l in &lines {
        println!(
            "{} {}: worst {:e} (threshold {:e})",
            if l.pass { "PASS" } else { "FAIL" },
            l.name,
            l.worst,
            l.threshold
        );
    }
    println!("{} checks in {:.2} s", lines.len(), start.elapsed().as_secs_f64());
    Ok(if lines.iter().all(|l| l.pass) { 0 } else { EXIT_CHECKS_FAILED })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Analyze(args) => run_analyze(args),
        Command::Models { emit } => run_models(emit),
        Command::Selftest { seed, instances } => run_selftest(seed, instances),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
