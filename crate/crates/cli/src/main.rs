//! `vanhove-lab`: sweeps and oracle checks for second-order perturbation
//! theory at a Van Hove singularity.

mod commands;
mod config;
mod error;
mod output;

use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};

use config::{Overrides, RunConfig};
use error::CliError;
use output::{svg_plot, Manifest, SCHEMA};

/// Environment variable that fixes the worker-thread count.
const THREADS_VAR: &str = "VANHOVE_THREADS";

#[derive(Parser)]
#[command(
    name = "vanhove-lab",
    version,
    about = "Numerical lab for second-order self-energy asymptotics at a Van Hove singularity",
    after_help = "Every run writes <prefix>.csv and <prefix>.json (manifest, schema vanhove-lab/1) into \
                  the output directory, plus <prefix>.svg with --plot.\n\
                  Settings come from built-in defaults, then --config FILE, then flags.\n\
                  Exit codes: 0 ok, 2 configuration error, 3 numerical failure or non-convergence.\n\
                  VANHOVE_THREADS sets the number of worker threads."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Σ₂(q₀, q) of the xy model over a q₀ grid
    #[command(after_help = commands::help("sigma2"))]
    Sigma2(Overrides),
    /// Im ∂q₀Σ₂(q₀, 0) at zero temperature, with a log² fit
    #[command(name = "dsigma-domega", after_help = commands::help("dsigma-domega"))]
    DsigmaDomega(Overrides),
    /// Spatial gradient of Σ₂ at the singular point for each β
    #[command(name = "grad-check", after_help = commands::help("grad-check"))]
    GradCheck(Overrides),
    /// Re ∂ξ∂ηΣ₂ at zero temperature, with log² fits
    #[command(name = "d2-xieta", after_help = commands::help("d2-xieta"))]
    D2XiEta(Overrides),
    /// ∂²ξΣ₂ at zero temperature, with a log² fit of the real part
    #[command(name = "d2-xixi", after_help = commands::help("d2-xixi"))]
    D2XiXi(Overrides),
    /// Particle–hole bubble against its large-β asymptote
    #[command(name = "bubble-ph", after_help = commands::help("bubble-ph"))]
    BubblePh(Overrides),
    /// Particle–particle bubble against its large-β asymptote
    #[command(name = "bubble-pp", after_help = commands::help("bubble-pp"))]
    BubblePp(Overrides),
    /// Overlap lengths of the Fermi curve with its translates
    #[command(after_help = commands::help("overlap"))]
    Overlap(Overrides),
    /// Singular points and their numerical normal forms
    #[command(name = "normal-form", after_help = commands::help("normal-form"))]
    NormalForm(Overrides),
    /// Sublevel-set bound over a polynomial corpus
    #[command(name = "interval-check", after_help = commands::help("interval-check"))]
    IntervalCheck(Overrides),
    /// a ln²x + b ln x + c fit of two columns of a CSV
    #[command(after_help = commands::help("fit"))]
    Fit(Overrides),
}

impl Command {
    fn split(&self) -> (&'static str, &Overrides) {
        match self {
            Command::Sigma2(o) => ("sigma2", o),
            Command::DsigmaDomega(o) => ("dsigma-domega", o),
            Command::GradCheck(o) => ("grad-check", o),
            Command::D2XiEta(o) => ("d2-xieta", o),
            Command::D2XiXi(o) => ("d2-xixi", o),
            Command::BubblePh(o) => ("bubble-ph", o),
            Command::BubblePp(o) => ("bubble-pp", o),
            Command::Overlap(o) => ("overlap", o),
            Command::NormalForm(o) => ("normal-form", o),
            Command::IntervalCheck(o) => ("interval-check", o),
            Command::Fit(o) => ("fit", o),
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("{THREADS_VAR} must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))
}

/// Returns whether every integration converged.
fn execute(command: &str, overrides: &Overrides) -> Result<bool, CliError> {
    configure_threads()?;
    let cfg = RunConfig::load(command, overrides)?;
    let start = Instant::now();
    let out = commands::run(command, &cfg)?;
    let elapsed = start.elapsed().as_secs_f64();

    let csv_path = cfg.artifact(command, "csv");
    let json_path = cfg.artifact(command, "json");
    let svg_path = cfg.artifact(command, "svg");
    output::write(&csv_path, &out.table.to_csv())?;
    let mut artifacts = vec![csv_path.display().to_string()];
    if cfg.plot {
        if let Some(p) = &out.plot {
            let stamp = (!cfg.deterministic)
                .then(|| SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()));
            output::write(&svg_path, &svg_plot(&p.title, &p.x_label, &p.series, stamp))?;
            artifacts.push(svg_path.display().to_string());
        } else {
            eprintln!("note: {command} has no plot");
        }
    }
    let manifest = Manifest {
        schema: SCHEMA,
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command,
        config: &cfg,
        seeds: out.seeds.clone(),
        columns: &out.table.columns,
        rows: out.table.rows.len(),
        converged: out.converged,
        max_error_estimate: out.max_error_estimate,
        fits: &out.fits,
        summary: &out.summary,
        artifacts,
        wall_time_seconds: (!cfg.deterministic).then_some(elapsed),
    };
    let mut json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    json.push('\n');
    output::write(&json_path, &json)?;

    println!("{command}: {} rows -> {}", out.table.rows.len(), csv_path.display());
    for (name, fit) in &out.fits {
        println!("  fit {name}: a = {}, b = {}, c = {}", fit["a"], fit["b"], fit["c"]);
    }
    Ok(out.converged)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, overrides) = cli.command.split();
    debug_assert!(commands::COMMANDS.contains(&command));
    match execute(command, overrides) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: some integrations did not converge (see converged in the manifest)");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
