use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use torusmix::render::{render, Format, Style};
use torusmix::{resolve_out_dir, run, CliError, RunConfig, RunOptions, OUT_ENV};
use torusmix_core::geometry::ScalarField;

#[derive(Parser)]
#[command(name = "torusmix", version, about = "Mixing scales and rearrangement energies on the 2-torus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the analyses listed in a TOML config and write a report bundle.
    Run {
        config: PathBuf,
        /// Output directory (default: config `output_dir`, then $TORUSMIX_OUT/<name>).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Cap on worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
        /// Seed for randomly placed trajectories.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Render a field CSV as an SVG or binary PPM image.
    Render {
        field: PathBuf,
        #[arg(long, value_enum, default_value = "heatmap")]
        style: Style,
        /// Output file; the format follows the extension (.svg or .ppm).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run_command(config: PathBuf, out: Option<PathBuf>, threads: Option<usize>, seed: u64) -> Result<i32, CliError> {
    let cfg = RunConfig::load(&config)?;
    let env_root = std::env::var_os(OUT_ENV).map(PathBuf::from);
    let out_dir = resolve_out_dir(out.as_deref(), &cfg, env_root.as_deref());
    let outcome = run(&cfg, &RunOptions { out_dir, threads, seed })?;
    println!("{}: report written to {}", cfg.name, outcome.out_dir.display());
    for (analysis, verdict) in &outcome.summary.verdicts {
        println!("  {analysis}: {verdict}");
    }
    for (key, value) in &outcome.summary.highlights {
        println!("  {key} = {value}");
    }
    Ok(outcome.exit_code)
}

fn render_command(field: PathBuf, style: Style, out: Option<PathBuf>) -> Result<i32, CliError> {
    let text = std::fs::read_to_string(&field)?;
    let data = ScalarField::<f64>::from_csv(&text).map_err(|e| CliError::Io(std::io::Error::other(e)))?;
    let out = out.unwrap_or_else(|| {
        field.with_extension(match style {
            Style::Indicator => "svg",
            Style::Heatmap => "ppm",
        })
    });
    let format = match out.extension().and_then(|e| e.to_str()) {
        Some("ppm") => Format::Ppm,
        Some("svg") => Format::Svg,
        other => {
            return Err(CliError::Config(format!("output extension must be .svg or .ppm, got {other:?}")));
        }
    };
    std::fs::write(&out, render(&data, style, format))?;
    println!("{}", out.display());
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, out, threads, seed } => run_command(config, out, threads, seed),
        Command::Render { field, style, out } => render_command(field, style, out),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("torusmix: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
