use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use aham_cli::{parse_error_grid, parse_pair, parse_residual_grid, run_example, CliError, Format, HChoice, RunConfig};
use aham_core::registry::EXAMPLE_IDS;
use aham_core::Mode;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Aham,
    Classic,
}

/// Series solutions of aggregation and aggregation-breakage population balances.
#[derive(Debug, Parser)]
#[command(name = "aham", version)]
struct Args {
    /// Example id (4.1 .. 4.7), or `all` to run every example concurrently.
    #[arg(long)]
    example: String,

    /// Iterates beyond μ_0 (ψ_K = μ_0 + … + μ_K); defaults per example.
    #[arg(long)]
    terms: Option<usize>,

    /// Fixed convergence-control parameter.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "optimize_h")]
    h: Option<f64>,

    /// Minimize the discrete squared residual over h (the default).
    #[arg(long)]
    optimize_h: bool,

    /// Search bracket `a,b` for the optimizer.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true, default_value = "-2,-0.001")]
    h_bracket: (f64, f64),

    /// Residual grid `K,s_max,t_max`.
    #[arg(long, value_parser = parse_residual_grid)]
    residual_grid: Option<(usize, f64, f64)>,

    /// Error-norm grid `K,s_max`.
    #[arg(long, value_parser = parse_error_grid, default_value = "1000,10")]
    error_grid: (usize, f64),

    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,

    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,

    /// Cells of the finite-volume reference for examples without a closed form.
    #[arg(long, default_value_t = 400)]
    fvm_cells: usize,

    #[arg(long, value_enum, default_value = "aham")]
    mode: ModeArg,
}

fn config(args: &Args, id: &str) -> RunConfig {
    RunConfig {
        example: id.to_string(),
        terms: args.terms,
        h: args.h.map_or(HChoice::Optimize, HChoice::Fixed),
        h_bracket: args.h_bracket,
        residual_grid: args.residual_grid,
        error_grid: args.error_grid,
        format: match args.format {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        },
        fvm_cells: args.fvm_cells,
        mode: match args.mode {
            ModeArg::Aham => Mode::Aham,
            ModeArg::Classic => Mode::Classic,
        },
        out: args.out.clone(),
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let ids: Vec<&str> = if args.example == "all" {
        EXAMPLE_IDS.to_vec()
    } else {
        vec![args.example.as_str()]
    };
    // each example writes its own files, so runs are independent
    let results: Vec<(&str, Result<Vec<PathBuf>, CliError>)> = std::thread::scope(|scope| {
        let handles: Vec<_> = ids
            .iter()
            .map(|id| {
                let cfg = config(&args, id);
                (*id, scope.spawn(move || run_example(&cfg)))
            })
            .collect();
        handles
            .into_iter()
            .map(|(id, h)| (id, h.join().unwrap_or_else(|_| Err(CliError::Usage("worker panicked".into())))))
            .collect()
    });
    let mut status = ExitCode::SUCCESS;
    for (id, result) in results {
        match result {
            Ok(paths) => {
                for p in paths {
                    println!("{}", p.display());
                }
            }
            Err(e) => {
                eprintln!("error: example {id}: {e}");
                status = ExitCode::FAILURE;
            }
        }
    }
    status
}
