//! `sfmkit`: decompose, dilate, verify and compare sesquilinear form
//! measures, and generate the phase-measurement demo.
//!
//! Exit codes: 0 success, 1 semantic failure (verification or equivalence),
//! 2 input error, 3 numerical error.

mod commands;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "sfmkit",
    version,
    about = "Sesquilinear form measure toolkit",
    after_help = "The default tolerance is 1e-9; override with --tol or the SFMKIT_TOL \
                  environment variable (flag wins)."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decompose a measure into four positive parts
    Decompose {
        /// Measure document (JSON)
        #[arg(long)]
        input: String,
        /// Where to write the decomposition document
        #[arg(long)]
        output: String,
        /// Verification tolerance
        #[arg(long)]
        tol: Option<f64>,
        /// Base of the geometric weight sequence, in (0, 1)
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
    },
    /// Decompose and build the spectral dilation
    Dilate {
        /// Measure document (JSON)
        #[arg(long)]
        input: String,
        /// Where to write the dilation document
        #[arg(long)]
        output: String,
        /// Verification tolerance
        #[arg(long)]
        tol: Option<f64>,
        /// Base of the geometric weight sequence, in (0, 1)
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
    },
    /// Check a dilation against a measure
    Verify {
        /// Dilation document (JSON)
        #[arg(long)]
        dilation: String,
        /// Measure document (JSON)
        #[arg(long)]
        measure: String,
        /// Verification tolerance
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Test two dilations for unitary equivalence
    Equiv {
        /// First dilation document
        first: String,
        /// Second dilation document
        second: String,
        /// Where to write the verdict and intertwiner (JSON)
        #[arg(long)]
        output: Option<String>,
        /// Comparison tolerance
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Generate the phase-measurement example and probe it
    PhaseDemo {
        /// Truncation dimension
        #[arg(long, short = 'n', default_value_t = 8)]
        dim: usize,
        /// Number of arcs in the circle partition
        #[arg(long, short = 'm', default_value_t = 16)]
        arcs: usize,
        /// Coefficient preset: identity, all-ones, or toeplitz:<ratio>
        #[arg(long, default_value = "all-ones", conflicts_with = "c_file")]
        preset: String,
        /// JSON file with a raw coefficient matrix ([[ [re,im], ... ], ...])
        #[arg(long)]
        c_file: Option<String>,
        /// Coherent-state amplitude; repeatable (e.g. --z 0.5 --z 1+2i)
        #[arg(long = "z")]
        z_values: Vec<String>,
        /// Directory for the measure document and probability CSVs
        #[arg(long)]
        output_dir: String,
        /// Seed for the random probe states
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Number of random probe states in the negativity scan
        #[arg(long, default_value_t = 32)]
        probes: usize,
        /// Diagnostic tolerance
        #[arg(long)]
        tol: Option<f64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Decompose {
            input,
            output,
            tol,
            alpha,
        } => commands::decompose(&input, &output, tol, alpha),
        Command::Dilate {
            input,
            output,
            tol,
            alpha,
        } => commands::dilate(&input, &output, tol, alpha),
        Command::Verify {
            dilation,
            measure,
            tol,
        } => commands::verify(&dilation, &measure, tol),
        Command::Equiv {
            first,
            second,
            output,
            tol,
        } => commands::equiv(&first, &second, output.as_deref(), tol),
        Command::PhaseDemo {
            dim,
            arcs,
            preset,
            c_file,
            z_values,
            output_dir,
            seed,
            probes,
            tol,
        } => commands::phase_demo(commands::PhaseDemoArgs {
            dim,
            arcs,
            preset,
            c_file,
            z_values,
            output_dir,
            seed,
            probes,
            tol,
        }),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
