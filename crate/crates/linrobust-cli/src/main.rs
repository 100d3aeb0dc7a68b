//! `linrobust`: generation, training, margin tables, loss-surface export,
//! robustness evaluation, and self-verification for the linear-classifier
//! robustness laboratory.

mod commands;
mod emit;
mod manifest;
mod schema;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{
    cmd_bound_curve, cmd_evaluate, cmd_gen, cmd_landscape, cmd_radii, cmd_train, cmd_verify,
    EvaluateArgs, GenArgs, LandscapeArgs, TrainArgs, UsageError,
};

#[derive(Parser)]
#[command(
    name = "linrobust",
    version,
    about = "Robustness laboratory for least-squares linear classifiers",
    long_about = "Generates the synthetic two-class family, trains it with eight optimizer \
                  kinds (naturally or against the exact worst-case objective), tabulates \
                  certified flip radii against the margin oracle, exports 2-D loss surfaces, \
                  sweeps PGD robustness curves, and verifies its own closed forms."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic problem file (fixed counts, or random label draws).
    Gen {
        /// Number of +1 samples (with --n-minus).
        #[arg(long)]
        n_plus: Option<usize>,
        /// Number of -1 samples (with --n-plus).
        #[arg(long)]
        n_minus: Option<usize>,
        /// Total sample count for random generation (with --p and --seed).
        #[arg(long)]
        n: Option<usize>,
        /// Probability of the +1 label, in (0.5, 1].
        #[arg(long)]
        p: Option<f64>,
        /// RNG seed for random generation.
        #[arg(long)]
        seed: Option<u64>,
        /// Output problem JSON path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Tabulate printed and oracle flip radii over the class-count grid.
    Radii {
        /// Grid bound: rows cover all class counts in [1, N]^2.
        #[arg(long, default_value_t = 20)]
        grid: usize,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Export 2-D surfaces of the robust objective for contour plotting.
    Landscape {
        /// Problem JSON with exactly two features.
        #[arg(long)]
        problem: Option<PathBuf>,
        /// Use the built-in two-sample 2-D demonstration problem.
        #[arg(long)]
        demo_2d: bool,
        /// Perturbation budget of the objective.
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = -3.0, allow_hyphen_values = true)]
        grid_min: f64,
        #[arg(long, default_value_t = 3.0, allow_hyphen_values = true)]
        grid_max: f64,
        #[arg(long, default_value_t = 121)]
        grid_steps: usize,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a self-verification suite and write its JSON report.
    Verify {
        /// One of: radii, geometry, optimizers, theorem4, all.
        #[arg(long)]
        suite: String,
        /// Output report path.
        #[arg(long)]
        report: PathBuf,
    },
    /// Tabulate the imbalance bound min{2c/(1+c), 2/(1+c)}.
    BoundCurve {
        #[arg(long)]
        c_min: f64,
        #[arg(long)]
        c_max: f64,
        #[arg(long, default_value_t = 101)]
        steps: usize,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a problem with one optimizer kind; write final weights.
    Train {
        /// Problem JSON path.
        #[arg(long)]
        problem: PathBuf,
        /// gd, sgd, momentum, nesterov, adagrad, rmsprop, adam, or subgradient.
        #[arg(long)]
        optimizer: String,
        /// Perturbation budget (adversarial mode only).
        #[arg(long)]
        eps: Option<f64>,
        /// Minimize the worst-case objective instead of the squared error.
        #[arg(long)]
        adversarial: bool,
        /// Adversarial mode: sample the inner maximization with ascent steps
        /// instead of using its closed form.
        #[arg(long)]
        pgd_inner: bool,
        #[arg(long, default_value_t = 500_000)]
        steps: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Override the per-kind default learning rate.
        #[arg(long)]
        learning_rate: Option<f64>,
        /// Seed for row sampling in sgd.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Draw the initial point uniformly from [-1,1]^d with this seed
        /// (default: start at the origin).
        #[arg(long)]
        init_seed: Option<u64>,
        /// Also write a JSON-lines training trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Include the weight vector in each trace record.
        #[arg(long)]
        trace_weights: bool,
        /// Output weights JSON path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Sweep a robustness curve for a weight vector; write CSV + summary.
    Evaluate {
        /// Problem JSON path.
        #[arg(long)]
        problem: PathBuf,
        /// Weights JSON (alternative to --solution).
        #[arg(long)]
        weights: Option<PathBuf>,
        /// Closed-form weights: sgd, ada, or ideal (alternative to --weights).
        #[arg(long)]
        solution: Option<String>,
        /// Budget norm: l2 or linf.
        #[arg(long, default_value = "l2")]
        norm: String,
        /// Largest budget on the sweep grid (default: twice the largest
        /// exact flip radius of the test pair).
        #[arg(long)]
        eps_max: Option<f64>,
        /// Number of grid points.
        #[arg(long, default_value_t = 101)]
        grid: usize,
        #[arg(long, default_value_t = 100)]
        attack_steps: usize,
        #[arg(long, default_value_t = 1)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated multipliers on the standard attack step size; each
        /// multiplier contributes one attack to the per-sample suite.
        #[arg(long, default_value = "1.0,0.25")]
        step_factors: String,
        /// Output CSV path (summary lands beside it).
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Gen { n_plus, n_minus, n, p, seed, out } => {
            cmd_gen(&GenArgs { n_plus, n_minus, n, p, seed, out })
        }
        Command::Radii { grid, out } => cmd_radii(grid, &out),
        Command::Landscape { problem, demo_2d, eps, grid_min, grid_max, grid_steps, out } => {
            cmd_landscape(&LandscapeArgs {
                problem,
                demo_2d,
                eps,
                grid_min,
                grid_max,
                grid_steps,
                out,
            })
        }
        Command::Verify { suite, report } => cmd_verify(&suite, &report),
        Command::BoundCurve { c_min, c_max, steps, out } => {
            cmd_bound_curve(c_min, c_max, steps, &out)
        }
        Command::Train {
            problem,
            optimizer,
            eps,
            adversarial,
            pgd_inner,
            steps,
            tol,
            learning_rate,
            seed,
            init_seed,
            trace,
            trace_weights,
            out,
        } => cmd_train(&TrainArgs {
            problem,
            optimizer,
            eps,
            adversarial,
            pgd_inner,
            steps,
            tol,
            learning_rate,
            seed,
            init_seed,
            trace,
            trace_weights,
            out,
        }),
        Command::Evaluate {
            problem,
            weights,
            solution,
            norm,
            eps_max,
            grid,
            attack_steps,
            restarts,
            seed,
            step_factors,
            out,
        } => cmd_evaluate(&EvaluateArgs {
            problem,
            weights,
            solution,
            norm,
            eps_max,
            grid,
            attack_steps,
            restarts,
            seed,
            step_factors,
            out,
        }),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            if err.downcast_ref::<UsageError>().is_some() {
                eprintln!("usage error: {err}");
                ExitCode::from(2)
            } else {
                eprintln!("error: {err}");
                ExitCode::from(1)
            }
        }
    }
}
