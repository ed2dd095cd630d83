//! `elodyn` — rating dynamics from the command line.
//!
//! Subcommands wrap the library: `decompose` splits an advantage matrix
//! into transitive and cyclic parts, `solve` computes the final score for
//! a payoff/selection pair, `simulate` runs the seeded rating chain,
//! `elotope` samples final scores across selection matrices, `measure`
//! reports the intransitivity of a matrix or match log, and `experiment`
//! regenerates the three-player convergence tables. Matrices travel as
//! JSON documents, bulk rows as CSV. Exit codes: 0 success, 2 invalid
//! input, 3 numerical non-convergence.

mod io;

use clap::{Parser, Subcommand};
use elodyn::chain::{run_chain, ChainConfig};
use elodyn::game::{advantage_from_payoff, SigmoidLink};
use elodyn::hodge::{hodge_decompose, is_stacm};
use elodyn::intransitivity::{measure_from_records, measure_intransitivity, IntransitivityReport};
use elodyn::rps::{ground_truth_curve, run_experiment, Family};
use elodyn::solver::{sample_elotope, solve_final_score, SolveError};
use io::{MatrixFile, MatrixKind};
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Debug)]
pub struct CliError {
    message: String,
    exit_code: u8,
}

impl CliError {
    pub fn invalid(message: String) -> Self {
        Self {
            message,
            exit_code: 2,
        }
    }

    pub fn non_convergence(message: String) -> Self {
        Self {
            message,
            exit_code: 3,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "elodyn",
    version,
    about = "Elo rating dynamics: decomposition, final-score solving, simulation, and intransitivity measurement"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Split an advantage matrix into transitive and cyclic parts.
    Decompose {
        /// Advantage matrix JSON file.
        input: PathBuf,
        /// Cyclic-norm threshold below which the matrix counts as
        /// additively transitive.
        #[arg(long, default_value_t = 1e-9)]
        stacm_tol: f64,
        /// Also write the transitive part as an advantage matrix file.
        #[arg(long)]
        out_transitive: Option<PathBuf>,
        /// Also write the cyclic part as an advantage matrix file.
        #[arg(long)]
        out_cyclic: Option<PathBuf>,
    },
    /// Solve the stability equation for a payoff/selection pair.
    Solve {
        /// Payoff matrix JSON file.
        #[arg(long)]
        payoff: PathBuf,
        /// Selection matrix JSON file.
        #[arg(long)]
        selection: PathBuf,
        /// Convergence tolerance on the residual ∞-norm.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Newton iteration cap.
        #[arg(long, default_value_t = 100)]
        max_iter: usize,
    },
    /// Run the seeded rating chain and write trajectory and match CSVs.
    Simulate {
        #[arg(long)]
        payoff: PathBuf,
        #[arg(long)]
        selection: PathBuf,
        /// Number of games to play.
        #[arg(long, default_value_t = 1000)]
        steps: u64,
        /// Gain (step size) of the rating update.
        #[arg(long, default_value_t = 0.1)]
        eta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Record the rating vector every this many steps.
        #[arg(long, default_value_t = 1)]
        stride: u64,
        /// Output CSV with columns step,r_0,..,r_{m-1}.
        #[arg(long)]
        out_trajectory: PathBuf,
        /// Output CSV with columns sequence,i,j,winner.
        #[arg(long)]
        out_matches: PathBuf,
    },
    /// Sample final scores across selection matrices for one payoff.
    Elotope {
        /// Payoff matrix JSON file.
        input: PathBuf,
        /// Spanning-tree budget (all trees are enumerated when the
        /// complete graph has no more than this many).
        #[arg(long, default_value_t = 16)]
        trees: usize,
        /// Number of random connected selection matrices to solve.
        #[arg(long, default_value_t = 8)]
        random_q: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output CSV with columns source,r_0,..,r_{m-1}.
        #[arg(long)]
        out: PathBuf,
    },
    /// Measure intransitivity of an advantage/payoff matrix or match log.
    Measure {
        /// Matrix JSON file or match-log CSV (chosen by extension, or
        /// forced with --format).
        input: PathBuf,
        /// Number of players (match-log input only).
        #[arg(long)]
        players: Option<usize>,
        /// Additive smoothing for empirical payoff estimation.
        #[arg(long, default_value_t = 0.5)]
        smoothing: f64,
        /// Input interpretation: auto, matrix, or matches.
        #[arg(long, default_value = "auto")]
        format: String,
    },
    /// Tabulate ground-truth and empirical intransitivity over a family.
    Experiment {
        /// Strategy family: rs (rock/scissors) or rps.
        #[arg(long)]
        family: Family,
        /// Parameter grid: start:step:end (inclusive) or a comma list.
        #[arg(long, default_value = "0:0.05:0.95")]
        t_grid: String,
        /// Comma list of games-per-pair sizes.
        #[arg(long, default_value = "100,1000,10000")]
        games: String,
        /// Trials per grid cell.
        #[arg(long, default_value_t = 10)]
        trials: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
        /// Emit only the ground-truth curve (family,t,i_truth).
        #[arg(long)]
        truth_only: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message);
            ExitCode::from(err.exit_code)
        }
    }
}

fn link() -> SigmoidLink {
    SigmoidLink::Logistic
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Decompose {
            input,
            stacm_tol,
            out_transitive,
            out_cyclic,
        } => cmd_decompose(&input, stacm_tol, out_transitive.as_deref(), out_cyclic.as_deref()),
        Command::Solve {
            payoff,
            selection,
            tol,
            max_iter,
        } => cmd_solve(&payoff, &selection, tol, max_iter),
        Command::Simulate {
            payoff,
            selection,
            steps,
            eta,
            seed,
            stride,
            out_trajectory,
            out_matches,
        } => cmd_simulate(&payoff, &selection, steps, eta, seed, stride, &out_trajectory, &out_matches),
        Command::Elotope {
            input,
            trees,
            random_q,
            seed,
            out,
        } => cmd_elotope(&input, trees, random_q, seed, &out),
        Command::Measure {
            input,
            players,
            smoothing,
            format,
        } => cmd_measure(&input, players, smoothing, &format),
        Command::Experiment {
            family,
            t_grid,
            games,
            trials,
            seed,
            out,
            truth_only,
        } => cmd_experiment(family, &t_grid, &games, trials, seed, &out, truth_only),
    }
}

#[derive(Serialize)]
struct DecomposeOutput {
    transitive: Vec<Vec<f64>>,
    cyclic: Vec<Vec<f64>>,
    transitive_norm: f64,
    cyclic_norm: f64,
    is_stacm: bool,
}

fn print_json<T: Serialize>(value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::invalid(format!("serialization failed: {e}")))?;
    println!("{text}");
    Ok(())
}

fn cmd_decompose(
    input: &PathBuf,
    stacm_tol: f64,
    out_transitive: Option<&Path>,
    out_cyclic: Option<&Path>,
) -> Result<(), CliError> {
    let advantage = io::load_advantage(input)?;
    let (transitive, cyclic) = hodge_decompose(advantage.as_skew());
    for (part, path) in [(&transitive, out_transitive), (&cyclic, out_cyclic)] {
        if let Some(path) = path {
            let file = MatrixFile {
                dim: part.dim(),
                kind: MatrixKind::Advantage,
                rows: part.rows(),
            };
            file.save(path)?;
        }
    }
    let output = DecomposeOutput {
        transitive_norm: transitive.frobenius_norm(),
        cyclic_norm: cyclic.frobenius_norm(),
        is_stacm: is_stacm(advantage.as_skew(), stacm_tol),
        transitive: transitive.rows(),
        cyclic: cyclic.rows(),
    };
    print_json(&output)
}

fn cmd_solve(
    payoff_path: &PathBuf,
    selection_path: &PathBuf,
    tol: f64,
    max_iter: usize,
) -> Result<(), CliError> {
    let payoff = io::load_payoff(payoff_path)?;
    let selection = io::load_selection(selection_path)?;
    if payoff.dim() != selection.dim() {
        return Err(CliError::invalid(format!(
            "dimension mismatch: payoff is {p}x{p} but selection is {s}x{s}",
            p = payoff.dim(),
            s = selection.dim()
        )));
    }
    if !(tol > 0.0) {
        return Err(CliError::invalid(format!("tolerance must be positive, got {tol}")));
    }
    match solve_final_score(&payoff, &selection, link(), tol, max_iter) {
        Ok(report) => print_json(&report),
        Err(SolveError::DidNotConverge { tol, best }) => {
            print_json(&best)?;
            Err(CliError::non_convergence(format!(
                "did not reach residual {tol:e}; best {:e} after {} iterations",
                best.residual_norm, best.iterations
            )))
        }
        Err(SolveError::Game(e)) => Err(CliError::invalid(e.to_string())),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    payoff_path: &PathBuf,
    selection_path: &PathBuf,
    steps: u64,
    eta: f64,
    seed: u64,
    stride: u64,
    out_trajectory: &PathBuf,
    out_matches: &PathBuf,
) -> Result<(), CliError> {
    let payoff = io::load_payoff(payoff_path)?;
    let selection = io::load_selection(selection_path)?;
    if stride == 0 {
        return Err(CliError::invalid("stride must be at least 1".into()));
    }
    let config = ChainConfig::new(payoff, selection, eta, link(), seed)
        .map_err(|e| CliError::invalid(e.to_string()))?;
    let trajectory = run_chain(&config, steps, stride);

    let mut csv = String::from("step");
    for k in 0..config.dim() {
        csv.push_str(&format!(",r_{k}"));
    }
    csv.push('\n');
    for state in &trajectory.states {
        csv.push_str(&state.step.to_string());
        for v in state.ratings.values() {
            csv.push_str(&format!(",{v}"));
        }
        csv.push('\n');
    }
    io::write_atomic(out_trajectory, &csv)?;
    io::write_atomic(out_matches, &io::match_log_csv(&trajectory.matches))?;
    eprintln!(
        "wrote {} states to {} and {} matches to {}",
        trajectory.states.len(),
        out_trajectory.display(),
        trajectory.matches.len(),
        out_matches.display()
    );
    Ok(())
}

fn cmd_elotope(
    input: &PathBuf,
    trees: usize,
    random_q: usize,
    seed: u64,
    out: &PathBuf,
) -> Result<(), CliError> {
    let payoff = io::load_payoff(input)?;
    let sample = sample_elotope(&payoff, link(), trees, random_q, seed);
    let mut csv = String::from("source");
    for k in 0..payoff.dim() {
        csv.push_str(&format!(",r_{k}"));
    }
    csv.push('\n');
    for (point, source) in sample.points.iter().zip(&sample.sources) {
        csv.push_str(&source.label());
        for v in point.values() {
            csv.push_str(&format!(",{v}"));
        }
        csv.push('\n');
    }
    io::write_atomic(out, &csv)?;
    eprintln!("wrote {} final scores to {}", sample.len(), out.display());
    Ok(())
}

fn cmd_measure(
    input: &PathBuf,
    players: Option<usize>,
    smoothing: f64,
    format: &str,
) -> Result<(), CliError> {
    let resolved = match format {
        "matrix" | "matches" => format.to_string(),
        "auto" => match input.extension().and_then(|e| e.to_str()) {
            Some("json") => "matrix".to_string(),
            Some("csv") => "matches".to_string(),
            other => {
                return Err(CliError::invalid(format!(
                    "cannot infer format from extension {other:?}; pass --format matrix|matches"
                )))
            }
        },
        other => {
            return Err(CliError::invalid(format!(
                "unknown format \"{other}\", expected auto, matrix, or matches"
            )))
        }
    };
    let report: IntransitivityReport = if resolved == "matrix" {
        let file = MatrixFile::load(input)?;
        let advantage = match file.kind {
            MatrixKind::Advantage => io::load_advantage(input)?,
            MatrixKind::Payoff => {
                let payoff = io::load_payoff(input)?;
                advantage_from_payoff(&payoff, link())
                    .map_err(|e| CliError::invalid(e.to_string()))?
            }
            MatrixKind::Selection => {
                return Err(CliError::invalid(
                    "selection matrices have no intransitivity measure; pass a payoff or advantage matrix".into(),
                ))
            }
        };
        measure_intransitivity(&advantage)
    } else {
        let players = players.ok_or_else(|| {
            CliError::invalid("--players is required for match-log input".into())
        })?;
        let records = io::load_match_log(input)?;
        measure_from_records(&records, players, smoothing, link())
            .map_err(|e| CliError::invalid(e.to_string()))?
    };
    print_json(&report)
}

fn cmd_experiment(
    family: Family,
    t_grid: &str,
    games: &str,
    trials: u32,
    seed: u64,
    out: &PathBuf,
    truth_only: bool,
) -> Result<(), CliError> {
    let t_values = io::parse_grid(t_grid)?;
    if t_values.is_empty() {
        return Err(CliError::invalid("t grid is empty".into()));
    }
    if truth_only {
        let curve = ground_truth_curve(family, &t_values)
            .map_err(|e| CliError::invalid(e.to_string()))?;
        let mut csv = String::from("family,t,i_truth\n");
        for (t, i_truth) in curve {
            csv.push_str(&format!("{family},{t},{i_truth}\n"));
        }
        io::write_atomic(out, &csv)?;
        eprintln!("wrote truth curve to {}", out.display());
        return Ok(());
    }
    let games_schedule = io::parse_games_list(games)?;
    let rows = run_experiment(family, &t_values, &games_schedule, trials, seed)
        .map_err(|e| CliError::invalid(e.to_string()))?;
    let mut csv = String::from("family,t,games_per_pair,trial,i_truth,i_hat\n");
    for row in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            row.family, row.t, row.games_per_pair, row.trial, row.i_truth, row.i_hat
        ));
    }
    io::write_atomic(out, &csv)?;
    eprintln!("wrote {} measurements to {}", rows.len(), out.display());
    Ok(())
}
