//! Elo rating dynamics under intransitivity.
//!
//! The crate models two-player zero-sum games through three matrices: a
//! payoff matrix `P` of pairwise win probabilities, its advantage matrix
//! `A = σ⁻¹(P)`, and a selection matrix `Q` of pairing probabilities. On
//! top of those it provides:
//!
//! - [`hodge`] — combinatorial gradient, divergence, and rotation
//!   operators, and the orthogonal split of a skew matrix into additively
//!   transitive and cyclic parts;
//! - [`chain`] — the Elo update process as a seeded discrete-time Markov
//!   chain with conserved rating sum and bounded steps;
//! - [`solver`] — the final score (the sum-zero fixed point of the
//!   expected update) via Newton iteration for arbitrary connected `Q`,
//!   the closed form for spanning trees, and sampling of the attainable
//!   final-score set across selection matrices;
//! - [`intransitivity`] — a scalar measure comparing the cyclic and
//!   transitive components of `A`;
//! - [`rps`] — a three-strategy experiment lab with exact win
//!   probabilities and seeded match simulation.
//!
//! All randomness flows through `ChaCha8` generators seeded from explicit
//! 64-bit seeds ([`seeds`] derives per-unit sub-seeds), so every
//! simulation, sample, and experiment table is reproducible bit-for-bit.

pub mod chain;
pub mod game;
pub mod hodge;
pub mod intransitivity;
pub mod matrix;
pub mod rps;
pub mod seeds;
pub mod solver;

pub use chain::{expected_step, init_chain, run_chain, step_chain, ChainConfig, ChainState, Trajectory};
pub use game::{
    advantage_from_payoff, estimate_payoff, payoff_from_advantage, tree_selection,
    uniform_selection, AdvantageMatrix, GameModelError, MatchRecord, PayoffMatrix,
    SelectionMatrix, SigmoidLink,
};
pub use hodge::{div, grad, hodge_decompose, is_stacm, rot, RatingVector, SkewMatrix};
pub use intransitivity::{
    measure_from_records, measure_intransitivity, IntransitivityClass, IntransitivityReport,
};
pub use matrix::SquareMatrix;
pub use rps::{
    ground_truth_advantage, ground_truth_curve, rps_family, rs_family, run_experiment,
    simulate_matches, ExperimentRow, Family, FamilyPoint, StrategyProfile,
};
pub use solver::{
    sample_elotope, solve_final_score, solve_final_score_from, stability_residual,
    tree_final_score, ElotopeSample, ElotopeSource, SolveError, SolveMethod, SolveReport,
};
