//! Three-strategy validation lab.
//!
//! Three players pick rock, paper, or scissors from per-player probability
//! mass functions. Two one-parameter families interpolate from the uniform
//! profile towards extreme strategies: a rock/scissors-only family that
//! stays predominantly transitive, and a full rock-paper-scissors family
//! whose cyclic component grows without bound as `t → 1`. Exact win
//! probabilities come from `Bᵀ·M·B` with `M` the single-game win matrix
//! (draws counted as one half); simulated match logs resolve draws with a
//! fair coin so every game has a winner.

use crate::game::{advantage_from_payoff, AdvantageMatrix, GameModelError, MatchRecord, PayoffMatrix, SigmoidLink};
use crate::intransitivity::{measure_from_records, measure_intransitivity};
use crate::matrix::SquareMatrix;
use crate::seeds::derive_seed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Win probability of the row strategy against the column strategy in one
/// game, draws counted as one half. Order: rock, paper, scissors.
pub const BASE_GAME: [[f64; 3]; 3] = [[0.5, 0.0, 1.0], [1.0, 0.5, 0.0], [0.0, 1.0, 0.5]];

/// Smoothing used for every empirical measurement in the experiment grid.
pub const EXPERIMENT_SMOOTHING: f64 = 0.5;

pub fn base_game_matrix() -> SquareMatrix {
    SquareMatrix::from_fn(3, |i, j| BASE_GAME[i][j])
}

#[derive(Debug, Error)]
pub enum RpsError {
    #[error("family parameter t must lie in [0, 1), got {t}")]
    ParameterOutOfRange { t: f64 },
    #[error("column {column} of the strategy profile sums to {sum}, expected 1")]
    ColumnNotStochastic { column: usize, sum: f64 },
    #[error("strategy probability ({row},{column}) = {value} is outside [0, 1]")]
    ProbabilityOutOfRange {
        row: usize,
        column: usize,
        value: f64,
    },
    #[error("games schedule must not be empty")]
    EmptySchedule,
    #[error(transparent)]
    Game(#[from] GameModelError),
}

/// The two strategy families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    RockScissors,
    RockPaperScissors,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::RockScissors => write!(f, "rs"),
            Family::RockPaperScissors => write!(f, "rps"),
        }
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rs" => Ok(Family::RockScissors),
            "rps" => Ok(Family::RockPaperScissors),
            other => Err(format!("unknown family '{other}', expected 'rs' or 'rps'")),
        }
    }
}

/// Per-player strategy PMFs: column `i` is player `i`'s distribution over
/// rock, paper, scissors.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyProfile {
    columns: Vec<[f64; 3]>,
}

impl StrategyProfile {
    pub fn new(columns: Vec<[f64; 3]>) -> Result<Self, RpsError> {
        for (c, column) in columns.iter().enumerate() {
            for (r, &v) in column.iter().enumerate() {
                if !(0.0..=1.0).contains(&v) {
                    return Err(RpsError::ProbabilityOutOfRange {
                        row: r,
                        column: c,
                        value: v,
                    });
                }
            }
            let sum: f64 = column.iter().sum();
            if (sum - 1.0).abs() > 1e-12 {
                return Err(RpsError::ColumnNotStochastic { column: c, sum });
            }
        }
        Ok(Self { columns })
    }

    /// Number of players.
    pub fn players(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, player: usize) -> &[f64; 3] {
        &self.columns[player]
    }
}

fn check_t(t: f64) -> Result<(), RpsError> {
    if (0.0..1.0).contains(&t) {
        Ok(())
    } else {
        Err(RpsError::ParameterOutOfRange { t })
    }
}

/// Rock/scissors-only family: player 1 plays rock with probability
/// `(1+t)/2`, player 2 with `1/2`, player 3 with `(1-t)/2`; scissors takes
/// the complement and paper is never played.
pub fn rs_family(t: f64) -> Result<StrategyProfile, RpsError> {
    check_t(t)?;
    let rock = [(1.0 + t) / 2.0, 0.5, (1.0 - t) / 2.0];
    StrategyProfile::new(rock.iter().map(|&r| [r, 0.0, 1.0 - r]).collect())
}

/// Full family: column `i` is `(1-t)·uniform + t·e_i`, so player `i` leans
/// towards pure strategy `i` as `t` grows.
pub fn rps_family(t: f64) -> Result<StrategyProfile, RpsError> {
    check_t(t)?;
    let base = (1.0 - t) / 3.0;
    StrategyProfile::new(
        (0..3)
            .map(|i| {
                let mut col = [base; 3];
                col[i] += t;
                col
            })
            .collect(),
    )
}

pub fn family_profile(family: Family, t: f64) -> Result<StrategyProfile, RpsError> {
    match family {
        Family::RockScissors => rs_family(t),
        Family::RockPaperScissors => rps_family(t),
    }
}

/// A family member: the profile regenerated from `(family, t)`, so the
/// invariant holds by construction.
#[derive(Debug, Clone)]
pub struct FamilyPoint {
    pub family: Family,
    pub t: f64,
    pub profile: StrategyProfile,
}

impl FamilyPoint {
    pub fn new(family: Family, t: f64) -> Result<Self, RpsError> {
        Ok(Self {
            family,
            t,
            profile: family_profile(family, t)?,
        })
    }
}

/// Exact pairwise win probabilities `P = Bᵀ·M·B` for a profile, with the
/// diagonal fixed at one half.
pub fn exact_payoff(profile: &StrategyProfile) -> Result<PayoffMatrix, RpsError> {
    let m = profile.players();
    let probs = SquareMatrix::from_fn(m, |i, j| {
        if i == j {
            return 0.5;
        }
        let (bi, bj) = (profile.column(i), profile.column(j));
        let mut p = 0.0;
        for s in 0..3 {
            for s2 in 0..3 {
                p += bi[s] * BASE_GAME[s][s2] * bj[s2];
            }
        }
        p
    });
    PayoffMatrix::new(probs).map_err(RpsError::from)
}

/// Ground-truth advantage matrix `σ⁻¹(Bᵀ·M·B)`.
///
/// Fails when a pairwise win probability reaches the payoff boundary
/// margin, which happens as profiles approach pure strategies.
pub fn ground_truth_advantage(
    profile: &StrategyProfile,
    link: SigmoidLink,
) -> Result<AdvantageMatrix, RpsError> {
    let payoff = exact_payoff(profile)?;
    advantage_from_payoff(&payoff, link).map_err(RpsError::from)
}

fn sample_strategy<R: Rng>(pmf: &[f64; 3], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (s, &p) in pmf.iter().enumerate() {
        acc += p;
        if u < acc {
            return s;
        }
    }
    2
}

/// True when strategy `a` beats strategy `b` outright (rock > scissors,
/// scissors > paper, paper > rock).
fn beats(a: usize, b: usize) -> bool {
    a == (b + 1) % 3
}

/// Simulates `games_per_pair` games for every unordered pair, in canonical
/// pair order. Draws are resolved by a fair coin so each record has a
/// winner. Deterministic given the seed.
pub fn simulate_matches(
    profile: &StrategyProfile,
    games_per_pair: u64,
    seed: u64,
) -> Vec<MatchRecord> {
    let m = profile.players();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(games_per_pair as usize * m * (m - 1) / 2);
    let mut sequence = 0;
    for i in 0..m {
        for j in (i + 1)..m {
            for _ in 0..games_per_pair {
                let si = sample_strategy(profile.column(i), &mut rng);
                let sj = sample_strategy(profile.column(j), &mut rng);
                let i_wins = if si == sj {
                    rng.gen::<f64>() < 0.5
                } else {
                    beats(si, sj)
                };
                let winner = if i_wins { i } else { j };
                records.push(
                    MatchRecord::new(i, j, winner, sequence)
                        .expect("simulated players are distinct"),
                );
                sequence += 1;
            }
        }
    }
    records
}

/// One measurement in the experiment grid.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentRow {
    pub family: Family,
    pub t: f64,
    pub games_per_pair: u64,
    pub trial: u32,
    pub i_truth: f64,
    pub i_hat: f64,
}

/// Ground-truth measure along a parameter grid.
pub fn ground_truth_curve(family: Family, t_values: &[f64]) -> Result<Vec<(f64, f64)>, RpsError> {
    t_values
        .iter()
        .map(|&t| {
            let point = FamilyPoint::new(family, t)?;
            let advantage = ground_truth_advantage(&point.profile, SigmoidLink::Logistic)?;
            Ok((t, measure_intransitivity(&advantage).measure))
        })
        .collect()
}

/// Full convergence experiment: for every `(t, games_per_pair, trial)` cell,
/// the ground-truth measure and one empirical measurement from a freshly
/// simulated match log.
///
/// Rows come out sorted by `(t, games_per_pair, trial)`; each cell draws
/// its own seed from the root seed and its grid position, so the table is a
/// pure function of the arguments.
pub fn run_experiment(
    family: Family,
    t_values: &[f64],
    games_schedule: &[u64],
    trials: u32,
    seed: u64,
) -> Result<Vec<ExperimentRow>, RpsError> {
    if games_schedule.is_empty() {
        return Err(RpsError::EmptySchedule);
    }
    let mut rows = Vec::new();
    for (ti, &t) in t_values.iter().enumerate() {
        let point = FamilyPoint::new(family, t)?;
        let advantage = ground_truth_advantage(&point.profile, SigmoidLink::Logistic)?;
        let i_truth = measure_intransitivity(&advantage).measure;
        for (ni, &games_per_pair) in games_schedule.iter().enumerate() {
            for trial in 0..trials {
                let cell = (ti * games_schedule.len() + ni) as u64;
                let trial_seed = derive_seed(seed, cell, trial as u64);
                let records = simulate_matches(&point.profile, games_per_pair, trial_seed);
                let i_hat = measure_from_records(
                    &records,
                    point.profile.players(),
                    EXPERIMENT_SMOOTHING,
                    SigmoidLink::Logistic,
                )?
                .measure;
                rows.push(ExperimentRow {
                    family,
                    t,
                    games_per_pair,
                    trial,
                    i_truth,
                    i_hat,
                });
            }
        }
    }
    Ok(rows)
}
