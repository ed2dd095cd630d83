//! The Elo process as a seeded discrete-time Markov chain.
//!
//! Each step selects an unordered pair of players from the selection
//! matrix, draws the winner from the payoff matrix, and transfers
//! `η·(outcome − σ(r_i − r_j))` rating points from loser to winner. The
//! delta is computed once and applied with opposite signs, so the rating
//! sum is conserved up to one floating rounding per step and the full
//! vector moves at most `√2·η` per step.
//!
//! All randomness comes from a `ChaCha8` generator seeded from the
//! config's 64-bit seed, so trajectories are a pure function of
//! `(config, steps, stride)` and portable across platforms. Do not change
//! the generator without renaming the seed field.

use crate::game::{GameModelError, MatchRecord, PayoffMatrix, SelectionMatrix, SigmoidLink};
use crate::hodge::{div, grad, RatingVector};
use crate::matrix::SquareMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Accumulated rounding allowance for the conservation check on chain
/// states; paired add/subtract leaves only rounding drift.
pub const CHAIN_SUM_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum ChainError {
    #[error(transparent)]
    Game(#[from] GameModelError),
    #[error("gain must be positive, got {got}")]
    BadGain { got: f64 },
}

/// Everything a chain run depends on. Two configs with equal fields produce
/// bit-identical trajectories.
#[derive(Debug, Clone)]
pub struct ChainConfig {
    pub payoff: PayoffMatrix,
    pub selection: SelectionMatrix,
    pub gain: f64,
    pub link: SigmoidLink,
    pub seed: u64,
}

impl ChainConfig {
    pub fn new(
        payoff: PayoffMatrix,
        selection: SelectionMatrix,
        gain: f64,
        link: SigmoidLink,
        seed: u64,
    ) -> Result<Self, ChainError> {
        if payoff.dim() != selection.dim() {
            return Err(ChainError::Game(GameModelError::DimensionMismatch {
                left: payoff.dim(),
                right: selection.dim(),
            }));
        }
        if !(gain > 0.0) {
            return Err(ChainError::BadGain { got: gain });
        }
        Ok(Self {
            payoff,
            selection,
            gain,
            link,
            seed,
        })
    }

    pub fn dim(&self) -> usize {
        self.payoff.dim()
    }
}

/// Ratings after `step` games.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    pub step: u64,
    pub ratings: RatingVector,
}

impl ChainState {
    fn from_values(step: u64, values: Vec<f64>) -> Self {
        let ratings = RatingVector::with_tolerance(values, CHAIN_SUM_TOL)
            .expect("chain drifted off the conservation subspace");
        Self { step, ratings }
    }
}

/// A recorded run: states sampled every `stride` steps (step 0 and the
/// final step always included) plus the complete match log, one record per
/// step.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub states: Vec<ChainState>,
    pub matches: Vec<MatchRecord>,
}

/// All ratings start at zero: the chain begins at the origin.
pub fn init_chain(config: &ChainConfig) -> ChainState {
    ChainState::from_values(0, vec![0.0; config.dim()])
}

/// Applies one game outcome. `winner_is_first` refers to `i`.
///
/// The single shared delta keeps `Σr` constant up to one rounding and
/// bounds the step displacement by `√2·η` since `|outcome − σ| ≤ 1`.
pub(crate) fn apply_outcome(
    values: &mut [f64],
    i: usize,
    j: usize,
    winner_is_first: bool,
    gain: f64,
    link: SigmoidLink,
) {
    let outcome = if winner_is_first { 1.0 } else { 0.0 };
    let delta = gain * (outcome - link.value(values[i] - values[j]));
    debug_assert!(delta.abs() <= gain);
    values[i] += delta;
    values[j] -= delta;
}

/// One transition of the chain: sample a pair, sample the winner, update.
pub fn step_chain<R: Rng>(
    state: &ChainState,
    config: &ChainConfig,
    rng: &mut R,
) -> (ChainState, MatchRecord) {
    let (i, j) = sample_pair(&config.selection, rng);
    let winner_is_first = rng.gen::<f64>() < config.payoff.get(i, j);
    let mut values = state.ratings.values().to_vec();
    apply_outcome(&mut values, i, j, winner_is_first, config.gain, config.link);
    let winner = if winner_is_first { i } else { j };
    let record = MatchRecord::new(i, j, winner, state.step)
        .expect("sampled players are distinct by construction");
    (ChainState::from_values(state.step + 1, values), record)
}

/// Samples an unordered pair from the probability mass function the
/// selection matrix doubly encodes: pair `{i,j}` is drawn with probability
/// proportional to `Q[i][j] + Q[j][i]`.
fn sample_pair<R: Rng>(selection: &SelectionMatrix, rng: &mut R) -> (usize, usize) {
    let m = selection.dim();
    let mut total = 0.0;
    for i in 0..m {
        for j in (i + 1)..m {
            total += selection.get(i, j) + selection.get(j, i);
        }
    }
    let target = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut last = (0, 1);
    for i in 0..m {
        for j in (i + 1)..m {
            let w = selection.get(i, j) + selection.get(j, i);
            if w <= 0.0 {
                continue;
            }
            last = (i, j);
            acc += w;
            if target < acc {
                return (i, j);
            }
        }
    }
    // Rounding pushed the target past the final accumulator.
    last
}

/// Deterministic one-step expectation `f(r) = E[r^(t+1) | r]`.
///
/// Coordinate `i` drifts by `η·Σ_j Q[i][j]·(P[i][j] − σ(r_i − r_j))`: pair
/// `{i,j}` is played with probability `Q[i][j] + Q[j][i]` and transfers
/// `η·(P[i][j] − σ(r_i − r_j))` to `i` in expectation, and the two halves
/// of the symmetric selection matrix fold into one row sum. The stability
/// equation's roots are exactly the fixed points of this map.
pub fn expected_step(ratings: &RatingVector, config: &ChainConfig) -> RatingVector {
    let m = config.dim();
    assert_eq!(ratings.dim(), m, "expected_step: dimension mismatch");
    let sig_grad = grad(ratings.values());
    let bracket = SquareMatrix::from_fn(m, |i, j| {
        if i == j {
            0.0
        } else {
            config.selection.get(i, j) * (config.payoff.get(i, j) - config.link.value(sig_grad.get(i, j)))
        }
    });
    // Row sums of the skew-weighted bracket: m times its divergence.
    let drift: Vec<f64> = div(&bracket).iter().map(|d| d * m as f64).collect();
    let values: Vec<f64> = ratings
        .values()
        .iter()
        .zip(&drift)
        .map(|(r, d)| r + config.gain * d)
        .collect();
    RatingVector::with_tolerance(values, 1e-12)
        .expect("expected step drifted off the conservation subspace")
}

/// Runs `steps` transitions from the origin, recording states every
/// `stride` steps. Deterministic given the config's seed.
pub fn run_chain(config: &ChainConfig, steps: u64, record_stride: u64) -> Trajectory {
    assert!(record_stride >= 1, "record_stride must be at least 1");
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut state = init_chain(config);
    let mut states = vec![state.clone()];
    let mut matches = Vec::with_capacity(steps as usize);
    for _ in 0..steps {
        let (next, record) = step_chain(&state, config, &mut rng);
        matches.push(record);
        state = next;
        if state.step % record_stride == 0 || state.step == steps {
            states.push(state.clone());
        }
    }
    Trajectory { states, matches }
}
