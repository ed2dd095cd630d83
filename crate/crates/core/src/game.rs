//! Payoff, advantage, and selection matrices, the sigmoid link between
//! them, and empirical payoff estimation from match logs.

use crate::hodge::{HodgeError, SkewMatrix};
use crate::matrix::{MatrixError, SquareMatrix};
use std::collections::HashSet;
use thiserror::Error;

/// Tolerance for the pairwise complement check `P[i][j] + P[j][i] == 1`.
pub const PAIR_SUM_TOL: f64 = 1e-12;
/// Tolerance for the selection-matrix total-weight check.
pub const SELECTION_TOTAL_TOL: f64 = 1e-12;
/// Off-diagonal payoff entries must keep at least this distance from 0 and 1.
/// Anything closer is treated as a boundary value and rejected, because its
/// logit is numerically meaningless; callers holding raw counts should smooth
/// via [`estimate_payoff`] instead of clamping.
pub const PAYOFF_MARGIN: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum GameModelError {
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Hodge(#[from] HodgeError),
    #[error("payoff diagonal entry ({i},{i}) must be 0.5, found {found}")]
    PayoffDiagonal { i: usize, found: f64 },
    #[error(
        "payoff entries ({i},{j}) and ({j},{i}) must sum to 1: \
         {a} + {b} deviates by {defect:e}"
    )]
    PayoffComplement {
        i: usize,
        j: usize,
        a: f64,
        b: f64,
        defect: f64,
    },
    #[error(
        "payoff entry ({i},{j}) = {value} is outside ({margin:e}, 1 - {margin:e}); \
         boundary win probabilities have no finite advantage"
    )]
    PayoffOutOfRange { i: usize, j: usize, value: f64, margin: f64 },
    #[error("selection entry ({i},{j}) must be non-negative, found {found}")]
    SelectionNegative { i: usize, j: usize, found: f64 },
    #[error("selection diagonal entry ({i},{i}) must be 0, found {found}")]
    SelectionDiagonal { i: usize, found: f64 },
    #[error("selection entries ({i},{j}) and ({j},{i}) differ: {a} vs {b}")]
    SelectionAsymmetric { i: usize, j: usize, a: f64, b: f64 },
    #[error("selection weights must total 2, found {found}")]
    SelectionTotal { found: f64 },
    #[error("selection graph is disconnected: node {node} is unreachable from node 0")]
    SelectionDisconnected { node: usize },
    #[error("selection matrix needs at least 2 players, got {dim}")]
    SelectionTooSmall { dim: usize },
    #[error("match record: players must differ, both are {player}")]
    SamePlayer { player: usize },
    #[error("match record: winner {winner} is neither player {i} nor player {j}")]
    WinnerNotPlaying { winner: usize, i: usize, j: usize },
    #[error("match record references player {index}, but there are only {players} players")]
    PlayerOutOfRange { index: usize, players: usize },
    #[error("smoothing must be positive, got {got}")]
    BadSmoothing { got: f64 },
    #[error("estimation needs at least 2 players, got {got}")]
    TooFewPlayers { got: usize },
    #[error("no games recorded for pair(s) {}", format_pairs(.pairs))]
    MissingPairs { pairs: Vec<(usize, usize)> },
    #[error("edge ({i},{j}) is out of range for {players} players")]
    EdgeOutOfRange { i: usize, j: usize, players: usize },
    #[error("edge ({i},{i}) is a self-loop")]
    SelfLoop { i: usize },
    #[error("edge set is not a spanning tree: expected {expected} edges, got {got}")]
    WrongEdgeCount { expected: usize, got: usize },
    #[error("edge set is not a spanning tree: edge ({i},{j}) closes a cycle")]
    CycleDetected { i: usize, j: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
}

fn format_pairs(pairs: &[(usize, usize)]) -> String {
    pairs
        .iter()
        .map(|(i, j)| format!("({i},{j})"))
        .collect::<Vec<_>>()
        .join(", ")
}

/// The link between rating differences and win probabilities.
///
/// Only the logistic link is provided; the enum keeps the name explicit in
/// configurations and leaves room for other sigmoids.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SigmoidLink {
    /// `σ(x) = 1 / (1 + e^{-x})`, inverse `σ⁻¹(p) = ln(p / (1 - p))`.
    #[default]
    Logistic,
}

impl SigmoidLink {
    pub fn value(self, x: f64) -> f64 {
        match self {
            // Branch on sign so large |x| never evaluates exp overflow.
            SigmoidLink::Logistic => {
                if x >= 0.0 {
                    1.0 / (1.0 + (-x).exp())
                } else {
                    let e = x.exp();
                    e / (1.0 + e)
                }
            }
        }
    }

    pub fn inverse(self, p: f64) -> f64 {
        match self {
            SigmoidLink::Logistic => (p / (1.0 - p)).ln(),
        }
    }

    pub fn derivative(self, x: f64) -> f64 {
        match self {
            SigmoidLink::Logistic => {
                let s = self.value(x);
                s * (1.0 - s)
            }
        }
    }
}

/// m×m matrix of win probabilities: `probs[i][j]` is the probability that
/// player `i` defeats player `j`. Draws are not modelled, so off-diagonal
/// pairs are exact complements and the diagonal is fixed at 0.5.
#[derive(Debug, Clone, PartialEq)]
pub struct PayoffMatrix {
    probs: SquareMatrix,
}

impl PayoffMatrix {
    pub fn new(probs: SquareMatrix) -> Result<Self, GameModelError> {
        let m = probs.dim();
        for i in 0..m {
            let d = probs.get(i, i);
            if d != 0.5 {
                return Err(GameModelError::PayoffDiagonal { i, found: d });
            }
            for j in (i + 1)..m {
                let a = probs.get(i, j);
                let b = probs.get(j, i);
                let defect = (a + b - 1.0).abs();
                if defect > PAIR_SUM_TOL {
                    return Err(GameModelError::PayoffComplement { i, j, a, b, defect });
                }
                for (r, c, v) in [(i, j, a), (j, i, b)] {
                    if !(PAYOFF_MARGIN..=1.0 - PAYOFF_MARGIN).contains(&v) {
                        return Err(GameModelError::PayoffOutOfRange {
                            i: r,
                            j: c,
                            value: v,
                            margin: PAYOFF_MARGIN,
                        });
                    }
                }
            }
        }
        Ok(Self { probs })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, GameModelError> {
        Self::new(SquareMatrix::from_rows(rows)?)
    }

    /// The fully symmetric game: every entry 0.5.
    pub fn even(dim: usize) -> Self {
        Self {
            probs: SquareMatrix::from_fn(dim, |_, _| 0.5),
        }
    }

    /// Two-player payoff from the probability that player 0 wins.
    pub fn two_player(p01: f64) -> Result<Self, GameModelError> {
        Self::from_rows(&[vec![0.5, p01], vec![1.0 - p01, 0.5]])
    }

    pub fn dim(&self) -> usize {
        self.probs.dim()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.probs.get(i, j)
    }

    pub fn as_matrix(&self) -> &SquareMatrix {
        &self.probs
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.probs.rows()
    }
}

/// Skew-symmetric matrix of pairwise advantages, `A = σ⁻¹(P)` element-wise.
#[derive(Debug, Clone, PartialEq)]
pub struct AdvantageMatrix {
    skew: SkewMatrix,
}

impl AdvantageMatrix {
    pub fn new(skew: SkewMatrix) -> Self {
        Self { skew }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, GameModelError> {
        Ok(Self {
            skew: SkewMatrix::from_rows(rows)?,
        })
    }

    pub fn dim(&self) -> usize {
        self.skew.dim()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.skew.get(i, j)
    }

    pub fn as_skew(&self) -> &SkewMatrix {
        &self.skew
    }

    pub fn into_skew(self) -> SkewMatrix {
        self.skew
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.skew.rows()
    }
}

/// Applies the inverse link element-wise: `A[i][j] = σ⁻¹(P[i][j])`.
///
/// Skew symmetry follows from the payoff complement invariant and the link
/// identity `σ⁻¹(p) = -σ⁻¹(1-p)`; it is re-validated within 1e-12.
pub fn advantage_from_payoff(
    payoff: &PayoffMatrix,
    link: SigmoidLink,
) -> Result<AdvantageMatrix, GameModelError> {
    let m = payoff.dim();
    let raw = SquareMatrix::from_fn(m, |i, j| {
        if i == j {
            0.0
        } else {
            link.inverse(payoff.get(i, j))
        }
    });
    Ok(AdvantageMatrix::new(SkewMatrix::new(raw)?))
}

/// Applies the link element-wise: `P[i][j] = σ(A[i][j])`.
///
/// Round-trips with [`advantage_from_payoff`] to 1e-12 on its range. Errors
/// only when an advantage entry is so large that the resulting probability
/// falls within [`PAYOFF_MARGIN`] of the boundary.
pub fn payoff_from_advantage(
    advantage: &AdvantageMatrix,
    link: SigmoidLink,
) -> Result<PayoffMatrix, GameModelError> {
    let m = advantage.dim();
    let probs = SquareMatrix::from_fn(m, |i, j| {
        if i == j {
            0.5
        } else {
            link.value(advantage.get(i, j))
        }
    });
    PayoffMatrix::new(probs)
}

/// One observed game between two players.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatchRecord {
    pub player_i: usize,
    pub player_j: usize,
    pub winner: usize,
    pub sequence_number: u64,
}

impl MatchRecord {
    pub fn new(
        player_i: usize,
        player_j: usize,
        winner: usize,
        sequence_number: u64,
    ) -> Result<Self, GameModelError> {
        if player_i == player_j {
            return Err(GameModelError::SamePlayer { player: player_i });
        }
        if winner != player_i && winner != player_j {
            return Err(GameModelError::WinnerNotPlaying {
                winner,
                i: player_i,
                j: player_j,
            });
        }
        Ok(Self {
            player_i,
            player_j,
            winner,
            sequence_number,
        })
    }

    pub fn loser(&self) -> usize {
        if self.winner == self.player_i {
            self.player_j
        } else {
            self.player_i
        }
    }
}

/// Empirical payoff matrix from a match log with additive smoothing:
/// `P̂[i][j] = (wins_ij + smoothing) / (games_ij + 2·smoothing)`.
///
/// Smoothing keeps every estimate strictly inside (0,1) so the logit stays
/// finite on finite samples. Every unordered pair must appear at least once;
/// the error lists the pairs that do not.
pub fn estimate_payoff(
    records: &[MatchRecord],
    players: usize,
    smoothing: f64,
) -> Result<PayoffMatrix, GameModelError> {
    if players < 2 {
        return Err(GameModelError::TooFewPlayers { got: players });
    }
    if !(smoothing > 0.0) {
        return Err(GameModelError::BadSmoothing { got: smoothing });
    }
    let mut wins = vec![0u64; players * players];
    for rec in records {
        for idx in [rec.player_i, rec.player_j, rec.winner] {
            if idx >= players {
                return Err(GameModelError::PlayerOutOfRange {
                    index: idx,
                    players,
                });
            }
        }
        wins[rec.winner * players + rec.loser()] += 1;
    }

    let mut missing = Vec::new();
    let mut probs = SquareMatrix::from_fn(players, |_, _| 0.5);
    for i in 0..players {
        for j in (i + 1)..players {
            let w_ij = wins[i * players + j] as f64;
            let w_ji = wins[j * players + i] as f64;
            let games = w_ij + w_ji;
            if games == 0.0 {
                missing.push((i, j));
                continue;
            }
            let p = (w_ij + smoothing) / (games + 2.0 * smoothing);
            probs.set(i, j, p);
            // Stored as the exact complement so the pair invariant holds
            // bit-for-bit.
            probs.set(j, i, 1.0 - p);
        }
    }
    if !missing.is_empty() {
        return Err(GameModelError::MissingPairs { pairs: missing });
    }
    PayoffMatrix::new(probs)
}

/// Symmetric non-negative pairing weights with zero diagonal, total weight 2
/// (two copies of one probability mass function over unordered pairs), and a
/// connected support graph.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionMatrix {
    weights: SquareMatrix,
}

impl SelectionMatrix {
    pub fn new(weights: SquareMatrix) -> Result<Self, GameModelError> {
        let m = weights.dim();
        if m < 2 {
            return Err(GameModelError::SelectionTooSmall { dim: m });
        }
        let mut total = 0.0;
        for i in 0..m {
            let d = weights.get(i, i);
            if d != 0.0 {
                return Err(GameModelError::SelectionDiagonal { i, found: d });
            }
            for j in (i + 1)..m {
                let a = weights.get(i, j);
                let b = weights.get(j, i);
                // Negation catches NaN as well as genuine negatives.
                if !(a >= 0.0) || !(b >= 0.0) || !a.is_finite() || !b.is_finite() {
                    let (bi, bj, bad) = if a >= 0.0 && a.is_finite() {
                        (j, i, b)
                    } else {
                        (i, j, a)
                    };
                    return Err(GameModelError::SelectionNegative {
                        i: bi,
                        j: bj,
                        found: bad,
                    });
                }
                if (a - b).abs() > SELECTION_TOTAL_TOL {
                    return Err(GameModelError::SelectionAsymmetric { i, j, a, b });
                }
                total += a + b;
            }
        }
        if (total - 2.0).abs() > SELECTION_TOTAL_TOL {
            return Err(GameModelError::SelectionTotal { found: total });
        }
        // Connectivity over strictly positive weights.
        let mut seen = vec![false; m];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for v in 0..m {
                if !seen[v] && weights.get(u, v) > 0.0 {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        if let Some(node) = seen.iter().position(|s| !s) {
            return Err(GameModelError::SelectionDisconnected { node });
        }
        Ok(Self { weights })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, GameModelError> {
        Self::new(SquareMatrix::from_rows(rows)?)
    }

    pub fn dim(&self) -> usize {
        self.weights.dim()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.weights.get(i, j)
    }

    pub fn as_matrix(&self) -> &SquareMatrix {
        &self.weights
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.weights.rows()
    }

    /// Unordered pairs with positive weight, each with its total selection
    /// probability `Q[i][j] + Q[j][i]`, normalised to sum to 1.
    pub fn pair_probabilities(&self) -> Vec<((usize, usize), f64)> {
        let m = self.dim();
        let mut pairs = Vec::new();
        let mut total = 0.0;
        for i in 0..m {
            for j in (i + 1)..m {
                let w = self.get(i, j) + self.get(j, i);
                if w > 0.0 {
                    pairs.push(((i, j), w));
                    total += w;
                }
            }
        }
        for (_, w) in pairs.iter_mut() {
            *w /= total;
        }
        pairs
    }
}

/// Complete-graph selection with equal weight on every pair.
pub fn uniform_selection(players: usize) -> Result<SelectionMatrix, GameModelError> {
    if players < 2 {
        return Err(GameModelError::SelectionTooSmall { dim: players });
    }
    let w = 2.0 / (players * (players - 1)) as f64;
    SelectionMatrix::new(SquareMatrix::from_fn(
        players,
        |i, j| if i == j { 0.0 } else { w },
    ))
}

/// Validates that `edges` form a spanning tree on `players` vertices,
/// reporting self-loops, out-of-range endpoints, cycles, or a wrong count.
pub fn check_spanning_tree(
    edges: &[(usize, usize)],
    players: usize,
) -> Result<(), GameModelError> {
    if edges.len() + 1 != players {
        return Err(GameModelError::WrongEdgeCount {
            expected: players.saturating_sub(1),
            got: edges.len(),
        });
    }
    let mut parent: Vec<usize> = (0..players).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for &(i, j) in edges {
        if i >= players || j >= players {
            return Err(GameModelError::EdgeOutOfRange { i, j, players });
        }
        if i == j {
            return Err(GameModelError::SelfLoop { i });
        }
        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
        if ri == rj {
            return Err(GameModelError::CycleDetected { i, j });
        }
        parent[ri] = rj;
    }
    // m-1 edges without a cycle on m vertices is connected.
    Ok(())
}

/// Selection matrix of a spanning tree: each tree edge carries weight
/// `1/(m-1)` in both symmetric positions, totalling 2.
pub fn tree_selection(
    edges: &[(usize, usize)],
    players: usize,
) -> Result<SelectionMatrix, GameModelError> {
    check_spanning_tree(edges, players)?;
    let w = 1.0 / (players - 1) as f64;
    let mut weights = SquareMatrix::zeros(players);
    for &(i, j) in edges {
        weights.set(i, j, w);
        weights.set(j, i, w);
    }
    SelectionMatrix::new(weights)
}

/// Canonical edge list of a selection matrix's support, for diagnostics.
pub fn support_edges(selection: &SelectionMatrix) -> Vec<(usize, usize)> {
    let m = selection.dim();
    let mut edges = Vec::new();
    let mut seen = HashSet::new();
    for i in 0..m {
        for j in (i + 1)..m {
            if selection.get(i, j) > 0.0 && seen.insert((i, j)) {
                edges.push((i, j));
            }
        }
    }
    edges
}
