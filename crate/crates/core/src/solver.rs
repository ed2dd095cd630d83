//! Final-score solvers.
//!
//! A final score for `(P, Q)` is the sum-zero root of the stability map
//! `r ↦ div(Q ⊙ σ(grad(r))) − div(Q ⊙ P)`. That map is the (scaled)
//! gradient of a smooth convex potential, so the Newton iteration here —
//! taken on the sum-zero subspace via an augmented Laplacian system, with a
//! backtracking line search on the potential — converges from any start
//! when the selection graph is connected. A damped fixed-point iteration
//! covers the rare case where a Newton step cannot be computed.
//!
//! When the selection matrix is a spanning tree the root can be written
//! down directly by summing inverse-link payoffs along root paths; both
//! routes are kept and cross-checked in tests. Sampling final scores over
//! many selection matrices (the attainable set for a fixed payoff) is done
//! by enumerating or drawing spanning trees and by solving random connected
//! selections.

use crate::game::{
    check_spanning_tree, tree_selection, GameModelError, PayoffMatrix, SelectionMatrix,
    SigmoidLink,
};
use crate::hodge::{div, grad, RatingVector};
use crate::matrix::SquareMatrix;
use crate::seeds::derive_seed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

/// Default convergence tolerance on the ∞-norm of the stability residual.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Default Newton iteration cap.
pub const DEFAULT_MAX_ITER: usize = 100;
/// Cap on damped fixed-point fallback steps.
const MAX_FALLBACK_STEPS: usize = 100_000;
/// Armijo sufficient-decrease constant for the Newton line search.
const ARMIJO_C: f64 = 1e-4;
/// Cap on the ∞-norm of a Newton direction. In saturated regions the
/// Laplacian weights vanish exponentially and the raw direction explodes;
/// clipping keeps line-search candidates on the scale of the iterate while
/// preserving the descent property.
const NEWTON_STEP_CAP: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    Newton,
    DampedFixedPoint,
    TreeClosedForm,
}

/// A solver run: the solution, its residual ∞-norm, and how it was found.
#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub solution: RatingVector,
    pub residual_norm: f64,
    pub iterations: usize,
    pub method: SolveMethod,
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(
        "solver stopped at residual {residual:e} (tolerance {tol:e}) after {iterations} iterations",
        residual = best.residual_norm,
        iterations = best.iterations
    )]
    DidNotConverge { tol: f64, best: SolveReport },
    #[error(transparent)]
    Game(#[from] GameModelError),
}

/// Stability residual `div(Q ⊙ σ(grad(r))) − div(Q ⊙ P)`.
///
/// A final score is exactly a sum-zero root of this map; the residual
/// itself always sums to zero because the weighted difference matrix is
/// skew-symmetric.
pub fn stability_residual(
    ratings: &RatingVector,
    payoff: &PayoffMatrix,
    selection: &SelectionMatrix,
    link: SigmoidLink,
) -> Vec<f64> {
    let m = payoff.dim();
    assert_eq!(ratings.dim(), m, "stability_residual: dimension mismatch");
    assert_eq!(selection.dim(), m, "stability_residual: dimension mismatch");
    let sigma_grad = grad(ratings.values()).into_matrix().map(|x| link.value(x));
    let lhs = div(&selection.as_matrix().hadamard(&sigma_grad));
    let rhs = div(&selection.as_matrix().hadamard(payoff.as_matrix()));
    lhs.iter().zip(&rhs).map(|(a, b)| a - b).collect()
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// Convex potential whose critical points are the stability-equation roots.
/// Used only as the line-search merit function.
fn potential(
    values: &[f64],
    payoff: &PayoffMatrix,
    selection: &SelectionMatrix,
    link: SigmoidLink,
) -> f64 {
    let softplus = |x: f64| {
        if x > 0.0 {
            x + (-x).exp().ln_1p()
        } else {
            x.exp().ln_1p()
        }
    };
    let m = values.len();
    let mut phi = 0.0;
    for i in 0..m {
        for j in (i + 1)..m {
            let w = selection.get(i, j) + selection.get(j, i);
            if w == 0.0 {
                continue;
            }
            let d = values[i] - values[j];
            debug_assert!(matches!(link, SigmoidLink::Logistic));
            phi += w * (softplus(d) - payoff.get(i, j) * d);
        }
    }
    phi
}

/// Gaussian elimination with partial pivoting. Returns `None` on a
/// (numerically) singular system.
fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))
            .unwrap();
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in (col + 1)..n {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in (row + 1)..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

/// One Newton direction: solves `(L(r)/m + μI)·δ = −F` constrained to
/// `Σδ = 0` by bordering the singular Laplacian with the conservation row.
///
/// The ridge `μ` scales with the residual norm. Away from the solution it
/// keeps the system well conditioned even when saturated links drive the
/// Laplacian weights below rounding (where raw directions stop being
/// descent directions), and it vanishes fast enough near the solution to
/// keep Newton's local convergence rate.
fn newton_direction(
    values: &[f64],
    residual: &[f64],
    selection: &SelectionMatrix,
    link: SigmoidLink,
) -> Option<Vec<f64>> {
    let m = values.len();
    let mu = (1e-3 * inf_norm(residual)).clamp(1e-14, 1e-2);
    let mut a = vec![vec![0.0; m + 1]; m + 1];
    for i in 0..m {
        for j in 0..m {
            if i == j {
                continue;
            }
            let w = selection.get(i, j) * link.derivative(values[i] - values[j]) / m as f64;
            a[i][j] -= w;
            a[i][i] += w;
        }
        a[i][i] += mu;
        a[i][m] = 1.0;
        a[m][i] = 1.0;
    }
    let mut b: Vec<f64> = residual.iter().map(|f| -f).collect();
    b.push(0.0);
    let sol = solve_linear(a, b)?;
    Some(sol[..m].to_vec())
}

fn center(values: &mut [f64]) {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    for v in values.iter_mut() {
        *v -= mean;
    }
}

/// Damped fixed-point iteration `r ← r − s·F(r)`, with the step `s`
/// starting at 1 and halved whenever the residual fails to decrease.
fn damped_fixed_point(
    start: Vec<f64>,
    payoff: &PayoffMatrix,
    selection: &SelectionMatrix,
    link: SigmoidLink,
    tol: f64,
    iterations_so_far: usize,
) -> Result<SolveReport, SolveError> {
    let mut values = start;
    let mut residual = raw_residual(&values, payoff, selection, link);
    let mut norm = inf_norm(&residual);
    let mut step = 1.0;
    let mut iterations = iterations_so_far;
    for _ in 0..MAX_FALLBACK_STEPS {
        if norm <= tol {
            return Ok(report(values, norm, iterations, SolveMethod::DampedFixedPoint));
        }
        let mut candidate: Vec<f64> = values
            .iter()
            .zip(&residual)
            .map(|(v, f)| v - step * f)
            .collect();
        center(&mut candidate);
        let cand_residual = raw_residual(&candidate, payoff, selection, link);
        let cand_norm = inf_norm(&cand_residual);
        iterations += 1;
        if cand_norm < norm {
            values = candidate;
            residual = cand_residual;
            norm = cand_norm;
        } else {
            step *= 0.5;
            if step < 1e-16 {
                break;
            }
        }
    }
    Err(SolveError::DidNotConverge {
        tol,
        best: report(values, norm, iterations, SolveMethod::DampedFixedPoint),
    })
}

fn raw_residual(
    values: &[f64],
    payoff: &PayoffMatrix,
    selection: &SelectionMatrix,
    link: SigmoidLink,
) -> Vec<f64> {
    let m = values.len();
    let sigma_grad = SquareMatrix::from_fn(m, |i, j| link.value(values[i] - values[j]));
    let lhs = div(&selection.as_matrix().hadamard(&sigma_grad));
    let rhs = div(&selection.as_matrix().hadamard(payoff.as_matrix()));
    lhs.iter().zip(&rhs).map(|(a, b)| a - b).collect()
}

fn report(mut values: Vec<f64>, norm: f64, iterations: usize, method: SolveMethod) -> SolveReport {
    center(&mut values);
    SolveReport {
        solution: RatingVector::with_tolerance(values, 1e-9)
            .expect("solver produced a non-conserved vector"),
        residual_norm: norm,
        iterations,
        method,
    }
}

/// Solves the stability equation from the origin.
pub fn solve_final_score(
    payoff: &PayoffMatrix,
    selection: &SelectionMatrix,
    link: SigmoidLink,
    tol: f64,
    max_iter: usize,
) -> Result<SolveReport, SolveError> {
    let start = RatingVector::zeros(payoff.dim());
    solve_final_score_from(payoff, selection, link, &start, tol, max_iter)
}

/// Solves the stability equation from a caller-chosen sum-zero start.
///
/// Newton on the sum-zero subspace with a backtracking line search; falls
/// back to the damped fixed-point iteration if a Newton step stalls. On
/// non-convergence the error carries the best report found.
pub fn solve_final_score_from(
    payoff: &PayoffMatrix,
    selection: &SelectionMatrix,
    link: SigmoidLink,
    start: &RatingVector,
    tol: f64,
    max_iter: usize,
) -> Result<SolveReport, SolveError> {
    let m = payoff.dim();
    if selection.dim() != m {
        return Err(GameModelError::DimensionMismatch {
            left: m,
            right: selection.dim(),
        }
        .into());
    }
    assert_eq!(start.dim(), m, "solve: start dimension mismatch");
    assert!(tol > 0.0, "solve: tolerance must be positive");

    let mut values = start.values().to_vec();
    center(&mut values);
    let mut residual = raw_residual(&values, payoff, selection, link);
    let mut norm = inf_norm(&residual);

    for iteration in 0..max_iter {
        if norm <= tol {
            return Ok(report(values, norm, iteration, SolveMethod::Newton));
        }
        let Some(mut direction) = newton_direction(&values, &residual, selection, link) else {
            return damped_fixed_point(values, payoff, selection, link, tol, iteration);
        };
        let direction_norm = inf_norm(&direction);
        if direction_norm > NEWTON_STEP_CAP {
            let scale = NEWTON_STEP_CAP / direction_norm;
            for d in direction.iter_mut() {
                *d *= scale;
            }
        }
        let phi0 = potential(&values, payoff, selection, link);

        // Fast path: accept the full step when it at least halves the
        // residual without pushing the potential uphill. Near the root this
        // is the quadratic phase, where potential differences (~‖F‖²) drop
        // below what f64 can resolve and a sufficient-decrease test would
        // stall; the no-uphill guard (with rounding slack) keeps saturated
        // plateau-to-plateau jumps from cycling past the line search.
        let mut full: Vec<f64> = values
            .iter()
            .zip(&direction)
            .map(|(v, d)| v + d)
            .collect();
        center(&mut full);
        let full_residual = raw_residual(&full, payoff, selection, link);
        let full_norm = inf_norm(&full_residual);
        let phi_slack = 1e-12 * (1.0 + phi0.abs());
        if full_norm <= 0.5 * norm
            && potential(&full, payoff, selection, link) <= phi0 + phi_slack
        {
            values = full;
            residual = full_residual;
            norm = full_norm;
            continue;
        }

        // Globalization: backtracking line search on the convex potential.
        // δ is a descent direction; 2m·F·δ is the directional derivative.
        let slope =
            2.0 * m as f64 * residual.iter().zip(&direction).map(|(f, d)| f * d).sum::<f64>();
        if !slope.is_finite() || slope >= 0.0 {
            return damped_fixed_point(values, payoff, selection, link, tol, iteration);
        }
        let mut step = 0.5;
        let mut accepted = false;
        while step >= 1e-12 {
            let mut candidate: Vec<f64> = values
                .iter()
                .zip(&direction)
                .map(|(v, d)| v + step * d)
                .collect();
            center(&mut candidate);
            let phi = potential(&candidate, payoff, selection, link);
            if phi <= phi0 + ARMIJO_C * step * slope {
                values = candidate;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            return damped_fixed_point(values, payoff, selection, link, tol, iteration);
        }
        residual = raw_residual(&values, payoff, selection, link);
        norm = inf_norm(&residual);
    }
    if norm <= tol {
        return Ok(report(values, norm, max_iter, SolveMethod::Newton));
    }
    Err(SolveError::DidNotConverge {
        tol,
        best: report(values, norm, max_iter, SolveMethod::Newton),
    })
}

/// Closed-form final score when the selection matrix is a spanning tree.
///
/// Roots the tree at vertex 0, assigns every other vertex the signed sum of
/// inverse-link payoffs along its unique root path (so `r_i − r_j =
/// σ⁻¹(P[i][j])` holds across every tree edge), then recentres to mean
/// zero. The result satisfies the stability equation for
/// [`tree_selection`] of the same edges.
pub fn tree_final_score(
    payoff: &PayoffMatrix,
    tree_edges: &[(usize, usize)],
    link: SigmoidLink,
) -> Result<RatingVector, GameModelError> {
    let m = payoff.dim();
    check_spanning_tree(tree_edges, m)?;
    let mut adjacency = vec![Vec::new(); m];
    for &(i, j) in tree_edges {
        adjacency[i].push(j);
        adjacency[j].push(i);
    }
    let mut values = vec![0.0; m];
    let mut visited = vec![false; m];
    let mut stack = vec![0usize];
    visited[0] = true;
    while let Some(u) = stack.pop() {
        for &v in &adjacency[u] {
            if !visited[v] {
                visited[v] = true;
                // r_u - r_v = σ⁻¹(P[u][v]) across the edge.
                values[v] = values[u] - link.inverse(payoff.get(u, v));
                stack.push(v);
            }
        }
    }
    RatingVector::centered(values).map_err(GameModelError::from)
}

/// [`tree_final_score`] packaged as a report, with the residual evaluated
/// against the tree's own selection matrix.
pub fn tree_solve_report(
    payoff: &PayoffMatrix,
    tree_edges: &[(usize, usize)],
    link: SigmoidLink,
) -> Result<SolveReport, GameModelError> {
    let solution = tree_final_score(payoff, tree_edges, link)?;
    let norm = if payoff.dim() < 2 {
        0.0
    } else {
        let selection = tree_selection(tree_edges, payoff.dim())?;
        inf_norm(&stability_residual(&solution, payoff, &selection, link))
    };
    Ok(SolveReport {
        solution,
        residual_norm: norm,
        iterations: 0,
        method: SolveMethod::TreeClosedForm,
    })
}

/// Number of labelled spanning trees of the complete graph on `m` vertices
/// (`m^(m-2)`), unless it overflows.
pub fn complete_graph_tree_count(m: usize) -> Option<u128> {
    match m {
        0 => Some(0),
        1 | 2 => Some(1),
        _ => (m as u128).checked_pow(m as u32 - 2),
    }
}

/// All spanning trees of the complete graph on `m` vertices, decoded from
/// Prüfer sequences. Intended for small `m`; the count is `m^(m-2)`.
pub fn enumerate_spanning_trees(m: usize) -> Vec<Vec<(usize, usize)>> {
    match m {
        0 => Vec::new(),
        1 => vec![Vec::new()],
        2 => vec![vec![(0, 1)]],
        _ => {
            let mut trees = Vec::new();
            let mut seq = vec![0usize; m - 2];
            loop {
                trees.push(decode_pruefer(&seq, m));
                // Odometer over {0..m}^(m-2).
                let mut pos = 0;
                loop {
                    if pos == seq.len() {
                        return trees;
                    }
                    seq[pos] += 1;
                    if seq[pos] < m {
                        break;
                    }
                    seq[pos] = 0;
                    pos += 1;
                }
            }
        }
    }
}

fn decode_pruefer(seq: &[usize], m: usize) -> Vec<(usize, usize)> {
    let mut degree = vec![1usize; m];
    for &s in seq {
        degree[s] += 1;
    }
    let mut edges = Vec::with_capacity(m - 1);
    // Min-heap of current leaves via sorted insertion on a small vector.
    let mut leaves: Vec<usize> = (0..m).filter(|&v| degree[v] == 1).collect();
    leaves.sort_unstable_by(|a, b| b.cmp(a));
    for &s in seq {
        let leaf = leaves.pop().expect("pruefer decode: ran out of leaves");
        edges.push((leaf.min(s), leaf.max(s)));
        degree[leaf] -= 1;
        degree[s] -= 1;
        if degree[s] == 1 {
            let pos = leaves.partition_point(|&v| v > s);
            leaves.insert(pos, s);
        }
    }
    debug_assert_eq!(leaves.len(), 2);
    let (a, b) = (leaves[1], leaves[0]);
    edges.push((a.min(b), a.max(b)));
    edges
}

/// Uniform random spanning tree of the complete graph on `m` vertices,
/// drawn with the Aldous–Broder random walk (first-entry edges of a walk
/// until every vertex is visited).
pub fn random_spanning_tree<R: Rng>(m: usize, rng: &mut R) -> Vec<(usize, usize)> {
    if m <= 1 {
        return Vec::new();
    }
    let mut visited = vec![false; m];
    let mut current = rng.gen_range(0..m);
    visited[current] = true;
    let mut remaining = m - 1;
    let mut edges = Vec::with_capacity(m - 1);
    while remaining > 0 {
        // Uniform neighbour on the complete graph: any vertex but the
        // current one.
        let mut next = rng.gen_range(0..m - 1);
        if next >= current {
            next += 1;
        }
        if !visited[next] {
            visited[next] = true;
            remaining -= 1;
            edges.push((current.min(next), current.max(next)));
        }
        current = next;
    }
    edges.sort_unstable();
    edges
}

/// Random connected selection matrix: a uniform spanning tree plus each
/// remaining pair with probability 1/2, weights drawn from `[0.5, 1.5)` and
/// normalised to total weight 2.
pub fn random_connected_selection<R: Rng>(m: usize, rng: &mut R) -> SelectionMatrix {
    assert!(m >= 2, "random selection needs at least 2 players");
    let tree = random_spanning_tree(m, rng);
    let mut included = vec![false; m * m];
    for &(i, j) in &tree {
        included[i * m + j] = true;
    }
    for i in 0..m {
        for j in (i + 1)..m {
            if !included[i * m + j] && rng.gen::<f64>() < 0.5 {
                included[i * m + j] = true;
            }
        }
    }
    let mut weights = SquareMatrix::zeros(m);
    let mut total = 0.0;
    for i in 0..m {
        for j in (i + 1)..m {
            if included[i * m + j] {
                let w = 0.5 + rng.gen::<f64>();
                weights.set(i, j, w);
                weights.set(j, i, w);
                total += w;
            }
        }
    }
    let weights = weights.map(|w| w / total);
    SelectionMatrix::new(weights).expect("construction keeps every selection invariant")
}

/// Where a sampled final score came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ElotopeSource {
    /// Solved in closed form on this spanning tree.
    Tree { edges: Vec<(usize, usize)> },
    /// Solved numerically on [`random_connected_selection`] seeded with
    /// this exact value.
    RandomSelection { seed: u64 },
}

impl ElotopeSource {
    /// Compact descriptor used in CSV exports, e.g. `tree:0-1|1-2` or
    /// `randq:42`.
    pub fn label(&self) -> String {
        match self {
            ElotopeSource::Tree { edges } => {
                let parts: Vec<String> =
                    edges.iter().map(|(i, j)| format!("{i}-{j}")).collect();
                format!("tree:{}", parts.join("|"))
            }
            ElotopeSource::RandomSelection { seed } => format!("randq:{seed}"),
        }
    }
}

/// Final scores sampled over many selection matrices for one payoff.
/// Coincides with a single point exactly when the advantage matrix is
/// additively transitive.
#[derive(Debug, Clone)]
pub struct ElotopeSample {
    pub points: Vec<RatingVector>,
    pub sources: Vec<ElotopeSource>,
}

impl ElotopeSample {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Largest pairwise Euclidean distance between sampled points.
    pub fn diameter(&self) -> f64 {
        let mut best = 0.0_f64;
        for (k, a) in self.points.iter().enumerate() {
            for b in &self.points[k + 1..] {
                best = best.max(a.euclidean_distance(b));
            }
        }
        best
    }
}

/// Samples final scores for `payoff` across selection matrices.
///
/// Spanning trees are enumerated exhaustively when the complete graph has
/// at most `tree_budget` of them, otherwise `tree_budget` uniform random
/// trees are drawn. `random_q_budget` additional connected random
/// selections are solved numerically. Every sampled unit derives its seed
/// from `(seed, stream, index)`, so output is independent of evaluation
/// order. A single player yields the zero vector from the empty tree and
/// no random-selection samples (no valid selection matrix exists).
pub fn sample_elotope(
    payoff: &PayoffMatrix,
    link: SigmoidLink,
    tree_budget: usize,
    random_q_budget: usize,
    seed: u64,
) -> ElotopeSample {
    let m = payoff.dim();
    let mut points = Vec::new();
    let mut sources = Vec::new();

    if tree_budget > 0 {
        let exhaustive = complete_graph_tree_count(m)
            .map(|count| count <= tree_budget as u128)
            .unwrap_or(false);
        let trees: Vec<Vec<(usize, usize)>> = if exhaustive {
            enumerate_spanning_trees(m)
        } else {
            (0..tree_budget)
                .map(|k| {
                    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0, k as u64));
                    random_spanning_tree(m, &mut rng)
                })
                .collect()
        };
        for edges in trees {
            let point = tree_final_score(payoff, &edges, link)
                .expect("generated edge sets are spanning trees");
            points.push(point);
            sources.push(ElotopeSource::Tree { edges });
        }
    }

    if m >= 2 {
        for k in 0..random_q_budget {
            let sub_seed = derive_seed(seed, 1, k as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(sub_seed);
            let selection = random_connected_selection(m, &mut rng);
            let solved =
                match solve_final_score(payoff, &selection, link, DEFAULT_TOL, DEFAULT_MAX_ITER) {
                    Ok(rep) => rep,
                    Err(SolveError::DidNotConverge { best, .. }) => best,
                    Err(SolveError::Game(e)) => unreachable!("validated inputs: {e}"),
                };
            points.push(solved.solution);
            sources.push(ElotopeSource::RandomSelection { seed: sub_seed });
        }
    }

    ElotopeSample { points, sources }
}
