//! A scalar measure of how intransitive a game is.
//!
//! The measure is the ratio `(1 + ‖cyclic‖_F) / (1 + ‖transitive‖_F)` of
//! the two Hodge components of the advantage matrix, with 1 added on both
//! sides so a vanishing transitive part does not divide by zero. Below 1
//! the game is predominantly transitive, above 1 effectively intransitive;
//! the zero matrix sits exactly at 1. The norms are not normalised by
//! player count, so values are comparable only at fixed `m`.

use crate::game::{
    advantage_from_payoff, estimate_payoff, AdvantageMatrix, GameModelError, MatchRecord,
    SigmoidLink,
};
use crate::hodge::hodge_decompose;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IntransitivityClass {
    PredominantlyTransitive,
    Balanced,
    EffectivelyIntransitive,
}

#[derive(Debug, Clone, Serialize)]
pub struct IntransitivityReport {
    /// `(1 + cyclic_norm) / (1 + transitive_norm)`.
    pub measure: f64,
    /// Frobenius norm of the transitive component `grad(div(A))`.
    pub transitive_norm: f64,
    /// Frobenius norm of the cyclic component `A − grad(div(A))`.
    pub cyclic_norm: f64,
    pub classification: IntransitivityClass,
}

/// Decomposes the advantage matrix and reports the measure.
pub fn measure_intransitivity(advantage: &AdvantageMatrix) -> IntransitivityReport {
    let (transitive, cyclic) = hodge_decompose(advantage.as_skew());
    let transitive_norm = transitive.frobenius_norm();
    let cyclic_norm = cyclic.frobenius_norm();
    let measure = (1.0 + cyclic_norm) / (1.0 + transitive_norm);
    let classification = if measure < 1.0 {
        IntransitivityClass::PredominantlyTransitive
    } else if measure > 1.0 {
        IntransitivityClass::EffectivelyIntransitive
    } else {
        IntransitivityClass::Balanced
    };
    IntransitivityReport {
        measure,
        transitive_norm,
        cyclic_norm,
        classification,
    }
}

/// Empirical measure from a match log: estimates the payoff matrix with
/// additive smoothing, converts it to an advantage matrix, and measures.
/// Requires at least one game for every unordered pair.
pub fn measure_from_records(
    records: &[MatchRecord],
    players: usize,
    smoothing: f64,
    link: SigmoidLink,
) -> Result<IntransitivityReport, GameModelError> {
    let payoff = estimate_payoff(records, players, smoothing)?;
    let advantage = advantage_from_payoff(&payoff, link)?;
    Ok(measure_intransitivity(&advantage))
}
