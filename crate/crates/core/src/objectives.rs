//! Auxiliary task mathematics: reward-prediction labels and losses, the
//! state-representation target, observation histories, and loss aggregation.
//!
//! Nothing here trains a network. The module prepares the inputs those heads
//! consume (fixed-length observation histories, three-class reward labels,
//! reconstruction targets) and computes the scalar losses (smooth L1,
//! categorical cross-entropy) plus the weighted sum that joins them to the
//! main objective. Reward classification uses the 0.009 threshold with
//! boundary values assigned to the zero class; the strict-versus-inclusive
//! choice at |r| = epsilon is otherwise arbitrary and pinned here. Labels
//! default to the distributed reward, with a switch for the pre-distribution
//! shaped value.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::compose::PlayerRewardOutput;
use crate::error::{Error, Result};
use crate::obs::{ObservationTriplet, SEMANTIC_FEATURES};
use crate::replay::RewardTimeline;

/// Default classification threshold for reward prediction.
pub const DEFAULT_EPSILON: f64 = 0.009;
/// Default history length.
pub const DEFAULT_HISTORY_LEN: usize = 20;

/// The last `l` observations ending at the current step, zero-padded at the
/// front when the episode is younger than `l`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservationHistory {
    pub rows: Vec<Vec<f64>>,
    /// Leading rows that are padding rather than real observations.
    pub pad_count: usize,
}

impl ObservationHistory {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Builds the history for the newest observation in `observations`.
///
/// Pass only the current episode's observations: padding is what separates
/// episodes, so feeding a concatenation of episodes would leak rows across
/// the boundary.
pub fn build_history(observations: &[Vec<f64>], l: usize) -> Result<ObservationHistory> {
    if l == 0 {
        return Err(Error::Parameter("history length must be at least 1".into()));
    }
    let Some(first) = observations.first() else {
        return Err(Error::Empty("cannot build a history from no observations".into()));
    };
    let dim = first.len();
    if let Some(bad) = observations.iter().position(|o| o.len() != dim) {
        return Err(Error::Parameter(format!(
            "observation {bad} has dimension {}, expected {dim}",
            observations[bad].len()
        )));
    }
    let take = observations.len().min(l);
    let pad_count = l - take;
    let mut rows = Vec::with_capacity(l);
    for _ in 0..pad_count {
        rows.push(vec![0.0; dim]);
    }
    rows.extend_from_slice(&observations[observations.len() - take..]);
    Ok(ObservationHistory { rows, pad_count })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardClass {
    Positive,
    Zero,
    Negative,
}

impl RewardClass {
    /// Index into one-hot and probability vectors: [positive, zero, negative].
    pub fn index(self) -> usize {
        match self {
            RewardClass::Positive => 0,
            RewardClass::Zero => 1,
            RewardClass::Negative => 2,
        }
    }
}

/// A classified reward: the class, its one-hot encoding, and the threshold
/// that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RewardClassLabel {
    pub class: RewardClass,
    pub epsilon: f64,
}

impl RewardClassLabel {
    pub fn one_hot(&self) -> [f64; 3] {
        let mut v = [0.0; 3];
        v[self.class.index()] = 1.0;
        v
    }
}

/// Classifies `r` as positive (r > epsilon), negative (r < -epsilon), or
/// zero. Both boundaries belong to the zero class.
pub fn classify_reward(r: f64, epsilon: f64) -> Result<RewardClassLabel> {
    if !epsilon.is_finite() || epsilon <= 0.0 {
        return Err(Error::Parameter(format!(
            "epsilon must be positive and finite, got {epsilon}"
        )));
    }
    if !r.is_finite() {
        return Err(Error::Parameter(format!("reward must be finite, got {r}")));
    }
    let class = if r > epsilon {
        RewardClass::Positive
    } else if r < -epsilon {
        RewardClass::Negative
    } else {
        RewardClass::Zero
    };
    Ok(RewardClassLabel { class, epsilon })
}

/// Mean element-wise smooth L1: 0.5 x^2 / beta for |x| < beta, else
/// |x| - 0.5 beta, x = predicted - target.
pub fn smooth_l1(predicted: &[f64], target: &[f64], beta: f64) -> Result<f64> {
    if predicted.len() != target.len() {
        return Err(Error::Parameter(format!(
            "length mismatch: predicted {} vs target {}",
            predicted.len(),
            target.len()
        )));
    }
    if predicted.is_empty() {
        return Err(Error::Empty("smooth_l1 needs at least one element".into()));
    }
    if !beta.is_finite() || beta <= 0.0 {
        return Err(Error::Parameter(format!(
            "beta must be positive and finite, got {beta}"
        )));
    }
    let mut total = 0.0;
    for (p, t) in predicted.iter().zip(target) {
        let x = (p - t).abs();
        total += if x < beta { 0.5 * x * x / beta } else { x - 0.5 * beta };
    }
    Ok(total / predicted.len() as f64)
}

/// Categorical cross-entropy -ln p[label] over [positive, zero, negative].
pub fn cross_entropy_3class(probabilities: [f64; 3], label: RewardClass) -> Result<f64> {
    let sum: f64 = probabilities.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::Parameter(format!(
            "probabilities must sum to 1 (got {sum})"
        )));
    }
    if probabilities.iter().any(|p| !p.is_finite() || *p <= 0.0) {
        return Err(Error::Parameter(
            "probabilities must all be strictly positive".into(),
        ));
    }
    Ok(-probabilities[label.index()].ln())
}

/// Total objective: main + sum of lambda_c * L_c. A loss with no entry in
/// `lambdas` gets weight 1.
pub fn combined_loss(
    main: f64,
    aux: &BTreeMap<String, f64>,
    lambdas: &BTreeMap<String, f64>,
) -> Result<f64> {
    if !main.is_finite() {
        return Err(Error::Parameter(format!("main loss must be finite, got {main}")));
    }
    let mut total = main;
    for (name, loss) in aux {
        let lambda = lambdas.get(name).copied().unwrap_or(1.0);
        if !loss.is_finite() || !lambda.is_finite() {
            return Err(Error::Parameter(format!(
                "aux loss `{name}` and its weight must be finite (loss {loss}, lambda {lambda})"
            )));
        }
        total += lambda * loss;
    }
    Ok(total)
}

/// Which per-player scalar feeds reward-prediction labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardSource {
    /// Team-spirit distributed reward (the default).
    Distributed,
    /// Pre-distribution shaped reward R' = R + F.
    Shaped,
}

impl RewardSource {
    pub fn pick(&self, output: &PlayerRewardOutput) -> f64 {
        match self {
            RewardSource::Distributed => output.distributed,
            RewardSource::Shaped => output.shaped,
        }
    }
}

/// Per-class composition of a timeline's rewards.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassBalance {
    pub source: RewardSource,
    pub epsilon: f64,
    pub counts: [usize; 3],
    /// Fractions over [positive, zero, negative]; they sum to 1.
    pub fractions: [f64; 3],
    pub total: usize,
}

/// Counts reward classes over every (frame, player) entry of a timeline.
pub fn class_balance_report(
    timeline: &RewardTimeline,
    epsilon: f64,
    source: RewardSource,
) -> Result<ClassBalance> {
    let mut counts = [0usize; 3];
    let mut total = 0usize;
    for frame in &timeline.frames {
        for player in &frame.players {
            let label = classify_reward(source.pick(player), epsilon)?;
            counts[label.class.index()] += 1;
            total += 1;
        }
    }
    if total == 0 {
        return Err(Error::Empty("timeline has no reward entries to classify".into()));
    }
    let fractions = [
        counts[0] as f64 / total as f64,
        counts[1] as f64 / total as f64,
        counts[2] as f64 / total as f64,
    ];
    Ok(ClassBalance { source, epsilon, counts, fractions, total })
}

/// State-representation reconstruction target: the semantic features of the
/// real (non-padding) key/value rows. The query row and the action blocks
/// are not reconstructed.
pub fn sr_target(triplet: &ObservationTriplet) -> Vec<Vec<f64>> {
    triplet
        .key_value
        .iter()
        .zip(&triplet.mask)
        .filter(|(_, is_pad)| !**is_pad)
        .map(|(row, _)| row[..SEMANTIC_FEATURES].to_vec())
        .collect()
}
