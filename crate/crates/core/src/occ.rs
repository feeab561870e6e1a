//! One-class anomaly scores and elbow thresholding.
//!
//! The classifier trained on a single class (labels all `+1`) already
//! carries everything needed for anomaly detection: for each test point we
//! report the predictive latent mean, predictive variance, membership
//! probability, and their ratio. Thresholds are placed at the largest jump
//! among the sorted scores. Which side of a threshold is anomalous depends
//! on the score and kernel, so callers decide by checking where the
//! training class lands.

use std::io::Write;

use nalgebra::DMatrix;

use crate::classifier::{logistic, predict, ClassifierPosterior, LabeledDataset, PredictMode};
use crate::error::{Error, Result};

/// Per-test-point scores and per-score elbow thresholds.
#[derive(Debug, Clone)]
pub struct OccScores {
    /// Posterior predictive latent mean.
    pub mu: Vec<f64>,
    /// Posterior predictive variance.
    pub sigma2: Vec<f64>,
    /// Membership probability `logistic(mu)`.
    pub pi: Vec<f64>,
    /// Coefficient score `mu / sigma`; `+inf` sentinel when the variance is
    /// zero (excluded from elbow computation).
    pub h: Vec<f64>,
    pub mu_threshold: Option<ElbowThreshold>,
    pub sigma2_threshold: Option<ElbowThreshold>,
    pub pi_threshold: Option<ElbowThreshold>,
    pub h_threshold: Option<ElbowThreshold>,
}

/// A cut at the largest gap of the sorted scores.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElbowThreshold {
    /// Midpoint of the largest gap.
    pub value: f64,
    /// Number of sorted scores below the cut.
    pub split_index: usize,
}

/// The four OCC scores for each test point, from the classifier posterior.
pub fn occ_scores(
    post: &ClassifierPosterior,
    data: &LabeledDataset,
    d_new: &DMatrix<f64>,
    mode: PredictMode,
) -> Result<OccScores> {
    let pred = predict(post, data, d_new, mode)?;
    scores_from_moments(&pred.mean, &pred.variance)
}

/// Builds scores and thresholds from predictive moments; exposed so the
/// fixed-kernel path can reuse it.
pub fn scores_from_moments(mu: &[f64], sigma2: &[f64]) -> Result<OccScores> {
    if mu.len() != sigma2.len() {
        return Err(Error::DimensionMismatch(
            "mean/variance lengths differ".into(),
        ));
    }
    let pi: Vec<f64> = mu.iter().map(|&m| logistic(m)).collect();
    let h: Vec<f64> = mu
        .iter()
        .zip(sigma2.iter())
        .map(|(&m, &v)| if v > 0.0 { m / v.sqrt() } else { f64::INFINITY })
        .collect();
    let scores = OccScores {
        mu_threshold: elbow_threshold(mu).ok().flatten(),
        sigma2_threshold: elbow_threshold(sigma2).ok().flatten(),
        pi_threshold: elbow_threshold(&pi).ok().flatten(),
        h_threshold: elbow_threshold(&h).ok().flatten(),
        mu: mu.to_vec(),
        sigma2: sigma2.to_vec(),
        pi,
        h,
    };
    Ok(scores)
}

/// Largest-jump threshold over the sorted finite scores.
///
/// Needs at least 3 finite scores; returns `Ok(None)` (degenerate, not an
/// error) when all scores are equal.
pub fn elbow_threshold(scores: &[f64]) -> Result<Option<ElbowThreshold>> {
    let mut finite: Vec<f64> = scores.iter().copied().filter(|v| v.is_finite()).collect();
    if finite.len() < 3 {
        return Err(Error::InvalidConfig(format!(
            "elbow threshold needs >= 3 finite scores, got {}",
            finite.len()
        )));
    }
    finite.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let mut best_gap = 0.0;
    let mut best_idx = 0;
    for i in 0..finite.len() - 1 {
        let gap = finite[i + 1] - finite[i];
        if gap > best_gap {
            best_gap = gap;
            best_idx = i;
        }
    }
    if best_gap == 0.0 {
        return Ok(None);
    }
    Ok(Some(ElbowThreshold {
        value: 0.5 * (finite[best_idx] + finite[best_idx + 1]),
        split_index: best_idx + 1,
    }))
}

impl OccScores {
    /// One row per test point with the four scores, then a threshold block.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "index,mu,sigma2,pi,h")?;
        for i in 0..self.mu.len() {
            writeln!(
                w,
                "{i},{},{},{},{}",
                self.mu[i], self.sigma2[i], self.pi[i], self.h[i]
            )?;
        }
        writeln!(w, "score,threshold,split_index")?;
        for (name, th) in [
            ("mu", &self.mu_threshold),
            ("sigma2", &self.sigma2_threshold),
            ("pi", &self.pi_threshold),
            ("h", &self.h_threshold),
        ] {
            match th {
                Some(t) => writeln!(w, "{name},{},{}", t.value, t.split_index)?,
                None => writeln!(w, "{name},NA,NA")?,
            }
        }
        Ok(())
    }
}
