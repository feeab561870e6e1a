//! Cross-validation: stratified splits, LOOCV, k-fold, and replicate
//! aggregation.
//!
//! Replicates run concurrently with isolated state; every fold model gets a
//! derived seed, so results are independent of scheduling. Distance
//! matrices are sliced per fold, never recomputed.

use anyhow::{bail, Result};
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use netgp::rng::substream;

use crate::config::EvalConfig;
use crate::metrics::{auc, mean_sd, Confusion};

#[derive(Debug, Clone, PartialEq)]
pub enum Scheme {
    Split { fraction: f64, replicates: usize },
    Loocv,
    KFold { folds: usize, replicates: usize },
}

impl Scheme {
    pub fn from_config(cfg: &EvalConfig) -> Result<Self> {
        match cfg.scheme.as_str() {
            "split" => {
                if !(cfg.split_fraction > 0.0 && cfg.split_fraction < 1.0) {
                    bail!("split_fraction must be in (0, 1)");
                }
                if cfg.replicates == 0 {
                    bail!("replicates must be >= 1");
                }
                Ok(Scheme::Split {
                    fraction: cfg.split_fraction,
                    replicates: cfg.replicates,
                })
            }
            "loocv" => Ok(Scheme::Loocv),
            "kfold" => {
                if cfg.folds < 2 {
                    bail!("kfold needs folds >= 2");
                }
                Ok(Scheme::KFold {
                    folds: cfg.folds,
                    replicates: cfg.replicates.max(1),
                })
            }
            other => bail!("unknown eval scheme `{other}` (use split, loocv, or kfold)"),
        }
    }

    pub fn replicates(&self) -> usize {
        match self {
            Scheme::Split { replicates, .. } => *replicates,
            Scheme::Loocv => 1,
            Scheme::KFold { replicates, .. } => *replicates,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

fn class_indices(labels: &[f64]) -> Vec<(f64, Vec<usize>)> {
    let mut classes: Vec<(f64, Vec<usize>)> = Vec::new();
    for (i, &y) in labels.iter().enumerate() {
        match classes.iter_mut().find(|(l, _)| *l == y) {
            Some((_, v)) => v.push(i),
            None => classes.push((y, vec![i])),
        }
    }
    classes.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite labels"));
    classes
}

/// Stratified train/test split: per class, the training share is
/// `ceil(fraction * class size)`, capped so each class keeps at least one
/// test point when it has two or more members.
pub fn stratified_split<R: Rng>(labels: &[f64], fraction: f64, rng: &mut R) -> Fold {
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (_, mut idx) in class_indices(labels) {
        idx.shuffle(rng);
        let m_c = idx.len();
        let n_train = ((fraction * m_c as f64).ceil() as usize).clamp(1, m_c.saturating_sub(1).max(1));
        train.extend_from_slice(&idx[..n_train]);
        test.extend_from_slice(&idx[n_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Fold { train, test }
}

/// LOOCV: one fold per observation.
pub fn loocv_folds(m: usize) -> Vec<Fold> {
    (0..m)
        .map(|i| Fold {
            train: (0..m).filter(|&j| j != i).collect(),
            test: vec![i],
        })
        .collect()
}

/// Stratified k-fold: per class, shuffled indices dealt round-robin.
pub fn stratified_kfold<R: Rng>(labels: &[f64], k: usize, rng: &mut R) -> Vec<Fold> {
    let mut assignments = vec![0usize; labels.len()];
    for (_, mut idx) in class_indices(labels) {
        idx.shuffle(rng);
        for (pos, i) in idx.into_iter().enumerate() {
            assignments[i] = pos % k;
        }
    }
    (0..k)
        .map(|fold| Fold {
            train: (0..labels.len()).filter(|&i| assignments[i] != fold).collect(),
            test: (0..labels.len()).filter(|&i| assignments[i] == fold).collect(),
        })
        .collect()
}

/// One model fitted per fold; returns the class-probability score for each
/// test index.
pub trait FoldModel: Sync {
    fn fit_predict(&self, train: &[usize], test: &[usize], seed: u64) -> Result<Vec<f64>>;
}

#[derive(Debug, Clone)]
pub struct ReplicateOutcome {
    pub accuracy: f64,
    pub auc: Option<f64>,
    pub confusion: Confusion,
    pub train_size: usize,
    pub test_size: usize,
    pub skipped_folds: usize,
}

#[derive(Debug, Clone)]
pub struct EvalReport {
    pub replicates: Vec<ReplicateOutcome>,
    pub mean_accuracy: f64,
    pub sd_accuracy: f64,
    /// Mean/SD over replicates where AUC was defined.
    pub mean_auc: Option<f64>,
    pub sd_auc: Option<f64>,
    pub runtime_s: f64,
}

fn single_class(labels: &[f64], idx: &[usize]) -> bool {
    let first = labels[idx[0]];
    idx.iter().all(|&i| labels[i] == first)
}

/// Runs one replicate: fits every fold, pools test predictions, scores.
fn run_replicate(
    labels: &[f64],
    folds: &[Fold],
    model: &dyn FoldModel,
    seed: u64,
) -> Result<ReplicateOutcome> {
    let mut scores = Vec::new();
    let mut truth = Vec::new();
    let mut skipped = 0usize;
    let mut train_size = 0;
    for (f, fold) in folds.iter().enumerate() {
        if fold.test.is_empty() {
            continue;
        }
        if single_class(labels, &fold.train) {
            // A fold whose training half lost one class entirely cannot be
            // fitted as a classifier; skip and flag.
            skipped += 1;
            continue;
        }
        train_size = fold.train.len();
        let fold_seed = seed.wrapping_add((f as u64).wrapping_mul(0x9E3779B97F4A7C15));
        let probs = model.fit_predict(&fold.train, &fold.test, fold_seed)?;
        if probs.len() != fold.test.len() {
            bail!("model returned {} scores for {} test points", probs.len(), fold.test.len());
        }
        for (&i, &p) in fold.test.iter().zip(probs.iter()) {
            scores.push(p);
            truth.push(labels[i]);
        }
    }
    if scores.is_empty() {
        bail!("all {} folds were skipped (single-class training sets)", folds.len());
    }
    // Class decision: +1 iff probability >= 0.5.
    let predicted: Vec<f64> = scores
        .iter()
        .map(|&p| if p >= 0.5 { 1.0 } else { -1.0 })
        .collect();
    let confusion = Confusion::from_predictions(&predicted, &truth);
    Ok(ReplicateOutcome {
        accuracy: confusion.accuracy(),
        auc: auc(&scores, &truth).ok(),
        confusion,
        train_size,
        test_size: truth.len(),
        skipped_folds: skipped,
    })
}

/// Runs the full evaluation: replicated splits or folds, fitted via `model`,
/// aggregated into means and standard deviations.
pub fn run_cv(
    labels: &[f64],
    scheme: &Scheme,
    model: &dyn FoldModel,
    seed: u64,
) -> Result<EvalReport> {
    let start = std::time::Instant::now();
    let replicate_folds: Vec<Vec<Fold>> = (0..scheme.replicates())
        .map(|r| {
            let mut rng = substream(seed, "split", r as u64);
            match scheme {
                Scheme::Split { fraction, .. } => vec![stratified_split(labels, *fraction, &mut rng)],
                Scheme::Loocv => loocv_folds(labels.len()),
                Scheme::KFold { folds, .. } => stratified_kfold(labels, *folds, &mut rng),
            }
        })
        .collect();

    let outcomes: Result<Vec<ReplicateOutcome>> = replicate_folds
        .par_iter()
        .enumerate()
        .map(|(r, folds)| {
            let rep_seed = seed.wrapping_add((r as u64).wrapping_mul(0xD1B54A32D192ED03));
            run_replicate(labels, folds, model, rep_seed)
        })
        .collect();
    let replicates = outcomes?;

    let accs: Vec<f64> = replicates.iter().map(|r| r.accuracy).collect();
    let (mean_accuracy, sd_accuracy) = mean_sd(&accs);
    let aucs: Vec<f64> = replicates.iter().filter_map(|r| r.auc).collect();
    let (mean_auc, sd_auc) = if aucs.is_empty() {
        (None, None)
    } else {
        let (m, s) = mean_sd(&aucs);
        (Some(m), Some(s))
    };
    Ok(EvalReport {
        replicates,
        mean_accuracy,
        sd_accuracy,
        mean_auc,
        sd_auc,
        runtime_s: start.elapsed().as_secs_f64(),
    })
}

impl EvalReport {
    /// Per-replicate rows followed by mean/sd summary rows. Runtime is
    /// reported on stderr by the CLI, never in the CSV, so repeated runs
    /// are byte-identical.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "replicate,accuracy,auc,tp,tn,fp,fn,train_size,test_size,skipped_folds"
        )?;
        for (r, rep) in self.replicates.iter().enumerate() {
            let auc = rep
                .auc
                .map_or("NA".to_string(), |a| format!("{a}"));
            writeln!(
                w,
                "{r},{},{auc},{},{},{},{},{},{},{}",
                rep.accuracy,
                rep.confusion.tp,
                rep.confusion.tn,
                rep.confusion.fp,
                rep.confusion.fn_,
                rep.train_size,
                rep.test_size,
                rep.skipped_folds
            )?;
        }
        let fmt_opt = |v: Option<f64>| v.map_or("NA".to_string(), |x| format!("{x}"));
        writeln!(w, "mean,{},{},,,,,,,", self.mean_accuracy, fmt_opt(self.mean_auc))?;
        writeln!(w, "sd,{},{},,,,,,,", self.sd_accuracy, fmt_opt(self.sd_auc))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Memorizer<'a> {
        labels: &'a [f64],
    }

    impl FoldModel for Memorizer<'_> {
        fn fit_predict(&self, _train: &[usize], test: &[usize], _seed: u64) -> Result<Vec<f64>> {
            Ok(test
                .iter()
                .map(|&i| if self.labels[i] > 0.0 { 1.0 } else { 0.0 })
                .collect())
        }
    }

    fn labels_mixed(m: usize) -> Vec<f64> {
        (0..m).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect()
    }

    #[test]
    fn memorizing_model_scores_perfectly() {
        let labels = labels_mixed(20);
        let model = Memorizer { labels: &labels };
        let scheme = Scheme::Split {
            fraction: 0.75,
            replicates: 4,
        };
        let report = run_cv(&labels, &scheme, &model, 3).unwrap();
        assert_eq!(report.mean_accuracy, 1.0);
        assert_eq!(report.mean_auc, Some(1.0));
    }

    #[test]
    fn stratified_split_preserves_class_counts() {
        let mut labels = vec![1.0; 30];
        labels.extend(vec![-1.0; 10]);
        for r in 0..20 {
            let mut rng = substream(11, "t-split", r);
            let fold = stratified_split(&labels, 0.75, &mut rng);
            let count = |idx: &[usize], y: f64| idx.iter().filter(|&&i| labels[i] == y).count();
            assert_eq!(count(&fold.train, 1.0), 23); // ceil(0.75 * 30)
            assert_eq!(count(&fold.train, -1.0), 8); // ceil(0.75 * 10)
            assert_eq!(fold.train.len() + fold.test.len(), 40);
        }
    }

    #[test]
    fn loocv_has_m_folds() {
        let folds = loocv_folds(9);
        assert_eq!(folds.len(), 9);
        for (i, f) in folds.iter().enumerate() {
            assert_eq!(f.test, vec![i]);
            assert_eq!(f.train.len(), 8);
        }
    }

    #[test]
    fn kfold_partitions_all_points() {
        let labels = labels_mixed(23);
        let mut rng = substream(13, "t-kfold", 0);
        let folds = stratified_kfold(&labels, 5, &mut rng);
        assert_eq!(folds.len(), 5);
        let mut seen = vec![false; 23];
        for f in &folds {
            for &i in &f.test {
                assert!(!seen[i]);
                seen[i] = true;
            }
            assert_eq!(f.train.len() + f.test.len(), 23);
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn single_class_folds_are_skipped_and_flagged() {
        // 3 positives, 1 negative: LOOCV on the negative leaves a
        // single-class training set only when the negative is held out...
        // with one negative, removing it makes training single-class.
        let labels = vec![1.0, 1.0, 1.0, -1.0];
        let model = Memorizer { labels: &labels };
        let report = run_cv(&labels, &Scheme::Loocv, &model, 5).unwrap();
        assert_eq!(report.replicates[0].skipped_folds, 1);
        assert_eq!(report.replicates[0].test_size, 3);
    }

    #[test]
    fn deterministic_under_seed() {
        let labels = labels_mixed(16);
        let model = Memorizer { labels: &labels };
        let scheme = Scheme::KFold {
            folds: 4,
            replicates: 3,
        };
        let a = run_cv(&labels, &scheme, &model, 21).unwrap();
        let b = run_cv(&labels, &scheme, &model, 21).unwrap();
        let mut csv_a = Vec::new();
        a.write_csv(&mut csv_a).unwrap();
        let mut csv_b = Vec::new();
        b.write_csv(&mut csv_b).unwrap();
        assert_eq!(csv_a, csv_b);
    }
}
