//! Gibbs sampling for GP binary classification with a logistic link.
//!
//! The model places a zero-mean GP prior on a latent function over graphs,
//! with squared-exponential covariance over a precomputed distance matrix
//! and inverse-gamma hyperpriors on the signal variance and length-scale.
//! Labels are `+-1` and the likelihood is `prod_k logistic(f_k * y_k)`.
//!
//! Each sweep jointly updates (f, ell) in the whitened parameterization,
//! refreshes f with elliptical slice moves, and draws the signal variance
//! from its conjugate conditional (see [`crate::mcmc`]). A fixed-Gram mode
//! supports kernels with no sampled hyperparameters, like the random-walk
//! kernel.

use std::io::Write;

use nalgebra::{DMatrix, DVector};

use crate::distance::{distance_matrix, DistanceKind, DistanceMatrix};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::kernel::{sqexp_gram, GramMatrix, JitterLadder, SqExpBlocks, SqExpHyper};
use crate::mcmc::{
    gibbs_sweep, ChainState, ChainStats, HyperPriors, KernelBase, SweepConfig,
};
use crate::rng::substream;

/// Numerically stable logistic function `1 / (1 + exp(-z))`.
pub fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log logistic(z)`, stable for large `|z|`.
pub fn log_logistic(z: f64) -> f64 {
    if z >= 0.0 {
        -(-z).exp().ln_1p()
    } else {
        z - z.exp().ln_1p()
    }
}

/// Training data: a cached distance matrix and `+-1` labels.
#[derive(Debug, Clone)]
pub struct LabeledDataset {
    distances: DistanceMatrix,
    labels: Vec<f64>,
}

impl LabeledDataset {
    pub fn new(distances: DistanceMatrix, labels: Vec<f64>) -> Result<Self> {
        if distances.len() != labels.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {} graphs",
                labels.len(),
                distances.len()
            )));
        }
        for (i, &y) in labels.iter().enumerate() {
            if y != 1.0 && y != -1.0 {
                return Err(Error::InvalidConfig(format!(
                    "label {i} must be +1 or -1, got {y}"
                )));
            }
        }
        Ok(Self { distances, labels })
    }

    pub fn from_graphs(graphs: &[Graph], kind: DistanceKind, labels: Vec<f64>) -> Result<Self> {
        Self::new(distance_matrix(graphs, kind)?, labels)
    }

    pub fn distances(&self) -> &DistanceMatrix {
        &self.distances
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Sampler configuration: hyperprior parameters, chain length, and seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifierConfig {
    pub priors: HyperPriors,
    /// Total sweeps.
    pub ns: usize,
    /// Sweeps discarded from the front.
    pub burn_in: usize,
    /// Keep every `thin`-th sweep after burn-in.
    pub thin: usize,
    /// Elliptical slice refreshes per sweep.
    pub ess_per_sweep: usize,
    pub seed: u64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self {
            priors: HyperPriors::default(),
            ns: 2000,
            burn_in: 500,
            thin: 1,
            ess_per_sweep: 5,
            seed: 0,
        }
    }
}

impl ClassifierConfig {
    pub fn validate(&self) -> Result<()> {
        self.priors.validate()?;
        if self.ns <= self.burn_in {
            return Err(Error::InvalidConfig(format!(
                "ns ({}) must exceed burn-in ({})",
                self.ns, self.burn_in
            )));
        }
        if self.thin == 0 {
            return Err(Error::InvalidConfig("thin must be >= 1".into()));
        }
        Ok(())
    }

    fn sweep_config(&self, ladder: JitterLadder) -> SweepConfig {
        SweepConfig {
            priors: self.priors,
            ess_per_sweep: self.ess_per_sweep,
            ladder,
            ..SweepConfig::default()
        }
    }
}

/// Retained draws from the Gibbs sampler.
///
/// The hyperparameter vectors are empty in fixed-Gram mode, where nothing is
/// sampled besides the latent function.
#[derive(Debug, Clone)]
pub struct ClassifierPosterior {
    pub f_draws: Vec<DVector<f64>>,
    pub sigma2_draws: Vec<f64>,
    pub ell_draws: Vec<f64>,
    pub loglik_draws: Vec<f64>,
    pub stats: ChainStats,
}

impl ClassifierPosterior {
    pub fn n_draws(&self) -> usize {
        self.f_draws.len()
    }

    pub fn mean_f(&self) -> DVector<f64> {
        let mut acc = DVector::zeros(self.f_draws[0].len());
        for f in &self.f_draws {
            acc += f;
        }
        acc / self.f_draws.len() as f64
    }

    pub fn mean_sigma2(&self) -> Option<f64> {
        mean(&self.sigma2_draws)
    }

    pub fn mean_ell(&self) -> Option<f64> {
        mean(&self.ell_draws)
    }

    /// One row per draw: `sigma2, ell, f...`; `NA` where a kernel has no
    /// sampled hyperparameters.
    pub fn write_draws_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let dim = self.f_draws.first().map_or(0, |f| f.len());
        let header: Vec<String> = ["sigma2".into(), "ell".into()]
            .into_iter()
            .chain((0..dim).map(|i| format!("f{i}")))
            .collect();
        writeln!(w, "{}", header.join(","))?;
        for (b, f) in self.f_draws.iter().enumerate() {
            let sigma2 = self
                .sigma2_draws
                .get(b)
                .map_or("NA".to_string(), |v| format!("{v}"));
            let ell = self
                .ell_draws
                .get(b)
                .map_or("NA".to_string(), |v| format!("{v}"));
            let f_cols: Vec<String> = f.iter().map(|v| format!("{v}")).collect();
            writeln!(w, "{sigma2},{ell},{}", f_cols.join(","))?;
        }
        Ok(())
    }
}

fn mean(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        None
    } else {
        Some(xs.iter().sum::<f64>() / xs.len() as f64)
    }
}

/// Runs the full Gibbs chain against an arbitrary log-likelihood.
///
/// This is the engine behind [`fit`]; the survival sampler and the
/// prior-recovery checks (constant likelihood) drive it directly.
pub fn run_chain(
    base: &KernelBase,
    loglik: &mut dyn FnMut(&DVector<f64>) -> f64,
    cfg: &ClassifierConfig,
    ladder: JitterLadder,
) -> Result<ClassifierPosterior> {
    cfg.validate()?;
    let sweep_cfg = cfg.sweep_config(ladder);
    let mut rng = substream(cfg.seed, "gpc-chain", 0);
    let mut state = ChainState::init(base, &sweep_cfg, &mut rng)?;
    let mut stats = ChainStats::default();
    let mut post = ClassifierPosterior {
        f_draws: Vec::new(),
        sigma2_draws: Vec::new(),
        ell_draws: Vec::new(),
        loglik_draws: Vec::new(),
        stats,
    };
    let fixed = matches!(base, KernelBase::Fixed(_));
    for sweep in 0..cfg.ns {
        gibbs_sweep(base, &sweep_cfg, &mut state, loglik, &mut rng, &mut stats)?;
        if stats.sweeps >= 20 && 2 * stats.stalled_sweeps > stats.sweeps {
            return Err(Error::SamplerAbort(format!(
                "{} of {} sweeps stalled (joint stalls {}, ess stalls {})",
                stats.stalled_sweeps, stats.sweeps, stats.joint_stalls, stats.ess_stalls
            )));
        }
        if sweep >= cfg.burn_in && (sweep - cfg.burn_in) % cfg.thin == 0 {
            post.f_draws.push(state.f.clone());
            if !fixed {
                post.sigma2_draws.push(state.sigma2);
                post.ell_draws.push(state.scales[0]);
            }
            post.loglik_draws.push(loglik(&state.f));
        }
    }
    post.stats = stats;
    Ok(post)
}

fn label_loglik(labels: Vec<f64>) -> impl FnMut(&DVector<f64>) -> f64 {
    move |f: &DVector<f64>| {
        f.iter()
            .zip(labels.iter())
            .map(|(&fi, &yi)| log_logistic(fi * yi))
            .sum()
    }
}

/// Fits the classifier on a labeled dataset (Algorithm-1 sweep order).
pub fn fit(data: &LabeledDataset, cfg: &ClassifierConfig) -> Result<ClassifierPosterior> {
    let base = KernelBase::Blocks(SqExpBlocks::single(data.distances()));
    let mut ll = label_loglik(data.labels().to_vec());
    run_chain(&base, &mut ll, cfg, JitterLadder::Standard)
}

/// Fits with a fixed Gram matrix (no sampled kernel hyperparameters).
pub fn fit_fixed(k_train: &DMatrix<f64>, labels: &[f64], cfg: &ClassifierConfig) -> Result<ClassifierPosterior> {
    if k_train.nrows() != labels.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} labels for a {}x{} Gram",
            labels.len(),
            k_train.nrows(),
            k_train.ncols()
        )));
    }
    let base = KernelBase::Fixed(k_train.clone());
    let mut ll = label_loglik(labels.to_vec());
    run_chain(&base, &mut ll, cfg, JitterLadder::Standard)
}

/// Posterior-predictive estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PredictMode {
    /// Plug the posterior means of (f, sigma2, ell) into the GP predictor;
    /// one factorization total.
    #[default]
    Plugin,
    /// Average the per-draw predictors; one factorization per draw.
    Mc,
}

/// Per-test-point predictive summaries.
#[derive(Debug, Clone)]
pub struct Prediction {
    /// Posterior predictive latent mean.
    pub mean: Vec<f64>,
    /// Posterior predictive latent variance.
    pub variance: Vec<f64>,
    /// Membership probability; class is `+1` iff `probability >= 0.5`.
    pub probability: Vec<f64>,
}

impl Prediction {
    pub fn classes(&self) -> Vec<f64> {
        self.probability
            .iter()
            .map(|&p| if p >= 0.5 { 1.0 } else { -1.0 })
            .collect()
    }
}

/// GP predictive moments for many test points against one factorized Gram.
fn predictive_moments(
    gram: &GramMatrix,
    f: &DVector<f64>,
    k_cross: &DMatrix<f64>,
    k_diag: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    let alpha = gram.solve(f);
    let q = k_cross.nrows();
    let mut means = Vec::with_capacity(q);
    let mut vars = Vec::with_capacity(q);
    for t in 0..q {
        let k_row: DVector<f64> = k_cross.row(t).transpose();
        means.push(k_row.dot(&alpha));
        let v = gram.lower_solve(&k_row);
        vars.push((k_diag[t] - v.norm_squared()).max(0.0));
    }
    (means, vars)
}

/// Posterior-predictive latent mean, variance, and class probability for
/// test points given their distances to the training points (`d_new` is
/// tests x trains).
pub fn predict(
    post: &ClassifierPosterior,
    data: &LabeledDataset,
    d_new: &DMatrix<f64>,
    mode: PredictMode,
) -> Result<Prediction> {
    if post.n_draws() == 0 {
        return Err(Error::InvalidConfig("posterior has no draws".into()));
    }
    if post.sigma2_draws.is_empty() {
        return Err(Error::InvalidConfig(
            "posterior has no kernel hyperparameter draws; use predict_fixed".into(),
        ));
    }
    if d_new.ncols() != data.len() {
        return Err(Error::DimensionMismatch(format!(
            "d_new has {} columns for {} training points",
            d_new.ncols(),
            data.len()
        )));
    }
    let q = d_new.nrows();
    match mode {
        PredictMode::Plugin => {
            let h = SqExpHyper::new(
                post.mean_sigma2().expect("nonempty"),
                post.mean_ell().expect("nonempty"),
            )?;
            let gram = sqexp_gram(data.distances(), &h)?;
            let k_cross = d_new.map(|d| h.signal_variance * (-h.length_scale * d).exp());
            let k_diag = vec![h.signal_variance; q];
            let (means, vars) = predictive_moments(&gram, &post.mean_f(), &k_cross, &k_diag);
            let probability = means.iter().map(|&m| logistic(m)).collect();
            Ok(Prediction {
                mean: means,
                variance: vars,
                probability,
            })
        }
        PredictMode::Mc => {
            let b = post.n_draws() as f64;
            let mut mean_acc = vec![0.0; q];
            let mut var_acc = vec![0.0; q];
            let mut prob_acc = vec![0.0; q];
            for (i, f) in post.f_draws.iter().enumerate() {
                let h = SqExpHyper::new(post.sigma2_draws[i], post.ell_draws[i])?;
                let gram = sqexp_gram(data.distances(), &h)?;
                let k_cross = d_new.map(|d| h.signal_variance * (-h.length_scale * d).exp());
                let k_diag = vec![h.signal_variance; q];
                let (means, vars) = predictive_moments(&gram, f, &k_cross, &k_diag);
                for t in 0..q {
                    mean_acc[t] += means[t] / b;
                    var_acc[t] += vars[t] / b;
                    prob_acc[t] += logistic(means[t]) / b;
                }
            }
            Ok(Prediction {
                mean: mean_acc,
                variance: var_acc,
                probability: prob_acc,
            })
        }
    }
}

/// Prediction for fixed-Gram kernels: `k_train` is the training Gram,
/// `k_cross` the tests-x-trains kernel block, `k_test_diag` the kernel
/// diagonal at the test points.
pub fn predict_fixed(
    post: &ClassifierPosterior,
    k_train: &DMatrix<f64>,
    k_cross: &DMatrix<f64>,
    k_test_diag: &[f64],
    mode: PredictMode,
) -> Result<Prediction> {
    if post.n_draws() == 0 {
        return Err(Error::InvalidConfig("posterior has no draws".into()));
    }
    if k_cross.ncols() != k_train.nrows() || k_cross.nrows() != k_test_diag.len() {
        return Err(Error::DimensionMismatch(
            "fixed-kernel prediction block shapes disagree".into(),
        ));
    }
    let gram = GramMatrix::from_kernel(k_train.clone(), JitterLadder::Standard)?;
    match mode {
        PredictMode::Plugin => {
            let (means, vars) = predictive_moments(&gram, &post.mean_f(), k_cross, k_test_diag);
            let probability = means.iter().map(|&m| logistic(m)).collect();
            Ok(Prediction {
                mean: means,
                variance: vars,
                probability,
            })
        }
        PredictMode::Mc => {
            let b = post.n_draws() as f64;
            let q = k_cross.nrows();
            let mut mean_acc = vec![0.0; q];
            let mut var_acc = vec![0.0; q];
            let mut prob_acc = vec![0.0; q];
            for f in &post.f_draws {
                let (means, vars) = predictive_moments(&gram, f, k_cross, k_test_diag);
                for t in 0..q {
                    mean_acc[t] += means[t] / b;
                    var_acc[t] += vars[t] / b;
                    prob_acc[t] += logistic(means[t]) / b;
                }
            }
            Ok(Prediction {
                mean: mean_acc,
                variance: var_acc,
                probability: prob_acc,
            })
        }
    }
}
