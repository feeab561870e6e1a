//! Experiment configuration: a TOML file plus command-line overrides.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use netgp::classifier::{ClassifierConfig, PredictMode};
use netgp::distance::DistanceKind;
use netgp::graph::LaplacianKind;
use netgp::kernel::RandomWalkParams;
use netgp::mcmc::HyperPriors;
use netgp::survival::SurvivalConfig;

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: Option<PathBuf>,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub kernel: KernelConfig,
    #[serde(default)]
    pub sampler: SamplerConfig,
    #[serde(default)]
    pub eval: EvalConfig,
    #[serde(default)]
    pub sim: SimConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    /// `gp-f`, `gp-lambda`, or `gp-rw`.
    #[serde(default = "default_method")]
    pub method: String,
    /// Laplacian variant for `gp-lambda`: `laplacian`, `normalized`, `signed`.
    #[serde(default = "default_laplacian")]
    pub laplacian: String,
    #[serde(default = "default_rw_steps")]
    pub rw_steps: usize,
    #[serde(default = "default_rw_decay")]
    pub rw_decay: f64,
    #[serde(default = "default_true")]
    pub rw_normalize: bool,
    /// Absolute-weight threshold used to binarize weighted graphs for the
    /// random-walk kernel.
    #[serde(default = "default_cutoff")]
    pub binarize_cutoff: f64,
    /// Optional distance-matrix cache (read if present, else written).
    pub distances: Option<PathBuf>,
}

fn default_method() -> String {
    "gp-lambda".into()
}
fn default_laplacian() -> String {
    "normalized".into()
}
fn default_rw_steps() -> usize {
    RandomWalkParams::default().steps
}
fn default_rw_decay() -> f64 {
    RandomWalkParams::default().decay
}
fn default_true() -> bool {
    true
}
fn default_cutoff() -> f64 {
    0.45
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self {
            method: default_method(),
            laplacian: default_laplacian(),
            rw_steps: default_rw_steps(),
            rw_decay: default_rw_decay(),
            rw_normalize: true,
            binarize_cutoff: default_cutoff(),
            distances: None,
        }
    }
}

/// The three kernels of the experiment suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Squared-exponential over the Frobenius distance.
    GpF,
    /// Squared-exponential over a spectral distance.
    GpLambda(LaplacianKind),
    /// Fixed k-step random-walk kernel.
    GpRw,
}

impl KernelConfig {
    pub fn method(&self) -> Result<Method> {
        match self.method.as_str() {
            "gp-f" => Ok(Method::GpF),
            "gp-lambda" => {
                let kind = match self.laplacian.as_str() {
                    "laplacian" => LaplacianKind::Unnormalized,
                    "normalized" => LaplacianKind::Normalized,
                    "signed" => LaplacianKind::Signed,
                    other => bail!("unknown laplacian variant `{other}`"),
                };
                Ok(Method::GpLambda(kind))
            }
            "gp-rw" => Ok(Method::GpRw),
            other => bail!("unknown kernel method `{other}` (use gp-f, gp-lambda, or gp-rw)"),
        }
    }

    pub fn rw_params(&self) -> RandomWalkParams {
        RandomWalkParams {
            steps: self.rw_steps,
            decay: self.rw_decay,
            normalize: self.rw_normalize,
        }
    }

    /// Distance kind for a squared-exponential method, upgrading spectral
    /// variants to the signed Laplacian when negative weights are present.
    pub fn distance_kind(&self, has_negative: bool) -> Result<DistanceKind> {
        let kind = match self.method()? {
            Method::GpF => DistanceKind::Frobenius,
            Method::GpLambda(LaplacianKind::Unnormalized) => DistanceKind::SpectralLaplacian,
            Method::GpLambda(LaplacianKind::Normalized) => DistanceKind::SpectralNormalized,
            Method::GpLambda(LaplacianKind::Signed) => DistanceKind::SpectralSigned,
            Method::GpRw => bail!("the random-walk kernel does not use a distance matrix"),
        };
        if has_negative
            && matches!(
                kind,
                DistanceKind::SpectralLaplacian | DistanceKind::SpectralNormalized
            )
        {
            eprintln!("note: negative edge weights present; using the signed Laplacian");
            return Ok(DistanceKind::SpectralSigned);
        }
        Ok(kind)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerConfig {
    #[serde(default = "default_ns")]
    pub ns: usize,
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
    #[serde(default = "default_thin")]
    pub thin: usize,
    #[serde(default = "default_ess")]
    pub ess_per_sweep: usize,
    #[serde(default = "default_one")]
    pub alpha_sigma: f64,
    #[serde(default = "default_one")]
    pub beta_sigma: f64,
    #[serde(default = "default_one")]
    pub alpha_ell: f64,
    #[serde(default = "default_one")]
    pub beta_ell: f64,
    #[serde(default = "default_one")]
    pub alpha_omega: f64,
    #[serde(default = "default_one")]
    pub beta_omega: f64,
    /// `plugin` or `mc`.
    #[serde(default = "default_predict")]
    pub predict: String,
    #[serde(default)]
    pub export_draws: bool,
}

fn default_ns() -> usize {
    2000
}
fn default_burn_in() -> usize {
    500
}
fn default_thin() -> usize {
    1
}
fn default_ess() -> usize {
    5
}
fn default_one() -> f64 {
    1.0
}
fn default_predict() -> String {
    "plugin".into()
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            ns: default_ns(),
            burn_in: default_burn_in(),
            thin: default_thin(),
            ess_per_sweep: default_ess(),
            alpha_sigma: 1.0,
            beta_sigma: 1.0,
            alpha_ell: 1.0,
            beta_ell: 1.0,
            alpha_omega: 1.0,
            beta_omega: 1.0,
            predict: default_predict(),
            export_draws: false,
        }
    }
}

impl SamplerConfig {
    pub fn priors(&self) -> HyperPriors {
        HyperPriors {
            alpha_sigma: self.alpha_sigma,
            beta_sigma: self.beta_sigma,
            alpha_ell: self.alpha_ell,
            beta_ell: self.beta_ell,
        }
    }

    pub fn classifier_config(&self, seed: u64) -> ClassifierConfig {
        ClassifierConfig {
            priors: self.priors(),
            ns: self.ns,
            burn_in: self.burn_in,
            thin: self.thin,
            ess_per_sweep: self.ess_per_sweep,
            seed,
        }
    }

    pub fn survival_config(&self, seed: u64) -> SurvivalConfig {
        SurvivalConfig {
            priors: self.priors(),
            alpha_omega: self.alpha_omega,
            beta_omega: self.beta_omega,
            ns: self.ns,
            burn_in: self.burn_in,
            thin: self.thin,
            ess_per_sweep: self.ess_per_sweep,
            seed,
        }
    }

    pub fn predict_mode(&self) -> Result<PredictMode> {
        match self.predict.as_str() {
            "plugin" => Ok(PredictMode::Plugin),
            "mc" => Ok(PredictMode::Mc),
            other => bail!("unknown predict mode `{other}` (use plugin or mc)"),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalConfig {
    /// `split`, `loocv`, or `kfold`.
    #[serde(default = "default_scheme")]
    pub scheme: String,
    #[serde(default = "default_fraction")]
    pub split_fraction: f64,
    #[serde(default = "default_folds")]
    pub folds: usize,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
}

fn default_scheme() -> String {
    "split".into()
}
fn default_fraction() -> f64 {
    0.75
}
fn default_folds() -> usize {
    5
}
fn default_replicates() -> usize {
    50
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            scheme: default_scheme(),
            split_fraction: default_fraction(),
            folds: default_folds(),
            replicates: default_replicates(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    /// `small-world`, `sbm`, `corr-er`, `pref-attach`, `er`,
    /// `survival-easy`, or `survival-hard`.
    #[serde(default = "default_model")]
    pub model: String,
    #[serde(default = "default_n")]
    pub n: usize,
    /// Total sample size across both classes.
    #[serde(default = "default_m")]
    pub m: usize,
    /// Fraction of samples in class 0 (label -1).
    #[serde(default = "default_half")]
    pub class0_fraction: f64,
    #[serde(default = "default_radius")]
    pub lattice_radius: usize,
    #[serde(default = "default_p0")]
    pub rewire_p0: f64,
    #[serde(default = "default_p1")]
    pub rewire_p1: f64,
    #[serde(default = "default_link0")]
    pub sbm_link0: [[f64; 2]; 2],
    #[serde(default = "default_link1")]
    pub sbm_link1: [[f64; 2]; 2],
    #[serde(default = "default_parent_p")]
    pub parent_p: f64,
    #[serde(default = "default_rho")]
    pub rho: f64,
    #[serde(default = "default_power0")]
    pub power0: f64,
    #[serde(default = "default_power1")]
    pub power1: f64,
    #[serde(default = "default_er_p0")]
    pub er_p0: f64,
    #[serde(default = "default_er_p1")]
    pub er_p1: f64,
}

fn default_model() -> String {
    "sbm".into()
}
fn default_n() -> usize {
    100
}
fn default_m() -> usize {
    100
}
fn default_half() -> f64 {
    0.5
}
fn default_radius() -> usize {
    5
}
fn default_p0() -> f64 {
    0.05
}
fn default_p1() -> f64 {
    0.07
}
fn default_link0() -> [[f64; 2]; 2] {
    [[0.05, 0.15], [0.15, 0.05]]
}
fn default_link1() -> [[f64; 2]; 2] {
    [[0.10, 0.15], [0.15, 0.05]]
}
fn default_parent_p() -> f64 {
    0.8
}
fn default_rho() -> f64 {
    0.8
}
fn default_power0() -> f64 {
    0.6
}
fn default_power1() -> f64 {
    1.4
}
fn default_er_p0() -> f64 {
    0.3
}
fn default_er_p1() -> f64 {
    0.7
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            model: default_model(),
            n: default_n(),
            m: default_m(),
            class0_fraction: default_half(),
            lattice_radius: default_radius(),
            rewire_p0: default_p0(),
            rewire_p1: default_p1(),
            sbm_link0: default_link0(),
            sbm_link1: default_link1(),
            parent_p: default_parent_p(),
            rho: default_rho(),
            power0: default_power0(),
            power1: default_power1(),
            er_p0: default_er_p0(),
            er_p1: default_er_p1(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: ExperimentConfig =
            toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        Ok(cfg)
    }

    pub fn dataset_path(&self) -> Result<&Path> {
        self.dataset
            .as_deref()
            .ok_or_else(|| anyhow::anyhow!("config is missing `dataset`"))
    }

    pub fn out_dir(&self) -> Result<&Path> {
        self.out
            .as_deref()
            .ok_or_else(|| anyhow::anyhow!("config is missing `out`"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_config_with_defaults() {
        let cfg: ExperimentConfig = toml::from_str(
            r#"
dataset = "data"
out = "results"
seed = 7

[kernel]
method = "gp-f"
"#,
        )
        .unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.kernel.method().unwrap(), Method::GpF);
        assert_eq!(cfg.sampler.ns, 2000);
        assert_eq!(cfg.eval.split_fraction, 0.75);
        assert_eq!(cfg.sim.sbm_link0[0][0], 0.05);
    }

    #[test]
    fn rejects_unknown_keys_and_methods() {
        assert!(toml::from_str::<ExperimentConfig>("bogus = 1").is_err());
        let cfg: ExperimentConfig = toml::from_str("[kernel]\nmethod = \"svm\"").unwrap();
        assert!(cfg.kernel.method().is_err());
    }

    #[test]
    fn negative_weights_upgrade_spectral_kind() {
        let cfg = KernelConfig::default();
        assert_eq!(
            cfg.distance_kind(false).unwrap(),
            DistanceKind::SpectralNormalized
        );
        assert_eq!(
            cfg.distance_kind(true).unwrap(),
            DistanceKind::SpectralSigned
        );
    }
}
