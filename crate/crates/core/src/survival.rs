//! Semi-parametric survival analysis with network covariates.
//!
//! Each survival time is modeled as the first accepted jump of a Poisson
//! process with constant dominating intensity `Omega` thinned by
//! `logistic(f(t, G))`, where `f` is a GP over (time, graph, scalar
//! covariates) with the additive kernel of [`crate::kernel::survival_gram`].
//!
//! The Gibbs sweep alternates: per-subject augmentation of rejected jump
//! points (parallel, each conditioning on the previous sweep's latent
//! values), a conjugate Gamma update of `Omega`, and the classifier's
//! update machinery applied to `f` over the rejected-plus-observed points
//! with likelihood `prod_k logistic(f(T_k)) * prod_{r in R} (1 - logistic(f(r)))`.
//! The latent vector is re-dimensioned every sweep: observed points keep
//! their values, fresh rejected points keep the values imputed during
//! augmentation.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::classifier::{log_logistic, logistic};
use crate::distance::DistanceMatrix;
use crate::error::{Error, Result};
use crate::kernel::{GramMatrix, JitterLadder, SqExpBlocks, SurvivalHyper};
use crate::mcmc::{
    draw_gamma, gibbs_sweep, ChainState, ChainStats, HyperPriors, KernelBase, SweepConfig,
};
use crate::rng::substream;

/// Survival data: positive event times, a graph distance matrix, and
/// optional scalar covariates (one vector of length `m` per covariate).
#[derive(Debug, Clone)]
pub struct SurvivalDataset {
    times: Vec<f64>,
    distances: DistanceMatrix,
    covariates: Vec<Vec<f64>>,
}

impl SurvivalDataset {
    pub fn new(
        times: Vec<f64>,
        distances: DistanceMatrix,
        covariates: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if times.len() != distances.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} times for {} graphs",
                times.len(),
                distances.len()
            )));
        }
        for (i, &t) in times.iter().enumerate() {
            if !(t > 0.0) || !t.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "survival time {i} must be positive and finite, got {t}"
                )));
            }
        }
        for (k, c) in covariates.iter().enumerate() {
            if c.len() != times.len() {
                return Err(Error::DimensionMismatch(format!(
                    "covariate {k} has {} values for {} subjects",
                    c.len(),
                    times.len()
                )));
            }
        }
        Ok(Self {
            times,
            distances,
            covariates,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn distances(&self) -> &DistanceMatrix {
        &self.distances
    }

    pub fn covariates(&self) -> &[Vec<f64>] {
        &self.covariates
    }

    pub fn max_time(&self) -> f64 {
        self.times.iter().copied().fold(0.0, f64::max)
    }
}

/// One latent-function evaluation point: a (subject, time) pair. The
/// subject index carries the implicit covariates (graph and scalars).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatentPoint {
    pub subject: usize,
    pub time: f64,
    /// True for the observed event time, false for rejected jump points.
    pub observed: bool,
}

/// Sampler configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurvivalConfig {
    pub priors: HyperPriors,
    /// Gamma prior shape on the constant baseline rate.
    pub alpha_omega: f64,
    /// Gamma prior rate on the constant baseline rate.
    pub beta_omega: f64,
    pub ns: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub ess_per_sweep: usize,
    pub seed: u64,
}

impl Default for SurvivalConfig {
    fn default() -> Self {
        Self {
            priors: HyperPriors::default(),
            alpha_omega: 1.0,
            beta_omega: 1.0,
            ns: 2000,
            burn_in: 500,
            thin: 1,
            ess_per_sweep: 5,
            seed: 0,
        }
    }
}

impl SurvivalConfig {
    pub fn validate(&self) -> Result<()> {
        self.priors.validate()?;
        if !(self.alpha_omega > 0.0) || !(self.beta_omega > 0.0) {
            return Err(Error::InvalidConfig(
                "baseline-rate prior parameters must be positive".into(),
            ));
        }
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

    fn sweep_config(&self) -> SweepConfig {
        SweepConfig {
            priors: self.priors,
            ess_per_sweep: self.ess_per_sweep,
            ladder: JitterLadder::Survival,
            ..SweepConfig::default()
        }
    }
}

/// One retained draw: baseline rate, kernel hyperparameters, and the latent
/// function with its point registry.
#[derive(Debug, Clone)]
pub struct SurvivalDraw {
    pub omega: f64,
    pub sigma2: f64,
    /// Length-scales in block order: graph, covariates, time.
    pub scales: Vec<f64>,
    pub f: DVector<f64>,
    pub registry: Vec<LatentPoint>,
}

#[derive(Debug, Clone)]
pub struct SurvivalPosterior {
    pub draws: Vec<SurvivalDraw>,
    pub stats: ChainStats,
}

/// Gamma posterior parameters of the constant baseline rate:
/// `Gamma(alpha + m + |R|, beta + sum_i T_i)`.
pub fn omega_posterior_params(
    n_observed: usize,
    n_rejected: usize,
    sum_times: f64,
    alpha: f64,
    beta: f64,
) -> (f64, f64) {
    (
        alpha + (n_observed + n_rejected) as f64,
        beta + sum_times,
    )
}

/// One conjugate draw of the baseline rate.
pub fn update_omega<R: Rng>(
    n_observed: usize,
    n_rejected: usize,
    sum_times: f64,
    alpha: f64,
    beta: f64,
    rng: &mut R,
) -> f64 {
    let (shape, rate) = omega_posterior_params(n_observed, n_rejected, sum_times, alpha, beta);
    draw_gamma(shape, rate, rng)
}

/// Candidate jump times for one subject: `n_i ~ Poisson(Omega T_i)` points
/// mapped through the inverse cumulative baseline, i.e. uniform on
/// `(0, T_i)`.
pub fn draw_candidate_times<R: Rng>(omega: f64, t_i: f64, rng: &mut R) -> Vec<f64> {
    let lambda = omega * t_i;
    if lambda <= 0.0 || !lambda.is_finite() {
        return Vec::new();
    }
    let n = Poisson::new(lambda).expect("positive intensity").sample(rng) as usize;
    let mut times = Vec::with_capacity(n);
    for _ in 0..n {
        loop {
            let cumulative = rng.gen_range(0.0..lambda);
            let t = cumulative / omega;
            if t > 0.0 && t < t_i {
                times.push(t);
                break;
            }
        }
    }
    times
}

/// Thinning: keep candidate `a` when `U < 1 - logistic(f(a))`.
pub fn thin_candidates<R: Rng>(candidates: &[(f64, f64)], rng: &mut R) -> Vec<(f64, f64)> {
    candidates
        .iter()
        .copied()
        .filter(|&(_, f_val)| rng.gen::<f64>() < 1.0 - logistic(f_val))
        .collect()
}

/// Distance blocks (graph, covariates, time) expanded over a point registry.
fn registry_blocks(registry: &[LatentPoint], data: &SurvivalDataset) -> Vec<DMatrix<f64>> {
    let n = registry.len();
    let d_graph = data.distances().entries();
    let mut blocks = Vec::with_capacity(2 + data.covariates().len());

    let mut bg = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in (a + 1)..n {
            let v = d_graph[(registry[a].subject, registry[b].subject)];
            bg[(a, b)] = v;
            bg[(b, a)] = v;
        }
    }
    blocks.push(bg);

    for cov in data.covariates() {
        let mut bk = DMatrix::zeros(n, n);
        for a in 0..n {
            for b in (a + 1)..n {
                let d = cov[registry[a].subject] - cov[registry[b].subject];
                bk[(a, b)] = d * d;
                bk[(b, a)] = d * d;
            }
        }
        blocks.push(bk);
    }

    let mut bt = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in (a + 1)..n {
            let d = registry[a].time - registry[b].time;
            bt[(a, b)] = d * d;
            bt[(b, a)] = d * d;
        }
    }
    blocks.push(bt);
    blocks
}

/// Conditioning set for augmentation: the registry factor extended one
/// point at a time as candidate evaluations are drawn.
///
/// Candidates of later subjects must condition on the latent values already
/// imputed for earlier subjects' candidates (the additive kernel correlates
/// them through the shared time block), so the factorization grows by one
/// row per candidate; every drawn evaluation stays in the conditioning set
/// and the ones not retained as rejected points are marginalized out when
/// the sweep rebuilds the registry. Works in unit-variance space: the
/// signal variance cancels in conditional means and scales the variances.
struct AugmentExtension<'a> {
    data: &'a SurvivalDataset,
    scales: &'a [f64],
    sigma2: f64,
    /// Unit-kernel self-covariance including the base jitter.
    kss_unit: f64,
    points: Vec<LatentPoint>,
    /// Ragged lower-triangular factor rows of the unit-variance kernel.
    chol_rows: Vec<Vec<f64>>,
    /// `L^{-1} f`, extended alongside the factor.
    whitened: Vec<f64>,
}

impl<'a> AugmentExtension<'a> {
    fn seed(
        data: &'a SurvivalDataset,
        scales: &'a [f64],
        sigma2: f64,
        registry: &[LatentPoint],
        gram0: &GramMatrix,
        f: &DVector<f64>,
    ) -> Self {
        let n = registry.len();
        let l = gram0.chol_lower();
        let chol_rows: Vec<Vec<f64>> = (0..n)
            .map(|r| (0..=r).map(|c| l[(r, c)]).collect())
            .collect();
        let whitened: Vec<f64> = gram0.lower_solve(f).iter().copied().collect();
        let n_blocks = (2 + data.covariates().len()) as f64;
        Self {
            data,
            scales,
            sigma2,
            kss_unit: n_blocks + gram0.jitter(),
            points: registry.to_vec(),
            chol_rows,
            whitened,
        }
    }

    fn kernel_unit(&self, a: &LatentPoint, b: &LatentPoint) -> f64 {
        let d_graph = self.data.distances().entries();
        let mut acc = (-self.scales[0] * d_graph[(a.subject, b.subject)]).exp();
        for (k, cov) in self.data.covariates().iter().enumerate() {
            let d = cov[a.subject] - cov[b.subject];
            acc += (-self.scales[1 + k] * d * d).exp();
        }
        let n_cov = self.data.covariates().len();
        let dt = a.time - b.time;
        acc + (-self.scales[1 + n_cov] * dt * dt).exp()
    }

    /// Draws `f` at one candidate point from its GP conditional given every
    /// evaluation so far, and appends it to the conditioning set.
    fn conditional_draw<R: Rng>(&mut self, subject: usize, time: f64, rng: &mut R) -> f64 {
        let point = LatentPoint {
            subject,
            time,
            observed: false,
        };
        let q = self.points.len();
        let mut y = vec![0.0; q];
        for r in 0..q {
            let mut acc = self.kernel_unit(&point, &self.points[r]);
            for c in 0..r {
                acc -= self.chol_rows[r][c] * y[c];
            }
            y[r] = acc / self.chol_rows[r][r];
        }
        let mean: f64 = y.iter().zip(self.whitened.iter()).map(|(a, b)| a * b).sum();
        let var_unit = (self.kss_unit - y.iter().map(|v| v * v).sum::<f64>()).max(1e-10);
        let z: f64 = rand_distr::Distribution::sample(&rand_distr::StandardNormal, rng);
        let f_val = mean + (self.sigma2 * var_unit).sqrt() * z;

        let d = var_unit.sqrt();
        self.whitened.push((f_val - mean) / d);
        y.push(d);
        self.chol_rows.push(y);
        self.points.push(point);
        f_val
    }
}

fn survival_loglik(registry: Vec<LatentPoint>) -> impl FnMut(&DVector<f64>) -> f64 {
    move |f: &DVector<f64>| {
        registry
            .iter()
            .zip(f.iter())
            .map(|(p, &v)| {
                if p.observed {
                    log_logistic(v)
                } else {
                    log_logistic(-v)
                }
            })
            .sum()
    }
}

const MAX_CANDIDATES_PER_SWEEP: usize = 500_000;

/// One full Algorithm-2 sweep: parallel per-subject augmentation, conjugate
/// baseline-rate update, then the classifier update machinery over the
/// re-dimensioned latent vector.
///
/// `registry` must start with the observed points; `state` must be keyed to
/// the current registry. `aug_rng` supplies the per-subject substream.
pub(crate) fn survival_sweep_once<R: Rng>(
    data: &SurvivalDataset,
    sweep_cfg: &SweepConfig,
    alpha_omega: f64,
    beta_omega: f64,
    registry: &mut Vec<LatentPoint>,
    state: &mut ChainState,
    omega: &mut f64,
    stats: &mut ChainStats,
    aug_rng: &mut dyn FnMut(usize) -> rand_chacha::ChaCha8Rng,
    chain_rng: &mut R,
) -> Result<()> {
    let m = data.len();
    let sum_times: f64 = data.times().iter().sum();
    let observed: Vec<LatentPoint> = registry[..m].to_vec();
    debug_assert!(observed.iter().all(|p| p.observed));

    // Augmentation. Candidate counts and uniforms come from per-subject
    // substreams; the latent imputation is sequential by subject because
    // candidates of different subjects are correlated through the shared
    // time block, and the conditioning set must grow as evaluations are
    // drawn for the imputed joint law to be exact.
    let omega_now = *omega;
    let per_subject: Vec<(rand_chacha::ChaCha8Rng, Vec<f64>)> = (0..m)
        .map(|i| {
            let mut rng = aug_rng(i);
            let candidates = draw_candidate_times(omega_now, data.times()[i], &mut rng);
            (rng, candidates)
        })
        .collect();
    let total: usize = per_subject.iter().map(|(_, c)| c.len()).sum();
    if total > MAX_CANDIDATES_PER_SWEEP {
        return Err(Error::SamplerAbort(format!(
            "baseline rate produced {total} candidate points in one sweep"
        )));
    }

    let mut ext = AugmentExtension::seed(
        data,
        &state.scales,
        state.sigma2,
        registry,
        state.gram0(),
        &state.f,
    );
    let mut new_registry = observed;
    let mut new_f: Vec<f64> = (0..m).map(|i| state.f[i]).collect();
    for (i, (mut rng, candidates)) in per_subject.into_iter().enumerate() {
        for t in candidates {
            let f_val = ext.conditional_draw(i, t, &mut rng);
            if rng.gen::<f64>() < 1.0 - logistic(f_val) {
                new_registry.push(LatentPoint {
                    subject: i,
                    time: t,
                    observed: false,
                });
                new_f.push(f_val);
            }
        }
    }

    *registry = new_registry;
    let n_rejected = registry.len() - m;
    *omega = update_omega(
        m,
        n_rejected,
        sum_times,
        alpha_omega,
        beta_omega,
        chain_rng,
    );
    let base = KernelBase::Blocks(SqExpBlocks::new(registry_blocks(registry, data))?);
    *state = state.with_new_latent(&base, sweep_cfg, DVector::from_vec(new_f))?;
    let mut loglik = survival_loglik(registry.clone());
    gibbs_sweep(&base, sweep_cfg, state, &mut loglik, chain_rng, stats)?;
    Ok(())
}

/// Runs the full Gibbs sampler (Algorithm-2 sweep order).
pub fn fit_survival(data: &SurvivalDataset, cfg: &SurvivalConfig) -> Result<SurvivalPosterior> {
    cfg.validate()?;
    let m = data.len();
    if m < 2 {
        return Err(Error::InvalidConfig("need at least 2 subjects".into()));
    }
    let sweep_cfg = cfg.sweep_config();
    let mut chain_rng = substream(cfg.seed, "survival-chain", 0);

    // Observed points first; rejected points appended each sweep.
    let observed: Vec<LatentPoint> = data
        .times()
        .iter()
        .enumerate()
        .map(|(i, &t)| LatentPoint {
            subject: i,
            time: t,
            observed: true,
        })
        .collect();
    let mut registry = observed.clone();

    let base = KernelBase::Blocks(SqExpBlocks::new(registry_blocks(&registry, data))?);
    let mut state = ChainState::init(&base, &sweep_cfg, &mut chain_rng)?;
    let mut omega = draw_gamma(cfg.alpha_omega, cfg.beta_omega, &mut chain_rng);
    let mut stats = ChainStats::default();
    let mut draws = Vec::new();

    for sweep in 0..cfg.ns {
        let seed = cfg.seed;
        let mut aug_rng = move |i: usize| {
            substream(seed, "survival-aug", (sweep as u64) * (m as u64) + i as u64)
        };
        survival_sweep_once(
            data,
            &sweep_cfg,
            cfg.alpha_omega,
            cfg.beta_omega,
            &mut registry,
            &mut state,
            &mut omega,
            &mut stats,
            &mut aug_rng,
            &mut chain_rng,
        )?;

        if stats.sweeps >= 20 && 2 * stats.stalled_sweeps > stats.sweeps {
            return Err(Error::SamplerAbort(format!(
                "{} of {} sweeps stalled",
                stats.stalled_sweeps, stats.sweeps
            )));
        }

        if sweep >= cfg.burn_in && (sweep - cfg.burn_in) % cfg.thin == 0 {
            draws.push(SurvivalDraw {
                omega,
                sigma2: state.sigma2,
                scales: state.scales.clone(),
                f: state.f.clone(),
                registry: registry.clone(),
            });
        }
    }

    Ok(SurvivalPosterior { draws, stats })
}

/// Posterior-mean survival surfaces on the uniform grid from 0 to
/// `max T` with 100 points (`Delta = max T / 99`).
#[derive(Debug, Clone)]
pub struct SurvivalSurface {
    pub grid: Vec<f64>,
    /// One row per subject, `S(t, X_i)` on the grid.
    pub per_subject: Vec<Vec<f64>>,
}

pub const SURFACE_GRID_POINTS: usize = 100;

/// Evaluates survival surfaces from posterior draws.
///
/// Per draw, the hazard `omega(s, X) = Omega * logistic(mu(s, X))` uses the
/// GP conditional mean at grid points given that draw's latent values, and
/// the cumulative integral is the trapezoidal rule on the grid; surfaces
/// are averaged across draws.
pub fn survival_surface(draws: &[SurvivalDraw], data: &SurvivalDataset) -> Result<SurvivalSurface> {
    if draws.is_empty() {
        return Err(Error::InvalidConfig("no posterior draws".into()));
    }
    let m = data.len();
    let max_t = data.max_time();
    let delta = max_t / (SURFACE_GRID_POINTS as f64 - 1.0);
    let grid: Vec<f64> = (0..SURFACE_GRID_POINTS).map(|g| g as f64 * delta).collect();
    let d_graph = data.distances().entries();
    let n_cov = data.covariates().len();

    let mut acc = vec![vec![0.0; SURFACE_GRID_POINTS]; m];
    for draw in draws {
        let n = draw.registry.len();
        let blocks = registry_blocks(&draw.registry, data);
        let hyper = SurvivalHyper {
            signal_variance: draw.sigma2,
            ell_graph: draw.scales[0],
            ell_covariates: draw.scales[1..1 + n_cov].to_vec(),
            ell_time: draw.scales[1 + n_cov],
        };
        let base = SqExpBlocks::new(blocks)?;
        let k = base.gram_unit(&draw.scales) * draw.sigma2;
        let gram = GramMatrix::from_kernel(k, JitterLadder::Survival)?;
        let alpha = gram.solve(&draw.f);

        // Additive kernel separates: mu(s, i) = sigma^2 (gdot[i] + tdot[s]).
        let mut gdot = vec![0.0; m];
        for i in 0..m {
            let mut acc_i = 0.0;
            for (b, point) in draw.registry.iter().enumerate() {
                let mut val = (-hyper.ell_graph * d_graph[(i, point.subject)]).exp();
                for (kc, cov) in data.covariates().iter().enumerate() {
                    let d = cov[i] - cov[point.subject];
                    val += (-hyper.ell_covariates[kc] * d * d).exp();
                }
                acc_i += val * alpha[b];
            }
            gdot[i] = acc_i;
        }
        let mut tdot = vec![0.0; SURFACE_GRID_POINTS];
        for (g, &s) in grid.iter().enumerate() {
            let mut acc_g = 0.0;
            for b in 0..n {
                let dt = s - draw.registry[b].time;
                acc_g += (-hyper.ell_time * dt * dt).exp() * alpha[b];
            }
            tdot[g] = acc_g;
        }

        for i in 0..m {
            let mut integral = 0.0;
            let mut prev_rate = draw.omega * logistic(draw.sigma2 * (gdot[i] + tdot[0]));
            acc[i][0] += 1.0; // S(0) = 1 exactly
            for g in 1..SURFACE_GRID_POINTS {
                let rate = draw.omega * logistic(draw.sigma2 * (gdot[i] + tdot[g]));
                integral += 0.5 * delta * (prev_rate + rate);
                prev_rate = rate;
                acc[i][g] += (-integral).exp();
            }
        }
    }

    let b = draws.len() as f64;
    let per_subject = acc
        .into_iter()
        .map(|row| row.into_iter().map(|v| v / b).collect())
        .collect();
    Ok(SurvivalSurface { grid, per_subject })
}

/// Averages per-subject curves within each distinct group label.
pub fn group_mean_curves(surface: &SurvivalSurface, groups: &[f64]) -> Vec<(f64, Vec<f64>)> {
    let mut labels: Vec<f64> = Vec::new();
    for &g in groups {
        if !labels.contains(&g) {
            labels.push(g);
        }
    }
    labels.sort_by(|a, b| a.partial_cmp(b).expect("finite group labels"));
    labels
        .into_iter()
        .map(|label| {
            let members: Vec<&Vec<f64>> = surface
                .per_subject
                .iter()
                .zip(groups.iter())
                .filter(|(_, &g)| g == label)
                .map(|(row, _)| row)
                .collect();
            let mut mean = vec![0.0; surface.grid.len()];
            for row in &members {
                for (m, v) in mean.iter_mut().zip(row.iter()) {
                    *m += v;
                }
            }
            for v in &mut mean {
                *v /= members.len() as f64;
            }
            (label, mean)
        })
        .collect()
}

/// Empirical step-function survival estimate `S(t) = #(T > t) / m` on a
/// grid (the no-censoring Kaplan-Meier estimate).
pub fn km_curve(times: &[f64], grid: &[f64]) -> Vec<f64> {
    let m = times.len() as f64;
    grid.iter()
        .map(|&t| times.iter().filter(|&&ti| ti > t).count() as f64 / m)
        .collect()
}
