//! The five experiment tasks behind the CLI subcommands.

use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use nalgebra::DMatrix;

use netgp::classifier::{
    fit, fit_fixed, predict, predict_fixed, ClassifierPosterior, LabeledDataset, PredictMode,
    Prediction,
};
use netgp::distance::{distance_matrix, DistanceMatrix};
use netgp::graph::{threshold_binarize, Graph};
use netgp::kernel::random_walk_gram;
use netgp::occ::{scores_from_moments, OccScores};
use netgp::rng::substream;
use netgp::sim::{
    gen_survival_case, simulate_two_class, ClassDesign, SimDesign, SurvivalCase,
};
use netgp::survival::{
    fit_survival, group_mean_curves, km_curve, survival_surface, SurvivalDataset,
};

use crate::config::{ExperimentConfig, Method, SamplerConfig};
use crate::cv::{run_cv, stratified_split, EvalReport, FoldModel, Scheme};
use crate::dataset::{load_dataset, save_dataset, Dataset};

/// Kernel input prepared once per dataset: a distance matrix for the
/// squared-exponential methods, or the full fixed Gram for the random-walk
/// kernel. Folds slice it; nothing is recomputed per fold.
pub enum PreparedKernel {
    Distances(DistanceMatrix),
    FixedGram(DMatrix<f64>),
}

pub fn prepare_kernel(cfg: &ExperimentConfig, ds: &Dataset) -> Result<PreparedKernel> {
    match cfg.kernel.method()? {
        Method::GpF | Method::GpLambda(_) => {
            let kind = cfg.kernel.distance_kind(ds.has_negative_weights())?;
            if let Some(path) = &cfg.kernel.distances {
                if path.exists() {
                    let file = fs::File::open(path)
                        .with_context(|| format!("opening {}", path.display()))?;
                    let dm = DistanceMatrix::read_csv(BufReader::new(file))?;
                    if dm.len() != ds.len() {
                        bail!(
                            "cached distances {} cover {} graphs, dataset has {}",
                            path.display(),
                            dm.len(),
                            ds.len()
                        );
                    }
                    if dm.kind() != kind {
                        bail!(
                            "cached distances {} are {}, config needs {}",
                            path.display(),
                            dm.kind(),
                            kind
                        );
                    }
                    return Ok(PreparedKernel::Distances(dm));
                }
            }
            let dm = distance_matrix(&ds.graphs, kind)?;
            if let Some(path) = &cfg.kernel.distances {
                if let Some(parent) = path.parent() {
                    fs::create_dir_all(parent)?;
                }
                let mut w = BufWriter::new(fs::File::create(path)?);
                dm.write_csv(&mut w)?;
            }
            Ok(PreparedKernel::Distances(dm))
        }
        Method::GpRw => {
            let all_binary = ds.graphs.iter().all(|g| g.is_binary());
            let graphs: Vec<Graph> = if all_binary {
                ds.graphs.clone()
            } else {
                eprintln!(
                    "note: weighted graphs binarized at |weight| > {} for the random-walk kernel",
                    cfg.kernel.binarize_cutoff
                );
                ds.graphs
                    .iter()
                    .map(|g| threshold_binarize(g, cfg.kernel.binarize_cutoff))
                    .collect()
            };
            let gram = random_walk_gram(&graphs, cfg.kernel.rw_params())?;
            Ok(PreparedKernel::FixedGram(gram.k().clone()))
        }
    }
}

/// A classifier fitted on one training subset, ready to score test subsets.
pub enum FittedGp<'a> {
    SqExp {
        data: LabeledDataset,
        post: ClassifierPosterior,
        dm: &'a DistanceMatrix,
        train: Vec<usize>,
        mode: PredictMode,
    },
    Fixed {
        k_train: DMatrix<f64>,
        post: ClassifierPosterior,
        k_full: &'a DMatrix<f64>,
        train: Vec<usize>,
        mode: PredictMode,
    },
}

pub fn gp_fit<'a>(
    kernel: &'a PreparedKernel,
    train: &[usize],
    labels_train: Vec<f64>,
    sampler: &SamplerConfig,
    seed: u64,
) -> Result<FittedGp<'a>> {
    let mode = sampler.predict_mode()?;
    let cfg = sampler.classifier_config(seed);
    match kernel {
        PreparedKernel::Distances(dm) => {
            let data = LabeledDataset::new(dm.restrict(train), labels_train)?;
            let post = fit(&data, &cfg)?;
            Ok(FittedGp::SqExp {
                data,
                post,
                dm,
                train: train.to_vec(),
                mode,
            })
        }
        PreparedKernel::FixedGram(k) => {
            let k_train = submatrix(k, train, train);
            let post = fit_fixed(&k_train, &labels_train, &cfg)?;
            Ok(FittedGp::Fixed {
                k_train,
                post,
                k_full: k,
                train: train.to_vec(),
                mode,
            })
        }
    }
}

impl FittedGp<'_> {
    pub fn predict(&self, test: &[usize]) -> Result<Prediction> {
        match self {
            FittedGp::SqExp {
                data,
                post,
                dm,
                train,
                mode,
            } => {
                let d_new = dm.cross(test, train);
                Ok(predict(post, data, &d_new, *mode)?)
            }
            FittedGp::Fixed {
                k_train,
                post,
                k_full,
                train,
                mode,
            } => {
                let k_cross = submatrix(k_full, test, train);
                let k_diag: Vec<f64> = test.iter().map(|&i| k_full[(i, i)]).collect();
                Ok(predict_fixed(post, k_train, &k_cross, &k_diag, *mode)?)
            }
        }
    }

    pub fn posterior(&self) -> &ClassifierPosterior {
        match self {
            FittedGp::SqExp { post, .. } | FittedGp::Fixed { post, .. } => post,
        }
    }
}

fn submatrix(k: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |a, b| k[(rows[a], cols[b])])
}

struct GpFoldModel<'a> {
    kernel: &'a PreparedKernel,
    labels: &'a [f64],
    sampler: &'a SamplerConfig,
}

impl FoldModel for GpFoldModel<'_> {
    fn fit_predict(&self, train: &[usize], test: &[usize], seed: u64) -> Result<Vec<f64>> {
        let labels_train: Vec<f64> = train.iter().map(|&i| self.labels[i]).collect();
        let fitted = gp_fit(self.kernel, train, labels_train, self.sampler, seed)?;
        Ok(fitted.predict(test)?.probability)
    }
}

/// Cross-validated evaluation of the GP classifier over a prepared kernel.
pub fn evaluate_classifier(
    kernel: &PreparedKernel,
    labels: &[f64],
    sampler: &SamplerConfig,
    scheme: &Scheme,
    seed: u64,
) -> Result<EvalReport> {
    let model = GpFoldModel {
        kernel,
        labels,
        sampler,
    };
    run_cv(labels, scheme, &model, seed)
}

fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<fs::File>) -> Result<()>) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut w = BufWriter::new(
        fs::File::create(path).with_context(|| format!("creating {}", path.display()))?,
    );
    body(&mut w)?;
    w.flush()?;
    Ok(())
}

/// `simulate`: writes a dataset directory for one of the random-graph or
/// survival designs.
pub fn cmd_simulate(cfg: &ExperimentConfig) -> Result<()> {
    let out = cfg.out_dir()?;
    let sim = &cfg.sim;
    let m0 = ((sim.m as f64 * sim.class0_fraction).round() as usize).clamp(1, sim.m - 1);
    let m1 = sim.m - m0;

    match sim.model.as_str() {
        "survival-easy" | "survival-hard" => {
            if sim.m % 2 != 0 {
                bail!("survival designs use equal classes; m must be even");
            }
            let case = if sim.model == "survival-easy" {
                SurvivalCase::Easy
            } else {
                SurvivalCase::Hard
            };
            let mut rng = substream(cfg.seed, "sim-survival", 0);
            let sample = gen_survival_case(case, sim.m / 2, sim.n, sim.er_p0, sim.er_p1, &mut rng)?;
            let notes = format!(
                "times truncated to positive reals by rejection; graphs ER(n={}, p0={}, p1={})",
                sim.n, sim.er_p0, sim.er_p1
            );
            save_dataset(
                out,
                &sample.graphs,
                Some(&sample.groups),
                Some(&sample.times),
                &[],
                "survival",
                Some(&sim.model),
                cfg.seed,
                Some(&notes),
            )?;
        }
        "ergm" => {
            bail!("ERGM generation is not supported (no sampler is shipped); see the README for available models")
        }
        name => {
            let design = match name {
                "small-world" => ClassDesign::SmallWorld {
                    radius: sim.lattice_radius,
                    p0: sim.rewire_p0,
                    p1: sim.rewire_p1,
                },
                "sbm" => ClassDesign::Sbm {
                    link0: sim.sbm_link0,
                    link1: sim.sbm_link1,
                },
                "corr-er" => ClassDesign::CorrEr {
                    parent_p: sim.parent_p,
                    rho: sim.rho,
                },
                "pref-attach" => ClassDesign::PrefAttach {
                    power0: sim.power0,
                    power1: sim.power1,
                },
                "er" => ClassDesign::Er {
                    p0: sim.er_p0,
                    p1: sim.er_p1,
                },
                other => bail!("unknown simulation model `{other}`"),
            };
            let sample = simulate_two_class(&SimDesign {
                design,
                n: sim.n,
                m_class0: m0,
                m_class1: m1,
                seed: cfg.seed,
            })?;
            let radius_note = format!(
                "ring lattice radius {}; rewiring moves edges, conserving the count",
                sim.lattice_radius
            );
            let notes = match name {
                "small-world" => radius_note.as_str(),
                "pref-attach" => "one edge per arriving node; attachment weight degree^power + 1",
                "corr-er" => "per-class parent graphs drawn once, samples are rho-thinnings",
                _ => "independent dyads per sample",
            };
            save_dataset(
                out,
                &sample.graphs,
                Some(&sample.labels),
                None,
                &[],
                "classification",
                Some(name),
                cfg.seed,
                Some(notes),
            )?;
        }
    }
    eprintln!("simulate: wrote dataset to {}", out.display());
    Ok(())
}

/// `distances`: computes the configured distance matrix and caches it.
pub fn cmd_distances(cfg: &ExperimentConfig) -> Result<()> {
    let ds = load_dataset(cfg.dataset_path()?)?;
    let kind = cfg.kernel.distance_kind(ds.has_negative_weights())?;
    let start = std::time::Instant::now();
    let dm = distance_matrix(&ds.graphs, kind)?;
    let out = cfg.out_dir()?.join("distances.csv");
    write_file(&out, |w| Ok(dm.write_csv(w)?))?;
    eprintln!(
        "distances: {} ({} graphs) in {:.2}s -> {}",
        kind,
        dm.len(),
        start.elapsed().as_secs_f64(),
        out.display()
    );
    Ok(())
}

/// `classify`: cross-validated classification; writes the evaluation report.
pub fn cmd_classify(cfg: &ExperimentConfig) -> Result<EvalReport> {
    let ds = load_dataset(cfg.dataset_path()?)?;
    let labels = ds.labels()?.to_vec();
    let kernel = prepare_kernel(cfg, &ds)?;
    let scheme = Scheme::from_config(&cfg.eval)?;
    let report = evaluate_classifier(&kernel, &labels, &cfg.sampler, &scheme, cfg.seed)?;
    let out = cfg.out_dir()?;
    write_file(&out.join("classify_report.csv"), |w| report.write_csv(w))?;
    if cfg.sampler.export_draws {
        let all: Vec<usize> = (0..labels.len()).collect();
        let fitted = gp_fit(&kernel, &all, labels.clone(), &cfg.sampler, cfg.seed)?;
        write_file(&out.join("draws.csv"), |w| {
            Ok(fitted.posterior().write_draws_csv(w)?)
        })?;
    }
    eprintln!(
        "classify: mean accuracy {:.3} (sd {:.3}) over {} replicates in {:.2}s",
        report.mean_accuracy,
        report.sd_accuracy,
        report.replicates.len(),
        report.runtime_s
    );
    Ok(report)
}

/// Which side of a threshold holds the anomalies, judged by where the
/// training-class score centroid falls.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnomalousSide {
    Low,
    High,
}

impl AnomalousSide {
    pub fn as_str(self) -> &'static str {
        match self {
            AnomalousSide::Low => "low",
            AnomalousSide::High => "high",
        }
    }

    fn contains(self, value: f64, threshold: f64) -> bool {
        match self {
            AnomalousSide::Low => value < threshold,
            AnomalousSide::High => value >= threshold,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OccScoreSummary {
    pub score: &'static str,
    pub threshold: Option<f64>,
    pub split_index: Option<usize>,
    pub side: Option<AnomalousSide>,
    pub minority_anomalous: usize,
    pub minority_total: usize,
    pub majority_anomalous: usize,
    pub majority_total: usize,
}

#[derive(Debug, Clone)]
pub struct OccReplicate {
    pub replicate: usize,
    pub test_indices: Vec<usize>,
    pub scores: OccScores,
    pub summaries: Vec<OccScoreSummary>,
}

fn summarize_score(
    name: &'static str,
    values: &[f64],
    threshold: Option<netgp::occ::ElbowThreshold>,
    train_centroid: f64,
    minority: &[bool],
) -> OccScoreSummary {
    let (mut min_anom, mut maj_anom) = (0usize, 0usize);
    let minority_total = minority.iter().filter(|&&b| b).count();
    let majority_total = minority.len() - minority_total;
    let side = threshold.map(|t| {
        if train_centroid >= t.value {
            AnomalousSide::Low
        } else {
            AnomalousSide::High
        }
    });
    if let (Some(t), Some(side)) = (threshold, side) {
        for (&v, &is_min) in values.iter().zip(minority.iter()) {
            if v.is_finite() && side.contains(v, t.value) {
                if is_min {
                    min_anom += 1;
                } else {
                    maj_anom += 1;
                }
            }
        }
    }
    OccScoreSummary {
        score: name,
        threshold: threshold.map(|t| t.value),
        split_index: threshold.map(|t| t.split_index),
        side,
        minority_anomalous: min_anom,
        minority_total,
        majority_anomalous: maj_anom,
        majority_total,
    }
}

/// `occ`: train on the majority class only, score held-out points, place
/// elbow thresholds, and label the anomalous side of each.
pub fn cmd_occ(cfg: &ExperimentConfig) -> Result<Vec<OccReplicate>> {
    let ds = load_dataset(cfg.dataset_path()?)?;
    let labels = ds.labels()?.to_vec();
    let kernel = prepare_kernel(cfg, &ds)?;
    let Scheme::Split {
        fraction,
        replicates,
    } = Scheme::from_config(&cfg.eval)?
    else {
        bail!("the occ task uses the split evaluation scheme");
    };

    let n_pos = labels.iter().filter(|&&y| y > 0.0).count();
    let majority = if n_pos * 2 > labels.len() { 1.0 } else { -1.0 };

    let mut outcomes = Vec::with_capacity(replicates);
    for r in 0..replicates {
        let mut rng = substream(cfg.seed, "split", r as u64);
        let fold = stratified_split(&labels, fraction, &mut rng);
        let train_one: Vec<usize> = fold
            .train
            .iter()
            .copied()
            .filter(|&i| labels[i] == majority)
            .collect();
        if train_one.len() < 2 {
            bail!("replicate {r}: fewer than 2 majority-class training points");
        }
        let seed = cfg.seed.wrapping_add((r as u64).wrapping_mul(0xD1B54A32D192ED03));
        let fitted = gp_fit(
            &kernel,
            &train_one,
            vec![1.0; train_one.len()],
            &cfg.sampler,
            seed,
        )?;
        let test_pred = fitted.predict(&fold.test)?;
        let scores = scores_from_moments(&test_pred.mean, &test_pred.variance)?;
        let train_pred = fitted.predict(&train_one)?;
        let train_scores = scores_from_moments(&train_pred.mean, &train_pred.variance)?;

        let minority: Vec<bool> = fold.test.iter().map(|&i| labels[i] != majority).collect();
        let centroid = |xs: &[f64]| {
            let finite: Vec<f64> = xs.iter().copied().filter(|v| v.is_finite()).collect();
            finite.iter().sum::<f64>() / finite.len() as f64
        };
        let summaries = vec![
            summarize_score("mu", &scores.mu, scores.mu_threshold, centroid(&train_scores.mu), &minority),
            summarize_score(
                "sigma2",
                &scores.sigma2,
                scores.sigma2_threshold,
                centroid(&train_scores.sigma2),
                &minority,
            ),
            summarize_score("pi", &scores.pi, scores.pi_threshold, centroid(&train_scores.pi), &minority),
            summarize_score("h", &scores.h, scores.h_threshold, centroid(&train_scores.h), &minority),
        ];
        outcomes.push(OccReplicate {
            replicate: r,
            test_indices: fold.test,
            scores,
            summaries,
        });
    }

    let out = cfg.out_dir()?;
    for rep in &outcomes {
        write_file(&out.join(format!("occ_scores_r{}.csv", rep.replicate)), |w| {
            writeln!(w, "index,label,mu,sigma2,pi,h")?;
            for (pos, &i) in rep.test_indices.iter().enumerate() {
                writeln!(
                    w,
                    "{i},{},{},{},{},{}",
                    labels[i],
                    rep.scores.mu[pos],
                    rep.scores.sigma2[pos],
                    rep.scores.pi[pos],
                    rep.scores.h[pos]
                )?;
            }
            writeln!(w, "score,threshold,split_index,anomalous_side")?;
            for s in &rep.summaries {
                writeln!(
                    w,
                    "{},{},{},{}",
                    s.score,
                    s.threshold.map_or("NA".into(), |v| format!("{v}")),
                    s.split_index.map_or("NA".into(), |v| format!("{v}")),
                    s.side.map_or("NA".into(), |v| v.as_str().to_string()),
                )?;
            }
            Ok(())
        })?;
    }
    write_file(&out.join("occ_summary.csv"), |w| {
        writeln!(
            w,
            "replicate,score,threshold,anomalous_side,minority_anomalous,minority_total,majority_anomalous,majority_total"
        )?;
        for rep in &outcomes {
            for s in &rep.summaries {
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{}",
                    rep.replicate,
                    s.score,
                    s.threshold.map_or("NA".into(), |v| format!("{v}")),
                    s.side.map_or("NA".into(), |v| v.as_str().to_string()),
                    s.minority_anomalous,
                    s.minority_total,
                    s.majority_anomalous,
                    s.majority_total
                )?;
            }
        }
        Ok(())
    })?;

    if cfg.sampler.export_draws {
        let all_one: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == majority).collect();
        let fitted = gp_fit(&kernel, &all_one, vec![1.0; all_one.len()], &cfg.sampler, cfg.seed)?;
        write_file(&out.join("draws.csv"), |w| {
            Ok(fitted.posterior().write_draws_csv(w)?)
        })?;
    }
    eprintln!("occ: {} replicates -> {}", outcomes.len(), out.display());
    Ok(outcomes)
}

/// `survival`: fits the survival model and writes posterior-mean surfaces
/// plus empirical (Kaplan-Meier-style) group curves.
pub fn cmd_survival(cfg: &ExperimentConfig) -> Result<()> {
    let ds = load_dataset(cfg.dataset_path()?)?;
    let times = ds.times()?.to_vec();
    if matches!(cfg.kernel.method()?, Method::GpRw) {
        bail!("the survival model needs a stationary kernel; use gp-f or gp-lambda");
    }
    let PreparedKernel::Distances(dm) = prepare_kernel(cfg, &ds)? else {
        unreachable!("random-walk rejected above")
    };
    let data = SurvivalDataset::new(times.clone(), dm, ds.covariates.clone())?;
    let start = std::time::Instant::now();
    let post = fit_survival(&data, &cfg.sampler.survival_config(cfg.seed))?;
    let surface = survival_surface(&post.draws, &data)?;
    let groups: Vec<f64> = ds.labels.clone().unwrap_or_else(|| vec![0.0; ds.len()]);
    let group_means = group_mean_curves(&surface, &groups);

    let header = |w: &mut BufWriter<fs::File>| -> Result<()> {
        let cols: Vec<String> = surface.grid.iter().map(|t| format!("{t}")).collect();
        writeln!(w, "subject,{}", cols.join(","))?;
        Ok(())
    };
    let out = cfg.out_dir()?;
    write_file(&out.join("survival_surfaces.csv"), |w| {
        header(w)?;
        for (i, row) in surface.per_subject.iter().enumerate() {
            let cols: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            writeln!(w, "{i},{}", cols.join(","))?;
        }
        for (label, row) in &group_means {
            let cols: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            writeln!(w, "group:{label},{}", cols.join(","))?;
        }
        Ok(())
    })?;
    write_file(&out.join("survival_km.csv"), |w| {
        header(w)?;
        for (label, _) in &group_means {
            let member_times: Vec<f64> = times
                .iter()
                .zip(groups.iter())
                .filter(|(_, &g)| g == *label)
                .map(|(&t, _)| t)
                .collect();
            let km = km_curve(&member_times, &surface.grid);
            let cols: Vec<String> = km.iter().map(|v| format!("{v}")).collect();
            writeln!(w, "group:{label},{}", cols.join(","))?;
        }
        Ok(())
    })?;
    eprintln!(
        "survival: {} draws, |R| final {}, {:.2}s -> {}",
        post.draws.len(),
        post.draws.last().map_or(0, |d| d.registry.len() - ds.len()),
        start.elapsed().as_secs_f64(),
        out.display()
    );
    Ok(())
}
