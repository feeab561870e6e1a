//! Random-graph generators and synthetic outcome designs.
//!
//! Generators are pure functions of their parameters and an explicit RNG;
//! the experiment harness derives one substream per sample so replicate
//! generation can run in any order. Policy choices the designs leave open
//! (small-world lattice radius 2, one edge per preferential-attachment
//! arrival) are recorded in dataset manifests by the harness.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::substream;

/// Erdos-Renyi: each dyad independently present with probability `p`.
pub fn gen_er<R: Rng>(n: usize, p: f64, rng: &mut R) -> Result<Graph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidConfig(format!("edge probability {p}")));
    }
    if n < 2 {
        return Err(Error::InvalidConfig(format!("order {n} < 2")));
    }
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen::<f64>() < p {
                edges.push((i, j, 1.0));
            }
        }
    }
    Graph::from_edges(n, &edges)
}

/// Watts-Strogatz small world with a ring lattice of neighborhood radius 2
/// (degree 4); see [`gen_small_world_with_radius`].
pub fn gen_small_world<R: Rng>(n: usize, rewire_p: f64, rng: &mut R) -> Result<Graph> {
    if n < 5 {
        return Err(Error::InvalidConfig(format!(
            "small-world graphs need n >= 5, got {n}"
        )));
    }
    gen_small_world_with_radius(n, 2, rewire_p, rng)
}

/// Watts-Strogatz small world: a ring lattice where each node connects to
/// its `radius` nearest neighbors on each side (degree `2 * radius`), with
/// each edge independently rewired with probability `rewire_p`. Rewiring
/// replaces the far endpoint with a uniformly chosen node, avoiding self
/// loops and duplicate edges, so the edge count is conserved.
pub fn gen_small_world_with_radius<R: Rng>(
    n: usize,
    radius: usize,
    rewire_p: f64,
    rng: &mut R,
) -> Result<Graph> {
    if radius < 1 || n < 2 * radius + 1 {
        return Err(Error::InvalidConfig(format!(
            "ring lattice of radius {radius} needs n >= {}, got {n}",
            2 * radius + 1
        )));
    }
    if !(0.0..=1.0).contains(&rewire_p) {
        return Err(Error::InvalidConfig(format!(
            "rewiring probability {rewire_p}"
        )));
    }
    let mut adj = vec![vec![false; n]; n];
    for i in 0..n {
        for k in 1..=radius {
            let j = (i + k) % n;
            adj[i][j] = true;
            adj[j][i] = true;
        }
    }
    for i in 0..n {
        for k in 1..=radius {
            let j = (i + k) % n;
            if rng.gen::<f64>() >= rewire_p {
                continue;
            }
            if !adj[i][j] {
                continue; // already moved by an earlier rewire
            }
            let candidates: Vec<usize> = (0..n).filter(|&w| w != i && !adj[i][w]).collect();
            if candidates.is_empty() {
                continue;
            }
            let w = candidates[rng.gen_range(0..candidates.len())];
            adj[i][j] = false;
            adj[j][i] = false;
            adj[i][w] = true;
            adj[w][i] = true;
        }
    }
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if adj[i][j] {
                edges.push((i, j, 1.0));
            }
        }
    }
    Graph::from_edges(n, &edges)
}

/// Stochastic block model with two equal blocks and a symmetric 2x2 link
/// matrix `[[p00, p01], [p01, p11]]`.
pub fn gen_sbm<R: Rng>(n: usize, link: [[f64; 2]; 2], rng: &mut R) -> Result<Graph> {
    if n < 2 || n % 2 != 0 {
        return Err(Error::InvalidConfig(format!(
            "SBM needs an even order >= 2, got {n}"
        )));
    }
    if link[0][1] != link[1][0] {
        return Err(Error::InvalidConfig("link matrix must be symmetric".into()));
    }
    for row in &link {
        for &p in row {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidConfig(format!("link probability {p}")));
            }
        }
    }
    let half = n / 2;
    let block = |v: usize| usize::from(v >= half);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen::<f64>() < link[block(i)][block(j)] {
                edges.push((i, j, 1.0));
            }
        }
    }
    Graph::from_edges(n, &edges)
}

/// Correlated Erdos-Renyi: each edge of the binary `base` graph is retained
/// independently with probability `retain_rho`; non-edges stay absent.
pub fn gen_corr_er<R: Rng>(base: &Graph, retain_rho: f64, rng: &mut R) -> Result<Graph> {
    if !base.is_binary() {
        return Err(Error::InvalidConfig(
            "correlated ER thinning needs a binary base graph".into(),
        ));
    }
    if !(0.0..=1.0).contains(&retain_rho) {
        return Err(Error::InvalidConfig(format!(
            "retention probability {retain_rho}"
        )));
    }
    let n = base.order();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if base.weights()[(i, j)] == 1.0 && rng.gen::<f64>() < retain_rho {
                edges.push((i, j, 1.0));
            }
        }
    }
    Graph::from_edges(n, &edges)
}

/// Preferential attachment: nodes arrive one at a time and attach a single
/// edge to an existing node with probability proportional to
/// `degree^power + 1` (the +1 keeps zero-degree seeds reachable). The
/// result is a tree on `n` nodes.
pub fn gen_pref_attach<R: Rng>(n: usize, power: f64, rng: &mut R) -> Result<Graph> {
    if n < 2 {
        return Err(Error::InvalidConfig(format!(
            "preferential attachment needs n >= 2, got {n}"
        )));
    }
    if !(power > 0.0) {
        return Err(Error::InvalidConfig(format!("power {power} must be > 0")));
    }
    let mut degree = vec![0usize; n];
    let mut edges = Vec::with_capacity(n - 1);
    for v in 1..n {
        let weights: Vec<f64> = (0..v).map(|u| (degree[u] as f64).powf(power) + 1.0).collect();
        let total: f64 = weights.iter().sum();
        let mut draw = rng.gen::<f64>() * total;
        let mut target = v - 1;
        for (u, &w) in weights.iter().enumerate() {
            if draw < w {
                target = u;
                break;
            }
            draw -= w;
        }
        edges.push((target, v, 1.0));
        degree[target] += 1;
        degree[v] += 1;
    }
    Graph::from_edges(n, &edges)
}

/// Two-class random-graph designs from the classification experiments.
#[derive(Debug, Clone, PartialEq)]
pub enum ClassDesign {
    /// Small world with a common lattice radius and per-class rewiring
    /// probabilities.
    SmallWorld { radius: usize, p0: f64, p1: f64 },
    /// SBM with per-class link matrices.
    Sbm {
        link0: [[f64; 2]; 2],
        link1: [[f64; 2]; 2],
    },
    /// Correlated ER: per-class parents drawn once from ER(n, parent_p),
    /// samples are rho-thinnings of their class parent.
    CorrEr { parent_p: f64, rho: f64 },
    /// Preferential attachment with per-class powers.
    PrefAttach { power0: f64, power1: f64 },
    /// Plain ER with per-class densities.
    Er { p0: f64, p1: f64 },
}

impl ClassDesign {
    /// The parameterizations used in the simulation studies. The lattice
    /// radius of 5 gives the rewiring probabilities enough edges to act on;
    /// at radius 2 the two classes are close to indistinguishable at
    /// moderate sample sizes.
    pub fn default_small_world() -> Self {
        ClassDesign::SmallWorld {
            radius: 5,
            p0: 0.05,
            p1: 0.07,
        }
    }

    pub fn default_sbm() -> Self {
        ClassDesign::Sbm {
            link0: [[0.05, 0.15], [0.15, 0.05]],
            link1: [[0.10, 0.15], [0.15, 0.05]],
        }
    }

    pub fn default_corr_er() -> Self {
        ClassDesign::CorrEr {
            parent_p: 0.8,
            rho: 0.8,
        }
    }

    pub fn default_pref_attach() -> Self {
        ClassDesign::PrefAttach {
            power0: 0.6,
            power1: 1.4,
        }
    }
}

/// A full two-class simulation: design, order, per-class sample counts, seed.
#[derive(Debug, Clone, PartialEq)]
pub struct SimDesign {
    pub design: ClassDesign,
    pub n: usize,
    pub m_class0: usize,
    pub m_class1: usize,
    pub seed: u64,
}

/// Generated graphs with `+-1` labels (class 0 -> -1, class 1 -> +1).
#[derive(Debug, Clone)]
pub struct ClassifySample {
    pub graphs: Vec<Graph>,
    pub labels: Vec<f64>,
}

/// Simulates a two-class dataset; each graph draws from its own substream
/// of the design seed.
pub fn simulate_two_class(design: &SimDesign) -> Result<ClassifySample> {
    if design.m_class0 == 0 || design.m_class1 == 0 {
        return Err(Error::InvalidConfig(
            "each class needs at least one sample".into(),
        ));
    }
    let n = design.n;
    let parents = match &design.design {
        ClassDesign::CorrEr { parent_p, .. } => {
            let g0 = gen_er(n, *parent_p, &mut substream(design.seed, "sim-parent", 0))?;
            let g1 = gen_er(n, *parent_p, &mut substream(design.seed, "sim-parent", 1))?;
            Some((g0, g1))
        }
        _ => None,
    };
    let total = design.m_class0 + design.m_class1;
    let mut graphs = Vec::with_capacity(total);
    let mut labels = Vec::with_capacity(total);
    for idx in 0..total {
        let class1 = idx >= design.m_class0;
        let mut rng = substream(design.seed, "sim-graph", idx as u64);
        let g = match &design.design {
            ClassDesign::SmallWorld { radius, p0, p1 } => {
                gen_small_world_with_radius(n, *radius, if class1 { *p1 } else { *p0 }, &mut rng)?
            }
            ClassDesign::Sbm { link0, link1 } => {
                gen_sbm(n, if class1 { *link1 } else { *link0 }, &mut rng)?
            }
            ClassDesign::CorrEr { rho, .. } => {
                let (g0, g1) = parents.as_ref().expect("parents drawn above");
                gen_corr_er(if class1 { g1 } else { g0 }, *rho, &mut rng)?
            }
            ClassDesign::PrefAttach { power0, power1 } => {
                gen_pref_attach(n, if class1 { *power1 } else { *power0 }, &mut rng)?
            }
            ClassDesign::Er { p0, p1 } => gen_er(n, if class1 { *p1 } else { *p0 }, &mut rng)?,
        };
        graphs.push(g);
        labels.push(if class1 { 1.0 } else { -1.0 });
    }
    Ok(ClassifySample { graphs, labels })
}

/// The two survival simulation variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurvivalCase {
    /// Class densities N(2, 0.8^2) and N(4, 1), truncated to the positive
    /// reals; well-separated survival curves.
    Easy,
    /// N(3, 0.8^2) against the mixture 0.4 N(4,1) + 0.6 N(2,0.8^2), whose
    /// survival functions cross.
    Hard,
}

/// Survival times with per-subject ER graphs and group labels.
#[derive(Debug, Clone)]
pub struct SurvivalSample {
    pub times: Vec<f64>,
    pub graphs: Vec<Graph>,
    /// `-1` for class 0, `+1` for class 1.
    pub groups: Vec<f64>,
}

/// Draw from `N(mean, sd^2)` restricted to the positive reals by rejection.
pub fn truncated_normal_positive<R: Rng>(mean: f64, sd: f64, rng: &mut R) -> f64 {
    loop {
        let z: f64 = StandardNormal.sample(rng);
        let x = mean + sd * z;
        if x > 0.0 {
            return x;
        }
    }
}

fn survival_time<R: Rng>(case: SurvivalCase, class1: bool, rng: &mut R) -> f64 {
    match (case, class1) {
        (SurvivalCase::Easy, false) => truncated_normal_positive(2.0, 0.8, rng),
        (SurvivalCase::Easy, true) => truncated_normal_positive(4.0, 1.0, rng),
        (SurvivalCase::Hard, false) => truncated_normal_positive(3.0, 0.8, rng),
        (SurvivalCase::Hard, true) => {
            if rng.gen::<f64>() < 0.4 {
                truncated_normal_positive(4.0, 1.0, rng)
            } else {
                truncated_normal_positive(2.0, 0.8, rng)
            }
        }
    }
}

/// Simulates the survival designs: `m` subjects per class, times from the
/// class density, graphs from ER(n, p0) or ER(n, p1).
pub fn gen_survival_case<R: Rng>(
    case: SurvivalCase,
    m_per_class: usize,
    n: usize,
    p0: f64,
    p1: f64,
    rng: &mut R,
) -> Result<SurvivalSample> {
    if m_per_class < 1 {
        return Err(Error::InvalidConfig("m must be >= 1 per class".into()));
    }
    let total = 2 * m_per_class;
    let mut times = Vec::with_capacity(total);
    let mut graphs = Vec::with_capacity(total);
    let mut groups = Vec::with_capacity(total);
    for idx in 0..total {
        let class1 = idx >= m_per_class;
        times.push(survival_time(case, class1, rng));
        graphs.push(gen_er(n, if class1 { p1 } else { p0 }, rng)?);
        groups.push(if class1 { 1.0 } else { -1.0 });
    }
    Ok(SurvivalSample {
        times,
        graphs,
        groups,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{Continuous, ContinuousCDF, Normal};

    #[test]
    fn small_world_zero_rewire_is_exact_ring() {
        let mut rng = substream(1, "sw", 0);
        let g = gen_small_world(10, 0.0, &mut rng).unwrap();
        assert_eq!(g.edge_count(), 20);
        for i in 0..10 {
            let deg: f64 = g.weights().row(i).sum();
            assert_eq!(deg, 4.0);
            assert_eq!(g.weights()[(i, (i + 1) % 10)], 1.0);
            assert_eq!(g.weights()[(i, (i + 2) % 10)], 1.0);
        }
    }

    #[test]
    fn small_world_full_rewire_conserves_edges() {
        for seed in 0..10 {
            let mut rng = substream(seed, "sw-full", 0);
            let g = gen_small_world(20, 1.0, &mut rng).unwrap();
            assert_eq!(g.edge_count(), 40);
        }
    }

    #[test]
    fn small_world_rejects_tiny_orders() {
        let mut rng = substream(1, "sw-tiny", 0);
        assert!(gen_small_world(4, 0.1, &mut rng).is_err());
    }

    #[test]
    fn generators_are_deterministic_under_seed() {
        let g1 = gen_small_world(15, 0.3, &mut substream(9, "det", 0)).unwrap();
        let g2 = gen_small_world(15, 0.3, &mut substream(9, "det", 0)).unwrap();
        assert_eq!(g1, g2);
        let p1 = gen_pref_attach(30, 1.2, &mut substream(9, "det", 1)).unwrap();
        let p2 = gen_pref_attach(30, 1.2, &mut substream(9, "det", 1)).unwrap();
        assert_eq!(p1, p2);
    }

    #[test]
    fn sbm_extremes() {
        let mut rng = substream(2, "sbm", 0);
        let empty = gen_sbm(8, [[0.0, 0.0], [0.0, 0.0]], &mut rng).unwrap();
        assert_eq!(empty.edge_count(), 0);
        let full = gen_sbm(8, [[1.0, 1.0], [1.0, 1.0]], &mut rng).unwrap();
        assert_eq!(full.edge_count(), 8 * 7 / 2);
        assert!(gen_sbm(7, [[0.1, 0.1], [0.1, 0.1]], &mut rng).is_err());
    }

    #[test]
    fn sbm_within_block_density_matches_binomial_oracle() {
        let n = 100;
        let link = [[0.05, 0.15], [0.15, 0.05]];
        let mut within_edges = 0usize;
        let mut within_dyads = 0usize;
        for rep in 0..100 {
            let g = gen_sbm(n, link, &mut substream(3, "sbm-dens", rep)).unwrap();
            for i in 0..n {
                for j in (i + 1)..n {
                    let same_block = (i < n / 2) == (j < n / 2);
                    if same_block {
                        within_dyads += 1;
                        if g.weights()[(i, j)] == 1.0 {
                            within_edges += 1;
                        }
                    }
                }
            }
        }
        let p_hat = within_edges as f64 / within_dyads as f64;
        let se = (0.05 * 0.95 / within_dyads as f64).sqrt();
        assert!(
            (p_hat - 0.05).abs() < 3.0 * se,
            "density {p_hat}, se {se}"
        );
    }

    #[test]
    fn corr_er_extremes_and_expected_edges() {
        let base = gen_er(30, 0.8, &mut substream(4, "cer", 0)).unwrap();
        let same = gen_corr_er(&base, 1.0, &mut substream(4, "cer", 1)).unwrap();
        assert_eq!(same, base);
        let none = gen_corr_er(&base, 0.0, &mut substream(4, "cer", 2)).unwrap();
        assert_eq!(none.edge_count(), 0);

        let rho = 0.6;
        let mut total = 0usize;
        let reps = 200;
        for rep in 0..reps {
            let g = gen_corr_er(&base, rho, &mut substream(4, "cer-mean", rep)).unwrap();
            total += g.edge_count();
        }
        let expect = rho * base.edge_count() as f64;
        let mean = total as f64 / reps as f64;
        let se = (base.edge_count() as f64 * rho * (1.0 - rho) / reps as f64).sqrt();
        assert!((mean - expect).abs() < 3.0 * se, "{mean} vs {expect}");

        let weighted = Graph::from_edges(3, &[(0, 1, 0.5)]).unwrap();
        assert!(gen_corr_er(&weighted, 0.5, &mut substream(4, "cer", 3)).is_err());
    }

    fn is_connected(g: &Graph) -> bool {
        let n = g.order();
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for u in 0..n {
                if g.weights()[(v, u)] != 0.0 && !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    #[test]
    fn pref_attach_builds_connected_trees() {
        let mut rng = substream(5, "pa", 0);
        let g = gen_pref_attach(2, 1.0, &mut rng).unwrap();
        assert_eq!(g.edge_count(), 1);
        for rep in 0..20 {
            let g = gen_pref_attach(40, 0.9, &mut substream(5, "pa", rep)).unwrap();
            assert_eq!(g.edge_count(), 39);
            assert!(is_connected(&g));
        }
    }

    #[test]
    fn pref_attach_high_power_concentrates_degree() {
        let mut wins = 0;
        let reps = 100;
        for rep in 0..reps {
            let low = gen_pref_attach(100, 0.6, &mut substream(6, "pa-low", rep)).unwrap();
            let high = gen_pref_attach(100, 2.5, &mut substream(6, "pa-high", rep)).unwrap();
            let max_deg = |g: &Graph| {
                (0..100)
                    .map(|i| g.weights().row(i).sum() as usize)
                    .max()
                    .unwrap()
            };
            if max_deg(&high) > max_deg(&low) {
                wins += 1;
            }
        }
        assert!(wins >= 90, "high power won only {wins}/{reps}");
    }

    #[test]
    fn survival_times_positive_and_deterministic() {
        let s1 = gen_survival_case(SurvivalCase::Hard, 20, 10, 0.3, 0.7, &mut substream(7, "sv", 0))
            .unwrap();
        assert!(s1.times.iter().all(|&t| t > 0.0));
        assert_eq!(s1.times.len(), 40);
        assert_eq!(s1.groups.iter().filter(|&&g| g == 1.0).count(), 20);
        let s2 = gen_survival_case(SurvivalCase::Hard, 20, 10, 0.3, 0.7, &mut substream(7, "sv", 0))
            .unwrap();
        assert_eq!(s1.times, s2.times);
    }

    #[test]
    fn easy_case_class0_mean_matches_truncated_normal_oracle() {
        // Oracle: E[X | X > 0] for X ~ N(2, 0.8^2) via the normal hazard.
        let normal = Normal::new(0.0, 1.0).unwrap();
        let alpha = (0.0 - 2.0) / 0.8;
        let oracle = 2.0 + 0.8 * normal.pdf(alpha) / (1.0 - normal.cdf(alpha));
        let m = 10_000;
        let s = gen_survival_case(SurvivalCase::Easy, m, 2, 0.3, 0.7, &mut substream(8, "sv-mean", 0))
            .unwrap();
        let mean: f64 = s.times[..m].iter().sum::<f64>() / m as f64;
        let se = 0.8 / (m as f64).sqrt();
        assert!(
            (mean - oracle).abs() < 3.0 * se,
            "mean {mean} vs oracle {oracle}"
        );
    }

    #[test]
    fn two_class_simulation_layout() {
        let design = SimDesign {
            design: ClassDesign::default_sbm(),
            n: 20,
            m_class0: 9,
            m_class1: 3,
            seed: 42,
        };
        let s = simulate_two_class(&design).unwrap();
        assert_eq!(s.graphs.len(), 12);
        assert_eq!(s.labels.iter().filter(|&&y| y == -1.0).count(), 9);
        let again = simulate_two_class(&design).unwrap();
        assert_eq!(s.graphs, again.graphs);
    }

    #[test]
    fn corr_er_design_classes_share_parents() {
        let design = SimDesign {
            design: ClassDesign::default_corr_er(),
            n: 25,
            m_class0: 4,
            m_class1: 4,
            seed: 11,
        };
        let s = simulate_two_class(&design).unwrap();
        // Every class-0 sample is a subgraph of the class-0 parent.
        let parent0 = gen_er(25, 0.8, &mut substream(11, "sim-parent", 0)).unwrap();
        for g in &s.graphs[..4] {
            for i in 0..25 {
                for j in 0..25 {
                    if g.weights()[(i, j)] == 1.0 {
                        assert_eq!(parent0.weights()[(i, j)], 1.0);
                    }
                }
            }
        }
    }
}
