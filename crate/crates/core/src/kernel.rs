//! Covariance (Gram) matrices built from graph distances.
//!
//! The workhorse is the squared-exponential form `sigma^2 * exp(-ell * d)`,
//! where `d` is an already-squared distance and the length-scale multiplies
//! it directly (no halving, no re-squaring). The survival kernel is an
//! additive sum of such blocks over graph, scalar-covariate, and time
//! distances with a shared signal variance. A k-step random-walk kernel on
//! binary graphs is provided as a hyperparameter-free alternative.
//!
//! Kernels that are positive definite in exact arithmetic can still be
//! numerically singular, so factorization goes through an escalating jitter
//! ladder; the survival setting starts its ladder higher because rejected
//! points share covariates with observed ones and correlate rows strongly.

use nalgebra::{DMatrix, DVector};

use crate::distance::DistanceMatrix;
use crate::error::{Error, Result};
use crate::graph::Graph;

/// Signal variance and length-scale of a single-block squared-exponential
/// kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqExpHyper {
    pub signal_variance: f64,
    pub length_scale: f64,
}

impl SqExpHyper {
    pub fn new(signal_variance: f64, length_scale: f64) -> Result<Self> {
        if !(signal_variance > 0.0) || !(length_scale > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "signal variance and length scale must be positive, got {signal_variance}, {length_scale}"
            )));
        }
        Ok(Self {
            signal_variance,
            length_scale,
        })
    }
}

/// Hyperparameters of the additive survival kernel: shared signal variance
/// and one length-scale per distance block (graph, each scalar covariate,
/// time).
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalHyper {
    pub signal_variance: f64,
    pub ell_graph: f64,
    pub ell_covariates: Vec<f64>,
    pub ell_time: f64,
}

impl SurvivalHyper {
    pub fn validate(&self) -> Result<()> {
        let ok = self.signal_variance > 0.0
            && self.ell_graph > 0.0
            && self.ell_time > 0.0
            && self.ell_covariates.iter().all(|&l| l > 0.0);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(
                "survival kernel hyperparameters must all be positive".into(),
            ))
        }
    }

    /// Length-scales in block order: graph, covariates, time.
    pub fn scales(&self) -> Vec<f64> {
        let mut s = Vec::with_capacity(2 + self.ell_covariates.len());
        s.push(self.ell_graph);
        s.extend_from_slice(&self.ell_covariates);
        s.push(self.ell_time);
        s
    }
}

/// Jitter escalation ladders, as multiples of the mean kernel diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JitterLadder {
    /// `{0, 1e-8, 1e-6, 1e-4, 1e-2} * mean(diag K)`.
    Standard,
    /// Starts at `1e-6`; the survival Gram needs more.
    Survival,
}

impl JitterLadder {
    fn multipliers(self) -> &'static [f64] {
        match self {
            JitterLadder::Standard => &[0.0, 1e-8, 1e-6, 1e-4, 1e-2],
            JitterLadder::Survival => &[1e-6, 1e-4, 1e-2],
        }
    }
}

/// Cholesky-factorizes `K + jitter * I` with the smallest jitter from the
/// ladder that succeeds. Returns the lower factor and the jitter used.
pub fn stabilized_cholesky(k: &DMatrix<f64>, ladder: JitterLadder) -> Result<(DMatrix<f64>, f64)> {
    let n = k.nrows();
    if n != k.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "Cholesky needs a square matrix, got {n}x{}",
            k.ncols()
        )));
    }
    let mean_diag = k.diagonal().sum() / n as f64;
    let scale = if mean_diag > 0.0 { mean_diag } else { 1.0 };
    for &mult in ladder.multipliers() {
        let jitter = mult * scale;
        let mut kj = k.clone();
        for i in 0..n {
            kj[(i, i)] += jitter;
        }
        if let Some(chol) = nalgebra::Cholesky::new(kj) {
            return Ok((chol.unpack(), jitter));
        }
    }
    let max_abs = k.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    Err(Error::CholeskyFailure(format!(
        "n={n}, mean diag={mean_diag:e}, max |entry|={max_abs:e}"
    )))
}

/// A kernel matrix with its cached Cholesky factor.
///
/// `k` is the kernel exactly as built (no jitter); the factor satisfies
/// `C C^T = K + jitter * I`.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    k: DMatrix<f64>,
    chol_lower: DMatrix<f64>,
    jitter: f64,
}

impl GramMatrix {
    pub fn from_kernel(k: DMatrix<f64>, ladder: JitterLadder) -> Result<Self> {
        let (chol_lower, jitter) = stabilized_cholesky(&k, ladder)?;
        Ok(Self {
            k,
            chol_lower,
            jitter,
        })
    }

    pub fn dim(&self) -> usize {
        self.k.nrows()
    }

    /// The kernel matrix, without jitter.
    pub fn k(&self) -> &DMatrix<f64> {
        &self.k
    }

    /// Lower Cholesky factor of `K + jitter * I`.
    pub fn chol_lower(&self) -> &DMatrix<f64> {
        &self.chol_lower
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// Solves `(K + jitter I) x = b` via two triangular solves.
    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let y = self
            .chol_lower
            .solve_lower_triangular(b)
            .expect("Cholesky factor has positive diagonal");
        self.chol_lower
            .tr_solve_lower_triangular(&y)
            .expect("Cholesky factor has positive diagonal")
    }

    /// `C^{-1} b`, the whitening solve.
    pub fn lower_solve(&self, b: &DVector<f64>) -> DVector<f64> {
        self.chol_lower
            .solve_lower_triangular(b)
            .expect("Cholesky factor has positive diagonal")
    }

    /// Quadratic form `f^T (K + jitter I)^{-1} f`.
    pub fn quad_form(&self, f: &DVector<f64>) -> f64 {
        self.lower_solve(f).norm_squared()
    }
}

/// Unit-signal-variance additive squared-exponential base over one or more
/// distance blocks: `K0 = sum_p exp(-ell_p * B_p)`.
///
/// Classification uses a single block; the survival kernel stacks graph,
/// covariate, and time blocks. Keeping the blocks separate lets a sampler
/// re-exponentiate only the block whose length-scale is moving.
#[derive(Debug, Clone)]
pub struct SqExpBlocks {
    blocks: Vec<DMatrix<f64>>,
}

impl SqExpBlocks {
    pub fn new(blocks: Vec<DMatrix<f64>>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidConfig("at least one distance block".into()));
        }
        let dim = blocks[0].nrows();
        for (p, b) in blocks.iter().enumerate() {
            if b.nrows() != dim || b.ncols() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "block {p} is {}x{}, expected {dim}x{dim}",
                    b.nrows(),
                    b.ncols()
                )));
            }
            for i in 0..dim {
                for j in 0..dim {
                    let v = b[(i, j)];
                    if !v.is_finite() || v < 0.0 {
                        return Err(Error::InvalidConfig(format!(
                            "block {p} entry ({i},{j}) = {v} must be a finite non-negative distance"
                        )));
                    }
                }
            }
        }
        Ok(Self { blocks })
    }

    pub fn single(d: &DistanceMatrix) -> Self {
        Self {
            blocks: vec![d.entries().clone()],
        }
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn dim(&self) -> usize {
        self.blocks[0].nrows()
    }

    pub fn blocks(&self) -> &[DMatrix<f64>] {
        &self.blocks
    }

    /// `exp(-scale * B_p)` for one block.
    pub fn block_exp(&self, p: usize, scale: f64) -> DMatrix<f64> {
        self.blocks[p].map(|d| (-scale * d).exp())
    }

    /// Sum of all block exponentials except `skip` (zero matrix when there
    /// is only one block).
    pub fn partial_sum(&self, scales: &[f64], skip: usize) -> DMatrix<f64> {
        let mut acc = DMatrix::zeros(self.dim(), self.dim());
        for p in 0..self.n_blocks() {
            if p != skip {
                acc += self.block_exp(p, scales[p]);
            }
        }
        acc
    }

    /// Full unit-variance base `sum_p exp(-ell_p B_p)`.
    pub fn gram_unit(&self, scales: &[f64]) -> DMatrix<f64> {
        assert_eq!(scales.len(), self.n_blocks());
        let mut acc = self.block_exp(0, scales[0]);
        for p in 1..self.n_blocks() {
            acc += self.block_exp(p, scales[p]);
        }
        acc
    }

    /// Cross-covariance of one new point against the base set, given one
    /// distance row per block.
    pub fn cross_unit(&self, rows: &[Vec<f64>], scales: &[f64]) -> Result<DVector<f64>> {
        if rows.len() != self.n_blocks() {
            return Err(Error::DimensionMismatch(format!(
                "{} distance rows for {} blocks",
                rows.len(),
                self.n_blocks()
            )));
        }
        let m = rows[0].len();
        for r in rows {
            if r.len() != m {
                return Err(Error::DimensionMismatch(
                    "cross-covariance rows have unequal lengths".into(),
                ));
            }
        }
        let mut v = DVector::zeros(m);
        for (p, row) in rows.iter().enumerate() {
            for (i, &d) in row.iter().enumerate() {
                v[i] += (-scales[p] * d).exp();
            }
        }
        Ok(v)
    }
}

/// Squared-exponential Gram over a graph distance matrix:
/// `K[i][j] = sigma^2 * exp(-ell * D[i][j])`.
pub fn sqexp_gram(d: &DistanceMatrix, h: &SqExpHyper) -> Result<GramMatrix> {
    SqExpHyper::new(h.signal_variance, h.length_scale)?;
    let k = d
        .entries()
        .map(|v| h.signal_variance * (-h.length_scale * v).exp());
    GramMatrix::from_kernel(k, JitterLadder::Standard)
}

/// Additive survival Gram over graph, scalar-covariate, and time blocks,
/// with shared signal variance.
pub fn survival_gram(
    d_graph: &DMatrix<f64>,
    d_time: &DMatrix<f64>,
    d_covariates: &[DMatrix<f64>],
    h: &SurvivalHyper,
) -> Result<GramMatrix> {
    h.validate()?;
    if d_covariates.len() != h.ell_covariates.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} covariate blocks but {} covariate length-scales",
            d_covariates.len(),
            h.ell_covariates.len()
        )));
    }
    let mut blocks = Vec::with_capacity(2 + d_covariates.len());
    blocks.push(d_graph.clone());
    blocks.extend(d_covariates.iter().cloned());
    blocks.push(d_time.clone());
    let base = SqExpBlocks::new(blocks)?;
    let k = base.gram_unit(&h.scales()) * h.signal_variance;
    GramMatrix::from_kernel(k, JitterLadder::Survival)
}

/// Cross-covariance vector of a test point against `m` training points for
/// the single-block squared-exponential kernel.
pub fn cross_covariance(d_new: &[f64], h: &SqExpHyper) -> DVector<f64> {
    DVector::from_iterator(
        d_new.len(),
        d_new
            .iter()
            .map(|&d| h.signal_variance * (-h.length_scale * d).exp()),
    )
}

/// Cross-covariance for the additive survival kernel; `rows` holds one
/// distance row per block in the order graph, covariates, time.
pub fn survival_cross_covariance(rows: &[Vec<f64>], h: &SurvivalHyper) -> Result<DVector<f64>> {
    h.validate()?;
    let scales = h.scales();
    if rows.len() != scales.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} distance rows for {} blocks",
            rows.len(),
            scales.len()
        )));
    }
    let m = rows[0].len();
    let mut v = DVector::zeros(m);
    for (row, &s) in rows.iter().zip(scales.iter()) {
        if row.len() != m {
            return Err(Error::DimensionMismatch(
                "cross-covariance rows have unequal lengths".into(),
            ));
        }
        for (i, &d) in row.iter().enumerate() {
            v[i] += (-s * d).exp();
        }
    }
    Ok(v * h.signal_variance)
}

/// Parameters of the k-step random-walk kernel. These are fixed constants,
/// never sampled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomWalkParams {
    /// Walk length `k`.
    pub steps: usize,
    /// Geometric decay per step.
    pub decay: f64,
    /// Divide entries by `n^2` so magnitudes are comparable across datasets.
    pub normalize: bool,
}

impl Default for RandomWalkParams {
    fn default() -> Self {
        Self {
            steps: 3,
            decay: 0.01,
            normalize: true,
        }
    }
}

/// Uniform start/stop weight over the direct-product graph of one pair:
/// `1^T (sum_{s=0}^{k} decay^s A_x^s) 1` with `A_x = A_i (x) A_j`, computed
/// without materializing the n^2 x n^2 product adjacency via
/// `(A (x) B) vec(X) = vec(B X A)` for symmetric A, B.
fn rw_pair_value(a: &DMatrix<f64>, b: &DMatrix<f64>, steps: usize, decay: f64) -> f64 {
    let n = a.nrows();
    let mut x = DMatrix::from_element(n, n, 1.0);
    let mut total = x.sum();
    let mut coef = 1.0;
    for _ in 1..=steps {
        x = b * &x * a;
        coef *= decay;
        total += coef * x.sum();
    }
    total
}

/// k-step random-walk Gram over binary graphs.
pub fn random_walk_gram(graphs: &[Graph], params: RandomWalkParams) -> Result<GramMatrix> {
    if graphs.len() < 2 {
        return Err(Error::InvalidConfig(
            "random-walk Gram needs at least 2 graphs".into(),
        ));
    }
    if !(params.decay > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "random-walk decay must be positive, got {}",
            params.decay
        )));
    }
    let n = graphs[0].order();
    for (i, g) in graphs.iter().enumerate() {
        if g.order() != n {
            return Err(Error::DimensionMismatch(format!(
                "graph {i} has order {}, expected {n}",
                g.order()
            )));
        }
        if !g.is_binary() {
            return Err(Error::InvalidConfig(format!(
                "graph {i} is not binary; apply threshold_binarize before the random-walk kernel"
            )));
        }
    }
    let m = graphs.len();
    let mut k = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let v = rw_pair_value(graphs[i].weights(), graphs[j].weights(), params.steps, params.decay);
            if !v.is_finite() {
                return Err(Error::NonFinite(format!(
                    "random-walk kernel entry ({i},{j}); reduce decay or steps"
                )));
            }
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    if params.normalize {
        k /= (n * n) as f64;
    }
    GramMatrix::from_kernel(k, JitterLadder::Standard)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distance::{distance_matrix, DistanceKind};
    use rand::Rng;

    fn dist2(d01: f64) -> DistanceMatrix {
        let mut m = DMatrix::zeros(2, 2);
        m[(0, 1)] = d01;
        m[(1, 0)] = d01;
        DistanceMatrix::from_parts(DistanceKind::Frobenius, m).unwrap()
    }

    #[test]
    fn sqexp_gram_values() {
        let h = SqExpHyper::new(2.0, 1.0).unwrap();
        let g = sqexp_gram(&dist2(0.0), &h).unwrap();
        assert_eq!(g.k()[(0, 1)], 2.0);
        assert_eq!(g.k()[(0, 0)], 2.0);

        let h1 = SqExpHyper::new(1.0, 1.0).unwrap();
        let g = sqexp_gram(&dist2(2.0f64.ln()), &h1).unwrap();
        assert!((g.k()[(0, 1)] - 0.5).abs() < 1e-15);

        let hbig = SqExpHyper::new(1.0, 1e6).unwrap();
        let g = sqexp_gram(&dist2(1.0), &hbig).unwrap();
        assert!(g.k()[(0, 1)] < 1e-300);
    }

    fn random_graphs(count: usize, n: usize, rng: &mut impl Rng) -> Vec<Graph> {
        (0..count)
            .map(|_| {
                let mut w = DMatrix::zeros(n, n);
                for i in 0..n {
                    for j in (i + 1)..n {
                        let v: f64 = rng.gen_range(0.0..1.0);
                        w[(i, j)] = v;
                        w[(j, i)] = v;
                    }
                }
                Graph::new(w).unwrap()
            })
            .collect()
    }

    #[test]
    fn sqexp_diagonal_is_signal_variance() {
        let mut rng = crate::rng::substream(2, "kern", 0);
        let graphs = random_graphs(5, 6, &mut rng);
        let dm = distance_matrix(&graphs, DistanceKind::Frobenius).unwrap();
        let h = SqExpHyper::new(1.7, 0.4).unwrap();
        let g = sqexp_gram(&dm, &h).unwrap();
        for i in 0..5 {
            assert_eq!(g.k()[(i, i)], 1.7);
        }
    }

    #[test]
    fn survival_gram_examples() {
        let z = DMatrix::zeros(2, 2);
        let h = SurvivalHyper {
            signal_variance: 1.5,
            ell_graph: 1.0,
            ell_covariates: vec![],
            ell_time: 1.0,
        };
        let g = survival_gram(&z, &z, &[], &h).unwrap();
        assert!((g.k()[(0, 1)] - 3.0).abs() < 1e-15); // 2 sigma^2

        let h1 = SurvivalHyper {
            ell_covariates: vec![2.0],
            ..h.clone()
        };
        let g = survival_gram(&z, &z, &[z.clone()], &h1).unwrap();
        assert!((g.k()[(0, 1)] - 4.5).abs() < 1e-15); // 3 sigma^2

        let mut dg = DMatrix::zeros(2, 2);
        dg[(0, 1)] = 2.0f64.ln();
        dg[(1, 0)] = 2.0f64.ln();
        let mut dt = DMatrix::zeros(2, 2);
        dt[(0, 1)] = 4.0f64.ln();
        dt[(1, 0)] = 4.0f64.ln();
        let hu = SurvivalHyper {
            signal_variance: 1.0,
            ell_graph: 1.0,
            ell_covariates: vec![],
            ell_time: 1.0,
        };
        let g = survival_gram(&dg, &dt, &[], &hu).unwrap();
        assert!((g.k()[(0, 1)] - 0.75).abs() < 1e-15);
    }

    #[test]
    fn survival_gram_rejects_block_mismatch() {
        let z2 = DMatrix::zeros(2, 2);
        let z3 = DMatrix::zeros(3, 3);
        let h = SurvivalHyper {
            signal_variance: 1.0,
            ell_graph: 1.0,
            ell_covariates: vec![],
            ell_time: 1.0,
        };
        assert!(survival_gram(&z2, &z3, &[], &h).is_err());
    }

    #[test]
    fn stabilized_cholesky_identity_no_jitter() {
        let (l, jitter) = stabilized_cholesky(&DMatrix::identity(4, 4), JitterLadder::Standard).unwrap();
        assert_eq!(jitter, 0.0);
        assert_eq!(l, DMatrix::identity(4, 4));
    }

    #[test]
    fn stabilized_cholesky_rank_deficient_reconstructs() {
        let ones = DMatrix::from_element(3, 3, 1.0);
        let (l, jitter) = stabilized_cholesky(&ones, JitterLadder::Standard).unwrap();
        assert!(jitter > 0.0);
        let rebuilt = &l * l.transpose();
        for i in 0..3 {
            for j in 0..3 {
                let expect = ones[(i, j)] + if i == j { jitter } else { 0.0 };
                assert!((rebuilt[(i, j)] - expect).abs() < 1e-8 * (1.0 + expect.abs()));
            }
        }
    }

    #[test]
    fn stabilized_cholesky_small_jitter_on_sqexp_grams() {
        let mut rng = crate::rng::substream(4, "kern-jit", 0);
        let mut small = 0;
        let trials = 100;
        for _ in 0..trials {
            let m = rng.gen_range(3..12);
            let graphs = random_graphs(m, 8, &mut rng);
            let dm = distance_matrix(&graphs, DistanceKind::Frobenius).unwrap();
            let h = SqExpHyper::new(rng.gen_range(0.1..3.0), rng.gen_range(0.1..3.0)).unwrap();
            let g = sqexp_gram(&dm, &h).unwrap();
            if g.jitter() <= 1e-6 * h.signal_variance {
                small += 1;
            }
        }
        assert!(small * 100 >= trials * 95, "{small}/{trials}");
    }

    #[test]
    fn survival_ladder_starts_above_zero() {
        let (_, jitter) = stabilized_cholesky(&DMatrix::identity(3, 3), JitterLadder::Survival).unwrap();
        assert!((jitter - 1e-6).abs() < 1e-18);
    }

    #[test]
    fn cross_covariance_matches_gram_row_on_augmented_set() {
        let mut rng = crate::rng::substream(6, "kern-cross", 0);
        let graphs: Vec<Graph> = (0..6)
            .map(|_| {
                let mut w = DMatrix::zeros(5, 5);
                for i in 0..5 {
                    for j in (i + 1)..5 {
                        let v: f64 = rng.gen_range(0.0..1.0);
                        w[(i, j)] = v;
                        w[(j, i)] = v;
                    }
                }
                Graph::new(w).unwrap()
            })
            .collect();
        let dm = distance_matrix(&graphs, DistanceKind::Frobenius).unwrap();
        let h = SqExpHyper::new(1.3, 0.7).unwrap();
        let g = sqexp_gram(&dm, &h).unwrap();
        // Last graph treated as the test point against the first 5.
        let d_new: Vec<f64> = (0..5).map(|j| dm.entries()[(5, j)]).collect();
        let cross = cross_covariance(&d_new, &h);
        for j in 0..5 {
            assert_eq!(cross[j], g.k()[(5, j)]);
        }
        // Test point equal to a training point: signal variance at its slot.
        let d_self: Vec<f64> = (0..5).map(|j| dm.entries()[(2, j)]).collect();
        let cross = cross_covariance(&d_self, &h);
        assert_eq!(cross[2], 1.3);
    }

    fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
        let n = a.nrows();
        let mut out = DMatrix::zeros(n * n, n * n);
        for i in 0..n {
            for j in 0..n {
                for p in 0..n {
                    for q in 0..n {
                        out[(i * n + p, j * n + q)] = a[(i, j)] * b[(p, q)];
                    }
                }
            }
        }
        out
    }

    /// Independent oracle: explicit product-graph adjacency and matrix powers.
    fn rw_oracle(a: &DMatrix<f64>, b: &DMatrix<f64>, steps: usize, decay: f64) -> f64 {
        let ax = kron(a, b);
        let dim = ax.nrows();
        let mut acc = DMatrix::<f64>::identity(dim, dim);
        let mut power = DMatrix::<f64>::identity(dim, dim);
        let mut coef = 1.0;
        for _ in 1..=steps {
            power = &power * &ax;
            coef *= decay;
            acc += &power * coef;
        }
        acc.sum()
    }

    #[test]
    fn random_walk_matches_explicit_kronecker_oracle() {
        let mut rng = crate::rng::substream(8, "kern-rw", 0);
        for _ in 0..10 {
            let n = rng.gen_range(2..5);
            let gen = |rng: &mut rand_chacha::ChaCha8Rng| {
                let mut w = DMatrix::zeros(n, n);
                for i in 0..n {
                    for j in (i + 1)..n {
                        if rng.gen_bool(0.5) {
                            w[(i, j)] = 1.0;
                            w[(j, i)] = 1.0;
                        }
                    }
                }
                Graph::new(w).unwrap()
            };
            let g1 = gen(&mut rng);
            let g2 = gen(&mut rng);
            let k = rng.gen_range(0..4);
            let got = rw_pair_value(g1.weights(), g2.weights(), k, 0.1);
            let want = rw_oracle(g1.weights(), g2.weights(), k, 0.1);
            assert!(
                (got - want).abs() < 1e-9 * (1.0 + want.abs()),
                "{got} vs {want}"
            );
        }
    }

    #[test]
    fn random_walk_examples() {
        let empty = Graph::empty(3).unwrap();
        let params = RandomWalkParams {
            steps: 2,
            decay: 0.1,
            normalize: false,
        };
        let g = random_walk_gram(&[empty.clone(), empty.clone()], params).unwrap();
        assert_eq!(g.k()[(0, 1)], 9.0); // n^2, only the s=0 term

        let k0 = RandomWalkParams {
            steps: 0,
            decay: 0.1,
            normalize: false,
        };
        let g = random_walk_gram(&[empty.clone(), empty], k0).unwrap();
        assert!(g.k().iter().all(|&v| v == 9.0));

        let e1 = Graph::from_edges(2, &[(0, 1, 1.0)]).unwrap();
        let k1 = RandomWalkParams {
            steps: 1,
            decay: 0.1,
            normalize: false,
        };
        let g = random_walk_gram(&[e1.clone(), e1], k1).unwrap();
        assert!((g.k()[(0, 1)] - 4.4).abs() < 1e-12);
    }

    #[test]
    fn random_walk_rejects_weighted_graphs() {
        let w = Graph::from_edges(2, &[(0, 1, 0.5)]).unwrap();
        let err = random_walk_gram(&[w.clone(), w], RandomWalkParams::default());
        assert!(matches!(err, Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn random_walk_gram_is_psd_for_random_binary_graphs() {
        let mut rng = crate::rng::substream(10, "kern-rw-psd", 0);
        for _ in 0..5 {
            let n = rng.gen_range(3..8);
            let graphs: Vec<Graph> = (0..6)
                .map(|_| {
                    let mut w = DMatrix::zeros(n, n);
                    for i in 0..n {
                        for j in (i + 1)..n {
                            if rng.gen_bool(0.4) {
                                w[(i, j)] = 1.0;
                                w[(j, i)] = 1.0;
                            }
                        }
                    }
                    Graph::new(w).unwrap()
                })
                .collect();
            let params = RandomWalkParams {
                steps: 4,
                decay: 0.05,
                normalize: true,
            };
            let g = random_walk_gram(&graphs, params).unwrap();
            let spec = crate::graph::spectrum(g.k()).unwrap();
            let scale = g.k().diagonal().max();
            assert!(
                spec.min() >= -1e-8 * scale * graphs.len() as f64,
                "min eig {}",
                spec.min()
            );
        }
    }

    #[test]
    fn sqexp_grams_are_psd_for_random_weighted_graphs() {
        // Scaled-down version of the Theorem 1 gate; the acceptance suite
        // runs the full 200-graph version.
        let mut rng = crate::rng::substream(12, "kern-psd", 0);
        let graphs: Vec<Graph> = (0..30)
            .map(|_| {
                let mut w = DMatrix::zeros(10, 10);
                for i in 0..10 {
                    for j in (i + 1)..10 {
                        let v: f64 = rng.gen_range(-1.0..1.0);
                        w[(i, j)] = v;
                        w[(j, i)] = v;
                    }
                }
                Graph::new(w).unwrap()
            })
            .collect();
        for kind in [DistanceKind::Frobenius, DistanceKind::SpectralSigned] {
            let dm = distance_matrix(&graphs, kind).unwrap();
            for _ in 0..5 {
                let h = SqExpHyper::new(rng.gen_range(0.1..5.0), rng.gen_range(0.05..5.0)).unwrap();
                let g = sqexp_gram(&dm, &h).unwrap();
                let spec = crate::graph::spectrum(g.k()).unwrap();
                assert!(
                    spec.min() >= -1e-8 * h.signal_variance * graphs.len() as f64,
                    "{kind:?}: min eig {}",
                    spec.min()
                );
            }
        }
    }
}
