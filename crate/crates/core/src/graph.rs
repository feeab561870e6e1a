//! The network covariate object and its matrix representations.
//!
//! A [`Graph`] is an undirected, simple, weighted network of fixed order:
//! a symmetric weight matrix with zero diagonal. Weights may be negative
//! (e.g. correlations), which is why three Laplacian variants exist:
//! the ordinary and normalized Laplacians require non-negative weights,
//! while the signed Laplacian accepts any sign by putting absolute
//! strengths on the diagonal.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Undirected simple weighted network on `n` nodes.
///
/// Invariants, enforced at construction: the weight matrix is square of
/// order `n >= 2`, exactly symmetric, and has an exactly zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    weights: DMatrix<f64>,
}

impl Graph {
    /// Builds a graph from a weight matrix, validating all invariants.
    pub fn new(weights: DMatrix<f64>) -> Result<Self> {
        let (r, c) = weights.shape();
        if r != c {
            return Err(Error::InvalidGraph(format!(
                "weight matrix must be square, got {r}x{c}"
            )));
        }
        if r < 2 {
            return Err(Error::InvalidGraph(format!("order must be >= 2, got {r}")));
        }
        for i in 0..r {
            if weights[(i, i)] != 0.0 {
                return Err(Error::InvalidGraph(format!(
                    "nonzero diagonal at ({i},{i}): {}",
                    weights[(i, i)]
                )));
            }
            for j in (i + 1)..r {
                let (a, b) = (weights[(i, j)], weights[(j, i)]);
                if !a.is_finite() || !b.is_finite() {
                    return Err(Error::InvalidGraph(format!(
                        "non-finite weight at ({i},{j})"
                    )));
                }
                if a != b {
                    return Err(Error::InvalidGraph(format!(
                        "asymmetric weights at ({i},{j}): {a} vs {b}"
                    )));
                }
            }
        }
        Ok(Self { n: r, weights })
    }

    /// Graph with no edges.
    pub fn empty(n: usize) -> Result<Self> {
        Self::new(DMatrix::zeros(n, n))
    }

    /// Builds a graph from undirected edges `(i, j, weight)`.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut w = DMatrix::zeros(n, n);
        for &(i, j, wt) in edges {
            if i >= n || j >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({i},{j}) out of range for order {n}"
                )));
            }
            if i == j {
                return Err(Error::InvalidGraph(format!("self loop at node {i}")));
            }
            w[(i, j)] = wt;
            w[(j, i)] = wt;
        }
        Self::new(w)
    }

    /// Node count.
    pub fn order(&self) -> usize {
        self.n
    }

    /// The symmetric weight matrix.
    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn has_negative_weights(&self) -> bool {
        self.weights.iter().any(|&w| w < 0.0)
    }

    /// True when every weight is 0 or 1.
    pub fn is_binary(&self) -> bool {
        self.weights.iter().all(|&w| w == 0.0 || w == 1.0)
    }

    /// Node strengths, i.e. row sums of the weight matrix.
    pub fn strengths(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.weights.row(i).sum()).collect()
    }

    /// Number of undirected edges (nonzero weights above the diagonal).
    pub fn edge_count(&self) -> usize {
        let mut c = 0;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if self.weights[(i, j)] != 0.0 {
                    c += 1;
                }
            }
        }
        c
    }
}

/// Sorted (ascending) real eigenvalues of a symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    values: Vec<f64>,
}

impl Spectrum {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }
}

/// Which Laplacian a spectral computation is based on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LaplacianKind {
    Unnormalized,
    Normalized,
    Signed,
}

fn require_nonnegative(g: &Graph, op: &str) -> Result<()> {
    if g.has_negative_weights() {
        Err(Error::NegativeWeights(op.to_string()))
    } else {
        Ok(())
    }
}

/// Combinatorial Laplacian `L = D - W` with `D` the diagonal strength matrix.
///
/// Rejects graphs with negative weights; those need [`signed_laplacian`].
pub fn laplacian(g: &Graph) -> Result<DMatrix<f64>> {
    require_nonnegative(g, "laplacian")?;
    let n = g.order();
    let mut l = -g.weights().clone();
    for (i, s) in g.strengths().into_iter().enumerate() {
        l[(i, i)] = s;
    }
    debug_assert_eq!(l.nrows(), n);
    Ok(l)
}

/// Normalized Laplacian `I - D^{-1/2} W D^{-1/2}`.
///
/// Isolated nodes (zero strength) get a zero row and column, including the
/// diagonal entry, which keeps the matrix finite and positive semi-definite.
pub fn normalized_laplacian(g: &Graph) -> Result<DMatrix<f64>> {
    require_nonnegative(g, "normalized_laplacian")?;
    let n = g.order();
    let strengths = g.strengths();
    let inv_sqrt: Vec<f64> = strengths
        .iter()
        .map(|&s| if s > 0.0 { 1.0 / s.sqrt() } else { 0.0 })
        .collect();
    let mut l = DMatrix::zeros(n, n);
    for i in 0..n {
        if strengths[i] > 0.0 {
            l[(i, i)] = 1.0;
        }
        for j in 0..n {
            if i != j {
                l[(i, j)] = -g.weights()[(i, j)] * inv_sqrt[i] * inv_sqrt[j];
            }
        }
    }
    Ok(l)
}

/// Signed Laplacian: off-diagonal `-W[i][j]`, diagonal `sum_k |W[i][k]|`.
///
/// Well-defined for any weight signs; coincides with [`laplacian`] when all
/// weights are non-negative.
pub fn signed_laplacian(g: &Graph) -> DMatrix<f64> {
    let n = g.order();
    let mut l = -g.weights().clone();
    for i in 0..n {
        l[(i, i)] = g.weights().row(i).iter().map(|w| w.abs()).sum();
    }
    debug_assert_eq!(l.nrows(), n);
    l
}

/// The Laplacian variant selected by `kind`.
pub fn laplacian_of_kind(g: &Graph, kind: LaplacianKind) -> Result<DMatrix<f64>> {
    match kind {
        LaplacianKind::Unnormalized => laplacian(g),
        LaplacianKind::Normalized => normalized_laplacian(g),
        LaplacianKind::Signed => Ok(signed_laplacian(g)),
    }
}

/// All eigenvalues of a symmetric matrix, sorted ascending.
pub fn spectrum(m: &DMatrix<f64>) -> Result<Spectrum> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "spectrum needs a square matrix, got {}x{}",
            n,
            m.ncols()
        )));
    }
    let eigen = m
        .clone()
        .try_symmetric_eigen(f64::EPSILON, 200 * n.max(8))
        .ok_or_else(|| {
            let max_abs = m.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
            Error::EigenFailure(format!("n={n}, max |entry| = {max_abs:e}"))
        })?;
    let mut values: Vec<f64> = eigen.eigenvalues.iter().copied().collect();
    values.sort_by(|a, b| a.partial_cmp(b).expect("eigenvalues are finite"));
    Ok(Spectrum { values })
}

/// Binary graph with an edge wherever `|weight| > cutoff`.
pub fn threshold_binarize(g: &Graph, cutoff: f64) -> Graph {
    let n = g.order();
    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i != j && g.weights()[(i, j)].abs() > cutoff {
                w[(i, j)] = 1.0;
            }
        }
    }
    Graph { n, weights: w }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn path3() -> Graph {
        Graph::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap()
    }

    #[test]
    fn rejects_asymmetry_self_loops_and_small_order() {
        let mut w = DMatrix::zeros(3, 3);
        w[(0, 1)] = 1.0;
        assert!(Graph::new(w).is_err());

        let mut w = DMatrix::zeros(3, 3);
        w[(1, 1)] = 0.5;
        assert!(Graph::new(w).is_err());

        assert!(Graph::new(DMatrix::zeros(1, 1)).is_err());
    }

    #[test]
    fn laplacian_of_empty_graph_is_zero() {
        let g = Graph::empty(3).unwrap();
        assert_eq!(laplacian(&g).unwrap(), DMatrix::zeros(3, 3));
    }

    #[test]
    fn laplacian_of_k2() {
        let g = Graph::from_edges(2, &[(0, 1, 1.0)]).unwrap();
        let l = laplacian(&g).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        assert_eq!(l, expected);
    }

    #[test]
    fn laplacian_of_path_graph() {
        let l = laplacian(&path3()).unwrap();
        assert_eq!(l[(1, 1)], 2.0);
        for i in 0..3 {
            assert!(l.row(i).sum().abs() < 1e-12);
        }
        assert_eq!(l, l.transpose());
    }

    #[test]
    fn laplacian_rejects_negative_weights() {
        let g = Graph::from_edges(2, &[(0, 1, -1.0)]).unwrap();
        assert!(matches!(laplacian(&g), Err(Error::NegativeWeights(_))));
        assert!(matches!(
            normalized_laplacian(&g),
            Err(Error::NegativeWeights(_))
        ));
    }

    #[test]
    fn normalized_laplacian_of_k2_equals_unnormalized() {
        let g = Graph::from_edges(2, &[(0, 1, 1.0)]).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        assert_eq!(normalized_laplacian(&g).unwrap(), expected);
    }

    #[test]
    fn normalized_laplacian_of_empty_graph_is_zero() {
        let g = Graph::empty(4).unwrap();
        assert_eq!(normalized_laplacian(&g).unwrap(), DMatrix::zeros(4, 4));
    }

    #[test]
    fn normalized_laplacian_star_spectrum() {
        // Star K_{1,2}: eigenvalues of the normalized Laplacian are {0, 1, 2}.
        let g = Graph::from_edges(3, &[(0, 1, 1.0), (0, 2, 1.0)]).unwrap();
        let s = spectrum(&normalized_laplacian(&g).unwrap()).unwrap();
        let expect = [0.0, 1.0, 2.0];
        for (got, want) in s.values().iter().zip(expect) {
            assert!((got - want).abs() < 1e-10, "{got} vs {want}");
        }
    }

    #[test]
    fn signed_laplacian_matches_laplacian_for_nonnegative() {
        let g = path3();
        assert_eq!(signed_laplacian(&g), laplacian(&g).unwrap());
    }

    #[test]
    fn signed_laplacian_single_negative_edge() {
        let g = Graph::from_edges(2, &[(0, 1, -1.0)]).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert_eq!(signed_laplacian(&g), expected);
    }

    #[test]
    fn signed_laplacian_of_empty_graph_is_zero() {
        let g = Graph::empty(3).unwrap();
        assert_eq!(signed_laplacian(&g), DMatrix::zeros(3, 3));
    }

    #[test]
    fn spectrum_of_identity_and_zero() {
        let s = spectrum(&DMatrix::identity(3, 3)).unwrap();
        assert_eq!(s.values(), &[1.0, 1.0, 1.0]);
        let z = spectrum(&DMatrix::zeros(4, 4)).unwrap();
        assert_eq!(z.values(), &[0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn spectrum_of_k2_laplacian() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        let s = spectrum(&m).unwrap();
        assert!((s.values()[0] - 0.0).abs() < 1e-12);
        assert!((s.values()[1] - 2.0).abs() < 1e-12);
    }

    fn random_graph(n: usize, rng: &mut impl Rng, signed: bool) -> Graph {
        let mut w = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in (i + 1)..n {
                let v: f64 = if signed {
                    rng.gen_range(-1.0..1.0)
                } else {
                    rng.gen_range(0.0..1.0)
                };
                w[(i, j)] = v;
                w[(j, i)] = v;
            }
        }
        Graph::new(w).unwrap()
    }

    #[test]
    fn laplacian_is_psd_for_random_nonnegative_graphs() {
        let mut rng = crate::rng::substream(11, "graph-psd", 0);
        for _ in 0..25 {
            let g = random_graph(12, &mut rng, false);
            let s = spectrum(&laplacian(&g).unwrap()).unwrap();
            assert!(s.min() >= -1e-8 * g.order() as f64, "min eig {}", s.min());
            // Row sums are zero, so 0 is always an eigenvalue.
            assert!(s.min().abs() < 1e-8);
        }
    }

    #[test]
    fn spectrum_is_permutation_invariant() {
        let mut rng = crate::rng::substream(13, "graph-perm", 0);
        for _ in 0..10 {
            let g = random_graph(9, &mut rng, true);
            let m = signed_laplacian(&g);
            let n = g.order();
            // Random permutation applied to rows and columns.
            let mut perm: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                perm.swap(i, rng.gen_range(0..=i));
            }
            let mut pm = DMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    pm[(i, j)] = m[(perm[i], perm[j])];
                }
            }
            let s1 = spectrum(&m).unwrap();
            let s2 = spectrum(&pm).unwrap();
            for (a, b) in s1.values().iter().zip(s2.values()) {
                assert!((a - b).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn threshold_binarize_examples() {
        let g = Graph::from_edges(3, &[(0, 1, 0.3), (1, 2, -0.5)]).unwrap();
        let all = threshold_binarize(&g, 0.1);
        assert_eq!(all.edge_count(), 2);
        assert!(all.is_binary());
        let none = threshold_binarize(&g, 0.9);
        assert_eq!(none.edge_count(), 0);
        let some = threshold_binarize(&g, 0.45);
        assert_eq!(some.edge_count(), 1);
        assert_eq!(some.weights()[(1, 2)], 1.0);
        assert_eq!(some.weights()[(0, 1)], 0.0);
    }
}
