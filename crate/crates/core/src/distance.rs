//! Pairwise graph distances and the cached distance matrix.
//!
//! Two families are provided: the Frobenius distance (normalized sum of
//! squared entry-wise weight differences, a local measure) and spectral
//! distances (sum of squared differences of sorted Laplacian eigenvalues,
//! a global, permutation-invariant measure). Both are squared norms of
//! embeddings, which is what makes the squared-exponential kernel built
//! on them positive definite.
//!
//! Distances are the expensive input to every model, so [`distance_matrix`]
//! computes all unordered pairs once (in parallel, with per-graph spectra
//! cached) and the result can be serialized to CSV and reused across runs.

use std::io::{BufRead, Write};

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{laplacian_of_kind, spectrum, Graph, LaplacianKind, Spectrum};

/// Which distance populates a [`DistanceMatrix`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceKind {
    Frobenius,
    SpectralLaplacian,
    SpectralNormalized,
    SpectralSigned,
}

impl DistanceKind {
    pub fn laplacian_kind(self) -> Option<LaplacianKind> {
        match self {
            DistanceKind::Frobenius => None,
            DistanceKind::SpectralLaplacian => Some(LaplacianKind::Unnormalized),
            DistanceKind::SpectralNormalized => Some(LaplacianKind::Normalized),
            DistanceKind::SpectralSigned => Some(LaplacianKind::Signed),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DistanceKind::Frobenius => "frobenius",
            DistanceKind::SpectralLaplacian => "spectral-laplacian",
            DistanceKind::SpectralNormalized => "spectral-normalized",
            DistanceKind::SpectralSigned => "spectral-signed",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "frobenius" => Ok(DistanceKind::Frobenius),
            "spectral-laplacian" => Ok(DistanceKind::SpectralLaplacian),
            "spectral-normalized" => Ok(DistanceKind::SpectralNormalized),
            "spectral-signed" => Ok(DistanceKind::SpectralSigned),
            other => Err(Error::Parse(format!("unknown distance kind `{other}`"))),
        }
    }
}

impl std::fmt::Display for DistanceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

fn check_orders(g1: &Graph, g2: &Graph) -> Result<()> {
    if g1.order() != g2.order() {
        return Err(Error::DimensionMismatch(format!(
            "graph orders differ: {} vs {}",
            g1.order(),
            g2.order()
        )));
    }
    Ok(())
}

/// Frobenius distance: `(1/(n(n-1))) * sum_{i,j} (W1[i][j] - W2[i][j])^2`,
/// summed over all ordered pairs (the zero diagonal contributes nothing).
pub fn frobenius_distance(g1: &Graph, g2: &Graph) -> Result<f64> {
    check_orders(g1, g2)?;
    let n = g1.order() as f64;
    let mut sum = 0.0;
    for (a, b) in g1.weights().iter().zip(g2.weights().iter()) {
        let d = a - b;
        sum += d * d;
    }
    Ok(sum / (n * (n - 1.0)))
}

/// Spectral distance between two precomputed sorted spectra.
pub fn spectral_distance_from_spectra(s1: &Spectrum, s2: &Spectrum) -> Result<f64> {
    if s1.len() != s2.len() {
        return Err(Error::DimensionMismatch(format!(
            "spectra lengths differ: {} vs {}",
            s1.len(),
            s2.len()
        )));
    }
    let mut sum = 0.0;
    for (a, b) in s1.values().iter().zip(s2.values()) {
        let d = a - b;
        sum += d * d;
    }
    Ok(sum)
}

/// Spectral distance: `sum_i |lambda_i^(1) - lambda_i^(2)|^2` over the sorted
/// eigenvalues of the chosen Laplacian variant.
pub fn spectral_distance(g1: &Graph, g2: &Graph, variant: LaplacianKind) -> Result<f64> {
    check_orders(g1, g2)?;
    let s1 = spectrum(&laplacian_of_kind(g1, variant)?)?;
    let s2 = spectrum(&laplacian_of_kind(g2, variant)?)?;
    spectral_distance_from_spectra(&s1, &s2)
}

/// Squared pairwise differences `(x_i - x_j)^2` of a scalar covariate,
/// the distance block used for time and scalar covariates in the survival
/// kernel.
pub fn squared_difference_matrix(xs: &[f64]) -> DMatrix<f64> {
    let m = xs.len();
    let mut d = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in (i + 1)..m {
            let v = (xs[i] - xs[j]) * (xs[i] - xs[j]);
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
    }
    d
}

/// Precomputed `m x m` pairwise graph distances.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    kind: DistanceKind,
    entries: DMatrix<f64>,
}

impl DistanceMatrix {
    /// Wraps an existing matrix, validating symmetry, non-negativity, and a
    /// zero diagonal.
    pub fn from_parts(kind: DistanceKind, entries: DMatrix<f64>) -> Result<Self> {
        let (r, c) = entries.shape();
        if r != c {
            return Err(Error::DimensionMismatch(format!(
                "distance matrix must be square, got {r}x{c}"
            )));
        }
        for i in 0..r {
            if entries[(i, i)] != 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "distance matrix diagonal must be zero, got {} at {i}",
                    entries[(i, i)]
                )));
            }
            for j in 0..r {
                let v = entries[(i, j)];
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidConfig(format!(
                        "invalid distance {v} at ({i},{j})"
                    )));
                }
                if entries[(i, j)] != entries[(j, i)] {
                    return Err(Error::InvalidConfig(format!(
                        "distance matrix asymmetric at ({i},{j})"
                    )));
                }
            }
        }
        Ok(Self { kind, entries })
    }

    pub fn kind(&self) -> DistanceKind {
        self.kind
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// Number of graphs the matrix covers.
    pub fn len(&self) -> usize {
        self.entries.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.nrows() == 0
    }

    /// Square submatrix over the given indices (used to restrict a cached
    /// matrix to a training fold without recomputing distances).
    pub fn restrict(&self, idx: &[usize]) -> DistanceMatrix {
        let k = idx.len();
        let mut d = DMatrix::zeros(k, k);
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                d[(a, b)] = self.entries[(i, j)];
            }
        }
        DistanceMatrix {
            kind: self.kind,
            entries: d,
        }
    }

    /// Rectangular block `rows x cols` (test-to-train distances).
    pub fn cross(&self, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(rows.len(), cols.len());
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                d[(a, b)] = self.entries[(i, j)];
            }
        }
        d
    }

    /// Writes the matrix as CSV, preceded by a metadata line recording the
    /// distance kind and dimension.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# kind={} m={}", self.kind, self.len())?;
        for i in 0..self.len() {
            let row: Vec<String> = (0..self.len())
                .map(|j| format!("{}", self.entries[(i, j)]))
                .collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    /// Reads a matrix written by [`DistanceMatrix::write_csv`].
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty distance file".into()))??;
        let header = header
            .strip_prefix("# ")
            .ok_or_else(|| Error::Parse("missing metadata line".into()))?;
        let mut kind = None;
        let mut m = None;
        for field in header.split_whitespace() {
            if let Some(v) = field.strip_prefix("kind=") {
                kind = Some(DistanceKind::parse(v)?);
            } else if let Some(v) = field.strip_prefix("m=") {
                m = Some(
                    v.parse::<usize>()
                        .map_err(|e| Error::Parse(format!("bad m: {e}")))?,
                );
            }
        }
        let kind = kind.ok_or_else(|| Error::Parse("metadata missing kind".into()))?;
        let m = m.ok_or_else(|| Error::Parse("metadata missing m".into()))?;
        let mut entries = DMatrix::zeros(m, m);
        for i in 0..m {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse(format!("missing row {i}")))??;
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != m {
                return Err(Error::Parse(format!(
                    "row {i} has {} fields, expected {m}",
                    fields.len()
                )));
            }
            for (j, field) in fields.iter().enumerate() {
                entries[(i, j)] = field
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("row {i} col {j}: {e}")))?;
            }
        }
        Self::from_parts(kind, entries)
    }
}

/// Computes all pairwise distances for a list of graphs.
///
/// For spectral kinds each graph's spectrum is computed once and reused, so
/// the cost is `m` eigensolves plus `O(m^2 n)` comparisons. Pairs are
/// evaluated in parallel; outputs land in disjoint entries, mirrored.
pub fn distance_matrix(graphs: &[Graph], kind: DistanceKind) -> Result<DistanceMatrix> {
    let m = graphs.len();
    if m < 2 {
        return Err(Error::InvalidConfig(format!(
            "distance matrix needs at least 2 graphs, got {m}"
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
    }

    let pairs: Vec<(usize, usize)> = (0..m)
        .flat_map(|i| ((i + 1)..m).map(move |j| (i, j)))
        .collect();

    let values: Vec<f64> = match kind.laplacian_kind() {
        None => {
            let vals: Result<Vec<f64>> = pairs
                .par_iter()
                .map(|&(i, j)| frobenius_distance(&graphs[i], &graphs[j]))
                .collect();
            vals?
        }
        Some(variant) => {
            let spectra: Result<Vec<Spectrum>> = graphs
                .par_iter()
                .map(|g| spectrum(&laplacian_of_kind(g, variant)?))
                .collect();
            let spectra = spectra?;
            let vals: Result<Vec<f64>> = pairs
                .par_iter()
                .map(|&(i, j)| spectral_distance_from_spectra(&spectra[i], &spectra[j]))
                .collect();
            vals?
        }
    };

    let mut entries = DMatrix::zeros(m, m);
    for (&(i, j), &v) in pairs.iter().zip(values.iter()) {
        entries[(i, j)] = v;
        entries[(j, i)] = v;
    }
    DistanceMatrix::from_parts(kind, entries)
}
