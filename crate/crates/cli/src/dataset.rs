//! Dataset directory layout and the plain-text graph format.
//!
//! A dataset directory holds `manifest.toml`, a `graphs/` subdirectory with
//! one matrix file per graph, `labels.csv` and/or `times.csv`, and an
//! optional `covariates.csv`. Graph files carry the order on the first line
//! followed by the weight rows; symmetry and the zero diagonal are checked
//! on load with absolute tolerance 1e-10, and small asymmetries within
//! tolerance are averaged away so the in-memory graph is exactly symmetric.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use nalgebra::DMatrix;
use serde::Deserialize;

use netgp::graph::Graph;

pub const SYMMETRY_TOL: f64 = 1e-10;

/// Parses the graph format: first line `n`, then `n` rows of `n`
/// whitespace-separated reals.
pub fn read_graph<R: BufRead>(r: R, name: &str) -> Result<Graph> {
    let mut lines = r.lines();
    let first = lines
        .next()
        .ok_or_else(|| anyhow::anyhow!("{name}: empty graph file"))??;
    let n: usize = first
        .trim()
        .parse()
        .with_context(|| format!("{name}: bad order line `{first}`"))?;
    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        let line = lines
            .next()
            .ok_or_else(|| anyhow::anyhow!("{name}: missing row {i}"))??;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != n {
            bail!("{name}: row {i} has {} entries, expected {n}", fields.len());
        }
        for (j, field) in fields.iter().enumerate() {
            w[(i, j)] = field
                .parse::<f64>()
                .with_context(|| format!("{name}: row {i} col {j}: `{field}`"))?;
        }
    }
    for i in 0..n {
        if w[(i, i)].abs() > SYMMETRY_TOL {
            bail!("{name}: nonzero diagonal {} at ({i},{i})", w[(i, i)]);
        }
        w[(i, i)] = 0.0;
        for j in (i + 1)..n {
            let (a, b) = (w[(i, j)], w[(j, i)]);
            if (a - b).abs() > SYMMETRY_TOL {
                bail!("{name}: asymmetric entries at ({i},{j}): {a} vs {b}");
            }
            let avg = 0.5 * (a + b);
            w[(i, j)] = avg;
            w[(j, i)] = avg;
        }
    }
    Ok(Graph::new(w)?)
}

pub fn write_graph<W: Write>(mut w: W, g: &Graph) -> Result<()> {
    let n = g.order();
    writeln!(w, "{n}")?;
    let mut line = String::new();
    for i in 0..n {
        line.clear();
        for j in 0..n {
            if j > 0 {
                line.push(' ');
            }
            write!(line, "{}", g.weights()[(i, j)])?;
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

/// Dataset metadata, written by `simulate` and validated on load.
#[derive(Debug, Clone, Deserialize)]
pub struct Manifest {
    /// `classification` or `survival`.
    pub kind: String,
    pub m: usize,
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub model: Option<String>,
    /// Free-form notes (generation policy choices and parameters).
    #[serde(default)]
    pub notes: Option<String>,
}

/// An in-memory dataset: graphs with labels and/or times, plus optional
/// per-subject scalar covariates stored one column per covariate.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub graphs: Vec<Graph>,
    pub labels: Option<Vec<f64>>,
    pub times: Option<Vec<f64>>,
    pub covariates: Vec<Vec<f64>>,
    pub manifest: Manifest,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn has_negative_weights(&self) -> bool {
        self.graphs.iter().any(|g| g.has_negative_weights())
    }

    pub fn labels(&self) -> Result<&[f64]> {
        self.labels
            .as_deref()
            .ok_or_else(|| anyhow::anyhow!("dataset has no labels.csv"))
    }

    pub fn times(&self) -> Result<&[f64]> {
        self.times
            .as_deref()
            .ok_or_else(|| anyhow::anyhow!("dataset has no times.csv"))
    }
}

fn graph_file(dir: &Path, index: usize) -> PathBuf {
    dir.join("graphs").join(format!("graph_{index:04}.txt"))
}

fn read_indexed_column(path: &Path, name: &str, m: usize) -> Result<Vec<f64>> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| anyhow::anyhow!("{name}: empty file"))?;
    let expected = format!("index,{name}");
    if header.trim() != expected {
        bail!("{name}: bad header `{header}`, expected `{expected}`");
    }
    let mut out = Vec::with_capacity(m);
    for (row, line) in lines.enumerate() {
        let mut parts = line.split(',');
        let idx: usize = parts
            .next()
            .ok_or_else(|| anyhow::anyhow!("{name}: row {row} missing index"))?
            .trim()
            .parse()
            .with_context(|| format!("{name}: row {row} index"))?;
        if idx != row {
            bail!("{name}: row {row} has index {idx}");
        }
        let value: f64 = parts
            .next()
            .ok_or_else(|| anyhow::anyhow!("{name}: row {row} missing value"))?
            .trim()
            .parse()
            .with_context(|| format!("{name}: row {row} value"))?;
        out.push(value);
    }
    if out.len() != m {
        bail!("{name}: {} rows for {m} graphs", out.len());
    }
    Ok(out)
}

/// Loads and validates a dataset directory.
pub fn load_dataset(dir: &Path) -> Result<Dataset> {
    let manifest_path = dir.join("manifest.toml");
    let manifest: Manifest = toml::from_str(
        &fs::read_to_string(&manifest_path)
            .with_context(|| format!("reading {}", manifest_path.display()))?,
    )
    .with_context(|| format!("parsing {}", manifest_path.display()))?;

    let mut graphs = Vec::with_capacity(manifest.m);
    for i in 0..manifest.m {
        let path = graph_file(dir, i);
        let file =
            fs::File::open(&path).with_context(|| format!("opening {}", path.display()))?;
        let g = read_graph(BufReader::new(file), &path.display().to_string())?;
        if g.order() != manifest.n {
            bail!(
                "{}: order {} does not match manifest n = {}",
                path.display(),
                g.order(),
                manifest.n
            );
        }
        graphs.push(g);
    }

    let labels_path = dir.join("labels.csv");
    let labels = if labels_path.exists() {
        let values = read_indexed_column(&labels_path, "label", manifest.m)?;
        for (i, &y) in values.iter().enumerate() {
            if y != 1.0 && y != -1.0 {
                bail!("labels.csv row {i}: label must be +1 or -1, got {y}");
            }
        }
        Some(values)
    } else {
        None
    };

    let times_path = dir.join("times.csv");
    let times = if times_path.exists() {
        let values = read_indexed_column(&times_path, "time", manifest.m)?;
        for (i, &t) in values.iter().enumerate() {
            if !(t > 0.0) {
                bail!("times.csv row {i}: time must be positive, got {t}");
            }
        }
        Some(values)
    } else {
        None
    };

    let cov_path = dir.join("covariates.csv");
    let covariates = if cov_path.exists() {
        read_covariates(&cov_path, manifest.m)?
    } else {
        Vec::new()
    };

    Ok(Dataset {
        graphs,
        labels,
        times,
        covariates,
        manifest,
    })
}

fn read_covariates(path: &Path, m: usize) -> Result<Vec<Vec<f64>>> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| anyhow::anyhow!("covariates.csv: empty file"))?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.first() != Some(&"index") || cols.len() < 2 {
        bail!("covariates.csv: bad header `{header}`");
    }
    let p = cols.len() - 1;
    let mut values = vec![Vec::with_capacity(m); p];
    for (row, line) in lines.enumerate() {
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != p + 1 {
            bail!("covariates.csv: row {row} has {} fields", parts.len());
        }
        let idx: usize = parts[0]
            .trim()
            .parse()
            .with_context(|| format!("covariates.csv row {row} index"))?;
        if idx != row {
            bail!("covariates.csv: row {row} has index {idx}");
        }
        for (k, field) in parts[1..].iter().enumerate() {
            values[k].push(
                field
                    .trim()
                    .parse()
                    .with_context(|| format!("covariates.csv row {row} col {k}"))?,
            );
        }
    }
    for col in &values {
        if col.len() != m {
            bail!("covariates.csv: {} rows for {m} graphs", col.len());
        }
    }
    Ok(values)
}

/// Writes a dataset directory (manifest, graphs, labels/times/covariates).
pub fn save_dataset(
    dir: &Path,
    graphs: &[Graph],
    labels: Option<&[f64]>,
    times: Option<&[f64]>,
    covariates: &[Vec<f64>],
    kind: &str,
    model: Option<&str>,
    seed: u64,
    notes: Option<&str>,
) -> Result<()> {
    let m = graphs.len();
    let n = graphs.first().map_or(0, |g| g.order());
    fs::create_dir_all(dir.join("graphs"))?;

    let mut manifest = String::new();
    writeln!(manifest, "kind = \"{kind}\"")?;
    writeln!(manifest, "m = {m}")?;
    writeln!(manifest, "n = {n}")?;
    writeln!(manifest, "seed = {seed}")?;
    if let Some(model) = model {
        writeln!(manifest, "model = \"{model}\"")?;
    }
    if let Some(notes) = notes {
        writeln!(manifest, "notes = \"{notes}\"")?;
    }
    fs::write(dir.join("manifest.toml"), manifest)?;

    for (i, g) in graphs.iter().enumerate() {
        let mut buf = Vec::new();
        write_graph(&mut buf, g)?;
        fs::write(graph_file(dir, i), buf)?;
    }

    if let Some(labels) = labels {
        let mut buf = String::from("index,label\n");
        for (i, y) in labels.iter().enumerate() {
            writeln!(buf, "{i},{y}")?;
        }
        fs::write(dir.join("labels.csv"), buf)?;
    }
    if let Some(times) = times {
        let mut buf = String::from("index,time\n");
        for (i, t) in times.iter().enumerate() {
            writeln!(buf, "{i},{t}")?;
        }
        fs::write(dir.join("times.csv"), buf)?;
    }
    if !covariates.is_empty() {
        let p = covariates.len();
        let mut buf = String::from("index");
        for k in 0..p {
            write!(buf, ",x{k}")?;
        }
        buf.push('\n');
        for i in 0..m {
            write!(buf, "{i}")?;
            for col in covariates {
                write!(buf, ",{}", col[i])?;
            }
            buf.push('\n');
        }
        fs::write(dir.join("covariates.csv"), buf)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graph_round_trip_is_bit_exact() {
        let g = Graph::from_edges(3, &[(0, 1, 0.25), (1, 2, -1.5)]).unwrap();
        let mut buf = Vec::new();
        write_graph(&mut buf, &g).unwrap();
        let back = read_graph(buf.as_slice(), "test").unwrap();
        assert_eq!(back.weights(), g.weights());
    }

    #[test]
    fn rejects_asymmetry_beyond_tolerance() {
        let text = "2\n0 1.0\n1.000001 0\n";
        let err = read_graph(text.as_bytes(), "test").unwrap_err();
        assert!(err.to_string().contains("asymmetric entries at (0,1)"));
    }

    #[test]
    fn averages_asymmetry_within_tolerance() {
        let text = "2\n0 1.0\n1.00000000000001 0\n";
        let g = read_graph(text.as_bytes(), "test").unwrap();
        assert_eq!(g.weights()[(0, 1)], g.weights()[(1, 0)]);
    }

    #[test]
    fn dataset_round_trip_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let graphs = vec![
            Graph::from_edges(3, &[(0, 1, 1.0)]).unwrap(),
            Graph::from_edges(3, &[(1, 2, 0.5)]).unwrap(),
        ];
        let labels = [1.0, -1.0];
        let times = [0.5, 2.0];
        let covs = vec![vec![0.0, 1.0]];
        save_dataset(
            dir.path(),
            &graphs,
            Some(&labels),
            Some(&times),
            &covs,
            "survival",
            Some("test"),
            9,
            None,
        )
        .unwrap();
        let ds = load_dataset(dir.path()).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.graphs, graphs);
        assert_eq!(ds.labels().unwrap(), &labels);
        assert_eq!(ds.times().unwrap(), &times);
        assert_eq!(ds.covariates, covs);

        // Missing label row: count mismatch error.
        std::fs::write(dir.path().join("labels.csv"), "index,label\n0,1\n").unwrap();
        let err = load_dataset(dir.path()).unwrap_err();
        assert!(err.to_string().contains("1 rows for 2 graphs"));
    }

    #[test]
    fn corrupted_symmetry_names_the_entry() {
        let dir = tempfile::tempdir().unwrap();
        let graphs = vec![
            Graph::from_edges(2, &[(0, 1, 1.0)]).unwrap(),
            Graph::empty(2).unwrap(),
        ];
        save_dataset(
            dir.path(),
            &graphs,
            Some(&[1.0, -1.0]),
            None,
            &[],
            "classification",
            None,
            0,
            None,
        )
        .unwrap();
        std::fs::write(
            dir.path().join("graphs/graph_0000.txt"),
            "2\n0 1.0\n0.5 0\n",
        )
        .unwrap();
        let err = load_dataset(dir.path()).unwrap_err();
        assert!(err.to_string().contains("(0,1)"), "{err}");
    }
}
