//! Test-support statistics: KS comparisons and chain standard errors.
//!
//! Used by the oracle test suites; not part of the modeling API.

/// Kolmogorov-Smirnov statistic of a sample against a CDF.
pub fn ks_statistic(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs: Vec<f64> = sample.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).expect("finite sample"));
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let c = cdf(x);
        let lo = i as f64 / n;
        let hi = (i + 1) as f64 / n;
        d = d.max((c - lo).abs()).max((hi - c).abs());
    }
    d
}

/// Asymptotic KS p-value (Stephens' correction).
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    let mut p = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k as f64) * (k as f64) * lambda * lambda).exp();
        p += if k % 2 == 1 { 2.0 * term } else { -2.0 * term };
    }
    p.clamp(0.0, 1.0)
}

/// KS distance between two empirical samples.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut xs = a.to_vec();
    xs.sort_by(|x, y| x.partial_cmp(y).expect("finite"));
    let mut ys = b.to_vec();
    ys.sort_by(|x, y| x.partial_cmp(y).expect("finite"));
    let (na, nb) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < xs.len() && j < ys.len() {
        if xs[i] <= ys[j] {
            i += 1;
        } else {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Standard error of an iid sample mean.
pub fn iid_se(xs: &[f64]) -> f64 {
    (variance(xs) / xs.len() as f64).sqrt()
}

/// Batch-means standard error for the mean of an autocorrelated chain.
pub fn batch_means_se(chain: &[f64], n_batches: usize) -> f64 {
    let batch_len = chain.len() / n_batches;
    assert!(batch_len >= 2, "chain too short for {n_batches} batches");
    let means: Vec<f64> = (0..n_batches)
        .map(|b| mean(&chain[b * batch_len..(b + 1) * batch_len]))
        .collect();
    (variance(&means) / n_batches as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn ks_uniform_sanity() {
        let mut rng = crate::rng::substream(77, "ks", 0);
        let sample: Vec<f64> = (0..5000).map(|_| rng.gen::<f64>()).collect();
        let d = ks_statistic(&sample, |x| x.clamp(0.0, 1.0));
        assert!(ks_p_value(d, sample.len()) > 0.01, "d={d}");
        // A shifted CDF must be rejected.
        let d_bad = ks_statistic(&sample, |x| (x - 0.2).clamp(0.0, 1.0));
        assert!(ks_p_value(d_bad, sample.len()) < 1e-6, "d={d_bad}");
    }

    #[test]
    fn batch_means_close_to_iid_se_for_iid_chain() {
        let mut rng = crate::rng::substream(79, "bm", 0);
        let chain: Vec<f64> = (0..20_000).map(|_| rng.gen::<f64>()).collect();
        let bm = batch_means_se(&chain, 100);
        let iid = iid_se(&chain);
        assert!((bm / iid - 1.0).abs() < 0.5, "{bm} vs {iid}");
    }
}
