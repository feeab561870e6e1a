use netgp::distance::{distance_matrix, DistanceKind};
use netgp::sim::{simulate_two_class, ClassDesign, SimDesign};
use netgp::classifier::{fit, LabeledDataset, ClassifierConfig};

fn main() {
    let sample = simulate_two_class(&SimDesign {
        design: ClassDesign::default_small_world(),
        n: 100, m_class0: 50, m_class1: 50, seed: 5001,
    }).unwrap();
    let dm = distance_matrix(&sample.graphs, DistanceKind::SpectralNormalized).unwrap();
    let mut within = Vec::new();
    let mut between = Vec::new();
    for i in 0..100 {
        for j in (i+1)..100 {
            let d = dm.entries()[(i,j)];
            if (i < 50) == (j < 50) { within.push(d) } else { between.push(d) }
        }
    }
    let mean = |v: &Vec<f64>| v.iter().sum::<f64>() / v.len() as f64;
    println!("within mean {:.4} between mean {:.4}", mean(&within), mean(&between));
    println!("within range {:.4}..{:.4}", within.iter().cloned().fold(f64::MAX, f64::min), within.iter().cloned().fold(0.0, f64::max));

    let data = LabeledDataset::new(dm, sample.labels.clone()).unwrap();
    for ns in [500usize, 1500] {
        let cfg = ClassifierConfig { ns, burn_in: ns/3, seed: 1, ..ClassifierConfig::default() };
        let post = fit(&data, &cfg).unwrap();
        println!("ns={ns}: mean sigma2 {:.3}, mean ell {:.3}, ell range {:.3}..{:.3}",
            post.mean_sigma2().unwrap(), post.mean_ell().unwrap(),
            post.ell_draws.iter().cloned().fold(f64::MAX, f64::min),
            post.ell_draws.iter().cloned().fold(0.0, f64::max));
    }
}
