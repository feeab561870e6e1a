use netgp::distance::{distance_matrix, DistanceKind};
use netgp::sim::{simulate_two_class, ClassDesign, SimDesign};
use netgp_cli::commands::{evaluate_classifier, PreparedKernel};
use netgp_cli::config::SamplerConfig;
use netgp_cli::cv::Scheme;

fn main() {
    let scheme = Scheme::Split { fraction: 0.75, replicates: 10 };
    for seed in [5001u64, 42, 7, 1234, 90210] {
        let sample = simulate_two_class(&SimDesign {
            design: ClassDesign::default_small_world(),
            n: 100, m_class0: 50, m_class1: 50, seed,
        }).unwrap();
        let lam = distance_matrix(&sample.graphs, DistanceKind::SpectralNormalized).unwrap();
        let fro = distance_matrix(&sample.graphs, DistanceKind::Frobenius).unwrap();
        let sampler = SamplerConfig { ns: 500, burn_in: 150, ..Default::default() };
        let rl = evaluate_classifier(&PreparedKernel::Distances(lam), &sample.labels, &sampler, &scheme, seed).unwrap();
        let rf = evaluate_classifier(&PreparedKernel::Distances(fro), &sample.labels, &sampler, &scheme, seed).unwrap();
        println!("seed {seed}: GP-lambda {:.3}, GP-F {:.3}", rl.mean_accuracy, rf.mean_accuracy);
    }
}
