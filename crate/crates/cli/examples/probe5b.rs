use netgp::distance::{distance_matrix, DistanceKind};
use netgp::sim::{simulate_two_class, ClassDesign, SimDesign};
use netgp_cli::commands::{evaluate_classifier, PreparedKernel};
use netgp_cli::config::SamplerConfig;
use netgp_cli::cv::Scheme;

fn main() {
    let sample = simulate_two_class(&SimDesign {
        design: ClassDesign::default_small_world(),
        n: 100, m_class0: 50, m_class1: 50, seed: 5001,
    }).unwrap();
    let dm = distance_matrix(&sample.graphs, DistanceKind::SpectralNormalized).unwrap();
    let kernel = PreparedKernel::Distances(dm);
    let scheme = Scheme::Split { fraction: 0.75, replicates: 10 };
    for (ns, predict) in [(500usize, "plugin"), (1500, "plugin"), (500, "mc"), (1500, "mc")] {
        let sampler = SamplerConfig { ns, burn_in: ns / 3, predict: predict.into(), ..Default::default() };
        let t = std::time::Instant::now();
        let report = evaluate_classifier(&kernel, &sample.labels, &sampler, &scheme, 5001).unwrap();
        println!("ns={ns} predict={predict}: acc {:.3} (sd {:.3}) in {:.1}s",
            report.mean_accuracy, report.sd_accuracy, t.elapsed().as_secs_f64());
    }
}
