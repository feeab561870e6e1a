use nalgebra::DMatrix;
use netgp::distance::{distance_matrix, DistanceKind};
use netgp::graph::Graph;
use netgp::rng::substream;
use netgp_cli::commands::{evaluate_classifier, PreparedKernel};
use netgp_cli::config::SamplerConfig;
use netgp_cli::cv::Scheme;
use rand::Rng;

fn small_world_radius(n: usize, radius: usize, p: f64, rng: &mut impl Rng) -> Graph {
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
            if rng.gen::<f64>() >= p || !adj[i][j] { continue; }
            let cands: Vec<usize> = (0..n).filter(|&w| w != i && !adj[i][w]).collect();
            if cands.is_empty() { continue; }
            let w = cands[rng.gen_range(0..cands.len())];
            adj[i][j] = false; adj[j][i] = false;
            adj[i][w] = true; adj[w][i] = true;
        }
    }
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n { for j in 0..n { if adj[i][j] { m[(i,j)] = 1.0; } } }
    Graph::new(m).unwrap()
}

fn main() {
    let scheme = Scheme::Split { fraction: 0.75, replicates: 10 };
    for radius in [2usize, 3, 5] {
        for seed in [5001u64, 7, 90210] {
            let mut graphs = Vec::new();
            let mut labels = Vec::new();
            for idx in 0..100u64 {
                let class1 = idx >= 50;
                let p = if class1 { 0.07 } else { 0.05 };
                let mut rng = substream(seed, "probe-sw", idx);
                graphs.push(small_world_radius(100, radius, p, &mut rng));
                labels.push(if class1 { 1.0 } else { -1.0 });
            }
            let dm = distance_matrix(&graphs, DistanceKind::SpectralNormalized).unwrap();
            let sampler = SamplerConfig { ns: 500, burn_in: 150, ..Default::default() };
            let r = evaluate_classifier(&PreparedKernel::Distances(dm), &labels, &sampler, &scheme, seed).unwrap();
            println!("radius {radius} seed {seed}: GP-lambda {:.3}", r.mean_accuracy);
        }
    }
}
