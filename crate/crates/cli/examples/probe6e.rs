use netgp::distance::{distance_matrix, DistanceKind};
use netgp_cli::dataset::load_dataset;
use netgp_cli::commands::cmd_simulate;
use netgp_cli::config::ExperimentConfig;

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let sim: ExperimentConfig = toml::from_str(&format!(
        "out = \"{}\"\nseed = 6001\n[sim]\nmodel = \"sbm\"\nn = 100\nm = 100\nclass0_fraction = 0.9\n",
        data.display())).unwrap();
    cmd_simulate(&sim).unwrap();
    let ds = load_dataset(&data).unwrap();
    let labels = ds.labels().unwrap().to_vec();
    let dm = distance_matrix(&ds.graphs, DistanceKind::SpectralNormalized).unwrap();
    // Mean distance of each point to the majority class (-1).
    let majority: Vec<usize> = (0..100).filter(|&i| labels[i] == -1.0).collect();
    println!("per-point mean spectral distance to majority class:");
    let mut maj_dists = Vec::new();
    let mut min_dists = Vec::new();
    for i in 0..100 {
        let d: f64 = majority.iter().filter(|&&j| j != i).map(|&j| dm.entries()[(i, j)]).sum::<f64>()
            / majority.iter().filter(|&&j| j != i).count() as f64;
        if labels[i] == -1.0 { maj_dists.push(d) } else { min_dists.push(d) }
    }
    maj_dists.sort_by(|a,b| a.partial_cmp(b).unwrap());
    min_dists.sort_by(|a,b| a.partial_cmp(b).unwrap());
    println!("majority d-to-majority: min {:.4} med {:.4} max {:.4}",
        maj_dists[0], maj_dists[maj_dists.len()/2], maj_dists[maj_dists.len()-1]);
    println!("minority d-to-majority: {:?}", min_dists.iter().map(|d| format!("{d:.4}")).collect::<Vec<_>>());
}
