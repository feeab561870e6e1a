use netgp_cli::commands::{cmd_occ, cmd_simulate};
use netgp_cli::config::ExperimentConfig;

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let sim: ExperimentConfig = toml::from_str(&format!(
        "out = \"{}\"\nseed = 6001\n[sim]\nmodel = \"sbm\"\nn = 100\nm = 100\nclass0_fraction = 0.9\n",
        data.display())).unwrap();
    cmd_simulate(&sim).unwrap();
    let out = dir.path().join("out");
    let cfg: ExperimentConfig = toml::from_str(&format!(r#"
dataset = "{}"
out = "{}"
seed = 6002
[kernel]
method = "gp-lambda"
[sampler]
ns = 500
burn_in = 150
[eval]
replicates = 5
"#, data.display(), out.display())).unwrap();
    let outcomes = cmd_occ(&cfg).unwrap();
    for rep in &outcomes {
        println!("--- replicate {} ---", rep.replicate);
        let labels_text = std::fs::read_to_string(data.join("labels.csv")).unwrap();
        let labels: Vec<f64> = labels_text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
        let mut rows: Vec<(f64, f64, f64)> = rep.test_indices.iter().enumerate()
            .map(|(pos, &i)| (rep.scores.pi[pos], rep.scores.mu[pos], labels[i])).collect();
        rows.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        for (pi, mu, y) in rows {
            println!("pi {pi:.4} mu {mu:+.3} label {y:+}");
        }
        for s in &rep.summaries {
            println!("{}: thr {:?} side {:?} minority {}/{}", s.score, s.threshold, s.side.map(|x| x.as_str()), s.minority_anomalous, s.minority_total);
        }
    }
}
