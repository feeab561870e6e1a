use netgp_cli::commands::{cmd_occ, cmd_simulate};
use netgp_cli::config::ExperimentConfig;

fn main() {
    for data_seed in [6001u64, 31415, 123, 555] {
        let dir = tempfile::tempdir().unwrap();
        let data = dir.path().join("data");
        let sim: ExperimentConfig = toml::from_str(&format!(
            "out = \"{}\"\nseed = {data_seed}\n[sim]\nmodel = \"sbm\"\nn = 100\nm = 100\nclass0_fraction = 0.9\n",
            data.display())).unwrap();
        cmd_simulate(&sim).unwrap();
        let labels_text = std::fs::read_to_string(data.join("labels.csv")).unwrap();
        let labels: Vec<f64> = labels_text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
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
        let (mut elbow_det, mut oracle_det, mut tot, mut saturated) = (0, 0, 0, 0);
        for rep in &outcomes {
            let pi = rep.summaries.iter().find(|s| s.score == "pi").unwrap();
            elbow_det += pi.minority_anomalous;
            tot += pi.minority_total;
            // Oracle: best threshold on mu knowing labels (minority below).
            let mut pairs: Vec<(f64, bool)> = rep.test_indices.iter().enumerate()
                .map(|(pos, &i)| (rep.scores.mu[pos], labels[i] == 1.0)).collect();
            pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            // best cut: maximize minority below cut (allow any cut position)
            let mut best = 0usize;
            for cut in 0..=pairs.len() {
                let det = pairs[..cut].iter().filter(|(_, m)| *m).count();
                let fp = pairs[..cut].iter().filter(|(_, m)| !*m).count();
                if fp <= 3 { best = best.max(det); } // near-clean cuts only
            }
            oracle_det += best;
            if rep.scores.pi.iter().any(|&p| p == 1.0) { saturated += 1; }
        }
        println!("data {data_seed}: elbow {elbow_det}/{tot}, oracle-ceiling {oracle_det}/{tot}, saturated reps {saturated}");
    }
}
