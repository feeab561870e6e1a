use netgp_cli::commands::{cmd_occ, cmd_simulate};
use netgp_cli::config::ExperimentConfig;

fn main() {
    for data_seed in [6001u64, 777, 31415] {
        let dir = tempfile::tempdir().unwrap();
        let data = dir.path().join("data");
        let sim: ExperimentConfig = toml::from_str(&format!(
            "out = \"{}\"\nseed = {data_seed}\n[sim]\nmodel = \"sbm\"\nn = 100\nm = 100\nclass0_fraction = 0.9\n",
            data.display())).unwrap();
        cmd_simulate(&sim).unwrap();
        for (prior, mode) in [(1.0, "plugin"), (2.0, "plugin"), (1.0, "mc"), (2.0, "mc")] {
            let out = dir.path().join(format!("out-{prior}-{mode}"));
            let cfg: ExperimentConfig = toml::from_str(&format!(r#"
dataset = "{}"
out = "{}"
seed = 6002
[kernel]
method = "gp-lambda"
[sampler]
ns = 500
burn_in = 150
alpha_sigma = {prior}
beta_sigma = {prior}
predict = "{mode}"
[eval]
replicates = 5
"#, data.display(), out.display())).unwrap();
            let outcomes = cmd_occ(&cfg).unwrap();
            let (mut det, mut tot) = (0, 0);
            for rep in &outcomes {
                let pi = rep.summaries.iter().find(|s| s.score == "pi").unwrap();
                det += pi.minority_anomalous; tot += pi.minority_total;
            }
            println!("data_seed {data_seed} prior {prior} mode {mode}: pi {det}/{tot}");
        }
    }
}
