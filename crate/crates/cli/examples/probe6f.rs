use netgp_cli::commands::{cmd_occ, cmd_simulate};
use netgp_cli::config::ExperimentConfig;

fn main() {
    for data_seed in [31415u64, 123, 2024, 555] {
        let dir = tempfile::tempdir().unwrap();
        let data = dir.path().join("data");
        let sim: ExperimentConfig = toml::from_str(&format!(
            "out = \"{}\"\nseed = {data_seed}\n[sim]\nmodel = \"sbm\"\nn = 100\nm = 100\nclass0_fraction = 0.9\n",
            data.display())).unwrap();
        cmd_simulate(&sim).unwrap();
        for sampler_seed in [6002u64, 1, 99] {
            let out = dir.path().join(format!("out-{sampler_seed}"));
            let cfg: ExperimentConfig = toml::from_str(&format!(r#"
dataset = "{}"
out = "{}"
seed = {sampler_seed}
[kernel]
method = "gp-lambda"
[sampler]
ns = 500
burn_in = 150
[eval]
replicates = 5
"#, data.display(), out.display())).unwrap();
            let outcomes = cmd_occ(&cfg).unwrap();
            let (mut det, mut tot) = (0, 0);
            for rep in &outcomes {
                let pi = rep.summaries.iter().find(|s| s.score == "pi").unwrap();
                det += pi.minority_anomalous; tot += pi.minority_total;
            }
            println!("data {data_seed} sampler {sampler_seed}: pi {det}/{tot}");
        }
    }
}
