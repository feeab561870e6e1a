use netgp_cli::commands::{cmd_occ, cmd_simulate};
use netgp_cli::config::ExperimentConfig;

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let sim: ExperimentConfig = toml::from_str(&format!(
        "out = \"{}\"\nseed = 6001\n[sim]\nmodel = \"sbm\"\nn = 100\nm = 100\nclass0_fraction = 0.9\n",
        data.display())).unwrap();
    cmd_simulate(&sim).unwrap();
    for (a, b) in [(1.0, 1.0), (2.0, 2.0), (3.0, 3.0)] {
        let out = dir.path().join(format!("out{a}"));
        let cfg: ExperimentConfig = toml::from_str(&format!(r#"
dataset = "{}"
out = "{}"
seed = 6002
[kernel]
method = "gp-lambda"
[sampler]
ns = 500
burn_in = 150
alpha_sigma = {a}
beta_sigma = {b}
[eval]
replicates = 5
"#, data.display(), out.display())).unwrap();
        let outcomes = cmd_occ(&cfg).unwrap();
        let mut det = 0; let mut tot = 0;
        let mut mu_det = 0;
        for rep in &outcomes {
            let pi = rep.summaries.iter().find(|s| s.score == "pi").unwrap();
            det += pi.minority_anomalous; tot += pi.minority_total;
            let mu = rep.summaries.iter().find(|s| s.score == "mu").unwrap();
            mu_det += mu.minority_anomalous;
        }
        println!("alpha=beta={a}: pi {det}/{tot}, mu {mu_det}/{tot}");
    }
}
