use netgp::distance::{distance_matrix, DistanceKind};
use netgp::rng::substream;
use netgp::sim::{gen_survival_case, SurvivalCase};
use netgp::survival::{fit_survival, group_mean_curves, survival_surface, SurvivalConfig, SurvivalDataset};
use statrs::distribution::{ContinuousCDF, Normal};

fn main() {
    let mut rng = substream(7001, "acc-surv", 0);
    let sample = gen_survival_case(SurvivalCase::Easy, 50, 50, 0.3, 0.7, &mut rng).unwrap();
    let dm = distance_matrix(&sample.graphs, DistanceKind::Frobenius).unwrap();
    // distance scale summary
    let mut within = Vec::new(); let mut between = Vec::new();
    for i in 0..100 { for j in (i+1)..100 {
        let d = dm.entries()[(i,j)];
        if (i < 50) == (j < 50) { within.push(d); } else { between.push(d); }
    }}
    let mean = |v: &Vec<f64>| v.iter().sum::<f64>() / v.len() as f64;
    println!("d_G within {:.3} between {:.3}", mean(&within), mean(&between));

    let data = SurvivalDataset::new(sample.times.clone(), dm, vec![]).unwrap();
    let cfg = SurvivalConfig { ns: 400, burn_in: 150, seed: 7002, ..SurvivalConfig::default() };
    let t0 = std::time::Instant::now();
    let post = fit_survival(&data, &cfg).unwrap();
    println!("fit {:.0}s", t0.elapsed().as_secs_f64());
    let b = post.draws.len() as f64;
    let mo = post.draws.iter().map(|d| d.omega).sum::<f64>() / b;
    let ms = post.draws.iter().map(|d| d.sigma2).sum::<f64>() / b;
    let mg = post.draws.iter().map(|d| d.scales[0]).sum::<f64>() / b;
    let mt = post.draws.iter().map(|d| d.scales[1]).sum::<f64>() / b;
    println!("post means: omega {mo:.2} sigma2 {ms:.2} ellG {mg:.2} ellT {mt:.2}");

    let surface = survival_surface(&post.draws, &data).unwrap();
    let groups = group_mean_curves(&surface, &sample.groups);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let st = |t: f64, mu: f64, sd: f64| {
        (1.0 - normal.cdf((t - mu) / sd)) / (1.0 - normal.cdf(-mu / sd))
    };
    for (label, curve) in &groups {
        let (mu, sd) = if *label < 0.0 { (2.0, 0.8) } else { (4.0, 1.0) };
        let mut sup = 0.0; let mut sup_t = 0.0;
        for (g, &s) in curve.iter().enumerate() {
            let tr = st(surface.grid[g], mu, sd);
            if (s - tr).abs() > sup { sup = (s - tr).abs(); sup_t = surface.grid[g]; }
        }
        println!("group {label}: sup {sup:.3} at t {sup_t:.2}");
        for g in [0usize, 20, 35, 50, 65, 80, 99] {
            let tr = st(surface.grid[g], mu, sd);
            println!("  t {:.2}: model {:.3} true {:.3}", surface.grid[g], curve[g], tr);
        }
    }
}
