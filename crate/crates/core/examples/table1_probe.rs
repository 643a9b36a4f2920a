//! Dev probe: print the desk-scale experiment records.
//!
//! Usage: cargo run --release --example table1_probe [reps] [t]

use uipdyn::montecarlo::{calibrate_sigma2, run_experiment, McConfig, McMethod};
use uipdyn::series::Design;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let reps: usize = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(300);
    let t: usize = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(1941);
    let mut config = McConfig::new(t, reps, Design::HansenHodrick, 20210926).unwrap();
    let sigma2 = calibrate_sigma2(&config).unwrap();
    config.theta = config.theta.with_sigma2(sigma2);
    println!("T = {t}, reps = {reps}, sigma2 = {sigma2:.3e}");
    let result = run_experiment(&config, &McMethod::ALL).unwrap();
    for r in &result.records {
        println!(
            "{:<12} bias {:>10} mse {:>10} size {:.4}",
            r.method.label(),
            r.bias.map(|b| format!("{b:+.5}")).unwrap_or_else(|| "--".into()),
            r.mse.map(|m| format!("{m:.6}")).unwrap_or_else(|| "--".into()),
            r.size_5pct
        );
    }
}
