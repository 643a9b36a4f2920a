//! Regenerate the shipped fixed-b critical-value table.
//!
//! Usage: cargo run --release --example gen_kv_table > assets/kv_fixed_b.csv

use uipdyn::hac::kv;

const SEED: u64 = 20210926;
const PATHS: usize = 50_000;
const STEPS: usize = 2_000;

fn main() {
    let bs: Vec<f64> = (1..=10).map(|i| i as f64 / 10.0).collect();
    let rows = kv::simulate_critical_values(&bs, PATHS, STEPS, SEED);
    print!("{}", kv::render_table(&rows, SEED, PATHS, STEPS));
}
