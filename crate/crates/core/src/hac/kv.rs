//! Fixed-b critical values for the Kiefer-Vogelsang t-statistic.
//!
//! Under fixed-b asymptotics the Bartlett-kernel t-statistic converges to
//! W(1) / sqrt(Q_b) where W is a standard Wiener process, B(r) = W(r) -
//! r W(1) its bridge, and
//!
//! ```text
//! Q_b = (2/b) [ int_0^1 B(r)^2 dr  -  int_0^{1-b} B(r) B(r+b) dr ].
//! ```
//!
//! The distribution is nonstandard, so two-sided critical values are
//! simulated once from that functional (50,000 paths on a 2,000-step
//! grid) and shipped as a versioned CSV keyed by b in {0.1, ..., 1.0}.
//! The first table line records the generation seed; regenerating the
//! asset with `cargo run --release --example gen_kv_table` reproduces it
//! byte for byte.
//!
//! For p-values the table is translated into an effective Student-t
//! degrees of freedom: the df whose 97.5% quantile equals the simulated
//! 95% critical value. Rejection at the 5% level through that df is then
//! identical to comparing |t| against the simulated critical value.

use once_cell::sync::Lazy;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, StudentsT};

/// One row of the fixed-b table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KvRow {
    pub b: f64,
    pub two_sided_95: f64,
    pub two_sided_99: f64,
}

/// The shipped critical-value table (raw CSV, the external interface).
pub const KV_TABLE_CSV: &str = include_str!("../../assets/kv_fixed_b.csv");

static KV_TABLE: Lazy<Vec<KvRow>> = Lazy::new(|| {
    let rows = parse_table(KV_TABLE_CSV).expect("embedded KV table is well-formed");
    assert!(!rows.is_empty());
    rows
});

/// Parse a table in the persisted CSV format: `#` comment lines, a
/// `b,two_sided_95,two_sided_99` header, then one row per b ascending.
pub fn parse_table(text: &str) -> Result<Vec<KvRow>, String> {
    let mut rows = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('b') {
            continue;
        }
        let mut parts = line.split(',');
        let mut field = || -> Result<f64, String> {
            parts
                .next()
                .ok_or_else(|| format!("short row {line:?}"))?
                .trim()
                .parse::<f64>()
                .map_err(|e| format!("bad number in {line:?}: {e}"))
        };
        rows.push(KvRow {
            b: field()?,
            two_sided_95: field()?,
            two_sided_99: field()?,
        });
    }
    rows.sort_by(|a, b| a.b.partial_cmp(&b.b).unwrap());
    Ok(rows)
}

const Z_975: f64 = 1.959963984540054;
const Z_995: f64 = 2.5758293035489004;

fn interpolate(b: f64, pick: impl Fn(&KvRow) -> f64, limit: f64) -> f64 {
    let rows = &*KV_TABLE;
    let b = b.clamp(0.0, rows.last().unwrap().b);
    // Below the smallest tabulated b the statistic approaches the normal
    // limit; interpolate toward the normal quantile at b = 0.
    let (b0, v0, b1, v1) = if b <= rows[0].b {
        (0.0, limit, rows[0].b, pick(&rows[0]))
    } else {
        let idx = rows.partition_point(|r| r.b < b).min(rows.len() - 1);
        let hi = &rows[idx];
        let lo = &rows[idx - 1];
        (lo.b, pick(lo), hi.b, pick(hi))
    };
    if (b1 - b0).abs() < 1e-12 {
        return v1;
    }
    v0 + (v1 - v0) * (b - b0) / (b1 - b0)
}

/// Two-sided 95% critical value for the fixed-b t-statistic.
pub fn critical_value_95(b: f64) -> f64 {
    interpolate(b, |r| r.two_sided_95, Z_975)
}

/// Two-sided 99% critical value for the fixed-b t-statistic.
pub fn critical_value_99(b: f64) -> f64 {
    interpolate(b, |r| r.two_sided_99, Z_995)
}

/// Student-t degrees of freedom whose 97.5% quantile equals the fixed-b
/// 95% critical value. Returns infinity when the critical value is
/// already at the normal limit. Results are memoized; the bisection is
/// too slow for a Monte Carlo inner loop.
pub fn effective_df(b: f64) -> f64 {
    static CACHE: Lazy<std::sync::Mutex<std::collections::HashMap<u64, f64>>> =
        Lazy::new(|| std::sync::Mutex::new(std::collections::HashMap::new()));
    if let Some(df) = CACHE.lock().unwrap().get(&b.to_bits()) {
        return *df;
    }
    let df = effective_df_uncached(b);
    CACHE.lock().unwrap().insert(b.to_bits(), df);
    df
}

fn effective_df_uncached(b: f64) -> f64 {
    let cv = critical_value_95(b);
    if cv <= Z_975 + 1e-9 {
        return f64::INFINITY;
    }
    let quantile = |df: f64| -> f64 {
        StudentsT::new(0.0, 1.0, df)
            .expect("positive df")
            .inverse_cdf(0.975)
    };
    // The quantile is decreasing in df; bisect.
    let mut lo = 0.2;
    let mut hi = 1e6;
    if quantile(lo) < cv {
        return lo;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if quantile(mid) > cv {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) < 1e-9 * lo {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Simulate fixed-b critical values for a grid of b values.
///
/// Every b shares the same Wiener paths (common random numbers), each
/// path seeded as stream `path_index` of a ChaCha generator under
/// `seed`, so the output is reproducible and independent of scheduling.
pub fn simulate_critical_values(bs: &[f64], paths: usize, steps: usize, seed: u64) -> Vec<KvRow> {
    assert!(steps >= 10 && paths >= 100);
    for &b in bs {
        assert!(b > 0.0 && b <= 1.0);
    }
    let stats: Vec<Vec<f64>> = (0..paths)
        .into_par_iter()
        .map(|path| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(path as u64);
            let sd = (1.0 / steps as f64).sqrt();
            let mut w = Vec::with_capacity(steps);
            let mut acc = 0.0;
            for _ in 0..steps {
                let z: f64 = StandardNormal.sample(&mut rng);
                acc += sd * z;
                w.push(acc);
            }
            let w1 = acc;
            let bridge: Vec<f64> = w
                .iter()
                .enumerate()
                .map(|(i, wi)| wi - (i + 1) as f64 / steps as f64 * w1)
                .collect();
            let mean_sq = bridge.iter().map(|v| v * v).sum::<f64>() / steps as f64;
            bs.iter()
                .map(|&b| {
                    let shift = (b * steps as f64).round() as usize;
                    let mut cross = 0.0;
                    for i in 0..steps.saturating_sub(shift) {
                        cross += bridge[i] * bridge[i + shift];
                    }
                    cross /= steps as f64;
                    let q = 2.0 / b * (mean_sq - cross);
                    (w1 / q.sqrt()).abs()
                })
                .collect()
        })
        .collect();

    bs.iter()
        .enumerate()
        .map(|(bi, &b)| {
            let mut draws: Vec<f64> = stats.iter().map(|row| row[bi]).collect();
            draws.sort_by(|a, c| a.partial_cmp(c).unwrap());
            let q = |p: f64| -> f64 {
                let idx = ((p * draws.len() as f64).ceil() as usize).clamp(1, draws.len()) - 1;
                draws[idx]
            };
            KvRow {
                b,
                two_sided_95: q(0.95),
                two_sided_99: q(0.99),
            }
        })
        .collect()
}

/// Render rows in the persisted CSV format.
pub fn render_table(rows: &[KvRow], seed: u64, paths: usize, steps: usize) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "# kv fixed-b critical values v1; seed={seed} paths={paths} steps={steps}\n"
    ));
    out.push_str("b,two_sided_95,two_sided_99\n");
    for r in rows {
        out.push_str(&format!(
            "{:.1},{:.6},{:.6}\n",
            r.b, r.two_sided_95, r.two_sided_99
        ));
    }
    out
}
