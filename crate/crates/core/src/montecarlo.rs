//! Monte Carlo harness for size and power of the parity tests.
//!
//! Replications impose the regression structure directly: the error u is
//! the overlap MA process, the regressor x is an independent draw of the
//! same MA process (a forward-error-type series), and
//!
//! ```text
//! y_i = true_beta * x_i + u_i.
//! ```
//!
//! That keeps the tested null exact (the population slope equals
//! `true_beta` by construction) while both series carry the full
//! overlap-induced autocorrelation pattern, which is what drives the
//! size distortions of the static tests. Writing the pair through an
//! artificial forward series instead couples the regressor to the error
//! chain and shifts the population slope off the null by the order-k
//! autocorrelation; [`synthesize_series`] still provides that forward
//! construction for building price-level fixtures.
//!
//! Everything is deterministic under the master seed: replication r uses
//! counter-derived generator streams (2r, 2r + 1), so replications can be
//! evaluated concurrently and aggregated in index order with bit-stable
//! results.

use chrono::NaiveDate;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::dynreg::{fit_dynreg, fit_rdynreg_with_filter, select_p, DEFAULT_P_MAX};
use crate::error::{Error, Result};
use crate::hac::{cov_estimate, HacConfig};
use crate::maproc::{invert, simulate_ma, ArFilter, MaPolynomial, OverlapSpec, DEFAULT_INVERT_TOL};
use crate::ols::{ols_fit, t_test, CovMethod};
use crate::series::{build_sample, AlignedSeries, Design, RegressionSample};

/// Where the spot series for a simulation comes from.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum SpotSource {
    /// Driftless Gaussian random walk with the given weekly innovation
    /// standard deviation (default 1.4%, a typical G10 weekly move).
    Synthetic { weekly_sd: f64 },
    /// User-supplied log spot levels.
    Series(Vec<f64>),
}

impl Default for SpotSource {
    fn default() -> Self {
        SpotSource::Synthetic { weekly_sd: 0.014 }
    }
}

/// Full experiment configuration. Identical configs (including the seed)
/// produce bit-identical results.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct McConfig {
    /// Raw weekly series length the design mirrors; the usable regression
    /// sample is shorter by k (Fama) or 2k (Hansen-Hodrick).
    pub t: usize,
    pub reps: usize,
    /// Contract horizon in sampling periods.
    pub k: usize,
    /// Error lag polynomial including its innovation variance.
    pub theta: MaPolynomial,
    /// Slope the data are generated under.
    pub true_beta: f64,
    pub spot: SpotSource,
    pub seed: u64,
    pub design: Design,
    /// BIC search cap for the dynamic regression.
    pub p_max: usize,
}

impl McConfig {
    /// Defaults mirroring the weekly application: the 22/5 overlap MA(4)
    /// with unit innovation variance, k = 4, synthetic spot, and the
    /// design's null slope as the truth.
    pub fn new(t: usize, reps: usize, design: Design, seed: u64) -> Result<Self> {
        let spec = OverlapSpec::default();
        let theta = MaPolynomial::from_overlap(&spec)?.with_sigma2(1.0);
        let config = McConfig {
            t,
            reps,
            k: spec.ma_order(),
            theta,
            true_beta: design.null_beta(),
            spot: SpotSource::default(),
            seed,
            design,
            p_max: DEFAULT_P_MAX,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps < 1 {
            return Err(Error::InvalidConfig("reps must be at least 1".into()));
        }
        if self.t <= 50 {
            return Err(Error::InvalidConfig(format!(
                "series length {} too short (need > 50)",
                self.t
            )));
        }
        if self.k < 1 {
            return Err(Error::InvalidConfig("horizon k must be at least 1".into()));
        }
        if !(self.theta.sigma2() >= 0.0) {
            return Err(Error::InvalidConfig("sigma2 must be non-negative".into()));
        }
        if let SpotSource::Series(s) = &self.spot {
            if s.len() < self.t + self.k {
                return Err(Error::TooFewObservations {
                    needed: self.t + self.k,
                    got: s.len(),
                });
            }
        }
        if let SpotSource::Synthetic { weekly_sd } = self.spot {
            if !(weekly_sd > 0.0) {
                return Err(Error::InvalidConfig("weekly_sd must be positive".into()));
            }
        }
        Ok(())
    }

    /// Usable regression pairs per replication.
    pub fn sample_len(&self) -> usize {
        match self.design {
            Design::Fama => self.t - self.k,
            Design::HansenHodrick => self.t - 2 * self.k,
        }
    }
}

/// The eight estimators of the performance table, in its row order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum McMethod {
    Ols,
    OlsHh,
    OlsNw,
    OlsAndrews,
    OlsKv,
    OlsEwc,
    DynReg,
    RDynReg,
}

impl McMethod {
    pub const ALL: [McMethod; 8] = [
        McMethod::Ols,
        McMethod::OlsHh,
        McMethod::OlsNw,
        McMethod::OlsAndrews,
        McMethod::OlsKv,
        McMethod::OlsEwc,
        McMethod::DynReg,
        McMethod::RDynReg,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            McMethod::Ols => "OLS",
            McMethod::OlsHh => "OLS-HH",
            McMethod::OlsNw => "OLS-NW",
            McMethod::OlsAndrews => "OLS-Andrews",
            McMethod::OlsKv => "OLS-KV",
            McMethod::OlsEwc => "OLS-EWC",
            McMethod::DynReg => "DynReg",
            McMethod::RDynReg => "RDynReg",
        }
    }

    /// Whether the method shares the static OLS point estimate (the HAC
    /// rows report no bias/MSE of their own).
    pub fn shares_ols_estimate(&self) -> bool {
        matches!(
            self,
            McMethod::OlsHh
                | McMethod::OlsNw
                | McMethod::OlsAndrews
                | McMethod::OlsKv
                | McMethod::OlsEwc
        )
    }

    fn cov_method(&self) -> Option<CovMethod> {
        match self {
            McMethod::Ols => Some(CovMethod::Ols),
            McMethod::OlsHh => Some(CovMethod::Hh),
            McMethod::OlsNw => Some(CovMethod::Nw),
            McMethod::OlsAndrews => Some(CovMethod::Andrews),
            McMethod::OlsKv => Some(CovMethod::Kv),
            McMethod::OlsEwc => Some(CovMethod::Ewc),
            _ => None,
        }
    }
}

impl std::str::FromStr for McMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        McMethod::ALL
            .iter()
            .find(|m| m.label().to_ascii_lowercase() == norm || {
                // accept the bare covariance name for the OLS rows
                matches!(
                    (norm.as_str(), m),
                    ("hh", McMethod::OlsHh)
                        | ("nw", McMethod::OlsNw)
                        | ("andrews", McMethod::OlsAndrews)
                        | ("kv", McMethod::OlsKv)
                        | ("ewc", McMethod::OlsEwc)
                )
            })
            .copied()
            .ok_or_else(|| Error::InvalidConfig(format!("unknown method {s:?}")))
    }
}

/// Parse a comma-separated method list into canonical table row order,
/// dropping duplicates.
pub fn normalize_methods(spec: &str) -> Result<Vec<McMethod>> {
    let mut requested: Vec<McMethod> = Vec::new();
    for part in spec.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let method: McMethod = part.parse()?;
        if !requested.contains(&method) {
            requested.push(method);
        }
    }
    if requested.is_empty() {
        return Err(Error::InvalidConfig("no methods requested".into()));
    }
    Ok(McMethod::ALL
        .iter()
        .filter(|m| requested.contains(m))
        .copied()
        .collect())
}

/// Per-replication result for one method.
#[derive(Debug, Clone, Copy)]
pub struct MethodOutcome {
    /// Point estimate of beta (the long-run coefficient for DynReg).
    pub beta: f64,
    /// t-statistic against the design's null slope.
    pub t_stat: f64,
    /// Rejection of the null at 5% under the method's own reference
    /// distribution.
    pub reject_5pct: bool,
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

// Reserved streams well away from the replication counter range.
const STREAM_SPOT: u64 = u64::MAX - 1;
const STREAM_PILOT: u64 = u64::MAX - 2;

fn weekly_dates(start_index: usize, n: usize) -> Vec<NaiveDate> {
    let d0 = NaiveDate::from_ymd_opt(1989, 1, 5).unwrap();
    (0..n)
        .map(|i| d0 + chrono::Duration::days(7 * (start_index + i) as i64))
        .collect()
}

fn draw_spot(config: &McConfig, len: usize) -> Result<Vec<f64>> {
    match &config.spot {
        SpotSource::Series(s) => {
            if s.len() < len {
                return Err(Error::TooFewObservations {
                    needed: len,
                    got: s.len(),
                });
            }
            Ok(s[..len].to_vec())
        }
        SpotSource::Synthetic { weekly_sd } => {
            let mut rng = stream_rng(config.seed, STREAM_SPOT);
            let mut s = Vec::with_capacity(len);
            let mut level = 1.5f64.ln();
            for _ in 0..len {
                s.push(level);
                let z: f64 = StandardNormal.sample(&mut rng);
                level += weekly_sd * z;
            }
            Ok(s)
        }
    }
}

/// Reproduce the per-currency innovation-variance calibration: a pilot
/// error series built on the spot gives an artificial forward, the static
/// Hansen-Hodrick regression is run on it, and sigma2 is set so the error
/// process variance matches that residual variance.
pub fn calibrate_sigma2(config: &McConfig) -> Result<f64> {
    let ratio = config.theta.variance_ratio();
    let spot = draw_spot(config, config.t + config.k)?;
    let n = spot.len();
    let mut dvar = 0.0;
    for w in spot.windows(2) {
        dvar += (w[1] - w[0]) * (w[1] - w[0]);
    }
    dvar /= (n - 1) as f64;
    let pilot_sigma2 = (config.k as f64 * dvar / ratio).max(1e-12);

    let mut rng = stream_rng(config.seed, STREAM_PILOT);
    let u = simulate_ma(&config.theta.with_sigma2(pilot_sigma2), n, &mut rng);
    let mut f = Vec::with_capacity(config.t);
    for t in 0..config.t {
        f.push(spot[t + config.k] - u[t + config.k]);
    }
    let series = AlignedSeries::new(
        weekly_dates(0, config.t),
        spot[..config.t].to_vec(),
        f,
        config.k,
    )?;
    let sample = build_sample(&series, Design::HansenHodrick);
    let fit = ols_fit(&sample)?;
    Ok(fit.sigma2 / ratio)
}

/// One replication's regression sample.
///
/// The error and regressor processes are drawn from generator streams
/// 2 * rep_index and 2 * rep_index + 1 under the master seed. With a zero
/// innovation variance the regressor falls back to a unit-variance draw
/// of the same process so the perfect-foresight corner stays estimable.
pub fn generate_replication(config: &McConfig, rep_index: usize) -> Result<RegressionSample> {
    config.validate()?;
    let n = config.sample_len();
    let mut rng_u = stream_rng(config.seed, 2 * rep_index as u64);
    let mut rng_x = stream_rng(config.seed, 2 * rep_index as u64 + 1);

    let u = simulate_ma(&config.theta, n, &mut rng_u);
    let x_theta = if config.theta.sigma2() > 0.0 {
        config.theta.clone()
    } else {
        config.theta.with_sigma2(1.0)
    };
    let x = simulate_ma(&x_theta, n, &mut rng_x);

    let y: Vec<f64> = x
        .iter()
        .zip(u.iter())
        .map(|(xi, ui)| config.true_beta * xi + ui)
        .collect();
    RegressionSample::from_parts(y, x, config.design, config.k, weekly_dates(config.k, n))
}

/// Artificial price-level series satisfying the forward construction
/// f_t = s_{t+k} - u_{t+k}, for writing CSV fixtures that exercise the
/// full ingestion pipeline.
pub fn synthesize_series(config: &McConfig) -> Result<AlignedSeries> {
    config.validate()?;
    let spot = draw_spot(config, config.t + config.k)?;
    let mut rng = stream_rng(config.seed, 0);
    let u = simulate_ma(&config.theta, config.t + config.k, &mut rng);
    let mut f = Vec::with_capacity(config.t);
    for t in 0..config.t {
        f.push(spot[t + config.k] - u[t + config.k]);
    }
    AlignedSeries::new(
        weekly_dates(0, config.t),
        spot[..config.t].to_vec(),
        f,
        config.k,
    )
}

use crate::ols::normal_two_sided_p as normal_p;

fn run_one(
    config: &McConfig,
    filter: &ArFilter,
    methods: &[McMethod],
    rep: usize,
) -> Result<Vec<MethodOutcome>> {
    let sample = generate_replication(config, rep)?;
    let null = config.design.null_beta();

    let needs_static = methods.iter().any(|m| m.cov_method().is_some());
    let static_fit = if needs_static {
        Some(ols_fit(&sample)?)
    } else {
        None
    };

    let mut out = Vec::with_capacity(methods.len());
    for method in methods {
        let outcome = match method {
            McMethod::DynReg => {
                let p = select_p(&sample, config.p_max)?;
                let fit = fit_dynreg(&sample, p)?;
                let t = fit.long_run_t(null);
                MethodOutcome {
                    beta: fit.long_run_beta,
                    t_stat: t,
                    reject_5pct: normal_p(t) < 0.05,
                }
            }
            McMethod::RDynReg => {
                let fit = fit_rdynreg_with_filter(&sample, &config.theta, filter)?;
                let t = fit.t_stat(null);
                MethodOutcome {
                    beta: fit.beta,
                    t_stat: t,
                    reject_5pct: normal_p(t) < 0.05,
                }
            }
            other => {
                let fit = static_fit.as_ref().expect("static fit prepared");
                let cov_method = other.cov_method().expect("OLS-family method");
                let cov = cov_estimate(fit, config.k, &HacConfig::new(cov_method))?;
                let test = t_test(fit, &cov, 1, null)?;
                MethodOutcome {
                    beta: test.estimate,
                    t_stat: test.t_stat,
                    reject_5pct: test.reject_at_5pct,
                }
            }
        };
        out.push(outcome);
    }
    Ok(out)
}

/// Run all replications for a subset of methods.
///
/// The outer vector is ordered by replication index, the inner one by the
/// `methods` argument. Replications execute concurrently but the output
/// is identical to a sequential run.
pub fn run_replications(
    config: &McConfig,
    methods: &[McMethod],
) -> Result<Vec<Vec<MethodOutcome>>> {
    config.validate()?;
    let filter = invert(&config.theta, DEFAULT_INVERT_TOL)?;
    (0..config.reps)
        .into_par_iter()
        .map(|rep| run_one(config, &filter, methods, rep))
        .collect()
}

/// Aggregate metrics for one method.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct MethodRecord {
    pub method: McMethod,
    /// Mean estimate minus the generated beta; `None` for the HAC rows,
    /// whose point estimate is the OLS one.
    pub bias: Option<f64>,
    pub mse: Option<f64>,
    /// Rejection rate of the design null at the 5% level.
    pub size_5pct: f64,
}

/// One size-corrected power curve.
#[derive(Debug, Clone, serde::Serialize)]
pub struct PowerCurve {
    pub method: McMethod,
    /// (generated beta, rejection rate under the empirical critical value).
    pub points: Vec<(f64, f64)>,
}

/// Results of an experiment, aggregated in replication order.
#[derive(Debug, Clone, serde::Serialize)]
pub struct McResult {
    pub records: Vec<MethodRecord>,
    /// Filled by [`size_corrected_power`], empty otherwise.
    pub power_grid: Vec<PowerCurve>,
    /// Empirical two-sided 5% critical values of the null t-statistics.
    pub critical_values: Vec<(McMethod, f64)>,
    pub reps_used: usize,
    /// Monte Carlo standard error of a rejection rate near 5%.
    pub mc_se_size: f64,
}

fn upper_quantile(draws: &mut Vec<f64>, q: f64) -> f64 {
    draws.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let idx = ((q * draws.len() as f64).ceil() as usize).clamp(1, draws.len()) - 1;
    draws[idx]
}

fn aggregate(
    config: &McConfig,
    methods: &[McMethod],
    outcomes: &[Vec<MethodOutcome>],
) -> McResult {
    let reps = outcomes.len();
    let mut records = Vec::with_capacity(methods.len());
    let mut critical_values = Vec::with_capacity(methods.len());
    for (mi, method) in methods.iter().enumerate() {
        let mut sum = 0.0;
        let mut sum_sq_dev = 0.0;
        let mut rejects = 0usize;
        let mut abs_t: Vec<f64> = Vec::with_capacity(reps);
        for rep in outcomes {
            let o = rep[mi];
            sum += o.beta;
            let dev = o.beta - config.true_beta;
            sum_sq_dev += dev * dev;
            if o.reject_5pct {
                rejects += 1;
            }
            abs_t.push(o.t_stat.abs());
        }
        let (bias, mse) = if method.shares_ols_estimate() {
            (None, None)
        } else {
            (
                Some(sum / reps as f64 - config.true_beta),
                Some(sum_sq_dev / reps as f64),
            )
        };
        records.push(MethodRecord {
            method: *method,
            bias,
            mse,
            size_5pct: rejects as f64 / reps as f64,
        });
        critical_values.push((*method, upper_quantile(&mut abs_t, 0.95)));
    }
    McResult {
        records,
        power_grid: Vec::new(),
        critical_values,
        reps_used: reps,
        mc_se_size: (0.05 * 0.95 / reps as f64).sqrt(),
    }
}

/// Estimate every requested method on each replication and aggregate
/// bias, MSE, and empirical size. Deterministic given the config.
pub fn run_experiment(config: &McConfig, methods: &[McMethod]) -> Result<McResult> {
    let outcomes = run_replications(config, methods)?;
    Ok(aggregate(config, methods, &outcomes))
}

/// Size-corrected power over a grid of generated slopes.
///
/// A null run (true beta = the design null) pins each method's empirical
/// 5% critical value; every alternative then reuses the same master seed,
/// so the power curves are driven by the same innovations.
pub fn size_corrected_power(
    config: &McConfig,
    alternatives: &[f64],
    methods: &[McMethod],
) -> Result<McResult> {
    if alternatives.is_empty() {
        return Err(Error::InvalidConfig(
            "alternatives grid must not be empty".into(),
        ));
    }
    let mut null_config = config.clone();
    null_config.true_beta = config.design.null_beta();
    let null_outcomes = run_replications(&null_config, methods)?;
    let mut result = aggregate(&null_config, methods, &null_outcomes);

    let mut curves: Vec<PowerCurve> = methods
        .iter()
        .map(|m| PowerCurve {
            method: *m,
            points: Vec::with_capacity(alternatives.len()),
        })
        .collect();
    for &alt in alternatives {
        let mut alt_config = config.clone();
        alt_config.true_beta = null_config.true_beta + alt;
        let outcomes = if alt == 0.0 {
            null_outcomes.clone()
        } else {
            run_replications(&alt_config, methods)?
        };
        for (mi, curve) in curves.iter_mut().enumerate() {
            let cv = result.critical_values[mi].1;
            let hits = outcomes.iter().filter(|rep| rep[mi].t_stat.abs() > cv).count();
            curve.points.push((alt, hits as f64 / outcomes.len() as f64));
        }
    }
    result.power_grid = curves;
    Ok(result)
}

/// Null t-statistics of a single method across all replications, for
/// distribution checks.
pub fn null_t_stats(config: &McConfig, method: McMethod) -> Result<Vec<f64>> {
    let mut null_config = config.clone();
    null_config.true_beta = config.design.null_beta();
    let outcomes = run_replications(&null_config, &[method])?;
    Ok(outcomes.into_iter().map(|rep| rep[0].t_stat).collect())
}

/// Student-t quantile helper used when sizing EWC-style tests in reports.
pub fn t_quantile(df: f64, p: f64) -> f64 {
    StudentsT::new(0.0, 1.0, df)
        .expect("positive df")
        .inverse_cdf(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn base_config(t: usize, reps: usize, seed: u64) -> McConfig {
        McConfig::new(t, reps, Design::HansenHodrick, seed).unwrap()
    }

    #[test]
    fn method_list_parsing() {
        let methods = normalize_methods("rdynreg, ols,nw,ols").unwrap();
        assert_eq!(
            methods,
            vec![McMethod::Ols, McMethod::OlsNw, McMethod::RDynReg]
        );
        assert!(normalize_methods("ols,unknown").is_err());
        assert!(normalize_methods(" , ").is_err());
    }

    #[test]
    fn replications_are_deterministic_and_stream_split() {
        let config = base_config(200, 3, 11);
        let a = generate_replication(&config, 1).unwrap();
        let b = generate_replication(&config, 1).unwrap();
        assert_eq!(a, b);
        let c = generate_replication(&config, 2).unwrap();
        assert_ne!(a.y()[0], c.y()[0]);
    }

    #[test]
    fn null_population_slope_is_zero() {
        // Pooled over replications the sample slope straddles zero.
        let config = base_config(4000, 8, 13);
        let mut slopes = Vec::new();
        for rep in 0..config.reps {
            let s = generate_replication(&config, rep).unwrap();
            let fit = ols_fit(&s).unwrap();
            slopes.push(fit.beta[0]);
        }
        let mean = slopes.iter().sum::<f64>() / slopes.len() as f64;
        assert!(mean.abs() < 0.03, "mean slope {mean}");
    }

    #[test]
    fn response_carries_overlap_autocorrelations() {
        let mut config = base_config(10_008, 1, 17);
        config.true_beta = 0.0;
        let s = generate_replication(&config, 0).unwrap();
        let y = s.y();
        let n = y.len() as f64;
        let mean = y.iter().sum::<f64>() / n;
        let var = y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let expect = [0.7727, 0.5455, 0.3182, 0.0909];
        for (lag, want) in (1..=4).zip(expect.iter()) {
            let mut acf = 0.0;
            for t in lag..y.len() {
                acf += (y[t] - mean) * (y[t - lag] - mean);
            }
            acf /= n * var;
            assert!(
                (acf - want).abs() < 0.05,
                "lag {lag}: acf {acf} vs {want}"
            );
        }
    }

    #[test]
    fn zero_sigma_perfect_foresight_corner() {
        let mut config = McConfig::new(200, 1, Design::Fama, 19).unwrap();
        config.theta = config.theta.with_sigma2(0.0);
        let s = generate_replication(&config, 0).unwrap();
        let fit = ols_fit(&s).unwrap();
        assert_relative_eq!(fit.beta[0], 1.0, epsilon = 1e-10);
        for r in &fit.residuals {
            assert!(r.abs() < 1e-10);
        }
    }

    #[test]
    fn single_replication_gives_degenerate_rates() {
        let config = base_config(120, 1, 23);
        let result = run_experiment(&config, &McMethod::ALL).unwrap();
        assert_eq!(result.reps_used, 1);
        for r in &result.records {
            assert!(r.size_5pct == 0.0 || r.size_5pct == 1.0);
        }
    }

    #[test]
    fn experiment_is_bit_stable() {
        let config = base_config(150, 5, 29);
        let a = run_experiment(&config, &[McMethod::Ols, McMethod::OlsNw]).unwrap();
        let b = run_experiment(&config, &[McMethod::Ols, McMethod::OlsNw]).unwrap();
        for (ra, rb) in a.records.iter().zip(b.records.iter()) {
            assert_eq!(ra.bias, rb.bias);
            assert_eq!(ra.mse, rb.mse);
            assert_eq!(ra.size_5pct, rb.size_5pct);
        }
    }

    #[test]
    fn bias_squared_bounded_by_mse() {
        let config = base_config(150, 20, 31);
        let result = run_experiment(&config, &[McMethod::Ols, McMethod::RDynReg]).unwrap();
        for r in &result.records {
            if let (Some(b), Some(m)) = (r.bias, r.mse) {
                assert!(b * b <= m + 1e-12);
            }
        }
    }

    #[test]
    fn power_at_zero_matches_size_correction() {
        let config = base_config(150, 60, 37);
        let result =
            size_corrected_power(&config, &[0.0, 0.3], &[McMethod::Ols, McMethod::RDynReg])
                .unwrap();
        for curve in &result.power_grid {
            let at_null = curve.points[0].1;
            // One grid step of quantization around 5%.
            assert!(
                (at_null - 0.05).abs() <= 1.0 / 60.0 + 1e-12,
                "{:?} power at 0 = {at_null}",
                curve.method
            );
        }
    }

    #[test]
    fn calibration_matches_pilot_residual_scale() {
        let config = base_config(1000, 1, 41);
        let sigma2 = calibrate_sigma2(&config).unwrap();
        // Var(u) should come out near the k-step spot variance.
        let var_u = sigma2 * config.theta.variance_ratio();
        let expect = 4.0 * 0.014f64.powi(2);
        assert!(
            var_u > 0.3 * expect && var_u < 3.0 * expect,
            "Var(u) = {var_u}, anchor {expect}"
        );
    }

    #[test]
    fn synthesized_series_fixture_has_forward_structure() {
        let mut config = base_config(300, 1, 43);
        config.theta = config.theta.with_sigma2(0.0);
        let series = synthesize_series(&config).unwrap();
        assert_eq!(series.len(), 300);
        // sigma2 = 0 collapses the forward to the realized future spot,
        // so the Fama regression is an exact line with slope 1.
        let sample = build_sample(&series, Design::Fama);
        let fit = ols_fit(&sample).unwrap();
        assert_relative_eq!(fit.beta[0], 1.0, epsilon = 1e-9);
    }

    #[test]
    fn user_spot_series_is_accepted() {
        let mut config = base_config(120, 1, 47);
        let spot: Vec<f64> = (0..130).map(|i| 0.4 + 0.001 * (i as f64).sin()).collect();
        config.spot = SpotSource::Series(spot);
        assert!(synthesize_series(&config).is_ok());
        config.spot = SpotSource::Series(vec![0.4; 10]);
        assert!(synthesize_series(&config).is_err());
    }
}
