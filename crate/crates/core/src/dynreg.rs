//! Dynamic regression estimation of the parity relation.
//!
//! Two estimators carry the efficiency argument:
//!
//! * the unrestricted dynamic regression of y on an intercept, its own
//!   lags, and current plus lagged x, estimated by OLS with lag order
//!   chosen by BIC. The long-run coefficient is the lag-polynomial ratio
//!   beta(1) / phi(1) with a delta-method standard error;
//! * the restricted variant under the parity null: both series are
//!   pre-filtered by the truncated inverse of the known overlap MA
//!   polynomial, making the filtered regressor strictly exogenous, after
//!   which a static OLS is consistent and asymptotically efficient.
//!
//! A likelihood-ratio test compares the static regression against the
//! dynamic one; both likelihoods are Gaussian with the ML variance
//! convention and must be computed on the same effective sample.

use ndarray::Array2;
use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::hac::{cov_estimate, HacConfig};
use crate::maproc::{filter_series, invert, poly_roots, ArFilter, MaPolynomial, DEFAULT_INVERT_TOL};
use crate::ols::{cov_classical, OlsFit};
use crate::series::RegressionSample;

/// Default upper bound for BIC lag selection; comfortably past the
/// eleven-lag decay of the inverted weekly-overlap polynomial.
pub const DEFAULT_P_MAX: usize = 12;

/// An unrestricted dynamic-regression fit.
#[derive(Debug, Clone)]
pub struct DynRegFit {
    /// Lag order used for both y and x lags.
    pub p: usize,
    /// Intercept.
    pub alpha: f64,
    /// AR coefficients phi_1..phi_p on lagged y.
    pub phi: Vec<f64>,
    /// Distributed-lag coefficients b_0..b_p on x.
    pub beta_lags: Vec<f64>,
    /// Long-run coefficient beta(1) / phi(1) = sum(b) / (1 - sum(phi)).
    pub long_run_beta: f64,
    /// Delta-method standard error of the long-run coefficient.
    pub long_run_se: f64,
    /// Asymptotic joint coefficient covariance sigma^2 * Qhat^{-1};
    /// divide by `n_effective` for finite-sample coefficient variances.
    pub cov: Array2<f64>,
    pub sigma2: f64,
    pub loglik: f64,
    pub n_effective: usize,
    /// Whether the fitted phi(L) has all roots outside the unit circle.
    pub stationary: bool,
}

impl DynRegFit {
    /// t-statistic of the long-run coefficient against a null value.
    pub fn long_run_t(&self, null: f64) -> f64 {
        (self.long_run_beta - null) / self.long_run_se
    }
}

/// Restricted (filtered) regression fit under the parity null.
#[derive(Debug, Clone)]
pub struct RDynRegFit {
    /// Slope on the filtered regressor.
    pub beta: f64,
    /// Intercept of the filtered regression, alpha * theta(1)^{-1}.
    pub alpha_star: f64,
    /// Classical OLS standard error of beta on the filtered data.
    pub se_beta: f64,
    pub sigma2: f64,
    pub loglik: f64,
    /// Truncation order of the AR filter that was applied.
    pub filter_p: usize,
    pub n_effective: usize,
    theta_at_one: f64,
}

impl RDynRegFit {
    /// Intercept mapped back to the unfiltered scale: alpha_star * theta(1).
    pub fn alpha(&self) -> f64 {
        self.alpha_star * self.theta_at_one
    }

    pub fn t_stat(&self, null: f64) -> f64 {
        (self.beta - null) / self.se_beta
    }
}

/// Likelihood-ratio test of the static regression against the dynamic one.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct LrTest {
    pub lambda: f64,
    pub df: usize,
    pub p_value: f64,
}

/// Design rows for the dynamic regression: row t (t >= start >= p) is
/// (1, y_{t-1}..y_{t-p}, x_t, x_{t-1}..x_{t-p}).
fn dyn_design(sample: &RegressionSample, p: usize, start: usize) -> (Array2<f64>, Vec<f64>) {
    let y = sample.y();
    let x = sample.x();
    let n = sample.len();
    debug_assert!(start >= p && start < n);
    let rows = n - start;
    let cols = 2 * p + 2;
    let mut design = Array2::<f64>::zeros((rows, cols));
    let mut resp = Vec::with_capacity(rows);
    for (r, t) in (start..n).enumerate() {
        design[[r, 0]] = 1.0;
        for j in 1..=p {
            design[[r, j]] = y[t - j];
        }
        design[[r, p + 1]] = x[t];
        for j in 1..=p {
            design[[r, p + 1 + j]] = x[t - j];
        }
        resp.push(y[t]);
    }
    (design, resp)
}

fn fit_on_rows(sample: &RegressionSample, p: usize, start: usize) -> Result<OlsFit> {
    let (design, resp) = dyn_design(sample, p, start);
    OlsFit::from_design(design, &resp)
}

/// Fit the dynamic regression with lag order `p`.
///
/// Requires n - p >= 5 (2p + 2) so each coefficient has at least five
/// observations behind it.
pub fn fit_dynreg(sample: &RegressionSample, p: usize) -> Result<DynRegFit> {
    let n = sample.len();
    let needed = p + 5 * (2 * p + 2);
    if n < needed {
        return Err(Error::TooFewObservations { needed, got: n });
    }
    let fit = fit_on_rows(sample, p, p)?;
    let n_eff = fit.n;

    let alpha = fit.alpha;
    let phi: Vec<f64> = fit.beta[..p].to_vec();
    let beta_lags: Vec<f64> = fit.beta[p..].to_vec();

    let phi_at_one = 1.0 - phi.iter().sum::<f64>();
    if phi_at_one.abs() <= 1e-8 {
        return Err(Error::UnitRootLongRun {
            phi_one: phi_at_one,
        });
    }
    let beta_at_one: f64 = beta_lags.iter().sum();
    let long_run_beta = beta_at_one / phi_at_one;

    // Delta method on g(theta) = beta(1)/phi(1): dg/dphi_j = g/phi(1),
    // dg/db_j = 1/phi(1), dg/dalpha = 0.
    let cov = &fit.qinv * fit.sigma2;
    let m = 2 * p + 2;
    let mut grad = vec![0.0; m];
    for j in 1..=p {
        grad[j] = long_run_beta / phi_at_one;
    }
    for j in 0..=p {
        grad[p + 1 + j] = 1.0 / phi_at_one;
    }
    let mut quad = 0.0;
    for i in 0..m {
        for j in 0..m {
            quad += grad[i] * cov[[i, j]] * grad[j];
        }
    }
    let long_run_se = (quad / n_eff as f64).sqrt();

    // Stationarity of the fitted dynamics: roots of 1 - phi_1 z - ...
    let stationary = if p == 0 {
        true
    } else {
        let mut poly = Vec::with_capacity(p + 1);
        poly.push(1.0);
        poly.extend(phi.iter().map(|c| -c));
        let min_mod = poly_roots(&poly)
            .iter()
            .map(|r| r.norm())
            .fold(f64::INFINITY, f64::min);
        if min_mod <= 1.0 {
            log::warn!("fitted dynamics are non-stationary (phi root modulus {min_mod:.4})");
        }
        min_mod > 1.0
    };

    Ok(DynRegFit {
        p,
        alpha,
        phi,
        beta_lags,
        long_run_beta,
        long_run_se,
        cov,
        sigma2: fit.sigma2,
        loglik: fit.loglik,
        n_effective: n_eff,
        stationary,
    })
}

fn argmin_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[best] {
            best = i;
        }
    }
    best
}

/// Largest lag order that keeps the fit precondition n - p >= 5(2p + 2).
fn feasible_p_max(n: usize, p_max: usize) -> Option<usize> {
    (0..=p_max).rev().find(|&p| n >= p + 5 * (2 * p + 2))
}

/// Choose the lag order by the Schwarz criterion
/// ln(sigma2) + (k(1+p) + p) ln(T)/T with k = 1 regressor.
///
/// All candidates are evaluated on the common effective sample implied by
/// `p_max` so their likelihoods are comparable; ties go to the smaller p.
pub fn select_p(sample: &RegressionSample, p_max: usize) -> Result<usize> {
    let n = sample.len();
    let p_max = feasible_p_max(n, p_max).ok_or(Error::TooFewObservations {
        needed: 10,
        got: n,
    })?;
    let t_common = (n - p_max) as f64;
    let mut bic = Vec::with_capacity(p_max + 1);
    for p in 0..=p_max {
        let fit = fit_on_rows(sample, p, p_max)?;
        let penalty = ((1 + p) + p) as f64 * t_common.ln() / t_common;
        bic.push(fit.sigma2.max(f64::MIN_POSITIVE).ln() + penalty);
    }
    Ok(argmin_first(&bic))
}

/// Static OLS of y on (1, x) over rows p..n, the effective sample of a
/// dynamic regression with lag order p.
pub fn static_fit_on_trimmed(sample: &RegressionSample, p: usize) -> Result<OlsFit> {
    let n = sample.len();
    if n <= p + 3 {
        return Err(Error::TooFewObservations {
            needed: p + 4,
            got: n,
        });
    }
    let rows = n - p;
    let mut design = Array2::<f64>::ones((rows, 2));
    for (r, t) in (p..n).enumerate() {
        design[[r, 1]] = sample.x()[t];
    }
    OlsFit::from_design(design, &sample.y()[p..])
}

/// Likelihood-ratio test of the static model against the dynamic one.
///
/// The static fit must be estimated on the dynamic fit's effective sample
/// (see [`static_fit_on_trimmed`]); lambda = 2 (ll_dyn - ll_static) =
/// n ln(sigma2_static / sigma2_dyn) with df = 2p.
pub fn lr_test(static_fit: &OlsFit, dyn_fit: &DynRegFit) -> Result<LrTest> {
    if static_fit.n != dyn_fit.n_effective {
        return Err(Error::MismatchedSamples {
            static_n: static_fit.n,
            dyn_n: dyn_fit.n_effective,
        });
    }
    let lambda = if dyn_fit.p == 0 {
        0.0
    } else {
        let raw = 2.0 * (dyn_fit.loglik - static_fit.loglik);
        debug_assert!(raw > -1e-6, "nested models produced lambda = {raw}");
        raw.max(0.0)
    };
    let df = 2 * dyn_fit.p;
    let p_value = if df == 0 {
        1.0
    } else {
        let chi = ChiSquared::new(df as f64).expect("positive df");
        1.0 - chi.cdf(lambda)
    };
    Ok(LrTest {
        lambda,
        df,
        p_value,
    })
}

/// Fit the restricted filtered regression under a known MA polynomial.
///
/// y and x are convolved with the truncated inverse of theta; the first
/// truncation-order observations are dropped, and the remaining filtered
/// pair is fit by static OLS with classical standard errors.
pub fn fit_rdynreg(sample: &RegressionSample, theta: &MaPolynomial) -> Result<RDynRegFit> {
    let filt = invert(theta, DEFAULT_INVERT_TOL)?;
    fit_rdynreg_with_filter(sample, theta, &filt)
}

/// Same as [`fit_rdynreg`] with a pre-computed filter, which the Monte
/// Carlo harness reuses across replications.
pub fn fit_rdynreg_with_filter(
    sample: &RegressionSample,
    theta: &MaPolynomial,
    filt: &ArFilter,
) -> Result<RDynRegFit> {
    let p = filt.truncation_p();
    if sample.len() <= p + 10 {
        return Err(Error::TooFewObservations {
            needed: p + 11,
            got: sample.len(),
        });
    }
    let fy = filter_series(sample.y(), filt)?;
    let fx = filter_series(sample.x(), filt)?;
    let n = fy.len();

    let mean = fx.iter().sum::<f64>() / n as f64;
    let var = fx.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    if var <= 1e-12 * mean.powi(2).max(1.0) {
        return Err(Error::DegenerateRegressor);
    }

    let mut design = Array2::<f64>::ones((n, 2));
    for (t, &v) in fx.iter().enumerate() {
        design[[t, 1]] = v;
    }
    let fit = OlsFit::from_design(design, &fy)?;
    let cov = cov_classical(&fit);
    Ok(RDynRegFit {
        beta: fit.beta[0],
        alpha_star: fit.alpha,
        se_beta: cov.se(1, fit.n),
        sigma2: fit.sigma2,
        loglik: fit.loglik,
        filter_p: p,
        n_effective: n,
        theta_at_one: theta.eval_at_one(),
    })
}

/// Estimator to run on each rolling window.
#[derive(Debug, Clone)]
pub enum RollingEstimator {
    /// Static OLS slope with the configured covariance estimator.
    Ols(HacConfig),
    /// Dynamic regression long-run coefficient, BIC lag selection.
    DynReg { p_max: usize },
    /// Restricted filtered regression under the given MA polynomial.
    RDynReg(MaPolynomial),
}

/// One rolling-window estimate; `None` entries mark windows where the
/// estimator's preconditions failed (they are data, not errors).
#[derive(Debug, Clone, serde::Serialize)]
pub struct RollingPoint {
    pub start: chrono::NaiveDate,
    pub end: chrono::NaiveDate,
    pub estimate: Option<f64>,
    pub se: Option<f64>,
}

impl RollingPoint {
    /// 95% band (estimate - 1.96 se, estimate + 1.96 se).
    pub fn band(&self) -> Option<(f64, f64)> {
        match (self.estimate, self.se) {
            (Some(e), Some(s)) => Some((e - 1.96 * s, e + 1.96 * s)),
            _ => None,
        }
    }
}

/// Run an estimator over a sequence of windows.
///
/// Windows are independent and evaluated concurrently; the output order
/// follows the input order regardless of scheduling.
pub fn rolling_estimate(
    windows: &[RegressionSample],
    spec: &RollingEstimator,
) -> Vec<RollingPoint> {
    windows
        .par_iter()
        .map(|w| {
            let (estimate, se) = match spec {
                RollingEstimator::Ols(config) => match crate::ols::ols_fit(w) {
                    Ok(fit) => match cov_estimate(&fit, w.k(), config) {
                        Ok(cov) => (Some(fit.beta[0]), Some(cov.se(1, fit.n))),
                        Err(_) => (Some(fit.beta[0]), None),
                    },
                    Err(_) => (None, None),
                },
                RollingEstimator::DynReg { p_max } => {
                    match select_p(w, *p_max).and_then(|p| fit_dynreg(w, p)) {
                        Ok(fit) => (Some(fit.long_run_beta), Some(fit.long_run_se)),
                        Err(_) => (None, None),
                    }
                }
                RollingEstimator::RDynReg(theta) => match fit_rdynreg(w, theta) {
                    Ok(fit) => (Some(fit.beta), Some(fit.se_beta)),
                    Err(_) => (None, None),
                },
            };
            RollingPoint {
                start: w.start_date(),
                end: w.end_date(),
                estimate,
                se,
            }
        })
        .collect()
}
