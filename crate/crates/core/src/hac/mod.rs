//! Long-run covariance estimators for the OLS sandwich.
//!
//! Five robust estimators of Omega, the long-run covariance of the score
//! process x_t * u_t:
//!
//! * `hh` — truncated (unweighted) kernel over a fixed band, the band
//!   count chosen from the known overlap order; can be indefinite, in
//!   which case eigenvalues are floored at zero and the estimate is
//!   flagged;
//! * `nw` — Bartlett-weighted sum, PSD by construction;
//! * `andrews` — quadratic-spectral kernel with the AR(1) plug-in
//!   automatic bandwidth;
//! * `kv` — Bartlett kernel with bandwidth b*n and fixed-b critical
//!   values simulated from the limiting Brownian-bridge functional (see
//!   [`kv`]);
//! * `ewc` — equal-weighted cosine projections with Student-t(B)
//!   inference.
//!
//! All estimators demean the scores (including the intercept column) so
//! the intercept and slope get a consistent joint covariance, and all
//! return an exactly symmetric matrix.

pub mod kv;

use ndarray::{s, Array2, Axis};

use crate::error::{Error, Result};
use crate::linalg::psd_floor;
use crate::ols::{cov_classical, sandwich, CovEstimate, CovMethod, OlsFit};

/// How the lag count for the HH band / NW kernel is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum LagRule {
    /// Use the contract horizon k of the sample (the overlap order is
    /// known in this application, so an automatic rule is not the
    /// default).
    Horizon,
    /// Fixed lag count.
    Fixed(usize),
    /// Newey-West automatic rule floor(4 (n/100)^{2/9}).
    Auto,
}

impl LagRule {
    fn resolve(&self, n: usize, k: usize) -> usize {
        match self {
            LagRule::Horizon => k,
            LagRule::Fixed(l) => *l,
            LagRule::Auto => (4.0 * (n as f64 / 100.0).powf(2.0 / 9.0)).floor() as usize,
        }
    }
}

/// Configuration for [`cov_estimate`].
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct HacConfig {
    pub method: CovMethod,
    /// Lag override for the HH band and NW kernel.
    pub lag: LagRule,
    /// Cosine basis count for EWC; `None` uses the 0.4 n^{2/3} rule.
    pub ewc_b: Option<usize>,
    /// Fixed-b fraction for KV.
    pub kv_b: f64,
}

impl HacConfig {
    pub fn new(method: CovMethod) -> Self {
        HacConfig {
            method,
            lag: LagRule::Horizon,
            ewc_b: None,
            kv_b: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kv_b > 0.0 && self.kv_b <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "kv_b must lie in (0, 1], got {}",
                self.kv_b
            )));
        }
        if let Some(b) = self.ewc_b {
            if b == 0 {
                return Err(Error::InvalidConfig("ewc_b must be at least 1".into()));
            }
        }
        Ok(())
    }
}

/// A long-run score covariance before it is wrapped in the sandwich.
#[derive(Debug, Clone)]
pub struct OmegaEstimate {
    pub omega: Array2<f64>,
    /// Effective lag count or bandwidth.
    pub bandwidth: f64,
    /// Degrees of freedom for inference; `None` means normal reference.
    pub df: Option<f64>,
    pub psd_repaired: bool,
}

fn demean(scores: &Array2<f64>) -> Array2<f64> {
    let means = scores.mean_axis(Axis(0)).expect("non-empty score matrix");
    scores - &means
}

/// Lag-j score autocovariance Gamma_j = (1/n) sum_{t>j} s_t s_{t-j}'.
fn gamma(scores: &Array2<f64>, lag: usize) -> Array2<f64> {
    let (n, _) = scores.dim();
    debug_assert!(lag < n);
    let lead = scores.slice(s![lag.., ..]);
    let lagged = scores.slice(s![..n - lag, ..]);
    lead.t().dot(&lagged) / n as f64
}

fn symmetrize(m: &mut Array2<f64>) {
    let p = m.nrows();
    for i in 0..p {
        for j in (i + 1)..p {
            let avg = 0.5 * (m[[i, j]] + m[[j, i]]);
            m[[i, j]] = avg;
            m[[j, i]] = avg;
        }
    }
}

/// Hansen-Hodrick truncated-kernel estimator with `k` bands: Gamma_0 plus
/// unweighted Gamma_j + Gamma_j' for j = 1..k-1.
///
/// The truncated kernel is not PSD; an indefinite estimate is repaired by
/// flooring its eigenvalues at zero and flagged as such.
pub fn omega_hh(scores: &Array2<f64>, k: usize) -> OmegaEstimate {
    assert!(k >= 1, "band count must be at least 1");
    assert!(scores.nrows() > k, "need more observations than bands");
    let s = demean(scores);
    let mut omega = gamma(&s, 0);
    for j in 1..k {
        let g = gamma(&s, j);
        omega += &g;
        omega += &g.t();
    }
    symmetrize(&mut omega);
    let (omega, repaired) = psd_floor(&omega);
    OmegaEstimate {
        omega,
        bandwidth: (k - 1) as f64,
        df: None,
        psd_repaired: repaired,
    }
}

/// Newey-West Bartlett estimator with weights w_j = 1 - j/(lag+1).
pub fn omega_nw(scores: &Array2<f64>, lag: usize) -> OmegaEstimate {
    assert!(lag < scores.nrows(), "lag must be below the sample size");
    let s = demean(scores);
    let mut omega = gamma(&s, 0);
    for j in 1..=lag {
        let w = 1.0 - j as f64 / (lag as f64 + 1.0);
        let g = gamma(&s, j) * w;
        omega += &g;
        omega += &g.t();
    }
    symmetrize(&mut omega);
    OmegaEstimate {
        omega,
        bandwidth: lag as f64,
        df: None,
        psd_repaired: false,
    }
}

/// Quadratic-spectral kernel at argument x (k(0) = 1).
fn qs_kernel(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        return 1.0;
    }
    let z = 6.0 * std::f64::consts::PI * x / 5.0;
    25.0 / (12.0 * std::f64::consts::PI.powi(2) * x * x) * ((z.sin() / z) - z.cos())
}

/// Andrews quadratic-spectral estimator with the AR(1) plug-in bandwidth.
///
/// The plug-in fits an AR(1) to each score column and aggregates with
/// equal weights; a degenerate fit (constant column or |rho| >= 0.999)
/// caps the bandwidth and warns.
pub fn omega_andrews(scores: &Array2<f64>) -> OmegaEstimate {
    let (n, p) = scores.dim();
    assert!(n >= 10, "Andrews plug-in needs at least 10 observations");
    let s = demean(scores);

    let mut num = 0.0;
    let mut den = 0.0;
    let mut degenerate = false;
    for a in 0..p {
        let col = s.column(a);
        let mut g0 = 0.0;
        let mut g1 = 0.0;
        for t in 0..n {
            g0 += col[t] * col[t];
            if t > 0 {
                g1 += col[t] * col[t - 1];
            }
        }
        if g0 <= 1e-300 {
            degenerate = true;
            continue;
        }
        let mut rho = g1 / g0;
        if rho.abs() >= 0.999 {
            degenerate = true;
            rho = rho.clamp(-0.999, 0.999);
        }
        // AR(1) innovation variance.
        let mut sig2 = 0.0;
        for t in 1..n {
            let e = col[t] - rho * col[t - 1];
            sig2 += e * e;
        }
        sig2 /= (n - 1) as f64;
        num += 4.0 * rho * rho * sig2 * sig2 / (1.0 - rho).powi(8);
        den += sig2 * sig2 / (1.0 - rho).powi(4);
    }

    let bandwidth = if den > 0.0 {
        let alpha2 = num / den;
        1.3221 * (alpha2 * n as f64).powf(0.2)
    } else {
        degenerate = true;
        1.0
    };
    let bandwidth = if bandwidth.is_finite() {
        bandwidth.min(n as f64)
    } else {
        degenerate = true;
        n as f64
    };
    if degenerate {
        log::warn!("degenerate AR(1) plug-in; Andrews bandwidth capped at {bandwidth:.2}");
    }

    // The QS kernel decays like 1/x^2; beyond 50 bandwidths its weight is
    // below 1e-4 and the remaining lags are ignored.
    let j_max = ((50.0 * bandwidth).ceil() as usize).min(n - 1);
    let mut omega = gamma(&s, 0);
    for j in 1..=j_max {
        let w = qs_kernel(j as f64 / bandwidth);
        let g = gamma(&s, j) * w;
        omega += &g;
        omega += &g.t();
    }
    symmetrize(&mut omega);
    // QS is PSD in its untruncated form; flooring covers the tail cutoff.
    let (omega, repaired) = psd_floor(&omega);
    OmegaEstimate {
        omega,
        bandwidth,
        df: None,
        psd_repaired: repaired,
    }
}

/// Kiefer-Vogelsang fixed-b estimator: Bartlett kernel with bandwidth
/// b*n, inference against the simulated fixed-b critical values.
///
/// The returned degrees of freedom are the effective Student-t df whose
/// 97.5% quantile equals the simulated two-sided 95% critical value, so a
/// p-value threshold of 0.05 reproduces the fixed-b rejection exactly.
pub fn omega_kv(scores: &Array2<f64>, b: f64) -> OmegaEstimate {
    assert!(b > 0.0 && b <= 1.0, "fixed-b fraction must lie in (0, 1]");
    let (n, _) = scores.dim();
    let s = demean(scores);
    let m = b * n as f64;
    let mut omega = gamma(&s, 0);
    let mut j = 1usize;
    while (j as f64) < m && j < n {
        let w = 1.0 - j as f64 / m;
        let g = gamma(&s, j) * w;
        omega += &g;
        omega += &g.t();
        j += 1;
    }
    symmetrize(&mut omega);
    let df = kv::effective_df(b);
    OmegaEstimate {
        omega,
        bandwidth: m,
        df: if df.is_finite() { Some(df) } else { None },
        psd_repaired: false,
    }
}

/// Default EWC basis count: the Lazarus-Lewis-Stock-Watson rule
/// 0.4 n^{2/3}, rounded to the nearest even integer, at least 2.
pub fn ewc_default_b(n: usize) -> usize {
    let raw = 0.4 * (n as f64).powf(2.0 / 3.0);
    let even = 2.0 * (raw / 2.0).round();
    (even as usize).max(2)
}

/// Equal-weighted cosine estimator: the average of B squared cosine
/// projections of the scores, with Student-t(B) inference.
pub fn omega_ewc(scores: &Array2<f64>, b: Option<usize>) -> Result<OmegaEstimate> {
    let (n, p) = scores.dim();
    let basis = b.unwrap_or_else(|| ewc_default_b(n));
    if basis >= n {
        return Err(Error::InvalidConfig(format!(
            "EWC basis count {basis} must be below the sample size {n}"
        )));
    }
    let s = demean(scores);
    let mut omega = Array2::<f64>::zeros((p, p));
    let scale = (2.0 / n as f64).sqrt();
    let mut lambda = vec![0.0; p];
    for j in 1..=basis {
        for l in lambda.iter_mut() {
            *l = 0.0;
        }
        for t in 0..n {
            let c = scale * (std::f64::consts::PI * j as f64 * (t as f64 + 0.5) / n as f64).cos();
            for (a, l) in lambda.iter_mut().enumerate() {
                *l += c * s[[t, a]];
            }
        }
        for i in 0..p {
            for l in i..p {
                let v = lambda[i] * lambda[l];
                omega[[i, l]] += v;
                if l != i {
                    omega[[l, i]] += v;
                }
            }
        }
    }
    omega /= basis as f64;
    symmetrize(&mut omega);
    Ok(OmegaEstimate {
        omega,
        bandwidth: basis as f64,
        df: Some(basis as f64),
        psd_repaired: false,
    })
}

/// Run the configured estimator on a fit's scores and wrap the result in
/// the sandwich M = Qinv Omega Qinv.
///
/// `k` is the sample's contract horizon; the HH band spans lags 0..k so
/// the full MA(k) error structure allowed by the parity restriction is
/// covered, and the NW default lag is k itself.
pub fn cov_estimate(fit: &OlsFit, k: usize, config: &HacConfig) -> Result<CovEstimate> {
    config.validate()?;
    if config.method == CovMethod::Ols {
        return Ok(cov_classical(fit));
    }
    let scores = fit.scores();
    let n = fit.n;
    let est = match config.method {
        CovMethod::Ols => unreachable!(),
        CovMethod::Hh => {
            let bands = match config.lag {
                LagRule::Horizon => k + 1,
                other => other.resolve(n, k) + 1,
            };
            omega_hh(&scores, bands.min(n - 1))
        }
        CovMethod::Nw => omega_nw(&scores, config.lag.resolve(n, k).min(n - 1)),
        CovMethod::Andrews => omega_andrews(&scores),
        CovMethod::Kv => omega_kv(&scores, config.kv_b),
        CovMethod::Ewc => omega_ewc(&scores, config.ewc_b)?,
    };
    let m = sandwich(fit, &est.omega);
    Ok(CovEstimate {
        method: config.method,
        omega: est.omega,
        m,
        bandwidth: est.bandwidth,
        df: est.df,
        psd_repaired: est.psd_repaired,
    })
}
