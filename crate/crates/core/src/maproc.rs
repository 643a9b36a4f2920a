//! Moving-average error algebra for overlapping forecast errors.
//!
//! When a k-period forecast is sampled every period, the forecast errors
//! overlap and inherit a moving-average autocorrelation structure. This
//! module covers the full algebra around that process:
//!
//! * the overlap-induced autocorrelation pattern (e.g. a 22-business-day
//!   contract sampled weekly gives rho_j = (22 - 5j)/22 while positive);
//! * spectral factorization of an autocorrelation sequence into the unique
//!   invertible MA polynomial theta(L) = 1 + c_1 L + ... + c_m L^m;
//! * truncated power-series inversion of theta(L) into an AR filter;
//! * convolution of a series with that filter;
//! * simulation of the MA process from seeded Gaussian innovations.
//!
//! Factorization works on the autocovariance generating polynomial in the
//! w = z + 1/z variable: its roots come in reciprocal z-pairs, the degree-m
//! w-polynomial is handed to a companion-matrix eigenvalue solve, and the
//! z-roots outside the unit circle are Newton-polished before the product
//! form is expanded back into coefficients.

use nalgebra::{Complex, DMatrix};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Hard cap on the truncation order of an inverted MA polynomial.
pub const MAX_AR_LAGS: usize = 50;

/// Default tolerance for [`invert`].
pub const DEFAULT_INVERT_TOL: f64 = 1e-6;

const UNIT_CIRCLE_MARGIN: f64 = 1e-8;

/// Overlap geometry of a forward contract relative to the sampling grid.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct OverlapSpec {
    /// Business days covered by the contract (default 22).
    pub contract_days: u32,
    /// Business days per sampling period (default 5 for weekly data).
    pub days_per_period: u32,
}

impl Default for OverlapSpec {
    fn default() -> Self {
        OverlapSpec {
            contract_days: 22,
            days_per_period: 5,
        }
    }
}

impl OverlapSpec {
    pub fn new(contract_days: u32, days_per_period: u32) -> Result<Self> {
        if contract_days == 0 || days_per_period == 0 {
            return Err(Error::InvalidConfig(
                "contract_days and days_per_period must be positive".into(),
            ));
        }
        Ok(OverlapSpec {
            contract_days,
            days_per_period,
        })
    }

    /// Implied MA order: the largest lag with strictly positive overlap.
    pub fn ma_order(&self) -> usize {
        let mut j = 0usize;
        while self.contract_days > (j as u32 + 1) * self.days_per_period {
            j += 1;
        }
        j
    }
}

/// Overlap-induced autocorrelations rho_1..rho_m for a spec.
///
/// rho_j = max(0, contract_days - j * days_per_period) / contract_days,
/// truncated at the implied MA order (so the returned vector has no
/// trailing zeros; an exact-maturity contract returns an empty vector).
pub fn overlap_autocorrelations(spec: &OverlapSpec) -> Vec<f64> {
    let m = spec.ma_order();
    (1..=m)
        .map(|j| {
            let covered = spec.contract_days as f64 - (j as u32 * spec.days_per_period) as f64;
            covered.max(0.0) / spec.contract_days as f64
        })
        .collect()
}

/// An invertible MA(m) lag polynomial theta(L) = 1 + c_1 L + ... + c_m L^m
/// together with its innovation variance.
///
/// All roots of the polynomial lie strictly outside the unit circle; the
/// constructor rejects anything else.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MaPolynomial {
    coeffs: Vec<f64>,
    sigma2: f64,
}

impl MaPolynomial {
    /// Build from the full coefficient vector `(1, c_1, ..., c_m)`.
    pub fn new(coeffs: Vec<f64>, sigma2: f64) -> Result<Self> {
        if coeffs.is_empty() || (coeffs[0] - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidConfig(
                "MA coefficient vector must start with c_0 = 1".into(),
            ));
        }
        if !(sigma2 >= 0.0) {
            return Err(Error::InvalidConfig("sigma2 must be non-negative".into()));
        }
        let poly = MaPolynomial { coeffs, sigma2 };
        if poly.order() > 0 {
            let min_mod = poly
                .roots()
                .iter()
                .map(|r| r.norm())
                .fold(f64::INFINITY, f64::min);
            if min_mod <= 1.0 + UNIT_CIRCLE_MARGIN {
                return Err(Error::NonInvertible { modulus: min_mod });
            }
        }
        Ok(poly)
    }

    /// Build from the lagged coefficients `(c_1, ..., c_m)` only.
    pub fn from_lag_coeffs(lags: &[f64], sigma2: f64) -> Result<Self> {
        let mut coeffs = Vec::with_capacity(lags.len() + 1);
        coeffs.push(1.0);
        coeffs.extend_from_slice(lags);
        Self::new(coeffs, sigma2)
    }

    /// White-noise polynomial (order zero).
    pub fn white_noise(sigma2: f64) -> Self {
        MaPolynomial {
            coeffs: vec![1.0],
            sigma2,
        }
    }

    /// The MA polynomial implied by a contract-overlap spec, with unit
    /// innovation variance.
    pub fn from_overlap(spec: &OverlapSpec) -> Result<Self> {
        let rho = overlap_autocorrelations(spec);
        spectral_factorize(&rho, rho.len())
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    /// Replace the innovation variance, keeping the lag structure.
    pub fn with_sigma2(&self, sigma2: f64) -> Self {
        MaPolynomial {
            coeffs: self.coeffs.clone(),
            sigma2,
        }
    }

    /// Sum of squared coefficients: Var(u) / sigma2.
    pub fn variance_ratio(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    /// Unconditional variance of the process, sigma2 * sum c_j^2.
    pub fn process_variance(&self) -> f64 {
        self.sigma2 * self.variance_ratio()
    }

    /// theta(1), the sum of all coefficients.
    pub fn eval_at_one(&self) -> f64 {
        self.coeffs.iter().sum()
    }

    /// Analytic autocorrelations rho_1..rho_max_lag of the process.
    pub fn autocorrelations(&self, max_lag: usize) -> Vec<f64> {
        let m = self.order();
        let denom = self.variance_ratio();
        (1..=max_lag)
            .map(|j| {
                if j > m {
                    0.0
                } else {
                    let s: f64 = (0..=(m - j)).map(|i| self.coeffs[i] * self.coeffs[i + j]).sum();
                    s / denom
                }
            })
            .collect()
    }

    /// Roots of the polynomial in z (all strictly outside the unit circle
    /// for a value constructed through `new`).
    pub fn roots(&self) -> Vec<Complex<f64>> {
        poly_roots(&self.coeffs)
    }
}

/// Roots of a real polynomial given ascending coefficients.
///
/// Companion-matrix eigenvalues with a few Newton polish steps. Trailing
/// (near-)zero coefficients are trimmed.
pub(crate) fn poly_roots(coeffs: &[f64]) -> Vec<Complex<f64>> {
    let scale = coeffs.iter().map(|c| c.abs()).fold(0.0f64, f64::max);
    let mut c: Vec<f64> = coeffs.to_vec();
    while c.len() > 1 && c.last().unwrap().abs() <= 1e-14 * scale.max(1.0) {
        c.pop();
    }
    let d = c.len() - 1;
    if d == 0 {
        return Vec::new();
    }
    let lead = c[d];
    let mut companion = DMatrix::<f64>::zeros(d, d);
    for i in 1..d {
        companion[(i, i - 1)] = 1.0;
    }
    for i in 0..d {
        companion[(i, d - 1)] = -c[i] / lead;
    }
    let mut roots: Vec<Complex<f64>> = companion.complex_eigenvalues().iter().cloned().collect();
    for r in roots.iter_mut() {
        *r = newton_polish(&c, *r);
    }
    roots
}

fn horner(coeffs: &[f64], z: Complex<f64>) -> (Complex<f64>, Complex<f64>) {
    let mut p = Complex::new(0.0, 0.0);
    let mut dp = Complex::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + Complex::new(c, 0.0);
    }
    (p, dp)
}

fn newton_polish(coeffs: &[f64], mut z: Complex<f64>) -> Complex<f64> {
    for _ in 0..8 {
        let (p, dp) = horner(coeffs, z);
        if dp.norm() == 0.0 {
            break;
        }
        let step = p / dp;
        z -= step;
        if step.norm() <= 1e-15 * (1.0 + z.norm()) {
            break;
        }
    }
    z
}

/// Recover the unique invertible MA(m) whose autocorrelations equal `rho`.
///
/// `rho` holds rho_1..rho_m (rho_0 = 1 is implicit). The innovation
/// variance of the result is normalized so the process variance equals 1,
/// i.e. sigma2 = 1 / sum c_j^2; rescale with
/// [`MaPolynomial::with_sigma2`] as needed.
///
/// Fails with [`Error::InfeasibleAutocorrelation`] when the sequence is
/// not attainable by any MA(m), which surfaces as factorization roots on
/// the unit circle.
pub fn spectral_factorize(rho: &[f64], m: usize) -> Result<MaPolynomial> {
    if m > rho.len() {
        return Err(Error::InvalidConfig(format!(
            "requested MA order {m} exceeds the {} autocorrelations supplied",
            rho.len()
        )));
    }
    // Trailing zero autocorrelations reduce the order.
    let mut eff = m;
    while eff > 0 && rho[eff - 1].abs() <= 1e-14 {
        eff -= 1;
    }
    if eff == 0 {
        let theta = MaPolynomial {
            coeffs: vec![1.0],
            sigma2: 1.0,
        };
        return Ok(theta);
    }
    let rho = &rho[..eff];
    let m = eff;

    // g(w) = 1 + sum_j rho_j * p_j(w) where p_j(w) = z^j + z^-j under
    // w = z + 1/z; p_0 = 2, p_1 = w, p_{j+1} = w p_j - p_{j-1}.
    let mut p_prev: Vec<f64> = vec![2.0]; // p_0
    let mut p_cur: Vec<f64> = vec![0.0, 1.0]; // p_1
    let mut g: Vec<f64> = vec![1.0];
    for j in 1..=m {
        if j >= 2 {
            // p_next = w * p_cur - p_prev
            let mut p_next = vec![0.0; p_cur.len() + 1];
            for (i, &c) in p_cur.iter().enumerate() {
                p_next[i + 1] += c;
            }
            for (i, &c) in p_prev.iter().enumerate() {
                p_next[i] -= c;
            }
            p_prev = std::mem::replace(&mut p_cur, p_next);
        }
        if g.len() < p_cur.len() {
            g.resize(p_cur.len(), 0.0);
        }
        for (i, &c) in p_cur.iter().enumerate() {
            g[i] += rho[j - 1] * c;
        }
    }

    // z-domain image of the autocovariance generating polynomial, used to
    // polish the selected roots: Q(z) = sum_{j=0}^{2m} rho_{|j-m|} z^j.
    let mut q = vec![0.0; 2 * m + 1];
    q[m] = 1.0;
    for j in 1..=m {
        q[m + j] = rho[j - 1];
        q[m - j] = rho[j - 1];
    }

    let w_roots = poly_roots(&g);
    debug_assert_eq!(w_roots.len(), m);

    let mut z_roots = Vec::with_capacity(m);
    for w in w_roots {
        // z^2 - w z + 1 = 0: the two solutions are reciprocal; keep the
        // one outside the unit circle.
        let disc = (w * w - Complex::new(4.0, 0.0)).sqrt();
        let z1 = (w + disc) / Complex::new(2.0, 0.0);
        let z2 = (w - disc) / Complex::new(2.0, 0.0);
        let z = if z1.norm() >= z2.norm() { z1 } else { z2 };
        let z = newton_polish(&q, z);
        if z.norm() <= 1.0 + UNIT_CIRCLE_MARGIN {
            return Err(Error::InfeasibleAutocorrelation {
                order: m,
                modulus: z.norm(),
            });
        }
        z_roots.push(z);
    }

    // theta(z) = prod_i (1 - z / r_i); expand in complex arithmetic.
    let mut poly = vec![Complex::new(1.0, 0.0)];
    for r in &z_roots {
        let factor = -Complex::new(1.0, 0.0) / r;
        let mut next = vec![Complex::new(0.0, 0.0); poly.len() + 1];
        for (i, &c) in poly.iter().enumerate() {
            next[i] += c;
            next[i + 1] += c * factor;
        }
        poly = next;
    }
    let mut coeffs = Vec::with_capacity(poly.len());
    for c in &poly {
        debug_assert!(c.im.abs() < 1e-6 * (1.0 + c.re.abs()), "conjugate pairing lost");
        coeffs.push(c.re);
    }
    coeffs[0] = 1.0;

    let mut theta = MaPolynomial {
        coeffs,
        sigma2: 1.0,
    };
    theta.sigma2 = 1.0 / theta.variance_ratio();
    Ok(theta)
}

/// Truncated power-series inverse of an MA polynomial: the AR filter
/// pi(L) with weights (b_0 = 1, b_1, ..., b_P) such that
/// pi(L) theta(L) = 1 exactly through lag P.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ArFilter {
    weights: Vec<f64>,
    truncation_error: f64,
}

impl ArFilter {
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Truncation order P (weights run b_0..b_P).
    pub fn truncation_p(&self) -> usize {
        self.weights.len() - 1
    }

    /// Geometric bound on the sum of the discarded tail weights.
    pub fn truncation_error(&self) -> f64 {
        self.truncation_error
    }

    /// Identity filter (inverse of white noise).
    pub fn identity() -> Self {
        ArFilter {
            weights: vec![1.0],
            truncation_error: 0.0,
        }
    }
}

/// Invert theta(L) by power-series division, truncating once a full
/// window of m+1 consecutive weights falls below `tolerance` and the
/// geometric tail bound does too.
pub fn invert(theta: &MaPolynomial, tolerance: f64) -> Result<ArFilter> {
    let m = theta.order();
    if m == 0 {
        return Ok(ArFilter::identity());
    }
    let min_mod = theta
        .roots()
        .iter()
        .map(|r| r.norm())
        .fold(f64::INFINITY, f64::min);
    if min_mod <= 1.0 + UNIT_CIRCLE_MARGIN {
        return Err(Error::NonInvertible { modulus: min_mod });
    }
    let decay = 1.0 / min_mod;

    let c = theta.coeffs();
    let mut b = Vec::with_capacity(MAX_AR_LAGS + 1);
    b.push(1.0);
    let mut cut = MAX_AR_LAGS;
    for j in 1..=MAX_AR_LAGS {
        let mut s = 0.0;
        for i in 1..=m.min(j) {
            s += c[i] * b[j - i];
        }
        b.push(-s);
        // A single small weight can be a zero crossing of an oscillating
        // tail; demand a whole window of small weights before stopping.
        if j >= m {
            let window_max = b[j - m..=j].iter().map(|w| w.abs()).fold(0.0f64, f64::max);
            if window_max < tolerance && window_max * decay / (1.0 - decay) < tolerance {
                cut = j;
                break;
            }
        }
    }
    b.truncate(cut + 1);
    let tail_scale = b[b.len().saturating_sub(m + 1)..]
        .iter()
        .map(|w| w.abs())
        .fold(0.0f64, f64::max);
    Ok(ArFilter {
        weights: b,
        truncation_error: tail_scale * decay / (1.0 - decay),
    })
}

/// Convolve a series with an AR filter, dropping the first P outputs
/// (no presample extrapolation).
pub fn filter_series(series: &[f64], filter: &ArFilter) -> Result<Vec<f64>> {
    let p = filter.truncation_p();
    if series.len() <= p {
        return Err(Error::SeriesTooShort {
            len: series.len(),
            filter_len: p,
        });
    }
    let w = filter.weights();
    let mut out = Vec::with_capacity(series.len() - p);
    for t in p..series.len() {
        let mut s = 0.0;
        for (j, &bj) in w.iter().enumerate() {
            s += bj * series[t - j];
        }
        out.push(s);
    }
    Ok(out)
}

/// Simulate `n` observations of the MA process from Gaussian innovations
/// drawn from the supplied generator. The first output already has a full
/// presample of innovations behind it, so the series is stationary from
/// index zero. Deterministic for a deterministic generator.
pub fn simulate_ma<R: Rng + ?Sized>(theta: &MaPolynomial, n: usize, rng: &mut R) -> Vec<f64> {
    let m = theta.order();
    let sd = theta.sigma2().sqrt();
    let eps: Vec<f64> = (0..n + m)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            sd * z
        })
        .collect();
    let c = theta.coeffs();
    (0..n)
        .map(|t| {
            let mut s = 0.0;
            for (j, &cj) in c.iter().enumerate() {
                s += cj * eps[t + m - j];
            }
            s
        })
        .collect()
}
