//! Independent oracles for the integration and acceptance suites.
//!
//! Everything here deliberately avoids the code paths it is used to
//! check: least squares is re-solved through extended-precision normal
//! equations, MA factorization through the innovations-algorithm fixed
//! point, and the Student-t distribution through direct quadrature.

#![allow(dead_code)]

/// Double-double number: an unevaluated sum hi + lo with |lo| <= ulp(hi).
#[derive(Debug, Clone, Copy)]
pub struct Dd {
    hi: f64,
    lo: f64,
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    pub fn from_f64(v: f64) -> Dd {
        Dd { hi: v, lo: 0.0 }
    }

    pub fn value(self) -> f64 {
        self.hi + self.lo
    }

    pub fn add(self, other: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, other.hi);
        let (t1, t2) = two_sum(self.lo, other.lo);
        let s2 = s2 + t1;
        let (s1, s2) = quick_two_sum(s1, s2);
        let s2 = s2 + t2;
        let (hi, lo) = quick_two_sum(s1, s2);
        Dd { hi, lo }
    }

    pub fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    pub fn sub(self, other: Dd) -> Dd {
        self.add(other.neg())
    }

    pub fn mul(self, other: Dd) -> Dd {
        let (p1, p2) = two_prod(self.hi, other.hi);
        let p2 = p2 + self.hi * other.lo + self.lo * other.hi;
        let (hi, lo) = quick_two_sum(p1, p2);
        Dd { hi, lo }
    }

    pub fn div(self, other: Dd) -> Dd {
        let q1 = self.hi / other.hi;
        let r = self.sub(other.mul(Dd::from_f64(q1)));
        let q2 = r.hi / other.hi;
        let r2 = r.sub(other.mul(Dd::from_f64(q2)));
        let q3 = r2.hi / other.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        let (hi, lo2) = quick_two_sum(hi, lo + q3);
        Dd { hi, lo: lo2 }
    }

    pub fn abs(self) -> Dd {
        if self.hi < 0.0 {
            self.neg()
        } else {
            self
        }
    }
}

/// Solve the least-squares problem through the normal equations in
/// double-double arithmetic: A = X'X, b = X'y accumulated exactly, then
/// Gaussian elimination with partial pivoting in double-double.
pub fn normal_equations_dd(x: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let m = x[0].len();
    assert_eq!(n, y.len());
    let mut a = vec![vec![Dd::ZERO; m + 1]; m];
    for i in 0..m {
        for j in 0..m {
            let mut acc = Dd::ZERO;
            for t in 0..n {
                let (p, e) = two_prod(x[t][i], x[t][j]);
                acc = acc.add(Dd { hi: p, lo: e });
            }
            a[i][j] = acc;
        }
        let mut acc = Dd::ZERO;
        for t in 0..n {
            let (p, e) = two_prod(x[t][i], y[t]);
            acc = acc.add(Dd { hi: p, lo: e });
        }
        a[i][m] = acc;
    }

    for col in 0..m {
        let mut pivot = col;
        for row in (col + 1)..m {
            if a[row][col].abs().value() > a[pivot][col].abs().value() {
                pivot = row;
            }
        }
        a.swap(col, pivot);
        assert!(a[col][col].value() != 0.0, "singular normal equations");
        for row in (col + 1)..m {
            let factor = a[row][col].div(a[col][col]);
            for j in col..=m {
                a[row][j] = a[row][j].sub(factor.mul(a[col][j]));
            }
        }
    }

    let mut coef = vec![Dd::ZERO; m];
    for row in (0..m).rev() {
        let mut s = a[row][m];
        for j in (row + 1)..m {
            s = s.sub(a[row][j].mul(coef[j]));
        }
        coef[row] = s.div(a[row][row]);
    }
    coef.into_iter().map(|c| c.value()).collect()
}

/// Innovations-algorithm fixed point: recover the MA(m) coefficients and
/// innovation variance from autocovariances gamma_0..gamma_m.
///
/// Iterates the innovations recursion until the last-row coefficients
/// stabilize; for an invertible process the row converges to the MA
/// coefficients and v_n to sigma^2.
pub fn innovations_ma(gammas: &[f64], m: usize, iterations: usize) -> (Vec<f64>, f64) {
    assert!(gammas.len() >= m + 1);
    let gamma = |h: usize| -> f64 {
        if h <= m {
            gammas[h]
        } else {
            0.0
        }
    };
    let n_max = iterations.max(m + 2);
    let mut v = vec![0.0f64; n_max + 1];
    // theta[n][j] multiplies the innovation j steps back (j = 1..=n).
    let mut theta = vec![vec![0.0f64; n_max + 1]; n_max + 1];
    v[0] = gamma(0);
    for n in 1..=n_max {
        for k in 0..n {
            let mut s = gamma(n - k);
            for j in 0..k {
                s -= theta[k][k - j] * theta[n][n - j] * v[j];
            }
            theta[n][n - k] = s / v[k];
        }
        let mut vn = gamma(0);
        for j in 0..n {
            vn -= theta[n][n - j] * theta[n][n - j] * v[j];
        }
        v[n] = vn;
    }
    let coeffs: Vec<f64> = (1..=m).map(|j| theta[n_max][j]).collect();
    (coeffs, v[n_max])
}

fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, n: usize) -> f64 {
    let n = if n % 2 == 0 { n } else { n + 1 };
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Student-t CDF by quadrature. Substituting u = sqrt(df) tan(phi) turns
/// the density integral into int cos^{df-1}(phi) d phi over a finite
/// range, normalized by the same integral over the full half-circle; no
/// gamma functions are involved.
pub fn student_t_cdf_quadrature(x: f64, df: f64) -> f64 {
    let half = std::f64::consts::FRAC_PI_2;
    let g = |phi: f64| phi.cos().powf(df - 1.0);
    let total = simpson(&g, -half, half, 20_000);
    let upper = (x / df.sqrt()).atan();
    let part = simpson(&g, -half, upper, 20_000);
    part / total
}

/// Kolmogorov-Smirnov distance between a sample and a reference CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(sample: &mut Vec<f64>, cdf: F) -> f64 {
    sample.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sample.len() as f64;
    let mut d = 0.0f64;
    for (i, &v) in sample.iter().enumerate() {
        let f = cdf(v);
        let hi = (i + 1) as f64 / n - f;
        let lo = f - i as f64 / n;
        d = d.max(hi).max(lo);
    }
    d
}
