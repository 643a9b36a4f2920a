//! Property-based invariants over the data pipeline and filter algebra.

use proptest::prelude::*;

use uipdyn::maproc::{invert, MaPolynomial};
use uipdyn::series::{align, build_sample, rolling_windows, Design, RawQuote};

fn quotes_strategy() -> impl Strategy<Value = Vec<RawQuote>> {
    // Positive prices on a weekly grid, enough rows for k = 4.
    prop::collection::vec((0.5f64..5.0, 0.5f64..5.0), 16..60).prop_map(|prices| {
        let d0 = chrono::NaiveDate::from_ymd_opt(1989, 1, 5).unwrap();
        prices
            .into_iter()
            .enumerate()
            .map(|(i, (spot, forward))| RawQuote {
                date: d0 + chrono::Duration::days(7 * i as i64),
                spot,
                forward,
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn sample_construction_round_trips(quotes in quotes_strategy()) {
        let series = align(&quotes, 4).unwrap();
        let fama = build_sample(&series, Design::Fama);
        let hh = build_sample(&series, Design::HansenHodrick);
        let s = series.log_spot();
        let k = series.k();

        // Fama responses reproduce the spot differences exactly, and the
        // regressor plus log spot reproduces the log forward.
        for (t, (&y, &x)) in fama.y().iter().zip(fama.x()).enumerate() {
            prop_assert!((y - (s[t + k] - s[t])).abs() < 1e-12);
            prop_assert!((x + s[t] - series.log_forward()[t]).abs() < 1e-12);
        }
        // The two designs agree on the overlap: y_hh = y_fama - x_fama.
        for i in 0..hh.len() {
            prop_assert!((hh.y()[i] - (fama.y()[i + k] - fama.x()[i + k])).abs() < 1e-12);
        }
    }

    #[test]
    fn rolling_starts_cover_each_admissible_index_once(
        quotes in quotes_strategy(),
        window in 4usize..20,
        step in 1usize..5,
    ) {
        let series = align(&quotes, 4).unwrap();
        let sample = build_sample(&series, Design::Fama);
        prop_assume!(window <= sample.len());
        let windows = rolling_windows(&sample, window, step).unwrap();
        // Starts form the arithmetic sequence 0, step, ... and every
        // admissible start below the last one appears exactly once.
        let expected = (sample.len() - window) / step + 1;
        prop_assert_eq!(windows.len(), expected);
        for (i, w) in windows.iter().enumerate() {
            prop_assert_eq!(w.len(), window);
            prop_assert_eq!(w.dates()[0], sample.dates()[i * step]);
        }
    }

    #[test]
    fn filter_inverts_its_polynomial(c1 in -0.7f64..0.7, c2 in -0.4f64..0.4) {
        let theta = match MaPolynomial::from_lag_coeffs(&[c1, c2], 1.0) {
            Ok(t) => t,
            Err(_) => return Ok(()), // non-invertible draw
        };
        let filt = invert(&theta, 1e-8).unwrap();
        let b = filt.weights();
        let c = theta.coeffs();
        for j in 1..=filt.truncation_p() {
            let mut s = 0.0;
            for i in 0..=j.min(theta.order()) {
                s += c[i] * b[j - i];
            }
            prop_assert!(s.abs() < 1e-10, "lag {} residue {}", j, s);
        }
    }
}
