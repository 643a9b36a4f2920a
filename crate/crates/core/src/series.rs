//! Ingestion and alignment of weekly spot/forward quotes, and construction
//! of the two regression designs.
//!
//! The pipeline is CSV -> [`RawQuote`]s -> [`AlignedSeries`] (log levels on
//! a weekly grid) -> [`RegressionSample`] for either design:
//!
//! * Fama: y_t = s_{t+k} - s_t on x_t = f_t - s_t (spot return on forward
//!   premium), null beta = 1;
//! * Hansen-Hodrick: y_t = s_{t+k} - f_t on x_t = s_t - f_{t-k} (forward
//!   forecast error on its own lag), null beta = 0.
//!
//! Quotes are foreign currency per numeraire dollar; no automatic
//! inversion is performed, since silently flipping the quote would flip
//! the sign interpretation of beta.

use std::collections::HashSet;
use std::path::Path;

use chrono::NaiveDate;

use crate::error::{Error, Result};

/// One raw observation: a date and positive spot/forward price levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawQuote {
    pub date: NaiveDate,
    pub spot: f64,
    pub forward: f64,
}

/// Column mapping for [`load_csv`]. Matching is case-insensitive on the
/// trimmed header names.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct CsvSchema {
    pub date: String,
    pub spot: String,
    pub forward: String,
}

impl Default for CsvSchema {
    fn default() -> Self {
        CsvSchema {
            date: "date".into(),
            spot: "spot".into(),
            forward: "forward".into(),
        }
    }
}

/// Which regression the sample implements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Design {
    /// Spot return on forward premium; the parity null is beta = 1.
    Fama,
    /// Forward forecast error on its own k-lag; the null is beta = 0.
    HansenHodrick,
}

impl Design {
    /// Null value of beta under the parity hypothesis.
    pub fn null_beta(&self) -> f64 {
        match self {
            Design::Fama => 1.0,
            Design::HansenHodrick => 0.0,
        }
    }
}

impl std::str::FromStr for Design {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fama" => Ok(Design::Fama),
            "hh" | "hansen-hodrick" | "hansenhodrick" => Ok(Design::HansenHodrick),
            other => Err(Error::InvalidConfig(format!(
                "unknown design {other:?} (expected fama or hh)"
            ))),
        }
    }
}

impl std::fmt::Display for Design {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Design::Fama => write!(f, "fama"),
            Design::HansenHodrick => write!(f, "hh"),
        }
    }
}

/// Log spot/forward series on a weekly grid with a fixed contract horizon
/// `k` measured in sampling periods.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedSeries {
    dates: Vec<NaiveDate>,
    s: Vec<f64>,
    f: Vec<f64>,
    k: usize,
}

impl AlignedSeries {
    /// Assemble from already-logged series. Lengths must agree and the
    /// sample must leave room for estimation (T > k + 2).
    pub fn new(dates: Vec<NaiveDate>, s: Vec<f64>, f: Vec<f64>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidConfig("horizon k must be at least 1".into()));
        }
        if s.len() != f.len() || s.len() != dates.len() {
            return Err(Error::InvalidConfig(
                "dates, spot, and forward series must have equal length".into(),
            ));
        }
        if s.len() < k + 3 {
            return Err(Error::TooFewObservations {
                needed: k + 3,
                got: s.len(),
            });
        }
        Ok(AlignedSeries { dates, s, f, k })
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn log_spot(&self) -> &[f64] {
        &self.s
    }

    pub fn log_forward(&self) -> &[f64] {
        &self.f
    }
}

/// A (y, x) regression pair for one design, carrying the horizon and the
/// dates at which each response is realized.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionSample {
    y: Vec<f64>,
    x: Vec<f64>,
    design: Design,
    k: usize,
    dates: Vec<NaiveDate>,
}

impl RegressionSample {
    /// Build directly from vectors (used by the simulation harness, which
    /// generates regression pairs without going through price levels).
    pub fn from_parts(
        y: Vec<f64>,
        x: Vec<f64>,
        design: Design,
        k: usize,
        dates: Vec<NaiveDate>,
    ) -> Result<Self> {
        if y.len() != x.len() || y.len() != dates.len() {
            return Err(Error::InvalidConfig(
                "y, x, and dates must have equal length".into(),
            ));
        }
        if y.iter().chain(x.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig(
                "regression sample contains non-finite entries".into(),
            ));
        }
        Ok(RegressionSample {
            y,
            x,
            design,
            k,
            dates,
        })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn design(&self) -> Design {
        self.design
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn start_date(&self) -> NaiveDate {
        self.dates[0]
    }

    pub fn end_date(&self) -> NaiveDate {
        *self.dates.last().unwrap()
    }

    /// Contiguous sub-sample over `[start, start + len)`.
    pub fn slice(&self, start: usize, len: usize) -> RegressionSample {
        RegressionSample {
            y: self.y[start..start + len].to_vec(),
            x: self.x[start..start + len].to_vec(),
            design: self.design,
            k: self.k,
            dates: self.dates[start..start + len].to_vec(),
        }
    }
}

fn parse_date(text: &str, line: u64) -> Result<NaiveDate> {
    let text = text.trim();
    NaiveDate::parse_from_str(text, "%Y-%m-%d")
        .or_else(|_| NaiveDate::parse_from_str(text, "%m/%d/%Y"))
        .map_err(|_| Error::MalformedRow {
            line,
            reason: format!("unparseable date {text:?} (expected YYYY-MM-DD or MM/DD/YYYY)"),
        })
}

fn parse_price(text: &str, field: &'static str, line: u64) -> Result<f64> {
    let value: f64 = text.trim().parse().map_err(|_| Error::MalformedRow {
        line,
        reason: format!("unparseable {field} {text:?}"),
    })?;
    if !value.is_finite() || value <= 0.0 {
        return Err(Error::NonPositivePrice { line, field, value });
    }
    Ok(value)
}

/// Load quotes from a headered CSV, resolving columns through `schema`.
///
/// Rows are returned sorted by date; if the file was out of order a
/// warning goes to the diagnostic stream. Duplicate dates, non-positive
/// prices, and malformed rows are hard errors carrying the line number.
pub fn load_csv<P: AsRef<Path>>(path: P, schema: &CsvSchema) -> Result<Vec<RawQuote>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path.as_ref())?;

    let headers = reader
        .headers()
        .map_err(|e| Error::MalformedRow {
            line: 1,
            reason: e.to_string(),
        })?
        .clone();
    let find = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h.trim().eq_ignore_ascii_case(name.trim()))
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let date_col = find(&schema.date)?;
    let spot_col = find(&schema.spot)?;
    let fwd_col = find(&schema.forward)?;

    let mut quotes = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::MalformedRow {
            line: e
                .position()
                .map(|p| p.line())
                .unwrap_or(0),
            reason: e.to_string(),
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let get = |col: usize, name: &str| -> Result<&str> {
            record.get(col).ok_or_else(|| Error::MalformedRow {
                line,
                reason: format!("missing {name} field"),
            })
        };
        let date = parse_date(get(date_col, "date")?, line)?;
        let spot = parse_price(get(spot_col, "spot")?, "spot", line)?;
        let forward = parse_price(get(fwd_col, "forward")?, "forward", line)?;
        quotes.push(RawQuote {
            date,
            spot,
            forward,
        });
    }
    if quotes.is_empty() {
        return Err(Error::EmptyInput);
    }

    let mut seen = HashSet::new();
    for q in &quotes {
        if !seen.insert(q.date) {
            return Err(Error::DuplicateDate(q.date));
        }
    }
    if quotes.windows(2).any(|w| w[0].date > w[1].date) {
        log::warn!("input dates were out of order; sorting by date");
        quotes.sort_by_key(|q| q.date);
    }
    Ok(quotes)
}

/// Log-transform sorted quotes onto the weekly grid.
///
/// Consecutive dates are expected 5-9 calendar days apart (holiday slack);
/// anything else is reported as a warning but the series stays contiguous
/// by index, matching how the weekly index treats market closures.
pub fn align(quotes: &[RawQuote], k: usize) -> Result<AlignedSeries> {
    if quotes.len() < k + 3 {
        return Err(Error::TooFewObservations {
            needed: k + 3,
            got: quotes.len(),
        });
    }
    for w in quotes.windows(2) {
        let gap = (w[1].date - w[0].date).num_days();
        if !(5..=9).contains(&gap) {
            log::warn!(
                "irregular weekly spacing: {} -> {} is {} days",
                w[0].date,
                w[1].date,
                gap
            );
        }
    }
    let dates: Vec<NaiveDate> = quotes.iter().map(|q| q.date).collect();
    let s: Vec<f64> = quotes.iter().map(|q| q.spot.ln()).collect();
    let f: Vec<f64> = quotes.iter().map(|q| q.forward.ln()).collect();
    AlignedSeries::new(dates, s, f, k)
}

/// Construct the regression pair for a design.
///
/// Fama uses T - k pairs; Hansen-Hodrick uses T - 2k because the regressor
/// needs f_{t-k}. Each response is stamped with the date it is realized.
pub fn build_sample(series: &AlignedSeries, design: Design) -> RegressionSample {
    let t_len = series.len();
    let k = series.k();
    let s = series.log_spot();
    let f = series.log_forward();
    let dates = series.dates();

    let (y, x, resp_dates) = match design {
        Design::Fama => {
            let mut y = Vec::with_capacity(t_len - k);
            let mut x = Vec::with_capacity(t_len - k);
            let mut d = Vec::with_capacity(t_len - k);
            for t in 0..t_len - k {
                y.push(s[t + k] - s[t]);
                x.push(f[t] - s[t]);
                d.push(dates[t + k]);
            }
            (y, x, d)
        }
        Design::HansenHodrick => {
            let mut y = Vec::with_capacity(t_len - 2 * k);
            let mut x = Vec::with_capacity(t_len - 2 * k);
            let mut d = Vec::with_capacity(t_len - 2 * k);
            for t in k..t_len - k {
                y.push(s[t + k] - f[t]);
                x.push(s[t] - f[t - k]);
                d.push(dates[t + k]);
            }
            (y, x, d)
        }
    };
    debug_assert!(y.iter().chain(x.iter()).all(|v| v.is_finite()));
    RegressionSample {
        y,
        x,
        design,
        k,
        dates: resp_dates,
    }
}

/// Overlapping contiguous sub-samples of fixed length.
///
/// Starts run 0, step, 2*step, ... while a full window fits, so every
/// admissible start index is covered exactly once.
pub fn rolling_windows(
    sample: &RegressionSample,
    window: usize,
    step: usize,
) -> Result<Vec<RegressionSample>> {
    if window == 0 || step == 0 {
        return Err(Error::InvalidConfig(
            "window and step must be positive".into(),
        ));
    }
    if window > sample.len() {
        return Err(Error::WindowTooLarge {
            window,
            len: sample.len(),
        });
    }
    let mut out = Vec::new();
    let mut start = 0usize;
    while start + window <= sample.len() {
        out.push(sample.slice(start, window));
        start += step;
    }
    Ok(out)
}
