//! Daily closing-price panels.
//!
//! Long format has the columns `date,ticker,close` (any order); any other
//! header is read as wide format with the date in the first column and one
//! column per ticker. Dates are ISO `YYYY-MM-DD`.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use chrono::NaiveDate;

use crate::error::{CliError, Result};
use crate::matrix::csv_error;

/// Tickers sorted by name, dates strictly increasing, `close[ticker][date]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PricePanel {
    pub tickers: Vec<String>,
    pub dates: Vec<NaiveDate>,
    pub close: Vec<Vec<Option<f64>>>,
}

impl PricePanel {
    pub fn ticker_index(&self, ticker: &str) -> Option<usize> {
        self.tickers.iter().position(|t| t == ticker)
    }
}

struct Ctx<'a> {
    path: &'a str,
}

impl Ctx<'_> {
    fn err(&self, line: u64, msg: impl Into<String>) -> CliError {
        CliError::Parse {
            path: self.path.to_string(),
            line,
            msg: msg.into(),
        }
    }

    fn date(&self, line: u64, s: &str) -> Result<NaiveDate> {
        NaiveDate::parse_from_str(s, "%Y-%m-%d")
            .map_err(|_| self.err(line, format!("bad date '{s}'")))
    }

    fn price(&self, line: u64, s: &str) -> Result<f64> {
        let v: f64 = s
            .parse()
            .map_err(|_| self.err(line, format!("bad price '{s}'")))?;
        if !(v > 0.0) || !v.is_finite() {
            return Err(self.err(line, format!("price must be positive and finite, got {s}")));
        }
        Ok(v)
    }
}

pub fn load_price_panel(path: &Path) -> Result<PricePanel> {
    let name = path.display().to_string();
    let ctx = Ctx { path: &name };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(&name, e))?;
    let mut records = Vec::new();
    for r in reader.records() {
        let r = r.map_err(|e| csv_error(&name, e))?;
        let line = r.position().map_or(0, |p| p.line());
        if !r.iter().all(str::is_empty) {
            records.push((line, r));
        }
    }
    let Some(((_, header), body)) = records.split_first() else {
        return Err(CliError::NoRows(name));
    };
    if body.is_empty() {
        return Err(CliError::NoRows(name));
    }
    let cols: Vec<String> = header.iter().map(|h| h.to_ascii_lowercase()).collect();
    let find = |k: &str| cols.iter().position(|c| c == k);
    let mut cells: BTreeMap<(NaiveDate, String), f64> = BTreeMap::new();
    match (find("date"), find("ticker"), find("close")) {
        (Some(di), Some(ti), Some(ci)) if cols.len() == 3 => {
            for (line, r) in body {
                if r.len() != 3 {
                    return Err(ctx.err(*line, format!("expected 3 fields, found {}", r.len())));
                }
                let key = (ctx.date(*line, &r[di])?, r[ti].to_string());
                if key.1.is_empty() {
                    return Err(ctx.err(*line, "empty ticker"));
                }
                let v = ctx.price(*line, &r[ci])?;
                if cells.insert(key.clone(), v).is_some() {
                    return Err(ctx.err(*line, format!("duplicate row for {} on {}", key.1, key.0)));
                }
            }
        }
        _ => {
            let tickers: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
            if tickers.is_empty() || tickers.iter().any(String::is_empty) {
                return Err(ctx.err(
                    1,
                    "wide format needs a date column followed by named ticker columns",
                ));
            }
            if tickers.iter().collect::<BTreeSet<_>>().len() != tickers.len() {
                return Err(ctx.err(1, "duplicate ticker column"));
            }
            let mut seen = BTreeSet::new();
            for (line, r) in body {
                if r.len() != tickers.len() + 1 {
                    return Err(ctx.err(
                        *line,
                        format!("expected {} fields, found {}", tickers.len() + 1, r.len()),
                    ));
                }
                let d = ctx.date(*line, &r[0])?;
                if !seen.insert(d) {
                    return Err(ctx.err(*line, format!("duplicate date {d}")));
                }
                for (t, s) in tickers.iter().zip(r.iter().skip(1)) {
                    if !s.is_empty() {
                        cells.insert((d, t.clone()), ctx.price(*line, s)?);
                    }
                }
            }
        }
    }
    let dates: Vec<NaiveDate> = cells
        .keys()
        .map(|k| k.0)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let tickers: Vec<String> = cells
        .keys()
        .map(|k| k.1.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let close = tickers
        .iter()
        .map(|t| {
            dates
                .iter()
                .map(|d| cells.get(&(*d, t.clone())).copied())
                .collect()
        })
        .collect();
    Ok(PricePanel {
        tickers,
        dates,
        close,
    })
}

/// Number of observations needed for `n` samples `stride` apart starting
/// at the 1-based position `start`.
pub fn required_length(n: usize, stride: usize, start: usize) -> usize {
    start + stride * n.saturating_sub(1)
}

/// `x_k = s[start - 1 + k·stride]`, `k = 0..n`, before standardization.
pub fn subsample_series(
    panel: &PricePanel,
    ticker: &str,
    n: usize,
    stride: usize,
    start: usize,
) -> Result<Vec<f64>> {
    let idx = panel
        .ticker_index(ticker)
        .ok_or_else(|| CliError::Usage(format!("ticker {ticker} is not in the panel")))?;
    let series = &panel.close[idx];
    let needed = required_length(n, stride, start);
    if series.len() < needed || start == 0 {
        return Err(CliError::SeriesTooShort {
            ticker: ticker.to_string(),
            needed,
            got: series.len(),
        });
    }
    (0..n)
        .map(|k| {
            let pos = start - 1 + k * stride;
            series[pos].ok_or_else(|| {
                CliError::Usage(format!("{ticker} has no price on {}", panel.dates[pos]))
            })
        })
        .collect()
}

/// Tickers with prices at every sampled position.
pub fn usable_tickers(panel: &PricePanel, n: usize, stride: usize, start: usize) -> Vec<usize> {
    (0..panel.tickers.len())
        .filter(|&i| subsample_series(panel, &panel.tickers[i], n, stride, start).is_ok())
        .collect()
}
