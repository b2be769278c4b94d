//! Raw close ingestion and calendar alignment.
//!
//! Markets close on different days (holidays, Friday/Saturday weekends).
//! Alignment works in three steps:
//!
//! 1. [`shift_weekend`] relabels Sunday observations of Friday/Saturday
//!    markets to the following Monday so their weekend gaps coincide with
//!    everybody else's.
//! 2. [`align`] takes the union of all observation dates, drops every date on
//!    which more than `drop_threshold` of the markets have no observation and
//!    forward-fills the remaining gaps with the last observed close.
//! 3. Optionally, [`phase_east`] pairs western day `t` with eastern day `t+1`.
//!
//! Values are never interpolated.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use chrono::{Datelike, Days, NaiveDate, Weekday};
use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::format::sig9;

pub const DEFAULT_DROP_THRESHOLD: f64 = 0.30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Region {
    NorthAmerica,
    CentralAmericaCaribbean,
    SouthAmerica,
    Europe,
    Eurasia,
    Asia,
    Oceania,
    Africa,
}

impl Region {
    pub const ALL: [Region; 8] = [
        Region::NorthAmerica,
        Region::CentralAmericaCaribbean,
        Region::SouthAmerica,
        Region::Europe,
        Region::Eurasia,
        Region::Asia,
        Region::Oceania,
        Region::Africa,
    ];

    /// Regions that may hold markets flagged as eastern without an override.
    pub fn admits_eastern(self) -> bool {
        matches!(self, Region::Eurasia | Region::Asia | Region::Oceania)
    }
}

fn normalize_token(s: &str) -> String {
    s.chars().filter(|c| c.is_ascii_alphanumeric()).map(|c| c.to_ascii_lowercase()).collect()
}

impl FromStr for Region {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let key = normalize_token(s);
        Region::ALL
            .into_iter()
            .find(|r| normalize_token(&format!("{r:?}")) == key)
            .ok_or_else(|| format!("unknown region {s:?}"))
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Weekend {
    SatSun,
    FriSat,
}

impl FromStr for Weekend {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match normalize_token(s).as_str() {
            "satsun" => Ok(Weekend::SatSun),
            "frisat" => Ok(Weekend::FriSat),
            _ => Err(format!("unknown weekend convention {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarketMeta {
    pub symbol: String,
    pub name: String,
    pub country: String,
    pub region: Region,
    pub weekend: Weekend,
    /// Subject to the next-day phase shift.
    pub eastern: bool,
}

impl MarketMeta {
    /// Western, Saturday/Sunday-weekend market with the symbol reused as its
    /// name. Handy for synthetic panels.
    pub fn plain(symbol: impl Into<String>) -> Self {
        let symbol = symbol.into();
        MarketMeta {
            name: symbol.clone(),
            symbol,
            country: String::new(),
            region: Region::NorthAmerica,
            weekend: Weekend::SatSun,
            eastern: false,
        }
    }
}

/// Checks symbol uniqueness, and unless `allow_any_eastern` is set, that
/// eastern markets sit in Eurasia, Asia or Oceania.
pub fn validate_metadata(markets: &[MarketMeta], allow_any_eastern: bool) -> Result<()> {
    let mut seen = BTreeSet::new();
    for m in markets {
        if m.symbol.is_empty() {
            return Err(Error::InvalidMetadata("empty symbol".into()));
        }
        if !seen.insert(m.symbol.as_str()) {
            return Err(Error::InvalidMetadata(format!("duplicate symbol {}", m.symbol)));
        }
        if m.eastern && !allow_any_eastern && !m.region.admits_eastern() {
            return Err(Error::InvalidMetadata(format!(
                "{} is flagged eastern but lies in region {}",
                m.symbol, m.region
            )));
        }
    }
    Ok(())
}

fn parse_bool(s: &str) -> Option<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" | "y" => Some(true),
        "false" | "0" | "no" | "n" | "" => Some(false),
        _ => None,
    }
}

fn check_header(rdr: &mut csv::Reader<impl Read>, expected: &[&str]) -> Result<()> {
    let header: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    if header.len() != expected.len() || header.iter().zip(expected).any(|(a, b)| a != b) {
        return Err(Error::MalformedRow {
            line: 1,
            message: format!("expected header {:?}, found {:?}", expected.join(","), header.join(",")),
        });
    }
    Ok(())
}

fn record_line(rec: &csv::StringRecord) -> usize {
    rec.position().map(|p| p.line() as usize).unwrap_or(0)
}

/// Parse a metadata CSV with header `symbol,name,country,region,weekend,eastern`.
pub fn parse_metadata<R: Read>(input: R, allow_any_eastern: bool) -> Result<Vec<MarketMeta>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    check_header(&mut rdr, &["symbol", "name", "country", "region", "weekend", "eastern"])?;
    let mut markets = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = record_line(&rec);
        let bad = |message: String| Error::MalformedRow { line, message };
        if rec.len() != 6 {
            return Err(bad(format!("expected 6 fields, found {}", rec.len())));
        }
        let region = rec[3].parse::<Region>().map_err(bad)?;
        let weekend = rec[4].parse::<Weekend>().map_err(bad)?;
        let eastern = parse_bool(&rec[5]).ok_or_else(|| bad(format!("invalid eastern flag {:?}", &rec[5])))?;
        markets.push(MarketMeta {
            symbol: rec[0].to_string(),
            name: rec[1].to_string(),
            country: rec[2].to_string(),
            region,
            weekend,
            eastern,
        });
    }
    validate_metadata(&markets, allow_any_eastern)?;
    Ok(markets)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub date: NaiveDate,
    pub close: f64,
}

/// Per-market dated close series.
#[derive(Debug, Clone, PartialEq)]
pub struct PricePanel {
    pub markets: Vec<MarketMeta>,
    /// One series per market, dates strictly increasing.
    pub series: Vec<Vec<Observation>>,
}

impl PricePanel {
    pub fn new(markets: Vec<MarketMeta>, series: Vec<Vec<Observation>>) -> Result<Self> {
        if markets.len() != series.len() {
            return Err(Error::DimensionMismatch(format!("{} markets but {} series", markets.len(), series.len())));
        }
        validate_metadata(&markets, true)?;
        for (m, s) in markets.iter().zip(&series) {
            if s.windows(2).any(|w| w[0].date >= w[1].date) {
                return Err(Error::InvalidArgument(format!("dates of {} are not strictly increasing", m.symbol)));
            }
            if let Some(o) = s.iter().find(|o| !(o.close > 0.0) || !o.close.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "non-positive close {} for {} on {}",
                    o.close, m.symbol, o.date
                )));
            }
        }
        Ok(PricePanel { markets, series })
    }

    pub fn n_markets(&self) -> usize {
        self.markets.len()
    }
}

/// Parse a price CSV with header `date,symbol,close` against known markets.
/// Every declared market gets a series (possibly empty); rows may come in
/// any order.
pub fn parse_prices<R: Read>(input: R, markets: &[MarketMeta]) -> Result<PricePanel> {
    let index: HashMap<&str, usize> = markets.iter().enumerate().map(|(i, m)| (m.symbol.as_str(), i)).collect();
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    check_header(&mut rdr, &["date", "symbol", "close"])?;

    let mut rows: Vec<BTreeMap<NaiveDate, (f64, usize)>> = vec![BTreeMap::new(); markets.len()];
    for rec in rdr.records() {
        let rec = rec?;
        let line = record_line(&rec);
        let bad = |message: String| Error::MalformedRow { line, message };
        if rec.len() != 3 {
            return Err(bad(format!("expected 3 fields, found {}", rec.len())));
        }
        let date = NaiveDate::parse_from_str(&rec[0], "%Y-%m-%d")
            .map_err(|e| bad(format!("invalid date {:?}: {e}", &rec[0])))?;
        let symbol = &rec[1];
        let &col = index.get(symbol).ok_or_else(|| Error::UnknownSymbol { line, symbol: symbol.to_string() })?;
        let close: f64 = rec[2].parse().map_err(|_| bad(format!("non-numeric close {:?}", &rec[2])))?;
        if !close.is_finite() {
            return Err(bad(format!("non-numeric close {:?}", &rec[2])));
        }
        if close <= 0.0 {
            return Err(Error::NonPositiveClose { line, symbol: symbol.to_string(), close });
        }
        if let Some(&(_, first_line)) = rows[col].get(&date) {
            return Err(Error::DuplicateObservation {
                symbol: symbol.to_string(),
                date,
                first_line,
                second_line: line,
            });
        }
        rows[col].insert(date, (close, line));
    }
    let series = rows
        .into_iter()
        .map(|m| m.into_iter().map(|(date, (close, _))| Observation { date, close }).collect())
        .collect();
    PricePanel::new(markets.to_vec(), series)
}

/// Non-fatal event raised while transforming a panel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IngestWarning {
    pub symbol: String,
    pub date: NaiveDate,
    pub message: String,
}

/// Relabel each Sunday observation of a Friday/Saturday-weekend market to the
/// following Monday. When the Monday already holds an observation, the
/// Monday value wins and a warning names the date.
pub fn shift_weekend(panel: &PricePanel) -> (PricePanel, Vec<IngestWarning>) {
    let mut warnings = Vec::new();
    let series = panel
        .markets
        .iter()
        .zip(&panel.series)
        .map(|(meta, obs)| {
            if meta.weekend == Weekend::SatSun {
                return obs.clone();
            }
            let mut shifted: BTreeMap<NaiveDate, (f64, NaiveDate)> = BTreeMap::new();
            for o in obs {
                let target = if o.date.weekday() == Weekday::Sun { o.date + Days::new(1) } else { o.date };
                match shifted.get(&target).copied() {
                    Some((_, orig)) => {
                        warnings.push(collision(meta, orig.min(o.date), target));
                        // keep the value whose original date is later
                        if o.date > orig {
                            shifted.insert(target, (o.close, o.date));
                        }
                    }
                    None => {
                        shifted.insert(target, (o.close, o.date));
                    }
                }
            }
            shifted.into_iter().map(|(date, (close, _))| Observation { date, close }).collect()
        })
        .collect();
    (PricePanel { markets: panel.markets.clone(), series }, warnings)
}

fn collision(meta: &MarketMeta, sunday: NaiveDate, monday: NaiveDate) -> IngestWarning {
    IngestWarning {
        symbol: meta.symbol.clone(),
        date: monday,
        message: format!("Sunday {sunday} collides with an existing {monday} observation; kept {monday}"),
    }
}

/// Rectangular date x market grid of closes.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedPanel {
    pub dates: Vec<NaiveDate>,
    pub markets: Vec<MarketMeta>,
    /// D x N closes.
    pub values: DMatrix<f64>,
    /// D x N, true where the value was carried over from another day.
    pub fill_mask: DMatrix<bool>,
    pub dropped_dates: Vec<NaiveDate>,
    pub phased: bool,
}

impl AlignedPanel {
    pub fn n_dates(&self) -> usize {
        self.dates.len()
    }

    pub fn n_markets(&self) -> usize {
        self.markets.len()
    }

    pub fn symbols(&self) -> Vec<String> {
        self.markets.iter().map(|m| m.symbol.clone()).collect()
    }

    /// Observed (unfilled) cells as a price panel.
    pub fn to_price_panel(&self) -> PricePanel {
        let series = (0..self.n_markets())
            .map(|j| {
                (0..self.n_dates())
                    .filter(|&t| !self.fill_mask[(t, j)])
                    .map(|t| Observation { date: self.dates[t], close: self.values[(t, j)] })
                    .collect()
            })
            .collect();
        PricePanel { markets: self.markets.clone(), series }
    }

    /// Write `date,<sym1>,...` closes and the sibling 0/1 fill mask.
    pub fn write_csv<W: Write, M: Write>(&self, values: W, mask: M) -> Result<()> {
        let mut vw = csv::Writer::from_writer(values);
        let mut mw = csv::Writer::from_writer(mask);
        let mut header = vec!["date".to_string()];
        header.extend(self.symbols());
        vw.write_record(&header)?;
        mw.write_record(&header)?;
        for (t, date) in self.dates.iter().enumerate() {
            let d = date.to_string();
            let row = self.values.row(t);
            vw.write_record(std::iter::once(d.clone()).chain(row.iter().map(|&v| sig9(v))))?;
            let mrow = self.fill_mask.row(t);
            mw.write_record(std::iter::once(d).chain(mrow.iter().map(|&f| if f { "1" } else { "0" }.to_string())))?;
        }
        vw.flush()?;
        mw.flush()?;
        Ok(())
    }
}

/// Merge calendars under the drop rule and forward-fill what remains.
///
/// A date is dropped iff the fraction of markets without an observation on
/// it is strictly greater than `drop_threshold`. Gaps on retained dates are
/// filled with the last close observed on a retained date; leading gaps are
/// back-filled with the market's first retained observation. All filled
/// cells are flagged in `fill_mask`.
pub fn align(panel: &PricePanel, drop_threshold: f64) -> Result<AlignedPanel> {
    if !(0.0..=1.0).contains(&drop_threshold) {
        return Err(Error::InvalidArgument(format!("drop threshold {drop_threshold} outside [0, 1]")));
    }
    let n = panel.n_markets();
    if n == 0 {
        return Err(Error::EmptyCalendar);
    }
    if let Some((m, _)) = panel.markets.iter().zip(&panel.series).find(|(_, s)| s.is_empty()) {
        return Err(Error::NoObservations { symbol: m.symbol.clone() });
    }

    let mut observed_count: BTreeMap<NaiveDate, usize> = BTreeMap::new();
    for s in &panel.series {
        for o in s {
            *observed_count.entry(o.date).or_default() += 1;
        }
    }
    if observed_count.is_empty() {
        return Err(Error::EmptyCalendar);
    }

    let mut dates = Vec::new();
    let mut dropped_dates = Vec::new();
    for (&date, &count) in &observed_count {
        let missing = (n - count) as f64 / n as f64;
        if missing > drop_threshold {
            dropped_dates.push(date);
        } else {
            dates.push(date);
        }
    }
    if dates.is_empty() {
        return Err(Error::EmptyCalendar);
    }

    let d = dates.len();
    let mut values = DMatrix::<f64>::zeros(d, n);
    let mut fill_mask = DMatrix::<bool>::from_element(d, n, false);
    for (j, s) in panel.series.iter().enumerate() {
        let by_date: HashMap<NaiveDate, f64> = s.iter().map(|o| (o.date, o.close)).collect();
        let mut last: Option<f64> = None;
        let mut leading = 0;
        for (t, date) in dates.iter().enumerate() {
            match by_date.get(date) {
                Some(&close) => {
                    if last.is_none() {
                        for k in 0..leading {
                            values[(k, j)] = close;
                        }
                    }
                    values[(t, j)] = close;
                    last = Some(close);
                }
                None => {
                    fill_mask[(t, j)] = true;
                    match last {
                        Some(v) => values[(t, j)] = v,
                        None => leading += 1,
                    }
                }
            }
        }
        if last.is_none() {
            return Err(Error::NoObservations { symbol: panel.markets[j].symbol.clone() });
        }
    }

    Ok(AlignedPanel { dates, markets: panel.markets.clone(), values, fill_mask, dropped_dates, phased: false })
}

/// Re-apply [`align`] to an already aligned panel, treating filled cells as
/// missing and carrying over the previously dropped dates.
pub fn realign(panel: &AlignedPanel, drop_threshold: f64) -> Result<AlignedPanel> {
    let mut out = align(&panel.to_price_panel(), drop_threshold)?;
    let dropped: BTreeSet<NaiveDate> = panel.dropped_dates.iter().chain(&out.dropped_dates).copied().collect();
    out.dropped_dates = dropped.into_iter().collect();
    out.phased = panel.phased;
    Ok(out)
}

/// Shift eastern columns one row up so that row `t` pairs western day `t`
/// with eastern day `t + 1`. The last row has no eastern partner and is
/// removed.
pub fn phase_east(panel: &AlignedPanel) -> Result<AlignedPanel> {
    if panel.phased {
        return Err(Error::AlreadyPhased);
    }
    let d = panel.n_dates();
    if d < 2 {
        return Err(Error::TooFewRows { needed: 2, got: d });
    }
    let n = panel.n_markets();
    let mut values = DMatrix::<f64>::zeros(d - 1, n);
    let mut fill_mask = DMatrix::<bool>::from_element(d - 1, n, false);
    for (j, m) in panel.markets.iter().enumerate() {
        let offset = usize::from(m.eastern);
        for t in 0..d - 1 {
            values[(t, j)] = panel.values[(t + offset, j)];
            fill_mask[(t, j)] = panel.fill_mask[(t + offset, j)];
        }
    }
    Ok(AlignedPanel {
        dates: panel.dates[..d - 1].to_vec(),
        markets: panel.markets.clone(),
        values,
        fill_mask,
        dropped_dates: panel.dropped_dates.clone(),
        phased: true,
    })
}
