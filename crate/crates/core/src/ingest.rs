// SPDX-License-Identifier: MIT OR Apache-2.0

//! Per-minute OHLC bars to the daily W series.
//!
//! For each UTC day: `W = (close - open) / (mean(high) - mean(low))`, where
//! `open` is the open of the 00:00 bar, `close` the close of the 23:59 bar,
//! and the means run over every bar of the day. Missing boundary minutes
//! fall back to the earliest/latest bar and are flagged. Days whose average
//! range is zero are dropped and reported.

use std::io::{Read, Write};

use chrono::{DateTime, Datelike, NaiveDate, NaiveDateTime, Timelike, Utc};
use serde::Serialize;

use crate::error::{CpError, Result};
use crate::fmt::sig9;
use crate::model::Series;

/// One minute of price data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MinuteBar {
    pub timestamp: DateTime<Utc>,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
}

impl MinuteBar {
    pub fn new(
        timestamp: DateTime<Utc>,
        open: f64,
        high: f64,
        low: f64,
        close: f64,
    ) -> Result<Self> {
        let prices = [open, high, low, close];
        if prices.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
            return Err(CpError::invalid(format!(
                "{timestamp}: prices must be positive"
            )));
        }
        if !(low <= open.min(close) && open.max(close) <= high) {
            return Err(CpError::invalid(format!(
                "{timestamp}: need low <= open, close <= high"
            )));
        }
        Ok(Self {
            timestamp,
            open,
            high,
            low,
            close,
        })
    }

    pub fn date(&self) -> NaiveDate {
        self.timestamp.date_naive()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DailyW {
    pub date: NaiveDate,
    pub w: f64,
}

/// Bookkeeping for one calendar day seen in the input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DayQuality {
    pub date: NaiveDate,
    pub minutes: usize,
    /// The 00:00 bar was missing; the earliest bar supplied the open.
    pub open_fallback: bool,
    /// The 23:59 bar was missing; the latest bar supplied the close.
    pub close_fallback: bool,
    pub dropped: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct DailyWSeries {
    pub days: Vec<DailyW>,
    pub quality: Vec<DayQuality>,
}

impl DailyWSeries {
    pub fn dropped(&self) -> usize {
        self.quality.iter().filter(|q| q.dropped).count()
    }

    pub fn flagged(&self) -> usize {
        self.quality
            .iter()
            .filter(|q| q.open_fallback || q.close_fallback)
            .count()
    }

    /// Writes `date,w` rows with a header.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_w_csv(&self.days, out)
    }
}

pub fn write_w_csv<W: Write>(days: &[DailyW], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| CpError::Io(e.to_string());
    w.write_record(["date", "w"]).map_err(io)?;
    for d in days {
        w.write_record([d.date.format("%Y-%m-%d").to_string(), sig9(d.w)])
            .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy)]
struct DayAccumulator {
    date: NaiveDate,
    open: f64,
    open_minute: u32,
    close: f64,
    close_minute: u32,
    high_sum: f64,
    low_sum: f64,
    minutes: usize,
}

impl DayAccumulator {
    fn start(bar: &MinuteBar) -> Self {
        let minute = minute_of_day(bar);
        Self {
            date: bar.date(),
            open: bar.open,
            open_minute: minute,
            close: bar.close,
            close_minute: minute,
            high_sum: bar.high,
            low_sum: bar.low,
            minutes: 1,
        }
    }

    fn push(&mut self, bar: &MinuteBar) {
        self.close = bar.close;
        self.close_minute = minute_of_day(bar);
        self.high_sum += bar.high;
        self.low_sum += bar.low;
        self.minutes += 1;
    }

    fn finish(self) -> (Option<DailyW>, DayQuality) {
        let m = self.minutes as f64;
        let range = self.high_sum / m - self.low_sum / m;
        let dropped = !(range > 0.0);
        let quality = DayQuality {
            date: self.date,
            minutes: self.minutes,
            open_fallback: self.open_minute != 0,
            close_fallback: self.close_minute != LAST_MINUTE,
            dropped,
        };
        let day = (!dropped).then(|| DailyW {
            date: self.date,
            w: (self.close - self.open) / range,
        });
        (day, quality)
    }
}

const LAST_MINUTE: u32 = 23 * 60 + 59;

fn minute_of_day(bar: &MinuteBar) -> u32 {
    bar.timestamp.hour() * 60 + bar.timestamp.minute()
}

/// Streaming day-by-day aggregation; feed bars in strictly increasing time.
#[derive(Debug, Clone, Default)]
pub struct DailyAggregator {
    range: Option<(NaiveDate, NaiveDate)>,
    last: Option<DateTime<Utc>>,
    current: Option<DayAccumulator>,
    out: DailyWSeries,
    seen: usize,
}

impl DailyAggregator {
    /// Keeps only days in the inclusive `range` when given.
    pub fn new(range: Option<(NaiveDate, NaiveDate)>) -> Self {
        Self {
            range,
            ..Self::default()
        }
    }

    pub fn push(&mut self, bar: &MinuteBar) -> Result<()> {
        if let Some(prev) = self.last {
            if bar.timestamp <= prev {
                return Err(CpError::UnsortedInput);
            }
        }
        self.last = Some(bar.timestamp);
        self.seen += 1;
        let date = bar.date();
        if let Some((from, to)) = self.range {
            if date < from || date > to {
                return Ok(());
            }
        }
        match &mut self.current {
            Some(acc) if acc.date == date => acc.push(bar),
            _ => {
                self.flush_day();
                self.current = Some(DayAccumulator::start(bar));
            }
        }
        Ok(())
    }

    fn flush_day(&mut self) {
        if let Some(acc) = self.current.take() {
            let (day, quality) = acc.finish();
            self.out.days.extend(day);
            self.out.quality.push(quality);
        }
    }

    pub fn finish(mut self) -> Result<DailyWSeries> {
        if self.seen == 0 {
            return Err(CpError::NoData);
        }
        self.flush_day();
        Ok(self.out)
    }
}

/// Daily W values from bars sorted by time.
pub fn daily_w_series(
    bars: &[MinuteBar],
    date_range: Option<(NaiveDate, NaiveDate)>,
) -> Result<DailyWSeries> {
    let mut agg = DailyAggregator::new(date_range);
    for bar in bars {
        agg.push(bar)?;
    }
    agg.finish()
}

/// One calendar year of W values as a series with plug-in scale.
#[derive(Debug, Clone, PartialEq)]
pub struct YearSlice {
    pub year: i32,
    pub dates: Vec<NaiveDate>,
    pub series: Series,
    /// Calendar dates of the year with no retained W value.
    pub gaps: Vec<NaiveDate>,
}

pub fn yearly_slice(days: &[DailyW], year: i32) -> Result<YearSlice> {
    let picked: Vec<&DailyW> = days.iter().filter(|d| d.date.year() == year).collect();
    if picked.is_empty() {
        return Err(CpError::EmptySlice);
    }
    let dates: Vec<NaiveDate> = picked.iter().map(|d| d.date).collect();
    let values = picked.iter().map(|d| d.w).collect();
    let series = Series::unscaled(values)?;

    let first = NaiveDate::from_ymd_opt(year, 1, 1).ok_or(CpError::EmptySlice)?;
    let gaps = first
        .iter_days()
        .take_while(|d| d.year() == year)
        .filter(|d| dates.binary_search(d).is_err())
        .collect();
    Ok(YearSlice {
        year,
        dates,
        series,
        gaps,
    })
}

fn parse_timestamp(
    unix: Option<&str>,
    date: Option<&str>,
) -> std::result::Result<DateTime<Utc>, String> {
    if let Some(raw) = unix.map(str::trim).filter(|s| !s.is_empty()) {
        let value: f64 = raw
            .parse()
            .map_err(|_| format!("bad unix timestamp {raw:?}"))?;
        // Some feeds switch to milliseconds part-way through.
        let secs = if value.abs() >= 1e11 {
            value / 1000.0
        } else {
            value
        };
        return DateTime::from_timestamp(secs.floor() as i64, 0)
            .ok_or_else(|| format!("unix timestamp {raw} out of range"));
    }
    if let Some(raw) = date.map(str::trim).filter(|s| !s.is_empty()) {
        for pattern in ["%Y-%m-%d %H:%M:%S", "%Y-%m-%d %H:%M", "%Y-%m-%dT%H:%M:%S"] {
            if let Ok(t) = NaiveDateTime::parse_from_str(raw, pattern) {
                return Ok(t.and_utc());
            }
        }
        return Err(format!("bad date {raw:?}"));
    }
    Err("row has neither unix nor date".to_string())
}

/// Reads minute bars from a headered CSV in the `unix,date,symbol,open,high,
/// low,close,...` layout. Column lookup is by name (case-insensitive); other
/// columns are ignored. Rows come back in file order.
pub fn read_minute_bars<R: Read>(input: R) -> Result<Vec<MinuteBar>> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(input);
    let headers = reader
        .headers()
        .map_err(|e| CpError::Parse {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim().eq_ignore_ascii_case(name))
    };
    let col = |name: &str| {
        find(name).ok_or_else(|| CpError::Parse {
            line: 1,
            message: format!("missing column {name:?}"),
        })
    };
    let (unix, date) = (find("unix"), find("date"));
    if unix.is_none() && date.is_none() {
        return Err(CpError::Parse {
            line: 1,
            message: "missing column \"unix\" or \"date\"".to_string(),
        });
    }
    let (open, high, low, close) = (col("open")?, col("high")?, col("low")?, col("close")?);

    let mut bars = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CpError::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let fail = |message: String| CpError::Parse { line, message };
        let field = |idx: usize, name: &str| -> Result<f64> {
            let raw = record.get(idx).unwrap_or("").trim();
            raw.parse::<f64>()
                .map_err(|_| fail(format!("bad {name} value {raw:?}")))
        };
        let ts = parse_timestamp(
            unix.and_then(|i| record.get(i)),
            date.and_then(|i| record.get(i)),
        )
        .map_err(fail)?;
        let bar = MinuteBar::new(
            ts,
            field(open, "open")?,
            field(high, "high")?,
            field(low, "low")?,
            field(close, "close")?,
        )
        .map_err(|e| fail(e.to_string()))?;
        bars.push(bar);
    }
    Ok(bars)
}

/// Puts bars in increasing time order when the file is newest-first;
/// any other ordering is left for [`daily_w_series`] to reject.
pub fn orient_chronologically(bars: &mut [MinuteBar]) {
    let descending = bars.len() > 1 && bars.windows(2).all(|w| w[0].timestamp > w[1].timestamp);
    if descending {
        bars.reverse();
    }
}

/// Reads a `date,w` CSV as written by [`write_w_csv`].
pub fn read_w_csv<R: Read>(input: R) -> Result<Vec<DailyW>> {
    let mut reader = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CpError::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let fail = |message: String| CpError::Parse { line, message };
        let date = record.get(0).unwrap_or("").trim();
        let date = NaiveDate::parse_from_str(date, "%Y-%m-%d")
            .map_err(|_| fail(format!("bad date {date:?}")))?;
        let w = record.get(1).unwrap_or("").trim();
        let w: f64 = w.parse().map_err(|_| fail(format!("bad w value {w:?}")))?;
        out.push(DailyW { date, w });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use chrono::TimeZone;

    fn at(y: i32, m: u32, d: u32, hh: u32, mm: u32) -> DateTime<Utc> {
        Utc.with_ymd_and_hms(y, m, d, hh, mm, 0).unwrap()
    }

    fn bar(ts: DateTime<Utc>, o: f64, h: f64, l: f64, c: f64) -> MinuteBar {
        MinuteBar::new(ts, o, h, l, c).unwrap()
    }

    #[test]
    fn two_bar_day() {
        let bars = [
            bar(at(2019, 3, 1, 0, 0), 10.0, 12.0, 9.0, 11.0),
            bar(at(2019, 3, 1, 23, 59), 11.0, 14.0, 10.0, 13.0),
        ];
        let out = daily_w_series(&bars, None).unwrap();
        assert_eq!(out.days.len(), 1);
        assert_relative_eq!(out.days[0].w, 3.0 / 3.5, max_relative = 1e-15);
        assert_eq!(out.flagged(), 0);
    }

    #[test]
    fn flat_day_dropped() {
        let bars = [
            bar(at(2019, 3, 1, 0, 0), 5.0, 5.0, 5.0, 5.0),
            bar(at(2019, 3, 1, 0, 1), 5.0, 5.0, 5.0, 5.0),
            bar(at(2019, 3, 2, 0, 0), 5.0, 6.0, 4.0, 5.0),
        ];
        let out = daily_w_series(&bars, None).unwrap();
        assert_eq!(out.dropped(), 1);
        assert_eq!(out.days.len(), 1);
        assert_eq!(out.days[0].w, 0.0);
    }

    #[test]
    fn missing_boundary_minutes_flagged() {
        let bars = [
            bar(at(2019, 3, 1, 0, 5), 10.0, 12.0, 9.0, 11.0),
            bar(at(2019, 3, 1, 12, 0), 11.0, 14.0, 10.0, 13.0),
        ];
        let out = daily_w_series(&bars, None).unwrap();
        let q = out.quality[0];
        assert!(q.open_fallback && q.close_fallback);
        assert_relative_eq!(out.days[0].w, 3.0 / 3.5, max_relative = 1e-15);
    }

    #[test]
    fn errors() {
        assert_eq!(daily_w_series(&[], None).unwrap_err(), CpError::NoData);
        let bars = [
            bar(at(2019, 3, 1, 0, 5), 10.0, 12.0, 9.0, 11.0),
            bar(at(2019, 3, 1, 0, 4), 11.0, 14.0, 10.0, 13.0),
        ];
        assert_eq!(
            daily_w_series(&bars, None).unwrap_err(),
            CpError::UnsortedInput
        );
        assert!(MinuteBar::new(at(2019, 1, 1, 0, 0), 10.0, 9.0, 8.0, 9.5).is_err());
    }

    #[test]
    fn unit_free() {
        let bars: Vec<MinuteBar> = (0..30)
            .map(|i| {
                let base = 100.0 + (i as f64 * 0.7).sin() * 3.0;
                bar(
                    at(2020, 1, 1 + i / 10, 0, i % 10),
                    base,
                    base + 2.0,
                    base - 1.5,
                    base + 0.5,
                )
            })
            .collect();
        let scaled: Vec<MinuteBar> = bars
            .iter()
            .map(|b| {
                bar(
                    b.timestamp,
                    b.open * 7.3,
                    b.high * 7.3,
                    b.low * 7.3,
                    b.close * 7.3,
                )
            })
            .collect();
        let a = daily_w_series(&bars, None).unwrap();
        let b = daily_w_series(&scaled, None).unwrap();
        for (x, y) in a.days.iter().zip(&b.days) {
            assert!((x.w - y.w).abs() < 1e-12);
        }
    }

    #[test]
    fn rechunking_does_not_matter() {
        let bars: Vec<MinuteBar> = (0..200)
            .map(|i| {
                let ts = at(2021, 5, 1, 0, 0) + chrono::Duration::minutes(i * 37);
                let p = 50.0 + (i as f64 * 0.3).cos();
                bar(ts, p, p + 1.0, p - 1.0, p + 0.25)
            })
            .collect();
        let batch = daily_w_series(&bars, None).unwrap();
        for chunk in [1, 7, 64] {
            let mut agg = DailyAggregator::new(None);
            for part in bars.chunks(chunk) {
                for b in part {
                    agg.push(b).unwrap();
                }
            }
            assert_eq!(agg.finish().unwrap(), batch);
        }
    }

    #[test]
    fn date_range_filters() {
        let bars = [
            bar(at(2019, 12, 31, 0, 0), 10.0, 12.0, 9.0, 11.0),
            bar(at(2020, 1, 1, 0, 0), 10.0, 12.0, 9.0, 11.0),
            bar(at(2020, 1, 2, 0, 0), 10.0, 12.0, 9.0, 11.0),
        ];
        let from = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
        let out = daily_w_series(&bars, Some((from, from))).unwrap();
        assert_eq!(out.days.len(), 1);
        assert_eq!(out.days[0].date, from);
    }

    #[test]
    fn yearly_slices() {
        let days: Vec<DailyW> = NaiveDate::from_ymd_opt(2019, 12, 30)
            .unwrap()
            .iter_days()
            .take(370)
            .enumerate()
            .map(|(i, date)| DailyW {
                date,
                w: (i as f64).sin(),
            })
            .collect();
        let s = yearly_slice(&days, 2020).unwrap();
        assert_eq!(s.series.len(), 366);
        assert!(s.gaps.is_empty());
        assert!(s.series.sigma().is_none());
        assert!(s.dates.windows(2).all(|w| w[0] < w[1]));

        let sparse: Vec<DailyW> = days
            .iter()
            .copied()
            .filter(|d| d.date.day() != 15)
            .collect();
        let s = yearly_slice(&sparse, 2020).unwrap();
        assert_eq!(s.series.len(), 366 - 12);
        assert_eq!(s.gaps.len(), 12);

        assert_eq!(yearly_slice(&days, 2017).unwrap_err(), CpError::EmptySlice);
    }

    #[test]
    fn csv_roundtrip_and_errors() {
        let text = "unix,date,symbol,open,high,low,close,Volume BTC,Volume USD\n\
                    1551398400,2019-03-01 00:00:00,BTC/USD,10,12,9,11,1,1\n\
                    1551484740000,2019-03-01 23:59:00,BTC/USD,11,14,10,13,1,1\n";
        let bars = read_minute_bars(text.as_bytes()).unwrap();
        assert_eq!(bars.len(), 2);
        assert_eq!(bars[1].timestamp, at(2019, 3, 1, 23, 59));
        let out = daily_w_series(&bars, None).unwrap();
        let mut buf = Vec::new();
        out.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "date,w\n2019-03-01,0.857142857\n"
        );
        let back = read_w_csv(buf.as_slice()).unwrap();
        assert_eq!(back[0].date, out.days[0].date);

        let bad = "unix,date,symbol,open,high,low,close\n\
                   1551398400,x,BTC/USD,10,12,9,11\n\
                   1551398460,x,BTC/USD,oops,12,9,11\n";
        match read_minute_bars(bad.as_bytes()) {
            Err(CpError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn newest_first_files_are_reversed() {
        let mut bars = vec![
            bar(at(2019, 3, 1, 0, 2), 10.0, 12.0, 9.0, 11.0),
            bar(at(2019, 3, 1, 0, 1), 10.0, 12.0, 9.0, 11.0),
        ];
        orient_chronologically(&mut bars);
        assert!(bars[0].timestamp < bars[1].timestamp);
    }
}
