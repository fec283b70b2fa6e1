// SPDX-License-Identifier: MIT OR Apache-2.0

//! Series files: a `date,w` CSV or bare numbers, one per line.

use std::fs;
use std::io::Read;
use std::path::Path;

use anyhow::{bail, Context, Result};
use cpwalk_core::ingest::{read_w_csv, yearly_slice};

pub struct SeriesInput {
    pub values: Vec<f64>,
    /// First and last date when the file was dated.
    pub span: Option<(String, String)>,
}

pub fn read_text(path: &Path) -> Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .context("reading stdin")?;
        return Ok(s);
    }
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn read_series(path: &Path, year: Option<i32>) -> Result<SeriesInput> {
    let text = read_text(path)?;
    let first = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .unwrap_or("");
    let dated = first
        .split(',')
        .map(|c| c.trim().to_ascii_lowercase())
        .eq(["date", "w"]);
    if dated {
        let body: String = text
            .lines()
            .filter(|l| !l.trim_start().starts_with('#'))
            .flat_map(|l| [l, "\n"])
            .collect();
        let days = read_w_csv(body.as_bytes())?;
        if let Some(year) = year {
            let slice = yearly_slice(&days, year)?;
            if !slice.gaps.is_empty() {
                eprintln!("cpwalk: {year}: {} calendar days missing", slice.gaps.len());
            }
            let span = (
                slice.dates[0].to_string(),
                slice.dates[slice.dates.len() - 1].to_string(),
            );
            return Ok(SeriesInput {
                values: slice.series.values().to_vec(),
                span: Some(span),
            });
        }
        let span = match (days.first(), days.last()) {
            (Some(a), Some(b)) => Some((a.date.to_string(), b.date.to_string())),
            _ => None,
        };
        return Ok(SeriesInput {
            values: days.iter().map(|d| d.w).collect(),
            span,
        });
    }
    if year.is_some() {
        bail!("--year needs a dated `date,w` input");
    }
    let mut values = Vec::new();
    let mut seen_data = false;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match line.parse::<f64>() {
            Ok(v) => {
                values.push(v);
                seen_data = true;
            }
            // a single non-numeric header line is allowed
            Err(_) if !seen_data && values.is_empty() && i == first_line_index(&text) => {}
            Err(_) => bail!("line {}: bad value {line:?}", i + 1),
        }
    }
    Ok(SeriesInput { values, span: None })
}

fn first_line_index(text: &str) -> usize {
    text.lines()
        .position(|l| {
            let l = l.trim();
            !l.is_empty() && !l.starts_with('#')
        })
        .unwrap_or(0)
}
