// SPDX-License-Identifier: MIT OR Apache-2.0

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use cpwalk_core::fmt::sig9;
use serde_json::Value;

/// Opens `path`, or standard output when absent or `-`.
pub fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    match path {
        Some(p) if p.as_os_str() != "-" => {
            let f = File::create(p).with_context(|| format!("creating {}", p.display()))?;
            Ok(Box::new(BufWriter::new(f)))
        }
        _ => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
    }
}

/// JSON number rounded to nine significant digits.
pub fn num(x: f64) -> Value {
    sig9(x)
        .parse::<f64>()
        .ok()
        .and_then(serde_json::Number::from_f64)
        .map_or(Value::Null, Value::Number)
}

/// Rounds every float in `v` to nine significant digits.
pub fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => *v = num(n.as_f64().unwrap_or(f64::NAN)),
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

pub fn write_json(out: &mut dyn Write, mut value: Value) -> Result<()> {
    round_floats(&mut value);
    serde_json::to_writer_pretty(&mut *out, &value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

/// Writes a CSV whose first line is `# <config as compact JSON>`.
pub fn write_csv(
    out: &mut dyn Write,
    mut config: Value,
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<()> {
    round_floats(&mut config);
    writeln!(out, "# {config}")?;
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        writeln!(out, "{}", row.join(","))?;
    }
    out.flush()?;
    Ok(())
}
