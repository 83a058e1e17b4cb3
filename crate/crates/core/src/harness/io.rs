//! CSV and JSON output.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{ExperimentResult, Row, Verdict};
use crate::error::{Error, Result};

/// `printf("%.15g")`.
pub fn format_g15(v: f64) -> String {
    if !v.is_finite() {
        return if v.is_nan() {
            "nan".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if v == 0.0 {
        return if v.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    let sci = format!("{v:.14e}");
    let (mant, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: String| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    };
    if (-4..15).contains(&exp) {
        trim(format!("{:.*}", (14 - exp) as usize, v))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim(mant.to_string()), exp.abs())
    }
}

/// Sidecar path `<out>.meta.json`.
pub fn meta_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

#[derive(Serialize)]
struct Meta<'a> {
    name: &'a str,
    seed: u64,
    version: &'a str,
    config: &'a serde_json::Value,
    passed: bool,
    verdicts: &'a [Verdict],
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::io(path, std::io::Error::other(format!("{other:?}"))),
    }
}

/// Write a table with the given header; every record is already formatted.
pub fn write_table(
    path: &Path,
    header: &[&str],
    records: impl IntoIterator<Item = Vec<String>>,
) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(header).map_err(|e| csv_error(path, e))?;
    for r in records {
        w.write_record(&r).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Write `out` (CSV rows) and `<out>.meta.json`.
pub fn write_results(result: &ExperimentResult, out: &Path) -> Result<()> {
    let seed = result.seed.to_string();
    write_table(
        out,
        &["name", "seed", "replica", "time", "observable", "value"],
        result.rows.iter().map(|r| {
            vec![
                result.name.clone(),
                seed.clone(),
                r.replica.to_string(),
                format_g15(r.time),
                r.observable.clone(),
                format_g15(r.value),
            ]
        }),
    )?;
    let meta = Meta {
        name: &result.name,
        seed: result.seed,
        version: env!("CARGO_PKG_VERSION"),
        config: &result.config,
        passed: result.passed(),
        verdicts: &result.verdicts,
    };
    let path = meta_path(out);
    let mut f = File::create(&path).map_err(|e| Error::io(&path, e))?;
    let text = serde_json::to_string_pretty(&meta)?;
    f.write_all(text.as_bytes())
        .and_then(|_| f.write_all(b"\n"))
        .map_err(|e| Error::io(&path, e))
}

/// Read the rows back from a results CSV.
pub fn read_rows(path: &Path) -> Result<Vec<Row>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let bad = |what: &str| Error::io(path, std::io::Error::other(format!("malformed {what}")));
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let field = |i: usize| rec.get(i).ok_or_else(|| bad("record"));
        rows.push(Row {
            replica: field(2)?.parse().map_err(|_| bad("replica"))?,
            time: field(3)?.parse().map_err(|_| bad("time"))?,
            observable: field(4)?.to_string(),
            value: field(5)?.parse().map_err(|_| bad("value"))?,
        });
    }
    Ok(rows)
}
