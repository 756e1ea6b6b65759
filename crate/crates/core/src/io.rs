//! CSV formats: experiment results and measured loss tables.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::sim::ResultRow;

pub const RESULTS_HEADER: [&str; 6] = ["n", "m", "alpha", "risk_mean", "risk_se", "replicates"];

/// Seventeen significant digits; parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Format(e.to_string())
}

pub fn write_results<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RESULTS_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.m.to_string(),
            fmt_f64(r.alpha),
            fmt_f64(r.risk_mean),
            fmt_f64(r.risk_se),
            r.replicates.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Format(e.to_string()))
}

pub fn read_results<R: Read>(input: R) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_reader(input);
    check_header(&mut r, &RESULTS_HEADER)?;
    r.deserialize().map(|row| row.map_err(csv_err)).collect()
}

fn check_header<R: Read>(r: &mut csv::Reader<R>, expected: &[&str]) -> Result<()> {
    let header = r.headers().map_err(csv_err)?;
    let found: Vec<&str> = header.iter().map(str::trim).collect();
    if found != expected {
        return Err(Error::Format(format!(
            "expected header `{}`, found `{}`",
            expected.join(","),
            found.join(",")
        )));
    }
    Ok(())
}

/// Reads a loss table with header `n,loss`.
pub fn read_losses<R: Read>(input: R) -> Result<Vec<(usize, f64)>> {
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(input);
    check_header(&mut r, &["n", "loss"])?;
    let mut out = Vec::new();
    for (line, row) in r.deserialize::<(usize, f64)>().enumerate() {
        let (n, loss) = row.map_err(|e| Error::Format(format!("row {}: {e}", line + 1)))?;
        out.push((n, loss));
    }
    Ok(out)
}
