//! Report and trace writers.
//!
//! Floats are written in Rust's shortest round-trip form, so every value
//! parses back to the same double.

use std::io::Write;
use std::path::{Path, PathBuf};

use monodr_core::splitting::IterationTrace;
use serde::Serialize;

/// Column-oriented numeric table destined for CSV.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    /// `iter, residual, inner_diag, shadow_<k>...` for each recorded iterate.
    pub fn from_trace(trace: &IterationTrace, probes: &[usize]) -> Table {
        let mut header = vec!["iter".to_string(), "residual".to_string(), "inner_diag".to_string()];
        header.extend(probes.iter().map(|k| format!("shadow_{k}")));
        let rows = trace
            .records
            .iter()
            .map(|r| {
                let mut row = vec![r.iter as f64, r.residual, r.inner_diag];
                row.extend(probes.iter().map(|&k| r.shadow[k]));
                row
            })
            .collect();
        Table { header, rows }
    }

    /// One column per named sequence, indexed by `n` from 1. Shorter
    /// sequences leave their cells empty (NaN).
    pub fn from_columns(columns: &[(&str, &[f64])]) -> Table {
        let len = columns.iter().map(|(_, c)| c.len()).max().unwrap_or(0);
        let mut header = vec!["n".to_string()];
        header.extend(columns.iter().map(|(name, _)| name.to_string()));
        let rows = (0..len)
            .map(|i| {
                let mut row = vec![(i + 1) as f64];
                row.extend(columns.iter().map(|(_, c)| c.get(i).copied().unwrap_or(f64::NAN)));
                row
            })
            .collect();
        Table { header, rows }
    }
}

fn cell(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:?}")
    }
}

pub fn write_csv<W: Write>(table: &Table, out: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|&v| cell(v)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

/// Writes `<stem>.json` and/or `<stem>_trace.csv` under `dir`.
pub fn write_artifacts(
    dir: &Path,
    stem: &str,
    json: Option<&str>,
    table: Option<&Table>,
) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    if let Some(json) = json {
        let path = dir.join(format!("{stem}.json"));
        std::fs::write(&path, json)?;
        written.push(path);
    }
    if let Some(table) = table {
        let path = dir.join(format!("{stem}_trace.csv"));
        let file = std::fs::File::create(&path)?;
        write_csv(table, std::io::BufWriter::new(file)).map_err(std::io::Error::other)?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_uses_lf_and_round_trip_numbers() {
        let t = Table {
            header: vec!["iter".into(), "residual".into()],
            rows: vec![vec![0.0, std::f64::consts::FRAC_1_SQRT_2], vec![1.0, 1e-300]],
        };
        let mut buf = Vec::new();
        write_csv(&t, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "iter,residual\n0,0.7071067811865476\n1,1e-300\n");
        assert!(!text.contains('\r'));
    }

    #[test]
    fn ragged_columns_leave_blanks() {
        let t = Table::from_columns(&[("a", &[1.5, 2.5]), ("b", &[3.5])]);
        let mut buf = Vec::new();
        write_csv(&t, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "n,a,b\n1,1.5,3.5\n2,2.5,\n");
    }
}
