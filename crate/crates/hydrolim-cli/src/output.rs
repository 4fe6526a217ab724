//! CSV and JSON serialization of diagnostics series and run summaries.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a value
//! parsed back from CSV is bit-identical to the one that was written and
//! repeated runs of the same configuration produce byte-identical files.

use crate::error::HarnessError;
use hydrolim_core::DiagnosticsRecord;
use std::path::Path;

pub const CSV_HEADER: &str = "time,E,D,E1,D1,delta_sigma_l2,delta_v_l2,delta_v_h1,delta_w_l2,dz_sigma_h2,dz_dt_sigma_l2,avg_delta_sigma_l2,fluct_delta_sigma_l2";

pub fn write_csv(records: &[DiagnosticsRecord], path: &Path) -> Result<(), HarnessError> {
    let mut text = String::with_capacity(64 * (records.len() + 1));
    text.push_str(CSV_HEADER);
    text.push('\n');
    for r in records {
        let row = [
            r.time,
            r.e,
            r.d,
            r.e1,
            r.d1,
            r.delta_sigma_l2,
            r.delta_v_l2,
            r.delta_v_h1,
            r.delta_w_l2,
            r.dz_sigma_h2,
            r.dz_dt_sigma_l2,
            r.avg_delta_sigma_l2,
            r.fluct_delta_sigma_l2,
        ];
        let mut first = true;
        for v in row {
            if !first {
                text.push(',');
            }
            first = false;
            text.push_str(&format!("{v}"));
        }
        text.push('\n');
    }
    std::fs::write(path, text).map_err(|source| HarnessError::WriteFile {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_csv(path: &Path) -> Result<Vec<DiagnosticsRecord>, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|source| HarnessError::ReadFile {
        path: path.to_path_buf(),
        source,
    })?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == CSV_HEADER => {}
        Some((_, header)) => {
            return Err(HarnessError::Csv {
                path: path.to_path_buf(),
                line: 1,
                reason: format!("unexpected header {header:?}"),
            })
        }
        None => {
            return Err(HarnessError::Csv {
                path: path.to_path_buf(),
                line: 1,
                reason: "empty file".into(),
            })
        }
    }
    let mut records = Vec::new();
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<f64> = line
            .split(',')
            .map(|s| s.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| HarnessError::Csv {
                path: path.to_path_buf(),
                line: idx + 1,
                reason: e.to_string(),
            })?;
        if fields.len() != 13 {
            return Err(HarnessError::Csv {
                path: path.to_path_buf(),
                line: idx + 1,
                reason: format!("expected 13 columns, got {}", fields.len()),
            });
        }
        records.push(DiagnosticsRecord {
            time: fields[0],
            e: fields[1],
            d: fields[2],
            e1: fields[3],
            d1: fields[4],
            delta_sigma_l2: fields[5],
            delta_v_l2: fields[6],
            delta_v_h1: fields[7],
            delta_w_l2: fields[8],
            dz_sigma_h2: fields[9],
            dz_dt_sigma_l2: fields[10],
            avg_delta_sigma_l2: fields[11],
            fluct_delta_sigma_l2: fields[12],
        });
    }
    Ok(records)
}

pub fn write_json<T: serde::Serialize>(value: &T, path: &Path) -> Result<(), HarnessError> {
    let text = serde_json::to_string_pretty(value).expect("serializable summary");
    std::fs::write(path, text).map_err(|source| HarnessError::WriteFile {
        path: path.to_path_buf(),
        source,
    })
}
