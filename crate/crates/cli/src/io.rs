//! File formats: matrix JSON documents, match-log CSV, and atomic writes.

use crate::CliError;
use elodyn::game::{AdvantageMatrix, MatchRecord, PayoffMatrix, SelectionMatrix};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::Path;

/// JSON document holding one square matrix:
/// `{ "dim": m, "kind": "payoff"|"advantage"|"selection", "rows": [[...]] }`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixFile {
    pub dim: usize,
    pub kind: MatrixKind,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixKind {
    Payoff,
    Advantage,
    Selection,
}

impl std::fmt::Display for MatrixKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MatrixKind::Payoff => write!(f, "payoff"),
            MatrixKind::Advantage => write!(f, "advantage"),
            MatrixKind::Selection => write!(f, "selection"),
        }
    }
}

impl MatrixFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::invalid(format!("cannot read {}: {e}", path.display())))?;
        let file: MatrixFile = serde_json::from_str(&text)
            .map_err(|e| CliError::invalid(format!("malformed JSON in {}: {e}", path.display())))?;
        if file.rows.len() != file.dim {
            return Err(CliError::invalid(format!(
                "{}: dim field is {} but there are {} rows",
                path.display(),
                file.dim,
                file.rows.len()
            )));
        }
        Ok(file)
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::invalid(format!("serialization failed: {e}")))?;
        text.push('\n');
        write_atomic(path, &text)
    }

    fn expect_kind(&self, expected: MatrixKind, path: &Path) -> Result<(), CliError> {
        if self.kind != expected {
            return Err(CliError::invalid(format!(
                "{}: expected a {expected} matrix, found kind \"{}\"",
                path.display(),
                self.kind
            )));
        }
        Ok(())
    }
}

pub fn load_payoff(path: &Path) -> Result<PayoffMatrix, CliError> {
    let file = MatrixFile::load(path)?;
    file.expect_kind(MatrixKind::Payoff, path)?;
    PayoffMatrix::from_rows(&file.rows)
        .map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))
}

pub fn load_advantage(path: &Path) -> Result<AdvantageMatrix, CliError> {
    let file = MatrixFile::load(path)?;
    file.expect_kind(MatrixKind::Advantage, path)?;
    AdvantageMatrix::from_rows(&file.rows)
        .map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))
}

pub fn load_selection(path: &Path) -> Result<SelectionMatrix, CliError> {
    let file = MatrixFile::load(path)?;
    file.expect_kind(MatrixKind::Selection, path)?;
    SelectionMatrix::from_rows(&file.rows)
        .map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))
}

/// Match-log CSV header.
pub const MATCH_LOG_HEADER: &str = "sequence,i,j,winner";

/// Parses a match-log CSV: header `sequence,i,j,winner`, 0-based indices,
/// strictly increasing sequence numbers.
pub fn load_match_log(path: &Path) -> Result<Vec<MatchRecord>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::invalid(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == MATCH_LOG_HEADER => {}
        Some((_, header)) => {
            return Err(CliError::invalid(format!(
                "{}: expected header \"{MATCH_LOG_HEADER}\", found \"{header}\"",
                path.display()
            )))
        }
        None => return Err(CliError::invalid(format!("{}: empty file", path.display()))),
    }
    let mut records = Vec::new();
    let mut last_sequence: Option<u64> = None;
    for (line_no, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(CliError::invalid(format!(
                "{}:{}: expected 4 fields, found {}",
                path.display(),
                line_no + 1,
                fields.len()
            )));
        }
        let parse = |field: &str, name: &str| -> Result<u64, CliError> {
            field.parse::<u64>().map_err(|_| {
                CliError::invalid(format!(
                    "{}:{}: {name} \"{field}\" is not a non-negative integer",
                    path.display(),
                    line_no + 1
                ))
            })
        };
        let sequence = parse(fields[0], "sequence")?;
        let i = parse(fields[1], "i")? as usize;
        let j = parse(fields[2], "j")? as usize;
        let winner = parse(fields[3], "winner")? as usize;
        if let Some(last) = last_sequence {
            if sequence <= last {
                return Err(CliError::invalid(format!(
                    "{}:{}: sequence {sequence} does not increase past {last}",
                    path.display(),
                    line_no + 1
                )));
            }
        }
        last_sequence = Some(sequence);
        let record = MatchRecord::new(i, j, winner, sequence)
            .map_err(|e| CliError::invalid(format!("{}:{}: {e}", path.display(), line_no + 1)))?;
        records.push(record);
    }
    Ok(records)
}

pub fn match_log_csv(records: &[MatchRecord]) -> String {
    let mut out = String::from(MATCH_LOG_HEADER);
    out.push('\n');
    for rec in records {
        out.push_str(&format!(
            "{},{},{},{}\n",
            rec.sequence_number, rec.player_i, rec.player_j, rec.winner
        ));
    }
    out
}

/// Writes via a sibling temp file and rename, so interrupted runs never
/// leave a truncated file at the destination.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let file_name = path
        .file_name()
        .ok_or_else(|| CliError::invalid(format!("{}: not a file path", path.display())))?;
    let mut tmp_name = file_name.to_os_string();
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    fs::write(&tmp, contents)
        .map_err(|e| CliError::invalid(format!("cannot write {}: {e}", tmp.display())))?;
    fs::rename(&tmp, path)
        .map_err(|e| CliError::invalid(format!("cannot move {} into place: {e}", tmp.display())))
}

/// Parses `start:step:end` (inclusive end) or a comma-separated list into a
/// parameter grid.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(CliError::invalid(format!(
                "grid \"{spec}\" must have the form start:step:end"
            )));
        }
        let parse = |s: &str| -> Result<f64, CliError> {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::invalid(format!("grid component \"{s}\" is not a number")))
        };
        let (start, step, end) = (parse(parts[0])?, parse(parts[1])?, parse(parts[2])?);
        if !(step > 0.0) {
            return Err(CliError::invalid(format!("grid step must be positive, got {step}")));
        }
        if end < start {
            return Err(CliError::invalid(format!(
                "grid end {end} lies before start {start}"
            )));
        }
        let mut values = Vec::new();
        let mut k = 0u32;
        loop {
            let value = start + f64::from(k) * step;
            if value > end + step * 1e-9 {
                break;
            }
            values.push(value);
            k += 1;
        }
        Ok(values)
    } else {
        spec.split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| CliError::invalid(format!("grid value \"{s}\" is not a number")))
            })
            .collect()
    }
}

/// Parses a comma-separated list of positive integers.
pub fn parse_games_list(spec: &str) -> Result<Vec<u64>, CliError> {
    spec.split(',')
        .map(|s| {
            let n = s.trim().parse::<u64>().map_err(|_| {
                CliError::invalid(format!("games value \"{s}\" is not a non-negative integer"))
            })?;
            if n == 0 {
                return Err(CliError::invalid("games per pair must be at least 1".into()));
            }
            Ok(n)
        })
        .collect()
}
