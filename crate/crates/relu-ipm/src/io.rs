//! CSV ingestion for the CLI: causal datasets, grouped scores, and raw
//! numeric sample matrices.

use std::path::Path;

use crate::balancing::CausalDataset;
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::fairness::GroupedScores;

struct Table {
    headers: Vec<String>,
    /// Raw cells; row `i` came from 1-based file line `lines[i]`.
    rows: Vec<Vec<String>>,
    lines: Vec<usize>,
}

fn read_table(path: &Path, delimiter: u8) -> Result<Table> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => Error::ParseError(format!("{}: {other:?}", path.display())),
        })?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| Error::ParseError(format!("{}: {e}", path.display())))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let mut rows = Vec::new();
    let mut lines = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| {
            Error::ParseError(format!("{}: line {}: {e}", path.display(), idx + 2))
        })?;
        rows.push(record.iter().map(|c| c.trim().to_string()).collect());
        lines.push(idx + 2); // header is line 1
    }
    if rows.is_empty() {
        return Err(Error::EmptyFile(path.display().to_string()));
    }
    Ok(Table {
        headers,
        rows,
        lines,
    })
}

fn column(table: &Table, name: &str) -> Result<usize> {
    table
        .headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| {
            Error::SchemaMismatch(format!(
                "column {name:?} not found; available: {}",
                table.headers.join(", ")
            ))
        })
}

fn parse_cell(raw: &str, col: &str, line: usize) -> Result<f64> {
    raw.parse::<f64>().map_err(|_| {
        Error::ParseError(format!("line {line}: column {col:?}: bad number {raw:?}"))
    })
}

/// Covariate columns: either the configured list or every column not named
/// as treatment/outcome/group/score.
fn covariate_columns(table: &Table, cfg: &RunConfig) -> Result<Vec<(String, usize)>> {
    match &cfg.covariates {
        Some(names) => names
            .iter()
            .map(|n| Ok((n.clone(), column(table, n)?)))
            .collect(),
        None => {
            let reserved = [&cfg.treatment, &cfg.outcome, &cfg.group, &cfg.score];
            let cols: Vec<(String, usize)> = table
                .headers
                .iter()
                .enumerate()
                .filter(|(_, h)| !reserved.contains(h))
                .map(|(j, h)| (h.clone(), j))
                .collect();
            if cols.is_empty() {
                return Err(Error::SchemaMismatch(format!(
                    "no covariate columns left; available: {}",
                    table.headers.join(", ")
                )));
            }
            Ok(cols)
        }
    }
}

pub fn load_causal_csv(path: &Path, cfg: &RunConfig) -> Result<CausalDataset> {
    let table = read_table(path, cfg.delimiter)?;
    let t_col = column(&table, &cfg.treatment)?;
    let y_col = column(&table, &cfg.outcome)?;
    let x_cols = covariate_columns(&table, cfg)?;

    let mut covariates = Vec::with_capacity(table.rows.len());
    let mut treatment = Vec::with_capacity(table.rows.len());
    let mut outcome = Vec::with_capacity(table.rows.len());
    for (row, &line) in table.rows.iter().zip(&table.lines) {
        treatment.push(match row[t_col].as_str() {
            "0" => false,
            "1" => true,
            other => {
                return Err(Error::NonBinaryTreatment {
                    value: other.to_string(),
                    line,
                })
            }
        });
        outcome.push(parse_cell(&row[y_col], &cfg.outcome, line)?);
        covariates.push(
            x_cols
                .iter()
                .map(|(name, j)| parse_cell(&row[*j], name, line))
                .collect::<Result<Vec<f64>>>()?,
        );
    }
    CausalDataset::new(covariates, treatment, outcome)
}

pub fn load_scores_csv(path: &Path, cfg: &RunConfig) -> Result<GroupedScores> {
    let table = read_table(path, cfg.delimiter)?;
    let g_col = column(&table, &cfg.group)?;
    let s_col = column(&table, &cfg.score)?;
    let mut scores0 = Vec::new();
    let mut scores1 = Vec::new();
    for (row, &line) in table.rows.iter().zip(&table.lines) {
        let score = parse_cell(&row[s_col], &cfg.score, line)?;
        match row[g_col].as_str() {
            "0" => scores0.push(score),
            "1" => scores1.push(score),
            other => {
                return Err(Error::ParseError(format!(
                    "line {line}: column {:?}: group must be 0 or 1, got {other:?}",
                    cfg.group
                )))
            }
        }
    }
    GroupedScores::new(scores0, scores1)
}

/// Every column numeric; rows are raw (unnormalized) points.
pub fn load_matrix_csv(path: &Path, cfg: &RunConfig) -> Result<Vec<Vec<f64>>> {
    let table = read_table(path, cfg.delimiter)?;
    let headers = table.headers.clone();
    table
        .rows
        .iter()
        .zip(&table.lines)
        .map(|(row, &line)| {
            row.iter()
                .zip(&headers)
                .map(|(cell, col)| parse_cell(cell, col, line))
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config_str;
    use std::io::Write;

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn loads_well_formed_causal_file() {
        let f = write_tmp("x1,x2,t,y\n0.1,0.2,0,1.5\n0.3,0.1,1,2.5\n0.0,0.4,0,0.5\n");
        let cfg = parse_config_str("").unwrap();
        let ds = load_causal_csv(f.path(), &cfg).unwrap();
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.dim(), 2);
        assert_eq!(ds.treatment, vec![false, true, false]);
        assert_eq!(ds.outcome, vec![1.5, 2.5, 0.5]);
    }

    #[test]
    fn non_binary_treatment_reports_line() {
        let f = write_tmp("x,t,y\n0.1,0,1.0\n0.2,2,1.0\n");
        let cfg = parse_config_str("").unwrap();
        match load_causal_csv(f.path(), &cfg) {
            Err(Error::NonBinaryTreatment { value, line }) => {
                assert_eq!(value, "2");
                assert_eq!(line, 3);
            }
            other => panic!("expected NonBinaryTreatment, got {other:?}"),
        }
    }

    #[test]
    fn missing_column_lists_available() {
        let f = write_tmp("x,treat,y\n0.1,0,1.0\n");
        let cfg = parse_config_str("").unwrap();
        match load_causal_csv(f.path(), &cfg) {
            Err(Error::SchemaMismatch(msg)) => {
                assert!(msg.contains("\"t\"") && msg.contains("treat"), "{msg}")
            }
            other => panic!("expected SchemaMismatch, got {other:?}"),
        }
    }

    #[test]
    fn empty_file_detected() {
        let f = write_tmp("x,t,y\n");
        let cfg = parse_config_str("").unwrap();
        assert!(matches!(
            load_causal_csv(f.path(), &cfg),
            Err(Error::EmptyFile(_))
        ));
    }

    #[test]
    fn bad_cell_reports_line_and_column() {
        let f = write_tmp("x,t,y\n0.1,0,oops\n");
        let cfg = parse_config_str("").unwrap();
        match load_causal_csv(f.path(), &cfg) {
            Err(Error::ParseError(msg)) => {
                assert!(msg.contains("line 2") && msg.contains("oops"), "{msg}")
            }
            other => panic!("expected ParseError, got {other:?}"),
        }
    }

    #[test]
    fn scores_split_by_group() {
        let f = write_tmp("s,score\n0,0.2\n1,0.9\n0,0.4\n");
        let cfg = parse_config_str("").unwrap();
        let g = load_scores_csv(f.path(), &cfg).unwrap();
        assert_eq!(g.scores0(), &[0.2, 0.4]);
        assert_eq!(g.scores1(), &[0.9]);
    }

    #[test]
    fn matrix_reads_all_columns() {
        let f = write_tmp("a;b\n1.0;2.0\n3.0;4.0\n");
        let cfg = parse_config_str("delimiter = ;").unwrap();
        let rows = load_matrix_csv(f.path(), &cfg).unwrap();
        assert_eq!(rows, vec![vec![1.0, 2.0], vec![3.0, 4.0]]);
    }

    #[test]
    fn explicit_covariate_selection() {
        let f = write_tmp("x1,x2,t,y\n0.1,9.0,0,1.0\n0.2,8.0,1,2.0\n");
        let cfg = parse_config_str("covariates = x1").unwrap();
        let ds = load_causal_csv(f.path(), &cfg).unwrap();
        assert_eq!(ds.dim(), 1);
        assert_eq!(ds.covariates[1], vec![0.2]);
    }
}
