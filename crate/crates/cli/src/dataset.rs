use std::path::{Path, PathBuf};

use kendall_core::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{CliError, CliResult};

/// A rectangular numeric table read from CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub column_names: Vec<String>,
    pub values: Matrix,
    pub source: PathBuf,
}

impl Dataset {
    pub fn n(&self) -> usize {
        self.values.rows()
    }

    pub fn p(&self) -> usize {
        self.values.cols()
    }

    /// Resolves a column given by name or 1-based position.
    pub fn column_index(&self, key: &str) -> CliResult<usize> {
        resolve_column(&self.column_names, key)
    }
}

#[derive(Debug, Clone)]
pub struct CsvOptions {
    pub has_header: bool,
    pub delimiter: u8,
    /// Columns to keep, by header name or 1-based position. `None` keeps all.
    pub columns: Option<Vec<String>>,
    /// Add uniform noise in `[0, eps)` drawn from the given seed before the
    /// tie check.
    pub jitter: Option<(f64, u64)>,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            has_header: true,
            delimiter: b',',
            columns: None,
            jitter: None,
        }
    }
}

fn resolve_column(names: &[String], key: &str) -> CliResult<usize> {
    if let Some(i) = names.iter().position(|n| n == key) {
        return Ok(i);
    }
    match key.parse::<usize>() {
        Ok(k) if k >= 1 && k <= names.len() => Ok(k - 1),
        _ => Err(CliError::Usage(format!("unknown column '{key}'"))),
    }
}

/// Reads a numeric CSV file, keeps the selected columns and rejects ties
/// within any kept column.
pub fn ingest_csv(path: &Path, options: &CsvOptions) -> CliResult<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(options.has_header)
        .delimiter(options.delimiter)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;

    let header: Option<Vec<String>> = if options.has_header {
        let h = reader
            .headers()
            .map_err(|e| CliError::Io(e.to_string()))?;
        Some(h.iter().map(str::to_owned).collect())
    } else {
        None
    };

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = header.as_ref().map(Vec::len);
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            CliError::Parse {
                line,
                message: e.to_string(),
            }
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(CliError::Parse {
                line,
                message: format!("expected {expected} fields, found {}", record.len()),
            });
        }
        let row = record
            .iter()
            .map(|cell| {
                cell.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| CliError::Parse {
                        line,
                        message: format!("non-numeric cell '{cell}'"),
                    })
            })
            .collect::<CliResult<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::EmptyFile(path.display().to_string()));
    }
    let width = width.unwrap_or(0);
    let names = header.unwrap_or_else(|| (1..=width).map(|i| format!("V{i}")).collect());

    let keep: Vec<usize> = match &options.columns {
        None => (0..width).collect(),
        Some(keys) => keys
            .iter()
            .map(|k| resolve_column(&names, k))
            .collect::<CliResult<_>>()?,
    };
    if rows.len() < 2 {
        return Err(CliError::Usage(format!(
            "need at least 2 observations, found {}",
            rows.len()
        )));
    }

    let n = rows.len();
    let mut values = Matrix::zeros(n, keep.len());
    for (i, row) in rows.iter().enumerate() {
        for (j, &src) in keep.iter().enumerate() {
            values[(i, j)] = row[src];
        }
    }
    if let Some((eps, seed)) = options.jitter {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in 0..n {
            for v in values.row_mut(i) {
                *v += eps * rng.gen::<f64>();
            }
        }
    }
    let column_names: Vec<String> = keep.iter().map(|&j| names[j].clone()).collect();
    for (j, name) in column_names.iter().enumerate() {
        let mut col = values.column(j);
        col.sort_unstable_by(f64::total_cmp);
        if let Some(w) = col.windows(2).find(|w| w[0] == w[1]) {
            return Err(CliError::Ties {
                column: name.clone(),
                value: Some(w[0]),
            });
        }
    }
    Ok(Dataset {
        column_names,
        values,
        source: path.to_path_buf(),
    })
}
