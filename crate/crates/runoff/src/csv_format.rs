//! The triangle exchange format.
//!
//! ```text
//! accident_year,dev_0,dev_1,dev_2
//! 2019,100,150,165
//! 2020,110,154,
//! 2021,120,,
//! ```
//!
//! Comma separated, `.` decimal point, UTF-8, LF or CRLF. Accident-year labels
//! are consecutive integers; an empty field (never `0`) marks an unobserved cell.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use runoff_core::{FutureCellIndex, Triangle, TriangleKind, ValidationOptions};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("header: {0}")]
    Header(String),

    #[error("row {row}: expected {expected} fields, found {found}")]
    Ragged {
        row: u64,
        expected: usize,
        found: usize,
    },

    #[error("row {row}: accident-year label {label:?} {problem}")]
    Label {
        row: u64,
        label: String,
        problem: String,
    },

    #[error("row {row} (accident year {accident_year}, dev_{dev_year}): {token:?} is not a finite number")]
    Parse {
        row: u64,
        accident_year: usize,
        dev_year: usize,
        token: String,
    },

    #[error("row {row} (accident year {accident_year}, dev_{dev_year}): {problem}")]
    Shape {
        row: u64,
        accident_year: usize,
        dev_year: usize,
        problem: &'static str,
    },

    #[error("expected {expected} accident-year rows, found {found}")]
    RowCount { expected: usize, found: usize },

    #[error("{0}")]
    Validation(#[from] runoff_core::Error),

    #[error("prediction map: {0}")]
    Predictions(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// Parses a triangle from CSV text.
pub fn parse_csv<R: Read>(
    reader: R,
    kind: TriangleKind,
    options: ValidationOptions,
) -> Result<Triangle, FormatError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = rdr.records();

    let header = match records.next() {
        Some(h) => h?,
        None => return Err(FormatError::Header("file is empty".into())),
    };
    let n = check_header(&header)?;

    let mut rows = Vec::with_capacity(n);
    let mut origin: Option<i64> = None;
    for record in records {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let accident_year = rows.len() + 1;
        if record.len() != n + 1 {
            return Err(FormatError::Ragged {
                row: line,
                expected: n + 1,
                found: record.len(),
            });
        }
        if accident_year > n {
            return Err(FormatError::RowCount {
                expected: n,
                found: accident_year,
            });
        }
        let label = record[0].trim_start_matches('\u{feff}');
        let year: i64 = label.parse().map_err(|_| FormatError::Label {
            row: line,
            label: label.into(),
            problem: "is not an integer".into(),
        })?;
        match origin {
            None => origin = Some(year),
            Some(o) if year != o + accident_year as i64 - 1 => {
                return Err(FormatError::Label {
                    row: line,
                    label: label.into(),
                    problem: format!(
                        "breaks the sequence; expected {}",
                        o + accident_year as i64 - 1
                    ),
                })
            }
            Some(_) => {}
        }

        let observed = n + 1 - accident_year;
        let mut row = Vec::with_capacity(observed);
        for dev_year in 0..n {
            let token = &record[dev_year + 1];
            if dev_year < observed {
                if token.is_empty() {
                    return Err(FormatError::Shape {
                        row: line,
                        accident_year,
                        dev_year,
                        problem: "observed cell is empty",
                    });
                }
                let value: f64 = token
                    .parse()
                    .ok()
                    .filter(|v: &f64| v.is_finite())
                    .ok_or_else(|| FormatError::Parse {
                        row: line,
                        accident_year,
                        dev_year,
                        token: token.into(),
                    })?;
                row.push(value);
            } else if !token.is_empty() {
                return Err(FormatError::Shape {
                    row: line,
                    accident_year,
                    dev_year,
                    problem: "future cell must be empty",
                });
            }
        }
        rows.push(row);
    }
    if rows.len() != n {
        return Err(FormatError::RowCount {
            expected: n,
            found: rows.len(),
        });
    }
    let triangle = Triangle::with_options(kind, rows, options)?;
    Ok(match origin {
        Some(o) => triangle.with_origin_year(o),
        None => triangle,
    })
}

fn check_header(header: &csv::StringRecord) -> Result<usize, FormatError> {
    let fields: Vec<&str> = header.iter().collect();
    let first = fields
        .first()
        .map(|f| f.trim_start_matches('\u{feff}'))
        .unwrap_or("");
    if first != "accident_year" {
        return Err(FormatError::Header(format!(
            "first column must be `accident_year`, found {first:?}"
        )));
    }
    let n = fields.len() - 1;
    if n == 0 {
        return Err(FormatError::Header("no development-year columns".into()));
    }
    for (j, f) in fields[1..].iter().enumerate() {
        if *f != format!("dev_{j}") {
            return Err(FormatError::Header(format!(
                "column {} must be `dev_{j}`, found {f:?}",
                j + 2
            )));
        }
    }
    Ok(n)
}

pub fn parse_csv_str(
    text: &str,
    kind: TriangleKind,
    options: ValidationOptions,
) -> Result<Triangle, FormatError> {
    parse_csv(text.as_bytes(), kind, options)
}

pub fn read_triangle(
    path: &Path,
    kind: TriangleKind,
    options: ValidationOptions,
) -> Result<Triangle, FormatError> {
    let file = fs::File::open(path).map_err(|source| FormatError::Io {
        path: path.into(),
        source,
    })?;
    parse_csv(std::io::BufReader::new(file), kind, options)
}

/// How predicted cells are written.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum PredictionStyle {
    /// A separate complete square with plain values.
    #[default]
    Companion,
    /// A separate complete square with `suffix` appended to predicted cells.
    Marked { suffix: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EmitOptions {
    /// Decimal places; `None` writes the shortest representation that reads
    /// back to the same double.
    pub precision: Option<usize>,
    pub style: PredictionStyle,
}

/// Output of [`emit_csv`]: the observed triangle, and the completed square
/// when predictions were supplied.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmittedCsv {
    pub observed: String,
    pub predicted: Option<String>,
}

fn format_value(v: f64, precision: Option<usize>) -> String {
    match precision {
        Some(p) => format!("{v:.p$}"),
        None => format!("{v}"),
    }
}

fn header_line(n: usize) -> String {
    let mut out = String::from("accident_year");
    for j in 0..n {
        let _ = write!(out, ",dev_{j}");
    }
    out.push('\n');
    out
}

/// Writes a triangle, and optionally its completed square, as CSV.
///
/// A non-empty prediction map must cover exactly the future triangle.
pub fn emit_csv(
    t: &Triangle,
    predictions: Option<&BTreeMap<FutureCellIndex, f64>>,
    options: &EmitOptions,
) -> Result<EmittedCsv, FormatError> {
    let n = t.n();
    let predictions = predictions.filter(|p| !p.is_empty());
    if let Some(p) = predictions {
        let expected: Vec<FutureCellIndex> = FutureCellIndex::all(n).collect();
        if !p.keys().copied().eq(expected.iter().copied()) {
            return Err(FormatError::Predictions(format!(
                "{} entries supplied; a {n}-year triangle has exactly {} future cells",
                p.len(),
                expected.len()
            )));
        }
    }

    let mut observed = header_line(n);
    for i in 1..=n {
        let _ = write!(observed, "{}", t.accident_year_label(i));
        for j in 0..n {
            observed.push(',');
            if let Some(v) = t.get(i, j) {
                observed.push_str(&format_value(v, options.precision));
            }
        }
        observed.push('\n');
    }

    let predicted = predictions.map(|p| {
        let suffix = match &options.style {
            PredictionStyle::Companion => "",
            PredictionStyle::Marked { suffix } => suffix.as_str(),
        };
        let mut out = header_line(n);
        for i in 1..=n {
            let _ = write!(out, "{}", t.accident_year_label(i));
            for j in 0..n {
                out.push(',');
                match t.get(i, j) {
                    Some(v) => out.push_str(&format_value(v, options.precision)),
                    None => {
                        let key = FutureCellIndex::new(n, i, j).expect("future cell");
                        out.push_str(&format_value(p[&key], options.precision));
                        out.push_str(suffix);
                    }
                }
            }
            out.push('\n');
        }
        out
    });
    Ok(EmittedCsv {
        observed,
        predicted,
    })
}

/// Path of the companion file: `claims.csv` → `claims_predicted.csv`.
pub fn companion_path(path: &Path) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}_predicted.csv"))
}

/// Writes `emitted.observed` to `path` and the completed square, if any, to
/// its companion path. Returns the paths written.
pub fn write_emitted(path: &Path, emitted: &EmittedCsv) -> Result<Vec<PathBuf>, FormatError> {
    let write = |p: &Path, text: &str| {
        fs::write(p, text).map_err(|source| FormatError::Io {
            path: p.into(),
            source,
        })
    };
    write(path, &emitted.observed)?;
    let mut written = vec![path.to_path_buf()];
    if let Some(square) = &emitted.predicted {
        let companion = companion_path(path);
        write(&companion, square)?;
        written.push(companion);
    }
    Ok(written)
}
