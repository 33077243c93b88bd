//! Plain-text matrix files.
//!
//! ```text
//! # quantity = jsi
//! # rows = 3
//! # cols = 2
//! 1.0000000000000000e0 2.5000000000000000e-1
//! ...
//! ```
//!
//! The header is a block of `# key = value` lines, followed by one line per
//! row of space-separated values. Values are written in scientific notation
//! with 17 significant digits, which reproduces every finite `f64` exactly.
//! Complex matrices are stored as two files, `<stem>_re.txt` and
//! `<stem>_im.txt`, each with a `part` header entry.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{CliError, CliResult};

/// Header entries as `(key, value)` pairs in file order.
pub type Metadata = Vec<(String, String)>;

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixFile {
    /// Header entries in file order. `rows` and `cols` are managed by the
    /// writer and not stored here.
    pub metadata: Metadata,
    pub values: Array2<f64>,
}

/// Formats a float with 17 significant digits.
pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

impl MatrixFile {
    pub fn new(values: Array2<f64>) -> Self {
        Self { metadata: Vec::new(), values }
    }

    /// Appends a header entry; later entries with the same key win on lookup.
    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.push(key, value);
        self
    }

    pub fn push(&mut self, key: &str, value: impl ToString) {
        let value = value.to_string();
        assert!(
            !key.contains('=') && !key.contains('\n') && !value.contains('\n'),
            "matrix header entries must be single-line and keys may not contain '='"
        );
        self.metadata.push((key.trim().to_string(), value.trim().to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.metadata.iter().rev().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn get_f64(&self, key: &str) -> Option<f64> {
        self.get(key)?.parse().ok()
    }

    pub fn to_text(&self) -> String {
        let (rows, cols) = self.values.dim();
        let mut out = String::with_capacity(rows * cols * 24 + 256);
        for (k, v) in &self.metadata {
            let _ = writeln!(out, "# {k} = {v}");
        }
        let _ = writeln!(out, "# rows = {rows}");
        let _ = writeln!(out, "# cols = {cols}");
        for row in self.values.rows() {
            let line: Vec<String> = row.iter().map(|v| format_value(*v)).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let mut metadata = Vec::new();
        let mut data: Vec<f64> = Vec::new();
        let mut rows = 0usize;
        let mut width: Option<usize> = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(header) = line.strip_prefix('#') {
                let (k, v) = header.split_once('=').ok_or_else(|| {
                    CliError::Format(format!("line {}: header without `=`", lineno + 1))
                })?;
                metadata.push((k.trim().to_string(), v.trim().to_string()));
                continue;
            }
            let before = data.len();
            for tok in line.split_whitespace() {
                let v: f64 = tok.parse().map_err(|_| {
                    CliError::Format(format!("line {}: `{tok}` is not a number", lineno + 1))
                })?;
                data.push(v);
            }
            let n = data.len() - before;
            match width {
                None => width = Some(n),
                Some(w) if w != n => {
                    return Err(CliError::Format(format!(
                        "line {}: {n} values, expected {w}",
                        lineno + 1
                    )))
                }
                _ => {}
            }
            rows += 1;
        }
        let cols = width.unwrap_or(0);
        let declared = |key: &str| -> CliResult<Option<usize>> {
            metadata
                .iter()
                .find(|(k, _)| k == key)
                .map(|(_, v): &(String, String)| {
                    v.parse::<usize>()
                        .map_err(|_| CliError::Format(format!("header `{key}` is not an integer")))
                })
                .transpose()
        };
        if declared("rows")?.is_some_and(|r| r != rows) || declared("cols")?.is_some_and(|c| c != cols) {
            return Err(CliError::Format(format!(
                "declared shape does not match the {rows}x{cols} data block"
            )));
        }
        metadata.retain(|(k, _)| k != "rows" && k != "cols");
        let values = Array2::from_shape_vec((rows, cols), data)
            .map_err(|e| CliError::Format(e.to_string()))?;
        Ok(Self { metadata, values })
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        fs::write(path, self.to_text()).map_err(|e| CliError::io(path, e))
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }
}

/// Paths of the real and imaginary files for a complex matrix stem.
pub fn complex_paths(dir: &Path, stem: &str) -> (PathBuf, PathBuf) {
    (dir.join(format!("{stem}_re.txt")), dir.join(format!("{stem}_im.txt")))
}

/// Writes `values` as a real/imaginary file pair sharing `metadata`.
pub fn write_complex(
    dir: &Path,
    stem: &str,
    metadata: &[(String, String)],
    values: &Array2<Complex64>,
) -> CliResult<(PathBuf, PathBuf)> {
    let (re_path, im_path) = complex_paths(dir, stem);
    for (path, part, data) in [
        (&re_path, "real", values.mapv(|c| c.re)),
        (&im_path, "imaginary", values.mapv(|c| c.im)),
    ] {
        let mut file = MatrixFile { metadata: metadata.to_vec(), values: data };
        file.push("part", part);
        file.write(path)?;
    }
    Ok((re_path, im_path))
}

/// Reads a pair written by [`write_complex`]; the metadata of the real file
/// is returned.
pub fn read_complex(dir: &Path, stem: &str) -> CliResult<(Metadata, Array2<Complex64>)> {
    let (re_path, im_path) = complex_paths(dir, stem);
    let re = MatrixFile::read(&re_path)?;
    let im = MatrixFile::read(&im_path)?;
    if re.values.dim() != im.values.dim() {
        return Err(CliError::Format(format!(
            "{} and {} have different shapes",
            re_path.display(),
            im_path.display()
        )));
    }
    let values = ndarray::Zip::from(&re.values)
        .and(&im.values)
        .map_collect(|&r, &i| Complex64::new(r, i));
    let mut metadata = re.metadata;
    metadata.retain(|(k, _)| k != "part");
    Ok((metadata, values))
}
