//! Labelled datasets, CSV ingestion/emission and column scaling.
//!
//! Label 1 is the minority (fraud) class, label 0 the majority class.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::numkit::{Matrix, NumError};

/// Name of the provenance column that marks generated rows.
pub const SYNTHETIC_COLUMN: &str = "synthetic";

/// Consistency factor making the MAD estimate σ at the normal model.
pub const MAD_CONSISTENCY: f64 = 1.4826;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("parse error at line {line}, column '{column}': {message}")]
    Parse {
        line: usize,
        column: String,
        message: String,
    },
    #[error("missing value at line {line}, column '{column}'")]
    MissingValue { line: usize, column: String },
    #[error("label is not binary: {0}")]
    NonBinaryLabel(String),
    #[error("column '{0}' not found")]
    MissingColumn(String),
    #[error("column '{0}' has zero scale")]
    ZeroScaleColumn(String),
    #[error("expected {expected} columns, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("minority class (label 1, {minority} rows) is larger than the majority class ({majority} rows)")]
    MinorityNotSmaller { minority: usize, majority: usize },
    #[error("dataset must contain both classes")]
    OneClassOnly,
    #[error("I/O error on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Numeric(#[from] NumError),
}

impl DataError {
    fn io(path: &Path, source: io::Error) -> Self {
        DataError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Dictionary-encoded categorical columns.
#[derive(Debug, Clone)]
pub struct Categorical {
    names: Vec<String>,
    levels: Vec<Vec<String>>,
    /// One code vector per row, `names.len()` entries each.
    codes: Vec<Vec<u32>>,
}

impl Categorical {
    /// Encodes string rows; levels are numbered in order of first appearance.
    pub fn from_strings(names: Vec<String>, rows: &[Vec<String>]) -> Result<Self, DataError> {
        let q = names.len();
        let mut levels: Vec<Vec<String>> = vec![Vec::new(); q];
        let mut codes = Vec::with_capacity(rows.len());
        for row in rows {
            if row.len() != q {
                return Err(DataError::DimensionMismatch {
                    expected: q,
                    got: row.len(),
                });
            }
            let mut rc = Vec::with_capacity(q);
            for (j, v) in row.iter().enumerate() {
                let code = match levels[j].iter().position(|l| l == v) {
                    Some(c) => c,
                    None => {
                        levels[j].push(v.clone());
                        levels[j].len() - 1
                    }
                };
                rc.push(code as u32);
            }
            codes.push(rc);
        }
        Ok(Categorical { names, levels, codes })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn levels(&self, column: usize) -> &[String] {
        &self.levels[column]
    }

    pub fn codes(&self, row: usize) -> &[u32] {
        &self.codes[row]
    }

    pub fn label(&self, row: usize, column: usize) -> &str {
        &self.levels[column][self.codes[row][column] as usize]
    }

    pub fn rows(&self) -> usize {
        self.codes.len()
    }

    fn select_rows(&self, idx: &[usize]) -> Categorical {
        Categorical {
            names: self.names.clone(),
            levels: self.levels.clone(),
            codes: idx.iter().map(|&i| self.codes[i].clone()).collect(),
        }
    }
}

impl PartialEq for Categorical {
    // compares decoded labels, so level numbering does not matter
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names
            && self.rows() == other.rows()
            && (0..self.rows()).all(|i| (0..self.names.len()).all(|j| self.label(i, j) == other.label(i, j)))
    }
}

/// Numeric features, optional categorical columns and binary labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    feature_names: Vec<String>,
    x: Matrix,
    categorical: Option<Categorical>,
    label_name: String,
    y: Vec<u8>,
    synthetic: Option<Vec<bool>>,
}

impl Dataset {
    pub fn new(feature_names: Vec<String>, x: Matrix, y: Vec<u8>) -> Result<Self, DataError> {
        if feature_names.len() != x.cols() && x.rows() > 0 {
            return Err(DataError::DimensionMismatch {
                expected: x.cols(),
                got: feature_names.len(),
            });
        }
        if y.len() != x.rows() {
            return Err(DataError::DimensionMismatch {
                expected: x.rows(),
                got: y.len(),
            });
        }
        if let Some(bad) = y.iter().find(|&&v| v > 1) {
            return Err(DataError::NonBinaryLabel(format!("value {bad}")));
        }
        let x = if x.rows() == 0 {
            Matrix::zeros(0, feature_names.len())
        } else {
            x
        };
        Ok(Dataset {
            feature_names,
            x,
            categorical: None,
            label_name: "class".to_string(),
            y,
            synthetic: None,
        })
    }

    /// Convenience constructor with features named `x1..xp`.
    pub fn from_matrix(x: Matrix, y: Vec<u8>) -> Result<Self, DataError> {
        let names = (1..=x.cols()).map(|i| format!("x{i}")).collect();
        Dataset::new(names, x, y)
    }

    pub fn with_label_name(mut self, name: impl Into<String>) -> Self {
        self.label_name = name.into();
        self
    }

    pub fn with_categorical(mut self, cat: Categorical) -> Result<Self, DataError> {
        if cat.rows() != self.n() {
            return Err(DataError::DimensionMismatch {
                expected: self.n(),
                got: cat.rows(),
            });
        }
        self.categorical = Some(cat);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn p(&self) -> usize {
        self.x.cols()
    }

    pub fn x(&self) -> &Matrix {
        &self.x
    }

    pub fn y(&self) -> &[u8] {
        &self.y
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn label_name(&self) -> &str {
        &self.label_name
    }

    pub fn categorical(&self) -> Option<&Categorical> {
        self.categorical.as_ref()
    }

    /// Per-row provenance flags, present once synthetic rows were appended
    /// or the column was read from file.
    pub fn synthetic(&self) -> Option<&[bool]> {
        self.synthetic.as_deref()
    }

    pub fn minority_indices(&self) -> Vec<usize> {
        self.class_indices(1)
    }

    pub fn majority_indices(&self) -> Vec<usize> {
        self.class_indices(0)
    }

    pub fn class_indices(&self, label: u8) -> Vec<usize> {
        self.y
            .iter()
            .enumerate()
            .filter(|(_, &v)| v == label)
            .map(|(i, _)| i)
            .collect()
    }

    /// (majority count, minority count).
    pub fn class_counts(&self) -> (usize, usize) {
        let n1 = self.y.iter().filter(|&&v| v == 1).count();
        (self.n() - n1, n1)
    }

    /// Checks the training preconditions: both classes present and the
    /// minority (label 1) no larger than the majority.
    pub fn check_training(&self) -> Result<(), DataError> {
        let (n0, n1) = self.class_counts();
        if n0 == 0 || n1 == 0 {
            return Err(DataError::OneClassOnly);
        }
        if n1 > n0 {
            return Err(DataError::MinorityNotSmaller {
                minority: n1,
                majority: n0,
            });
        }
        Ok(())
    }

    pub fn select_rows(&self, idx: &[usize]) -> Dataset {
        Dataset {
            feature_names: self.feature_names.clone(),
            x: self.x.select_rows(idx),
            categorical: self.categorical.as_ref().map(|c| c.select_rows(idx)),
            label_name: self.label_name.clone(),
            y: idx.iter().map(|&i| self.y[i]).collect(),
            synthetic: self.synthetic.as_ref().map(|s| idx.iter().map(|&i| s[i]).collect()),
        }
    }

    /// Appends minority rows marked as synthetic. `cat_codes` must be given
    /// exactly when the dataset has categorical columns.
    pub fn append_synthetic(&self, z: &Matrix, cat_codes: Option<&[Vec<u32>]>) -> Result<Dataset, DataError> {
        if z.rows() > 0 && z.cols() != self.p() {
            return Err(DataError::DimensionMismatch {
                expected: self.p(),
                got: z.cols(),
            });
        }
        let mut out = self.clone();
        for r in z.iter_rows() {
            out.x.push_row(r)?;
        }
        out.y.extend(std::iter::repeat_n(1, z.rows()));
        match (&mut out.categorical, cat_codes) {
            (Some(cat), Some(codes)) => {
                if codes.len() != z.rows() {
                    return Err(DataError::DimensionMismatch {
                        expected: z.rows(),
                        got: codes.len(),
                    });
                }
                cat.codes.extend(codes.iter().cloned());
            }
            (None, None) => {}
            (Some(cat), None) => {
                return Err(DataError::DimensionMismatch {
                    expected: cat.names.len(),
                    got: 0,
                })
            }
            (None, Some(_)) => return Err(DataError::DimensionMismatch { expected: 0, got: 1 }),
        }
        let mut flags = self.synthetic.clone().unwrap_or_else(|| vec![false; self.n()]);
        flags.extend(std::iter::repeat_n(true, z.rows()));
        out.synthetic = Some(flags);
        Ok(out)
    }

    /// Removes the named numeric features.
    pub fn drop_features(&self, names: &[&str]) -> Result<Dataset, DataError> {
        for n in names {
            self.feature_index(n)?;
        }
        let keep: Vec<usize> = (0..self.p())
            .filter(|&j| !names.contains(&self.feature_names[j].as_str()))
            .collect();
        let rows: Vec<Vec<f64>> = self
            .x
            .iter_rows()
            .map(|r| keep.iter().map(|&j| r[j]).collect())
            .collect();
        let mut out = self.clone();
        out.x = if rows.is_empty() {
            Matrix::zeros(0, keep.len())
        } else {
            Matrix::from_rows(&rows)?
        };
        out.feature_names = keep.iter().map(|&j| self.feature_names[j].clone()).collect();
        Ok(out)
    }

    /// Replaces a feature by `ln(1 + value)`.
    pub fn log1p_feature(&self, name: &str) -> Result<Dataset, DataError> {
        let j = self.feature_index(name)?;
        let mut out = self.clone();
        for i in 0..out.n() {
            let v = out.x[(i, j)];
            if v <= -1.0 {
                return Err(DataError::Parse {
                    line: i + 2,
                    column: name.to_string(),
                    message: format!("log1p undefined for {v}"),
                });
            }
            out.x[(i, j)] = v.ln_1p();
        }
        Ok(out)
    }

    pub fn feature_index(&self, name: &str) -> Result<usize, DataError> {
        self.feature_names
            .iter()
            .position(|f| f == name)
            .ok_or_else(|| DataError::MissingColumn(name.to_string()))
    }
}

// ── CSV ─────────────────────────────────────────────────────────────────

/// Reads a headered, comma-separated file.
///
/// Every column other than the label, the listed categorical columns and a
/// `synthetic` provenance column is parsed as a real-valued feature.
pub fn read_csv(path: impl AsRef<Path>, label: &str, categorical: &[&str]) -> Result<Dataset, DataError> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| DataError::io(path, e))?;
    read_csv_from(file, label, categorical)
}

pub fn read_csv_from<R: io::Read>(reader: R, label: &str, categorical: &[&str]) -> Result<Dataset, DataError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| csv_error(e, 1))?
        .iter()
        .map(|s| s.to_string())
        .collect();
    let label_col = find_column(&header, label)
        .ok_or_else(|| DataError::NonBinaryLabel(format!("label column '{label}' not found")))?;
    let mut cat_cols = Vec::with_capacity(categorical.len());
    for c in categorical {
        cat_cols.push(
            header
                .iter()
                .position(|h| h == c)
                .ok_or_else(|| DataError::MissingColumn(c.to_string()))?,
        );
    }
    let synth_col = header.iter().position(|h| h == SYNTHETIC_COLUMN);
    let num_cols: Vec<usize> = (0..header.len())
        .filter(|j| *j != label_col && !cat_cols.contains(j) && Some(*j) != synth_col)
        .collect();

    let mut data = Vec::new();
    let mut y = Vec::new();
    let mut cat_rows: Vec<Vec<String>> = Vec::new();
    let mut synth = Vec::new();
    for (r, rec) in rdr.records().enumerate() {
        let line = r + 2;
        let rec = rec.map_err(|e| csv_error(e, line))?;
        if rec.len() != header.len() {
            return Err(DataError::Parse {
                line,
                column: String::new(),
                message: format!("expected {} fields, found {}", header.len(), rec.len()),
            });
        }
        for &j in &num_cols {
            data.push(parse_real(&rec[j], line, &header[j])?);
        }
        let lv = rec[label_col].trim();
        if is_missing(lv) {
            return Err(DataError::MissingValue {
                line,
                column: header[label_col].clone(),
            });
        }
        y.push(parse_label(lv, line)?);
        if !cat_cols.is_empty() {
            let mut row = Vec::with_capacity(cat_cols.len());
            for &j in &cat_cols {
                if rec[j].is_empty() {
                    return Err(DataError::MissingValue {
                        line,
                        column: header[j].clone(),
                    });
                }
                row.push(rec[j].to_string());
            }
            cat_rows.push(row);
        }
        if let Some(j) = synth_col {
            synth.push(
                parse_label(rec[j].trim(), line).map_err(|_| DataError::Parse {
                    line,
                    column: SYNTHETIC_COLUMN.to_string(),
                    message: format!("expected 0 or 1, found '{}'", &rec[j]),
                })? == 1,
            );
        }
    }
    let n = y.len();
    let x = Matrix::from_vec(n, num_cols.len(), data)?;
    let names = num_cols.iter().map(|&j| header[j].clone()).collect();
    let mut ds = Dataset::new(names, x, y)?.with_label_name(header[label_col].clone());
    if !cat_cols.is_empty() {
        let cat_names = cat_cols.iter().map(|&j| header[j].clone()).collect();
        ds = ds.with_categorical(Categorical::from_strings(cat_names, &cat_rows)?)?;
    }
    if synth_col.is_some() {
        ds.synthetic = Some(synth);
    }
    Ok(ds)
}

/// Exact match, else the only case-insensitive match.
fn find_column(header: &[String], name: &str) -> Option<usize> {
    if let Some(j) = header.iter().position(|h| h == name) {
        return Some(j);
    }
    let mut hits = header.iter().enumerate().filter(|(_, h)| h.eq_ignore_ascii_case(name));
    match (hits.next(), hits.next()) {
        (Some((j, _)), None) => Some(j),
        _ => None,
    }
}

fn csv_error(e: csv::Error, line: usize) -> DataError {
    let line = e.position().map_or(line, |p| p.line() as usize);
    DataError::Parse {
        line,
        column: String::new(),
        message: e.to_string(),
    }
}

fn is_missing(s: &str) -> bool {
    s.is_empty() || s.eq_ignore_ascii_case("na") || s.eq_ignore_ascii_case("nan")
}

fn parse_real(s: &str, line: usize, column: &str) -> Result<f64, DataError> {
    let t = s.trim();
    if is_missing(t) {
        return Err(DataError::MissingValue {
            line,
            column: column.to_string(),
        });
    }
    match t.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(DataError::Parse {
            line,
            column: column.to_string(),
            message: format!("not a finite number: '{t}'"),
        }),
    }
}

fn parse_label(s: &str, line: usize) -> Result<u8, DataError> {
    match s.parse::<f64>() {
        Ok(0.0) => Ok(0),
        Ok(1.0) => Ok(1),
        _ => Err(DataError::NonBinaryLabel(format!("line {line}: value '{s}'"))),
    }
}

/// Writes the dataset as CSV: numeric features, categorical columns (as their
/// original labels), the label column and, if requested, the `synthetic`
/// column. The file is written to a temporary sibling and renamed into place.
pub fn write_csv(d: &Dataset, path: impl AsRef<Path>, provenance: bool) -> Result<(), DataError> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    write_csv_to(d, &mut buf, provenance)?;
    write_atomic(path, &buf)
}

pub fn write_csv_to<W: io::Write>(d: &Dataset, writer: W, provenance: bool) -> Result<(), DataError> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = d.feature_names.iter().map(String::as_str).collect();
    if let Some(c) = &d.categorical {
        header.extend(c.names.iter().map(String::as_str));
    }
    header.push(&d.label_name);
    if provenance {
        header.push(SYNTHETIC_COLUMN);
    }
    let to_err = |e: csv::Error| DataError::Io {
        path: PathBuf::new(),
        source: io::Error::other(e.to_string()),
    };
    w.write_record(&header).map_err(to_err)?;
    let mut rec: Vec<String> = Vec::with_capacity(header.len());
    for i in 0..d.n() {
        rec.clear();
        rec.extend(d.x.row(i).iter().map(|v| format!("{v}")));
        if let Some(c) = &d.categorical {
            rec.extend((0..c.names.len()).map(|j| c.label(i, j).to_string()));
        }
        rec.push(d.y[i].to_string());
        if provenance {
            let s = d.synthetic.as_ref().is_some_and(|s| s[i]);
            rec.push(if s { "1" } else { "0" }.to_string());
        }
        w.write_record(&rec).map_err(to_err)?;
    }
    w.flush().map_err(|e| DataError::Io {
        path: PathBuf::new(),
        source: e,
    })
}

/// Writes `bytes` to a temporary file beside `path` and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), DataError> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp-{}", std::process::id()));
    fs::write(&tmp, bytes).map_err(|e| DataError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        DataError::io(path, e)
    })
}

// ── Scaling ─────────────────────────────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalingMode {
    None,
    /// Mean and standard deviation.
    Standard,
    /// Median and MAD × 1.4826.
    Robust,
}

impl std::str::FromStr for ScalingMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "none" => Ok(ScalingMode::None),
            "standard" => Ok(ScalingMode::Standard),
            "robust" => Ok(ScalingMode::Robust),
            other => Err(format!("unknown scaling mode '{other}' (none, standard, robust)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingSpec {
    pub mode: ScalingMode,
    pub center: Vec<f64>,
    pub scale: Vec<f64>,
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Median absolute deviation (unscaled).
pub fn mad(values: &[f64]) -> f64 {
    let m = median(values);
    let dev: Vec<f64> = values.iter().map(|v| (v - m).abs()).collect();
    median(&dev)
}

pub fn fit_scaling(d: &Dataset, mode: ScalingMode) -> Result<ScalingSpec, DataError> {
    let p = d.p();
    if mode == ScalingMode::None {
        return Ok(ScalingSpec {
            mode,
            center: vec![0.0; p],
            scale: vec![1.0; p],
        });
    }
    let mut center = Vec::with_capacity(p);
    let mut scale = Vec::with_capacity(p);
    for j in 0..p {
        let col = d.x.column(j);
        let (c, s) = match mode {
            ScalingMode::Standard if col.len() >= 2 => (crate::numkit::mean(&col), crate::numkit::std_dev(&col)),
            ScalingMode::Robust if !col.is_empty() => (median(&col), mad(&col) * MAD_CONSISTENCY),
            _ => (0.0, 0.0),
        };
        if !(s > 0.0) || !s.is_finite() {
            return Err(DataError::ZeroScaleColumn(d.feature_names[j].clone()));
        }
        center.push(c);
        scale.push(s);
    }
    Ok(ScalingSpec { mode, center, scale })
}

pub fn apply_scaling(d: &Dataset, s: &ScalingSpec) -> Result<Dataset, DataError> {
    map_columns(d, s, |v, c, sc| (v - c) / sc)
}

pub fn invert_scaling(d: &Dataset, s: &ScalingSpec) -> Result<Dataset, DataError> {
    map_columns(d, s, |v, c, sc| v * sc + c)
}

fn map_columns(d: &Dataset, s: &ScalingSpec, f: impl Fn(f64, f64, f64) -> f64) -> Result<Dataset, DataError> {
    if s.center.len() != d.p() || s.scale.len() != d.p() {
        return Err(DataError::DimensionMismatch {
            expected: d.p(),
            got: s.center.len(),
        });
    }
    let mut out = d.clone();
    if s.mode == ScalingMode::None {
        return Ok(out);
    }
    for i in 0..out.n() {
        for (j, v) in out.x.row_mut(i).iter_mut().enumerate() {
            *v = f(*v, s.center[j], s.scale[j]);
        }
    }
    Ok(out)
}
