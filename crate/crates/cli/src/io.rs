//! CSV input/output and the named real-data loaders.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use msdenoise::{standardize, PointCloud};
use serde::Serialize;

use crate::error::{CliError, Result};

/// Raw CSV contents: optional header and string cells.
#[derive(Debug, Clone)]
pub struct Table {
    pub path: PathBuf,
    pub header: Option<Vec<String>>,
    pub rows: Vec<Vec<String>>,
}

fn is_number(s: &str) -> bool {
    s.trim().parse::<f64>().is_ok()
}

/// Reads a comma-separated file. The first row is a header when any of its
/// cells is not a number.
pub fn read_table(path: &Path) -> Result<Table> {
    let file = File::open(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|source| CliError::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        if record.iter().all(|c| c.is_empty()) {
            continue;
        }
        rows.push(record.iter().map(str::to_string).collect::<Vec<_>>());
    }
    let header = match rows.first() {
        Some(first) if !first.iter().all(|c| is_number(c)) => Some(rows.remove(0)),
        _ => None,
    };
    if rows.is_empty() {
        return Err(CliError::NoRows {
            path: path.to_path_buf(),
        });
    }
    let width = rows[0].len();
    for (i, r) in rows.iter().enumerate() {
        if r.len() != width {
            return Err(CliError::Ragged {
                path: path.to_path_buf(),
                row: data_row(&header, i),
                expected: width,
                found: r.len(),
            });
        }
    }
    Ok(Table {
        path: path.to_path_buf(),
        header,
        rows,
    })
}

/// 1-based line number of data row `i`.
fn data_row(header: &Option<Vec<String>>, i: usize) -> usize {
    i + 1 + usize::from(header.is_some())
}

impl Table {
    pub fn width(&self) -> usize {
        self.rows[0].len()
    }

    /// Parses the first `columns` cells of every row.
    pub fn numeric(&self, columns: usize) -> Result<PointCloud> {
        let mut flat = Vec::with_capacity(self.rows.len() * columns);
        for (i, row) in self.rows.iter().enumerate() {
            for (j, cell) in row.iter().take(columns).enumerate() {
                let v: f64 = cell.parse().map_err(|_| CliError::Parse {
                    path: self.path.clone(),
                    row: data_row(&self.header, i),
                    column: j + 1,
                    value: cell.clone(),
                })?;
                if !v.is_finite() {
                    return Err(CliError::NonFinite {
                        path: self.path.clone(),
                        row: data_row(&self.header, i),
                        column: j + 1,
                    });
                }
                flat.push(v);
            }
        }
        Ok(PointCloud::from_flat(flat, columns)?)
    }

    /// Every column as coordinates.
    pub fn cloud(&self) -> Result<PointCloud> {
        self.numeric(self.width())
    }

    /// Leading columns as coordinates and the last column as class labels,
    /// numbered by first appearance.
    pub fn cloud_with_labels(&self) -> Result<(PointCloud, Vec<usize>)> {
        if self.width() < 2 {
            return Err(CliError::Usage(format!(
                "{}: a label column needs at least one coordinate column",
                self.path.display()
            )));
        }
        let cloud = self.numeric(self.width() - 1)?;
        let mut seen: Vec<&str> = Vec::new();
        let labels = self
            .rows
            .iter()
            .map(|r| {
                let last = r[r.len() - 1].as_str();
                match seen.iter().position(|s| *s == last) {
                    Some(p) => p,
                    None => {
                        seen.push(last);
                        seen.len() - 1
                    }
                }
            })
            .collect();
        Ok((cloud, labels))
    }
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes `cloud` (plus optional trailing label column) as CSV.
pub fn write_cloud(
    path: &Path,
    header: Option<&[String]>,
    cloud: &PointCloud,
    labels: Option<&[usize]>,
) -> Result<()> {
    let mut writer = csv::Writer::from_writer(create(path)?);
    let wrap = |source| CliError::Csv {
        path: path.to_path_buf(),
        source,
    };
    if let Some(h) = header {
        writer.write_record(h).map_err(wrap)?;
    }
    for (i, p) in cloud.iter().enumerate() {
        let mut record: Vec<String> = p.iter().map(f64::to_string).collect();
        if let Some(l) = labels {
            record.push(l[i].to_string());
        }
        writer.write_record(&record).map_err(wrap)?;
    }
    writer.flush().map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes text to `path`, or to stdout when `path` is `None`.
pub fn write_text(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => create(p)?.write_all(text.as_bytes()).map_err(|source| CliError::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| CliError::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}

/// Real datasets with a fixed, validated shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Dataset {
    /// Olive oil: 572 samples, 8 fatty-acid columns.
    Olive,
    /// Banknote authentication: 1372 samples, 4 wavelet features.
    Banknote,
    /// Wheat seeds: 210 samples, 7 geometric features.
    Seeds,
}

impl Dataset {
    pub fn shape(self) -> (usize, usize) {
        match self {
            Dataset::Olive => (572, 8),
            Dataset::Banknote => (1372, 4),
            Dataset::Seeds => (210, 7),
        }
    }

    /// Default number of clusters.
    pub fn default_k(self) -> usize {
        match self {
            Dataset::Olive => 7,
            Dataset::Banknote => 5,
            Dataset::Seeds => 3,
        }
    }

    /// Default bandwidth on standardized features.
    pub fn default_bandwidth(self) -> f64 {
        match self {
            Dataset::Olive => 0.587,
            Dataset::Banknote => 0.453,
            Dataset::Seeds => 0.613,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Dataset::Olive => "olive",
            Dataset::Banknote => "banknote",
            Dataset::Seeds => "seeds",
        }
    }
}

/// A loaded real dataset.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub cloud: PointCloud,
    pub labels: Option<Vec<usize>>,
}

/// Loads a local copy of `dataset`. The file holds the `d` feature columns,
/// optionally followed by one class-label column (any other leading
/// columns, such as the olive region/area codes, must be removed first).
/// Features are standardized to zero mean and unit sd unless `raw`.
pub fn load_dataset(dataset: Dataset, path: &Path, raw: bool) -> Result<Loaded> {
    let table = read_table(path)?;
    let (n, d) = dataset.shape();
    let shape_error = |found: String| CliError::Shape {
        name: dataset.name().to_string(),
        expected: format!("{n} rows x {d} columns (or {} with labels)", d + 1),
        found,
    };
    let width = table.width();
    if table.rows.len() != n || (width != d && width != d + 1) {
        return Err(shape_error(format!("{} rows x {width} columns", table.rows.len())));
    }
    let (cloud, labels) = if width == d + 1 {
        let (c, l) = table.cloud_with_labels()?;
        (c, Some(l))
    } else {
        (table.cloud()?, None)
    };
    let cloud = if raw { cloud } else { standardize(&cloud)?.0 };
    Ok(Loaded { cloud, labels })
}
