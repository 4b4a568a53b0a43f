//! Result files. Everything is written to a temporary name and renamed into
//! place, and numbers use Rust's shortest round-trip formatting so identical
//! runs produce identical bytes.

use super::build::sha256_hex;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub file: String,
    pub sha256: String,
}

/// Atomic write: `path.tmp` then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn number(v: f64) -> String {
    format!("{v:e}")
}

/// A column of a CSV table.
pub struct Column<'a> {
    pub name: &'a str,
    pub doc: &'a str,
    pub values: Vec<String>,
}

impl<'a> Column<'a> {
    pub fn numbers(name: &'a str, doc: &'a str, values: impl IntoIterator<Item = f64>) -> Self {
        Self {
            name,
            doc,
            values: values.into_iter().map(number).collect(),
        }
    }

    /// Fixed decimal places, for grid axes.
    pub fn fixed(name: &'a str, doc: &'a str, values: impl IntoIterator<Item = f64>, decimals: usize) -> Self {
        Self {
            name,
            doc,
            values: values.into_iter().map(|v| format!("{v:.decimals$}")).collect(),
        }
    }

    pub fn text(name: &'a str, doc: &'a str, values: Vec<String>) -> Self {
        Self { name, doc, values }
    }
}

/// CSV with a `#` comment header describing the columns.
pub fn csv_bytes(title: &str, notes: &[String], columns: &[Column]) -> Result<Vec<u8>> {
    let rows = columns.first().map_or(0, |c| c.values.len());
    if columns.iter().any(|c| c.values.len() != rows) {
        return Err(Error::Usage("CSV columns differ in length".into()));
    }
    let mut head = format!("# {title}\n");
    for n in notes {
        head.push_str(&format!("# {n}\n"));
    }
    for c in columns {
        head.push_str(&format!("# {}: {}\n", c.name, c.doc));
    }
    let mut w = csv::Writer::from_writer(head.into_bytes());
    let ser = |e: csv::Error| Error::Numerical(format!("CSV encoding failed: {e}"));
    w.write_record(columns.iter().map(|c| c.name)).map_err(ser)?;
    for r in 0..rows {
        w.write_record(columns.iter().map(|c| c.values[r].as_str())).map_err(ser)?;
    }
    w.into_inner().map_err(|e| Error::Numerical(format!("CSV encoding failed: {e}")))
}

/// Files produced by one run, with their hashes.
#[derive(Debug)]
pub struct OutputSet {
    dir: PathBuf,
    pub records: Vec<OutputRecord>,
}

impl OutputSet {
    pub fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            records: vec![],
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        write_atomic(&self.dir.join(name), bytes)?;
        self.records.push(OutputRecord {
            file: name.into(),
            sha256: sha256_hex(bytes),
        });
        Ok(())
    }

    pub fn write_csv(&mut self, name: &str, title: &str, notes: &[String], columns: &[Column]) -> Result<()> {
        let bytes = csv_bytes(title, notes, columns)?;
        self.write(name, &bytes)
    }

    pub fn write_json(&mut self, name: &str, value: &serde_json::Value) -> Result<()> {
        let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Numerical(e.to_string()))?;
        s.push('\n');
        self.write(name, s.as_bytes())
    }
}

/// Read the numeric columns `x` and `y` of a CSV written by this crate
/// (or any CSV with `#` comments and a header row).
pub fn read_columns(path: &Path, x: &str, y: &str) -> Result<(Vec<f64>, Vec<f64>, String)> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let text = String::from_utf8_lossy(&bytes);
    let bad = |msg: String| Error::Data {
        path: path.display().to_string(),
        msg,
    };
    let mut rdr = crate::model::data::csv_reader(&text);
    let headers = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| bad(format!("no column named {name}")))
    };
    let (ix, iy) = (find(x)?, find(y)?);
    let (mut xs, mut ys) = (vec![], vec![]);
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let get = |i: usize| -> Result<f64> {
            rec.get(i)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| bad(format!("row {}: column {} is not a number", row + 1, i + 1)))
        };
        xs.push(get(ix)?);
        ys.push(get(iy)?);
    }
    Ok((xs, ys, sha256_hex(&bytes)))
}
