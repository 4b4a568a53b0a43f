//! Bundled data tables. Setting `NVPS_DATA_DIR` replaces them with files of
//! the same name from that directory.

use crate::{Error, Result};
use std::path::PathBuf;

pub const VIBRONIC_TABLE: &str = "vibronic_table.csv";
pub const SILVER_TABLE: &str = "ag_johnson_christy.csv";
pub const GOLD_TABLE: &str = "au_johnson_christy.csv";

const BUNDLED: [(&str, &str); 3] = [
    (VIBRONIC_TABLE, include_str!("../../data/vibronic_table.csv")),
    (SILVER_TABLE, include_str!("../../data/ag_johnson_christy.csv")),
    (GOLD_TABLE, include_str!("../../data/au_johnson_christy.csv")),
];

/// Text of a data table and a label describing where it came from.
#[derive(Clone, Debug)]
pub struct DataText {
    pub origin: String,
    pub text: String,
}

pub fn data_dir_override() -> Option<PathBuf> {
    std::env::var_os("NVPS_DATA_DIR").map(PathBuf::from)
}

pub fn load(name: &str) -> Result<DataText> {
    if let Some(dir) = data_dir_override() {
        let path = dir.join(name);
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        return Ok(DataText {
            origin: path.display().to_string(),
            text,
        });
    }
    bundled(name)
}

pub fn bundled(name: &str) -> Result<DataText> {
    BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(n, t)| DataText {
            origin: format!("bundled:{n}"),
            text: (*t).to_string(),
        })
        .ok_or_else(|| Error::Usage(format!("no bundled data table named {name}")))
}

/// Read a file given explicitly by path.
pub fn load_path(path: &std::path::Path) -> Result<DataText> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(DataText {
        origin: path.display().to_string(),
        text,
    })
}

pub(crate) fn csv_reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes())
}
