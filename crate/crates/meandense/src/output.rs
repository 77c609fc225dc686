//! CSV tables and the run manifest.

use std::fs::File;
use std::path::{Path, PathBuf};

use meandense_core::Point;

use crate::error::CliError;

/// A CSV file with a fixed header, written row by row.
#[derive(Debug)]
pub struct Table {
    path: PathBuf,
    writer: csv::Writer<File>,
    width: usize,
}

impl Table {
    pub fn create(path: impl AsRef<Path>, header: &[String]) -> Result<Self, CliError> {
        let path = path.as_ref().to_path_buf();
        let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        let mut writer = csv::Writer::from_writer(file);
        writer.write_record(header)?;
        Ok(Table {
            path,
            writer,
            width: header.len(),
        })
    }

    pub fn row(&mut self, cells: &[String]) -> Result<(), CliError> {
        debug_assert_eq!(cells.len(), self.width);
        self.writer.write_record(cells)?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<PathBuf, CliError> {
        self.writer.flush().map_err(|e| CliError::io(&self.path, e))?;
        Ok(self.path)
    }
}

/// `prefix1, …, prefixd`.
pub fn coord_header(prefix: &str, dim: usize) -> Vec<String> {
    (1..=dim).map(|k| format!("{prefix}{k}")).collect()
}

pub fn header(parts: &[&str]) -> Vec<String> {
    parts.iter().map(|s| s.to_string()).collect()
}

/// Shortest representation that round-trips.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

pub fn coords(p: &Point) -> Vec<String> {
    p.coords().iter().map(|c| num(*c)).collect()
}

pub fn write_json(path: impl AsRef<Path>, value: &serde_json::Value) -> Result<PathBuf, CliError> {
    let path = path.as_ref().to_path_buf();
    let text = serde_json::to_string_pretty(value).expect("manifest values serialize");
    std::fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for v in [0.1, 1.0 / 3.0, 1e-300, 12345.0, -0.0] {
            assert_eq!(num(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
        assert_eq!(coord_header("x", 3), vec!["x1", "x2", "x3"]);
    }

    #[test]
    fn table_writes_header_and_rows() {
        let dir = tempfile::tempdir().unwrap();
        let mut t = Table::create(dir.path().join("a.csv"), &header(&["a", "b"])).unwrap();
        t.row(&[num(1.0), "x".into()]).unwrap();
        let p = t.finish().unwrap();
        assert_eq!(std::fs::read_to_string(p).unwrap(), "a,b\n1.0,x\n");
    }
}
