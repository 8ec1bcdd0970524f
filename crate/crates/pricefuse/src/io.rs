//! File helpers: PFT1 tensors, label lists and plain text.

use std::fs;
use std::path::Path;

use pricefuse_core::tensor::pft;
use pricefuse_core::Tensor;

use crate::error::{Error, Result};

pub fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Writes a file, creating missing parent directories.
pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

pub fn read_tensor(path: &Path) -> Result<Tensor<f32>> {
    pft::decode(&read_bytes(path)?).map_err(|e| Error::parse(path, e.to_string()))
}

pub fn write_tensor(path: &Path, t: &Tensor<f32>) -> Result<()> {
    write_bytes(path, &pft::encode(t))
}

/// `record_index,label` rows under a header line.
pub fn write_labels(path: &Path, record_index: &[usize], labels: &[usize]) -> Result<()> {
    let mut out = String::from("record_index,label\n");
    for (i, l) in record_index.iter().zip(labels) {
        out.push_str(&format!("{i},{l}\n"));
    }
    write_bytes(path, out.as_bytes())
}

pub fn read_labels(path: &Path) -> Result<(Vec<usize>, Vec<usize>)> {
    let text = read_text(path)?;
    let mut lines = text.lines();
    if lines.next() != Some("record_index,label") {
        return Err(Error::parse(path, "missing `record_index,label` header"));
    }
    let mut index = Vec::new();
    let mut labels = Vec::new();
    for (n, line) in lines.enumerate() {
        let bad = || {
            Error::parse(
                path,
                format!("line {}: expected `record_index,label`", n + 2),
            )
        };
        let (i, l) = line.split_once(',').ok_or_else(bad)?;
        index.push(i.trim().parse().map_err(|_| bad())?);
        labels.push(l.trim().parse().map_err(|_| bad())?);
    }
    Ok((index, labels))
}

pub fn require_exists(path: &Path, what: &str) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "{what} `{}` does not exist",
            path.display()
        )))
    }
}
