//! CSV ingestion with per-row validation.

use std::path::Path;

use pricefuse_core::prep::{normalize_header, parse_record, ParsedRecord, RawRecord};

use crate::error::{Error, Result};

/// Columns every input file must provide (after header normalization).
pub const REQUIRED_COLUMNS: [&str; 14] = [
    "brand",
    "release_date",
    "weight",
    "operation_system",
    "storage",
    "display_size",
    "display_resolution",
    "camera",
    "video",
    "processor",
    "ram",
    "battery",
    "battery_type",
    "price_euro",
];

/// A row that passed every field rule.
#[derive(Clone, Debug)]
pub struct SourceRecord {
    /// Zero-based data row index in the file, counting skipped rows.
    pub index: usize,
    pub raw: RawRecord,
    pub parsed: ParsedRecord,
}

/// A row left out, with the file line it came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Skipped {
    pub line: u64,
    pub index: usize,
    pub reason: String,
}

#[derive(Clone, Debug)]
pub struct Ingested {
    pub records: Vec<SourceRecord>,
    pub skipped: Vec<Skipped>,
    /// Data rows in the file, skipped ones included.
    pub source_rows: usize,
}

pub fn read_csv(path: &Path) -> Result<Ingested> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv_from(file, path)
}

pub fn read_csv_from(reader: impl std::io::Read, origin: &Path) -> Result<Ingested> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(normalize_header).collect();
    if let Some(missing) = REQUIRED_COLUMNS
        .iter()
        .find(|c| !headers.iter().any(|h| h == *c))
    {
        return Err(Error::parse(origin, format!("missing column `{missing}`")));
    }

    let mut out = Ingested {
        records: Vec::new(),
        skipped: Vec::new(),
        source_rows: 0,
    };
    for (index, row) in rdr.records().enumerate() {
        out.source_rows += 1;
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                skip(&mut out, line, index, format!("unreadable row: {e}"));
                continue;
            }
        };
        let line = row.position().map_or(0, |p| p.line());
        if row.len() != headers.len() {
            skip(
                &mut out,
                line,
                index,
                format!("expected {} fields, found {}", headers.len(), row.len()),
            );
            continue;
        }
        let mut raw = RawRecord::default();
        let mut price_ok = true;
        for (h, v) in headers.iter().zip(row.iter()) {
            price_ok &= raw.set(h, v);
        }
        if !price_ok {
            skip(
                &mut out,
                line,
                index,
                "invalid field `price_euro`: not a number".into(),
            );
            continue;
        }
        match parse_record(&raw) {
            Ok(parsed) => out.records.push(SourceRecord { index, raw, parsed }),
            Err(e) => skip(&mut out, line, index, e.to_string()),
        }
    }
    Ok(out)
}

fn skip(out: &mut Ingested, line: u64, index: usize, reason: String) {
    log::warn!("skipping line {line}: {reason}");
    out.skipped.push(Skipped {
        line,
        index,
        reason,
    });
}
