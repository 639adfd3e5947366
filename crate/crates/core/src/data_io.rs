//! Delimited-text datasets.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::sample::Sample;
use crate::scalar::Scalar;

/// Entries treated as missing in addition to the empty string.
const MISSING: [&str; 5] = ["NA", "N/A", "NaN", "nan", "?"];

/// Named numeric columns of equal length, complete cases only.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub columns: Vec<String>,
    /// `n x d`, row order as loaded.
    pub data: Array2<f64>,
    pub provenance: String,
    pub dropped_rows: usize,
}

impl Dataset {
    pub fn nrows(&self) -> usize {
        self.data.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.data.ncols()
    }

    pub fn to_sample<T: Scalar>(&self) -> Sample<T> {
        Sample::new(self.data.mapv(T::of))
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// First `len` rows.
    pub fn prefix(&self, len: usize) -> Result<Self> {
        if len > self.nrows() {
            return Err(Error::InvalidParameter(format!(
                "prefix of {len} rows requested from {} rows",
                self.nrows()
            )));
        }
        Ok(Self {
            name: format!("{}[..{len}]", self.name),
            columns: self.columns.clone(),
            data: self.data.slice(ndarray::s![..len, ..]).to_owned(),
            provenance: self.provenance.clone(),
            dropped_rows: self.dropped_rows,
        })
    }

    /// CSV with a header row; values carry 17 significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in self.data.rows() {
            w.write_record(row.iter().map(|v| format!("{v:.16e}")))?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadOptions {
    pub delimiter: u8,
    /// Without a header, columns are named `c1, c2, ...`.
    pub has_header: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            delimiter: b',',
            has_header: true,
        }
    }
}

fn parse_cell(s: &str) -> Option<f64> {
    let s = s.trim();
    if s.is_empty() || MISSING.contains(&s) {
        return None;
    }
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Comma-separated file with a header row.
pub fn load_csv(path: impl AsRef<Path>, select: Option<&[String]>) -> Result<Dataset> {
    load_delimited(path, select, &LoadOptions::default())
}

pub fn load_delimited(path: impl AsRef<Path>, select: Option<&[String]>, opts: &LoadOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let mut text = String::new();
    File::open(path)?.read_to_string(&mut text)?;
    let name = path
        .file_stem()
        .map_or_else(|| "data".to_string(), |s| s.to_string_lossy().into_owned());
    parse_delimited(&text, &name, &path.display().to_string(), select, opts)
}

/// Parses delimited text. `select` entries are header names or 1-based
/// positions (`N`, `N-M`). Without `select`, every column whose present
/// entries all parse as numbers is kept. Rows with a missing or
/// unparseable entry in a kept column are dropped and counted.
pub fn parse_delimited(
    text: &str,
    name: &str,
    source: &str,
    select: Option<&[String]>,
    opts: &LoadOptions,
) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(opts.delimiter)
        .has_headers(opts.has_header)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let records: Vec<csv::StringRecord> = reader.records().collect::<Result<_, _>>()?;
    let width = if opts.has_header {
        reader.headers()?.len()
    } else {
        records.first().map_or(0, |r| r.len())
    };
    let header: Vec<String> = if opts.has_header {
        reader.headers()?.iter().map(str::to_string).collect()
    } else {
        (1..=width).map(|i| format!("c{i}")).collect()
    };

    let chosen: Vec<usize> = match select {
        Some(names) => {
            let mut chosen = Vec::new();
            for n in names {
                chosen.extend(resolve_column(&header, n).ok_or_else(|| {
                    Error::Data(format!("column {n:?} not found in {source}"))
                })?);
            }
            chosen
        }
        None => (0..width)
            .filter(|&j| {
                let mut present = records
                    .iter()
                    .filter_map(|r| r.get(j))
                    .filter(|s| !s.trim().is_empty() && !MISSING.contains(&s.trim()))
                    .peekable();
                present.peek().is_some() && present.all(|s| parse_cell(s).is_some())
            })
            .collect(),
    };
    if chosen.is_empty() {
        return Err(Error::Data(format!("no numeric columns in {source}")));
    }

    let mut values = Vec::with_capacity(records.len() * chosen.len());
    let mut kept = 0;
    let mut dropped = 0;
    for rec in &records {
        let row: Option<Vec<f64>> = chosen.iter().map(|&j| rec.get(j).and_then(parse_cell)).collect();
        match row {
            Some(row) => {
                values.extend(row);
                kept += 1;
            }
            None => dropped += 1,
        }
    }
    if kept == 0 {
        return Err(Error::Data(format!("no complete rows in {source}")));
    }
    let data = Array2::from_shape_vec((kept, chosen.len()), values).expect("row-major fill");
    Ok(Dataset {
        name: name.to_string(),
        columns: chosen.iter().map(|&j| header[j].clone()).collect(),
        data,
        provenance: format!("{source}; {dropped} incomplete rows dropped"),
        dropped_rows: dropped,
    })
}

/// A header name, else a 1-based position `N` or inclusive range `N-M`.
fn resolve_column(header: &[String], token: &str) -> Option<Vec<usize>> {
    if let Some(j) = header.iter().position(|h| h == token) {
        return Some(vec![j]);
    }
    let position = |s: &str| s.trim().parse::<usize>().ok().filter(|&p| p >= 1 && p <= header.len());
    match token.split_once('-') {
        Some((a, b)) => {
            let (a, b) = (position(a)?, position(b)?);
            (a <= b).then(|| (a - 1..b).collect())
        }
        None => position(token).map(|p| vec![p - 1]),
    }
}

/// Nested prefixes of the rows in load order.
pub fn subsample_prefix_sweep(d: &Dataset, sizes: &[usize]) -> Result<Vec<Dataset>> {
    sizes.iter().map(|&s| d.prefix(s)).collect()
}
