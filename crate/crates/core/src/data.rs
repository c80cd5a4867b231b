//! Measurement datasets: CSV I/O, distance windows, amplitude normalization
//! and empirical CDFs.
//!
//! File layout:
//!
//! ```text
//! # reference=relative_to_s
//! # source_tag=drive-by
//! distance_m,rss_db
//! 100.0,-95.5
//! ```
//!
//! Metadata comment lines (`# key=value`) may only appear before the header.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{amp_to_db, db_to_amp, Scalar};

pub const CSV_HEADER: [&str; 2] = ["distance_m", "rss_db"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub distance_m: f64,
    pub rss_db: f64,
}

/// What `rss_db` is measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reference {
    /// Absolute power in dBm.
    #[default]
    AbsoluteDbm,
    /// dB above the receiver sensitivity `S`, whose absolute value may be
    /// unknown.
    RelativeToS,
}

impl Reference {
    pub fn as_str(self) -> &'static str {
        match self {
            Reference::AbsoluteDbm => "absolute_dbm",
            Reference::RelativeToS => "relative_to_s",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "absolute_dbm" => Some(Reference::AbsoluteDbm),
            "relative_to_s" => Some(Reference::RelativeToS),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub records: Vec<MeasurementRecord>,
    pub reference: Reference,
    pub source_tag: String,
    /// Other `# key=value` metadata, in file order.
    pub extra: Vec<(String, String)>,
}

impl Dataset {
    pub fn new(records: Vec<MeasurementRecord>, reference: Reference, source_tag: &str) -> Self {
        Dataset {
            records,
            reference,
            source_tag: source_tag.to_owned(),
            extra: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn metadata(&self, key: &str) -> Option<&str> {
        self.extra
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

pub fn load_csv<R: Read>(mut input: R) -> Result<Dataset> {
    let mut text = String::new();
    input.read_to_string(&mut text)?;

    let mut ds = Dataset::default();
    let mut preamble_lines = 0;
    let mut rest = text.as_str();
    let mut header_found = false;
    while !rest.is_empty() {
        let (line, tail) = match rest.find('\n') {
            Some(i) => (&rest[..i], &rest[i + 1..]),
            None => (rest, ""),
        };
        let trimmed = line.trim();
        if trimmed.is_empty() {
            preamble_lines += 1;
            rest = tail;
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            preamble_lines += 1;
            if let Some((key, value)) = comment.split_once('=') {
                let (key, value) = (key.trim(), value.trim());
                match key {
                    "reference" => {
                        ds.reference = Reference::parse(value).ok_or_else(|| {
                            parse_error(preamble_lines, format!("unknown reference `{value}`"))
                        })?
                    }
                    "source_tag" => ds.source_tag = value.to_owned(),
                    _ => ds.extra.push((key.to_owned(), value.to_owned())),
                }
            }
            rest = tail;
            continue;
        }
        header_found = true;
        break;
    }
    if !header_found {
        return Err(parse_error(
            preamble_lines.max(1),
            "missing header `distance_m,rss_db`",
        ));
    }

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(rest.as_bytes());
    let header_line = preamble_lines + 1;
    let headers = reader
        .headers()
        .map_err(|e| parse_error(header_line, e.to_string()))?;
    if headers.iter().collect::<Vec<_>>() != CSV_HEADER {
        return Err(parse_error(
            header_line,
            format!(
                "expected header `{}`, found `{}`",
                CSV_HEADER.join(","),
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }
    for row in reader.records() {
        let row = row.map_err(|e| {
            let line = e
                .position()
                .map_or(header_line, |p| preamble_lines + p.line() as usize);
            parse_error(line, e.to_string())
        })?;
        let line = preamble_lines + row.position().map_or(0, |p| p.line() as usize);
        let field = |i: usize, name: &str| -> Result<f64> {
            let raw = row.get(i).unwrap_or("");
            let v: f64 = raw
                .parse()
                .map_err(|_| parse_error(line, format!("{name}: `{raw}` is not a number")))?;
            if !v.is_finite() {
                return Err(parse_error(line, format!("{name}: `{raw}` is not finite")));
            }
            Ok(v)
        };
        let distance_m = field(0, "distance_m")?;
        let rss_db = field(1, "rss_db")?;
        if distance_m < 0.0 {
            return Err(parse_error(line, "distance_m must be non-negative"));
        }
        ds.records.push(MeasurementRecord { distance_m, rss_db });
    }
    if ds.records.is_empty() {
        return Err(parse_error(header_line, "no data rows after header"));
    }
    Ok(ds)
}

pub fn write_csv<W: Write>(ds: &Dataset, out: W) -> Result<()> {
    let mut out = out;
    writeln!(out, "# reference={}", ds.reference.as_str())?;
    if !ds.source_tag.is_empty() {
        writeln!(out, "# source_tag={}", ds.source_tag)?;
    }
    for (k, v) in &ds.extra {
        writeln!(out, "# {k}={v}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER).map_err(csv_io)?;
    for r in &ds.records {
        w.write_record([r.distance_m.to_string(), r.rss_db.to_string()])
            .map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_io(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Keeps records with `min_m <= distance_m <= max_m`.
pub fn filter_distance(ds: &Dataset, min_m: f64, max_m: f64) -> Result<Dataset> {
    if !(min_m <= max_m) {
        return Err(Error::InvalidParameter(format!(
            "distance window [{min_m}, {max_m}] is empty or invalid"
        )));
    }
    let records: Vec<_> = ds
        .records
        .iter()
        .copied()
        .filter(|r| r.distance_m >= min_m && r.distance_m <= max_m)
        .collect();
    if records.is_empty() {
        return Err(Error::Empty("no records inside the distance window"));
    }
    Ok(Dataset {
        records,
        ..ds.clone()
    })
}

/// Linear amplitudes relative to the dB mean, ascending, with that mean.
///
/// `r_i = 10^((rss_i - mean) / 20)`, so `rss = amp_ref + 20 log10(r)`.
pub fn to_amplitudes(ds: &Dataset) -> Result<(Vec<f64>, f64)> {
    if ds.is_empty() {
        return Err(Error::Empty("dataset has no records"));
    }
    let amp_ref = ds.records.iter().map(|r| r.rss_db).sum::<f64>() / ds.len() as f64;
    let mut amps: Vec<f64> = ds
        .records
        .iter()
        .map(|r| db_to_amp(r.rss_db - amp_ref))
        .collect();
    amps.sort_by(f64::total_cmp);
    Ok((amps, amp_ref))
}

/// Inverse of the amplitude map.
pub fn amplitude_to_rss<T: Scalar>(amplitude: T, amp_ref_dbm: T) -> T {
    amp_ref_dbm + amp_to_db(amplitude)
}

/// Right-continuous step function `F(x) = #{v <= x} / n`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf<T> {
    sorted: Vec<T>,
}

pub fn ecdf<T: Scalar>(values: &[T]) -> Result<EmpiricalCdf<T>> {
    if values.is_empty() {
        return Err(Error::Empty("ecdf of an empty sample"));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidParameter("ecdf input contains NaN".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("no NaN"));
    Ok(EmpiricalCdf { sorted })
}

impl<T: Scalar> EmpiricalCdf<T> {
    pub fn eval(&self, x: T) -> T {
        let count = self.sorted.partition_point(|&v| v <= x);
        T::from_usize_lossy(count) / T::from_usize_lossy(self.sorted.len())
    }

    pub fn sorted_values(&self) -> &[T] {
        &self.sorted
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// `sup_x |F_n(x) - F(x)|` against a continuous CDF, checked on both
    /// sides of every jump.
    pub fn sup_distance<F: Fn(T) -> T>(&self, cdf: F) -> T {
        let values: Vec<T> = self.sorted.iter().map(|&x| cdf(x)).collect();
        self.sup_distance_sorted(&values)
    }

    /// [`Self::sup_distance`] given the CDF already evaluated at
    /// [`Self::sorted_values`].
    pub fn sup_distance_sorted(&self, cdf_at_values: &[T]) -> T {
        let n = T::from_usize_lossy(self.sorted.len());
        cdf_at_values
            .iter()
            .enumerate()
            .fold(T::zero(), |acc, (i, &f)| {
                let below = T::from_usize_lossy(i) / n;
                let above = T::from_usize_lossy(i + 1) / n;
                acc.max((f - below).abs()).max((above - f).abs())
            })
    }
}
