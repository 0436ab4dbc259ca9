//! Loading and aligning raw signal panels from delimited text.
//!
//! Missing observations are stored as `NaN`; every consumer in this crate
//! treats `NaN` as "absent", never as a number.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Opaque, sortable observation key. Integer keys sort numerically and
/// before any text key; text keys (e.g. ISO-8601 dates) sort lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Timestamp {
    Index(i64),
    Key(String),
}

impl Timestamp {
    pub fn parse(raw: &str) -> Timestamp {
        match raw.parse::<i64>() {
            Ok(v) => Timestamp::Index(v),
            Err(_) => Timestamp::Key(raw.to_string()),
        }
    }
}

impl Ord for Timestamp {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Timestamp::Index(a), Timestamp::Index(b)) => a.cmp(b),
            (Timestamp::Key(a), Timestamp::Key(b)) => a.cmp(b),
            (Timestamp::Index(_), Timestamp::Key(_)) => Ordering::Less,
            (Timestamp::Key(_), Timestamp::Index(_)) => Ordering::Greater,
        }
    }
}

impl PartialOrd for Timestamp {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Timestamp::Index(v) => write!(f, "{v}"),
            Timestamp::Key(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LoadOptions {
    pub delimiter: u8,
    /// Whether the first column holds timestamps. Without it rows are keyed `0..T`.
    pub time_column: bool,
    /// Cell contents treated as missing. A literal `NaN` is always missing.
    pub missing_markers: Vec<String>,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            delimiter: b',',
            time_column: true,
            missing_markers: vec![String::new(), "NA".to_string()],
        }
    }
}

/// Aligned matrix of raw signals, `values[t][i]` stored row-major.
#[derive(Debug, Clone)]
pub struct TimeSeriesPanel {
    assets: Vec<String>,
    timestamps: Vec<Timestamp>,
    values: Vec<f64>,
}

pub(crate) fn check_labels(assets: &[String]) -> Result<()> {
    if assets.len() < 2 {
        return Err(Error::Schema(format!(
            "need at least 2 assets, got {}",
            assets.len()
        )));
    }
    let mut seen = HashSet::new();
    for a in assets {
        if a.is_empty() {
            return Err(Error::Schema("empty asset label".into()));
        }
        if !seen.insert(a.as_str()) {
            return Err(Error::Schema(format!("duplicate asset label {a:?}")));
        }
    }
    Ok(())
}

impl TimeSeriesPanel {
    /// Validating constructor. `values` is row-major `[time × asset]`, `NaN` = missing.
    pub fn new(assets: Vec<String>, timestamps: Vec<Timestamp>, values: Vec<f64>) -> Result<Self> {
        check_labels(&assets)?;
        if let Some(w) = timestamps.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::Schema(format!(
                "timestamps not strictly increasing at {} -> {}",
                w[0], w[1]
            )));
        }
        if values.len() != timestamps.len() * assets.len() {
            return Err(Error::Shape(format!(
                "{} timestamps x {} assets needs {} values, got {}",
                timestamps.len(),
                assets.len(),
                timestamps.len() * assets.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| v.is_infinite()) {
            return Err(Error::Domain("infinite signal value".into()));
        }
        Ok(TimeSeriesPanel {
            assets,
            timestamps,
            values,
        })
    }

    /// Builds a panel keyed `0..T` from per-time rows.
    pub fn from_rows(assets: Vec<String>, rows: &[Vec<f64>]) -> Result<Self> {
        let n = assets.len();
        if let Some(bad) = rows.iter().position(|r| r.len() != n) {
            return Err(Error::Shape(format!(
                "row {bad} has {} values, expected {n}",
                rows[bad].len()
            )));
        }
        let timestamps = (0..rows.len() as i64).map(Timestamp::Index).collect();
        Self::new(assets, timestamps, rows.concat())
    }

    pub fn assets(&self) -> &[String] {
        &self.assets
    }

    pub fn timestamps(&self) -> &[Timestamp] {
        &self.timestamps
    }

    pub fn n_assets(&self) -> usize {
        self.assets.len()
    }

    pub fn n_times(&self) -> usize {
        self.timestamps.len()
    }

    #[inline]
    pub fn value(&self, t: usize, asset: usize) -> f64 {
        self.values[t * self.assets.len() + asset]
    }

    pub fn is_missing(&self, t: usize, asset: usize) -> bool {
        self.value(t, asset).is_nan()
    }

    pub fn row(&self, t: usize) -> &[f64] {
        let n = self.assets.len();
        &self.values[t * n..(t + 1) * n]
    }

    pub fn column(&self, asset: usize) -> Vec<f64> {
        (0..self.n_times()).map(|t| self.value(t, asset)).collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn asset_index(&self, label: &str) -> Option<usize> {
        self.assets.iter().position(|a| a == label)
    }

    /// Writes the panel in the format [`load_panel`] reads. Missing cells are
    /// written as `NA` when that marker is accepted, else as the first marker.
    pub fn write_csv<W: Write>(&self, writer: W, opts: &LoadOptions) -> Result<()> {
        let marker = if opts.missing_markers.iter().any(|m| m == "NA") {
            "NA".to_string()
        } else {
            opts.missing_markers.first().cloned().unwrap_or_default()
        };
        let mut w = csv::WriterBuilder::new()
            .delimiter(opts.delimiter)
            .from_writer(writer);
        let mut header: Vec<String> = Vec::with_capacity(self.n_assets() + 1);
        if opts.time_column {
            header.push("time".into());
        }
        header.extend(self.assets.iter().cloned());
        w.write_record(&header)?;
        for (t, ts) in self.timestamps.iter().enumerate() {
            let mut rec: Vec<String> = Vec::with_capacity(header.len());
            if opts.time_column {
                rec.push(ts.to_string());
            }
            rec.extend(self.row(t).iter().map(|v| {
                if v.is_nan() {
                    marker.clone()
                } else {
                    v.to_string()
                }
            }));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

impl PartialEq for TimeSeriesPanel {
    /// Missing cells compare equal to each other.
    fn eq(&self, other: &Self) -> bool {
        self.assets == other.assets
            && self.timestamps == other.timestamps
            && self.values.len() == other.values.len()
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(a, b)| a == b || (a.is_nan() && b.is_nan()))
    }
}

pub fn load_panel(path: impl AsRef<Path>, opts: &LoadOptions) -> Result<TimeSeriesPanel> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_panel(file, opts)
}

/// Parses a panel from any reader; rows are sorted by timestamp.
pub fn read_panel<R: Read>(reader: R, opts: &LoadOptions) -> Result<TimeSeriesPanel> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(opts.delimiter)
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = rdr.records();
    let header = match records.next() {
        Some(rec) => rec?,
        None => return Err(Error::Schema("empty input: no header row".into())),
    };
    let skip = usize::from(opts.time_column);
    if header.len() <= skip {
        return Err(Error::Schema("header names no assets".into()));
    }
    let assets: Vec<String> = header.iter().skip(skip).map(str::to_string).collect();
    check_labels(&assets)?;
    let width = header.len();

    let mut rows: Vec<(Timestamp, Vec<f64>)> = Vec::new();
    for (row_no, rec) in records.enumerate() {
        let rec = rec?;
        let line = rec.position().map_or(row_no as u64 + 2, |p| p.line());
        if rec.len() == 1 && rec.get(0) == Some("") {
            continue;
        }
        if rec.len() != width {
            return Err(Error::Parse {
                line,
                message: format!("expected {width} fields, found {}", rec.len()),
            });
        }
        let ts = if opts.time_column {
            Timestamp::parse(&rec[0])
        } else {
            Timestamp::Index(rows.len() as i64)
        };
        let mut values = Vec::with_capacity(assets.len());
        for (cell, asset) in rec.iter().skip(skip).zip(&assets) {
            if opts.missing_markers.iter().any(|m| m == cell) {
                values.push(f64::NAN);
                continue;
            }
            match cell.parse::<f64>() {
                Ok(v) if v.is_nan() => values.push(f64::NAN),
                Ok(v) if v.is_finite() => values.push(v),
                _ => {
                    return Err(Error::Parse {
                        line,
                        message: format!("invalid value {cell:?} for asset {asset:?}"),
                    })
                }
            }
        }
        rows.push((ts, values));
    }
    if rows.is_empty() {
        return Err(Error::Schema("no data rows".into()));
    }
    rows.sort_by(|a, b| a.0.cmp(&b.0));
    if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::Schema(format!("duplicate timestamp {}", w[0].0)));
    }
    let (timestamps, values): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    TimeSeriesPanel::new(assets, timestamps, values.concat())
}

/// Joins panels on the intersection of their timestamps. Assets keep input order.
pub fn align_panels(panels: &[TimeSeriesPanel]) -> Result<TimeSeriesPanel> {
    let (first, rest) = panels
        .split_first()
        .ok_or_else(|| Error::Alignment("no panels given".into()))?;
    if rest.is_empty() {
        return Ok(first.clone());
    }
    let mut common: BTreeSet<&Timestamp> = first.timestamps.iter().collect();
    for p in rest {
        let ts: BTreeSet<&Timestamp> = p.timestamps.iter().collect();
        common = common.intersection(&ts).copied().collect();
    }
    if common.is_empty() {
        return Err(Error::Alignment("panels share no timestamp".into()));
    }
    let assets: Vec<String> = panels.iter().flat_map(|p| p.assets.iter().cloned()).collect();
    {
        let mut seen = HashSet::new();
        if let Some(dup) = assets.iter().find(|a| !seen.insert(a.as_str())) {
            return Err(Error::Schema(format!(
                "asset {dup:?} appears in more than one panel"
            )));
        }
    }
    let timestamps: Vec<Timestamp> = common.into_iter().cloned().collect();
    let mut values = Vec::with_capacity(timestamps.len() * assets.len());
    // Each panel's timestamps are sorted, so a moving cursor finds the rows.
    let mut cursors = vec![0usize; panels.len()];
    for ts in &timestamps {
        for (p, cur) in panels.iter().zip(cursors.iter_mut()) {
            while p.timestamps[*cur] != *ts {
                *cur += 1;
            }
            values.extend_from_slice(p.row(*cur));
        }
    }
    TimeSeriesPanel::new(assets, timestamps, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<TimeSeriesPanel> {
        read_panel(text.as_bytes(), &LoadOptions::default())
    }

    #[test]
    fn loads_header_and_rows() {
        let p = parse("date,A,B\n2020-01-01,1,2\n2020-01-02,3,4\n2020-01-03,5,6\n").unwrap();
        assert_eq!(p.assets(), ["A", "B"]);
        assert_eq!(p.n_times(), 3);
        assert_eq!(p.value(2, 1), 6.0);
    }

    #[test]
    fn na_marker_is_missing_not_zero() {
        let p = parse("t,A,B\n1,1,2\n2,NA,4\n3,5,6\n").unwrap();
        assert!(p.is_missing(1, 0));
        assert_eq!(p.values().iter().filter(|v| v.is_nan()).count(), 1);
        let p = parse("t,A,B\n1,1,\n2,3,4\n3,5,6\n").unwrap();
        assert!(p.is_missing(0, 1));
    }

    #[test]
    fn duplicate_asset_is_schema_error() {
        assert!(matches!(parse("t,A,A\n1,1,2\n"), Err(Error::Schema(_))));
    }

    #[test]
    fn single_asset_is_schema_error() {
        assert!(matches!(parse("t,A\n1,1\n2,2\n"), Err(Error::Schema(_))));
    }

    #[test]
    fn ragged_row_reports_line() {
        match parse("t,A,B\n1,1,2\n2,3\n3,5,6\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rows_are_sorted_and_integer_keys_sort_numerically() {
        let p = parse("t,A,B\n10,1,2\n9,3,4\n100,5,6\n").unwrap();
        let ts: Vec<String> = p.timestamps().iter().map(ToString::to_string).collect();
        assert_eq!(ts, ["9", "10", "100"]);
        assert_eq!(p.row(0), [3.0, 4.0]);
    }

    #[test]
    fn duplicate_timestamp_rejected() {
        assert!(matches!(parse("t,A,B\n1,1,2\n1,3,4\n"), Err(Error::Schema(_))));
    }

    #[test]
    fn no_time_column_indexes_rows() {
        let opts = LoadOptions {
            time_column: false,
            ..Default::default()
        };
        let p = read_panel("x,y\n1,2\n3,4\n5,6\n".as_bytes(), &opts).unwrap();
        assert_eq!(p.assets(), ["x", "y"]);
        assert_eq!(p.timestamps()[2], Timestamp::Index(2));
    }

    #[test]
    fn semicolon_delimiter_and_custom_marker() {
        let opts = LoadOptions {
            delimiter: b';',
            missing_markers: vec!["-".into()],
            ..Default::default()
        };
        let p = read_panel("t;A;B\n1;1;-\n2;3;4\n".as_bytes(), &opts).unwrap();
        assert!(p.is_missing(0, 1));
    }

    #[test]
    fn align_intersects_timestamps() {
        let a = parse("t,A,B\n1,1,1\n2,2,2\n3,3,3\n").unwrap();
        let b = parse("t,C,D\n2,20,0.2\n3,30,0.3\n4,40,0.4\n").unwrap();
        let m = align_panels(&[a, b]).unwrap();
        assert_eq!(m.assets(), ["A", "B", "C", "D"]);
        assert_eq!(m.timestamps(), [Timestamp::Index(2), Timestamp::Index(3)]);
        assert_eq!(m.row(1), [3.0, 3.0, 30.0, 0.3]);
    }

    #[test]
    fn align_single_panel_is_identity() {
        let a = parse("t,A,B\n1,1,1\n2,2,2\n").unwrap();
        assert_eq!(align_panels(std::slice::from_ref(&a)).unwrap(), a);
    }

    #[test]
    fn align_disjoint_timestamps_fails() {
        let a = parse("t,A,B\n1,1,1\n2,2,2\n").unwrap();
        let b = parse("t,C,D\n3,1,1\n4,2,2\n").unwrap();
        assert!(matches!(align_panels(&[a, b]), Err(Error::Alignment(_))));
    }

    #[test]
    fn align_overlapping_assets_fails() {
        let a = parse("t,A,B\n1,1,1\n2,2,2\n").unwrap();
        assert!(matches!(align_panels(&[a.clone(), a]), Err(Error::Schema(_))));
    }
}
