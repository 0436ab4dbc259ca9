//! Dense labelled square matrix shared by the correlation, distance and
//! ultrametric types.

use std::io::Write;

use crate::error::{Error, Result};

/// Square `n × n` matrix stored row-major, with one label per row/column.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    labels: Vec<String>,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn new(labels: Vec<String>, data: Vec<f64>) -> Result<Self> {
        let n = labels.len();
        if data.len() != n * n {
            return Err(Error::Shape(format!(
                "{} labels need {} entries, got {}",
                n,
                n * n,
                data.len()
            )));
        }
        Ok(SymMatrix { labels, data })
    }

    /// Builds a matrix from nested rows; fails unless every row has `n` entries.
    pub fn from_rows(labels: Vec<String>, rows: &[Vec<f64>]) -> Result<Self> {
        let n = labels.len();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Shape(format!("expected a {n}x{n} matrix")));
        }
        Self::new(labels, rows.concat())
    }

    pub(crate) fn filled(labels: Vec<String>, value: f64) -> Self {
        let n = labels.len();
        SymMatrix {
            labels,
            data: vec![value; n * n],
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.labels.len() + j]
    }

    #[inline]
    pub(crate) fn set(&mut self, i: usize, j: usize, v: f64) {
        let n = self.labels.len();
        self.data[i * n + j] = v;
    }

    pub(crate) fn set_sym(&mut self, i: usize, j: usize, v: f64) {
        self.set(i, j, v);
        self.set(j, i, v);
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.labels.len();
        &self.data[i * n..(i + 1) * n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.row(i).to_vec()).collect()
    }

    /// CSV with a header row and a leading label column. Values use the
    /// shortest representation that round-trips to the same `f64`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = Vec::with_capacity(self.len() + 1);
        header.push(String::new());
        header.extend(self.labels.iter().cloned());
        w.write_record(&header)?;
        for (i, label) in self.labels.iter().enumerate() {
            let mut record = Vec::with_capacity(self.len() + 1);
            record.push(label.clone());
            record.extend(self.row(i).iter().map(|v| v.to_string()));
            w.write_record(&record)?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }
}
