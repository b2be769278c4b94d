//! Dated multi-series grid used for standardized returns and synthetic data.

use std::io::{Read, Write};

use chrono::NaiveDate;
use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::format::sig9;

/// Rows are dates, columns are markets.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesPanel {
    pub dates: Vec<NaiveDate>,
    pub symbols: Vec<String>,
    pub values: DMatrix<f64>,
}

impl SeriesPanel {
    pub fn new(dates: Vec<NaiveDate>, symbols: Vec<String>, values: DMatrix<f64>) -> Result<Self> {
        if values.nrows() != dates.len() || values.ncols() != symbols.len() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} grid for {} dates and {} symbols",
                values.nrows(),
                values.ncols(),
                dates.len(),
                symbols.len()
            )));
        }
        Ok(SeriesPanel { dates, symbols, values })
    }

    pub fn n_rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.values.ncols()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.values.column(j).iter().copied().collect()
    }

    pub fn column_index(&self, symbol: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s == symbol)
    }

    /// Sub-panel restricted to the given symbols, in that order.
    pub fn select(&self, symbols: &[String]) -> Result<SeriesPanel> {
        let idx = symbols
            .iter()
            .map(|s| self.column_index(s).ok_or_else(|| Error::DimensionMismatch(format!("symbol {s} not in panel"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(SeriesPanel {
            dates: self.dates.clone(),
            symbols: symbols.to_vec(),
            values: self.values.select_columns(&idx),
        })
    }

    /// Contiguous row range `start..end`.
    pub fn rows(&self, start: usize, end: usize) -> SeriesPanel {
        SeriesPanel {
            dates: self.dates[start..end].to_vec(),
            symbols: self.symbols.clone(),
            values: self.values.rows(start, end - start).into_owned(),
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(std::iter::once("date".to_string()).chain(self.symbols.iter().cloned()))?;
        for (t, d) in self.dates.iter().enumerate() {
            w.write_record(std::iter::once(d.to_string()).chain(self.values.row(t).iter().map(|&v| sig9(v))))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Read a `date,<sym1>,...` grid as written by [`SeriesPanel::write_csv`].
    pub fn read_csv<R: Read>(input: R) -> Result<SeriesPanel> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let header = rdr.headers()?.clone();
        if header.is_empty() || &header[0] != "date" {
            return Err(Error::MalformedRow { line: 1, message: "header must start with `date`".into() });
        }
        let symbols: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let mut dates = Vec::new();
        let mut data = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
            let bad = |message: String| Error::MalformedRow { line, message };
            if rec.len() != header.len() {
                return Err(bad(format!("expected {} fields, found {}", header.len(), rec.len())));
            }
            dates.push(
                NaiveDate::parse_from_str(&rec[0], "%Y-%m-%d")
                    .map_err(|e| bad(format!("invalid date {:?}: {e}", &rec[0])))?,
            );
            for field in rec.iter().skip(1) {
                let v: f64 = field.parse().map_err(|_| bad(format!("non-numeric value {field:?}")))?;
                if !v.is_finite() {
                    return Err(bad(format!("non-finite value {field:?}")));
                }
                data.push(v);
            }
        }
        let values = DMatrix::from_row_slice(dates.len(), symbols.len(), &data);
        SeriesPanel::new(dates, symbols, values)
    }
}
