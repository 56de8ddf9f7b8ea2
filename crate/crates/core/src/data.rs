//! Bivariate samples, CSV ingestion and the bundled football data.
//!
//! CSV dialect: comma separator, `.` decimal point, a header row naming the
//! columns `x` and `y`, UTF-8.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{BgwError, Result};

/// Ordered sequence of strictly positive `(x, y)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct BivariateSample {
    pairs: Vec<(f64, f64)>,
}

impl BivariateSample {
    pub fn new(pairs: Vec<(f64, f64)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(BgwError::Data("sample is empty".into()));
        }
        for (i, &(x, y)) in pairs.iter().enumerate() {
            if !(x > 0.0 && x.is_finite() && y > 0.0 && y.is_finite()) {
                return Err(BgwError::Data(format!(
                    "row {} = ({x}, {y}): observations must be finite and > 0",
                    i + 1
                )));
            }
        }
        Ok(Self { pairs })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.pairs.iter().copied()
    }

    pub fn xs(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.0).collect()
    }

    pub fn ys(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.1).collect()
    }

    /// Multiply every coordinate by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.pairs.iter().map(|&(x, y)| (x * factor, y * factor)).collect())
    }

    pub fn from_csv_reader<R: Read>(rdr: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(rdr);
        let headers = r.headers()?.clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| BgwError::Data(format!("CSV header lacks a '{name}' column")))
        };
        let (ix, iy) = (col("x")?, col("y")?);
        let mut pairs = Vec::new();
        for (line, rec) in r.records().enumerate() {
            let rec = rec?;
            let parse = |i: usize| -> Result<f64> {
                let field = rec.get(i).unwrap_or("");
                field.parse::<f64>().map_err(|_| {
                    BgwError::Data(format!("row {}: cannot parse '{field}' as a number", line + 1))
                })
            };
            pairs.push((parse(ix)?, parse(iy)?));
        }
        Self::new(pairs)
    }

    pub fn from_csv_path<P: AsRef<Path>>(path: P) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::from_csv_reader(f)
    }

    /// Write with header `x,y`, shortest round-trip float formatting.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "y"])?;
        for &(x, y) in &self.pairs {
            w.write_record(&[x.to_string(), y.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// The 42 American Football League games (minutes): X is the game time
    /// to the first points scored by kicking, Y the game time to the first
    /// points scored by moving the ball into the end zone.
    pub fn football() -> Self {
        Self::from_csv_reader(FOOTBALL_CSV.as_bytes()).expect("bundled data is valid")
    }
}

/// Bundled copy of `data/nfl.csv`.
pub const FOOTBALL_CSV: &str = include_str!("../data/nfl.csv");

/// The football data is modelled in units of ten minutes.
pub const FOOTBALL_SCALE: f64 = 0.1;
