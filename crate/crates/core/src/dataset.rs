//! Annual market data: consumption, equity and risk-free gross returns.
//!
//! CSV layout (UTF-8, header row required):
//!
//! ```text
//! year,consumption_per_capita,equity_gross_return,riskfree_gross_return
//! ```
//!
//! `year` is an integer and rows must be contiguous. `consumption_per_capita`
//! is real per-capita consumption in dollars for that year. The two return
//! columns on the row for year `t` hold the gross real return realized from
//! `t` to `t + 1`, so `equity_gross_return = (p[t+1] + y[t+1]) / p[t]` and
//! `riskfree_gross_return = 1 / q[t]`. Empty cells are rejected.
//!
//! Projection inputs use a second single-row file:
//!
//! ```text
//! nondurables_bn,services_bn,gnp_deflator,population
//! ```

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{check_positive, Error, Result};

pub const DATASET_HEADER: [&str; 4] = [
    "year",
    "consumption_per_capita",
    "equity_gross_return",
    "riskfree_gross_return",
];

pub const PROJECTION_HEADER: [&str; 4] = ["nondurables_bn", "services_bn", "gnp_deflator", "population"];

const REFERENCE_CSV: &str = include_str!("../data/mehra_prescott_1889_1978.csv");
const REFERENCE_PROJECTION_CSV: &str = include_str!("../data/projection_1978.csv");

/// Values indexed by contiguous calendar years starting at `start_year`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnualSeries {
    start_year: i32,
    values: Vec<f64>,
}

impl AnnualSeries {
    pub fn new(start_year: i32, values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::SeriesTooShort {
                needed: 2,
                got: values.len(),
            });
        }
        Ok(Self { start_year, values })
    }

    pub fn start_year(&self) -> i32 {
        self.start_year
    }

    pub fn end_year(&self) -> i32 {
        self.start_year + self.values.len() as i32 - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, year: i32) -> Option<f64> {
        let offset = usize::try_from(year - self.start_year).ok()?;
        self.values.get(offset).copied()
    }

    pub fn last(&self) -> f64 {
        self.values[self.values.len() - 1]
    }
}

/// Aligned consumption and return series. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketDataset {
    consumption: AnnualSeries,
    equity_return: AnnualSeries,
    riskfree_return: AnnualSeries,
}

impl MarketDataset {
    pub fn new(consumption: AnnualSeries, equity_return: AnnualSeries, riskfree_return: AnnualSeries) -> Result<Self> {
        for s in [&equity_return, &riskfree_return] {
            if s.start_year != consumption.start_year || s.len() != consumption.len() {
                return Err(Error::Schema(format!(
                    "series span {}-{} does not match consumption span {}-{}",
                    s.start_year(),
                    s.end_year(),
                    consumption.start_year(),
                    consumption.end_year()
                )));
            }
        }
        let columns = [
            (DATASET_HEADER[1], &consumption),
            (DATASET_HEADER[2], &equity_return),
            (DATASET_HEADER[3], &riskfree_return),
        ];
        for (column, series) in columns {
            for (i, &value) in series.values.iter().enumerate() {
                if !value.is_finite() || value <= 0.0 {
                    return Err(Error::NonPositiveValue {
                        column,
                        year: series.start_year + i as i32,
                        value,
                    });
                }
            }
        }
        Ok(Self {
            consumption,
            equity_return,
            riskfree_return,
        })
    }

    /// The bundled 1889-1978 reconstruction shipped with the crate.
    pub fn reference() -> Self {
        load_dataset(REFERENCE_CSV.as_bytes()).expect("bundled dataset is valid")
    }

    pub fn consumption(&self) -> &AnnualSeries {
        &self.consumption
    }

    pub fn equity_return(&self) -> &AnnualSeries {
        &self.equity_return
    }

    pub fn riskfree_return(&self) -> &AnnualSeries {
        &self.riskfree_return
    }

    pub fn start_year(&self) -> i32 {
        self.consumption.start_year()
    }

    pub fn end_year(&self) -> i32 {
        self.consumption.end_year()
    }

    pub fn len(&self) -> usize {
        self.consumption.len()
    }

    pub fn is_empty(&self) -> bool {
        self.consumption.is_empty()
    }

    /// Copy of `self` with the last consumption entry replaced.
    pub fn with_final_consumption(&self, value: f64) -> Result<Self> {
        if !value.is_finite() || value <= 0.0 {
            return Err(Error::NonPositiveValue {
                column: DATASET_HEADER[1],
                year: self.end_year(),
                value,
            });
        }
        let mut out = self.clone();
        let last = out.consumption.values.len() - 1;
        out.consumption.values[last] = value;
        Ok(out)
    }

    /// Writes the dataset in the CSV layout accepted by [`load_dataset`].
    ///
    /// Floats use the shortest representation that parses back to the same
    /// bits, so load/write/load is lossless.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(DATASET_HEADER)?;
        for i in 0..self.len() {
            w.write_record([
                (self.start_year() + i as i32).to_string(),
                self.consumption.values[i].to_string(),
                self.equity_return.values[i].to_string(),
                self.riskfree_return.values[i].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn check_header(found: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    let found: Vec<&str> = found.iter().map(str::trim).collect();
    if found != expected {
        return Err(Error::Schema(format!(
            "expected header `{}`, found `{}`",
            expected.join(","),
            found.join(",")
        )));
    }
    Ok(())
}

fn parse_cell<T: std::str::FromStr>(record: &csv::StringRecord, idx: usize, column: &str, line: u64) -> Result<T> {
    let raw = record.get(idx).map(str::trim).unwrap_or("");
    if raw.is_empty() {
        return Err(Error::Schema(format!("line {line}: empty cell in column `{column}`")));
    }
    raw.parse()
        .map_err(|_| Error::Schema(format!("line {line}: cannot parse `{raw}` in column `{column}`")))
}

fn parse_number(record: &csv::StringRecord, idx: usize, column: &str, line: u64) -> Result<f64> {
    let v: f64 = parse_cell(record, idx, column, line)?;
    if !v.is_finite() {
        return Err(Error::Schema(format!(
            "line {line}: non-finite value in column `{column}`"
        )));
    }
    Ok(v)
}

/// Parses the dataset CSV and validates every invariant of [`MarketDataset`].
pub fn load_dataset<R: Read>(source: R) -> Result<MarketDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(source);
    check_header(reader.headers()?, &DATASET_HEADER)?;

    let mut start_year = None;
    let mut consumption = Vec::new();
    let mut equity = Vec::new();
    let mut riskfree = Vec::new();

    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let year: i32 = parse_cell(&record, 0, DATASET_HEADER[0], line)?;
        let expected = start_year.map(|s: i32| s + consumption.len() as i32);
        match expected {
            None => start_year = Some(year),
            Some(e) if year > e => {
                return Err(Error::MissingYear {
                    expected: e,
                    found: year,
                })
            }
            Some(e) if year < e => {
                return Err(Error::Schema(format!(
                    "line {line}: year {year} out of order (expected {e})"
                )))
            }
            Some(_) => {}
        }
        consumption.push(parse_number(&record, 1, DATASET_HEADER[1], line)?);
        equity.push(parse_number(&record, 2, DATASET_HEADER[2], line)?);
        riskfree.push(parse_number(&record, 3, DATASET_HEADER[3], line)?);
    }

    let start = start_year.ok_or_else(|| Error::Schema("no data rows".into()))?;
    MarketDataset::new(
        AnnualSeries::new(start, consumption)?,
        AnnualSeries::new(start, equity)?,
        AnnualSeries::new(start, riskfree)?,
    )
}

pub fn load_dataset_path(path: &Path) -> Result<MarketDataset> {
    let file = File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    load_dataset(file)
}

/// Nominal consumption aggregates and deflators used to project one year's
/// real per-capita consumption.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionInputs {
    /// Billions of dollars.
    pub nominal_nondurables: f64,
    /// Billions of dollars.
    pub nominal_services: f64,
    /// Index points, base year = 100.
    pub gnp_deflator: f64,
    /// Mid-year population.
    pub population: f64,
}

impl ProjectionInputs {
    pub fn new(nominal_nondurables: f64, nominal_services: f64, gnp_deflator: f64, population: f64) -> Result<Self> {
        check_positive("nominal_nondurables", nominal_nondurables)?;
        check_positive("nominal_services", nominal_services)?;
        check_positive("gnp_deflator", gnp_deflator)?;
        check_positive("population", population)?;
        Ok(Self {
            nominal_nondurables,
            nominal_services,
            gnp_deflator,
            population,
        })
    }

    /// 1978 forecast: 515.4 + 613.7 billion nominal dollars, deflator 150
    /// (1972 = 100), population 219,441,872.
    pub fn reference() -> Self {
        load_projection(REFERENCE_PROJECTION_CSV.as_bytes()).expect("bundled projection is valid")
    }
}

/// Real per-capita consumption in base-year dollars. Not rounded.
pub fn projected_consumption(p: &ProjectionInputs) -> f64 {
    1e9 * (p.nominal_nondurables + p.nominal_services) / (p.gnp_deflator / 100.0) / p.population
}

pub fn load_projection<R: Read>(source: R) -> Result<ProjectionInputs> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(source);
    check_header(reader.headers()?, &PROJECTION_HEADER)?;
    let mut records = reader.records();
    let record = records
        .next()
        .ok_or_else(|| Error::Schema("projection file has no data row".into()))??;
    if records.next().is_some() {
        return Err(Error::Schema("projection file must have exactly one data row".into()));
    }
    let line = record.position().map_or(0, |p| p.line());
    let mut fields = [0.0; 4];
    for (i, slot) in fields.iter_mut().enumerate() {
        *slot = parse_number(&record, i, PROJECTION_HEADER[i], line)?;
    }
    ProjectionInputs::new(fields[0], fields[1], fields[2], fields[3])
}

pub fn load_projection_path(path: &Path) -> Result<ProjectionInputs> {
    let file = File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    load_projection(file)
}
