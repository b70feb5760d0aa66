//! Table rendering and machine-readable export.
//!
//! Text and CSV output print numbers with six decimals. CSV and JSON carry
//! each number twice: the six-decimal string under its own name and the
//! full-precision value under `<name>_exact`. Parsing reads the exact keys.
//!
//! JSON export document:
//!
//! ```text
//! {
//!   "variant": "realized",
//!   "calibration": { "zeta", "xi", "rho", "residuals": [r1, r2, r3], "consistency_gap" },
//!   "classifications": [ row, ... ]
//! }
//! ```

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::calibration::CalibrationResult;
use crate::classify::{AllocationSign, RiskAttitude, RiskLabel};
use crate::error::{Error, Result};
use crate::utility::UtilityComparison;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Realized,
    Projected,
}

impl Variant {
    pub fn as_str(&self) -> &'static str {
        match self {
            Variant::Realized => "realized",
            Variant::Projected => "projected",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InvestorType {
    Equity,
    RiskFree,
}

impl InvestorType {
    pub fn heading(&self) -> &'static str {
        match self {
            InvestorType::Equity => "Type of equity investors",
            InvestorType::RiskFree => "Type of risk-free asset investors",
        }
    }

    fn subject(&self) -> &'static str {
        match self {
            InvestorType::Equity => "Equity investors",
            InvestorType::RiskFree => "Risk-free asset investors",
        }
    }
}

pub fn allocation_text(investor: InvestorType, sign: AllocationSign) -> String {
    format!("{} allocate extra {sign} utility", investor.subject())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub investor: InvestorType,
    pub year_certain: i32,
    pub year_uncertain: i32,
    pub variant: Variant,
    pub consumption_certain: f64,
    pub consumption_uncertain: f64,
    pub certain_utility: f64,
    pub uncertain_utility: f64,
    pub allocation_text: String,
    pub label_text: String,
    pub rho: f64,
}

impl ReportRow {
    #[allow(clippy::too_many_arguments)]
    pub fn from_classification(
        investor: InvestorType,
        variant: Variant,
        year_certain: i32,
        consumption_certain: f64,
        consumption_uncertain: f64,
        cmp: &UtilityComparison,
        attitude: &RiskAttitude,
        rho: f64,
    ) -> Self {
        Self {
            investor,
            year_certain,
            year_uncertain: year_certain + 1,
            variant,
            consumption_certain,
            consumption_uncertain,
            certain_utility: cmp.certain,
            uncertain_utility: cmp.uncertain,
            allocation_text: allocation_text(investor, attitude.allocation_sign),
            label_text: attitude.label.as_str().to_string(),
            rho,
        }
    }

    fn numbers(&self) -> [(&'static str, f64); 5] {
        [
            ("consumption_certain", self.consumption_certain),
            ("consumption_uncertain", self.consumption_uncertain),
            ("certain_utility", self.certain_utility),
            ("uncertain_utility", self.uncertain_utility),
            ("rho", self.rho),
        ]
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in self.numbers() {
            if !v.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    value: v,
                    reason: "report values must be finite",
                });
            }
        }
        if RiskLabel::parse(&self.label_text).is_none() {
            return Err(Error::Schema(format!("unknown investor type `{}`", self.label_text)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Csv,
    Json,
}

fn fixed(v: f64) -> String {
    format!("{v:.6}")
}

/// Flat wire form of a row, shared by CSV and JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct RowRecord {
    investor: InvestorType,
    year_certain: i32,
    year_uncertain: i32,
    variant: Variant,
    consumption_certain: String,
    consumption_uncertain: String,
    certain_utility: String,
    uncertain_utility: String,
    allocation_text: String,
    label_text: String,
    rho: String,
    consumption_certain_exact: f64,
    consumption_uncertain_exact: f64,
    certain_utility_exact: f64,
    uncertain_utility_exact: f64,
    rho_exact: f64,
}

impl From<&ReportRow> for RowRecord {
    fn from(r: &ReportRow) -> Self {
        Self {
            investor: r.investor,
            year_certain: r.year_certain,
            year_uncertain: r.year_uncertain,
            variant: r.variant,
            consumption_certain: fixed(r.consumption_certain),
            consumption_uncertain: fixed(r.consumption_uncertain),
            certain_utility: fixed(r.certain_utility),
            uncertain_utility: fixed(r.uncertain_utility),
            allocation_text: r.allocation_text.clone(),
            label_text: r.label_text.clone(),
            rho: fixed(r.rho),
            consumption_certain_exact: r.consumption_certain,
            consumption_uncertain_exact: r.consumption_uncertain,
            certain_utility_exact: r.certain_utility,
            uncertain_utility_exact: r.uncertain_utility,
            rho_exact: r.rho,
        }
    }
}

impl From<RowRecord> for ReportRow {
    fn from(r: RowRecord) -> Self {
        Self {
            investor: r.investor,
            year_certain: r.year_certain,
            year_uncertain: r.year_uncertain,
            variant: r.variant,
            consumption_certain: r.consumption_certain_exact,
            consumption_uncertain: r.consumption_uncertain_exact,
            certain_utility: r.certain_utility_exact,
            uncertain_utility: r.uncertain_utility_exact,
            allocation_text: r.allocation_text,
            label_text: r.label_text,
            rho: r.rho_exact,
        }
    }
}

fn render_text(rows: &[ReportRow]) -> String {
    const HEADER: [&str; 7] = [
        "Year",
        "Per Capita Real Consumption",
        "Certain Utility",
        "Uncertain Utility",
        "Utility Allocation",
        "Type of Investor",
        "CRRA",
    ];
    let mut lines: Vec<[String; 7]> = vec![HEADER.map(String::from)];
    for r in rows {
        lines.push([
            format!("{} (realized)", r.year_certain),
            fixed(r.consumption_certain),
            fixed(r.certain_utility),
            String::new(),
            String::new(),
            String::new(),
            fixed(r.rho),
        ]);
        lines.push([
            format!("{} ({})", r.year_uncertain, r.variant.as_str()),
            fixed(r.consumption_uncertain),
            String::new(),
            fixed(r.uncertain_utility),
            r.allocation_text.clone(),
            r.label_text.clone(),
            String::new(),
        ]);
    }
    let mut widths = [0usize; 7];
    for line in &lines {
        for (w, cell) in widths.iter_mut().zip(line) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    for line in &lines {
        let mut s = String::new();
        for (i, cell) in line.iter().enumerate() {
            if i > 0 {
                s.push_str("  ");
            }
            let _ = write!(s, "{cell:<width$}", width = widths[i]);
        }
        out.push_str(s.trim_end());
        out.push('\n');
    }
    out
}

fn render_csv(rows: &[ReportRow]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(RowRecord::from(r))?;
    }
    w.into_inner().map_err(|e| Error::Io(e.to_string()))
}

/// Renders `rows` as one table. Output depends only on `rows` and `format`.
pub fn render_table(rows: &[ReportRow], format: Format) -> Result<Vec<u8>> {
    if rows.is_empty() {
        return Err(Error::EmptyReport);
    }
    for r in rows {
        r.validate()?;
    }
    match format {
        Format::Text => Ok(render_text(rows).into_bytes()),
        Format::Csv => render_csv(rows),
        Format::Json => {
            let records: Vec<RowRecord> = rows.iter().map(RowRecord::from).collect();
            let mut out = serde_json::to_vec_pretty(&records)?;
            out.push(b'\n');
            Ok(out)
        }
    }
}

/// Inverse of [`render_table`] for CSV and JSON.
pub fn parse_table(bytes: &[u8], format: Format) -> Result<Vec<ReportRow>> {
    let records: Vec<RowRecord> = match format {
        Format::Text => return Err(Error::Schema("text tables cannot be parsed".into())),
        Format::Csv => csv::Reader::from_reader(bytes)
            .deserialize()
            .collect::<std::result::Result<_, _>>()?,
        Format::Json => serde_json::from_slice(bytes)?,
    };
    Ok(records.into_iter().map(ReportRow::from).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSummary {
    pub zeta: f64,
    pub xi: f64,
    pub rho: f64,
    pub residuals: [f64; 3],
    pub consistency_gap: f64,
}

impl From<&CalibrationResult> for CalibrationSummary {
    fn from(c: &CalibrationResult) -> Self {
        Self {
            zeta: c.factors.zeta(),
            xi: c.factors.xi(),
            rho: c.rho,
            residuals: c.residuals,
            consistency_gap: c.consistency_gap,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExportDocument {
    pub variant: Variant,
    pub calibration: CalibrationSummary,
    pub classifications: Vec<ReportRow>,
}

#[derive(Serialize, Deserialize)]
struct ExportWire {
    variant: Variant,
    calibration: CalibrationSummary,
    classifications: Vec<RowRecord>,
}

/// JSON array with one export document per dataset variant.
pub fn render_export(docs: &[ExportDocument]) -> Result<Vec<u8>> {
    if docs.is_empty() || docs.iter().any(|d| d.classifications.is_empty()) {
        return Err(Error::EmptyReport);
    }
    let wire = docs
        .iter()
        .map(|d| {
            for r in &d.classifications {
                r.validate()?;
            }
            Ok(ExportWire {
                variant: d.variant,
                calibration: d.calibration,
                classifications: d.classifications.iter().map(RowRecord::from).collect(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = serde_json::to_vec_pretty(&wire)?;
    out.push(b'\n');
    Ok(out)
}

pub fn parse_export(bytes: &[u8]) -> Result<Vec<ExportDocument>> {
    let wire: Vec<ExportWire> = serde_json::from_slice(bytes)?;
    Ok(wire
        .into_iter()
        .map(|w| ExportDocument {
            variant: w.variant,
            calibration: w.calibration,
            classifications: w.classifications.into_iter().map(ReportRow::from).collect(),
        })
        .collect())
}
