//! `rac` command line: ingest, calibrate, classify.
//!
//! Settings resolve as flags > `--config` TOML file > defaults. The dataset
//! path additionally falls back to `RAC_DATASET` and then to the bundled
//! 1889-1978 file. Exit codes: 0 success, 1 input error, 2 numerical error.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::calibration::{
    calibrate_given_rho, solve_system, CalibrationResult, ReferenceCalibration, DEFAULT_BETA, REFERENCE_PROJECTED,
    REFERENCE_REALIZED,
};
use crate::classify::{classify_pipeline, DefinitionGroup, DEFAULT_TOLERANCE};
use crate::dataset::{load_dataset_path, load_projection_path, projected_consumption, MarketDataset, ProjectionInputs};
use crate::error::{check_beta, Error, Result};
use crate::moments::{compute_moments, consistency_gap};
use crate::report::{
    render_export, render_table, CalibrationSummary, ExportDocument, Format, InvestorType, ReportRow, Variant,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

pub const DATASET_ENV: &str = "RAC_DATASET";

#[derive(Debug, Parser)]
#[command(
    name = "rac",
    version,
    about = "Sufficiency-factor calibration and investor risk-attitude classification"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a dataset and print its span and sample moments
    Ingest,
    /// Solve for the sufficiency factors and relative risk aversion
    Calibrate,
    /// Classify equity and risk-free asset investors
    Classify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupArg {
    One,
    Two,
}

impl From<GroupArg> for DefinitionGroup {
    fn from(g: GroupArg) -> Self {
        match g {
            GroupArg::One => DefinitionGroup::GroupOne,
            GroupArg::Two => DefinitionGroup::GroupTwo,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariantArg {
    Realized,
    Projected,
    Both,
}

impl VariantArg {
    fn variants(self) -> &'static [Variant] {
        match self {
            VariantArg::Realized => &[Variant::Realized],
            VariantArg::Projected => &[Variant::Projected],
            VariantArg::Both => &[Variant::Realized, Variant::Projected],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormatArg {
    Text,
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Text => Format::Text,
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// TOML file with any of the settings below
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Annual dataset CSV (falls back to $RAC_DATASET, then the bundled file)
    #[arg(long, global = true, value_name = "PATH")]
    pub dataset: Option<PathBuf>,
    /// Single-row projection inputs CSV (defaults to the bundled 1978 forecast)
    #[arg(long, global = true, value_name = "PATH")]
    pub projection: Option<PathBuf>,
    /// Subjective time discount factor in (0, 1]
    #[arg(long, global = true, value_name = "F", allow_negative_numbers = true)]
    pub beta: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub group: Option<GroupArg>,
    /// Equality tolerance for certain vs uncertain utility
    #[arg(long, global = true, value_name = "F", allow_negative_numbers = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub variant: Option<VariantArg>,
    /// Override the sufficiency factor used for every investor type
    #[arg(long, global = true, value_name = "F", allow_negative_numbers = true)]
    pub eta: Option<f64>,
    /// Fix relative risk aversion instead of solving for it
    #[arg(long, global = true, value_name = "F", allow_negative_numbers = true)]
    pub rho: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<FormatArg>,
}

/// Contents of a `--config` file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub dataset: Option<PathBuf>,
    pub projection: Option<PathBuf>,
    pub beta: Option<f64>,
    pub group: Option<GroupArg>,
    pub tol: Option<f64>,
    pub variant: Option<VariantArg>,
    pub eta: Option<f64>,
    pub rho: Option<f64>,
    pub format: Option<FormatArg>,
}

/// Fully resolved settings for one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// `None` selects the bundled dataset.
    pub dataset_path: Option<PathBuf>,
    pub projection_path: Option<PathBuf>,
    pub beta: f64,
    pub group: DefinitionGroup,
    pub tolerance: f64,
    pub variant: VariantArg,
    pub eta: Option<f64>,
    pub rho: Option<f64>,
    pub format: Format,
}

impl RunConfig {
    pub fn resolve(flags: &Flags, file: &FileConfig, env_dataset: Option<PathBuf>) -> Result<Self> {
        let cfg = Self {
            dataset_path: flags.dataset.clone().or_else(|| file.dataset.clone()).or(env_dataset),
            projection_path: flags.projection.clone().or_else(|| file.projection.clone()),
            beta: flags.beta.or(file.beta).unwrap_or(DEFAULT_BETA),
            group: flags.group.or(file.group).unwrap_or(GroupArg::Two).into(),
            tolerance: flags.tol.or(file.tol).unwrap_or(DEFAULT_TOLERANCE),
            variant: flags.variant.or(file.variant).unwrap_or(VariantArg::Both),
            eta: flags.eta.or(file.eta),
            rho: flags.rho.or(file.rho),
            format: flags.format.or(file.format).unwrap_or(FormatArg::Text).into(),
        };
        check_beta(cfg.beta)?;
        if !cfg.tolerance.is_finite() || cfg.tolerance < 0.0 {
            return Err(Error::InvalidParameter {
                name: "tol",
                value: cfg.tolerance,
                reason: "tolerance must be finite and non-negative",
            });
        }
        Ok(cfg)
    }

    fn dataset(&self) -> Result<MarketDataset> {
        match &self.dataset_path {
            Some(p) => load_dataset_path(p),
            None => Ok(MarketDataset::reference()),
        }
    }

    fn projection(&self) -> Result<ProjectionInputs> {
        match &self.projection_path {
            Some(p) => load_projection_path(p),
            None => Ok(ProjectionInputs::reference()),
        }
    }

    /// The realized dataset and, when requested, its projected-final-year copy.
    fn variant_datasets(&self) -> Result<Vec<(Variant, MarketDataset)>> {
        let realized = self.dataset()?;
        let mut out = Vec::new();
        for &v in self.variant.variants() {
            let d = match v {
                Variant::Realized => realized.clone(),
                Variant::Projected => realized.with_final_consumption(projected_consumption(&self.projection()?))?,
            };
            out.push((v, d));
        }
        Ok(out)
    }
}

fn reference_for(v: Variant) -> ReferenceCalibration {
    match v {
        Variant::Realized => REFERENCE_REALIZED,
        Variant::Projected => REFERENCE_PROJECTED,
    }
}

fn load_file_config(path: &Path) -> Result<FileConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Error::Schema(format!("{}: {e}", path.display())))
}

fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_INPUT
    }
}

/// Parses `args` and runs the selected command, reading `RAC_DATASET` from
/// the process environment.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run_with_env(args, std::env::var_os(DATASET_ENV).map(PathBuf::from), out, err)
}

pub fn run_with_env<I, T>(args: I, env_dataset: Option<PathBuf>, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if code == EXIT_OK {
                out.write_all(rendered.as_bytes())
            } else {
                err.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    let file = match cli.flags.config.as_deref().map(load_file_config).transpose() {
        Ok(f) => f.unwrap_or_default(),
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return exit_code(&e);
        }
    };
    let cfg = match RunConfig::resolve(&cli.flags, &file, env_dataset) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return exit_code(&e);
        }
    };
    // Commands render into a buffer so a closed stdout (`rac ... | head`)
    // never turns into a reported error.
    let mut buf = Vec::new();
    let result = match cli.command {
        Command::Ingest => cmd_ingest(&cfg, &mut buf),
        Command::Calibrate => cmd_calibrate(&cfg, &mut buf, err),
        Command::Classify => cmd_classify(&cfg, &mut buf),
    };
    let _ = out.write_all(&buf);
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

#[derive(Serialize)]
struct IngestSummary {
    years: usize,
    start_year: i32,
    end_year: i32,
    growth_mean: f64,
    growth_std: f64,
    mu_x: f64,
    sigma2_x: f64,
    mu_z: f64,
    sigma2_z: f64,
    mean_equity_return: f64,
    mean_riskfree_return: f64,
    consistency_gap: f64,
}

pub fn cmd_ingest(cfg: &RunConfig, out: &mut dyn Write) -> Result<i32> {
    let d = cfg.dataset()?;
    let m = compute_moments(&d)?;
    let growth: Vec<f64> = d.consumption().values().windows(2).map(|w| w[1] / w[0]).collect();
    let var = growth.iter().map(|g| (g - m.mean_x).powi(2)).sum::<f64>() / growth.len() as f64;
    let s = IngestSummary {
        years: d.len(),
        start_year: d.start_year(),
        end_year: d.end_year(),
        growth_mean: m.mean_x,
        growth_std: var.sqrt(),
        mu_x: m.mu_x,
        sigma2_x: m.sigma2_x,
        mu_z: m.mu_z,
        sigma2_z: m.sigma2_z,
        mean_equity_return: m.mean_re,
        mean_riskfree_return: m.mean_rf,
        consistency_gap: consistency_gap(&m),
    };
    match cfg.format {
        Format::Text => {
            writeln!(
                out,
                "dataset: {} years, {}\u{2013}{}",
                s.years, s.start_year, s.end_year
            )?;
            writeln!(
                out,
                "consumption growth: mean {:.6}, std {:.6}",
                s.growth_mean, s.growth_std
            )?;
            writeln!(out, "log growth: mu_x {:.6}, sigma2_x {:.6}", s.mu_x, s.sigma2_x)?;
            writeln!(out, "log levels: mu_z {:.6}, sigma2_z {:.6}", s.mu_z, s.sigma2_z)?;
            writeln!(
                out,
                "gross returns: equity {:.6}, risk-free {:.6}",
                s.mean_equity_return, s.mean_riskfree_return
            )?;
            writeln!(out, "consistency gap: {:.6e}", s.consistency_gap)?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.serialize(&s)?;
            out.write_all(&w.into_inner().map_err(|e| Error::Io(e.to_string()))?)?;
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, &s)?;
            writeln!(out)?;
        }
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct CalibrationLine {
    variant: Variant,
    #[serde(flatten)]
    calibration: CalibrationSummary,
    condition_diagnostic: f64,
}

#[derive(Serialize)]
struct CalibrationCsvLine {
    variant: Variant,
    zeta: f64,
    xi: f64,
    rho: f64,
    residual_riskfree: f64,
    residual_equity: f64,
    residual_premium: f64,
    consistency_gap: f64,
    condition_diagnostic: f64,
}

fn calibrate_variant(cfg: &RunConfig, d: &MarketDataset) -> Result<CalibrationResult> {
    let m = compute_moments(d)?;
    match cfg.rho {
        Some(rho) => calibrate_given_rho(rho, cfg.beta, &m),
        None => solve_system(cfg.beta, &m, None),
    }
}

pub fn cmd_calibrate(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let mut solved = Vec::new();
    let mut code = EXIT_OK;
    for (variant, d) in cfg.variant_datasets()? {
        match calibrate_variant(cfg, &d) {
            Ok(r) => solved.push((variant, r)),
            Err(e) if e.is_numerical() => {
                writeln!(err, "error: {} variant: {e}", variant.as_str())?;
                if matches!(e, Error::InconsistentSystem { .. } | Error::DegenerateSystem { .. }) {
                    let reference = reference_for(variant);
                    writeln!(
                        err,
                        "hint: fix risk aversion with --rho (reference value for this variant: {})",
                        reference.rho
                    )?;
                }
                code = EXIT_NUMERICAL;
            }
            Err(e) => return Err(e),
        }
    }

    match cfg.format {
        Format::Text => {
            for (variant, r) in &solved {
                writeln!(out, "variant: {}", variant.as_str())?;
                writeln!(out, "  zeta = {:.6}", r.factors.zeta())?;
                writeln!(out, "  xi   = {:.6}", r.factors.xi())?;
                writeln!(out, "  rho  = {:.6}", r.rho)?;
                writeln!(
                    out,
                    "  residuals = [{:.3e}, {:.3e}, {:.3e}]",
                    r.residuals[0], r.residuals[1], r.residuals[2]
                )?;
                writeln!(out, "  consistency gap = {:.6e}", r.consistency_gap)?;
                writeln!(out, "  condition = {:.3e}", r.condition_diagnostic)?;
            }
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for (variant, r) in &solved {
                w.serialize(CalibrationCsvLine {
                    variant: *variant,
                    zeta: r.factors.zeta(),
                    xi: r.factors.xi(),
                    rho: r.rho,
                    residual_riskfree: r.residuals[0],
                    residual_equity: r.residuals[1],
                    residual_premium: r.residuals[2],
                    consistency_gap: r.consistency_gap,
                    condition_diagnostic: r.condition_diagnostic,
                })?;
            }
            out.write_all(&w.into_inner().map_err(|e| Error::Io(e.to_string()))?)?;
        }
        Format::Json => {
            let lines: Vec<CalibrationLine> = solved
                .iter()
                .map(|(variant, r)| CalibrationLine {
                    variant: *variant,
                    calibration: r.into(),
                    condition_diagnostic: r.condition_diagnostic,
                })
                .collect();
            serde_json::to_writer_pretty(&mut *out, &lines)?;
            writeln!(out)?;
        }
    }
    Ok(code)
}

/// Rows for both investor types for one dataset variant.
///
/// Risk aversion is `cfg.rho` or the reference value for the variant; the
/// factors come from the closed form at that `rho` on this dataset, unless
/// `cfg.eta` overrides them.
pub fn classify_variant(
    cfg: &RunConfig,
    variant: Variant,
    d: &MarketDataset,
) -> Result<(CalibrationResult, Vec<ReportRow>)> {
    let rho = cfg.rho.unwrap_or(reference_for(variant).rho);
    let cal = calibrate_given_rho(rho, cfg.beta, &compute_moments(d)?)?;
    let c = d.consumption();
    let mut rows = Vec::new();
    for investor in [InvestorType::Equity, InvestorType::RiskFree] {
        let eta = cfg.eta.unwrap_or(match investor {
            InvestorType::Equity => cal.factors.zeta(),
            InvestorType::RiskFree => cal.factors.xi(),
        });
        let (cmp, attitude) = classify_pipeline(d, eta, rho, cfg.beta, cfg.group, cfg.tolerance)?;
        rows.push(ReportRow::from_classification(
            investor,
            variant,
            d.end_year() - 1,
            c.values()[c.len() - 2],
            c.last(),
            &cmp,
            &attitude,
            rho,
        ));
    }
    Ok((cal, rows))
}

pub fn cmd_classify(cfg: &RunConfig, out: &mut dyn Write) -> Result<i32> {
    let mut docs = Vec::new();
    for (variant, d) in cfg.variant_datasets()? {
        let (cal, rows) = classify_variant(cfg, variant, &d)?;
        docs.push(ExportDocument {
            variant,
            calibration: (&cal).into(),
            classifications: rows,
        });
    }
    let by_investor = |investor: InvestorType| -> Vec<ReportRow> {
        docs.iter()
            .flat_map(|doc| doc.classifications.iter().filter(|r| r.investor == investor).cloned())
            .collect()
    };

    match cfg.format {
        Format::Text => {
            for (i, investor) in [InvestorType::Equity, InvestorType::RiskFree].into_iter().enumerate() {
                if i > 0 {
                    writeln!(out)?;
                }
                writeln!(out, "{}", investor.heading())?;
                out.write_all(&render_table(&by_investor(investor), Format::Text)?)?;
            }
        }
        Format::Csv => {
            let mut rows = by_investor(InvestorType::Equity);
            rows.extend(by_investor(InvestorType::RiskFree));
            out.write_all(&render_table(&rows, Format::Csv)?)?;
        }
        Format::Json => out.write_all(&render_export(&docs)?)?,
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_flags_over_file_over_defaults() {
        let flags = Flags {
            beta: Some(0.95),
            ..Default::default()
        };
        let file = FileConfig {
            beta: Some(0.9),
            tol: Some(1e-6),
            dataset: Some("from_file.csv".into()),
            ..Default::default()
        };
        let cfg = RunConfig::resolve(&flags, &file, Some("from_env.csv".into())).unwrap();
        assert_eq!(cfg.beta, 0.95);
        assert_eq!(cfg.tolerance, 1e-6);
        assert_eq!(cfg.dataset_path, Some(PathBuf::from("from_file.csv")));
        assert_eq!(cfg.group, DefinitionGroup::GroupTwo);
        assert_eq!(cfg.variant, VariantArg::Both);

        let cfg = RunConfig::resolve(&Flags::default(), &FileConfig::default(), Some("from_env.csv".into())).unwrap();
        assert_eq!(cfg.dataset_path, Some(PathBuf::from("from_env.csv")));
        assert_eq!(cfg.beta, DEFAULT_BETA);
        assert_eq!(cfg.tolerance, DEFAULT_TOLERANCE);
        assert_eq!(cfg.format, Format::Text);
    }

    #[test]
    fn invalid_settings_are_input_errors() {
        let flags = Flags {
            beta: Some(1.5),
            ..Default::default()
        };
        let e = RunConfig::resolve(&flags, &FileConfig::default(), None).unwrap_err();
        assert_eq!(exit_code(&e), EXIT_INPUT);
        let flags = Flags {
            tol: Some(-1.0),
            ..Default::default()
        };
        assert!(RunConfig::resolve(&flags, &FileConfig::default(), None).is_err());
    }

    #[test]
    fn config_file_parses() {
        let f: FileConfig = toml::from_str("beta = 0.97\ngroup = \"one\"\nvariant = \"realized\"\n").unwrap();
        assert_eq!(f.beta, Some(0.97));
        assert_eq!(f.group, Some(GroupArg::One));
        assert_eq!(f.variant, Some(VariantArg::Realized));
        assert!(toml::from_str::<FileConfig>("bogus = 1").is_err());
    }
}
