//! Sample statistics and the log-normal moment formula.

use serde::{Deserialize, Serialize};

use crate::dataset::MarketDataset;
use crate::error::{Error, Result};

/// Divisor used for sample variances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarianceConvention {
    /// Divide by `n`.
    #[default]
    Population,
    /// Divide by `n - 1`.
    Sample,
}

/// Which consumption levels feed `mu_z` and `sigma2_z`.
///
/// The unconditional level moments are a reconstruction: `Full` (the default)
/// includes the final year of the active dataset variant, which is what makes
/// the realized and projected variants produce different expected utilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LevelWindow {
    #[default]
    Full,
    ExcludeFinal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MomentOptions {
    pub variance: VarianceConvention,
    pub levels: LevelWindow,
}

/// First and second moments of consumption growth, consumption levels and
/// gross returns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleMoments {
    /// Mean of ln(c[t+1] / c[t]).
    pub mu_x: f64,
    /// Variance of ln(c[t+1] / c[t]).
    pub sigma2_x: f64,
    /// Arithmetic mean of gross growth c[t+1] / c[t].
    pub mean_x: f64,
    /// Arithmetic mean of gross equity returns.
    pub mean_re: f64,
    /// Arithmetic mean of gross risk-free returns.
    pub mean_rf: f64,
    /// Mean of ln c[t].
    pub mu_z: f64,
    /// Variance of ln c[t].
    pub sigma2_z: f64,
}

impl SampleMoments {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("sigma2_x", self.sigma2_x), ("sigma2_z", self.sigma2_z)] {
            if v < 0.0 {
                return Err(Error::NegativeVariance(v));
            }
            if !v.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    value: v,
                    reason: "variance must be finite",
                });
            }
        }
        for (name, v) in [
            ("mean_x", self.mean_x),
            ("mean_re", self.mean_re),
            ("mean_rf", self.mean_rf),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidParameter {
                    name,
                    value: v,
                    reason: "gross mean must be finite and strictly positive",
                });
            }
        }
        for (name, v) in [("mu_x", self.mu_x), ("mu_z", self.mu_z)] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    value: v,
                    reason: "log mean must be finite",
                });
            }
        }
        Ok(())
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Two-pass variance: the mean is subtracted before squaring.
fn variance(xs: &[f64], convention: VarianceConvention) -> Result<f64> {
    let divisor = match convention {
        VarianceConvention::Population => xs.len(),
        VarianceConvention::Sample => xs.len().saturating_sub(1),
    };
    if divisor == 0 {
        return Err(Error::SeriesTooShort {
            needed: xs.len() + 1,
            got: xs.len(),
        });
    }
    let m = mean(xs);
    Ok(xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / divisor as f64)
}

/// Moments with the default options (population variance, full level window).
pub fn compute_moments(d: &MarketDataset) -> Result<SampleMoments> {
    compute_moments_with(d, MomentOptions::default())
}

pub fn compute_moments_with(d: &MarketDataset, options: MomentOptions) -> Result<SampleMoments> {
    let c = d.consumption().values();
    if c.len() < 2 {
        return Err(Error::SeriesTooShort {
            needed: 2,
            got: c.len(),
        });
    }
    let growth: Vec<f64> = c.windows(2).map(|w| w[1] / w[0]).collect();
    let log_growth: Vec<f64> = growth.iter().map(|x| x.ln()).collect();

    let levels = match options.levels {
        LevelWindow::Full => c,
        LevelWindow::ExcludeFinal => &c[..c.len() - 1],
    };
    let log_levels: Vec<f64> = levels.iter().map(|v| v.ln()).collect();

    let m = SampleMoments {
        mu_x: mean(&log_growth),
        sigma2_x: variance(&log_growth, options.variance)?,
        mean_x: mean(&growth),
        mean_re: mean(d.equity_return().values()),
        mean_rf: mean(d.riskfree_return().values()),
        mu_z: mean(&log_levels),
        sigma2_z: variance(&log_levels, options.variance)?,
    };
    m.validate()?;
    Ok(m)
}

/// `ln E(z^a) = a mu + a^2 sigma2 / 2` for log-normal `z`.
pub fn lognormal_log_moment(a: f64, mu: f64, sigma2: f64) -> Result<f64> {
    if sigma2 < 0.0 {
        return Err(Error::NegativeVariance(sigma2));
    }
    Ok(a * mu + 0.5 * a * a * sigma2)
}

/// `E(z^a) = exp(a mu + a^2 sigma2 / 2)` for `ln z ~ N(mu, sigma2)`.
pub fn lognormal_moment(a: f64, mu: f64, sigma2: f64) -> Result<f64> {
    lognormal_log_moment(a, mu, sigma2).map(f64::exp)
}

/// `ln E(x) - (mu_x + sigma2_x / 2)`.
///
/// Zero exactly when the sample satisfies the log-normal mean identity. This
/// is also the residual the third pricing equation is left with once the
/// first two are solved for the sufficiency factors.
pub fn consistency_gap(m: &SampleMoments) -> f64 {
    m.mean_x.ln() - (m.mu_x + 0.5 * m.sigma2_x)
}
