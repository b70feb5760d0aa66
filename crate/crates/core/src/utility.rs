//! CRRA utility, its expectation under log-normal consumption, and the
//! certain/uncertain utility pair fed to the classifier.
//!
//! Definitions of risk attitude are usually stated over wealth; here they
//! are evaluated on per-capita consumption, which is what the data provide.

use serde::{Deserialize, Serialize};

use crate::dataset::MarketDataset;
use crate::error::{check_beta, check_positive, check_rho, Error, Result};
use crate::moments::{compute_moments_with, lognormal_log_moment, MomentOptions, SampleMoments};

/// Below this distance from the log limit, `(c^a - 1) / a` is evaluated by
/// its Taylor series in `a`.
const LOG_LIMIT_BAND: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UtilityForm {
    /// `(c^(1-rho) - 1) / (1 - rho)`, with `ln c` at `rho = 1`.
    #[default]
    Shifted,
    /// `c^(1-rho) / (1 - rho)`, undefined at `rho = 1`.
    Unshifted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UtilitySpec {
    rho: f64,
    form: UtilityForm,
}

impl UtilitySpec {
    pub fn new(rho: f64, form: UtilityForm) -> Result<Self> {
        check_rho(rho)?;
        Ok(Self { rho, form })
    }

    pub fn shifted(rho: f64) -> Result<Self> {
        Self::new(rho, UtilityForm::Shifted)
    }

    pub fn unshifted(rho: f64) -> Result<Self> {
        Self::new(rho, UtilityForm::Unshifted)
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn form(&self) -> UtilityForm {
        self.form
    }

    fn exponent(&self) -> f64 {
        1.0 - self.rho
    }
}

/// `(exp(a * q) - 1) / a`, continuous through `a = 0` where it equals `q`.
fn shifted_power(a: f64, q: f64) -> f64 {
    if a == 0.0 {
        q
    } else if a.abs() < LOG_LIMIT_BAND {
        let t = a * q;
        q * (1.0 + t / 2.0 + t * t / 6.0)
    } else {
        (a * q).exp_m1() / a
    }
}

pub fn crra_utility(c: f64, spec: &UtilitySpec) -> Result<f64> {
    if !c.is_finite() || c <= 0.0 {
        return Err(Error::NonPositiveConsumption(c));
    }
    let a = spec.exponent();
    match spec.form {
        UtilityForm::Shifted => Ok(shifted_power(a, c.ln())),
        UtilityForm::Unshifted if a == 0.0 => Err(Error::UndefinedAtLogLimit),
        UtilityForm::Unshifted => Ok(c.powf(a) / a),
    }
}

/// `E[u(c)]` for `ln c ~ N(mu_z, sigma2_z)`, i.e. the log-normal moment with
/// exponent `1 - rho` pushed through the utility's affine shift. Equals
/// `mu_z` at `rho = 1` for the shifted form.
pub fn expected_utility_unconditional(m: &SampleMoments, spec: &UtilitySpec) -> Result<f64> {
    expected_utility_lognormal(m.mu_z, m.sigma2_z, spec)
}

fn expected_utility_lognormal(mu: f64, sigma2: f64, spec: &UtilitySpec) -> Result<f64> {
    let a = spec.exponent();
    let log_moment = lognormal_log_moment(a, mu, sigma2)?;
    match spec.form {
        UtilityForm::Shifted if a == 0.0 => Ok(mu),
        // log_moment / a, written without the division
        UtilityForm::Shifted => Ok(shifted_power(a, mu + 0.5 * a * sigma2)),
        UtilityForm::Unshifted if a == 0.0 => Err(Error::UndefinedAtLogLimit),
        UtilityForm::Unshifted => Ok(log_moment.exp() / a),
    }
}

/// How the expected next-period utility is formed from a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpectationRecipe {
    /// Unconditional log-normal expectation over consumption levels of the
    /// whole sample (conditional and unconditional expectations coincide).
    UnconditionalLevels(MomentOptions),
    /// `c[T] = c[T-1] * x` with `ln x ~ N(mu_x, sigma2_x)`, conditioned on the
    /// decision-year consumption.
    ConditionalGrowth(MomentOptions),
}

impl Default for ExpectationRecipe {
    fn default() -> Self {
        ExpectationRecipe::UnconditionalLevels(MomentOptions::default())
    }
}

impl ExpectationRecipe {
    pub fn expected_utility(&self, d: &MarketDataset, spec: &UtilitySpec) -> Result<f64> {
        match *self {
            ExpectationRecipe::UnconditionalLevels(opts) => {
                let m = compute_moments_with(d, opts)?;
                expected_utility_unconditional(&m, spec)
            }
            ExpectationRecipe::ConditionalGrowth(opts) => {
                let m = compute_moments_with(d, opts)?;
                let c = d.consumption().values();
                let base = c[c.len() - 2].ln();
                expected_utility_lognormal(base + m.mu_x, m.sigma2_x, spec)
            }
        }
    }
}

/// `beta * eta * expected_u`.
pub fn uncertain_utility(expected_u: f64, beta: f64, eta: f64) -> Result<f64> {
    check_beta(beta)?;
    check_positive("eta", eta)?;
    Ok(beta * eta * expected_u)
}

/// Certain utility of current consumption against the discounted,
/// sufficiency-scaled expected utility of next period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UtilityComparison {
    pub certain: f64,
    pub uncertain: f64,
    pub eta: f64,
    pub beta: f64,
    pub expected_u: f64,
}

impl UtilityComparison {
    pub fn new(certain: f64, expected_u: f64, beta: f64, eta: f64) -> Result<Self> {
        let uncertain = uncertain_utility(expected_u, beta, eta)?;
        for (name, v) in [("certain", certain), ("expected_u", expected_u)] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    value: v,
                    reason: "utility must be finite",
                });
            }
        }
        Ok(Self {
            certain,
            uncertain,
            eta,
            beta,
            expected_u,
        })
    }
}

/// Holdings and prices entering the period budget identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PortfolioState {
    /// Equity held entering `t`.
    pub theta_t: f64,
    /// Equity carried into `t + 1`.
    pub theta_next: f64,
    /// Bonds held entering `t`.
    pub z_t: f64,
    /// Bonds carried into `t + 1`.
    pub z_next: f64,
    pub equity_price: f64,
    pub bond_price: f64,
    pub dividend: f64,
}

/// Consumption left after trading at `t`:
/// `theta_t (y + p) + z_t q - z_next q - theta_next p`.
pub fn implied_consumption(s: &PortfolioState) -> Result<f64> {
    for (name, v) in [
        ("theta_t", s.theta_t),
        ("theta_next", s.theta_next),
        ("z_t", s.z_t),
        ("z_next", s.z_next),
    ] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidParameter {
                name,
                value: v,
                reason: "holding must lie in [0, 1]",
            });
        }
    }
    for (name, v) in [
        ("equity_price", s.equity_price),
        ("bond_price", s.bond_price),
        ("dividend", s.dividend),
    ] {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::InvalidParameter {
                name,
                value: v,
                reason: "price must be finite and non-negative",
            });
        }
    }
    let c = s.theta_t * s.dividend + s.theta_t * s.equity_price + s.z_t * s.bond_price
        - s.z_next * s.bond_price
        - s.theta_next * s.equity_price;
    if c > 0.0 {
        Ok(c)
    } else {
        Err(Error::NonPositiveConsumption(c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_certain_utilities() {
        let u1 = crra_utility(3340.0, &UtilitySpec::shifted(1.033526).unwrap()).unwrap();
        let u2 = crra_utility(3340.0, &UtilitySpec::shifted(1.0089).unwrap()).unwrap();
        assert!((u1 - 7.103787).abs() < 1e-5, "{u1}");
        assert!((u2 - 7.827697).abs() < 1e-5, "{u2}");
    }

    #[test]
    fn shifted_utility_of_one_is_zero() {
        for rho in [0.0, 0.5, 1.0, 1.0 + 1e-9, 3.0, 40.0] {
            assert_eq!(crra_utility(1.0, &UtilitySpec::shifted(rho).unwrap()).unwrap(), 0.0);
        }
    }

    #[test]
    fn log_branch_and_series_branch() {
        let c = 250.0f64;
        assert_eq!(crra_utility(c, &UtilitySpec::shifted(1.0).unwrap()).unwrap(), c.ln());
        let near = crra_utility(c, &UtilitySpec::shifted(1.0 - 1e-9).unwrap()).unwrap();
        let expect = c.ln() * (1.0 + 1e-9 * c.ln() / 2.0);
        assert!((near - expect).abs() < 1e-14);
    }

    #[test]
    fn unshifted_form() {
        let v = crra_utility(4.0, &UtilitySpec::unshifted(0.5).unwrap()).unwrap();
        assert!((v - 4.0).abs() < 1e-12);
        assert_eq!(
            crra_utility(4.0, &UtilitySpec::unshifted(1.0).unwrap()),
            Err(Error::UndefinedAtLogLimit)
        );
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(UtilitySpec::shifted(-0.1).is_err());
        assert_eq!(
            crra_utility(0.0, &UtilitySpec::shifted(2.0).unwrap()),
            Err(Error::NonPositiveConsumption(0.0))
        );
        assert!(uncertain_utility(1.0, 0.0, 1.0).is_err());
        assert!(uncertain_utility(1.0, 1.01, 1.0).is_err());
        assert!(uncertain_utility(1.0, 0.99, 0.0).is_err());
    }

    fn moments(mu_z: f64, sigma2_z: f64) -> SampleMoments {
        SampleMoments {
            mu_x: 0.0,
            sigma2_x: 0.0,
            mean_x: 1.0,
            mean_re: 1.0,
            mean_rf: 1.0,
            mu_z,
            sigma2_z,
        }
    }

    #[test]
    fn expected_utility_degenerate_distribution() {
        let spec = UtilitySpec::shifted(2.5).unwrap();
        assert_eq!(expected_utility_unconditional(&moments(0.0, 0.0), &spec).unwrap(), 0.0);
        let c = 1540.0f64;
        let eu = expected_utility_unconditional(&moments(c.ln(), 0.0), &spec).unwrap();
        let u = crra_utility(c, &spec).unwrap();
        assert!(((eu - u) / u).abs() < 1e-12);
        let log = UtilitySpec::shifted(1.0).unwrap();
        assert_eq!(expected_utility_unconditional(&moments(7.3, 0.2), &log).unwrap(), 7.3);
    }

    #[test]
    fn uncertain_utility_scaling() {
        assert_eq!(uncertain_utility(3.25, 1.0, 1.0).unwrap(), 3.25);
        let a = uncertain_utility(6.50395, 0.99, 0.961745).unwrap();
        let b = uncertain_utility(6.50395, 0.99, 1.019392).unwrap();
        assert!((a - 6.192703).abs() < 1e-2);
        assert!((b - 6.563893).abs() < 1e-2);
    }

    #[test]
    fn comparison_is_built_from_parts() {
        let cmp = UtilityComparison::new(7.0, 6.5, 0.99, 0.96).unwrap();
        assert_eq!(cmp.uncertain, 0.99 * 0.96 * 6.5);
    }

    #[test]
    fn conditional_growth_recipe_on_constant_growth() {
        use crate::dataset::AnnualSeries;
        let c: Vec<f64> = (0..6).map(|i| 100.0 * 1.5f64.powi(i)).collect();
        let n = c.len();
        let d = MarketDataset::new(
            AnnualSeries::new(1900, c.clone()).unwrap(),
            AnnualSeries::new(1900, vec![1.05; n]).unwrap(),
            AnnualSeries::new(1900, vec![1.01; n]).unwrap(),
        )
        .unwrap();
        let spec = UtilitySpec::shifted(2.0).unwrap();
        let recipe = ExpectationRecipe::ConditionalGrowth(MomentOptions::default());
        let eu = recipe.expected_utility(&d, &spec).unwrap();
        let u = crra_utility(c[n - 1], &spec).unwrap();
        assert!((eu - u).abs() < 1e-12);
    }

    #[test]
    fn budget_identity() {
        let clearing = PortfolioState {
            theta_t: 1.0,
            theta_next: 1.0,
            z_t: 0.0,
            z_next: 0.0,
            equity_price: 100.0,
            bond_price: 0.9,
            dividend: 5.0,
        };
        assert!((implied_consumption(&clearing).unwrap() - 5.0).abs() < 1e-12);
        let sell_half = PortfolioState {
            theta_next: 0.5,
            ..clearing
        };
        assert!((implied_consumption(&sell_half).unwrap() - 55.0).abs() < 1e-12);
        let nothing = PortfolioState {
            theta_t: 0.0,
            theta_next: 0.0,
            ..clearing
        };
        assert!(matches!(
            implied_consumption(&nothing),
            Err(Error::NonPositiveConsumption(_))
        ));
        let bad = PortfolioState {
            theta_t: 1.5,
            ..clearing
        };
        assert!(matches!(implied_consumption(&bad), Err(Error::InvalidParameter { .. })));
    }
}
