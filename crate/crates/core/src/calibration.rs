//! Sufficiency-factor calibration.
//!
//! Three pricing conditions link the sample moments to the equity factor
//! `zeta`, the risk-free factor `xi` and relative risk aversion `rho`:
//!
//! ```text
//! (1) ln Rf          = -ln beta - ln xi + rho mu_x - rho^2 sigma2_x / 2
//! (2) ln E(Re)       = ln E(x) - ln beta - ln zeta - (1 - rho) mu_x - (1 - rho)^2 sigma2_x / 2
//! (3) ln E(Re) - ln Rf = ln xi - ln zeta + rho sigma2_x
//! ```
//!
//! Subtracting (1) from (2) gives (3) plus the consistency gap
//! `ln E(x) - mu_x - sigma2_x / 2`. Consequently the residual of (3), once
//! (1) and (2) are solved for `zeta` and `xi`, equals the gap for *every*
//! `rho`, and the Jacobian has rank two everywhere:
//!
//! * gap = 0: a one-parameter family of exact solutions ([`Error::DegenerateSystem`]);
//! * gap != 0: no exact solution ([`Error::InconsistentSystem`]).
//!
//! Either way `rho` is not pinned down by the moments alone.
//! [`calibrate_given_rho`] fixes `rho` externally and reports the factors
//! along with the residual that remains on (3).

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::error::{check_beta, check_positive, check_rho, Error, Result};
use crate::moments::{consistency_gap, SampleMoments};
use crate::root::{damped_newton, expand_bracket, RootOptions};

pub const DEFAULT_BETA: f64 = 0.99;

/// A published `(zeta, xi, rho)` triple for the 1889-1978 sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceCalibration {
    pub zeta: f64,
    pub xi: f64,
    pub rho: f64,
}

/// Realized 1978 consumption.
pub const REFERENCE_REALIZED: ReferenceCalibration = ReferenceCalibration {
    zeta: 0.961745,
    xi: 1.019392,
    rho: 1.033526,
};

/// 1978 consumption replaced by its projection.
pub const REFERENCE_PROJECTED: ReferenceCalibration = ReferenceCalibration {
    zeta: 0.9615,
    xi: 1.0192,
    rho: 1.0089,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SufficiencyFactors {
    zeta: f64,
    xi: f64,
}

impl SufficiencyFactors {
    pub fn new(zeta: f64, xi: f64) -> Result<Self> {
        check_positive("zeta", zeta)?;
        check_positive("xi", xi)?;
        Ok(Self { zeta, xi })
    }

    /// Equity investors.
    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    /// Risk-free asset investors.
    pub fn xi(&self) -> f64 {
        self.xi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub factors: SufficiencyFactors,
    pub rho: f64,
    /// LHS - RHS of conditions (1), (2), (3).
    pub residuals: [f64; 3],
    /// Jacobian condition number at the solution, capped at `1 / f64::EPSILON`.
    pub condition_diagnostic: f64,
    pub consistency_gap: f64,
}

impl CalibrationResult {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, r| m.max(r.abs()))
    }
}

pub fn system_residuals(f: &SufficiencyFactors, rho: f64, beta: f64, m: &SampleMoments) -> Result<[f64; 3]> {
    check_beta(beta)?;
    m.validate()?;
    let (ln_rf, ln_re, ln_ex) = (m.mean_rf.ln(), m.mean_re.ln(), m.mean_x.ln());
    let (ln_zeta, ln_xi, ln_beta) = (f.zeta.ln(), f.xi.ln(), beta.ln());
    let s2 = m.sigma2_x;
    let one_minus = 1.0 - rho;

    let riskfree = ln_rf - (-ln_beta - ln_xi + rho * m.mu_x - 0.5 * rho * rho * s2);
    let equity = ln_re - (ln_ex - ln_beta - ln_zeta - one_minus * m.mu_x - 0.5 * one_minus * one_minus * s2);
    let premium = (ln_re - ln_rf) - (ln_xi - ln_zeta + rho * s2);
    Ok([riskfree, equity, premium])
}

/// Partial derivatives of [`system_residuals`] with respect to
/// `(zeta, xi, rho)`; rows follow the residual order.
pub fn system_jacobian(f: &SufficiencyFactors, rho: f64, m: &SampleMoments) -> Matrix3<f64> {
    let s2 = m.sigma2_x;
    Matrix3::new(
        0.0,
        1.0 / f.xi,
        -m.mu_x + rho * s2,
        1.0 / f.zeta,
        0.0,
        -m.mu_x - (1.0 - rho) * s2,
        1.0 / f.zeta,
        -1.0 / f.xi,
        -s2,
    )
}

/// Ratio of extreme singular values, capped at `1 / f64::EPSILON` for a
/// (numerically) singular matrix.
pub fn condition_diagnostic(j: &Matrix3<f64>) -> f64 {
    let sv = j.singular_values();
    let max = sv.max();
    let min = sv.min();
    let cap = 1.0 / f64::EPSILON;
    if max.is_nan() || max <= 0.0 {
        return cap;
    }
    (max / min.max(max * f64::EPSILON)).clamp(1.0, cap)
}

/// Solves conditions (1) and (2) exactly for `(zeta, xi)` at the given `rho`.
pub fn solve_closed_form_given_rho(rho: f64, beta: f64, m: &SampleMoments) -> Result<SufficiencyFactors> {
    check_beta(beta)?;
    m.validate()?;
    if !rho.is_finite() {
        return Err(Error::InvalidParameter {
            name: "rho",
            value: rho,
            reason: "must be finite",
        });
    }
    let s2 = m.sigma2_x;
    let ln_beta = beta.ln();
    let xi = (-m.mean_rf.ln() - ln_beta + rho * m.mu_x - 0.5 * rho * rho * s2).exp();
    let a = 1.0 - rho;
    let zeta = (m.mean_x.ln() - ln_beta - a * m.mu_x - 0.5 * a * a * s2 - m.mean_re.ln()).exp();
    SufficiencyFactors::new(zeta, xi)
}

fn result_at(factors: SufficiencyFactors, rho: f64, beta: f64, m: &SampleMoments) -> Result<CalibrationResult> {
    let residuals = system_residuals(&factors, rho, beta, m)?;
    if residuals.iter().any(|r| !r.is_finite()) {
        return Err(Error::NoConvergence {
            iterations: 0,
            residual: f64::INFINITY,
        });
    }
    Ok(CalibrationResult {
        factors,
        rho,
        residuals,
        condition_diagnostic: condition_diagnostic(&system_jacobian(&factors, rho, m)),
        consistency_gap: consistency_gap(m),
    })
}

/// Factors from the closed form at a fixed `rho`. Residuals (1) and (2)
/// vanish to rounding; residual (3) equals the consistency gap.
pub fn calibrate_given_rho(rho: f64, beta: f64, m: &SampleMoments) -> Result<CalibrationResult> {
    check_rho(rho)?;
    let factors = solve_closed_form_given_rho(rho, beta, m)?;
    result_at(factors, rho, beta, m)
}

/// Starting point for [`solve_system`]. Only `rho` matters: `zeta` and `xi`
/// are eliminated in closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialGuess {
    pub zeta: f64,
    pub xi: f64,
    pub rho: f64,
}

impl Default for InitialGuess {
    fn default() -> Self {
        Self {
            zeta: 1.0,
            xi: 1.0,
            rho: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Required sup-norm of the residual vector at a reported root.
    pub tolerance: f64,
    /// `|gap|` below this is treated as exact linear dependence.
    pub degeneracy_threshold: f64,
    pub rho_bounds: (f64, f64),
    /// Upper bound on `zeta` and `xi`.
    pub factor_bound: f64,
    pub initial_step: f64,
    pub root: RootOptions,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-9,
            degeneracy_threshold: 1e-12,
            rho_bounds: (0.0, 60.0),
            factor_bound: 10.0,
            initial_step: 0.25,
            root: RootOptions {
                tol_f: 1e-12,
                ..RootOptions::default()
            },
        }
    }
}

pub fn solve_system(beta: f64, m: &SampleMoments, init: Option<InitialGuess>) -> Result<CalibrationResult> {
    solve_system_with(beta, m, init, SolverOptions::default())
}

/// Root of all three conditions.
///
/// `zeta` and `xi` are eliminated with [`solve_closed_form_given_rho`], which
/// leaves a scalar equation in `rho`: residual (3) at the closed-form
/// factors. The bracket around the starting `rho` is doubled until that
/// residual changes sign, then refined by [`damped_newton`].
pub fn solve_system_with(
    beta: f64,
    m: &SampleMoments,
    init: Option<InitialGuess>,
    opts: SolverOptions,
) -> Result<CalibrationResult> {
    check_beta(beta)?;
    m.validate()?;
    let gap = consistency_gap(m);
    if gap.abs() < opts.degeneracy_threshold {
        return Err(Error::DegenerateSystem { gap });
    }

    let start = init.unwrap_or_default().rho;
    check_rho(start)?;

    let premium_residual = |rho: f64| -> f64 {
        solve_closed_form_given_rho(rho, beta, m)
            .and_then(|f| system_residuals(&f, rho, beta, m))
            .map_or(f64::NAN, |r| r[2])
    };

    let bracket = expand_bracket(premium_residual, start, opts.initial_step, opts.rho_bounds).map_err(|(lo, hi)| {
        Error::InconsistentSystem {
            gap,
            rho_lo: lo,
            rho_hi: hi,
        }
    })?;
    let rho = damped_newton(premium_residual, bracket, opts.root)?;

    let result = calibrate_given_rho(rho, beta, m)?;
    let f = result.factors;
    let in_region = f.zeta() <= opts.factor_bound && f.xi() <= opts.factor_bound;
    if !in_region || result.max_residual() >= opts.tolerance {
        return Err(Error::NoConvergence {
            iterations: opts.root.max_iter,
            residual: result.max_residual(),
        });
    }
    Ok(result)
}
