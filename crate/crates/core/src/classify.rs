//! Risk-attitude rules.
//!
//! An investor compares the certain utility of current consumption with the
//! uncertain utility `beta * eta * E[u]`. The sufficiency factor `eta` says
//! whether extra negative (`eta < 1`) or positive (`eta > 1`) utility is
//! allocated to the uncertain value; the sign of the certain/uncertain gap
//! together with the curvature of the certain utility curve picks the label.
//!
//! Two rule groups exist. Group one assumes a concave certain curve for every
//! investor (rules 1-5); group two lets the curvature vary by investor
//! (rules 6-10). Group one still lists a convex-curve rule (rule 5)
//! even though that contradicts its own concavity premise; it is kept as
//! stated.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dataset::MarketDataset;
use crate::error::{check_beta, check_positive, check_rho, Error, Result};
use crate::utility::{crra_utility, ExpectationRecipe, UtilityComparison, UtilitySpec};

pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Curvature {
    StrictlyConcave,
    StrictlyConvexIncreasing,
    Linear,
    Horizontal,
}

impl Curvature {
    /// CRRA curvature: strictly concave for `rho > 0`, linear at `rho = 0`.
    pub fn from_rho(rho: f64) -> Result<Self> {
        check_rho(rho)?;
        Ok(if rho > 0.0 {
            Curvature::StrictlyConcave
        } else {
            Curvature::Linear
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DefinitionGroup {
    /// Concave certain curve assumed for all investors.
    GroupOne,
    /// Certain curve curvature varies by investor.
    GroupTwo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AllocationSign {
    Negative,
    Positive,
    Zero,
}

impl fmt::Display for AllocationSign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AllocationSign::Negative => "negative",
            AllocationSign::Positive => "positive",
            AllocationSign::Zero => "zero",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RiskLabel {
    RiskAverse,
    RiskLoving,
    NotEnoughRiskLoving,
    NotEnoughRiskAverse,
    RiskNeutral,
}

impl RiskLabel {
    pub const ALL: [RiskLabel; 5] = [
        RiskLabel::RiskAverse,
        RiskLabel::RiskLoving,
        RiskLabel::NotEnoughRiskLoving,
        RiskLabel::NotEnoughRiskAverse,
        RiskLabel::RiskNeutral,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            RiskLabel::RiskAverse => "Risk-averse",
            RiskLabel::RiskLoving => "Risk-loving",
            RiskLabel::NotEnoughRiskLoving => "Not enough risk-loving",
            RiskLabel::NotEnoughRiskAverse => "Not enough risk-averse",
            RiskLabel::RiskNeutral => "Risk-neutral",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|l| l.as_str() == s)
    }
}

impl fmt::Display for RiskLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A label together with the rule that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RiskAttitude {
    pub label: RiskLabel,
    pub group: DefinitionGroup,
    /// Number of the matching rule: 1-5 in group one, 6-10 in group two.
    pub defining_equation: u8,
    /// Never `Zero`: zero allocation matches no definition.
    pub allocation_sign: AllocationSign,
}

/// `eta < 1` allocates extra negative utility, `eta > 1` extra positive.
///
/// Meaningful for certain curves with `rho >= 0`.
pub fn allocation_sign(eta: f64, rho: f64) -> Result<AllocationSign> {
    check_positive("eta", eta)?;
    check_rho(rho)?;
    Ok(sign_for_eta(eta))
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Gap {
    Equal,
    CertainAbove,
    CertainBelow,
}

fn sign_for_eta(eta: f64) -> AllocationSign {
    if eta < 1.0 {
        AllocationSign::Negative
    } else if eta > 1.0 {
        AllocationSign::Positive
    } else {
        AllocationSign::Zero
    }
}

pub fn classify(
    cmp: &UtilityComparison,
    curvature: Curvature,
    group: DefinitionGroup,
    tol: f64,
) -> Result<RiskAttitude> {
    if !tol.is_finite() || tol < 0.0 {
        return Err(Error::InvalidParameter {
            name: "tol",
            value: tol,
            reason: "tolerance must be finite and non-negative",
        });
    }
    check_positive("eta", cmp.eta)?;
    check_beta(cmp.beta)?;
    if !cmp.certain.is_finite() || !cmp.uncertain.is_finite() {
        return Err(Error::InvalidParameter {
            name: "utility",
            value: if cmp.certain.is_finite() {
                cmp.uncertain
            } else {
                cmp.certain
            },
            reason: "utilities must be finite",
        });
    }

    let allocation = sign_for_eta(cmp.eta);
    if allocation == AllocationSign::Zero {
        return Err(Error::Unclassifiable(
            "sufficiency factor equals one: zero utility allocation is excluded from every definition".into(),
        ));
    }

    let delta = cmp.certain - cmp.uncertain;
    let gap = if delta.abs() <= tol {
        Gap::Equal
    } else if delta > 0.0 {
        Gap::CertainAbove
    } else {
        Gap::CertainBelow
    };

    use AllocationSign::{Negative as Neg, Positive as Pos};
    use Curvature::*;
    use RiskLabel::*;

    let found = |label, eq| {
        Ok(RiskAttitude {
            label,
            group,
            defining_equation: eq,
            allocation_sign: allocation,
        })
    };
    let horizontal_nera = || {
        Err(Error::InvalidCombination(
            "not-enough-risk-averse is not defined for a horizontal certain utility curve".into(),
        ))
    };
    let none = |why: &str| {
        Err(Error::Unclassifiable(format!(
            "{why} (allocation {allocation}, certain - uncertain = {delta:e}, {curvature:?}, {group:?})"
        )))
    };

    match (group, gap) {
        (DefinitionGroup::GroupOne, Gap::Equal) => found(RiskNeutral, 4),
        (DefinitionGroup::GroupTwo, Gap::Equal) => found(RiskNeutral, 10),

        (DefinitionGroup::GroupOne, gap) => match (allocation, gap, curvature) {
            (Neg, Gap::CertainAbove, _) => found(RiskAverse, 1),
            (Pos, Gap::CertainBelow, _) => found(RiskLoving, 2),
            (Pos, Gap::CertainAbove, _) => found(NotEnoughRiskLoving, 3),
            (Neg, Gap::CertainBelow, StrictlyConvexIncreasing) => found(NotEnoughRiskAverse, 5),
            (Neg, Gap::CertainBelow, Horizontal) => horizontal_nera(),
            _ => none("negative allocation with uncertain utility above certain requires a convex increasing curve"),
        },

        (DefinitionGroup::GroupTwo, gap) => match (allocation, gap, curvature) {
            (Neg, Gap::CertainAbove, StrictlyConcave | Horizontal) => found(RiskAverse, 6),
            (Pos, Gap::CertainAbove, StrictlyConcave | Horizontal) => found(NotEnoughRiskLoving, 7),
            (Pos, Gap::CertainBelow, StrictlyConvexIncreasing | Horizontal) => found(RiskLoving, 8),
            (Neg, Gap::CertainBelow, StrictlyConvexIncreasing) => found(NotEnoughRiskAverse, 9),
            (Neg, Gap::CertainBelow, Horizontal) => horizontal_nera(),
            _ => none("no group-two definition matches this curvature"),
        },
    }
}

/// Inputs for [`classify_pipeline`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineInputs {
    pub eta: f64,
    pub rho: f64,
    pub beta: f64,
    pub group: DefinitionGroup,
    pub tol: f64,
}

/// Certain utility of the decision year (second-to-last consumption entry)
/// against the uncertain utility of the final year, then classification.
pub fn classify_pipeline(
    d: &MarketDataset,
    eta: f64,
    rho: f64,
    beta: f64,
    group: DefinitionGroup,
    tol: f64,
) -> Result<(UtilityComparison, RiskAttitude)> {
    classify_pipeline_with(
        d,
        PipelineInputs {
            eta,
            rho,
            beta,
            group,
            tol,
        },
        ExpectationRecipe::default(),
    )
}

pub fn classify_pipeline_with(
    d: &MarketDataset,
    inputs: PipelineInputs,
    recipe: ExpectationRecipe,
) -> Result<(UtilityComparison, RiskAttitude)> {
    let spec = UtilitySpec::shifted(inputs.rho)?;
    let c = d.consumption().values();
    let certain = crra_utility(c[c.len() - 2], &spec)?;
    let expected_u = recipe.expected_utility(d, &spec)?;
    let cmp = UtilityComparison::new(certain, expected_u, inputs.beta, inputs.eta)?;
    let curvature = Curvature::from_rho(inputs.rho)?;
    let attitude = classify(&cmp, curvature, inputs.group, inputs.tol)?;
    Ok((cmp, attitude))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::AnnualSeries;

    fn cmp(certain: f64, uncertain: f64, eta: f64) -> UtilityComparison {
        UtilityComparison {
            certain,
            uncertain,
            eta,
            beta: 1.0,
            expected_u: uncertain / eta,
        }
    }

    #[test]
    fn allocation_signs() {
        assert_eq!(allocation_sign(0.961745, 1.033526).unwrap(), AllocationSign::Negative);
        assert_eq!(allocation_sign(1.019392, 1.033526).unwrap(), AllocationSign::Positive);
        assert_eq!(allocation_sign(1.0, 3.0).unwrap(), AllocationSign::Zero);
        assert!(allocation_sign(0.0, 1.0).is_err());
        assert!(allocation_sign(1.1, -1.0).is_err());
    }

    #[test]
    fn table_rows() {
        let eq = classify(
            &cmp(7.103787, 6.192703, 0.961745),
            Curvature::StrictlyConcave,
            DefinitionGroup::GroupTwo,
            DEFAULT_TOLERANCE,
        )
        .unwrap();
        assert_eq!((eq.label, eq.defining_equation), (RiskLabel::RiskAverse, 6));
        assert_eq!(eq.allocation_sign, AllocationSign::Negative);
        let rf = classify(
            &cmp(7.103787, 6.563893, 1.019392),
            Curvature::StrictlyConcave,
            DefinitionGroup::GroupTwo,
            DEFAULT_TOLERANCE,
        )
        .unwrap();
        assert_eq!((rf.label, rf.defining_equation), (RiskLabel::NotEnoughRiskLoving, 7));
    }

    #[test]
    fn equality_is_neutral() {
        for eta in [0.5, 1.5] {
            let a = classify(
                &cmp(5.0, 5.0, eta),
                Curvature::StrictlyConcave,
                DefinitionGroup::GroupOne,
                1e-9,
            )
            .unwrap();
            assert_eq!((a.label, a.defining_equation), (RiskLabel::RiskNeutral, 4));
            let b = classify(
                &cmp(5.0, 5.0 + 1e-12, eta),
                Curvature::Linear,
                DefinitionGroup::GroupTwo,
                1e-9,
            )
            .unwrap();
            assert_eq!((b.label, b.defining_equation), (RiskLabel::RiskNeutral, 10));
        }
    }

    #[test]
    fn group_one_rules() {
        let g = DefinitionGroup::GroupOne;
        let c = Curvature::StrictlyConcave;
        assert_eq!(classify(&cmp(2.0, 1.0, 0.9), c, g, 0.0).unwrap().defining_equation, 1);
        assert_eq!(
            classify(&cmp(1.0, 2.0, 1.1), c, g, 0.0).unwrap().label,
            RiskLabel::RiskLoving
        );
        assert_eq!(classify(&cmp(2.0, 1.0, 1.1), c, g, 0.0).unwrap().defining_equation, 3);
        let nera = classify(&cmp(1.0, 2.0, 0.9), Curvature::StrictlyConvexIncreasing, g, 0.0).unwrap();
        assert_eq!(
            (nera.label, nera.defining_equation),
            (RiskLabel::NotEnoughRiskAverse, 5)
        );
        assert!(matches!(
            classify(&cmp(1.0, 2.0, 0.9), c, g, 0.0),
            Err(Error::Unclassifiable(_))
        ));
        assert!(matches!(
            classify(&cmp(1.0, 2.0, 0.9), Curvature::Horizontal, g, 0.0),
            Err(Error::InvalidCombination(_))
        ));
    }

    #[test]
    fn group_two_rules() {
        let g = DefinitionGroup::GroupTwo;
        let convex = Curvature::StrictlyConvexIncreasing;
        let rl = classify(&cmp(1.0, 2.0, 1.1), convex, g, 0.0).unwrap();
        assert_eq!((rl.label, rl.defining_equation), (RiskLabel::RiskLoving, 8));
        let nera = classify(&cmp(1.0, 2.0, 0.9), convex, g, 0.0).unwrap();
        assert_eq!(
            (nera.label, nera.defining_equation),
            (RiskLabel::NotEnoughRiskAverse, 9)
        );
        // risk-loving needs a convex curve in group two
        assert!(classify(&cmp(1.0, 2.0, 1.1), Curvature::StrictlyConcave, g, 0.0).is_err());
        assert!(classify(&cmp(2.0, 1.0, 0.9), convex, g, 0.0).is_err());
        assert!(classify(&cmp(2.0, 1.0, 0.9), Curvature::Linear, g, 0.0).is_err());
        let h = classify(&cmp(2.0, 1.0, 0.9), Curvature::Horizontal, g, 0.0).unwrap();
        assert_eq!(h.label, RiskLabel::RiskAverse);
        assert!(matches!(
            classify(&cmp(1.0, 2.0, 0.9), Curvature::Horizontal, g, 0.0),
            Err(Error::InvalidCombination(_))
        ));
    }

    #[test]
    fn zero_allocation_is_unclassifiable() {
        for (c, u) in [(2.0, 1.0), (1.0, 2.0), (1.0, 1.0)] {
            assert!(matches!(
                classify(
                    &cmp(c, u, 1.0),
                    Curvature::StrictlyConcave,
                    DefinitionGroup::GroupTwo,
                    1e-9
                ),
                Err(Error::Unclassifiable(_))
            ));
        }
    }

    #[test]
    fn negative_tolerance_rejected() {
        assert!(matches!(
            classify(
                &cmp(2.0, 1.0, 0.9),
                Curvature::StrictlyConcave,
                DefinitionGroup::GroupTwo,
                -1.0
            ),
            Err(Error::InvalidParameter { .. })
        ));
    }

    #[test]
    fn pipeline_on_constant_consumption() {
        let d = MarketDataset::new(
            AnnualSeries::new(1950, vec![100.0; 8]).unwrap(),
            AnnualSeries::new(1950, vec![1.05; 8]).unwrap(),
            AnnualSeries::new(1950, vec![1.01; 8]).unwrap(),
        )
        .unwrap();
        let (c, a) = classify_pipeline(&d, 1.0 - 1e-3, 2.0, 1.0, DefinitionGroup::GroupTwo, DEFAULT_TOLERANCE).unwrap();
        assert!((c.certain - 0.99).abs() < 1e-12);
        assert!((c.uncertain - 0.99 * (1.0 - 1e-3)).abs() < 1e-12);
        assert_eq!(a.label, RiskLabel::RiskAverse);
    }

    #[test]
    fn pipeline_linear_curvature_at_zero_rho() {
        assert_eq!(Curvature::from_rho(0.0).unwrap(), Curvature::Linear);
        assert_eq!(Curvature::from_rho(0.3).unwrap(), Curvature::StrictlyConcave);
    }

    #[test]
    fn label_text_round_trip() {
        for l in RiskLabel::ALL {
            assert_eq!(RiskLabel::parse(l.as_str()), Some(l));
        }
        assert_eq!(RiskLabel::parse("risk averse"), None);
    }
}
