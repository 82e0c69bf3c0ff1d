use std::fmt;

use serde::Serialize;

use super::Scenario;
use crate::error::Result;
use crate::framework::common_refinement;
use crate::histories::{
    conditional_probability, consistency_check, predicate_probability, support, ConsistencyOptions,
    Predicate,
};

/// Where an expected value comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// Stated in the source analysis of the model.
    Reported,
    /// Not stated there; fixed by an independent hand calculation.
    Computed,
    /// A qualitative property (consistency, noncommutation) of the model.
    Structural,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Reported => "reported",
            Provenance::Computed => "computed",
            Provenance::Structural => "structural",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Query {
    Probability(Predicate),
    Conditional { target: Predicate, given: Predicate },
    /// 1 when consistent, else 0.
    Consistent,
    MaxNormalizedOverlap,
    SupportSize,
    /// 1 when the family is compatible with `other`, else 0.
    Compatible { other: String },
    /// `‖[P, Q]‖_F` of two named projectors.
    Commutator { a: String, b: String },
}

impl Query {
    pub(crate) fn uses_named_projectors(&self) -> bool {
        matches!(self, Query::Commutator { .. })
    }
}

fn predicate_text(p: &Predicate) -> String {
    p.clauses
        .iter()
        .map(|(t, ls)| format!("{t}={}", ls.join("|")))
        .collect::<Vec<_>>()
        .join(",")
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Query::Probability(p) => write!(f, "Pr({})", predicate_text(p)),
            Query::Conditional { target, given } => {
                write!(f, "Pr({} | {})", predicate_text(target), predicate_text(given))
            }
            Query::Consistent => f.write_str("consistent"),
            Query::MaxNormalizedOverlap => f.write_str("max normalized overlap"),
            Query::SupportSize => f.write_str("support size"),
            Query::Compatible { other } => write!(f, "compatible with {other}"),
            Query::Commutator { a, b } => write!(f, "||[{a}, {b}]||"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Expect {
    Near { value: f64, tol: f64 },
    Above(f64),
}

impl Expect {
    pub fn holds(&self, x: f64) -> bool {
        match *self {
            Expect::Near { value, tol } => (x - value).abs() <= tol,
            Expect::Above(t) => x > t,
        }
    }
}

impl fmt::Display for Expect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expect::Near { value, tol } => write!(f, "{value} ± {tol:e}"),
            Expect::Above(t) => write!(f, "> {t}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Expectation {
    pub description: String,
    pub family: Option<String>,
    pub query: Query,
    pub expect: Expect,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpectationOutcome {
    pub description: String,
    pub family: Option<String>,
    pub query: String,
    pub expected: String,
    pub actual: Option<f64>,
    pub error: Option<String>,
    pub passed: bool,
    pub provenance: Provenance,
}

impl Expectation {
    pub fn new(description: &str, family: &str, query: Query, expect: Expect, provenance: Provenance) -> Self {
        Self {
            description: description.to_string(),
            family: (!family.is_empty()).then(|| family.to_string()),
            query,
            expect,
            provenance,
        }
    }

    /// `Pr(pred) = value` to `1e−9`.
    pub fn probability(description: &str, family: &str, pred: &str, value: f64, provenance: Provenance) -> Self {
        let p = Predicate::parse(pred).expect("registered predicate parses");
        Self::new(description, family, Query::Probability(p), near(value), provenance)
    }

    pub fn conditional(
        description: &str,
        family: &str,
        target: &str,
        given: &str,
        value: f64,
        provenance: Provenance,
    ) -> Self {
        let q = Query::Conditional {
            target: Predicate::parse(target).expect("registered predicate parses"),
            given: Predicate::parse(given).expect("registered predicate parses"),
        };
        Self::new(description, family, q, near(value), provenance)
    }

    pub fn consistent(description: &str, family: &str, yes: bool, provenance: Provenance) -> Self {
        let v = if yes { 1.0 } else { 0.0 };
        Self::new(description, family, Query::Consistent, Expect::Near { value: v, tol: 0.0 }, provenance)
    }

    pub fn value(&self, scn: &Scenario) -> Result<f64> {
        let fam = || scn.family(self.family.as_deref().unwrap_or(""));
        Ok(match &self.query {
            Query::Probability(p) => predicate_probability(fam()?, p)?,
            Query::Conditional { target, given } => conditional_probability(fam()?, target, given)?,
            Query::Consistent => {
                let r = consistency_check(fam()?, &ConsistencyOptions::default())?;
                if r.consistent {
                    1.0
                } else {
                    0.0
                }
            }
            Query::MaxNormalizedOverlap => {
                consistency_check(fam()?, &ConsistencyOptions::default())?.max_normalized_overlap
            }
            Query::SupportSize => support(fam()?)?.len() as f64,
            Query::Compatible { other } => {
                if common_refinement(fam()?, scn.family(other)?)?.compatible {
                    1.0
                } else {
                    0.0
                }
            }
            Query::Commutator { a, b } => {
                let (p, q) = (scn.projector(a)?, scn.projector(b)?);
                p.operator().commutator(q.operator())?.frobenius_norm()
            }
        })
    }

    pub fn evaluate(&self, scn: &Scenario) -> ExpectationOutcome {
        let (actual, error) = match self.value(scn) {
            Ok(v) => (Some(v), None),
            Err(e) => (None, Some(e.to_string())),
        };
        ExpectationOutcome {
            description: self.description.clone(),
            family: self.family.clone(),
            query: self.query.to_string(),
            expected: self.expect.to_string(),
            actual,
            error,
            passed: actual.is_some_and(|v| self.expect.holds(v)),
            provenance: self.provenance,
        }
    }
}

/// Tolerance of registered probabilities.
pub const TOL_EXPECT: f64 = 1e-9;

pub(crate) fn near(value: f64) -> Expect {
    Expect::Near {
        value,
        tol: TOL_EXPECT,
    }
}
