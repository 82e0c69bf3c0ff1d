use serde::Serialize;

use super::family::{Family, History};
use crate::error::{Error, Result};

/// Support threshold on probabilities.
pub const EPS_SUPPORT: f64 = 1e-12;

/// Which part of the decoherence functional must vanish.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConsistencyMode {
    /// `⟨K_α, K_β⟩ = 0`.
    Full,
    /// `Re ⟨K_α, K_β⟩ = 0`.
    Real,
}

/// Thresholds of the consistency test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConsistencyOptions {
    pub eps_abs: f64,
    pub eps_rel: f64,
    pub mode: ConsistencyMode,
}

impl Default for ConsistencyOptions {
    fn default() -> Self {
        Self {
            eps_abs: 1e-12,
            eps_rel: 1e-10,
            mode: ConsistencyMode::Full,
        }
    }
}

/// A pair of histories whose chain operators fail to be orthogonal.
#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub alpha: History,
    pub beta: History,
    pub overlap: f64,
    pub normalized: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConsistencyReport {
    pub consistent: bool,
    pub violations: Vec<Violation>,
    /// Largest `|⟨K_α, K_β⟩| / √(W_α W_β)` over pairs whose overlap exceeds
    /// the absolute threshold.
    pub max_normalized_overlap: f64,
    pub pairs_checked: usize,
}

/// History weights or probabilities in family order.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightTable {
    pub entries: Vec<(History, f64)>,
    /// `Σ W` of the raw weights.
    pub normalization: f64,
}

impl WeightTable {
    pub fn get(&self, h: &History) -> Option<f64> {
        self.entries.iter().find(|(x, _)| x == h).map(|(_, w)| *w)
    }

    pub fn by_labels(&self, labels: &[&str]) -> Option<f64> {
        self.entries
            .iter()
            .find(|(h, _)| h.labels() == labels)
            .map(|(_, w)| *w)
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|(_, w)| w).sum()
    }

    /// Entries above `eps`, by decreasing value; ties keep family order.
    pub fn sorted_support(&self, eps: f64) -> Vec<(History, f64)> {
        let mut v: Vec<(History, f64)> = self
            .entries
            .iter()
            .filter(|(_, w)| *w > eps)
            .cloned()
            .collect();
        v.sort_by(|a, b| b.1.total_cmp(&a.1));
        v
    }
}

/// Evaluates every pair of distinct histories.
pub fn consistency_check(f: &Family, opts: &ConsistencyOptions) -> Result<ConsistencyReport> {
    let a = f.analysis()?;
    let n = a.nonzero.len();
    let mut violations = Vec::new();
    let mut max_normalized: f64 = 0.0;
    for x in 0..n {
        for y in x + 1..n {
            let d = a.gram[(x, y)];
            let metric = match opts.mode {
                ConsistencyMode::Full => d.norm(),
                ConsistencyMode::Real => d.re.abs(),
            };
            let (ia, ib) = (a.nonzero[x], a.nonzero[y]);
            let scale = (a.weights[ia] * a.weights[ib]).sqrt();
            let normalized = if scale > 0.0 { metric / scale } else { 0.0 };
            if metric > opts.eps_abs {
                max_normalized = max_normalized.max(normalized);
            }
            if metric > opts.eps_abs + opts.eps_rel * scale {
                violations.push(Violation {
                    alpha: a.histories[ia].clone(),
                    beta: a.histories[ib].clone(),
                    overlap: metric,
                    normalized,
                });
            }
        }
    }
    Ok(ConsistencyReport {
        consistent: violations.is_empty(),
        violations,
        max_normalized_overlap: max_normalized,
        pairs_checked: a.histories.len() * a.histories.len().saturating_sub(1) / 2,
    })
}

/// Raw weights of every history.
pub fn weights(f: &Family) -> Result<WeightTable> {
    let a = f.analysis()?;
    let entries: Vec<(History, f64)> = a
        .histories
        .iter()
        .cloned()
        .zip(a.weights.iter().cloned())
        .collect();
    let normalization = entries.iter().map(|(_, w)| w).sum();
    Ok(WeightTable {
        entries,
        normalization,
    })
}

/// Probabilities `W/ΣW`, refused unless the family is consistent.
pub fn probabilities(f: &Family) -> Result<WeightTable> {
    probabilities_with(f, &ConsistencyOptions::default())
}

pub fn probabilities_with(f: &Family, opts: &ConsistencyOptions) -> Result<WeightTable> {
    let report = consistency_check(f, opts)?;
    if !report.consistent {
        return Err(Error::InconsistentFamily {
            violations: report.violations.len(),
            max_overlap: report.max_normalized_overlap,
        });
    }
    let w = weights(f)?;
    if w.normalization <= 0.0 {
        return Err(Error::InvalidFamily("total weight is zero".into()));
    }
    Ok(WeightTable {
        entries: w
            .entries
            .into_iter()
            .map(|(h, x)| (h, x / w.normalization))
            .collect(),
        normalization: w.normalization,
    })
}

/// Histories with probability above [`EPS_SUPPORT`], most probable first.
pub fn support(f: &Family) -> Result<Vec<(History, f64)>> {
    Ok(probabilities(f)?.sorted_support(EPS_SUPPORT))
}

/// Probability of a set of histories.
pub fn event_probability(f: &Family, subset: &[History]) -> Result<f64> {
    let p = probabilities(f)?;
    let mut seen: Vec<&History> = Vec::new();
    let mut total = 0.0;
    for h in subset {
        if seen.contains(&h) {
            continue;
        }
        seen.push(h);
        total += p.get(h).ok_or_else(|| Error::UnknownLabel {
            time: "*".into(),
            label: h.to_string(),
        })?;
    }
    Ok(total)
}

/// Probability of the event described by a slot predicate.
pub fn predicate_probability(f: &Family, pred: &Predicate) -> Result<f64> {
    pred.validate(f)?;
    let p = probabilities(f)?;
    Ok(p.entries
        .iter()
        .filter(|(h, _)| pred.matches(f, h))
        .map(|(_, w)| w)
        .sum())
}

/// `Pr(target | given)` within one consistent family.
pub fn conditional_probability(f: &Family, target: &Predicate, given: &Predicate) -> Result<f64> {
    target.validate(f)?;
    given.validate(f)?;
    let p = probabilities(f)?;
    let mut joint = 0.0;
    let mut cond = 0.0;
    for (h, w) in &p.entries {
        if given.matches(f, h) {
            cond += w;
            if target.matches(f, h) {
                joint += w;
            }
        }
    }
    if cond <= EPS_SUPPORT {
        return Err(Error::ZeroConditionProbability);
    }
    Ok(joint / cond)
}

/// Conjunction of `time=label|label` clauses.
///
/// A clause label matches a slot when it equals the member label or one of
/// its components, where composite labels join components with `.` or `&`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Predicate {
    pub clauses: Vec<(String, Vec<String>)>,
}

impl Predicate {
    /// Parses `t2=Xplus,t1=xplus|xminus`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut clauses = Vec::new();
        for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (t, ls) = part
                .split_once('=')
                .ok_or_else(|| Error::InvalidFamily(format!("predicate clause `{part}` lacks `=`")))?;
            let labels: Vec<String> = ls
                .split('|')
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect();
            if labels.is_empty() || t.trim().is_empty() {
                return Err(Error::InvalidFamily(format!("malformed predicate clause `{part}`")));
            }
            clauses.push((t.trim().to_string(), labels));
        }
        Ok(Self { clauses })
    }

    pub fn at(time: &str, label: &str) -> Self {
        Self {
            clauses: vec![(time.to_string(), vec![label.to_string()])],
        }
    }

    pub fn and(mut self, time: &str, label: &str) -> Self {
        self.clauses.push((time.to_string(), vec![label.to_string()]));
        self
    }

    fn validate(&self, f: &Family) -> Result<()> {
        for (t, labels) in &self.clauses {
            let j = f.grid().resolve(t)?;
            let d = f.decomposition(j);
            for l in labels {
                let known = (d.is_trivial() && l == "I") || d.labels().any(|m| label_matches(m, l));
                if !known {
                    return Err(Error::UnknownLabel {
                        time: t.clone(),
                        label: l.clone(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn matches(&self, f: &Family, h: &History) -> bool {
        self.clauses.iter().all(|(t, labels)| {
            let Ok(j) = f.grid().resolve(t) else {
                return false;
            };
            let slot = h.slot(j).label();
            labels.iter().any(|l| label_matches(slot, l))
        })
    }
}

/// `member` equals `query` or has it as a `.`/`&`-separated component.
pub fn label_matches(member: &str, query: &str) -> bool {
    member == query || member.split(['.', '&']).any(|c| c == query)
}
