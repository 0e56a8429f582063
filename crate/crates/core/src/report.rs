//! Pass/fail records for numerical checks of inequalities and identities.

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

/// Which tunings of `a` a claim is asserted for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    /// Every `a > 1`, with the constant `C(a)`.
    AllA,
    /// Only the isometric tuning `a = a_bar`.
    IsometricOnly,
}

/// Outcome of one claim over all the cases it was tested on.
///
/// `worst_slack` is the smallest margin seen, `allowed - observed`, so a
/// claim passes when `worst_slack >= -tolerance`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClaimResult {
    pub name: String,
    /// The relation being checked, written out.
    pub anchor: String,
    pub scope: Scope,
    pub status: Status,
    pub worst_slack: Option<f64>,
    pub tolerance: f64,
    pub cases: usize,
    /// Input attaining the worst slack.
    pub witness: Option<Vec<f64>>,
    /// A reported quantity that is not asserted against a bound.
    pub observed: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub a: f64,
    pub isometric: bool,
    pub claims: Vec<ClaimResult>,
}

impl CheckReport {
    pub fn new(check: &str, a: f64, isometric: bool) -> Self {
        CheckReport {
            check: check.to_string(),
            a,
            isometric,
            claims: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.claims.iter().all(|c| c.status != Status::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ClaimResult> {
        self.claims.iter().filter(|c| c.status == Status::Fail)
    }

    pub fn claim(&self, name: &str) -> Option<&ClaimResult> {
        self.claims.iter().find(|c| c.name == name)
    }

    pub fn push(&mut self, claim: Claim) {
        self.claims.push(claim.finish());
    }
}

/// Accumulates the margins of one claim.
#[derive(Clone, Debug)]
pub struct Claim {
    result: ClaimResult,
    skipped: bool,
}

impl Claim {
    pub fn new(name: &str, anchor: &str, scope: Scope, tolerance: f64) -> Self {
        Claim {
            result: ClaimResult {
                name: name.to_string(),
                anchor: anchor.to_string(),
                scope,
                status: Status::Pass,
                worst_slack: None,
                tolerance,
                cases: 0,
                witness: None,
                observed: None,
            },
            skipped: false,
        }
    }

    /// Records `allowed - observed` for one case.
    pub fn record(&mut self, slack: f64, witness: impl FnOnce() -> Vec<f64>) {
        let r = &mut self.result;
        r.cases += 1;
        // NaN margins count as the worst possible.
        let slack = if slack.is_nan() { f64::NEG_INFINITY } else { slack };
        if r.worst_slack.is_none_or(|w| slack < w) {
            r.worst_slack = Some(slack);
            r.witness = Some(witness());
        }
    }

    /// Records `-|first - second|`, for an equality.
    pub fn record_equal(&mut self, first: f64, second: f64, witness: impl FnOnce() -> Vec<f64>) {
        self.record(-(first - second).abs(), witness);
    }

    pub fn observe(&mut self, value: f64) {
        self.result.observed = Some(value);
    }

    pub fn skip(mut self) -> Self {
        self.skipped = true;
        self
    }

    pub fn finish(mut self) -> ClaimResult {
        let r = &mut self.result;
        r.status = if self.skipped {
            Status::Skipped
        } else if r.worst_slack.is_some_and(|w| w < -r.tolerance) {
            Status::Fail
        } else {
            Status::Pass
        };
        self.result
    }
}
