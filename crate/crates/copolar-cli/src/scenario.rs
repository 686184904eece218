//! Scenario files: the plain-text contract of the `run` subcommand.
//!
//! A scenario is TOML with a top-level seed and tolerance scale plus a list
//! of `[[case]]` tables. Each case names a family (and optionally a linear
//! map applied to it) and the audits to run against it, in order:
//!
//! ```toml
//! seed = 0
//! tol_scale = 1.0
//!
//! [[case]]
//! [case.family]
//! kind = "hyperbola"
//! c = 1.0
//!
//! [[case.audits]]
//! id = "involution"
//!
//! [[case.audits]]
//! id = "eq2_1n"
//! expect_sup = "fails"
//! ```
//!
//! Every audit carries an expected verdict (default `holds`, except the
//! sup-form half of `eq2_1n`, which is expected to fail by design); the run
//! exits 0 only when every outcome matches its expectation.

use copolar::pseudocone::FamilySpec;
use serde::{Deserialize, Serialize};

/// Identity catalog driven by the runner, in the order audits report.
pub const AUDIT_IDS: [&str; 9] = [
    "involution",
    "eq1_1",
    "eq2_1n",
    "eq3_2",
    "eq4_1",
    "eq5_1",
    "eq5_2",
    "affine_sphere",
    "equivariance",
];

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub tol_scale: f64,
    /// Angular margin of interior direction grids.
    #[serde(default = "default_margin")]
    pub grid_margin: f64,
    #[serde(rename = "case", default)]
    pub cases: Vec<Case>,
}

fn one() -> f64 {
    1.0
}

fn default_margin() -> f64 {
    0.12
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Case {
    pub family: FamilySpec,
    /// Optional invertible matrix (rows) applied to the family first.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<Vec<Vec<f64>>>,
    #[serde(rename = "audits", default)]
    pub audits: Vec<AuditSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expect {
    Holds,
    Fails,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RouteSpec {
    /// Drive the numerically built copolar (default).
    Numeric,
    /// Drive the attached closed-form copolar gauge.
    Analytic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChartSpec {
    Exponential,
    Radial,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditSpec {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directions: Option<usize>,
    /// Copolar representation for `eq4_1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub route: Option<RouteSpec>,
    /// Boundary chart for `eq5_1` / `eq5_2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chart: Option<ChartSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<Expect>,
    /// Expected verdicts of the two `eq2_1n` halves.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect_saddle: Option<Expect>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect_sup: Option<Expect>,
}

/// Parse and validate a scenario. Everything caught here is a usage error
/// (exit 2): malformed syntax, unknown audit ids, knobs on the wrong audit,
/// families that do not build.
pub fn parse(text: &str) -> Result<Scenario, String> {
    let scenario: Scenario = toml::from_str(text).map_err(|e| format!("scenario parse: {e}"))?;
    if !(scenario.tol_scale > 0.0 && scenario.tol_scale.is_finite()) {
        return Err("tol_scale must be positive".into());
    }
    if !(scenario.grid_margin > 0.0 && scenario.grid_margin < 1.0) {
        return Err("grid_margin must lie in (0, 1)".into());
    }
    for (ci, case) in scenario.cases.iter().enumerate() {
        let k = case
            .family
            .build()
            .map_err(|e| format!("case {ci}: family does not build: {e}"))?;
        if let Some(rows) = &case.map {
            let n = k.dim();
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(format!("case {ci}: map must be {n}x{n}"));
            }
        }
        for a in &case.audits {
            if !AUDIT_IDS.contains(&a.id.as_str()) {
                return Err(format!(
                    "case {ci}: unknown audit id {:?} (known: {})",
                    a.id,
                    AUDIT_IDS.join(", ")
                ));
            }
            if a.route.is_some() && a.id != "eq4_1" {
                return Err(format!("case {ci}: route applies only to eq4_1"));
            }
            if a.chart.is_some() && !a.id.starts_with("eq5_") {
                return Err(format!("case {ci}: chart applies only to eq5_1/eq5_2"));
            }
            if (a.expect_saddle.is_some() || a.expect_sup.is_some()) && a.id != "eq2_1n" {
                return Err(format!(
                    "case {ci}: expect_saddle/expect_sup apply only to eq2_1n"
                ));
            }
            if a.expect.is_some() && a.id == "eq2_1n" {
                return Err(format!(
                    "case {ci}: eq2_1n takes expect_saddle/expect_sup, not expect"
                ));
            }
            if let Some(d) = a.directions {
                if d == 0 {
                    return Err(format!("case {ci}: directions must be positive"));
                }
            }
        }
    }
    Ok(scenario)
}

impl AuditSpec {
    pub fn expected(&self) -> Expect {
        self.expect.unwrap_or(Expect::Holds)
    }

    pub fn expected_saddle(&self) -> Expect {
        self.expect_saddle.unwrap_or(Expect::Holds)
    }

    pub fn expected_sup(&self) -> Expect {
        self.expect_sup.unwrap_or(Expect::Fails)
    }
}
