//! Drives a scenario: builds each case's pseudo-cone, runs its audits in
//! listed order, and collects the machine report, the curvature CSV, and the
//! human summary. Numeric failures inside one audit never abort the rest of
//! the run; they surface in the report and in the exit code.

use std::fs;
use std::io;
use std::path::Path;
use std::time::Instant;

use copolar::centroaffine::{audit_cubic_skew, audit_metric_agreement, TensorChart};
use copolar::diffgeo::{
    audit_affine_sphere, audit_gauge_composition, audit_product_identity, crucial_map,
    curvature_sample, CurvatureRow, GaugeChart, ProductRoute,
};
use copolar::duality::{audit_legendre, scale_saddle};
use copolar::na::{DMatrix, DVector};
use copolar::pseudocone::FamilySpec;
use copolar::report::AuditReport;
use copolar::{
    audit_equivariance, audit_involution, audit_reciprocity, AuditOptions, PseudoCone,
};
use serde::Serialize;

use crate::scenario::{AuditSpec, ChartSpec, Expect, RouteSpec, Scenario};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_MISMATCH: i32 = 3;
pub const EXIT_DEGENERATE: i32 = 4;

/// Outcome of one audit entry: either a report compared against its
/// expectation, or the error that prevented a verdict.
#[derive(Debug, Serialize)]
pub struct AuditResult {
    pub id: String,
    pub expected: Expect,
    pub matched: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<AuditReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct CaseReport {
    pub label: String,
    pub results: Vec<AuditResult>,
}

/// The machine report. Deliberately free of wall-clock data: two runs with
/// the same scenario, seed, and version serialize byte-identically. Timings
/// go to a sidecar file instead.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub version: &'static str,
    pub seed: u64,
    pub tol_scale: f64,
    pub scenario: Scenario,
    pub cases: Vec<CaseReport>,
    pub mismatches: usize,
    pub errors: usize,
    pub exit_code: i32,
}

pub struct RunOutcome {
    pub report: RunReport,
    pub csv: String,
    pub summary: Vec<String>,
    pub timing: Vec<String>,
}

/// Copolar built on first use and shared by the audits of one case; a build
/// failure is reported by every audit that needed it.
struct LazyStar<'a> {
    k: &'a PseudoCone,
    slot: Option<Result<PseudoCone, String>>,
}

impl<'a> LazyStar<'a> {
    fn new(k: &'a PseudoCone) -> Self {
        LazyStar { k, slot: None }
    }

    fn get(&mut self) -> Result<&PseudoCone, String> {
        if self.slot.is_none() {
            self.slot = Some(self.k.copolar().map_err(|e| format!("copolar build: {e}")));
        }
        self.slot.as_ref().unwrap().as_ref().map_err(|e| e.clone())
    }
}

fn expect_of(holds: bool) -> Expect {
    if holds {
        Expect::Holds
    } else {
        Expect::Fails
    }
}

fn result_for(report: AuditReport, expected: Expect) -> AuditResult {
    AuditResult {
        id: report.id.clone(),
        expected,
        matched: expect_of(report.holds()) == expected,
        report: Some(report),
        error: None,
    }
}

fn result_for_error(id: &str, expected: Expect, error: String) -> AuditResult {
    AuditResult { id: id.to_string(), expected, matched: false, report: None, error: Some(error) }
}

fn tensor_chart(
    family: &FamilySpec,
    choice: Option<ChartSpec>,
    margin: f64,
) -> Result<TensorChart, String> {
    let exponential = match family {
        FamilySpec::Hyperbola { c } => Some(TensorChart::Exponential { c: *c, span: 1.2 }),
        _ => None,
    };
    match choice {
        Some(ChartSpec::Exponential) => {
            exponential.ok_or_else(|| "the exponential chart needs the hyperbola family".into())
        }
        Some(ChartSpec::Radial) => Ok(TensorChart::Radial { margin }),
        None => Ok(exponential.unwrap_or(TensorChart::Radial { margin })),
    }
}

fn run_audit(
    k: &PseudoCone,
    star: &mut LazyStar,
    family: &FamilySpec,
    spec: &AuditSpec,
    opts: &AuditOptions,
    rows: &mut Vec<CurvatureRow>,
) -> Vec<AuditResult> {
    let wrap = |r: Result<Vec<AuditResult>, String>, id: &str, expected: Expect| match r {
        Ok(v) => v,
        Err(e) => vec![result_for_error(id, expected, e)],
    };
    match spec.id.as_str() {
        "involution" => wrap(
            star.get()
                .and_then(|ks| ks.copolar().map_err(|e| format!("second copolar build: {e}")))
                .and_then(|kss| {
                    audit_involution(k, &kss, opts).map_err(|e| e.to_string())
                })
                .map(|r| vec![result_for(r, spec.expected())]),
            &spec.id,
            spec.expected(),
        ),
        "eq1_1" => wrap(
            star.get()
                .and_then(|ks| audit_reciprocity(k, ks, opts).map_err(|e| e.to_string()))
                .map(|r| vec![result_for(r, spec.expected())]),
            &spec.id,
            spec.expected(),
        ),
        "eq2_1n" => wrap(
            star.get()
                .and_then(|ks| audit_legendre(k, ks, opts).map_err(|e| e.to_string()))
                .map(|rs| {
                    let expects = [spec.expected_saddle(), spec.expected_sup()];
                    rs.into_iter()
                        .zip(expects)
                        .map(|(r, e)| result_for(r, e))
                        .collect()
                }),
            &spec.id,
            spec.expected_saddle(),
        ),
        "eq3_2" => wrap(
            star.get()
                .and_then(|ks| audit_gauge_composition(k, ks, opts).map_err(|e| e.to_string()))
                .map(|r| vec![result_for(r, spec.expected())]),
            &spec.id,
            spec.expected(),
        ),
        "eq4_1" => {
            let route = match spec.route.unwrap_or(RouteSpec::Numeric) {
                RouteSpec::Numeric => ProductRoute::NumericStar,
                RouteSpec::Analytic => ProductRoute::AnalyticStar,
            };
            wrap(
                star.get()
                    .and_then(|ks| {
                        audit_product_identity(k, ks, route, opts).map_err(|e| e.to_string())
                    })
                    .map(|(r, mut new_rows)| {
                        rows.append(&mut new_rows);
                        vec![result_for(r, spec.expected())]
                    }),
                &spec.id,
                spec.expected(),
            )
        }
        "eq5_1" | "eq5_2" => wrap(
            tensor_chart(family, spec.chart, opts.margin).and_then(|chart| {
                let r = if spec.id == "eq5_1" {
                    audit_metric_agreement(k, &chart, opts)
                } else {
                    audit_cubic_skew(k, &chart, opts)
                };
                r.map(|r| vec![result_for(r, spec.expected())])
                    .map_err(|e| e.to_string())
            }),
            &spec.id,
            spec.expected(),
        ),
        "affine_sphere" => wrap(
            star.get()
                .and_then(|ks| audit_affine_sphere(k, ks, opts).map_err(|e| e.to_string()))
                .map(|(rs, mut new_rows)| {
                    rows.append(&mut new_rows);
                    rs.into_iter().map(|r| result_for(r, spec.expected())).collect()
                }),
            &spec.id,
            spec.expected(),
        ),
        "equivariance" => wrap(
            star.get()
                .and_then(|ks| audit_equivariance(k, ks, opts).map_err(|e| e.to_string()))
                .map(|r| vec![result_for(r, spec.expected())]),
            &spec.id,
            spec.expected(),
        ),
        other => vec![result_for_error(other, spec.expected(), "unknown audit id".into())],
    }
}

fn build_case(family: &FamilySpec, map: &Option<Vec<Vec<f64>>>) -> Result<PseudoCone, String> {
    let k = family.build().map_err(|e| e.to_string())?;
    match map {
        Some(rows) => {
            let n = k.dim();
            let flat: Vec<f64> = rows.iter().flatten().copied().collect();
            let m = DMatrix::from_row_slice(n, n, &flat);
            k.linear_image(&m).map_err(|e| format!("linear map: {e}"))
        }
        None => Ok(k),
    }
}

pub fn run_scenario(scenario: &Scenario) -> RunOutcome {
    let mut cases = Vec::with_capacity(scenario.cases.len());
    let mut rows: Vec<CurvatureRow> = Vec::new();
    let mut summary = Vec::new();
    let mut timing = Vec::new();
    let mut mismatches = 0usize;
    let mut errors = 0usize;
    let total = Instant::now();

    for case in &scenario.cases {
        let start = Instant::now();
        let mut results = Vec::new();
        match build_case(&case.family, &case.map) {
            Ok(k) => {
                let mut star = LazyStar::new(&k);
                for spec in &case.audits {
                    let opts = AuditOptions {
                        directions: spec
                            .directions
                            .unwrap_or_else(|| AuditOptions::default().directions),
                        seed: scenario.seed,
                        tol_scale: scenario.tol_scale,
                        margin: scenario.grid_margin,
                    };
                    results.extend(run_audit(&k, &mut star, &case.family, spec, &opts, &mut rows));
                }
                let label = k.label().to_string();
                for r in &results {
                    summary.push(summary_line(&label, r));
                    if r.error.is_some() {
                        errors += 1;
                    } else if !r.matched {
                        mismatches += 1;
                    }
                }
                timing.push(format!("{label}: {:.3}s", start.elapsed().as_secs_f64()));
                cases.push(CaseReport { label, results });
            }
            Err(e) => {
                // Families are validated at parse time; reaching this means
                // the build became degenerate later (e.g. after a map).
                let label = format!("case {}", cases.len());
                for spec in &case.audits {
                    let r = result_for_error(&spec.id, spec.expected(), e.clone());
                    summary.push(summary_line(&label, &r));
                    results.push(r);
                    errors += 1;
                }
                timing.push(format!("{label}: {:.3}s", start.elapsed().as_secs_f64()));
                cases.push(CaseReport { label, results });
            }
        }
    }

    let exit_code = if errors > 0 {
        EXIT_DEGENERATE
    } else if mismatches > 0 {
        EXIT_MISMATCH
    } else {
        EXIT_OK
    };
    summary.push(format!(
        "{} audit results, {mismatches} expectation mismatches, {errors} errors -> exit {exit_code}",
        cases.iter().map(|c| c.results.len()).sum::<usize>()
    ));
    timing.push(format!("total: {:.3}s", total.elapsed().as_secs_f64()));

    let max_n = scenario
        .cases
        .iter()
        .filter_map(|c| c.family.build().ok().map(|k| k.dim()))
        .max()
        .unwrap_or(2);
    let csv = curvature_csv(&rows, max_n);

    RunOutcome {
        report: RunReport {
            version: env!("CARGO_PKG_VERSION"),
            seed: scenario.seed,
            tol_scale: scenario.tol_scale,
            scenario: scenario.clone(),
            cases,
            mismatches,
            errors,
            exit_code,
        },
        csv,
        summary,
        timing,
    }
}

fn summary_line(label: &str, r: &AuditResult) -> String {
    match (&r.report, &r.error) {
        (Some(rep), _) => format!(
            "{} {}",
            rep.status_line(),
            if r.matched {
                format!("[expected {:?}: ok]", r.expected).to_lowercase()
            } else {
                format!("[expected {:?}: MISMATCH]", r.expected)
            }
        ),
        (None, Some(e)) => {
            format!("ERROR {:<14} family={:<24} {e}", r.id, label)
        }
        (None, None) => unreachable!("result without report or error"),
    }
}

/// Fixed-order curvature sample table. Width is set by the largest ambient
/// dimension in the scenario; rows from smaller families leave the unused
/// trailing coordinates empty, as do samples without a pair product.
pub fn curvature_csv(rows: &[CurvatureRow], max_n: usize) -> String {
    let mut header = vec!["family".to_string(), "n".to_string()];
    for i in 1..max_n {
        header.push(format!("chart_u{i}"));
    }
    for i in 1..=max_n {
        header.push(format!("x_{i}"));
    }
    header.extend(["kappa".into(), "rho_aff".into(), "pair_product".into()]);
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let mut fields = vec![row.family.clone(), row.x.len().to_string()];
        for i in 0..max_n - 1 {
            fields.push(row.chart.get(i).map(|v| format!("{v}")).unwrap_or_default());
        }
        for i in 0..max_n {
            fields.push(row.x.get(i).map(|v| format!("{v}")).unwrap_or_default());
        }
        fields.push(format!("{}", row.kappa));
        fields.push(format!("{}", row.rho_aff));
        fields.push(row.pair_product.map(|v| format!("{v}")).unwrap_or_default());
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)
}

/// The `families` table: every built-in family with its parameter ranges,
/// smoothness class, and whether the copolar has a closed form.
pub fn families_table() -> String {
    let rows = [
        ("hyperbola", "c > 0", 3, true),
        ("calabi", "c > 0", 3, true),
        ("perturbed_hyperbola", "0 <= delta <= 2", 2, false),
        ("truncated_cone", "cone, w (optional), level > 0", 0, true),
        ("shifted_cone", "cone, apex in int cone", 0, true),
    ];
    let mut out = format!(
        "{:<20} {:<30} {:<16} {}\n",
        "family", "parameters", "smoothness_class", "closed_form_copolar"
    );
    for (name, params, class, closed) in rows {
        out.push_str(&format!(
            "{name:<20} {params:<30} {class:<16} {}\n",
            if closed { "yes" } else { "no" }
        ));
    }
    out
}

/// Single-point evaluation for debugging. Returns the printable value or a
/// (exit code, message) pair.
pub fn eval(
    scenario: &Scenario,
    case_index: usize,
    op: &str,
    point: &[f64],
) -> Result<String, (i32, String)> {
    let case = scenario
        .cases
        .get(case_index)
        .ok_or_else(|| (EXIT_PARSE, format!("scenario has no case {case_index}")))?;
    let k = build_case(&case.family, &case.map).map_err(|e| (EXIT_PARSE, e))?;
    if point.len() != k.dim() {
        return Err((
            EXIT_PARSE,
            format!("point has {} coordinates, family needs {}", point.len(), k.dim()),
        ));
    }
    let x = DVector::from_column_slice(point);
    let numeric = |e: copolar::Error| (EXIT_DEGENERATE, e.to_string());
    let smooth_gauge = || {
        k.gauge()
            .cloned()
            .ok_or((EXIT_PARSE, format!("{op} needs a smooth family"), ))
    };
    let scalar = |v: f64| format!("{v}");
    match op {
        "gauge" => Ok(scalar(k.gauge_value(&x))),
        "radial" => k.radial(&x).map(scalar).map_err(numeric),
        "support" => Ok(scalar(k.support(&x))),
        "support_computed" => k.support_computed(&x).map(scalar).map_err(numeric),
        "crucial" => {
            let g = smooth_gauge()?;
            let u = crucial_map(g.as_ref(), &x).map_err(numeric)?;
            Ok(u.iter().map(|v| format!("{v}")).collect::<Vec<_>>().join(" "))
        }
        "kappa" | "rho_aff" => {
            let g = smooth_gauge()?;
            let chart = GaugeChart::new(k.cone(), g).map_err(numeric)?;
            let p = chart
                .coords_of(&x)
                .ok_or((EXIT_DEGENERATE, "point is outside the cone".to_string()))?;
            let s = curvature_sample(&chart, &p).map_err(numeric)?;
            Ok(scalar(if op == "kappa" { s.kappa() } else { s.rho_aff }))
        }
        "saddle" => scale_saddle(&k, &x).map(scalar).map_err(numeric),
        other => Err((
            EXIT_PARSE,
            format!(
                "unknown op {other:?} (known: gauge, radial, support, support_computed, crucial, kappa, rho_aff, saddle)"
            ),
        )),
    }
}
