//! Scale-quadratic transforms and the conjugate-form audits.
//!
//! The function `htilde` attaches to a pseudo-cone the scale-quadratic
//! potential
//!
//! ```text
//! htilde_K(u) = -(1/2) h_K(u)^2   on the dual cone (0 at the origin),
//!               +infinity          elsewhere,
//! ```
//!
//! and the copolar relates the potentials of K and K* through a constrained
//! saddle form: maximizing `<x,u> / (-h_K(u))` over dual directions and
//! squaring recovers `htilde_{K*}(x)`. The unconstrained Legendre transform
//! of `htilde_K`, by contrast, diverges everywhere on the interior of the
//! recession cone; the audit demonstrates both behaviours side by side
//! (identity catalog ids `eq2_1n_saddle` and `eq2_1n_sup`).

use nalgebra::DVector;

use crate::constants::{
    default_tolerance, DEFAULT_RESTARTS, DEFAULT_SHELLS, SUP_MARGIN, SUP_TOL,
};
use crate::error::{Error, Result};
use crate::numkit::{brent_max, maximize_on_cap, CapDomain};
use crate::pseudocone::{AuditOptions, PseudoCone};
use crate::report::{AuditBuilder, AuditReport};
use crate::sampling;

/// Scale-quadratic potential of a pseudo-cone: `-(1/2) h_K(u)^2` on the dual
/// cone, zero at the origin, plus infinity elsewhere.
pub fn htilde(k: &PseudoCone, u: &DVector<f64>) -> f64 {
    if u.iter().all(|&c| c == 0.0) {
        return 0.0;
    }
    if !k.dual_cone().contains(u) {
        return f64::INFINITY;
    }
    let h = k.support(u);
    if !h.is_finite() {
        return f64::INFINITY;
    }
    -0.5 * h * h
}

/// The constrained ratio `sup_u <x,u> / (-h_K(u))` over interior dual
/// directions. For `x` interior to the recession cone this equals `-F_K(x)`,
/// the negated gauge; a positive maximum certifies that `x` lies outside the
/// recession cone and the supremum is plus infinity.
///
/// The maximization goes through the pseudo-cone's own support route, so on
/// numerically built copolars this is a genuinely independent evaluation of
/// the gauge.
pub fn ratio_support(k: &PseudoCone, x: &DVector<f64>) -> Result<f64> {
    let dual = k.dual_cone();
    let axis = dual.axis_direction();
    let cap = CapDomain::new(axis, dual.outer_angle().min(1.5707), SUP_MARGIN)?;
    let field = |u: &DVector<f64>| {
        if !dual.interior_contains(u) {
            return f64::NAN;
        }
        let h = k.support(u);
        if !h.is_finite() || h >= 0.0 {
            return f64::NAN;
        }
        x.dot(u) / (-h)
    };
    let (_, val) = maximize_on_cap(field, &cap, DEFAULT_RESTARTS, SUP_TOL)?;
    if !val.is_finite() {
        return Err(Error::DegenerateSupport { value: val });
    }
    if val > 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(val)
}

/// Saddle-form evaluation of the copolar's potential at `x`:
/// `-(1/2) (sup_u <x,u> / (-h_K(u)))^2`, which must equal
/// `htilde_{K*}(x)` for `x` interior to the recession cone of K.
pub fn scale_saddle(k: &PseudoCone, x: &DVector<f64>) -> Result<f64> {
    let r = ratio_support(k, x)?;
    if !r.is_finite() {
        return Err(Error::OutsideCone);
    }
    Ok(-0.5 * r * r)
}

/// Search parameters of the generic Legendre transform.
#[derive(Debug, Clone)]
pub struct LegendreSearch {
    /// Unit directions probed on the sphere.
    pub directions: usize,
    /// Radius of the first ladder rung.
    pub initial_range: f64,
    /// Number of range doublings; sustained growth through the final two
    /// declares divergence.
    pub doublings: usize,
    /// Value tolerance of the bounded refinement.
    pub tol: f64,
}

impl Default for LegendreSearch {
    fn default() -> Self {
        LegendreSearch { directions: 24, initial_range: 0.5, doublings: 60, tol: 1e-12 }
    }
}

/// Outcome of a generic Legendre transform evaluation.
#[derive(Debug, Clone)]
pub struct LegendreValue {
    pub value: f64,
    pub diverged: bool,
    /// Escape ray (unit direction) along which the transform grows without
    /// bound, when it does.
    pub witness: Option<Vec<f64>>,
}

/// Generic Legendre transform `sup_u <x,u> - f(u)` by deterministic radial
/// ladders plus a bounded local refinement.
///
/// Each unit direction carries a geometric ladder of radii; values still
/// growing through the final two doublings declare the supremum infinite and
/// the direction becomes the escape-ray witness. Otherwise the best ladder
/// sample seeds a derivative-free ambient maximization. Non-finite values of
/// `f` are treated as plus infinity (the sample is rejected).
pub fn legendre(
    f: &dyn Fn(&DVector<f64>) -> f64,
    x: &DVector<f64>,
    search: &LegendreSearch,
) -> Result<LegendreValue> {
    let dirs = sphere_directions(x.len(), search.directions)?;
    let mut best_val = f64::NEG_INFINITY;
    let mut best_point: Option<DVector<f64>> = None;
    let mut best_radius = search.initial_range;
    let mut escape: Option<(f64, DVector<f64>)> = None;

    for d in &dirs {
        let mut tail = [f64::NEG_INFINITY; 3];
        let mut t = search.initial_range;
        for _ in 0..=search.doublings {
            let u = d * t;
            let fv = f(&u);
            let g = if fv.is_finite() { x.dot(&u) - fv } else { f64::NEG_INFINITY };
            if g.is_finite() && g > best_val {
                best_val = g;
                best_point = Some(u);
                best_radius = t;
            }
            tail = [tail[1], tail[2], g];
            t *= 2.0;
        }
        let growing = tail.iter().all(|v| v.is_finite()) && tail[2] > tail[1] && tail[1] > tail[0];
        if growing {
            let better = match &escape {
                Some((v, _)) => tail[2] > *v,
                None => true,
            };
            if better {
                escape = Some((tail[2], d.clone()));
            }
        }
    }

    if let Some((_, d)) = escape {
        return Ok(LegendreValue {
            value: f64::INFINITY,
            diverged: true,
            witness: Some(d.as_slice().to_vec()),
        });
    }
    let Some(p0) = best_point else {
        return Err(Error::degenerate(
            "legendre search found no finite value; effective domain may be empty",
        ));
    };
    let best_dir = &p0 / p0.norm();
    // Radius polish along a ray: golden section on the log radius around the
    // best rung. Cliffs (f non-finite) order below every finite value, so
    // boundary-attained maxima converge too.
    let ray_max = |dir: &DVector<f64>, hint: f64| -> f64 {
        let g = |s: f64| {
            let u = dir * s.exp();
            let fv = f(&u);
            if fv.is_finite() { x.dot(&u) - fv } else { f64::NEG_INFINITY }
        };
        let s0 = hint.ln();
        let span = 4.0f64.ln();
        match brent_max(g, s0 - span, s0 + span, 1e-12, 90) {
            Some((_, v)) if v.is_finite() => v,
            _ => f64::NEG_INFINITY,
        }
    };
    let mut value = best_val.max(ray_max(&best_dir, best_radius));
    // Direction polish: the sphere grid resolves directions only to its
    // spacing, so search a cap of that width around the best ray with the
    // radius polish as the field.
    let spacing = match x.len() {
        2 => std::f64::consts::TAU / search.directions as f64,
        _ => (4.0 * std::f64::consts::PI / search.directions as f64).sqrt(),
    };
    let cap = CapDomain::new(best_dir, spacing.min(0.8), 0.0)?;
    let field = |dir: &DVector<f64>| ray_max(dir, best_radius);
    if let Ok((_, v)) = maximize_on_cap(field, &cap, 2, search.tol) {
        if v.is_finite() && v > value {
            value = v;
        }
    }
    Ok(LegendreValue { value, diverged: false, witness: None })
}

/// Deterministic, roughly equidistributed unit directions.
fn sphere_directions(dim: usize, count: usize) -> Result<Vec<DVector<f64>>> {
    if count == 0 {
        return Err(Error::degenerate("direction count must be positive"));
    }
    match dim {
        2 => Ok((0..count)
            .map(|j| {
                let theta = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / count as f64;
                DVector::from_column_slice(&[theta.cos(), theta.sin()])
            })
            .collect()),
        3 => {
            let golden = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
            Ok((0..count)
                .map(|j| {
                    let z = 1.0 - 2.0 * (j as f64 + 0.5) / count as f64;
                    let r = (1.0 - z * z).max(0.0).sqrt();
                    let phi = golden * j as f64;
                    DVector::from_column_slice(&[r * phi.cos(), r * phi.sin(), z])
                })
                .collect())
        }
        _ => Err(Error::unsupported(
            "legendre searches cover ambient dimensions 2 and 3",
        )),
    }
}

/// Conjugate-form audit pair: the saddle form must reproduce the copolar's
/// potential, while the unconstrained Legendre transform must diverge with
/// an escape-ray witness at every tested point.
pub fn audit_legendre(
    k: &PseudoCone,
    kstar: &PseudoCone,
    opts: &AuditOptions,
) -> Result<Vec<AuditReport>> {
    let tol_saddle = default_tolerance("eq2_1n_saddle", k.dim() <= 2) * opts.tol_scale;
    let tol_sup = default_tolerance("eq2_1n_sup", true) * opts.tol_scale;
    let mut saddle = AuditBuilder::new("eq2_1n_saddle", k.label(), tol_saddle);
    let mut sup = AuditBuilder::new("eq2_1n_sup", k.label(), tol_sup)
        .track_divergence()
        .with_note("unconstrained conjugate: divergence with an escape ray is the expected outcome");
    let dirs = sampling::interior_directions(k.cone(), opts.margin, opts.directions)?;
    let search = LegendreSearch::default();
    let fk = |u: &DVector<f64>| htilde(k, u);
    for shell in DEFAULT_SHELLS {
        for d in &dirs {
            let x = d * shell;
            let expect = htilde(kstar, &x);
            let s = scale_saddle(k, &x)?;
            saddle.record(x.as_slice(), s, expect);
            let l = legendre(&fk, &x, &search)?;
            if l.diverged {
                sup.record_diverged(x.as_slice(), l.value, &l.witness.unwrap_or_default());
            } else {
                sup.record(x.as_slice(), l.value, expect);
            }
        }
    }
    Ok(vec![saddle.finish(), sup.finish()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::dvector;

    #[test]
    fn htilde_of_the_hyperbola_matches_the_closed_form() {
        let k = PseudoCone::hyperbola(1.0).unwrap();
        // h(-1,-1) = -2, so the potential is -2.
        assert_relative_eq!(htilde(&k, &dvector![-1.0, -1.0]), -2.0, epsilon = 1e-12);
        assert_eq!(htilde(&k, &dvector![1.0, 1.0]), f64::INFINITY);
        assert_eq!(htilde(&k, &dvector![0.0, 0.0]), 0.0);
    }

    #[test]
    fn ratio_support_recovers_the_negated_gauge() {
        let k = PseudoCone::hyperbola(1.0).unwrap();
        assert_relative_eq!(ratio_support(&k, &dvector![1.0, 1.0]).unwrap(), -1.0, epsilon = 1e-9);
        assert_relative_eq!(ratio_support(&k, &dvector![2.0, 2.0]).unwrap(), -2.0, epsilon = 1e-9);
        let x = dvector![1.3, 0.6];
        let f = (1.3f64 * 0.6).sqrt();
        assert_relative_eq!(ratio_support(&k, &x).unwrap(), -f, epsilon = 1e-9);
    }

    #[test]
    fn ratio_support_agrees_with_the_numeric_copolar_support() {
        let k = PseudoCone::hyperbola(1.0).unwrap();
        let kstar = k.copolar().unwrap();
        let x = dvector![1.7, 0.9];
        let direct = ratio_support(&k, &x).unwrap();
        let through_star = kstar.support_computed(&x).unwrap();
        assert_relative_eq!(direct, through_star, epsilon = 1e-9);
    }

    #[test]
    fn saddle_values_on_the_product_families() {
        let k2 = PseudoCone::hyperbola(1.0).unwrap();
        assert_relative_eq!(scale_saddle(&k2, &dvector![1.0, 1.0]).unwrap(), -0.5, epsilon = 1e-8);
        assert_relative_eq!(scale_saddle(&k2, &dvector![2.0, 2.0]).unwrap(), -2.0, epsilon = 1e-8);
        let k3 = PseudoCone::calabi(1.0).unwrap();
        assert_relative_eq!(
            scale_saddle(&k3, &dvector![1.0, 1.0, 1.0]).unwrap(),
            -0.5,
            epsilon = 1e-7
        );
        assert_relative_eq!(
            scale_saddle(&k3, &dvector![3.0, 3.0, 3.0]).unwrap(),
            -4.5,
            epsilon = 1e-7
        );
    }

    #[test]
    fn saddle_rejects_points_outside_the_recession_cone() {
        let k = PseudoCone::hyperbola(1.0).unwrap();
        assert!(matches!(
            scale_saddle(&k, &dvector![-1.0, 1.0]),
            Err(Error::OutsideCone)
        ));
    }

    #[test]
    fn legendre_of_a_quadratic_is_the_dual_quadratic() {
        let f = |u: &DVector<f64>| 0.5 * u.norm_squared();
        let x = dvector![1.0, 2.0];
        let l = legendre(&f, &x, &LegendreSearch::default()).unwrap();
        assert!(!l.diverged);
        assert_relative_eq!(l.value, 2.5, epsilon = 1e-9);
    }

    #[test]
    fn legendre_of_a_ball_indicator_is_the_norm() {
        let f = |u: &DVector<f64>| if u.norm() <= 1.0 { 0.0 } else { f64::INFINITY };
        let x = dvector![3.0, 0.0];
        let l = legendre(&f, &x, &LegendreSearch::default()).unwrap();
        assert!(!l.diverged);
        assert_relative_eq!(l.value, 3.0, epsilon = 1e-6);
    }

    #[test]
    fn legendre_of_the_potential_diverges_with_an_interior_witness() {
        let k = PseudoCone::hyperbola(1.0).unwrap();
        let f = |u: &DVector<f64>| htilde(&k, u);
        let l = legendre(&f, &dvector![1.0, 1.0], &LegendreSearch::default()).unwrap();
        assert!(l.diverged);
        assert_eq!(l.value, f64::INFINITY);
        let w = l.witness.expect("escape ray");
        assert!(w[0] < 0.0 && w[1] < 0.0, "witness {w:?} should be an interior dual ray");
    }

    #[test]
    fn saddle_form_equals_the_copolar_potential_on_a_grid() {
        let k = PseudoCone::hyperbola(1.0).unwrap();
        let kstar = k.copolar().unwrap();
        let opts = AuditOptions { directions: 20, ..AuditOptions::default() };
        let reports = audit_legendre(&k, &kstar, &opts).unwrap();
        assert_eq!(reports.len(), 2);
        assert!(reports[0].holds(), "saddle: {}", reports[0].status_line());
        assert!(!reports[1].holds(), "sup form must diverge");
        assert_eq!(reports[1].diverged, Some(reports[1].samples));
    }
}
