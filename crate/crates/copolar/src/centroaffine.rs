//! Centro-affine structure of a crucial pair.
//!
//! A boundary parameterization X and its starred companion `X* = -grad q(X)`
//! share chart coordinates and satisfy the exact pairing relations
//! `<X*, X> = -1` and `<X*, X_a> = <X, X*_a> = 0`. Out of the second-order
//! jets come a nondegenerate metric and a cubic form on the parameter
//! domain,
//!
//! ```text
//! G_ab  = <X*, X_ab>,
//! A_abc = -<X*_c, X_ab - Gamma^d_ab X_d>,
//! ```
//!
//! with Gamma the Levi-Civita symbols of G. Swapping the roles of X and X*
//! produces Gbar and Abar from the copolar side. The audited duality
//! statements: the two metrics coincide (id `eq5_1`) and the cubic forms are
//! opposite (id `eq5_2`).

use nalgebra::DMatrix;

use crate::constants::default_tolerance;
use crate::diffgeo::{gauge_budget, star_jet, BoundaryChart, ChartJet, GaugeChart, HyperbolaExp};
use crate::error::{Error, Result};
use crate::numkit::SymTensor3;
use crate::pseudocone::{AuditOptions, PseudoCone};
use crate::report::{AuditBuilder, AuditReport};
use crate::sampling;

/// Metric, connection and cubic form of one role assignment at one point.
#[derive(Debug, Clone)]
pub struct CentroaffineFrame {
    /// Defining form `<Y, X_ab>` (negative definite).
    pub metric: DMatrix<f64>,
    /// Cross form `-<Y_a, X_b>`, symmetrized; agrees with `metric` exactly
    /// and is the version differentiated below.
    pub metric_cross: DMatrix<f64>,
    /// Exact first derivatives of the cross form, indexed by the derivative
    /// direction.
    pub metric_first: Vec<DMatrix<f64>>,
    /// Levi-Civita symbols `Gamma[d][(a, b)]` of the cross-form metric.
    pub christoffel: Vec<DMatrix<f64>>,
    /// Totally symmetrized cubic form.
    pub cubic: SymTensor3,
    /// Largest deviation of the raw cubic entries from their symmetrization;
    /// total symmetry is a theorem, so this measures jet noise.
    pub cubic_asymmetry: f64,
}

/// Builds the centro-affine frame for the role assignment `(X, Y) = (jet,
/// star)`. Calling it again with the arguments swapped gives the copolar
/// side's frame.
pub fn frame_from_jets(jet: &ChartJet, star: &ChartJet, budget: f64) -> Result<CentroaffineFrame> {
    let m = jet.first.len();
    if star.first.len() != m || star.x.len() != jet.x.len() {
        return Err(Error::degenerate("jets live in different charts"));
    }

    let metric = DMatrix::from_fn(m, m, |a, b| star.x.dot(&jet.second[a][b]));
    let raw_cross = DMatrix::from_fn(m, m, |a, b| -star.first[a].dot(&jet.first[b]));
    let metric_cross = (&raw_cross + raw_cross.transpose()) * 0.5;

    let mut metric_first = Vec::with_capacity(m);
    for c in 0..m {
        let d = DMatrix::from_fn(m, m, |a, b| {
            -star.second[a][c].dot(&jet.first[b]) - star.first[a].dot(&jet.second[b][c])
        });
        metric_first.push((&d + d.transpose()) * 0.5);
    }

    if metric_cross.determinant().abs() < 1e-14 {
        return Err(Error::degenerate("centro-affine metric is singular"));
    }
    let inv = metric_cross.clone().try_inverse().ok_or(Error::Singular)?;
    let mut christoffel = vec![DMatrix::zeros(m, m); m];
    for d in 0..m {
        for a in 0..m {
            for b in a..m {
                let mut s = 0.0;
                for e in 0..m {
                    s += inv[(d, e)]
                        * (metric_first[a][(b, e)] + metric_first[b][(a, e)]
                            - metric_first[e][(a, b)]);
                }
                christoffel[d][(a, b)] = 0.5 * s;
                christoffel[d][(b, a)] = 0.5 * s;
            }
        }
    }

    let mut raw = vec![vec![vec![0.0; m]; m]; m];
    for a in 0..m {
        for b in 0..m {
            for c in 0..m {
                let mut v = jet.second[a][b].clone();
                for d in 0..m {
                    v -= &jet.first[d] * christoffel[d][(a, b)];
                }
                raw[a][b][c] = -star.first[c].dot(&v);
            }
        }
    }
    let mut cubic = SymTensor3::zeros(m);
    let mut asym = 0.0f64;
    for a in 0..m {
        for b in a..m {
            for c in b..m {
                let perms = [
                    raw[a][b][c],
                    raw[a][c][b],
                    raw[b][a][c],
                    raw[b][c][a],
                    raw[c][a][b],
                    raw[c][b][a],
                ];
                let mean = perms.iter().sum::<f64>() / 6.0;
                for v in perms {
                    asym = asym.max((v - mean).abs());
                }
                cubic.set_sym(a, b, c, mean);
            }
        }
    }
    if asym > 10.0 * budget {
        return Err(Error::NoiseBudgetExceeded {
            what: "cubic form symmetry".into(),
            got: asym,
            budget: 10.0 * budget,
        });
    }

    Ok(CentroaffineFrame { metric, metric_cross, metric_first, christoffel, cubic, cubic_asymmetry: asym })
}

/// Where the tensor audits take their jets from.
#[derive(Debug, Clone, Copy)]
pub enum TensorChart {
    /// Exponential chart of the planar hyperbola branch at level `c`,
    /// sampled uniformly over `[-span, span]`. Fully analytic.
    Exponential { c: f64, span: f64 },
    /// Radial gauge chart over the cone footprint at the given angular
    /// margin.
    Radial { margin: f64 },
}

fn jet_pairs(
    k: &PseudoCone,
    chart: &TensorChart,
    opts: &AuditOptions,
) -> Result<(Vec<(ChartJet, ChartJet)>, f64)> {
    let gauge = k
        .gauge()
        .ok_or_else(|| Error::unsupported("tensor audits need a smooth pseudo-cone"))?;
    let budget = gauge_budget(gauge.as_ref());
    let count = opts.directions.max(1);
    let mut pairs = Vec::with_capacity(count);
    match chart {
        TensorChart::Exponential { c, span } => {
            if k.dim() != 2 {
                return Err(Error::unsupported("the exponential chart is planar"));
            }
            let exp = HyperbolaExp::new(*c)?;
            for i in 0..count {
                let t = -span + 2.0 * span * (i as f64 + 0.5) / count as f64;
                let jet = exp.jet(&[t])?;
                let star = star_jet(gauge.as_ref(), &jet)?;
                pairs.push((jet, star));
            }
        }
        TensorChart::Radial { margin } => {
            let gchart = GaugeChart::new(k.cone(), gauge.clone())?;
            let dirs = sampling::interior_directions(k.cone(), *margin, count)?;
            for v in &dirs {
                let p = gchart.coords_of(v).ok_or(Error::OutsideCone)?;
                let jet = gchart.jet(&p)?;
                let star = star_jet(gauge.as_ref(), &jet)?;
                pairs.push((jet, star));
            }
        }
    }
    Ok((pairs, budget))
}

/// The two defining forms of the metric coincide (audit id `eq5_1`): the
/// K-side `<X*, X_ab>` equals the copolar-side `<X, X*_ab>` entry by entry.
pub fn audit_metric_agreement(
    k: &PseudoCone,
    chart: &TensorChart,
    opts: &AuditOptions,
) -> Result<AuditReport> {
    let (pairs, budget) = jet_pairs(k, chart, opts)?;
    let tol = default_tolerance("eq5_1", k.has_analytic_jets()) * opts.tol_scale;
    let mut b = AuditBuilder::new("eq5_1", k.label(), tol).with_note(chart_note(chart));
    for (jet, star) in &pairs {
        let f = frame_from_jets(jet, star, budget)?;
        let fbar = frame_from_jets(star, jet, budget)?;
        let m = jet.first.len();
        for a in 0..m {
            for c in a..m {
                b.record(jet.x.as_slice(), f.metric[(a, c)], fbar.metric[(a, c)]);
            }
        }
    }
    Ok(b.finish())
}

/// The cubic forms of the two sides are opposite (audit id `eq5_2`):
/// `A = -Abar` entry by entry. The note carries the largest `|A|` seen, so
/// a vanishing cubic form cannot fake the audit.
pub fn audit_cubic_skew(
    k: &PseudoCone,
    chart: &TensorChart,
    opts: &AuditOptions,
) -> Result<AuditReport> {
    let (pairs, budget) = jet_pairs(k, chart, opts)?;
    let tol = default_tolerance("eq5_2", k.has_analytic_jets()) * opts.tol_scale;
    let mut b = AuditBuilder::new("eq5_2", k.label(), tol);
    let mut max_cubic = 0.0f64;
    for (jet, star) in &pairs {
        let f = frame_from_jets(jet, star, budget)?;
        let fbar = frame_from_jets(star, jet, budget)?;
        max_cubic = max_cubic.max(f.cubic.max_abs());
        let m = jet.first.len();
        for a in 0..m {
            for c in a..m {
                for e in c..m {
                    b.record(jet.x.as_slice(), f.cubic.get(a, c, e), -fbar.cubic.get(a, c, e));
                }
            }
        }
    }
    Ok(b
        .with_note(format!("{}; max |A| {max_cubic:.6}", chart_note(chart)))
        .finish())
}

fn chart_note(chart: &TensorChart) -> String {
    match chart {
        TensorChart::Exponential { c, span } => {
            format!("exponential chart, level {c}, span {span}")
        }
        TensorChart::Radial { margin } => format!("radial chart, margin {margin}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::BUDGET_ANALYTIC;
    use crate::diffgeo::Reparam;
    use crate::pseudocone::gauge::ProductGauge;
    use approx::assert_relative_eq;
    use nalgebra::dvector;

    fn hyperbola_pair(t: f64) -> (ChartJet, ChartJet) {
        let exp = HyperbolaExp::new(1.0).unwrap();
        let jet = exp.jet(&[t]).unwrap();
        let star = star_jet(&ProductGauge::new(2, 1.0), &jet).unwrap();
        (jet, star)
    }

    #[test]
    fn exponential_chart_has_the_flat_frozen_frame() {
        for t in [-0.6, 0.0, 0.4] {
            let (jet, star) = hyperbola_pair(t);
            let f = frame_from_jets(&jet, &star, BUDGET_ANALYTIC).unwrap();
            assert_relative_eq!(f.metric[(0, 0)], -1.0, epsilon = 1e-12);
            assert_relative_eq!(f.metric_cross[(0, 0)], -1.0, epsilon = 1e-12);
            assert!(f.christoffel[0][(0, 0)].abs() < 1e-12);
            assert!(f.cubic.max_abs() < 1e-12);
            let fbar = frame_from_jets(&star, &jet, BUDGET_ANALYTIC).unwrap();
            assert_relative_eq!(fbar.metric[(0, 0)], -1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn pairing_relations_hold_along_the_jets() {
        for t in [-0.8, 0.3] {
            let (jet, star) = hyperbola_pair(t);
            assert_relative_eq!(star.x.dot(&jet.x), -1.0, epsilon = 1e-13);
            assert!(star.x.dot(&jet.first[0]).abs() < 1e-13);
            assert!(jet.x.dot(&star.first[0]).abs() < 1e-13);
        }
    }

    fn calabi_pair(v: &[f64]) -> (ChartJet, ChartJet, f64) {
        let k = PseudoCone::calabi(1.0).unwrap();
        let gauge = k.gauge().unwrap().clone();
        let chart = GaugeChart::new(k.cone(), gauge.clone()).unwrap();
        let p = chart.coords_of(&dvector![v[0], v[1], v[2]]).unwrap();
        let jet = chart.jet(&p).unwrap();
        let star = star_jet(gauge.as_ref(), &jet).unwrap();
        (jet, star, gauge_budget(gauge.as_ref()))
    }

    #[test]
    fn metric_is_parallel_for_its_own_connection() {
        let (jet, star, budget) = calabi_pair(&[1.2, 0.8, 1.1]);
        let f = frame_from_jets(&jet, &star, budget).unwrap();
        let m = 2;
        for c in 0..m {
            for a in 0..m {
                for b in 0..m {
                    let mut v = f.metric_first[c][(a, b)];
                    for d in 0..m {
                        v -= f.christoffel[d][(c, a)] * f.metric_cross[(d, b)];
                        v -= f.christoffel[d][(c, b)] * f.metric_cross[(a, d)];
                    }
                    assert!(v.abs() < 1e-10, "covariant derivative of G: {v:.3e}");
                }
            }
        }
    }

    #[test]
    fn cubic_forms_are_opposite_on_the_calabi_surface() {
        let (jet, star, budget) = calabi_pair(&[1.0, 1.0, 1.0]);
        let f = frame_from_jets(&jet, &star, budget).unwrap();
        let fbar = frame_from_jets(&star, &jet, budget).unwrap();
        assert!(f.cubic.max_abs() > 1e-3, "the cubic form must not vanish here");
        for a in 0..2 {
            for b in a..2 {
                for c in b..2 {
                    let lhs = f.cubic.get(a, b, c);
                    let rhs = -fbar.cubic.get(a, b, c);
                    assert!((lhs - rhs).abs() < 1e-9, "A {lhs:.6e} vs -Abar {rhs:.6e}");
                }
            }
        }
    }

    #[test]
    fn frame_transforms_covariantly_under_reparameterization() {
        let k = PseudoCone::calabi(1.0).unwrap();
        let gauge = k.gauge().unwrap().clone();
        let chart = GaugeChart::new(k.cone(), gauge.clone()).unwrap();
        let doubled = Reparam {
            inner: GaugeChart::new(k.cone(), gauge.clone()).unwrap(),
            factor: 2.0,
        };
        let p = chart.coords_of(&dvector![1.3, 0.9, 1.0]).unwrap();
        let q: Vec<f64> = p.iter().map(|v| v / 2.0).collect();

        let jet = chart.jet(&p).unwrap();
        let star = star_jet(gauge.as_ref(), &jet).unwrap();
        let f = frame_from_jets(&jet, &star, BUDGET_ANALYTIC).unwrap();

        let jet2 = doubled.jet(&q).unwrap();
        let star2 = star_jet(gauge.as_ref(), &jet2).unwrap();
        let f2 = frame_from_jets(&jet2, &star2, BUDGET_ANALYTIC).unwrap();

        for a in 0..2 {
            for b in 0..2 {
                assert_relative_eq!(f2.metric[(a, b)], 4.0 * f.metric[(a, b)], epsilon = 1e-10);
            }
        }
        assert_relative_eq!(f2.cubic.get(0, 0, 0), 8.0 * f.cubic.get(0, 0, 0), epsilon = 1e-9);
    }

    #[test]
    fn tensor_audits_hold_on_the_analytic_families() {
        let k = PseudoCone::hyperbola(1.0).unwrap();
        let opts = AuditOptions { directions: 10, ..AuditOptions::default() };
        let chart = TensorChart::Exponential { c: 1.0, span: 1.0 };
        let g = audit_metric_agreement(&k, &chart, &opts).unwrap();
        assert!(g.holds(), "{}", g.status_line());
        let a = audit_cubic_skew(&k, &chart, &opts).unwrap();
        assert!(a.holds(), "{}", a.status_line());

        let cal = PseudoCone::calabi(1.0).unwrap();
        let radial = TensorChart::Radial { margin: 0.2 };
        let g = audit_metric_agreement(&cal, &radial, &opts).unwrap();
        assert!(g.holds(), "{}", g.status_line());
        let a = audit_cubic_skew(&cal, &radial, &opts).unwrap();
        assert!(a.holds(), "{}", a.status_line());
    }

    #[test]
    fn tensor_audits_hold_on_the_perturbed_branch() {
        let k = PseudoCone::perturbed_hyperbola(0.1).unwrap();
        let opts = AuditOptions { directions: 6, ..AuditOptions::default() };
        let chart = TensorChart::Radial { margin: 0.2 };
        let g = audit_metric_agreement(&k, &chart, &opts).unwrap();
        assert!(g.holds(), "{}", g.status_line());
        let a = audit_cubic_skew(&k, &chart, &opts).unwrap();
        assert!(a.holds(), "{}", a.status_line());
        assert!(a.note.as_deref().unwrap_or("").contains("max |A|"));
    }
}
