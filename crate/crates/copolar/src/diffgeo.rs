//! Boundary geometry of smooth pseudo-cones.
//!
//! The boundary of a smooth pseudo-cone is a hypersurface star-shaped with
//! respect to rays: along every interior direction `v` it carries the point
//! `rho(v) v`. Charts here parameterize that surface and expose second-order
//! jets; from the jets come the outer normal, its derivatives, the
//! Gauss-Kronecker curvature by two distinct routes, the centro-affine
//! distance
//!
//! ```text
//! rho_aff(x) = <x, N(x)> / kappa(x)^{1/(n+1)}   (negative by orientation),
//! ```
//!
//! and the boundary star map `x -> -grad q(x)` with `q = F^2 / 2`, which
//! sends the boundary of K onto the boundary of its copolar.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::cone::{hyperplane_cross, Cone, GnomonicChart};
use crate::constants::{
    default_tolerance, BUDGET_ANALYTIC, BUDGET_FD_CURVATURE, BUDGET_FD_PRODUCT,
    VALUE_NOISE_CLOSED_FORM,
};
use crate::error::{Error, Result};
use crate::numkit::{grad_fd, hess_fd, third_fd, StepPolicy, SymTensor3};
use crate::pseudocone::gauge::GaugeField;
use crate::pseudocone::{AuditOptions, PseudoCone};
use crate::report::{AuditBuilder, AuditReport};
use crate::sampling;

/// Angular margin used when sampling crucial pairs: star-map images of
/// margin-interior points must themselves stay deep enough inside the dual
/// footprint for finite differences of interpolated gauges.
const PAIR_MARGIN: f64 = 0.25;

/// Second-order jet of a boundary parameterization at one chart point.
#[derive(Debug, Clone)]
pub struct ChartJet {
    /// Boundary point X(p).
    pub x: DVector<f64>,
    /// Partial derivatives X_a.
    pub first: Vec<DVector<f64>>,
    /// Second partials X_ab, symmetric in (a, b).
    pub second: Vec<Vec<DVector<f64>>>,
}

/// A parameterized piece of a pseudo-cone boundary with two derivatives.
pub trait BoundaryChart {
    fn ambient_dim(&self) -> usize;

    fn chart_dim(&self) -> usize;

    fn jet(&self, p: &[f64]) -> Result<ChartJet>;

    /// Relative noise budget for quantities derived from the jets; route
    /// cross-checks reject disagreements beyond ten times this.
    fn budget(&self) -> f64;
}

pub(crate) fn gauge_budget(g: &dyn GaugeField) -> f64 {
    if g.has_jets() {
        BUDGET_ANALYTIC
    } else if g.value_noise() <= VALUE_NOISE_CLOSED_FORM {
        BUDGET_FD_CURVATURE
    } else {
        BUDGET_FD_PRODUCT
    }
}

/// The radial boundary chart of a gauge over a cone footprint: chart
/// coordinates pick the interior direction gnomonically, and the point is
/// `W(p) / F(W(p))` with `W` affine in `p`. Jets of the quotient come from
/// exact gauge derivatives when available, finite differences otherwise.
pub struct GaugeChart {
    gauge: Arc<dyn GaugeField>,
    chart: GnomonicChart,
}

impl GaugeChart {
    pub fn new(cone: &Cone, gauge: Arc<dyn GaugeField>) -> Result<GaugeChart> {
        if gauge.dim() != cone.dim() {
            return Err(Error::degenerate("gauge and cone dimensions disagree"));
        }
        let chart = cone.footprint_chart(0.0)?;
        Ok(GaugeChart { gauge, chart })
    }

    pub fn gauge(&self) -> &Arc<dyn GaugeField> {
        &self.gauge
    }

    pub fn chart(&self) -> &GnomonicChart {
        &self.chart
    }

    /// Chart coordinates of the ray through `x`, if it crosses the chart.
    pub fn coords_of(&self, x: &DVector<f64>) -> Option<Vec<f64>> {
        self.chart.coords(x).map(|(p, _)| p)
    }
}

impl BoundaryChart for GaugeChart {
    fn ambient_dim(&self) -> usize {
        self.chart.ambient_dim()
    }

    fn chart_dim(&self) -> usize {
        self.chart.chart_dim()
    }

    fn jet(&self, p: &[f64]) -> Result<ChartJet> {
        let m = self.chart.chart_dim();
        if p.len() != m {
            return Err(Error::degenerate("wrong chart coordinate count"));
        }
        let w = self.chart.point(p);
        let frame = self.chart.frame();
        let (phi, dphi, ddphi) = if self.gauge.has_jets() {
            let f = self.gauge.value(&w);
            let g = self
                .gauge
                .gradient(&w)
                .ok_or_else(|| Error::unsupported("gauge promised jets but has no gradient"))?;
            let h = self
                .gauge
                .hessian(&w)
                .ok_or_else(|| Error::unsupported("gauge promised jets but has no hessian"))?;
            let dphi = DVector::from_fn(m, |a, _| g.dot(&frame[a]));
            let ddphi = DMatrix::from_fn(m, m, |a, b| (&h * &frame[b]).dot(&frame[a]));
            (f, dphi, ddphi)
        } else {
            let pv = DVector::from_column_slice(p);
            let func = |q: &DVector<f64>| self.gauge.value(&self.chart.point(q.as_slice()));
            let noise = self.gauge.value_noise();
            let dphi = grad_fd(&func, &pv, &StepPolicy::for_noise(1, noise))?;
            let ddphi = hess_fd(&func, &pv, &StepPolicy::for_noise(2, noise))?;
            (func(&pv), dphi, ddphi)
        };
        if !(phi.is_finite() && phi > 0.0) {
            return Err(Error::NonFinite { point: w.as_slice().to_vec() });
        }

        // X = psi W with psi = 1/phi; W is affine in p, so W_ab = 0.
        let psi = 1.0 / phi;
        let dpsi: Vec<f64> = (0..m).map(|a| -dphi[a] * psi * psi).collect();
        let x = &w * psi;
        let first: Vec<DVector<f64>> =
            (0..m).map(|a| &w * dpsi[a] + &frame[a] * psi).collect();
        let mut second = vec![vec![DVector::zeros(self.chart.ambient_dim()); m]; m];
        for a in 0..m {
            for b in a..m {
                let ddpsi =
                    -ddphi[(a, b)] * psi * psi + 2.0 * dphi[a] * dphi[b] * psi * psi * psi;
                let v = &w * ddpsi + &frame[a] * dpsi[b] + &frame[b] * dpsi[a];
                second[a][b] = v.clone();
                second[b][a] = v;
            }
        }
        Ok(ChartJet { x, first, second })
    }

    fn budget(&self) -> f64 {
        gauge_budget(self.gauge.as_ref())
    }
}

/// Exponential chart of the planar hyperbola branch `x y = c`:
/// `X(t) = sqrt(c) (e^t, e^-t)`. Everything is analytic, which makes this
/// the reference chart for oracle tests and for the flat centro-affine
/// structure of the branch.
pub struct HyperbolaExp {
    c: f64,
}

impl HyperbolaExp {
    pub fn new(c: f64) -> Result<HyperbolaExp> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidFamily("hyperbola level must be positive".into()));
        }
        Ok(HyperbolaExp { c })
    }
}

impl BoundaryChart for HyperbolaExp {
    fn ambient_dim(&self) -> usize {
        2
    }

    fn chart_dim(&self) -> usize {
        1
    }

    fn jet(&self, p: &[f64]) -> Result<ChartJet> {
        if p.len() != 1 {
            return Err(Error::degenerate("wrong chart coordinate count"));
        }
        let s = self.c.sqrt();
        let (ep, en) = (p[0].exp(), (-p[0]).exp());
        let x = DVector::from_column_slice(&[s * ep, s * en]);
        let dx = DVector::from_column_slice(&[s * ep, -s * en]);
        Ok(ChartJet { x: x.clone(), first: vec![dx], second: vec![vec![x]] })
    }

    fn budget(&self) -> f64 {
        BUDGET_ANALYTIC
    }
}

/// Uniform reparameterization `p -> factor p` of another chart; jets follow
/// the chain rule. Geometric quantities computed downstream must not notice.
pub struct Reparam<C: BoundaryChart> {
    pub inner: C,
    pub factor: f64,
}

impl<C: BoundaryChart> BoundaryChart for Reparam<C> {
    fn ambient_dim(&self) -> usize {
        self.inner.ambient_dim()
    }

    fn chart_dim(&self) -> usize {
        self.inner.chart_dim()
    }

    fn jet(&self, p: &[f64]) -> Result<ChartJet> {
        let q: Vec<f64> = p.iter().map(|v| v * self.factor).collect();
        let mut jet = self.inner.jet(&q)?;
        for d in &mut jet.first {
            *d *= self.factor;
        }
        for row in &mut jet.second {
            for d in row {
                *d *= self.factor * self.factor;
            }
        }
        Ok(jet)
    }

    fn budget(&self) -> f64 {
        self.inner.budget()
    }
}

/// Ambient jets of the scale-quadratic potential `q = F^2 / 2` of a gauge.
/// For 1-homogeneous F these satisfy `grad q = F grad F` and Euler's
/// relation `<grad q, x> = F^2`.
pub struct AmbientJets {
    /// Gauge value F(x).
    pub value: f64,
    pub grad: DVector<f64>,
    pub hess: Option<DMatrix<f64>>,
    pub third: Option<SymTensor3>,
}

pub fn ambient_jets(gauge: &dyn GaugeField, x: &DVector<f64>, order: usize) -> Result<AmbientJets> {
    if !(1..=3).contains(&order) {
        return Err(Error::degenerate("jet order must be 1, 2 or 3"));
    }
    let f = gauge.value(x);
    if !(f.is_finite() && f > 0.0) {
        return Err(Error::NonFinite { point: x.as_slice().to_vec() });
    }
    if gauge.has_jets() {
        let n = x.len();
        let g = gauge
            .gradient(x)
            .ok_or_else(|| Error::unsupported("gauge promised jets but has no gradient"))?;
        let grad = &g * f;
        let mut hess = None;
        let mut third = None;
        if order >= 2 {
            let h = gauge
                .hessian(x)
                .ok_or_else(|| Error::unsupported("gauge promised jets but has no hessian"))?;
            hess = Some(&g * g.transpose() + &h * f);
            if order >= 3 {
                let t = gauge.third(x).ok_or_else(|| {
                    Error::unsupported("gauge promised jets but has no third derivatives")
                })?;
                let mut tq = SymTensor3::zeros(n);
                for i in 0..n {
                    for j in i..n {
                        for k in j..n {
                            let v = f * t.get(i, j, k)
                                + g[i] * h[(j, k)]
                                + g[j] * h[(i, k)]
                                + g[k] * h[(i, j)];
                            tq.set_sym(i, j, k, v);
                        }
                    }
                }
                third = Some(tq);
            }
        }
        return Ok(AmbientJets { value: f, grad, hess, third });
    }
    let q = |y: &DVector<f64>| {
        let v = gauge.value(y);
        0.5 * v * v
    };
    let noise = gauge.value_noise();
    let grad = grad_fd(&q, x, &StepPolicy::for_noise(1, noise))?;
    let hess = if order >= 2 {
        Some(hess_fd(&q, x, &StepPolicy::for_noise(2, noise))?)
    } else {
        None
    };
    let third = if order >= 3 {
        Some(third_fd(&q, x, &StepPolicy::for_noise(3, noise))?)
    } else {
        None
    };
    Ok(AmbientJets { value: f, grad, hess, third })
}

/// Jet of the starred parameterization `X* = -grad q (X)` in the same chart
/// coordinates, from the chart jet of X and ambient jets of the gauge.
pub fn star_jet(gauge: &dyn GaugeField, jet: &ChartJet) -> Result<ChartJet> {
    let aj = ambient_jets(gauge, &jet.x, 3)?;
    let hess = aj.hess.as_ref().expect("order 3 jets carry a hessian");
    let third = aj.third.as_ref().expect("order 3 jets carry third derivatives");
    let m = jet.first.len();
    let x = -&aj.grad;
    let first: Vec<DVector<f64>> = jet.first.iter().map(|xa| -(hess * xa)).collect();
    let mut second = vec![vec![DVector::zeros(jet.x.len()); m]; m];
    for a in 0..m {
        for b in a..m {
            let v = -(third.apply2(&jet.first[a], &jet.first[b]) + hess * &jet.second[a][b]);
            second[a][b] = v.clone();
            second[b][a] = v;
        }
    }
    Ok(ChartJet { x, first, second })
}

/// Pointwise boundary geometry: outer normal and its derivatives, metric,
/// second fundamental form, Gauss-Kronecker curvature by both routes, and
/// the centro-affine distance.
#[derive(Debug, Clone)]
pub struct CurvatureSample {
    pub p: Vec<f64>,
    pub x: DVector<f64>,
    /// Unit normal with `<N, X> < 0` (the origin side).
    pub normal: DVector<f64>,
    pub normal_first: Vec<DVector<f64>>,
    pub metric: DMatrix<f64>,
    pub second_form: DMatrix<f64>,
    /// Curvature from the fundamental forms, `|det b| / det g`.
    pub kappa_ff: f64,
    /// Curvature from the normal/tangent determinant ratio.
    pub kappa_det: f64,
    /// Centro-affine distance from the fundamental-form curvature.
    pub rho_aff: f64,
}

impl CurvatureSample {
    /// Primary curvature value (the fundamental-form route).
    pub fn kappa(&self) -> f64 {
        self.kappa_ff
    }

    /// Centro-affine distance recomputed from a given curvature value, used
    /// to push the determinant route through the same formula.
    pub fn rho_aff_from(&self, kappa: f64) -> f64 {
        let n = self.x.len() as f64;
        self.x.dot(&self.normal) / kappa.powf(1.0 / (n + 1.0))
    }
}

fn negative_definite(b: &DMatrix<f64>) -> bool {
    let m = b.nrows();
    for k in 1..=m {
        let minor = b.view((0, 0), (k, k)).clone_owned().determinant();
        let sign = if k % 2 == 1 { -1.0 } else { 1.0 };
        if !(sign * minor > 0.0) {
            return false;
        }
    }
    true
}

pub fn curvature_sample(chart: &dyn BoundaryChart, p: &[f64]) -> Result<CurvatureSample> {
    let jet = chart.jet(p)?;
    curvature_from_jet(&jet, p, chart.budget())
}

/// Curvature data from an explicit jet. The two curvature routes must agree
/// within ten times `budget`, otherwise the sample is rejected outright.
pub fn curvature_from_jet(jet: &ChartJet, p: &[f64], budget: f64) -> Result<CurvatureSample> {
    let n = jet.x.len();
    let m = jet.first.len();
    if m + 1 != n {
        return Err(Error::degenerate("jet is not a hypersurface jet"));
    }

    let refs: Vec<&DVector<f64>> = jet.first.iter().collect();
    let w = hyperplane_cross(&refs, n);
    let wn = w.norm();
    if wn < 1e-12 {
        return Err(Error::RankDeficient);
    }
    let pairing = w.dot(&jet.x) / wn;
    if pairing.abs() < 1e-12 {
        return Err(Error::degenerate("normal is orthogonal to the position vector"));
    }
    let sigma = if pairing < 0.0 { 1.0 } else { -1.0 };
    let normal = &w * (sigma / wn);

    // The raw cross product is multilinear in the tangents, so its chart
    // derivative replaces one slot at a time by a second derivative; the
    // unit normal's derivative is the tangential projection.
    let mut normal_first = Vec::with_capacity(m);
    for b in 0..m {
        let mut wb = DVector::zeros(n);
        for a in 0..m {
            let mut slots: Vec<&DVector<f64>> = jet.first.iter().collect();
            slots[a] = &jet.second[a][b];
            wb += hyperplane_cross(&slots, n);
        }
        let swb = wb * sigma;
        let tangential = &swb - &normal * normal.dot(&swb);
        normal_first.push(tangential / wn);
    }

    let metric = DMatrix::from_fn(m, m, |a, b| jet.first[a].dot(&jet.first[b]));
    let det_g = metric.determinant();
    if !(det_g > 1e-18) {
        return Err(Error::RankDeficient);
    }
    let second_form = DMatrix::from_fn(m, m, |a, b| normal.dot(&jet.second[a][b]));
    if !negative_definite(&second_form) {
        return Err(Error::degenerate(
            "second fundamental form is not negative definite toward the outer normal",
        ));
    }
    let kappa_ff = second_form.determinant().abs() / det_g;

    let mut m1 = DMatrix::zeros(n, n);
    let mut m2 = DMatrix::zeros(n, n);
    m1.set_column(0, &normal);
    m2.set_column(0, &normal);
    for a in 0..m {
        m1.set_column(a + 1, &normal_first[a]);
        m2.set_column(a + 1, &jet.first[a]);
    }
    let det2 = m2.determinant();
    if det2.abs() < 1e-15 {
        return Err(Error::RankDeficient);
    }
    let kappa_det = (m1.determinant() / det2).abs();

    let rel = (kappa_ff - kappa_det).abs() / kappa_ff.max(f64::MIN_POSITIVE);
    if rel > 10.0 * budget {
        return Err(Error::NoiseBudgetExceeded {
            what: "curvature routes (fundamental form vs normal determinant)".into(),
            got: rel,
            budget: 10.0 * budget,
        });
    }

    let rho_aff = jet.x.dot(&normal) / kappa_ff.powf(1.0 / (n as f64 + 1.0));
    Ok(CurvatureSample {
        p: p.to_vec(),
        x: jet.x.clone(),
        normal,
        normal_first,
        metric,
        second_form,
        kappa_ff,
        kappa_det,
        rho_aff,
    })
}

/// The boundary star map `x -> -grad q(x)`, defined on gauge-1 points. It
/// carries the boundary of K onto the boundary of the copolar and is its own
/// inverse across the pair.
pub fn crucial_map(gauge: &dyn GaugeField, x: &DVector<f64>) -> Result<DVector<f64>> {
    let f = gauge.value(x);
    if !f.is_finite() || (f - 1.0).abs() > 1e-6 {
        return Err(Error::NotOnBoundary { gauge: f });
    }
    Ok(-ambient_jets(gauge, x, 1)?.grad)
}

/// Hessian form of the star map, `-hess q(x) x`; 1-homogeneity of the gauge
/// makes it agree with the gradient form on the boundary.
pub fn crucial_map_hessian(gauge: &dyn GaugeField, x: &DVector<f64>) -> Result<DVector<f64>> {
    let f = gauge.value(x);
    if !f.is_finite() || (f - 1.0).abs() > 1e-6 {
        return Err(Error::NotOnBoundary { gauge: f });
    }
    let aj = ambient_jets(gauge, x, 2)?;
    Ok(-(aj.hess.expect("order 2 jets carry a hessian") * x))
}

/// One sample row of curvature data, as written to the CSV output.
#[derive(Debug, Clone)]
pub struct CurvatureRow {
    pub family: String,
    pub chart: Vec<f64>,
    pub x: Vec<f64>,
    pub kappa: f64,
    pub rho_aff: f64,
    pub pair_product: Option<f64>,
}

/// The copolar gauge must be 1 on star-map images of boundary points (audit
/// id `eq3_2`): the star map of K lands on the boundary of K*.
pub fn audit_gauge_composition(
    k: &PseudoCone,
    kstar: &PseudoCone,
    opts: &AuditOptions,
) -> Result<AuditReport> {
    let gauge = k
        .gauge()
        .ok_or_else(|| Error::unsupported("gauge composition needs a smooth pseudo-cone"))?;
    let tol = default_tolerance("eq3_2", k.has_analytic_jets()) * opts.tol_scale;
    let mut b = AuditBuilder::new("eq3_2", k.label(), tol)
        .with_note("copolar gauge evaluated on star-map images of boundary points");
    let dirs = sampling::interior_directions(k.cone(), opts.margin, opts.directions)?;
    for v in &dirs {
        let x = k.boundary_point(v)?;
        let xs = crucial_map(gauge.as_ref(), &x)?;
        b.record(x.as_slice(), kstar.gauge_value(&xs), 1.0);
    }
    Ok(b.finish())
}

/// Which representation of the copolar gauge the product audit drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProductRoute {
    /// The attached closed-form copolar gauge (analytic jets).
    AnalyticStar,
    /// The interpolated gauge of the numerically built copolar (finite
    /// differences).
    NumericStar,
}

/// Product of centro-affine distances across a crucial pair is 1 (audit id
/// `eq4_1`): for `x` on the boundary of K and `x* = -grad q(x)`,
/// `rho_aff(x) rho_aff*(x*) = 1`. The K side uses the fundamental-form
/// curvature, the K* side the determinant route on the copolar's own chart,
/// so the identity crosses both curvature formulas and both bodies.
pub fn audit_product_identity(
    k: &PseudoCone,
    kstar: &PseudoCone,
    route: ProductRoute,
    opts: &AuditOptions,
) -> Result<(AuditReport, Vec<CurvatureRow>)> {
    let gauge = k
        .gauge()
        .ok_or_else(|| Error::unsupported("the product audit needs a smooth pseudo-cone"))?;
    let star_gauge: Arc<dyn GaugeField> = match route {
        ProductRoute::AnalyticStar => k
            .dual_gauge()
            .cloned()
            .ok_or_else(|| Error::unsupported("no closed-form copolar gauge attached"))?,
        ProductRoute::NumericStar => kstar
            .gauge()
            .cloned()
            .ok_or_else(|| Error::unsupported("the copolar carries no gauge"))?,
    };
    let (key, arm, note) = match route {
        ProductRoute::AnalyticStar => {
            ("eq4_1", true, "copolar curvature through the closed-form gauge")
        }
        ProductRoute::NumericStar if k.has_analytic_jets() => (
            "eq4_1_mixed",
            true,
            "copolar curvature through the interpolated gauge (finite differences)",
        ),
        ProductRoute::NumericStar => (
            "eq4_1",
            false,
            "both curvatures through finite differences",
        ),
    };
    let tol = default_tolerance(key, arm) * opts.tol_scale;
    let mut b = AuditBuilder::new("eq4_1", k.label(), tol).with_note(note);

    let k_chart = GaugeChart::new(k.cone(), gauge.clone())?;
    let star_chart = GaugeChart::new(kstar.cone(), star_gauge)?;
    let dirs =
        sampling::interior_directions(k.cone(), opts.margin.max(PAIR_MARGIN), opts.directions)?;
    let mut rows = Vec::with_capacity(2 * dirs.len());
    for v in &dirs {
        let p = k_chart.coords_of(v).ok_or(Error::OutsideCone)?;
        let ks = curvature_sample(&k_chart, &p)?;
        let xs = crucial_map(gauge.as_ref(), &ks.x)?;
        let ps = star_chart.coords_of(&xs).ok_or(Error::OutsideCone)?;
        let ss = curvature_sample(&star_chart, &ps)?;
        let rho_star = ss.rho_aff_from(ss.kappa_det);
        let product = ks.rho_aff * rho_star;
        b.record(ks.x.as_slice(), product, 1.0);
        rows.push(CurvatureRow {
            family: k.label().to_string(),
            chart: p,
            x: ks.x.as_slice().to_vec(),
            kappa: ks.kappa_ff,
            rho_aff: ks.rho_aff,
            pair_product: Some(product),
        });
        rows.push(CurvatureRow {
            family: kstar.label().to_string(),
            chart: ps,
            x: ss.x.as_slice().to_vec(),
            kappa: ss.kappa_det,
            rho_aff: rho_star,
            pair_product: Some(product),
        });
    }
    Ok((b.finish(), rows))
}

/// Constancy of the centro-affine distance (audit id `affine_sphere`): both
/// K and its copolar are sampled on their own footprints and each sample's
/// distance is compared against the side's mean. Hyperbolic affine spheres
/// pass; perturbed families are expected to fail, which is the audit's
/// point.
pub fn audit_affine_sphere(
    k: &PseudoCone,
    kstar: &PseudoCone,
    opts: &AuditOptions,
) -> Result<(Vec<AuditReport>, Vec<CurvatureRow>)> {
    let tol = default_tolerance("affine_sphere", true) * opts.tol_scale;
    let mut reports = Vec::with_capacity(2);
    let mut rows = Vec::new();
    for (side, margin) in [(k, opts.margin), (kstar, opts.margin.max(PAIR_MARGIN))] {
        let gauge = side
            .gauge()
            .ok_or_else(|| Error::unsupported("the affine-sphere audit needs a smooth gauge"))?
            .clone();
        let chart = GaugeChart::new(side.cone(), gauge)?;
        let dirs = sampling::interior_directions(side.cone(), margin, opts.directions)?;
        let mut samples = Vec::with_capacity(dirs.len());
        for v in &dirs {
            let p = chart.coords_of(v).ok_or(Error::OutsideCone)?;
            samples.push(curvature_sample(&chart, &p)?);
        }
        let mean = samples.iter().map(|s| s.rho_aff).sum::<f64>() / samples.len() as f64;
        let mut b = AuditBuilder::new("affine_sphere", side.label(), tol)
            .with_note(format!("mean centro-affine distance {mean:.9}"));
        for s in &samples {
            b.record(s.x.as_slice(), s.rho_aff / mean, 1.0);
            rows.push(CurvatureRow {
                family: side.label().to_string(),
                chart: s.p.clone(),
                x: s.x.as_slice().to_vec(),
                kappa: s.kappa_ff,
                rho_aff: s.rho_aff,
                pair_product: None,
            });
        }
        reports.push(b.finish());
    }
    Ok((reports, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pseudocone::gauge::{PerturbedGauge, ProductGauge};
    use approx::assert_relative_eq;
    use nalgebra::dvector;

    fn hyperbola_chart() -> GaugeChart {
        let cone = Cone::orthant(2).unwrap();
        GaugeChart::new(&cone, Arc::new(ProductGauge::new(2, 1.0))).unwrap()
    }

    #[test]
    fn hyperbola_vertex_sample_matches_frozen_values() {
        let chart = hyperbola_chart();
        let p = chart.coords_of(&dvector![1.0, 1.0]).unwrap();
        let s = curvature_sample(&chart, &p).unwrap();
        assert!((&s.x - dvector![1.0, 1.0]).norm() < 1e-12);
        assert!((&s.normal - dvector![-1.0, -1.0].normalize()).norm() < 1e-12);
        assert_relative_eq!(s.kappa_ff, 0.5f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(s.kappa_det, s.kappa_ff, epsilon = 1e-10);
        assert_relative_eq!(s.rho_aff, -(2.0f64.powf(2.0 / 3.0)), epsilon = 1e-12);
    }

    #[test]
    fn exponential_chart_matches_the_plane_curve_oracle() {
        let exp = HyperbolaExp::new(1.0).unwrap();
        for t in [-0.9, 0.0, 0.7] {
            let s = curvature_sample(&exp, &[t]).unwrap();
            let oracle = 2.0 / ((2.0 * t).exp() + (-2.0 * t).exp()).powf(1.5);
            assert_relative_eq!(s.kappa_ff, oracle, epsilon = 1e-12);
            // Same point through the radial gauge chart.
            let chart = hyperbola_chart();
            let p = chart.coords_of(&s.x).unwrap();
            let via_gauge = curvature_sample(&chart, &p).unwrap();
            assert_relative_eq!(via_gauge.kappa_ff, oracle, epsilon = 1e-12);
            assert_relative_eq!(via_gauge.rho_aff, s.rho_aff, epsilon = 1e-12);
        }
    }

    #[test]
    fn calabi_vertex_sample_matches_frozen_values() {
        let cone = Cone::orthant(3).unwrap();
        let chart = GaugeChart::new(&cone, Arc::new(ProductGauge::new(3, 1.0))).unwrap();
        let p = chart.coords_of(&dvector![1.0, 1.0, 1.0]).unwrap();
        let s = curvature_sample(&chart, &p).unwrap();
        assert_relative_eq!(s.kappa_ff, 1.0 / 3.0, epsilon = 1e-11);
        assert_relative_eq!(s.rho_aff, -(3.0f64.powf(0.75)), epsilon = 1e-11);
    }

    #[test]
    fn reparameterization_leaves_geometry_alone() {
        let exp = HyperbolaExp::new(1.0).unwrap();
        let half = Reparam { inner: HyperbolaExp::new(1.0).unwrap(), factor: 2.0 };
        let a = curvature_sample(&exp, &[0.8]).unwrap();
        let b = curvature_sample(&half, &[0.4]).unwrap();
        assert_relative_eq!(a.kappa_ff, b.kappa_ff, epsilon = 1e-12);
        assert_relative_eq!(a.rho_aff, b.rho_aff, epsilon = 1e-12);
    }

    #[test]
    fn star_map_frozen_values_and_pairing() {
        let g = ProductGauge::new(2, 1.0);
        let xs = crucial_map(&g, &dvector![1.0, 1.0]).unwrap();
        assert!((&xs - dvector![-0.5, -0.5]).norm() < 1e-13);
        let xs2 = crucial_map(&g, &dvector![2.0, 0.5]).unwrap();
        assert!((&xs2 - dvector![-0.25, -1.0]).norm() < 1e-13);
        assert_relative_eq!(dvector![2.0, 0.5].dot(&xs2), -1.0, epsilon = 1e-13);

        let g3 = ProductGauge::new(3, 1.0);
        let xs3 = crucial_map(&g3, &dvector![1.0, 1.0, 1.0]).unwrap();
        let third = dvector![-1.0, -1.0, -1.0] / 3.0;
        assert!((&xs3 - third).norm() < 1e-13);
    }

    #[test]
    fn star_map_rejects_off_boundary_points() {
        let g = ProductGauge::new(2, 1.0);
        assert!(matches!(
            crucial_map(&g, &dvector![2.0, 2.0]),
            Err(Error::NotOnBoundary { .. })
        ));
    }

    #[test]
    fn hessian_form_of_the_star_map_agrees_with_the_gradient_form() {
        let g = ProductGauge::new(2, 1.0);
        let x = dvector![1.7, 1.0 / 1.7];
        let a = crucial_map(&g, &x).unwrap();
        let b = crucial_map_hessian(&g, &x).unwrap();
        assert!((a - b).norm() < 1e-12);

        // Value-only gauge: both forms through finite differences.
        let pg = PerturbedGauge::new(0.1);
        let x0 = 1.3;
        let y0 = 1.0 / x0 + 0.1 / (x0 * x0 * x0);
        let xp = dvector![x0, y0];
        let a = crucial_map(&pg, &xp).unwrap();
        let b = crucial_map_hessian(&pg, &xp).unwrap();
        assert!((a - b).norm() < 1e-5);
    }

    #[test]
    fn star_map_round_trips_through_the_attached_copolar_gauge() {
        for k in [PseudoCone::hyperbola(1.0).unwrap(), PseudoCone::calabi(0.7).unwrap()] {
            let g = k.gauge().unwrap();
            let dg = k.dual_gauge().unwrap();
            let dirs = sampling::interior_directions(k.cone(), 0.2, 7).unwrap();
            for v in &dirs {
                let x = k.boundary_point(v).unwrap();
                let xs = crucial_map(g.as_ref(), &x).unwrap();
                let back = crucial_map(dg.as_ref(), &xs).unwrap();
                assert!((&back - &x).norm() < 1e-9, "roundtrip drift {:.3e}", (back - &x).norm());
            }
        }
    }

    #[test]
    fn star_map_round_trips_through_the_interpolated_copolar() {
        let k = PseudoCone::perturbed_hyperbola(0.5).unwrap();
        let kstar = k.copolar().unwrap();
        let sg = kstar.gauge().unwrap();
        let g = k.gauge().unwrap();
        let dirs = sampling::interior_directions(k.cone(), PAIR_MARGIN, 5).unwrap();
        for v in &dirs {
            let x = k.boundary_point(v).unwrap();
            let xs = crucial_map(g.as_ref(), &x).unwrap();
            let back = crucial_map(sg.as_ref(), &xs).unwrap();
            assert!((&back - &x).norm() < 1e-7, "roundtrip drift {:.3e}", (back - &x).norm());
        }
    }

    #[test]
    fn normal_and_position_swap_across_the_pair() {
        let k = PseudoCone::hyperbola(1.0).unwrap();
        let g = k.gauge().unwrap();
        let k_chart = GaugeChart::new(k.cone(), g.clone()).unwrap();
        let star_chart =
            GaugeChart::new(k.dual_cone(), k.dual_gauge().unwrap().clone()).unwrap();
        for v in [dvector![1.0, 1.0], dvector![1.4, 0.6], dvector![0.55, 1.2]] {
            let p = k_chart.coords_of(&v).unwrap();
            let s = curvature_sample(&k_chart, &p).unwrap();
            let xs = crucial_map(g.as_ref(), &s.x).unwrap();
            let ps = star_chart.coords_of(&xs).unwrap();
            let ss = curvature_sample(&star_chart, &ps).unwrap();
            // The copolar's normal is the primal position direction, and the
            // starred point is the scaled primal normal.
            assert!((&ss.normal - &s.x / s.x.norm()).norm() < 1e-9);
            assert!((&xs - &s.normal / (-s.x.dot(&s.normal))).norm() < 1e-9);
            assert_relative_eq!(s.x.norm(), 1.0 / (-ss.x.dot(&ss.normal)), epsilon = 1e-9);
        }
    }

    #[test]
    fn determinant_identity_across_the_pair() {
        // |det(N*, N*_a)| = |X|^{-n} (-<X, N>) |det(N, X_a)|; taking absolute
        // values makes the statement chart-orientation free.
        for (k, dirs) in [
            (PseudoCone::hyperbola(1.0).unwrap(), vec![dvector![1.0, 1.0], dvector![1.5, 0.5]]),
            (
                PseudoCone::calabi(1.0).unwrap(),
                vec![dvector![1.0, 1.0, 1.0], dvector![1.2, 0.8, 1.1]],
            ),
        ] {
            let n = k.dim();
            let g = k.gauge().unwrap();
            let k_chart = GaugeChart::new(k.cone(), g.clone()).unwrap();
            let star_chart =
                GaugeChart::new(k.dual_cone(), k.dual_gauge().unwrap().clone()).unwrap();
            let det_of = |normal: &DVector<f64>, cols: &[DVector<f64>]| {
                let mut m = DMatrix::zeros(n, n);
                m.set_column(0, normal);
                for (i, c) in cols.iter().enumerate() {
                    m.set_column(i + 1, c);
                }
                m.determinant()
            };
            for v in &dirs {
                let p = k_chart.coords_of(v).unwrap();
                let jet = k_chart.jet(&p).unwrap();
                let s = curvature_from_jet(&jet, &p, k_chart.budget()).unwrap();
                // Starred parameterization in the same chart coordinates.
                let sjet = star_jet(g.as_ref(), &jet).unwrap();
                let ss = curvature_from_jet(&sjet, &p, BUDGET_ANALYTIC).unwrap();
                let lhs = det_of(&ss.normal, &ss.normal_first).abs();
                let scale = s.x.norm().powi(-(n as i32)) * (-s.x.dot(&s.normal));
                let rhs = scale * det_of(&s.normal, &jet.first).abs();
                assert_relative_eq!(lhs, rhs, max_relative = 1e-9);
                // Consistency of the two surfaces: the star jet's point must
                // land on the copolar chart.
                let ps = star_chart.coords_of(&sjet.x).unwrap();
                let direct = curvature_sample(&star_chart, &ps).unwrap();
                assert_relative_eq!(direct.kappa_ff, ss.kappa_ff, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn gauge_composition_audit_holds_on_the_hyperbola() {
        let k = PseudoCone::hyperbola(1.0).unwrap();
        let kstar = k.copolar().unwrap();
        let opts = AuditOptions { directions: 25, ..AuditOptions::default() };
        let r = audit_gauge_composition(&k, &kstar, &opts).unwrap();
        assert!(r.holds(), "{}", r.status_line());
    }

    #[test]
    fn product_audit_holds_on_both_routes() {
        let k = PseudoCone::hyperbola(1.0).unwrap();
        let kstar = k.copolar().unwrap();
        let opts = AuditOptions { directions: 12, ..AuditOptions::default() };
        let (analytic, rows) =
            audit_product_identity(&k, &kstar, ProductRoute::AnalyticStar, &opts).unwrap();
        assert!(analytic.holds(), "{}", analytic.status_line());
        assert_eq!(rows.len(), 2 * analytic.samples);
        let (numeric, _) =
            audit_product_identity(&k, &kstar, ProductRoute::NumericStar, &opts).unwrap();
        assert!(numeric.holds(), "{}", numeric.status_line());
    }

    #[test]
    fn affine_sphere_audit_separates_the_families() {
        let k = PseudoCone::hyperbola(1.0).unwrap();
        let kstar = k.copolar().unwrap();
        let opts = AuditOptions { directions: 15, ..AuditOptions::default() };
        let (reports, rows) = audit_affine_sphere(&k, &kstar, &opts).unwrap();
        assert!(reports.iter().all(|r| r.holds()));
        assert!(rows.iter().all(|r| r.pair_product.is_none()));

        let p = PseudoCone::perturbed_hyperbola(0.5).unwrap();
        let pstar = p.copolar().unwrap();
        let (reports, _) = audit_affine_sphere(&p, &pstar, &opts).unwrap();
        assert!(!reports[0].holds(), "perturbed branch is not an affine sphere");
        assert!(reports[0].max_abs_error > 1e-2);
    }
}
