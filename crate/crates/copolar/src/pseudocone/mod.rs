//! Pseudo-cones and copolarity.
//!
//! A pseudo-cone is a nonempty closed convex set K avoiding the origin with
//! `t K` inside `K` for every `t >= 1`; here its recession cone C is always
//! pointed with interior. The copolar is
//!
//! ```text
//! K* = { u : <u, x> <= -1 for all x in K },
//! ```
//!
//! a pseudo-cone over the dual cone, and copolarity is an involution. Smooth
//! examples carry a 1-homogeneous gauge F with `K = {F >= 1}`; their
//! copolars are built numerically by caching the support function over the
//! dual footprint. The truncated/shifted pair dualizes in closed form.

pub mod cache;
pub mod classzero;
pub mod gauge;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::cone::Cone;
use crate::constants::{
    default_tolerance, DEFAULT_DIRECTIONS, DEFAULT_RESTARTS, GRID_MARGIN, SUP_MARGIN, SUP_TOL,
};
use crate::error::{Error, Result};
use crate::numkit::{maximize_on_cap_coords, CapDomain, StepPolicy};
use crate::report::{AuditBuilder, AuditReport};
use crate::sampling;

use cache::{CacheGauge, LiveSupportGauge, SupportCache};
use classzero::ClassZeroSet;
use gauge::{GaugeField, LinearImageGauge, PerturbedGauge, ProductGauge};

#[derive(Clone)]
pub enum Repr {
    /// Smooth pseudo-cone described by its gauge.
    Gauge(Arc<dyn GaugeField>),
    /// Truncated or shifted cone with closed-form duality.
    ClassZero(ClassZeroSet),
}

#[derive(Clone)]
pub struct PseudoCone {
    label: String,
    cone: Cone,
    dual_cone: Cone,
    repr: Repr,
    /// Closed-form gauge of the copolar, when known. Never consulted by the
    /// forced numeric routes; used as cache fallback/cross-check and by the
    /// fast support path.
    dual_gauge: Option<Arc<dyn GaugeField>>,
    /// Worst cache-node deviation against the cross-check gauge, recorded
    /// when this pseudo-cone was produced by [`PseudoCone::copolar`].
    build_deviation: Option<f64>,
}

impl PseudoCone {
    /// Hyperbola-type pseudo-cone `{x y >= c}` in the positive quadrant.
    pub fn hyperbola(c: f64) -> Result<Self> {
        product_family("hyperbola", 2, c)
    }

    /// The product hypersurface pseudo-cone `{x y z >= c}` in the positive
    /// octant.
    pub fn calabi(c: f64) -> Result<Self> {
        product_family("calabi", 3, c)
    }

    /// Hyperbola branch perturbed to `y = 1/x + delta/x^3`: smooth, convex,
    /// same recession cone, but no exact derivatives and (for positive
    /// delta) no quadric structure.
    pub fn perturbed_hyperbola(delta: f64) -> Result<Self> {
        if !(0.0..=2.0).contains(&delta) {
            return Err(Error::InvalidFamily(
                "perturbation strength must lie in [0, 2]".into(),
            ));
        }
        let cone = Cone::orthant(2)?;
        PseudoCone::from_gauge(
            format!("perturbed_hyperbola(delta={delta})"),
            cone,
            Arc::new(PerturbedGauge::new(delta)),
            None,
        )
    }

    /// `{x in C : <w, x> >= level}`. With no functional given, the cone's
    /// deep interior direction is used.
    pub fn truncated_cone(cone: Cone, w: Option<DVector<f64>>, level: f64) -> Result<Self> {
        let dual_cone = cone.dual();
        let w = w.unwrap_or_else(|| -dual_cone.axis_direction());
        let set = ClassZeroSet::Truncated { w, level };
        set.validate(&cone)?;
        Ok(PseudoCone {
            label: format!("truncated_cone(level={level})"),
            cone,
            dual_cone,
            repr: Repr::ClassZero(set),
            dual_gauge: None,
            build_deviation: None,
        })
    }

    /// `apex + C` with the apex interior to C.
    pub fn shifted_cone(cone: Cone, apex: DVector<f64>) -> Result<Self> {
        let set = ClassZeroSet::Shifted { apex };
        set.validate(&cone)?;
        let dual_cone = cone.dual();
        Ok(PseudoCone {
            label: "shifted_cone".into(),
            cone,
            dual_cone,
            repr: Repr::ClassZero(set),
            dual_gauge: None,
            build_deviation: None,
        })
    }

    /// Wrap an arbitrary gauge field as a pseudo-cone over `cone`.
    pub fn from_gauge(
        label: impl Into<String>,
        cone: Cone,
        gauge: Arc<dyn GaugeField>,
        dual_gauge: Option<Arc<dyn GaugeField>>,
    ) -> Result<Self> {
        if gauge.dim() != cone.dim() {
            return Err(Error::InvalidFamily(
                "gauge and cone dimensions disagree".into(),
            ));
        }
        let axis = cone.axis_direction();
        let probe = gauge.value(&axis);
        if !(probe > 0.0 && probe.is_finite()) {
            return Err(Error::InvalidFamily(
                "gauge is not positive on the cone interior".into(),
            ));
        }
        let dual_cone = cone.dual();
        Ok(PseudoCone {
            label: label.into(),
            cone,
            dual_cone,
            repr: Repr::Gauge(gauge),
            dual_gauge,
            build_deviation: None,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.cone.dim()
    }

    pub fn cone(&self) -> &Cone {
        &self.cone
    }

    pub fn dual_cone(&self) -> &Cone {
        &self.dual_cone
    }

    pub fn is_smooth(&self) -> bool {
        matches!(self.repr, Repr::Gauge(_))
    }

    /// Whether exact derivatives of the gauge are available.
    pub fn has_analytic_jets(&self) -> bool {
        match &self.repr {
            Repr::Gauge(g) => g.has_jets(),
            Repr::ClassZero(_) => false,
        }
    }

    pub fn gauge(&self) -> Option<&Arc<dyn GaugeField>> {
        match &self.repr {
            Repr::Gauge(g) => Some(g),
            Repr::ClassZero(_) => None,
        }
    }

    /// Closed-form copolar gauge attached at construction, if any.
    pub fn dual_gauge(&self) -> Option<&Arc<dyn GaugeField>> {
        self.dual_gauge.as_ref()
    }

    /// Worst node deviation between the numeric support cache and the
    /// attached closed form, when this pseudo-cone was built as a copolar.
    pub fn copolar_build_deviation(&self) -> Option<f64> {
        self.build_deviation
    }

    pub fn value_noise(&self) -> f64 {
        match &self.repr {
            Repr::Gauge(g) => g.value_noise(),
            Repr::ClassZero(_) => crate::constants::VALUE_NOISE_CLOSED_FORM,
        }
    }

    /// Step policy for finite differences of this pseudo-cone's fields.
    pub fn fd_policy(&self, order: u8) -> StepPolicy {
        StepPolicy::for_noise(order, self.value_noise())
    }

    /// Gauge value: 1 on the boundary, above 1 inside, NaN off the domain.
    pub fn gauge_value(&self, x: &DVector<f64>) -> f64 {
        match &self.repr {
            Repr::Gauge(g) => g.value(x),
            Repr::ClassZero(set) => {
                if !self.cone.interior_contains(x) {
                    return f64::NAN;
                }
                match set.radial(&self.cone, x) {
                    Ok(r) => 1.0 / r,
                    Err(_) => f64::NAN,
                }
            }
        }
    }

    /// Least `t > 0` with `t v` in the set, for `v` interior to the cone.
    pub fn radial(&self, v: &DVector<f64>) -> Result<f64> {
        if !self.cone.interior_contains(v) {
            return Err(Error::OutsideCone);
        }
        match &self.repr {
            Repr::Gauge(g) => {
                let f = g.value(v);
                if f.is_finite() && f > 0.0 {
                    Ok(1.0 / f)
                } else {
                    Err(Error::NonFinite { point: v.as_slice().to_vec() })
                }
            }
            Repr::ClassZero(set) => set.radial(&self.cone, v),
        }
    }

    /// The boundary point along an interior direction.
    pub fn boundary_point(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(v * self.radial(v)?)
    }

    pub fn member(&self, x: &DVector<f64>) -> bool {
        match &self.repr {
            Repr::Gauge(g) => {
                if !self.cone.contains(x) {
                    return false;
                }
                let f = g.value(x);
                f.is_finite() && f >= 1.0 - 1e-9
            }
            Repr::ClassZero(set) => set.member(&self.cone, x),
        }
    }

    /// Support function by the fastest correct route: closed forms for the
    /// non-smooth families, the attached copolar gauge when present, the
    /// forced numeric supremum otherwise. Plus infinity off the dual cone.
    pub fn support(&self, u: &DVector<f64>) -> f64 {
        match &self.repr {
            Repr::ClassZero(set) => set.support(&self.cone, &self.dual_cone, u),
            Repr::Gauge(_) => {
                if !self.dual_cone.contains(u) {
                    return f64::INFINITY;
                }
                if let Some(dg) = &self.dual_gauge {
                    let v = dg.value(u);
                    if v.is_finite() {
                        return -v;
                    }
                }
                self.support_computed(u).unwrap_or(f64::NAN)
            }
        }
    }

    /// Support function forced through the numeric route: a deterministic
    /// maximization of `rho(v) <u, v>` over the footprint of the cone, up to
    /// a tiny angular guard. This is the route audits compare against closed
    /// forms; it never consults an attached copolar gauge.
    ///
    /// Smooth radial fields put the maximizer strictly inside the footprint,
    /// at a distance from the boundary comparable to the slack of `u` in the
    /// dual footprint. Truncated sets attain their suprema at cone edges
    /// instead, so prefer [`PseudoCone::support`] there.
    pub fn support_computed(&self, u: &DVector<f64>) -> Result<f64> {
        self.support_computed_at(u, None).map(|(h, _)| h)
    }

    /// Numeric support value together with the maximizer's cap coordinates,
    /// optionally warm-started from a nearby functional's maximizer. The
    /// warm path replaces the full deterministic scan by a guard scan plus a
    /// local refinement, which is sound here: the support objective of a
    /// strictly convex radial field has a unique interior critical point.
    pub(crate) fn support_computed_at(
        &self,
        u: &DVector<f64>,
        warm: Option<&[f64]>,
    ) -> Result<(f64, Vec<f64>)> {
        if !self.dual_cone.interior_contains(u) {
            return Err(Error::OutsideCone);
        }
        let axis = self.cone.axis_direction();
        let cap = CapDomain::new(axis, self.cone.outer_angle().min(1.5707), SUP_MARGIN)?;
        let field = |v: &DVector<f64>| match self.radial(v) {
            Ok(r) => r * u.dot(v),
            Err(_) => f64::NAN,
        };
        let (p, val) = maximize_on_cap_coords(field, &cap, DEFAULT_RESTARTS, SUP_TOL, warm)?;
        if val.is_finite() {
            Ok((val, p))
        } else {
            Err(Error::DegenerateSupport { value: val })
        }
    }

    /// The copolar pseudo-cone. Closed form for the non-smooth families; for
    /// smooth ones the support function is sampled through the forced
    /// numeric route and cached over the dual footprint, which becomes the
    /// copolar's primary representation.
    pub fn copolar(&self) -> Result<PseudoCone> {
        match &self.repr {
            Repr::ClassZero(set) => {
                let (dual, star) = set.copolar_parts(&self.cone);
                star.validate(&dual)?;
                Ok(PseudoCone {
                    label: format!("{}*", self.label),
                    cone: dual,
                    dual_cone: self.cone.clone(),
                    repr: Repr::ClassZero(star),
                    dual_gauge: None,
                    build_deviation: None,
                })
            }
            Repr::Gauge(g) => {
                let mut warm: Option<Vec<f64>> = None;
                let cache = SupportCache::build(
                    &self.dual_cone,
                    |u| {
                        let (h, p) = self.support_computed_at(u, warm.as_deref())?;
                        warm = Some(p);
                        Ok(h)
                    },
                    self.dual_gauge.as_deref(),
                )?;
                let deviation = cache.build_deviation;
                let fallback = match &self.dual_gauge {
                    Some(dg) => dg.clone(),
                    None => Arc::new(LiveSupportGauge::new(self.clone())) as Arc<dyn GaugeField>,
                };
                let cache_gauge = CacheGauge::new(cache, Some(fallback));
                Ok(PseudoCone {
                    label: format!("{}*", self.label),
                    cone: self.dual_cone.clone(),
                    dual_cone: self.cone.clone(),
                    repr: Repr::Gauge(Arc::new(cache_gauge)),
                    dual_gauge: Some(g.clone()),
                    build_deviation: deviation,
                })
            }
        }
    }

    /// Image under an invertible linear map. The gauge pulls back through
    /// the inverse, the attached copolar gauge through the transpose, and
    /// the cones are rebuilt.
    pub fn linear_image(&self, m: &DMatrix<f64>) -> Result<PseudoCone> {
        let cone = self.cone.linear_image(m)?;
        let dual_cone = cone.dual();
        let inv_t = m
            .transpose()
            .try_inverse()
            .ok_or(Error::Singular)?;
        let repr = match &self.repr {
            Repr::Gauge(g) => Repr::Gauge(Arc::new(LinearImageGauge::new(g.clone(), m)?) as Arc<dyn GaugeField>),
            Repr::ClassZero(set) => Repr::ClassZero(match set {
                ClassZeroSet::Truncated { w, level } => {
                    ClassZeroSet::Truncated { w: &inv_t * w, level: *level }
                }
                ClassZeroSet::Shifted { apex } => ClassZeroSet::Shifted { apex: m * apex },
            }),
        };
        if let Repr::ClassZero(set) = &repr {
            set.validate(&cone)?;
        }
        let dual_gauge = match &self.dual_gauge {
            Some(dg) => Some(Arc::new(LinearImageGauge::new(dg.clone(), &inv_t)?) as Arc<dyn GaugeField>),
            None => None,
        };
        Ok(PseudoCone {
            label: format!("{}:mapped", self.label),
            cone,
            dual_cone,
            repr,
            dual_gauge,
            build_deviation: None,
        })
    }
}

fn product_family(name: &str, n: usize, c: f64) -> Result<PseudoCone> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidFamily("product level must be positive".into()));
    }
    let cone = Cone::orthant(n)?;
    let reflect = DMatrix::from_diagonal(&DVector::from_element(n, -1.0));
    let c_star = 1.0 / ((n as f64).powi(n as i32) * c);
    let dual = LinearImageGauge::new(Arc::new(ProductGauge::new(n, c_star)), &reflect)?;
    PseudoCone::from_gauge(
        format!("{name}(c={c})"),
        cone,
        Arc::new(ProductGauge::new(n, c)),
        Some(Arc::new(dual)),
    )
}

/// Sampling and tolerance knobs shared by the audits.
#[derive(Debug, Clone)]
pub struct AuditOptions {
    pub directions: usize,
    pub seed: u64,
    pub tol_scale: f64,
    /// Angular margin for interior direction grids.
    pub margin: f64,
}

impl Default for AuditOptions {
    fn default() -> Self {
        AuditOptions {
            directions: DEFAULT_DIRECTIONS,
            seed: 0,
            tol_scale: 1.0,
            margin: GRID_MARGIN,
        }
    }
}

/// Radial–support reciprocity: `rho_K(v) * (-h_{K*}(v)) = 1` on interior
/// directions (audit id `eq1_1` in the identity catalog).
///
/// For smooth families the support factor goes through the forced numeric
/// supremum over the copolar's radial field, so the two factors come from
/// genuinely different routes.
pub fn audit_reciprocity(
    k: &PseudoCone,
    kstar: &PseudoCone,
    opts: &AuditOptions,
) -> Result<AuditReport> {
    let tol = default_tolerance("eq1_1", true) * opts.tol_scale;
    let mut b = AuditBuilder::new("eq1_1", k.label(), tol);
    let dirs = sampling::interior_directions(k.cone(), opts.margin, opts.directions)?;
    let closed_form = !k.is_smooth();
    for v in &dirs {
        let rho = k.radial(v)?;
        let h = if closed_form {
            kstar.support(v)
        } else {
            kstar.support_computed(v)?
        };
        b.record(v.as_slice(), rho * (-h), 1.0);
    }
    if closed_form {
        b = b.with_note("closed-form support route (non-smooth family)");
    }
    Ok(b.finish())
}

/// Copolarity is an involution: `K** = K` (audit id `involution`).
///
/// Smooth families compare radial functions of K and the twice-built
/// numeric copolar; non-smooth ones compare memberships at seeded points
/// around the boundary together with radial agreement on interior rays.
pub fn audit_involution(
    k: &PseudoCone,
    kstarstar: &PseudoCone,
    opts: &AuditOptions,
) -> Result<AuditReport> {
    let dirs = sampling::interior_directions(k.cone(), opts.margin, opts.directions)?;
    if k.is_smooth() {
        let tol = default_tolerance("involution", k.has_analytic_jets()) * opts.tol_scale;
        let mut b = AuditBuilder::new("involution", k.label(), tol);
        for v in &dirs {
            let rho = k.radial(v)?;
            let rho2 = kstarstar.radial(v)?;
            b.record(v.as_slice(), rho, rho2);
        }
        Ok(b.finish())
    } else {
        // Five seeded ray scales per direction: with the default direction
        // count this probes a thousand points straddling both boundaries.
        const SCALES_PER_DIRECTION: usize = 5;
        let tol = default_tolerance("involution_set", false) * opts.tol_scale;
        let mut b = AuditBuilder::new("involution", k.label(), tol)
            .with_note("set-level comparison: seeded membership plus radial agreement");
        let scales = sampling::seeded_ray_scales(
            opts.seed,
            SCALES_PER_DIRECTION * dirs.len(),
            0.55,
            2.6,
        );
        for (i, v) in dirs.iter().enumerate() {
            let rho = k.radial(v)?;
            let rho2 = kstarstar.radial(v)?;
            b.record(v.as_slice(), rho, rho2);
            for s in &scales[SCALES_PER_DIRECTION * i..SCALES_PER_DIRECTION * (i + 1)] {
                let x = v * (rho * s);
                let agree = k.member(&x) == kstarstar.member(&x);
                b.record(x.as_slice(), 0.0, if agree { 0.0 } else { 1.0 });
            }
        }
        Ok(b.finish())
    }
}

/// Copolarity is equivariant: `(A K)* = A^{-T} K*` for invertible A (audit
/// id `equivariance`). Both sides are built independently: the left by
/// dualizing the mapped pseudo-cone, the right by mapping the dual.
pub fn audit_equivariance(
    k: &PseudoCone,
    kstar: &PseudoCone,
    opts: &AuditOptions,
) -> Result<AuditReport> {
    let tol = default_tolerance("equivariance", true) * opts.tol_scale;
    let mut b = AuditBuilder::new("equivariance", k.label(), tol);
    let maps = equivariance_maps(k.dim(), k.cone().is_circular())?;
    let per_map = (opts.directions / maps.len()).max(8);
    for m in &maps {
        let mapped = k.linear_image(m)?;
        let lhs_side = mapped.copolar()?;
        let inv_t = m.transpose().try_inverse().ok_or(Error::Singular)?;
        let rhs_side = kstar.linear_image(&inv_t)?;
        let dirs = sampling::interior_directions(lhs_side.cone(), opts.margin, per_map)?;
        for v in &dirs {
            let lhs = lhs_side.radial(v)?;
            let rhs = rhs_side.radial(v)?;
            b.record(v.as_slice(), lhs, rhs);
        }
    }
    b = b.with_note(format!("{} linear maps, fixed catalog", maps.len()));
    Ok(b.finish())
}

/// The fixed catalog of test maps: diagonal stretch, shear, rotation-like
/// mix, and two symmetric mixes (determinants 2, 1, 2, 3, 5 in the plane).
/// Circular cones only admit similarities, so they get rotations and
/// scalings instead.
pub fn equivariance_maps(n: usize, circular: bool) -> Result<Vec<DMatrix<f64>>> {
    if circular {
        let mut maps = Vec::new();
        maps.push(DMatrix::identity(n, n) * 2.0);
        let mut rot = DMatrix::identity(n, n);
        let (c, s) = (0.6f64.cos(), 0.6f64.sin());
        rot[(0, 0)] = c;
        rot[(0, 1)] = -s;
        rot[(1, 0)] = s;
        rot[(1, 1)] = c;
        maps.push(rot.clone());
        maps.push(rot * 0.5);
        return Ok(maps);
    }
    match n {
        2 => Ok(vec![
            DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]),
            DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]),
            DMatrix::from_row_slice(2, 2, &[1.0, -1.0, 1.0, 1.0]),
            DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]),
            DMatrix::from_row_slice(2, 2, &[3.0, 2.0, 2.0, 3.0]),
        ]),
        3 => Ok(vec![
            DMatrix::from_row_slice(3, 3, &[2.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]),
            DMatrix::from_row_slice(3, 3, &[1.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]),
            DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 1.0, 0.0, 2.0, 0.0, 0.0, 0.0, 1.0]),
            DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 2.0, 0.0, 0.0, 0.0, 1.0]),
            DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 3.0, 0.0, 0.0, 0.0, 1.0]),
        ]),
        _ => Err(Error::unsupported(
            "equivariance map catalog covers dimensions 2 and 3",
        )),
    }
}

/// Scenario-facing description of a cone.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum ConeSpec {
    Orthant { dim: usize },
    Circular { axis: Vec<f64>, half_angle: f64 },
    Polyhedral { rays: Vec<Vec<f64>> },
}

impl ConeSpec {
    pub fn build(&self) -> Result<Cone> {
        match self {
            ConeSpec::Orthant { dim } => Cone::orthant(*dim),
            ConeSpec::Circular { axis, half_angle } => {
                Cone::circular(DVector::from_vec(axis.clone()), *half_angle)
            }
            ConeSpec::Polyhedral { rays } => Cone::polyhedral(
                rays.iter().map(|r| DVector::from_vec(r.clone())).collect(),
            ),
        }
    }
}

/// Scenario-facing description of a pseudo-cone family.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilySpec {
    Hyperbola { c: f64 },
    Calabi { c: f64 },
    PerturbedHyperbola { delta: f64 },
    TruncatedCone {
        cone: ConeSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        w: Option<Vec<f64>>,
        level: f64,
    },
    ShiftedCone { cone: ConeSpec, apex: Vec<f64> },
}

impl FamilySpec {
    pub fn build(&self) -> Result<PseudoCone> {
        match self {
            FamilySpec::Hyperbola { c } => PseudoCone::hyperbola(*c),
            FamilySpec::Calabi { c } => PseudoCone::calabi(*c),
            FamilySpec::PerturbedHyperbola { delta } => PseudoCone::perturbed_hyperbola(*delta),
            FamilySpec::TruncatedCone { cone, w, level } => PseudoCone::truncated_cone(
                cone.build()?,
                w.as_ref().map(|v| DVector::from_vec(v.clone())),
                *level,
            ),
            FamilySpec::ShiftedCone { cone, apex } => {
                PseudoCone::shifted_cone(cone.build()?, DVector::from_vec(apex.clone()))
            }
        }
    }
}
