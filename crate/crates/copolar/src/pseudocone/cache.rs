//! Interpolated support caches: the numeric backbone of copolar
//! construction.
//!
//! The copolar of a pseudo-cone K is recovered from the support function of
//! K restricted to the dual footprint: the gauge of the copolar is `-h_K`.
//! Building a copolar therefore samples `h_K` (itself a maximization over
//! the radial field of K) at Chebyshev nodes of a gnomonic chart over the
//! dual cone and interpolates. The interpolant is the primary representation
//! of the copolar; any attached closed-form gauge serves as an out-of-domain
//! fallback and as a node-wise construction check.

use std::sync::Arc;

use nalgebra::DVector;

use crate::cone::{Cone, GnomonicChart};
use crate::constants::{
    CACHE_MARGIN, CACHE_NODES, DEGENERATE_SUPPORT_TOL, VALUE_NOISE_CACHE, VALUE_NOISE_LIVE,
};
use crate::error::{Error, Result};
use crate::numkit::ChebInterp;
use crate::pseudocone::gauge::GaugeField;
use crate::pseudocone::PseudoCone;

/// Hard guard for the node-wise comparison against an attached closed form.
/// This is a programming-error tripwire, deliberately far looser than any
/// audit tolerance: audits, not the builder, judge the identities.
const CROSS_CHECK_GUARD: f64 = 1e-3;

/// Interpolation region in gnomonic chart coordinates.
///
/// One-dimensional charts interpolate on the full footprint interval. Planar
/// charts pull the full footprint disk back to the Chebyshev square through
/// an elliptical map, so no part of the footprint is sacrificed to a box.
/// Higher dimensions fall back to the inscribed box.
enum Domain {
    Interval { r: f64 },
    Disk { r: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
}

/// Elliptical square-to-disk map on the unit square/disk pair. Analytic on
/// the closed square, so it preserves spectral convergence of the
/// interpolant.
fn square_to_disk(s: &[f64]) -> [f64; 2] {
    [
        s[0] * (1.0 - 0.5 * s[1] * s[1]).sqrt(),
        s[1] * (1.0 - 0.5 * s[0] * s[0]).sqrt(),
    ]
}

/// Closed-form inverse of [`square_to_disk`]. Arguments of the square roots
/// are clamped at zero: rounding can push them barely negative near the
/// diagonal corners.
fn disk_to_square(u: f64, v: f64) -> [f64; 2] {
    let root = |t: f64| t.max(0.0).sqrt();
    let a = 2.0 + u * u - v * v;
    let b = 2.0 - u * u + v * v;
    let su = 0.5 * (root(a + 2.0 * std::f64::consts::SQRT_2 * u) - root(a - 2.0 * std::f64::consts::SQRT_2 * u));
    let sv = 0.5 * (root(b + 2.0 * std::f64::consts::SQRT_2 * v) - root(b - 2.0 * std::f64::consts::SQRT_2 * v));
    [su, sv]
}

impl Domain {
    fn for_chart(chart: &GnomonicChart) -> Result<Domain> {
        match chart.chart_dim() {
            1 => Ok(Domain::Interval { r: chart.domain_radius() }),
            2 => Ok(Domain::Disk { r: chart.domain_radius() }),
            3 => {
                let (lo, hi) = chart.inscribed_box();
                Ok(Domain::Box { lo, hi })
            }
            _ => Err(Error::unsupported(
                "support caches cover ambient dimensions 2 through 4",
            )),
        }
    }

    /// Box handed to the interpolant builder.
    fn grid_bounds(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Domain::Interval { r } => (vec![-r], vec![*r]),
            Domain::Disk { .. } => (vec![-1.0, -1.0], vec![1.0, 1.0]),
            Domain::Box { lo, hi } => (lo.clone(), hi.clone()),
        }
    }

    /// Grid coordinates -> chart coordinates.
    fn to_chart(&self, s: &[f64]) -> Vec<f64> {
        match self {
            Domain::Disk { r } => {
                let p = square_to_disk(s);
                vec![r * p[0], r * p[1]]
            }
            _ => s.to_vec(),
        }
    }

    /// Chart coordinates -> grid coordinates, None outside the region.
    fn to_grid(&self, p: &[f64]) -> Option<Vec<f64>> {
        match self {
            Domain::Disk { r } => {
                let rr = p.iter().map(|x| x * x).sum::<f64>().sqrt();
                if rr > r * (1.0 + 1e-12) {
                    return None;
                }
                let s = disk_to_square(p[0] / r, p[1] / r);
                if s.iter().any(|x| x.abs() > 1.0 + 1e-9) {
                    return None;
                }
                Some(vec![s[0].clamp(-1.0, 1.0), s[1].clamp(-1.0, 1.0)])
            }
            _ => Some(p.to_vec()),
        }
    }
}

/// Chebyshev model of a support function over the footprint of a cone.
pub struct SupportCache {
    chart: GnomonicChart,
    domain: Domain,
    interp: ChebInterp,
    /// Worst node-wise deviation from the attached closed form, when one was
    /// available at build time.
    pub build_deviation: Option<f64>,
}

impl SupportCache {
    /// Sample `support` (finite, strictly negative, 1-homogeneous) over the
    /// footprint of `cone` and interpolate. The sampler may carry state: the
    /// node ordering is deterministic and neighbouring nodes are close on the
    /// sphere, which lets stateful samplers warm-start from the previous
    /// node.
    pub fn build(
        cone: &Cone,
        mut support: impl FnMut(&DVector<f64>) -> Result<f64>,
        check: Option<&dyn GaugeField>,
    ) -> Result<SupportCache> {
        let d = cone.dim() - 1;
        if d == 0 || d > 3 {
            return Err(Error::unsupported(
                "support caches cover ambient dimensions 2 through 4",
            ));
        }
        let chart = cone.footprint_chart(CACHE_MARGIN[d - 1])?;
        let domain = Domain::for_chart(&chart)?;
        let (lo, hi) = domain.grid_bounds();
        let nodes = vec![CACHE_NODES[d - 1]; d];
        let mut deviation: Option<f64> = check.map(|_| 0.0);
        let interp = ChebInterp::build(&lo, &hi, &nodes, |s| {
            let u = chart.point(&domain.to_chart(s));
            let h = support(&u)?;
            if !(h < -DEGENERATE_SUPPORT_TOL) {
                return Err(Error::DegenerateSupport { value: h });
            }
            if let Some(g) = check {
                let expect = -g.value(&u);
                let dev = (h - expect).abs() / h.abs().max(1.0);
                if !(dev < CROSS_CHECK_GUARD) {
                    return Err(Error::degenerate(format!(
                        "support sample {h:.6e} deviates from the attached closed form {expect:.6e}"
                    )));
                }
                let slot = deviation.as_mut().unwrap();
                *slot = slot.max(dev);
            }
            Ok(h)
        })?;
        Ok(SupportCache { chart, domain, interp, build_deviation: deviation })
    }

    pub fn chart(&self) -> &GnomonicChart {
        &self.chart
    }

    /// Interpolated support value, using 1-homogeneity to reduce to the
    /// chart. None when the direction leaves the interpolation domain.
    pub fn support(&self, u: &DVector<f64>) -> Option<f64> {
        let (p, s) = self.chart.coords(u)?;
        if !self.chart.contains_coords(&p) {
            return None;
        }
        let grid = self.domain.to_grid(&p)?;
        if !self.interp.contains(&grid) {
            return None;
        }
        Some(s * self.interp.eval(&grid))
    }
}

/// The gauge of a numerically built copolar: `-h` served from the cache,
/// with an optional closed-form fallback outside the interpolation domain.
pub struct CacheGauge {
    cache: SupportCache,
    fallback: Option<Arc<dyn GaugeField>>,
    dim: usize,
}

impl CacheGauge {
    pub fn new(cache: SupportCache, fallback: Option<Arc<dyn GaugeField>>) -> Self {
        let dim = cache.chart.ambient_dim();
        CacheGauge { cache, fallback, dim }
    }

    pub fn build_deviation(&self) -> Option<f64> {
        self.cache.build_deviation
    }
}

impl GaugeField for CacheGauge {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        match self.cache.support(x) {
            Some(h) => -h,
            None => match &self.fallback {
                Some(g) => g.value(x),
                None => f64::NAN,
            },
        }
    }

    fn value_noise(&self) -> f64 {
        VALUE_NOISE_CACHE[self.cache.chart.chart_dim() - 1]
    }
}

/// Out-of-domain backstop for copolars of bodies without a closed-form dual:
/// answers gauge queries with a live support maximization over the source
/// body, `-h_K(u)`, exact by bipolarity on the whole open dual cone.
///
/// A cache's interpolation region stops an angular margin short of the cone
/// boundary, but building the second copolar K** probes support maximizers
/// in precisely that corner strip (an edge node of K** and its maximizer on
/// the boundary of K* sit at reciprocal angles, so both hug their cones'
/// edges together). Clipping the search there silently biases the supremum;
/// recomputing from the source body keeps corner queries honest at the cost
/// of one full maximization each, which only those rare queries pay.
pub struct LiveSupportGauge {
    source: PseudoCone,
}

impl LiveSupportGauge {
    pub fn new(source: PseudoCone) -> Self {
        LiveSupportGauge { source }
    }
}

impl GaugeField for LiveSupportGauge {
    fn dim(&self) -> usize {
        self.source.dim()
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        match self.source.support_computed(x) {
            Ok(h) => -h,
            Err(_) => f64::NAN,
        }
    }

    fn value_noise(&self) -> f64 {
        VALUE_NOISE_LIVE
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pseudocone::gauge::{LinearImageGauge, ProductGauge};
    use approx::assert_relative_eq;
    use nalgebra::{dvector, DMatrix};

    /// Closed-form support of the hyperbola branch x y >= c on the negative
    /// orthant: h(u) = -2 sqrt(c u_1 u_2).
    fn hyperbola_support(c: f64, u: &DVector<f64>) -> Result<f64> {
        if u[0] >= 0.0 || u[1] >= 0.0 {
            return Err(Error::OutsideCone);
        }
        Ok(-2.0 * (c * u[0] * u[1]).sqrt())
    }

    /// Same for the n = 3 product body: h(u) = -3 (c |u_1 u_2 u_3|)^{1/3}.
    fn calabi_support(c: f64, u: &DVector<f64>) -> Result<f64> {
        if u.iter().any(|&x| x >= 0.0) {
            return Err(Error::OutsideCone);
        }
        Ok(-3.0 * (c * u.iter().map(|x| -x).product::<f64>()).cbrt())
    }

    #[test]
    fn elliptical_map_round_trips() {
        for (a, b) in [(0.3, -0.4), (0.99, 0.99), (-1.0, 1.0), (0.0, 0.7)] {
            let p = square_to_disk(&[a, b]);
            assert!(p[0] * p[0] + p[1] * p[1] <= 1.0 + 1e-12);
            let s = disk_to_square(p[0], p[1]);
            assert_relative_eq!(s[0], a, epsilon = 1e-12);
            assert_relative_eq!(s[1], b, epsilon = 1e-12);
        }
    }

    #[test]
    fn cache_reproduces_the_closed_form_support() {
        let cone = Cone::orthant(2).unwrap().dual();
        let cache = SupportCache::build(&cone, |u| hyperbola_support(1.0, u), None).unwrap();
        for (a, b) in [(1.0, 1.0), (0.5, 1.7), (2.0, 0.4), (1.3, 1.3)] {
            let u = dvector![-a, -b];
            let exact = -2.0 * (a * b as f64).sqrt();
            let got = cache.support(&u).expect("inside footprint");
            assert_relative_eq!(got, exact, epsilon = 1e-11);
        }
    }

    #[test]
    fn planar_cache_covers_the_full_footprint_disk() {
        let cone = Cone::orthant(3).unwrap().dual();
        let cache = SupportCache::build(&cone, |u| calabi_support(1.0, u), None).unwrap();
        for (a, b, c) in [
            (1.0, 1.0, 1.0),
            (0.4, 1.6, 0.9),
            (2.0, 0.5, 1.2),
            // Close to a footprint edge: outside any inscribed box.
            (5.0, 5.0, 1.0),
            (0.2, 1.0, 1.0),
        ] {
            let u = dvector![-a, -b, -c];
            let exact = -3.0 * ((a * b * c) as f64).cbrt();
            let got = cache.support(&u).expect("inside footprint");
            assert_relative_eq!(got, exact, epsilon = 1e-9);
        }
        // Too close to a generator ray: the chart margin excludes it.
        assert!(cache.support(&dvector![-1.0, -1e-4, -1e-4]).is_none());
    }

    #[test]
    fn cache_gauge_matches_the_reflected_product_gauge() {
        let cone = Cone::orthant(2).unwrap().dual();
        let reflect = DMatrix::from_diagonal(&dvector![-1.0, -1.0]);
        let star = Arc::new(
            LinearImageGauge::new(Arc::new(ProductGauge::new(2, 0.25)), &reflect).unwrap(),
        );
        let cache = SupportCache::build(&cone, |u| hyperbola_support(1.0, u), Some(&*star)).unwrap();
        assert!(cache.build_deviation.unwrap() < 1e-11);
        let gauge = CacheGauge::new(cache, Some(star.clone()));
        let u = dvector![-1.5, -0.8];
        assert_relative_eq!(gauge.value(&u), star.value(&u), epsilon = 1e-11);
        // 1-homogeneous through the chart reduction.
        assert_relative_eq!(gauge.value(&(&u * 3.0)), 3.0 * gauge.value(&u), epsilon = 1e-10);
    }

    #[test]
    fn degenerate_support_is_rejected() {
        let cone = Cone::orthant(2).unwrap().dual();
        let e = SupportCache::build(&cone, |_| Ok(-1e-12), None);
        assert!(matches!(e, Err(Error::DegenerateSupport { .. })));
    }

    #[test]
    fn cross_check_guard_trips_on_a_wrong_closed_form() {
        let cone = Cone::orthant(2).unwrap().dual();
        let reflect = DMatrix::from_diagonal(&dvector![-1.0, -1.0]);
        // Wrong constant: the attached form disagrees by a factor sqrt(2).
        let wrong = Arc::new(
            LinearImageGauge::new(Arc::new(ProductGauge::new(2, 0.5)), &reflect).unwrap(),
        );
        let e = SupportCache::build(&cone, |u| hyperbola_support(1.0, u), Some(&*wrong));
        assert!(e.is_err());
    }

    #[test]
    fn out_of_domain_falls_back_or_reports_nan() {
        let cone = Cone::orthant(2).unwrap().dual();
        let cache = SupportCache::build(&cone, |u| hyperbola_support(1.0, u), None).unwrap();
        let gauge = CacheGauge::new(cache, None);
        // Opposite half-space: no chart coordinates.
        assert!(gauge.value(&dvector![1.0, 1.0]).is_nan());
    }
}
