//! Closed convex cones: circular and polyhedral representations, dual cones,
//! membership with angular slack, and gnomonic charts over the interior
//! directions used by the scanning and interpolation layers.
//!
//! Conventions: a cone is pointed and full-dimensional. Polyhedral cones
//! carry both unit generators (extreme rays) and unit facet normals f with
//! `<f, x> <= 0` on the cone; the dual cone swaps the two lists. A circular
//! cone with axis a and half-angle t dualizes to axis -a and half-angle
//! pi/2 - t.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::numkit::optim;
use crate::numkit::tangent_frame;

const RAY_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub enum ConeKind {
    Circular { axis: DVector<f64>, half_angle: f64 },
    Polyhedral {
        generators: Vec<DVector<f64>>,
        facet_normals: Vec<DVector<f64>>,
    },
}

#[derive(Debug, Clone)]
pub struct Cone {
    n: usize,
    kind: ConeKind,
}

impl Cone {
    pub fn circular(axis: DVector<f64>, half_angle: f64) -> Result<Self> {
        let n = axis.len();
        if n < 2 {
            return Err(Error::InvalidCone("ambient dimension must be at least 2".into()));
        }
        let norm = axis.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidCone("circular cone needs a nonzero axis".into()));
        }
        if !(half_angle > 0.0 && half_angle < std::f64::consts::FRAC_PI_2) {
            return Err(Error::InvalidCone(
                "circular half-angle must lie strictly between 0 and pi/2".into(),
            ));
        }
        Ok(Cone {
            n,
            kind: ConeKind::Circular { axis: axis / norm, half_angle },
        })
    }

    /// The nonnegative orthant.
    pub fn orthant(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidCone("ambient dimension must be at least 2".into()));
        }
        let mut generators = Vec::with_capacity(n);
        let mut facet_normals = Vec::with_capacity(n);
        for i in 0..n {
            let mut e = DVector::zeros(n);
            e[i] = 1.0;
            generators.push(e.clone());
            facet_normals.push(-e);
        }
        sort_rays(&mut generators);
        sort_rays(&mut facet_normals);
        Ok(Cone { n, kind: ConeKind::Polyhedral { generators, facet_normals } })
    }

    /// Pointed full-dimensional cone spanned by the given rays. Facets are
    /// enumerated from (n-1)-subsets of the generators, so the ambient
    /// dimension is capped at 4.
    pub fn polyhedral(rays: Vec<DVector<f64>>) -> Result<Self> {
        if rays.is_empty() {
            return Err(Error::InvalidCone("no generators given".into()));
        }
        let n = rays[0].len();
        if n < 2 {
            return Err(Error::InvalidCone("ambient dimension must be at least 2".into()));
        }
        if n > 4 {
            return Err(Error::unsupported(
                "polyhedral facet enumeration is implemented for dimensions 2 through 4",
            ));
        }
        let mut gens: Vec<DVector<f64>> = Vec::new();
        for r in rays {
            if r.len() != n {
                return Err(Error::InvalidCone("generators of mixed dimension".into()));
            }
            let norm = r.norm();
            if !(norm > 0.0 && norm.is_finite()) {
                return Err(Error::InvalidCone("zero or non-finite generator".into()));
            }
            let u = r / norm;
            if !gens.iter().any(|g| (g - &u).norm() < RAY_TOL) {
                gens.push(u);
            }
        }
        if ray_matrix(&gens).rank(RAY_TOL) < n {
            return Err(Error::InvalidCone(
                "generators do not span the ambient space".into(),
            ));
        }

        let mut facets: Vec<DVector<f64>> = Vec::new();
        let mut subset = vec![0usize; n - 1];
        enumerate_subsets(gens.len(), n - 1, &mut subset, 0, 0, &mut |idx| {
            let chosen: Vec<&DVector<f64>> = idx.iter().map(|&i| &gens[i]).collect();
            if let Some(normal) = hyperplane_normal(&chosen, n) {
                for cand in [normal.clone(), -normal] {
                    if gens.iter().all(|g| cand.dot(g) <= RAY_TOL) {
                        if !facets.iter().any(|f| (f - &cand).norm() < RAY_TOL) {
                            facets.push(cand);
                        }
                        break;
                    }
                }
            }
        });
        if facets.is_empty() || ray_matrix(&facets).rank(RAY_TOL) < n {
            return Err(Error::InvalidCone("cone is not pointed".into()));
        }

        // Keep only extreme rays: a generator is extreme exactly when its
        // active facets cut out a one-dimensional face.
        gens.retain(|g| {
            let active: Vec<DVector<f64>> = facets
                .iter()
                .filter(|f| f.dot(g).abs() <= RAY_TOL)
                .cloned()
                .collect();
            !active.is_empty() && ray_matrix(&active).rank(RAY_TOL) == n - 1
        });
        if gens.is_empty() {
            return Err(Error::InvalidCone("no extreme rays survive pruning".into()));
        }
        sort_rays(&mut gens);
        sort_rays(&mut facets);
        Ok(Cone { n, kind: ConeKind::Polyhedral { generators: gens, facet_normals: facets } })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> &ConeKind {
        &self.kind
    }

    pub fn is_circular(&self) -> bool {
        matches!(self.kind, ConeKind::Circular { .. })
    }

    /// Extreme rays for polyhedral cones; the axis for circular ones.
    pub fn generators(&self) -> Vec<DVector<f64>> {
        match &self.kind {
            ConeKind::Circular { axis, .. } => vec![axis.clone()],
            ConeKind::Polyhedral { generators, .. } => generators.clone(),
        }
    }

    /// The cone of directions making a nonpositive inner product with every
    /// element, `{u : <u, x> <= 0 on C}`.
    pub fn dual(&self) -> Cone {
        match &self.kind {
            ConeKind::Circular { axis, half_angle } => Cone {
                n: self.n,
                kind: ConeKind::Circular {
                    axis: -axis.clone(),
                    half_angle: std::f64::consts::FRAC_PI_2 - half_angle,
                },
            },
            ConeKind::Polyhedral { generators, facet_normals } => {
                let mut gens = facet_normals.clone();
                let mut facets = generators.clone();
                sort_rays(&mut gens);
                sort_rays(&mut facets);
                Cone { n: self.n, kind: ConeKind::Polyhedral { generators: gens, facet_normals: facets } }
            }
        }
    }

    /// Signed angular distance from the boundary: positive inside, negative
    /// outside, measured on the unit sphere.
    pub fn angular_slack(&self, x: &DVector<f64>) -> f64 {
        let norm = x.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return f64::NEG_INFINITY;
        }
        match &self.kind {
            ConeKind::Circular { axis, half_angle } => {
                let c = (axis.dot(x) / norm).clamp(-1.0, 1.0);
                half_angle - c.acos()
            }
            ConeKind::Polyhedral { facet_normals, .. } => facet_normals
                .iter()
                .map(|f| -((f.dot(x) / norm).clamp(-1.0, 1.0)).asin())
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Largest angle any cone direction makes with the axis, i.e. the
    /// half-angle of the circumscribed circular cone. For polyhedral cones
    /// it is attained at a generator. Search domains for suprema over the
    /// cone must use this rather than the inscribed slack: maximizers can
    /// sit in the corners outside the inscribed cap.
    pub fn outer_angle(&self) -> f64 {
        match &self.kind {
            ConeKind::Circular { half_angle, .. } => *half_angle,
            ConeKind::Polyhedral { generators, .. } => {
                let axis = self.axis_direction();
                generators
                    .iter()
                    .map(|g| (g.dot(&axis)).clamp(-1.0, 1.0).acos())
                    .fold(0.0, f64::max)
            }
        }
    }

    pub fn contains(&self, x: &DVector<f64>) -> bool {
        if x.norm() == 0.0 {
            return true;
        }
        self.angular_slack(x) >= -RAY_TOL
    }

    pub fn interior_contains(&self, x: &DVector<f64>) -> bool {
        x.norm() > 0.0 && self.angular_slack(x) > RAY_TOL
    }

    /// A unit direction well inside the cone. For circular cones this is the
    /// axis; for polyhedral cones a deterministic slack maximization started
    /// from the normalized generator sum.
    pub fn axis_direction(&self) -> DVector<f64> {
        match &self.kind {
            ConeKind::Circular { axis, .. } => axis.clone(),
            ConeKind::Polyhedral { generators, .. } => {
                let mut start: DVector<f64> = DVector::zeros(self.n);
                for g in generators {
                    start += g;
                }
                let norm = start.norm();
                if norm < RAY_TOL {
                    // Pointedness makes this unreachable for sane inputs, but
                    // fall back to the first generator rather than divide by 0.
                    start = generators[0].clone();
                } else {
                    start /= norm;
                }
                let cap = match optim::CapDomain::new(start.clone(), 1.45, 0.0) {
                    Ok(c) => c,
                    Err(_) => return start,
                };
                match optim::maximize_on_cap(|v| self.angular_slack(v), &cap, 4, 1e-12) {
                    Ok((dir, slack)) if slack > 0.0 => dir,
                    _ => start,
                }
            }
        }
    }

    /// Gnomonic chart over the interior directions that keep at least
    /// `margin` of angular slack.
    pub fn footprint_chart(&self, margin: f64) -> Result<GnomonicChart> {
        if !(margin >= 0.0) {
            return Err(Error::degenerate("footprint margin must be nonnegative"));
        }
        let axis = self.axis_direction();
        let slack = self.angular_slack(&axis);
        if slack - margin <= 1e-6 {
            return Err(Error::EmptyFootprint { margin, radius: slack });
        }
        let frame = tangent_frame(&axis);
        Ok(GnomonicChart {
            n: self.n,
            axis,
            frame,
            domain_radius: (slack - margin).tan(),
        })
    }

    /// Image of the cone under an invertible linear map. Polyhedral cones map
    /// by rebuilding from the mapped rays; circular cones only under
    /// similarities, which are the maps that keep them circular.
    pub fn linear_image(&self, m: &DMatrix<f64>) -> Result<Cone> {
        if m.nrows() != self.n || m.ncols() != self.n {
            return Err(Error::degenerate("linear map has the wrong shape"));
        }
        if m.determinant().abs() < 1e-12 {
            return Err(Error::Singular);
        }
        match &self.kind {
            ConeKind::Polyhedral { generators, .. } => {
                Cone::polyhedral(generators.iter().map(|g| m * g).collect())
            }
            ConeKind::Circular { axis, half_angle } => {
                let mtm = m.transpose() * m;
                let c = mtm.trace() / self.n as f64;
                let dev = (&mtm - DMatrix::<f64>::identity(self.n, self.n) * c).norm();
                if dev > 1e-10 * c.abs() {
                    return Err(Error::unsupported(
                        "circular cones only map through similarity transforms",
                    ));
                }
                let img = m * axis;
                Cone::circular(img, *half_angle)
            }
        }
    }
}

/// Affine chart of interior directions: p in a disk of `domain_radius` maps
/// to the ray through `axis + sum_i p_i frame_i`.
#[derive(Debug, Clone)]
pub struct GnomonicChart {
    n: usize,
    axis: DVector<f64>,
    frame: Vec<DVector<f64>>,
    domain_radius: f64,
}

impl GnomonicChart {
    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn chart_dim(&self) -> usize {
        self.n - 1
    }

    pub fn axis(&self) -> &DVector<f64> {
        &self.axis
    }

    pub fn frame(&self) -> &[DVector<f64>] {
        &self.frame
    }

    pub fn domain_radius(&self) -> f64 {
        self.domain_radius
    }

    /// Unnormalized chart point `axis + sum p_i frame_i`.
    pub fn point(&self, p: &[f64]) -> DVector<f64> {
        let mut v = self.axis.clone();
        for (pi, f) in p.iter().zip(&self.frame) {
            v += f * *pi;
        }
        v
    }

    /// Unit direction of the chart point.
    pub fn direction(&self, p: &[f64]) -> DVector<f64> {
        let v = self.point(p);
        let norm = v.norm();
        v / norm
    }

    /// Chart coordinates of a direction, if it lies in the open half-space
    /// of the axis. The axial component is returned alongside, so that
    /// `x = axial * point(coords)`.
    pub fn coords(&self, x: &DVector<f64>) -> Option<(Vec<f64>, f64)> {
        let s = self.axis.dot(x);
        if !(s > 0.0) {
            return None;
        }
        let p = self.frame.iter().map(|f| f.dot(x) / s).collect();
        Some((p, s))
    }

    pub fn contains_coords(&self, p: &[f64]) -> bool {
        p.iter().map(|v| v * v).sum::<f64>() <= self.domain_radius * self.domain_radius + 1e-12
    }

    /// Axis-aligned box inscribed in the chart disk, used as an
    /// interpolation domain.
    pub fn inscribed_box(&self) -> (Vec<f64>, Vec<f64>) {
        let d = self.chart_dim();
        let half = self.domain_radius / (d as f64).sqrt();
        (vec![-half; d], vec![half; d])
    }
}

fn ray_matrix(rays: &[DVector<f64>]) -> DMatrix<f64> {
    let n = rays[0].len();
    DMatrix::from_fn(rays.len(), n, |i, j| rays[i][j])
}

fn sort_rays(rays: &mut [DVector<f64>]) {
    rays.sort_by(|a, b| {
        for i in 0..a.len() {
            match a[i].partial_cmp(&b[i]) {
                Some(std::cmp::Ordering::Equal) | None => continue,
                Some(o) => return o,
            }
        }
        std::cmp::Ordering::Equal
    });
}

fn enumerate_subsets(
    total: usize,
    size: usize,
    buf: &mut Vec<usize>,
    depth: usize,
    start: usize,
    visit: &mut impl FnMut(&[usize]),
) {
    if depth == size {
        visit(buf);
        return;
    }
    for i in start..total {
        buf[depth] = i;
        enumerate_subsets(total, size, buf, depth + 1, i + 1, visit);
    }
}

/// Generalized cross product: the unnormalized normal of the hyperplane
/// spanned by n-1 vectors, via cofactor expansion. Multilinear in its
/// arguments, which the curvature routines exploit to differentiate it.
pub(crate) fn hyperplane_cross(vs: &[&DVector<f64>], n: usize) -> DVector<f64> {
    debug_assert_eq!(vs.len(), n - 1);
    let mut w = DVector::zeros(n);
    for i in 0..n {
        let minor = DMatrix::from_fn(n - 1, n - 1, |r, c| {
            let col = if c < i { c } else { c + 1 };
            vs[r][col]
        });
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        w[i] = sign * minor.determinant();
    }
    w
}

/// Unit normal of the hyperplane spanned by n-1 vectors. None when the span
/// is degenerate.
fn hyperplane_normal(vs: &[&DVector<f64>], n: usize) -> Option<DVector<f64>> {
    let w = hyperplane_cross(vs, n);
    let norm = w.norm();
    if norm < RAY_TOL {
        None
    } else {
        Some(w / norm)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::{dmatrix, dvector};

    #[test]
    fn circular_chart_radius_is_tangent_of_reduced_angle() {
        let cone = Cone::circular(dvector![0.0, 0.0, 1.0], std::f64::consts::FRAC_PI_4).unwrap();
        let chart = cone.footprint_chart(std::f64::consts::FRAC_PI_8).unwrap();
        assert_relative_eq!(chart.domain_radius(), 0.41421356237309503, epsilon = 1e-12);
    }

    #[test]
    fn circular_dual_swaps_axis_and_complements_angle() {
        let cone = Cone::circular(dvector![1.0, 2.0, 2.0], 0.6).unwrap();
        let dual = cone.dual();
        match dual.kind() {
            ConeKind::Circular { axis, half_angle } => {
                assert_relative_eq!(*half_angle, std::f64::consts::FRAC_PI_2 - 0.6);
                assert_relative_eq!(axis[0], -1.0 / 3.0, epsilon = 1e-14);
            }
            _ => panic!("expected circular dual"),
        }
        let back = dual.dual();
        match back.kind() {
            ConeKind::Circular { axis, half_angle } => {
                assert_relative_eq!(*half_angle, 0.6, epsilon = 1e-14);
                assert!((axis - dvector![1.0, 2.0, 2.0].normalize()).norm() < 1e-14);
            }
            _ => panic!(),
        }
    }

    #[test]
    fn orthant_facets_are_negative_axes() {
        let cone = Cone::orthant(3).unwrap();
        match cone.kind() {
            ConeKind::Polyhedral { generators, facet_normals } => {
                assert_eq!(generators.len(), 3);
                assert_eq!(facet_normals.len(), 3);
                for f in facet_normals {
                    assert_eq!(f.iter().filter(|v| **v != 0.0).count(), 1);
                    assert!(f.min() == -1.0);
                }
            }
            _ => panic!(),
        }
    }

    #[test]
    fn polyhedral_construction_matches_orthant() {
        let built = Cone::polyhedral(vec![
            dvector![2.0, 0.0, 0.0],
            dvector![0.0, 5.0, 0.0],
            dvector![0.0, 0.0, 1.0],
        ])
        .unwrap();
        let orthant = Cone::orthant(3).unwrap();
        match (built.kind(), orthant.kind()) {
            (
                ConeKind::Polyhedral { generators: g1, facet_normals: f1 },
                ConeKind::Polyhedral { generators: g2, facet_normals: f2 },
            ) => {
                for (a, b) in g1.iter().zip(g2).chain(f1.iter().zip(f2)) {
                    assert!((a - b).norm() < 1e-12);
                }
            }
            _ => panic!(),
        }
    }

    #[test]
    fn redundant_interior_ray_is_pruned() {
        let cone = Cone::polyhedral(vec![
            dvector![1.0, 0.0],
            dvector![1.0, 1.0],
            dvector![0.0, 1.0],
        ])
        .unwrap();
        match cone.kind() {
            ConeKind::Polyhedral { generators, .. } => assert_eq!(generators.len(), 2),
            _ => panic!(),
        }
    }

    #[test]
    fn unpointed_input_is_rejected() {
        let e = Cone::polyhedral(vec![
            dvector![1.0, 0.0],
            dvector![-1.0, 0.0],
            dvector![0.0, 1.0],
        ]);
        assert!(matches!(e, Err(Error::InvalidCone(_))));
    }

    #[test]
    fn dual_involution_on_a_skew_cone() {
        let cone = Cone::polyhedral(vec![
            dvector![1.0, 0.1, 0.0],
            dvector![0.2, 1.0, 0.1],
            dvector![0.0, 0.3, 1.0],
            dvector![0.5, 0.5, 0.9],
        ])
        .unwrap();
        let back = cone.dual().dual();
        match (cone.kind(), back.kind()) {
            (
                ConeKind::Polyhedral { generators: g1, .. },
                ConeKind::Polyhedral { generators: g2, .. },
            ) => {
                assert_eq!(g1.len(), g2.len());
                for (a, b) in g1.iter().zip(g2) {
                    assert!((a - b).norm() < 1e-12);
                }
            }
            _ => panic!(),
        }
    }

    #[test]
    fn dual_pairing_is_nonpositive() {
        let cone = Cone::polyhedral(vec![
            dvector![1.0, 0.0, 0.2],
            dvector![0.1, 1.0, 0.0],
            dvector![0.0, 0.2, 1.0],
        ])
        .unwrap();
        let dual = cone.dual();
        let chart = cone.footprint_chart(0.01).unwrap();
        let dchart = dual.footprint_chart(0.01).unwrap();
        let r = chart.domain_radius();
        let rd = dchart.domain_radius();
        for i in 0..7 {
            for j in 0..7 {
                let x = chart.direction(&[
                    r * 0.9 * (i as f64 / 6.0 - 0.5),
                    r * 0.9 * ((i * j % 5) as f64 / 4.0 - 0.5),
                ]);
                let u = dchart.direction(&[
                    rd * 0.9 * (j as f64 / 6.0 - 0.5),
                    rd * 0.9 * ((i + j) as f64 % 3.0 / 2.0 - 0.5),
                ]);
                assert!(x.dot(&u) <= 1e-12, "pairing {}", x.dot(&u));
            }
        }
    }

    #[test]
    fn orthant_axis_is_the_diagonal() {
        let cone = Cone::orthant(3).unwrap();
        let axis = cone.axis_direction();
        let diag = dvector![1.0, 1.0, 1.0].normalize();
        assert!((axis - diag).norm() < 1e-6);
    }

    #[test]
    fn chart_coordinates_round_trip() {
        let cone = Cone::circular(dvector![0.3, -0.2, 0.93], 0.9).unwrap();
        let chart = cone.footprint_chart(0.05).unwrap();
        let p = [0.31, -0.17];
        let x = chart.direction(&p) * 2.7;
        let (q, s) = chart.coords(&x).unwrap();
        assert_relative_eq!(q[0], p[0], epsilon = 1e-12);
        assert_relative_eq!(q[1], p[1], epsilon = 1e-12);
        let rebuilt = chart.point(&q) * s;
        assert!((rebuilt - &x).norm() < 1e-12);
    }

    #[test]
    fn chart_direction_angle_matches_radius() {
        let cone = Cone::circular(dvector![0.0, 1.0], 0.8).unwrap();
        let chart = cone.footprint_chart(0.0).unwrap();
        let dir = chart.direction(&[0.5]);
        let angle = dir.dot(chart.axis()).clamp(-1.0, 1.0).acos();
        assert_relative_eq!(angle, 0.5f64.atan(), epsilon = 1e-12);
    }

    #[test]
    fn membership_tracks_slack_sign() {
        let cone = Cone::orthant(2).unwrap();
        assert!(cone.contains(&dvector![1.0, 2.0]));
        assert!(cone.interior_contains(&dvector![1.0, 2.0]));
        assert!(cone.contains(&dvector![1.0, 0.0]));
        assert!(!cone.interior_contains(&dvector![1.0, 0.0]));
        assert!(!cone.contains(&dvector![-0.1, 1.0]));
        assert_relative_eq!(
            cone.angular_slack(&dvector![1.0, 1.0]),
            std::f64::consts::FRAC_PI_4,
            epsilon = 1e-12
        );
    }

    #[test]
    fn rotation_maps_circular_cone() {
        let cone = Cone::circular(dvector![0.0, 1.0], 0.7).unwrap();
        let rot = dmatrix![0.0, -1.0; 1.0, 0.0];
        let img = cone.linear_image(&rot).unwrap();
        match img.kind() {
            ConeKind::Circular { axis, half_angle } => {
                assert_relative_eq!(*half_angle, 0.7);
                assert!((axis - dvector![-1.0, 0.0]).norm() < 1e-12);
            }
            _ => panic!(),
        }
        let shear = dmatrix![1.0, 0.5; 0.0, 1.0];
        assert!(cone.linear_image(&shear).is_err());
    }

    #[test]
    fn shear_maps_polyhedral_cone() {
        let cone = Cone::orthant(2).unwrap();
        let shear = dmatrix![1.0, 0.5; 0.0, 1.0];
        let img = cone.linear_image(&shear).unwrap();
        assert!(img.contains(&dvector![0.5, 1.0]));
        assert!(img.contains(&dvector![1.0, 0.0]));
        assert!(!img.contains(&dvector![0.0, 1.0]));
    }
}
