//! Non-smooth pseudo-cones with closed-form duality: cones truncated by a
//! half-space and translated (shifted) cones. The two families are copolar
//! to each other, exactly:
//!
//! * truncating `C` at `<w, x> >= h` dualizes to the shift of the dual cone
//!   by `-w/h`;
//! * shifting `D` by an interior apex `z` dualizes to the truncation of the
//!   dual cone at `<-z, x> >= 1`.

use nalgebra::DVector;

use crate::cone::{Cone, ConeKind};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub enum ClassZeroSet {
    /// `{x in C : <w, x> >= level}`; `w` must be strictly positive on the
    /// cone, i.e. `-w` interior to the dual cone.
    Truncated { w: DVector<f64>, level: f64 },
    /// `apex + C` with the apex interior to the cone.
    Shifted { apex: DVector<f64> },
}

impl ClassZeroSet {
    pub fn validate(&self, cone: &Cone) -> Result<()> {
        match self {
            ClassZeroSet::Truncated { w, level } => {
                if !(*level > 0.0) || !level.is_finite() {
                    return Err(Error::InvalidFamily("truncation level must be positive".into()));
                }
                if w.len() != cone.dim() || !(w.norm() > 0.0) {
                    return Err(Error::InvalidFamily("truncation functional must be nonzero".into()));
                }
                match cone.kind() {
                    ConeKind::Polyhedral { generators, .. } => {
                        if generators.iter().any(|g| w.dot(g) <= 1e-10 * w.norm()) {
                            return Err(Error::InvalidFamily(
                                "truncation functional must be strictly positive on the cone".into(),
                            ));
                        }
                    }
                    ConeKind::Circular { axis, .. } => {
                        let along = w.dot(axis);
                        let cross = (w - axis * along).norm();
                        if !(along > 0.0) || cross > 1e-10 * w.norm() {
                            return Err(Error::InvalidFamily(
                                "circular cones truncate along the axis functional only".into(),
                            ));
                        }
                    }
                }
                Ok(())
            }
            ClassZeroSet::Shifted { apex } => {
                if apex.len() != cone.dim() || !cone.interior_contains(apex) {
                    return Err(Error::InvalidFamily(
                        "shift apex must lie in the cone interior".into(),
                    ));
                }
                if let ConeKind::Circular { axis, .. } = cone.kind() {
                    let along = apex.dot(axis);
                    let cross = (apex - axis * along).norm();
                    if cross > 1e-10 * apex.norm() {
                        return Err(Error::InvalidFamily(
                            "circular cones shift along the axis only".into(),
                        ));
                    }
                }
                Ok(())
            }
        }
    }

    pub fn member(&self, cone: &Cone, x: &DVector<f64>) -> bool {
        match self {
            ClassZeroSet::Truncated { w, level } => {
                cone.contains(x) && w.dot(x) >= level - 1e-10 * (1.0 + level.abs())
            }
            ClassZeroSet::Shifted { apex } => cone.contains(&(x - apex)),
        }
    }

    /// Least `t` with `t v` in the set; requires an interior direction.
    pub fn radial(&self, cone: &Cone, v: &DVector<f64>) -> Result<f64> {
        if !cone.interior_contains(v) {
            return Err(Error::OutsideCone);
        }
        match self {
            ClassZeroSet::Truncated { w, level } => Ok(level / w.dot(v)),
            ClassZeroSet::Shifted { apex } => match cone.kind() {
                ConeKind::Polyhedral { facet_normals, .. } => {
                    let mut t = 0.0f64;
                    for f in facet_normals {
                        let denom = f.dot(v);
                        if denom < -1e-300 {
                            t = t.max(f.dot(apex) / denom);
                        }
                    }
                    Ok(t)
                }
                ConeKind::Circular { axis, half_angle } => {
                    // Entry time of the ray into apex + C: the larger root of
                    // the quadratic from squaring the angle condition.
                    let cos2 = half_angle.cos().powi(2);
                    let a2 = axis.dot(v).powi(2) - cos2 * v.norm_squared();
                    let b1 = axis.dot(v) * axis.dot(apex) - cos2 * v.dot(apex);
                    let c0 = axis.dot(apex).powi(2) - cos2 * apex.norm_squared();
                    let disc = (b1 * b1 - a2 * c0).max(0.0);
                    Ok((b1 + disc.sqrt()) / a2)
                }
            },
        }
    }

    /// Support value `sup <u, x>` over the set; plus infinity off the dual
    /// cone.
    pub fn support(&self, cone: &Cone, dual_cone: &Cone, u: &DVector<f64>) -> f64 {
        if !dual_cone.contains(u) {
            return f64::INFINITY;
        }
        match self {
            ClassZeroSet::Truncated { w, level } => match cone.kind() {
                ConeKind::Polyhedral { generators, .. } => {
                    level
                        * generators
                            .iter()
                            .map(|g| u.dot(g) / w.dot(g))
                            .fold(f64::NEG_INFINITY, f64::max)
                }
                ConeKind::Circular { axis, half_angle } => {
                    // The base is a disk of radius m tan(t) centered at m a.
                    let m = level / w.dot(axis);
                    let along = u.dot(axis);
                    let cross = (u - axis * along).norm();
                    m * (along + half_angle.tan() * cross)
                }
            },
            ClassZeroSet::Shifted { apex } => u.dot(apex),
        }
    }

    /// Exact copolar: the dual cone together with the partner set.
    pub fn copolar_parts(&self, cone: &Cone) -> (Cone, ClassZeroSet) {
        let dual = cone.dual();
        let set = match self {
            ClassZeroSet::Truncated { w, level } => ClassZeroSet::Shifted { apex: -w / *level },
            ClassZeroSet::Shifted { apex } => ClassZeroSet::Truncated { w: -apex, level: 1.0 },
        };
        (dual, set)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::dvector;

    fn truncated_orthant() -> (Cone, ClassZeroSet) {
        let cone = Cone::orthant(2).unwrap();
        let set = ClassZeroSet::Truncated { w: dvector![1.0, 1.0], level: 1.0 };
        set.validate(&cone).unwrap();
        (cone, set)
    }

    #[test]
    fn truncated_orthant_support_is_the_larger_coordinate() {
        let (cone, set) = truncated_orthant();
        let dual = cone.dual();
        let u = dvector![-0.5, -2.0];
        assert_relative_eq!(set.support(&cone, &dual, &u), -0.5);
        assert_eq!(set.support(&cone, &dual, &dvector![1.0, -1.0]), f64::INFINITY);
    }

    #[test]
    fn truncated_orthant_copolar_is_the_shifted_negative_orthant() {
        let (cone, set) = truncated_orthant();
        let (dual, star) = set.copolar_parts(&cone);
        star.validate(&dual).unwrap();
        match &star {
            ClassZeroSet::Shifted { apex } => {
                assert_relative_eq!(apex[0], -1.0);
                assert_relative_eq!(apex[1], -1.0);
            }
            _ => panic!("expected a shifted cone"),
        }
        assert!(star.member(&dual, &dvector![-1.0, -1.0]));
        assert!(star.member(&dual, &dvector![-3.0, -1.5]));
        assert!(!star.member(&dual, &dvector![-0.5, -4.0]));
    }

    #[test]
    fn shifted_copolar_round_trips_to_the_same_set() {
        let (cone, set) = truncated_orthant();
        let (dual, star) = set.copolar_parts(&cone);
        let (back_cone, back) = star.copolar_parts(&dual);
        // The representation may rescale, so compare as sets via membership.
        for (x, expect) in [
            (dvector![1.0, 1.0], true),
            (dvector![0.4, 0.7], true),
            (dvector![0.2, 0.2], false),
            (dvector![3.0, 0.1], true),
            (dvector![-0.5, 2.0], false),
        ] {
            assert_eq!(set.member(&cone, &x), expect);
            assert_eq!(back.member(&back_cone, &x), expect, "at {x:?}");
        }
    }

    #[test]
    fn radial_matches_support_reciprocity() {
        // rho_K(v) = -1 / h_{K*}(v) with the copolar's closed-form support.
        let (cone, set) = truncated_orthant();
        let (dual, star) = set.copolar_parts(&cone);
        for v in [dvector![1.0, 1.0], dvector![2.0, 1.0], dvector![0.3, 0.8]] {
            let vn = v.normalize();
            let rho = set.radial(&cone, &vn).unwrap();
            let h = star.support(&dual, &cone, &vn);
            assert_relative_eq!(rho, -1.0 / h, epsilon = 1e-14);
        }
    }

    #[test]
    fn shifted_circular_radial_solves_the_entry_time() {
        let cone = Cone::circular(dvector![0.0, 0.0, 1.0], 0.6).unwrap();
        let apex = dvector![0.0, 0.0, 2.0];
        let set = ClassZeroSet::Shifted { apex: apex.clone() };
        set.validate(&cone).unwrap();
        for v in [
            dvector![0.0, 0.0, 1.0],
            dvector![0.2, 0.1, 1.0],
            dvector![-0.3, 0.25, 1.1],
        ] {
            let t = set.radial(&cone, &v).unwrap();
            assert!(set.member(&cone, &(&v * t)), "entry point not a member");
            assert!(!set.member(&cone, &(&v * (t * (1.0 - 1e-6)))));
            // Bisection on membership agrees.
            let (mut lo, mut hi) = (1e-9, 50.0);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if set.member(&cone, &(&v * mid)) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            assert_relative_eq!(t, hi, epsilon = 1e-9);
        }
    }

    #[test]
    fn axis_aligned_shift_along_circular_axis_required() {
        let cone = Cone::circular(dvector![0.0, 0.0, 1.0], 0.6).unwrap();
        let bad = ClassZeroSet::Shifted { apex: dvector![0.2, 0.0, 1.0] };
        assert!(bad.validate(&cone).is_err());
    }

    #[test]
    fn truncation_functional_must_be_positive_on_the_cone() {
        let cone = Cone::orthant(2).unwrap();
        let bad = ClassZeroSet::Truncated { w: dvector![1.0, -0.5], level: 1.0 };
        assert!(bad.validate(&cone).is_err());
    }
}
