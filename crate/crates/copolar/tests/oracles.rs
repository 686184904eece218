//! Cross-checks of the numerical machinery against closed forms derived
//! independently inside this file. Nothing here consults the library's own
//! attached copolar gauges for expectations.

use copolar::diffgeo::{crucial_map, curvature_sample, GaugeChart};
use copolar::na::{dvector, DMatrix, DVector};
use copolar::{Cone, PseudoCone};

/// Support of `{x1 x2 >= c}` in the open negative quadrant, by hand:
/// maximize `u1 t + u2 c / t`.
fn hyperbola_support(c: f64, u: &DVector<f64>) -> f64 {
    -2.0 * (c * u[0] * u[1]).sqrt()
}

/// Support of `{x1 x2 x3 >= c}` on the negative orthant: the stationary
/// point of `<u, x>` on the level surface.
fn calabi_support(c: f64, u: &DVector<f64>) -> f64 {
    -3.0 * (c * (-u[0]) * (-u[1]) * (-u[2])).cbrt()
}

#[test]
fn numeric_support_matches_the_independent_closed_forms() {
    let k = PseudoCone::hyperbola(0.7).unwrap();
    // Directions include nearly edge-aligned functionals: the maximizer then
    // hugs the opposite boundary ray and the search must still reach it.
    for u in [
        dvector![-1.0, -1.0],
        dvector![-2.5, -0.3],
        dvector![-0.05, -1.0],
        dvector![-1.0, -0.04],
    ] {
        let h = k.support_computed(&u).unwrap();
        let want = hyperbola_support(0.7, &u);
        assert!(
            (h - want).abs() <= 1e-9 * want.abs(),
            "hyperbola support at {u:?}: {h} vs {want}"
        );
    }

    let k3 = PseudoCone::calabi(1.3).unwrap();
    for u in [
        dvector![-1.0, -1.0, -1.0],
        dvector![-0.1, -1.0, -2.0],
        dvector![-3.0, -0.2, -0.9],
    ] {
        let h = k3.support_computed(&u).unwrap();
        let want = calabi_support(1.3, &u);
        assert!(
            (h - want).abs() <= 1e-8 * want.abs(),
            "calabi support at {u:?}: {h} vs {want}"
        );
    }
}

#[test]
fn copolar_cache_reports_a_small_build_deviation() {
    // Closed-form copolar gauges are attached to the product families, so
    // the cache build cross-checks every node against them and records the
    // worst relative deviation.
    let dev2 = PseudoCone::hyperbola(1.0)
        .unwrap()
        .copolar()
        .unwrap()
        .copolar_build_deviation()
        .expect("cross-checked build records a deviation");
    assert!(dev2 < 1e-9, "hyperbola cache deviation {dev2:.3e}");

    let dev3 = PseudoCone::calabi(1.0)
        .unwrap()
        .copolar()
        .unwrap()
        .copolar_build_deviation()
        .expect("cross-checked build records a deviation");
    assert!(dev3 < 1e-7, "calabi cache deviation {dev3:.3e}");
}

/// The perturbed branch is the graph of `y = 1/x + delta/x^3`. Curvature of
/// a graph and the tangent-line characterization of the crucial map give
/// two oracles that bypass the gauge entirely.
fn perturbed_point(delta: f64, x: f64) -> (DVector<f64>, f64, f64) {
    let y = 1.0 / x + delta / x.powi(3);
    let dy = -1.0 / (x * x) - 3.0 * delta / x.powi(4);
    let ddy = 2.0 / x.powi(3) + 12.0 * delta / x.powi(5);
    (dvector![x, y], dy, ddy)
}

#[test]
fn perturbed_curvature_matches_the_graph_formula() {
    let delta = 0.3;
    let k = PseudoCone::perturbed_hyperbola(delta).unwrap();
    let chart = GaugeChart::new(k.cone(), k.gauge().unwrap().clone()).unwrap();
    for x in [0.8, 1.0, 1.6] {
        let (pt, dy, ddy) = perturbed_point(delta, x);
        let p = chart.coords_of(&pt).unwrap();
        let s = curvature_sample(&chart, &p).unwrap();
        assert!((&s.x - &pt).norm() < 1e-9, "chart must reproduce the graph point");
        let want = ddy.abs() / (1.0 + dy * dy).powf(1.5);
        let rel = (s.kappa() - want).abs() / want;
        assert!(rel < 1e-6, "graph curvature at x={x}: {} vs {want} (rel {rel:.2e})", s.kappa());
    }
}

#[test]
fn perturbed_crucial_map_solves_the_tangent_line_system() {
    let delta = 0.3;
    let k = PseudoCone::perturbed_hyperbola(delta).unwrap();
    let gauge = k.gauge().unwrap();
    for x in [0.9, 1.3] {
        let (pt, dy, _) = perturbed_point(delta, x);
        // The image pairs to -1 with the point and annihilates the tangent.
        let m = DMatrix::from_row_slice(2, 2, &[pt[0], pt[1], 1.0, dy]);
        let rhs = dvector![-1.0, 0.0];
        let want = m.lu().solve(&rhs).unwrap();
        let got = crucial_map(gauge.as_ref(), &pt).unwrap();
        assert!(
            (&got - &want).norm() < 1e-8,
            "crucial map at x={x}: {got:?} vs {want:?}"
        );
    }
}

#[test]
fn truncated_orthant_dualizes_to_the_documented_shift() {
    // K = {x >= 0, x1 + x2 >= 2}; K* must be the negative quadrant shifted
    // to apex (-1/2, -1/2), with equality at the matching face.
    let k = PseudoCone::truncated_cone(Cone::orthant(2).unwrap(), Some(dvector![1.0, 1.0]), 2.0)
        .unwrap();
    let kstar = k.copolar().unwrap();
    assert!(kstar.member(&dvector![-0.5, -0.5]));
    assert!(kstar.member(&dvector![-0.5, -0.8]));
    assert!(!kstar.member(&dvector![-0.45, -0.5]));
    assert!(!kstar.member(&dvector![-0.5, -0.45]));

    // Pairing inequality on a boundary pair, tight for the apex.
    let x = dvector![1.0, 1.0];
    assert!(k.member(&x));
    assert!((x.dot(&dvector![-0.5, -0.5]) + 1.0).abs() < 1e-12);
}

#[test]
fn shifted_cone_dualizes_to_the_documented_truncation() {
    let apex = dvector![0.6, 1.1];
    let k = PseudoCone::shifted_cone(Cone::orthant(2).unwrap(), apex.clone()).unwrap();
    let kstar = k.copolar().unwrap();
    // K* = {u <= 0 : <u, apex> <= -1}.
    assert!(kstar.member(&dvector![-1.0, -0.4]));
    assert!(!kstar.member(&dvector![-0.2, -0.2]));
    for u in [dvector![-1.0, -0.4], dvector![-2.0, -0.1]] {
        assert!(u.dot(&apex) <= -1.0 + 1e-12);
    }
    // And the involution returns the original set exactly.
    let back = kstar.copolar().unwrap();
    for v in [dvector![1.0, 1.0], dvector![0.4, 1.7]] {
        let a = k.radial(&v).unwrap();
        let b = back.radial(&v).unwrap();
        assert!((a - b).abs() < 1e-12 * a.abs());
    }
}

#[test]
fn support_cache_evaluates_at_off_grid_directions() {
    // Spot checks of the interpolated copolar gauge against the independent
    // closed form, at directions that are not cache nodes.
    let k = PseudoCone::hyperbola(1.0).unwrap();
    let kstar = k.copolar().unwrap();
    for u in [dvector![-1.37, -0.41], dvector![-0.93, -1.618]] {
        let got = kstar.gauge_value(&u);
        let want = -hyperbola_support(1.0, &u);
        assert!(
            (got - want).abs() < 1e-9 * want.abs(),
            "interpolated gauge at {u:?}: {got} vs {want}"
        );
    }
}
