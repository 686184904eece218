//! Deterministic maximization of direction fields over spherical caps.
//!
//! The search runs in gnomonic coordinates around the cap center: a coarse
//! low-discrepancy scan of the disk, local refinement from the best scan
//! points (golden-section/Brent in one dimension, Nelder-Mead otherwise) and
//! a final Newton polish on a finite-difference quadratic model. Fields may
//! return non-finite values to mark directions as infeasible; those are
//! treated as minus infinity. The whole pipeline is deterministic and the
//! result is monotone in the number of restarts.

use nalgebra::DVector;

use crate::error::{Error, Result};

/// A spherical cap: directions within `max_angle` of `center`, searched with
/// an angular safety `margin`.
#[derive(Debug, Clone)]
pub struct CapDomain {
    pub center: DVector<f64>,
    pub max_angle: f64,
    pub margin: f64,
}

impl CapDomain {
    pub fn new(center: DVector<f64>, max_angle: f64, margin: f64) -> Result<Self> {
        let norm = center.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::degenerate("cap center must be a nonzero vector"));
        }
        if !(max_angle > 0.0 && max_angle < std::f64::consts::FRAC_PI_2) {
            return Err(Error::degenerate("cap max_angle must lie in (0, pi/2)"));
        }
        if !(margin >= 0.0 && max_angle - margin > 1e-9) {
            return Err(Error::degenerate("cap margin leaves no interior"));
        }
        Ok(CapDomain {
            center: center / norm,
            max_angle,
            margin,
        })
    }

    pub fn effective_angle(&self) -> f64 {
        self.max_angle - self.margin
    }
}

/// Deterministic orthonormal basis of the hyperplane orthogonal to `v`.
pub fn tangent_frame(v: &DVector<f64>) -> Vec<DVector<f64>> {
    let n = v.len();
    let b = v / v.norm();
    // Drop the coordinate axis most aligned with v, Gram-Schmidt the rest in
    // index order. Ties resolve to the smallest index.
    let mut drop = 0;
    let mut best = -1.0;
    for i in 0..n {
        if b[i].abs() > best + 1e-15 {
            best = b[i].abs();
            drop = i;
        }
    }
    let mut frame: Vec<DVector<f64>> = Vec::with_capacity(n - 1);
    for i in 0..n {
        if i == drop {
            continue;
        }
        let mut e = DVector::zeros(n);
        e[i] = 1.0;
        e -= &b * b.dot(&e);
        for f in &frame {
            let fe: &DVector<f64> = f;
            e -= fe * fe.dot(&e);
        }
        let norm = e.norm();
        frame.push(e / norm);
    }
    frame
}

pub(crate) const GOLDEN_ANGLE: f64 = 2.399963229728653;

/// Kronecker sequence offsets per dimension (generalized golden ratios).
pub(crate) fn kronecker_alphas(d: usize) -> Vec<f64> {
    match d {
        1 => vec![0.6180339887498949],
        2 => vec![0.7548776662466927, 0.5698402909980532],
        _ => {
            // Roots of x^(d+1) = x + 1 give well-distributed irrationals.
            let mut g = 1.5f64;
            for _ in 0..64 {
                g = (1.0 + g).powf(1.0 / (d as f64 + 1.0));
            }
            (1..=d).map(|k| (1.0 / g.powi(k as i32)).fract()).collect()
        }
    }
}

/// Deterministic low-discrepancy points in the d-ball of the given radius.
/// d = 1 is a centered uniform grid, d = 2 the sunflower spiral, d >= 3 a
/// rejected Kronecker lattice in the bounding cube.
pub(crate) fn disk_lattice(d: usize, count: usize, radius: f64) -> Vec<Vec<f64>> {
    let mut pts = Vec::with_capacity(count);
    match d {
        1 => {
            for i in 0..count {
                let t = (i as f64 + 0.5) / count as f64;
                pts.push(vec![radius * (2.0 * t - 1.0)]);
            }
        }
        2 => {
            for i in 0..count {
                let r = radius * (((i as f64) + 0.5) / count as f64).sqrt();
                let a = GOLDEN_ANGLE * i as f64;
                pts.push(vec![r * a.cos(), r * a.sin()]);
            }
        }
        _ => {
            let alphas = kronecker_alphas(d);
            let mut i = 0usize;
            let cap = count * 40;
            while pts.len() < count && i < cap {
                i += 1;
                let p: Vec<f64> = alphas
                    .iter()
                    .map(|a| radius * (2.0 * ((i as f64 * a).fract()) - 1.0))
                    .collect();
                if p.iter().map(|v| v * v).sum::<f64>() <= radius * radius {
                    pts.push(p);
                }
            }
        }
    }
    pts
}

struct CapChart {
    center: DVector<f64>,
    frame: Vec<DVector<f64>>,
}

impl CapChart {
    fn direction(&self, p: &[f64]) -> DVector<f64> {
        let mut v = self.center.clone();
        for (pi, f) in p.iter().zip(&self.frame) {
            v += f * *pi;
        }
        let n = v.norm();
        v / n
    }
}

fn eval_or_reject(g: &dyn Fn(&DVector<f64>) -> f64, dir: &DVector<f64>) -> f64 {
    let v = g(dir);
    if v.is_finite() {
        v
    } else {
        f64::NEG_INFINITY
    }
}

/// Maximize a direction field over a spherical cap.
///
/// Returns the best direction and value found. `restarts` local refinements
/// are launched from the best scan points; the returned value never decreases
/// as `restarts` grows. `tol` is the value tolerance for refinement.
pub fn maximize_on_cap(
    g: impl Fn(&DVector<f64>) -> f64,
    cap: &CapDomain,
    restarts: usize,
    tol: f64,
) -> Result<(DVector<f64>, f64)> {
    let (p, v) = maximize_on_cap_coords(&g, cap, restarts, tol, None)?;
    Ok((cap_direction(cap, &p), v))
}

/// Direction corresponding to gnomonic cap coordinates.
pub(crate) fn cap_direction(cap: &CapDomain, p: &[f64]) -> DVector<f64> {
    let chart = CapChart {
        center: cap.center.clone(),
        frame: tangent_frame(&cap.center),
    };
    chart.direction(p)
}

/// Cap maximization in gnomonic coordinates, optionally warm-started.
///
/// With a warm start the full scan is replaced by a small guard scan plus a
/// local refinement around the start; this is sound when the field has a
/// single interior maximum (the case for support objectives on strictly
/// convex radial fields) and is used when sampling many nearby functionals
/// in sequence.
pub(crate) fn maximize_on_cap_coords(
    g: impl Fn(&DVector<f64>) -> f64,
    cap: &CapDomain,
    restarts: usize,
    tol: f64,
    warm: Option<&[f64]>,
) -> Result<(Vec<f64>, f64)> {
    let d = cap.center.len() - 1;
    let radius = cap.effective_angle().tan();
    let chart = CapChart {
        center: cap.center.clone(),
        frame: tangent_frame(&cap.center),
    };
    let gref: &dyn Fn(&DVector<f64>) -> f64 = &g;
    let obj = |p: &[f64]| -> f64 {
        if p.iter().map(|v| v * v).sum::<f64>() > radius * radius {
            return f64::NEG_INFINITY;
        }
        eval_or_reject(gref, &chart.direction(p))
    };

    let full_scan = crate::constants::SCAN_POINTS[(d - 1).min(2)];
    let n_scan = if warm.is_some() {
        (full_scan / 16).max(24)
    } else {
        full_scan
    };
    let mut scan: Vec<(f64, Vec<f64>)> = disk_lattice(d, n_scan, radius)
        .into_iter()
        .map(|p| (obj(&p), p))
        .filter(|(v, _)| v.is_finite())
        .collect();
    if let Some(p0) = warm {
        let v0 = obj(p0);
        if v0.is_finite() {
            scan.push((v0, p0.to_vec()));
        }
    }
    if scan.is_empty() {
        return Err(Error::degenerate(
            "no finite field value on the cap; search region is empty",
        ));
    }
    // Rank by value, breaking exact ties by direction coordinates.
    scan.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap()
            .then_with(|| lex_cmp(&chart.direction(&a.1), &chart.direction(&b.1)))
    });

    let starts = if warm.is_some() { 2 } else { restarts.max(1) };
    let spacing = 2.0 * radius / (n_scan as f64).powf(1.0 / d as f64);
    let mut best = scan[0].clone();
    for (v0, p0) in scan.iter().take(starts) {
        let refined = if d == 1 {
            brent_max(
                |t| obj(&[t]),
                p0[0] - spacing,
                p0[0] + spacing,
                tol,
                200,
            )
        } else {
            nelder_mead_max(&obj, p0, spacing, tol, 400 * d)
        };
        let (mut pv, mut pp) = match refined {
            Some((p, v)) if v.is_finite() => (v, p),
            _ => (*v0, p0.clone()),
        };
        if let Some((p, v)) = quad_polish(&obj, &pp, spacing.min(1e-3)) {
            if v > pv {
                pv = v;
                pp = p;
            }
        }
        if pv > best.0 {
            best = (pv, pp);
        }
    }
    Ok((best.1, best.0))
}

fn lex_cmp(a: &DVector<f64>, b: &DVector<f64>) -> std::cmp::Ordering {
    for i in 0..a.len() {
        match a[i].partial_cmp(&b[i]) {
            Some(std::cmp::Ordering::Equal) | None => continue,
            Some(o) => return o,
        }
    }
    std::cmp::Ordering::Equal
}

/// Golden-section maximization with a parabolic finish, on [a, b].
pub(crate) fn brent_max(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
    max_iter: usize,
) -> Option<(Vec<f64>, f64)> {
    let inv_phi = 0.6180339887498949;
    let (mut lo, mut hi) = (a.min(b), a.max(b));
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..max_iter {
        if hi - lo < 1e-12 * (1.0 + lo.abs() + hi.abs()) {
            break;
        }
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
        if (fc - fd).abs() < tol && (fc.is_finite() && fd.is_finite()) && hi - lo < 1e-7 {
            break;
        }
    }
    let (mut x, mut fx) = if fc > fd { (c, fc) } else { (d, fd) };
    // One parabolic step through (lo, x, hi) when well conditioned.
    let h = (hi - lo).max(1e-13);
    let (fl, fh) = (f(x - h), f(x + h));
    if fl.is_finite() && fh.is_finite() {
        let denom = fl - 2.0 * fx + fh;
        if denom < -1e-300 {
            let step = 0.5 * h * (fl - fh) / denom;
            if step.abs() < h {
                let xn = x + step;
                let fn_ = f(xn);
                if fn_ > fx {
                    x = xn;
                    fx = fn_;
                }
            }
        }
    }
    if fx.is_finite() {
        Some((vec![x], fx))
    } else {
        None
    }
}

/// Nelder-Mead simplex maximization.
pub(crate) fn nelder_mead_max(
    f: &dyn Fn(&[f64]) -> f64,
    start: &[f64],
    scale: f64,
    tol: f64,
    max_iter: usize,
) -> Option<(Vec<f64>, f64)> {
    let d = start.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(d + 1);
    simplex.push((start.to_vec(), f(start)));
    for i in 0..d {
        let mut p = start.to_vec();
        p[i] += scale;
        let v = f(&p);
        simplex.push((p, v));
    }
    let better = |a: f64, b: f64| a > b;
    for _ in 0..max_iter {
        simplex.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal));
        let spread = simplex[0].1 - simplex[d].1;
        let size: f64 = (0..d)
            .map(|i| (simplex[0].0[i] - simplex[d].0[i]).abs())
            .fold(0.0, f64::max);
        if (spread.abs() < tol && size < 1e-8) || size < 1e-12 {
            break;
        }
        let centroid: Vec<f64> = (0..d)
            .map(|i| simplex[..d].iter().map(|(p, _)| p[i]).sum::<f64>() / d as f64)
            .collect();
        let worst = simplex[d].clone();
        let reflect: Vec<f64> = (0..d)
            .map(|i| centroid[i] + (centroid[i] - worst.0[i]))
            .collect();
        let fr = f(&reflect);
        if better(fr, simplex[0].1) {
            let expand: Vec<f64> = (0..d)
                .map(|i| centroid[i] + 2.0 * (centroid[i] - worst.0[i]))
                .collect();
            let fe = f(&expand);
            simplex[d] = if better(fe, fr) { (expand, fe) } else { (reflect, fr) };
        } else if better(fr, simplex[d - 1].1) {
            simplex[d] = (reflect, fr);
        } else {
            let contract: Vec<f64> = (0..d)
                .map(|i| centroid[i] + 0.5 * (worst.0[i] - centroid[i]))
                .collect();
            let fco = f(&contract);
            if better(fco, worst.1) {
                simplex[d] = (contract, fco);
            } else {
                let best = simplex[0].0.clone();
                for s in simplex.iter_mut().skip(1) {
                    let p: Vec<f64> = (0..d)
                        .map(|i| best[i] + 0.5 * (s.0[i] - best[i]))
                        .collect();
                    let v = f(&p);
                    *s = (p, v);
                }
            }
        }
    }
    simplex.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal));
    let best = simplex.swap_remove(0);
    if best.1.is_finite() {
        Some((best.0, best.1))
    } else {
        None
    }
}

/// Newton polish on a central-difference quadratic model of the objective.
fn quad_polish(f: &dyn Fn(&[f64]) -> f64, p: &[f64], h: f64) -> Option<(Vec<f64>, f64)> {
    let d = p.len();
    let mut p = p.to_vec();
    let mut fp = f(&p);
    if !fp.is_finite() {
        return None;
    }
    for _ in 0..3 {
        let mut g = vec![0.0; d];
        let mut hess = nalgebra::DMatrix::<f64>::zeros(d, d);
        for i in 0..d {
            let mut pp = p.clone();
            let mut pm = p.clone();
            pp[i] += h;
            pm[i] -= h;
            let (fp1, fm1) = (f(&pp), f(&pm));
            if !fp1.is_finite() || !fm1.is_finite() {
                return Some((p, fp));
            }
            g[i] = (fp1 - fm1) / (2.0 * h);
            hess[(i, i)] = (fp1 - 2.0 * fp + fm1) / (h * h);
            for j in (i + 1)..d {
                let mut q = p.clone();
                q[i] += h;
                q[j] += h;
                let fpp = f(&q);
                q[j] -= 2.0 * h;
                let fpm = f(&q);
                q[i] -= 2.0 * h;
                let fmm = f(&q);
                q[j] += 2.0 * h;
                let fmp = f(&q);
                if ![fpp, fpm, fmm, fmp].iter().all(|v| v.is_finite()) {
                    return Some((p, fp));
                }
                let v = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
                hess[(i, j)] = v;
                hess[(j, i)] = v;
            }
        }
        let gvec = nalgebra::DVector::from_vec(g);
        let step = match hess.clone().lu().solve(&(-&gvec)) {
            Some(s) => s,
            None => return Some((p, fp)),
        };
        if !step.iter().all(|v| v.is_finite()) || step.norm() > 1e3 * h {
            return Some((p, fp));
        }
        let cand: Vec<f64> = (0..d).map(|i| p[i] + step[i]).collect();
        let fc = f(&cand);
        if fc.is_finite() && fc >= fp {
            p = cand;
            fp = fc;
        } else {
            let half: Vec<f64> = (0..d).map(|i| p[i] + 0.5 * step[i]).collect();
            let fh = f(&half);
            if fh.is_finite() && fh > fp {
                p = half;
                fp = fh;
            }
            break;
        }
        if step.norm() < 1e-12 {
            break;
        }
    }
    Some((p, fp))
}
