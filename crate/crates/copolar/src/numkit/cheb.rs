//! Tensor-product Chebyshev interpolation on boxes.
//!
//! Values are sampled at Chebyshev-Lobatto nodes and evaluated with the
//! barycentric formula, which is stable for the node counts used here. For
//! functions analytic in a neighbourhood of the box the error decays
//! geometrically in the per-axis node count.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
struct ChebAxis {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl ChebAxis {
    fn new(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::degenerate("interpolation axis must be a finite interval"));
        }
        if count < 2 {
            return Err(Error::degenerate("interpolation axis needs at least two nodes"));
        }
        let n = count - 1;
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        let mut nodes = Vec::with_capacity(count);
        let mut weights = Vec::with_capacity(count);
        for j in 0..count {
            let theta = std::f64::consts::PI * j as f64 / n as f64;
            nodes.push(mid + half * theta.cos());
            let mut w = if j % 2 == 0 { 1.0 } else { -1.0 };
            if j == 0 || j == n {
                w *= 0.5;
            }
            weights.push(w);
        }
        Ok(ChebAxis { nodes, weights })
    }

    /// Barycentric coefficient vector: eval = sum_j coeff[j] * f(x_j).
    fn coefficients(&self, x: f64) -> Vec<f64> {
        let m = self.nodes.len();
        let mut coeff = vec![0.0; m];
        for (j, &xj) in self.nodes.iter().enumerate() {
            let dx = x - xj;
            if dx.abs() < 1e-300 {
                coeff.iter_mut().for_each(|c| *c = 0.0);
                coeff[j] = 1.0;
                return coeff;
            }
            coeff[j] = self.weights[j] / dx;
        }
        let total: f64 = coeff.iter().sum();
        coeff.iter_mut().for_each(|c| *c /= total);
        coeff
    }
}

/// Tensor-product Chebyshev interpolant of a scalar function on a box.
#[derive(Debug, Clone)]
pub struct ChebInterp {
    axes: Vec<ChebAxis>,
    values: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl ChebInterp {
    /// Sample `f` at all node tuples of the box `[lo, hi]` and build the
    /// interpolant. Sampling order is row-major over node indices, so the
    /// construction is deterministic.
    pub fn build(
        lo: &[f64],
        hi: &[f64],
        nodes_per_axis: &[usize],
        mut f: impl FnMut(&[f64]) -> Result<f64>,
    ) -> Result<Self> {
        let d = lo.len();
        if d == 0 || hi.len() != d || nodes_per_axis.len() != d {
            return Err(Error::degenerate("mismatched interpolation box description"));
        }
        let axes = (0..d)
            .map(|i| ChebAxis::new(lo[i], hi[i], nodes_per_axis[i]))
            .collect::<Result<Vec<_>>>()?;
        let total: usize = nodes_per_axis.iter().product();
        let mut values = Vec::with_capacity(total);
        let mut idx = vec![0usize; d];
        let mut point = vec![0.0; d];
        for _ in 0..total {
            for (k, &j) in idx.iter().enumerate() {
                point[k] = axes[k].nodes[j];
            }
            let v = f(&point)?;
            if !v.is_finite() {
                return Err(Error::NonFinite { point: point.clone() });
            }
            values.push(v);
            for k in (0..d).rev() {
                idx[k] += 1;
                if idx[k] < nodes_per_axis[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
        Ok(ChebInterp {
            axes,
            values,
            lo: lo.to_vec(),
            hi: hi.to_vec(),
        })
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim()
            && p.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(x, (l, h))| *x >= *l - 1e-12 && *x <= *h + 1e-12)
    }

    /// Barycentric evaluation; contracts the value tensor one axis at a time.
    pub fn eval(&self, p: &[f64]) -> f64 {
        debug_assert_eq!(p.len(), self.dim());
        let mut work = self.values.clone();
        let mut len = work.len();
        // Contract the trailing axis first: values are row-major, so entries
        // for consecutive indices of the last axis are adjacent.
        for axis in (0..self.axes.len()).rev() {
            let coeff = self.axes[axis].coefficients(p[axis]);
            let m = coeff.len();
            let blocks = len / m;
            for b in 0..blocks {
                let base = b * m;
                let mut acc = 0.0;
                for (j, c) in coeff.iter().enumerate() {
                    acc += c * work[base + j];
                }
                work[b] = acc;
            }
            len = blocks;
        }
        work[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_values_at_nodes() {
        let f = |p: &[f64]| Ok(p[0].powi(3) - 2.0 * p[0]);
        let interp = ChebInterp::build(&[-1.0], &[2.0], &[9], f).unwrap();
        let x = interp.axes[0].nodes[3];
        assert!((interp.eval(&[x]) - (x.powi(3) - 2.0 * x)).abs() < 1e-14);
    }

    #[test]
    fn one_dimensional_spectral_accuracy() {
        let f = |p: &[f64]| Ok((p[0]).exp() * (3.0 * p[0]).sin());
        let interp = ChebInterp::build(&[0.0], &[2.0], &[65], f).unwrap();
        let mut worst = 0.0f64;
        for i in 0..400 {
            let x = 2.0 * (i as f64 + 0.5) / 400.0;
            let err = (interp.eval(&[x]) - x.exp() * (3.0 * x).sin()).abs();
            worst = worst.max(err);
        }
        assert!(worst < 1e-12, "worst error {worst:.3e}");
    }

    #[test]
    fn two_dimensional_tensor_accuracy() {
        let f = |p: &[f64]| Ok((p[0] * p[1]).exp() / (1.0 + p[0] * p[0]));
        let interp = ChebInterp::build(&[-1.0, -1.0], &[1.0, 1.0], &[33, 33], f).unwrap();
        let mut worst = 0.0f64;
        for i in 0..30 {
            for j in 0..30 {
                let x = -1.0 + 2.0 * (i as f64 + 0.5) / 30.0;
                let y = -1.0 + 2.0 * (j as f64 + 0.5) / 30.0;
                let exact = (x * y).exp() / (1.0 + x * x);
                worst = worst.max((interp.eval(&[x, y]) - exact).abs());
            }
        }
        assert!(worst < 1e-11, "worst error {worst:.3e}");
    }

    #[test]
    fn three_dimensional_smoke() {
        let f = |p: &[f64]| Ok((p[0] + 2.0 * p[1] - p[2]).cos());
        let interp =
            ChebInterp::build(&[-0.5, -0.5, -0.5], &[0.5, 0.5, 0.5], &[13, 13, 13], f).unwrap();
        let p: [f64; 3] = [0.21, -0.37, 0.11];
        let exact = (p[0] + 2.0 * p[1] - p[2]).cos();
        assert!((interp.eval(&p) - exact).abs() < 1e-10);
    }

    #[test]
    fn rejects_non_finite_samples() {
        // ln is NaN on the negative half of the node set.
        let f = |p: &[f64]| Ok(p[0].ln());
        let e = ChebInterp::build(&[-1.0], &[1.0], &[9], f);
        assert!(e.is_err());
    }
}
