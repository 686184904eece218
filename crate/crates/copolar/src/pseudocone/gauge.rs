//! Gauge fields: the 1-homogeneous functions whose unit level sets are the
//! boundaries of smooth pseudo-cones.
//!
//! A gauge F is positive on the cone interior, 1-homogeneous, and the set
//! `{F >= 1}` is the pseudo-cone; the radial function along a direction v is
//! `1 / F(v)`. Implementations may expose exact derivatives up to third
//! order; consumers fall back to finite differences otherwise, budgeted by
//! `value_noise`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::constants::VALUE_NOISE_CLOSED_FORM;
use crate::numkit::SymTensor3;

pub trait GaugeField: Send + Sync {
    fn dim(&self) -> usize;

    /// Gauge value; positive and finite on the cone interior, anything
    /// non-finite outside it.
    fn value(&self, x: &DVector<f64>) -> f64;

    /// Whether exact derivatives are available.
    fn has_jets(&self) -> bool {
        false
    }

    fn gradient(&self, _x: &DVector<f64>) -> Option<DVector<f64>> {
        None
    }

    fn hessian(&self, _x: &DVector<f64>) -> Option<DMatrix<f64>> {
        None
    }

    fn third(&self, _x: &DVector<f64>) -> Option<SymTensor3> {
        None
    }

    /// Absolute noise floor of `value`, used to pick finite-difference steps.
    fn value_noise(&self) -> f64 {
        VALUE_NOISE_CLOSED_FORM
    }
}

/// Geometric-mean gauge `F(x) = (x_1 ... x_n / c)^(1/n)` on the positive
/// orthant. Its unit level set is the hyperbola branch `x y = c` for n = 2
/// and the corresponding product hypersurface for higher n.
#[derive(Debug, Clone)]
pub struct ProductGauge {
    pub n: usize,
    pub c: f64,
}

impl ProductGauge {
    pub fn new(n: usize, c: f64) -> Self {
        assert!(n >= 2 && c > 0.0);
        ProductGauge { n, c }
    }

    fn in_domain(&self, x: &DVector<f64>) -> bool {
        x.len() == self.n && x.iter().all(|v| *v > 0.0 && v.is_finite())
    }
}

impl GaugeField for ProductGauge {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        if !self.in_domain(x) {
            return f64::NAN;
        }
        let nf = self.n as f64;
        let log = x.iter().map(|v| v.ln()).sum::<f64>() - self.c.ln();
        (log / nf).exp()
    }

    fn has_jets(&self) -> bool {
        true
    }

    // Log-derivative form: with L = log F, L_i = 1/(n x_i) and the higher
    // L-derivatives are diagonal, so the F-jets come from products of the
    // L-jets.
    fn gradient(&self, x: &DVector<f64>) -> Option<DVector<f64>> {
        if !self.in_domain(x) {
            return None;
        }
        let f = self.value(x);
        let nf = self.n as f64;
        Some(DVector::from_fn(self.n, |i, _| f / (nf * x[i])))
    }

    fn hessian(&self, x: &DVector<f64>) -> Option<DMatrix<f64>> {
        if !self.in_domain(x) {
            return None;
        }
        let f = self.value(x);
        let nf = self.n as f64;
        let g: Vec<f64> = (0..self.n).map(|i| 1.0 / (nf * x[i])).collect();
        Some(DMatrix::from_fn(self.n, self.n, |i, j| {
            let second = if i == j { -1.0 / (nf * x[i] * x[i]) } else { 0.0 };
            f * (g[i] * g[j] + second)
        }))
    }

    fn third(&self, x: &DVector<f64>) -> Option<SymTensor3> {
        if !self.in_domain(x) {
            return None;
        }
        let n = self.n;
        let f = self.value(x);
        let nf = n as f64;
        let g: Vec<f64> = (0..n).map(|i| 1.0 / (nf * x[i])).collect();
        let g2 = |i: usize, j: usize| {
            if i == j {
                -1.0 / (nf * x[i] * x[i])
            } else {
                0.0
            }
        };
        let mut t = SymTensor3::zeros(n);
        for i in 0..n {
            for j in i..n {
                for k in j..n {
                    let third = if i == j && j == k {
                        2.0 / (nf * x[i] * x[i] * x[i])
                    } else {
                        0.0
                    };
                    let v = f
                        * (g[i] * g[j] * g[k]
                            + g[i] * g2(j, k)
                            + g[j] * g2(i, k)
                            + g[k] * g2(i, j)
                            + third);
                    t.set_sym(i, j, k, v);
                }
            }
        }
        Some(t)
    }
}

/// Gauge of the linear image `M K` of a pseudo-cone with gauge `inner`:
/// `F(x) = inner(M^-1 x)`, with derivatives pulled back through `M^-1`.
pub struct LinearImageGauge {
    inner: Arc<dyn GaugeField>,
    inv: DMatrix<f64>,
    inv_t: DMatrix<f64>,
}

impl LinearImageGauge {
    pub fn new(inner: Arc<dyn GaugeField>, map: &DMatrix<f64>) -> crate::error::Result<Self> {
        let inv = map
            .clone()
            .try_inverse()
            .ok_or(crate::error::Error::Singular)?;
        let inv_t = inv.transpose();
        Ok(LinearImageGauge { inner, inv, inv_t })
    }
}

impl GaugeField for LinearImageGauge {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        self.inner.value(&(&self.inv * x))
    }

    fn has_jets(&self) -> bool {
        self.inner.has_jets()
    }

    fn gradient(&self, x: &DVector<f64>) -> Option<DVector<f64>> {
        let y = &self.inv * x;
        Some(&self.inv_t * self.inner.gradient(&y)?)
    }

    fn hessian(&self, x: &DVector<f64>) -> Option<DMatrix<f64>> {
        let y = &self.inv * x;
        Some(&self.inv_t * self.inner.hessian(&y)? * &self.inv)
    }

    fn third(&self, x: &DVector<f64>) -> Option<SymTensor3> {
        let y = &self.inv * x;
        Some(self.inner.third(&y)?.pullback(&self.inv))
    }

    fn value_noise(&self) -> f64 {
        self.inner.value_noise()
    }
}

/// Value-only gauge of a hyperbola branch perturbed toward the vertical
/// asymptote: the unit level set is `y = 1/x + delta/x^3` on the positive
/// orthant. For `delta = 0` this is the standard hyperbola; positive delta
/// destroys the quadric structure while keeping the recession cone.
#[derive(Debug, Clone)]
pub struct PerturbedGauge {
    pub delta: f64,
}

impl PerturbedGauge {
    pub fn new(delta: f64) -> Self {
        assert!((0.0..=2.0).contains(&delta));
        PerturbedGauge { delta }
    }
}

impl GaugeField for PerturbedGauge {
    fn dim(&self) -> usize {
        2
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        if x.len() != 2 || !(x[0] > 0.0) || !(x[1] > 0.0) {
            return f64::NAN;
        }
        let (u, v) = (x[0], x[1]);
        // The ray scaling t with t x on the curve satisfies a quadratic in
        // t^2; F = 1/t is the positive root below.
        let ratio = v / u;
        (2.0 * u * v / (1.0 + (1.0 + 4.0 * self.delta * ratio).sqrt())).sqrt()
    }
}
