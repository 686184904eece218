//! Central finite differences with Richardson extrapolation.
//!
//! Every stencil used here has an even error series in the step, so one
//! Richardson table (factor 4 per level) serves first, second and third
//! derivatives alike.

use nalgebra::{DMatrix, DVector};

use super::tensor::SymTensor3;
use crate::error::{Error, Result};

/// Step selection for finite differences.
///
/// The effective step at a point is `base_step * (1 + |x|)`. The default base
/// step balances truncation against evaluation noise `eps` for a derivative of
/// the given order: `eps^(1/(order+2))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepPolicy {
    pub base_step: f64,
    pub richardson_levels: usize,
    pub order: u8,
}

impl StepPolicy {
    /// Default policy at machine-epsilon evaluation noise.
    pub fn new(order: u8) -> Self {
        Self::for_noise(order, f64::EPSILON)
    }

    /// Policy tuned for a field whose values carry absolute noise `noise`.
    ///
    /// With one Richardson extrapolation the truncation error of the central
    /// stencils is O(h^4), so the step balancing truncation against
    /// noise / h^order is noise^(1/(order+4)), noticeably larger than the
    /// classical single-stencil choice.
    pub fn for_noise(order: u8, noise: f64) -> Self {
        let base = noise.max(f64::EPSILON).powf(1.0 / (order as f64 + 4.0));
        StepPolicy {
            base_step: base,
            richardson_levels: 2,
            order,
        }
    }

    pub fn with_base_step(mut self, base_step: f64) -> Self {
        self.base_step = base_step;
        self
    }

    pub fn with_levels(mut self, levels: usize) -> Self {
        self.richardson_levels = levels;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.base_step > 0.0 && self.base_step.is_finite()) {
            return Err(Error::degenerate("base_step must be positive"));
        }
        if !(1..=4).contains(&self.richardson_levels) {
            return Err(Error::degenerate("richardson_levels must be in 1..=4"));
        }
        if !(1..=3).contains(&self.order) {
            return Err(Error::degenerate("order must be in 1..=3"));
        }
        Ok(())
    }

    pub fn step_at(&self, x: &DVector<f64>) -> f64 {
        self.base_step * (1.0 + x.norm())
    }
}

/// Richardson table for stencils with error series in even powers of h.
/// `seq[k]` is the stencil value at step h / 2^k.
fn richardson(seq: &[f64]) -> f64 {
    let mut t = seq.to_vec();
    for j in 1..t.len() {
        let f = 4f64.powi(j as i32);
        for k in (j..t.len()).rev() {
            t[k] = (f * t[k] - t[k - 1]) / (f - 1.0);
        }
    }
    *t.last().expect("non-empty richardson table")
}

struct Probe<'a, F: Fn(&DVector<f64>) -> f64> {
    f: &'a F,
    x: DVector<f64>,
}

impl<'a, F: Fn(&DVector<f64>) -> f64> Probe<'a, F> {
    fn at(&self, offsets: &[(usize, f64)]) -> Result<f64> {
        let mut p = self.x.clone();
        for &(i, d) in offsets {
            p[i] += d;
        }
        let v = (self.f)(&p);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite {
                point: p.iter().copied().collect(),
            })
        }
    }
}

/// Gradient by central differences.
pub fn grad_fd<F: Fn(&DVector<f64>) -> f64>(
    f: F,
    x: &DVector<f64>,
    policy: &StepPolicy,
) -> Result<DVector<f64>> {
    policy.validate()?;
    let n = x.len();
    let probe = Probe { f: &f, x: x.clone() };
    let h0 = policy.step_at(x);
    let mut g = DVector::zeros(n);
    for i in 0..n {
        let mut seq = Vec::with_capacity(policy.richardson_levels);
        for lvl in 0..policy.richardson_levels {
            let h = h0 / 2f64.powi(lvl as i32);
            let fp = probe.at(&[(i, h)])?;
            let fm = probe.at(&[(i, -h)])?;
            seq.push((fp - fm) / (2.0 * h));
        }
        g[i] = richardson(&seq);
    }
    Ok(g)
}

/// Hessian by central differences; exactly symmetric by construction.
pub fn hess_fd<F: Fn(&DVector<f64>) -> f64>(
    f: F,
    x: &DVector<f64>,
    policy: &StepPolicy,
) -> Result<DMatrix<f64>> {
    policy.validate()?;
    let n = x.len();
    let probe = Probe { f: &f, x: x.clone() };
    let h0 = policy.step_at(x);
    let f0 = probe.at(&[])?;
    let mut h_mat = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut seq = Vec::new();
        for lvl in 0..policy.richardson_levels {
            let h = h0 / 2f64.powi(lvl as i32);
            let fp = probe.at(&[(i, h)])?;
            let fm = probe.at(&[(i, -h)])?;
            seq.push((fp - 2.0 * f0 + fm) / (h * h));
        }
        h_mat[(i, i)] = richardson(&seq);
        for j in (i + 1)..n {
            let mut seq = Vec::new();
            for lvl in 0..policy.richardson_levels {
                let h = h0 / 2f64.powi(lvl as i32);
                let pp = probe.at(&[(i, h), (j, h)])?;
                let pm = probe.at(&[(i, h), (j, -h)])?;
                let mp = probe.at(&[(i, -h), (j, h)])?;
                let mm = probe.at(&[(i, -h), (j, -h)])?;
                seq.push((pp - pm - mp + mm) / (4.0 * h * h));
            }
            let v = richardson(&seq);
            h_mat[(i, j)] = v;
            h_mat[(j, i)] = v;
        }
    }
    Ok(h_mat)
}

/// Third derivatives as a symmetric tensor.
pub fn third_fd<F: Fn(&DVector<f64>) -> f64>(
    f: F,
    x: &DVector<f64>,
    policy: &StepPolicy,
) -> Result<SymTensor3> {
    policy.validate()?;
    let n = x.len();
    let probe = Probe { f: &f, x: x.clone() };
    let h0 = policy.step_at(x);
    let mut t = SymTensor3::zeros(n);
    for i in 0..n {
        for j in i..n {
            for k in j..n {
                let mut seq = Vec::new();
                for lvl in 0..policy.richardson_levels {
                    let h = h0 / 2f64.powi(lvl as i32);
                    seq.push(third_stencil(&probe, i, j, k, h)?);
                }
                t.set_sym(i, j, k, richardson(&seq));
            }
        }
    }
    Ok(t)
}

fn third_stencil<F: Fn(&DVector<f64>) -> f64>(
    probe: &Probe<'_, F>,
    i: usize,
    j: usize,
    k: usize,
    h: f64,
) -> Result<f64> {
    if i == j && j == k {
        let a = probe.at(&[(i, 2.0 * h)])?;
        let b = probe.at(&[(i, h)])?;
        let c = probe.at(&[(i, -h)])?;
        let d = probe.at(&[(i, -2.0 * h)])?;
        Ok((a - 2.0 * b + 2.0 * c - d) / (2.0 * h * h * h))
    } else if i == j || j == k || i == k {
        // Two equal indices: second difference in the repeated direction,
        // first central difference in the remaining one.
        let (rep, single) = if i == j {
            (i, k)
        } else if j == k {
            (j, i)
        } else {
            (i, j)
        };
        let second = |off: f64| -> Result<f64> {
            let a = probe.at(&[(rep, h), (single, off)])?;
            let b = probe.at(&[(single, off)])?;
            let c = probe.at(&[(rep, -h), (single, off)])?;
            Ok((a - 2.0 * b + c) / (h * h))
        };
        Ok((second(h)? - second(-h)?) / (2.0 * h))
    } else {
        let mut s = 0.0;
        for (si, v_i) in [(1.0, h), (-1.0, -h)] {
            for (sj, v_j) in [(1.0, h), (-1.0, -h)] {
                for (sk, v_k) in [(1.0, h), (-1.0, -h)] {
                    s += si * sj * sk * probe.at(&[(i, v_i), (j, v_j), (k, v_k)])?;
                }
            }
        }
        Ok(s / (8.0 * h * h * h))
    }
}
