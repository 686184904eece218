//! Deterministic sample grids on cone footprints, plus the seeded samplers
//! used by membership-style audits.

use nalgebra::DVector;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cone::Cone;
use crate::error::Result;
use crate::numkit::optim::disk_lattice;

/// Unit directions spread over the cone footprint, every one keeping at
/// least `margin` of angular slack. Purely lattice-based: the same inputs
/// always give the same directions.
pub fn interior_directions(cone: &Cone, margin: f64, count: usize) -> Result<Vec<DVector<f64>>> {
    let chart = cone.footprint_chart(margin)?;
    let d = chart.chart_dim();
    let pts = disk_lattice(d, count, chart.domain_radius() * 0.995);
    Ok(pts.iter().map(|p| chart.direction(p)).collect())
}

/// Seeded interior points at random scales in `[lo, hi]` along lattice
/// directions. Used by audits that need area coverage rather than a grid.
pub fn seeded_ray_scales(seed: u64, count: usize, lo: f64, hi: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| rng.gen_range(lo..hi)).collect()
}

/// Deterministic RNG for audits that sample freely; always ChaCha8 from the
/// given seed so runs reproduce bit-for-bit.
pub fn audit_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
