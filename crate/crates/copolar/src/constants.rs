//! Default numeric parameters, collected in one table.
//!
//! Everything here can be overridden per call (step policies, sample specs)
//! or per scenario (margins, tolerances); these are the values used when the
//! caller does not say otherwise.

/// Angular margin (radians) for audit sample grids inside a footprint.
pub const GRID_MARGIN: f64 = 0.12;

/// Angular guard for numerical suprema over a footprint. Kept tiny: support
/// maximizers legitimately approach the cone boundary when the functional
/// nears the dual boundary, so anything larger clips them.
pub const SUP_MARGIN: f64 = 2e-3;

/// Angular margin for the copolar support cache domain, indexed by chart
/// dimension minus one. Planar charts stay tight; surface charts give up a
/// little reach so the disk domain keeps spectral accuracy near its rim.
pub const CACHE_MARGIN: [f64; 3] = [0.03, 0.05, 0.08];

/// Chebyshev nodes per chart dimension for the copolar support cache,
/// indexed by chart dimension minus one.
pub const CACHE_NODES: [usize; 3] = [129, 65, 17];

/// Coarse scan sizes for cap maximization, indexed by chart dimension minus one.
pub const SCAN_POINTS: [usize; 3] = [241, 600, 1500];

/// Local refinements started from the best scan points.
pub const DEFAULT_RESTARTS: usize = 4;

/// Value tolerance for cap maximization refinement.
pub const SUP_TOL: f64 = 1e-13;

/// Support values above this (i.e. closer to zero) at interior samples mean
/// the copolar is degenerate.
pub const DEGENERATE_SUPPORT_TOL: f64 = 1e-10;

/// Noise budgets for cross-route agreement checks.
pub const BUDGET_ANALYTIC: f64 = 1e-8;
pub const BUDGET_FD_CURVATURE: f64 = 1e-4;
pub const BUDGET_FD_PRODUCT: f64 = 5e-3;

/// Bracket floor and relative tolerance for radial bisection on fields that
/// only expose membership.
pub const RADIAL_BISECT_LO: f64 = 1e-8;
pub const RADIAL_BISECT_REL: f64 = 1e-12;

/// Effective evaluation noise per radial-field route, used to pick finite
/// difference steps: closed-form values sit at machine epsilon, interpolated
/// caches carry the interpolation residual (growing with chart dimension,
/// indexed by chart dimension minus one).
pub const VALUE_NOISE_CLOSED_FORM: f64 = 5e-15;
pub const VALUE_NOISE_CACHE: [f64; 3] = [1e-13, 1e-11, 1e-10];
/// Live support maximizations answer off-coverage gauge queries; their
/// accuracy is set by the optimizer tolerance, not the interpolant.
pub const VALUE_NOISE_LIVE: f64 = 1e-10;

/// Default sample counts for audits.
pub const DEFAULT_DIRECTIONS: usize = 200;
pub const DEFAULT_BOUNDARY_POINTS: usize = 50;
pub const DEFAULT_PAIR_SAMPLES: usize = 1000;
pub const DEFAULT_CRUCIAL_PAIRS: usize = 30;
pub const DEFAULT_TENSOR_POINTS: usize = 10;

/// Radial shells for interior-point grids.
pub const DEFAULT_SHELLS: [f64; 2] = [1.0, 3.0];

/// Number of worst offenders kept in an audit report.
pub const WORST_KEPT: usize = 3;

/// Default tolerance for an audit id, depending on whether the family carries
/// analytic derivatives ("analytic") or differentiates numerically.
pub fn default_tolerance(audit: &str, analytic: bool) -> f64 {
    match (audit, analytic) {
        ("involution", true) => 1e-8,
        ("involution", false) => 1e-8,
        ("involution_set", _) => 1e-6,
        ("eq1_1", _) => 1e-9,
        ("eq2_1n_saddle", true) => 1e-8,
        ("eq2_1n_saddle", false) => 1e-7,
        ("eq2_1n_sup", _) => 1e-8,
        ("eq3_2", true) => 1e-7,
        ("eq3_2", false) => 1e-6,
        ("eq4_1", true) => 1e-9,
        ("eq4_1", false) => 1e-4,
        // Analytic derivatives on the primal side, interpolated copolar
        // support on the dual side.
        ("eq4_1_mixed", _) => 1e-5,
        ("affine_sphere", true) => 1e-5,
        ("affine_sphere", false) => 1e-5,
        ("eq5_1", true) => 1e-8,
        ("eq5_1", false) => 1e-4,
        ("eq5_2", true) => 1e-8,
        ("eq5_2", false) => 1e-3,
        ("equivariance", _) => 1e-8,
        _ => 1e-8,
    }
}
