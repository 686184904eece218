//! C-pseudo-cones and the copolarity transform.
//!
//! A pseudo-cone is a nonempty closed convex set `K` with `o` outside and
//! `t K` inside `K` for all `t >= 1`; its recession cone `C` is taken
//! pointed and full-dimensional throughout. The copolar set
//!
//! ```text
//! K* = { u : <u, x> <= -1 for all x in K }
//! ```
//!
//! is a pseudo-cone over the dual cone of `C`, and applying the transform
//! twice returns `K`. This crate builds copolars numerically and then puts
//! the duality through its paces: every identity in the catalog is checked
//! by evaluating both sides along independent computational routes, with
//! tolerances tied to how each side was obtained.
//!
//! The identity catalog, by audit id:
//!
//! - `eq1_1` radial-support reciprocity, `rho_K(v) (-h_{K*}(v)) = 1`;
//! - `eq2_1n` the scale-quadratic saddle value against the unconstrained
//!   Legendre transform (`eq2_1n_saddle` must agree, `eq2_1n_sup` must
//!   diverge with an escape-ray witness);
//! - `eq3_2` gauge composition, `F_{K*}(-grad q(x)) = 1` on the boundary;
//! - `eq4_1` product of centro-affine distances across a crucial pair;
//! - `eq5_1`, `eq5_2` agreement of the centro-affine metrics and opposition
//!   of the cubic forms;
//! - `involution` set-level `K** = K`;
//! - `affine_sphere` constancy of the centro-affine distance (holds on the
//!   product families, fails by design on the perturbed branch);
//! - `equivariance` behaviour under invertible linear maps.
//!
//! ```
//! use copolar::{na::dvector, AuditOptions, PseudoCone};
//!
//! let k = PseudoCone::hyperbola(1.0)?;
//! let kstar = k.copolar()?;
//!
//! // Boundary of {x y >= 1} along the diagonal, and its crucial partner.
//! let x = k.boundary_point(&dvector![1.0, 1.0])?;
//! assert!((&x - dvector![1.0, 1.0]).norm() < 1e-12);
//! assert!(kstar.member(&dvector![-0.5, -0.5]));
//!
//! let opts = AuditOptions { directions: 40, ..AuditOptions::default() };
//! let report = copolar::pseudocone::audit_reciprocity(&k, &kstar, &opts)?;
//! assert!(report.holds(), "{}", report.status_line());
//! # Ok::<(), copolar::Error>(())
//! ```

mod book;

pub mod centroaffine;
pub mod cone;
pub mod constants;
pub mod diffgeo;
pub mod duality;
pub mod error;
pub mod numkit;
pub mod pseudocone;
pub mod report;
pub mod sampling;

pub use nalgebra as na;

pub use cone::Cone;
pub use error::{Error, Result};
pub use pseudocone::{
    audit_equivariance, audit_involution, audit_reciprocity, equivariance_maps, AuditOptions,
    ConeSpec, FamilySpec, PseudoCone,
};
pub use report::{AuditReport, Verdict};
