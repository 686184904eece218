//! Compiles the guide's code blocks as doc-tests.
//!
//! Every chapter of `book/` that contains Rust is included here verbatim,
//! so `cargo test` fails the moment the guide drifts from the crate.

#[doc = include_str!("../../../book/src/introduction.md")]
mod introduction {}

#[doc = include_str!("../../../book/src/families.md")]
mod families {}

#[doc = include_str!("../../../book/src/copolarity.md")]
mod copolarity {}

#[doc = include_str!("../../../book/src/saddle.md")]
mod saddle {}

#[doc = include_str!("../../../book/src/curvature.md")]
mod curvature {}

#[doc = include_str!("../../../book/src/tensors.md")]
mod tensors {}

#[doc = include_str!("../../../book/src/audits.md")]
mod audits {}
