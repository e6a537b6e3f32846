//! Pseudo-Kac systems of finite groupoids as concrete complex matrices.

// `!(r < tol)` is deliberate: NaN residuals must fail.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod base;
pub mod cli;
pub mod coaction;
pub mod corpus;
pub mod error;
pub mod format;
pub mod groupoid;
pub mod kac;
pub mod report;
pub mod rtp;
pub mod subspace;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/overview.md")]
    struct Overview;
    #[doc = include_str!("../../../book/src/format.md")]
    struct Format;
    #[doc = include_str!("../../../book/src/checks.md")]
    struct Checks;
    #[doc = include_str!("../../../book/src/duality.md")]
    struct Duality;
    #[doc = include_str!("../../../book/src/cli.md")]
    struct Cli;
}
