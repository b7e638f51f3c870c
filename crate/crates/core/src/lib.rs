#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arorder;
pub mod coarsening;
pub mod conjugate;
pub mod error;
pub mod io;
pub mod mathcore;
pub mod mixture;
pub mod trace;
pub mod varsel;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};

/// Library version, recorded in experiment manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/coarsening.md")]
    mod coarsening {}
    #[doc = include_str!("../../../book/src/conjugate.md")]
    mod conjugate {}
    #[doc = include_str!("../../../book/src/autoregression.md")]
    mod autoregression {}
    #[doc = include_str!("../../../book/src/variable-selection.md")]
    mod variable_selection {}
    #[doc = include_str!("../../../book/src/mixtures.md")]
    mod mixtures {}
    #[doc = include_str!("../../../book/src/reproducibility.md")]
    mod reproducibility {}
    #[doc = include_str!("../../../book/src/command-line.md")]
    mod command_line {}
}
