// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod atom;
pub mod composite;
pub mod dynamics;
pub mod error;
pub mod hilbert;
pub mod observables;
pub mod spectra;
pub mod tolerances;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/overview.md")]
    mod overview {}
    #[doc = include_str!("../../../book/src/observables.md")]
    mod observables {}
    #[doc = include_str!("../../../book/src/spectra.md")]
    mod spectra {}
    #[doc = include_str!("../../../book/src/dynamics.md")]
    mod dynamics {}
    #[doc = include_str!("../../../book/src/composite.md")]
    mod composite {}
    #[doc = include_str!("../../../book/src/atom.md")]
    mod atom {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
