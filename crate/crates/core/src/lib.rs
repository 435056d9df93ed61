// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod csvfmt;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod mtf;
pub mod oracle;
pub mod reachset;
pub mod systems;

pub use error::{Error, Result};

/// Guide chapters, compiled as doctests so their snippets track the API.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    struct Introduction;
    #[doc = include_str!("../../../book/src/sets.md")]
    struct Sets;
    #[doc = include_str!("../../../book/src/tubes.md")]
    struct Tubes;
    #[doc = include_str!("../../../book/src/fields.md")]
    struct Fields;
    #[doc = include_str!("../../../book/src/trajectories.md")]
    struct Trajectories;
    #[doc = include_str!("../../../book/src/convergence.md")]
    struct Convergence;
    #[doc = include_str!("../../../book/src/diagnostics.md")]
    struct Diagnostics;
    #[doc = include_str!("../../../book/src/cli.md")]
    struct Cli;
}
