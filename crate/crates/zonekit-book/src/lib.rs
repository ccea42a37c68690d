//! The guide in `book/src`, one module per chapter, so that `cargo test`
//! runs every snippet.

#[doc = include_str!("../../../book/src/intro.md")]
pub mod intro {}

#[doc = include_str!("../../../book/src/norms.md")]
pub mod norms {}

#[doc = include_str!("../../../book/src/sites-and-rasters.md")]
pub mod sites_and_rasters {}

#[doc = include_str!("../../../book/src/dominance.md")]
pub mod dominance {}

#[doc = include_str!("../../../book/src/checks.md")]
pub mod checks {}

#[doc = include_str!("../../../book/src/nonuniqueness.md")]
pub mod nonuniqueness {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
