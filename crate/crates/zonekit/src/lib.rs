//! Zone diagrams of planar sites under general norms.

pub mod analysis;
pub mod dominance;
pub mod error;
pub mod export;
pub mod norms;
pub mod raster;
pub mod search;
pub mod sites;

pub use error::{Result, ZoneError};
pub use norms::{NormSpec, Vector2};
