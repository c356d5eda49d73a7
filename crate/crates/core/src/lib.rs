//! Composition operators `C f = f o map` on weighted `L^p` spaces of rooted
//! trees, materialized at a finite truncation depth.
//!
//! Analytic quantities (norms, isometry, compactness tails, singular values,
//! Schatten sums, traces) live in [`compop`] and [`schatten`]; [`oracle`]
//! recomputes them from a dense matrix to cross-check the formulas.

pub mod commands;
pub mod compop;
pub mod document;
pub mod error;
pub mod lpspace;
pub mod oracle;
pub mod report;
pub mod sample;
pub mod schatten;
pub mod selfmap;
pub mod tree;
pub mod verify;
pub mod weight;

pub use error::{Error, Result};
