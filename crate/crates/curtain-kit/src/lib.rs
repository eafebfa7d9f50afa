//! curtain-kit: curtains, chains and hyperbolic models on concrete CAT(0)
//! spaces.
//!
//! A curtain is the preimage of a unit "pole" segment under closest-point
//! projection to a geodesic. Chains of curtains measure distance, and
//! well-separated chains induce the hyperbolic metrics probed by the
//! `metrics`, `hyperbolicity`, `rankone` and `boundary` modules. The `cli`
//! module exposes the whole kit as a command-line tool with deterministic,
//! seedable property suites.

pub mod boundary;
pub mod cli;
pub mod curtains;
pub mod error;
pub mod geom;
pub mod hyperbolicity;
pub mod metrics;
pub mod rankone;
pub mod sample;
pub mod spaces;

pub use error::{Error, Result};
