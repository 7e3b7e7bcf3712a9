//! Numeric building blocks: double-double arithmetic, quadrature, fitting.

pub mod dd;
pub mod fit;
pub mod quad;
pub mod sum;

pub use dd::Dd;
