//! Prime counting on the sieve intervals `s_k = [p_k^2, p_{k+1}^2 - 1]`.
//!
//! Sieving by the first `k` primes settles every number below `p_{k+1}^2`, so
//! the naturals split into intervals `s_k` that can each be sieved on their
//! own. This crate computes the exact prime counts `pi_k` of those intervals
//! together with the quantities built on them:
//!
//! * [`analytic`]: the offset logarithmic integral, Mertens products and the
//!   probabilistic estimators `~pi_k`, `~pi(x)`.
//! * [`intervals`]: the interval records themselves.
//! * [`residue`]: coprime counts in arbitrary windows, the windowed Legendre
//!   identity and its truncation.
//! * [`randmodel`]: the shifted-window random model and its references.
//! * [`stats`]: short-window density scans, bias curves, correlations.
//! * [`dataset`]: CSV emission shared by the CLI.
//!
//! Primes are indexed 1-based throughout: `p_1 = 2`.

pub mod analytic;
pub mod dataset;
pub mod error;
pub mod intervals;
pub mod numerics;
pub mod randmodel;
pub mod residue;
pub mod sieve;
pub mod stats;

pub use error::{Error, Result};
pub use sieve::{PrimeTable, SieveConfig, SieveWindow};
