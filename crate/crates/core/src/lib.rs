//! Tail bounds for sums of 0-1 indicator variables (independent,
//! heterogeneous, or negatively related), together with the exact machinery
//! needed to verify every bound numerically:
//!
//! - [`catalog`]: the closed-form bound catalog, evaluated in log domain.
//! - [`chernoff`]: numeric Chernoff optimization over MGFs, the two-point
//!   measure reduction and the moment-based MGF estimates behind the
//!   variance-aware bounds.
//! - [`exact`]: exact-rational distributions, tails, MGFs and cumulants for
//!   the independent families (the test oracles).
//! - [`dependent`]: urn models with negatively related indicators, their
//!   couplings, and the conditioned-binomial witness search.
//! - [`pgf`]: probability generating functions over exact rationals,
//!   real-rootedness decided by Sturm sequences, and factorization into
//!   independent Bernoulli components.
//! - [`feller`]: cumulant-corrected expansion bounds on their proven
//!   window.
//!
//! Everything probability-valued is carried in natural-log domain;
//! vacuous bounds above 1 are representable and never clamped silently.

pub mod bound;
pub mod catalog;
pub mod chernoff;
pub mod dependent;
pub mod error;
pub mod exact;
pub mod feller;
pub mod pgf;
pub mod rational;
pub mod spec;

pub use bound::{BoundId, LogBound};
pub use error::{Error, Result};
pub use spec::{IndicatorSumSpec, Side, TailQuery};
