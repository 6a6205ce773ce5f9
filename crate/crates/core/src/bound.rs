//! The log-domain carrier for every tail bound in the catalog, and the
//! identifiers that name them.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::spec::Side;

/// Identifier of a bound formula. The string forms (`"1.4a"`, `"3.8"`, ...)
/// are the stable names used by the CLI and reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[allow(non_camel_case_types)]
pub enum BoundId {
    /// Exact binomial Chernoff bound, upper tail.
    B1_2,
    /// Exact binomial Chernoff bound, lower tail.
    B1_3,
    B1_4a,
    B1_4b,
    B1_4c,
    B1_5,
    B1_6a,
    B1_6b,
    B1_7a,
    B1_7b,
    B1_7c,
    B1_8,
    B1_9,
    B1_10,
    B1_13,
    B1_14a,
    B1_14b,
    B1_15,
    B1_16,
    /// Numerically optimized bound built from the `(1+t)`-moment estimate
    /// (upper tail; needs `n`).
    B3_7,
    /// Closed-form optimized lower-tail bound from `(lambda, sigma2)`.
    B3_8,
    /// `3.8` applied to the reflected sum `n - X` (upper tail; needs `n`).
    B3_8r,
    /// Expansion-based bound without third-moment information.
    B1_20,
    /// Expansion-based bound using the third cumulant.
    B1_23,
    /// Generic numeric Chernoff optimization over an MGF.
    Chernoff,
}

impl BoundId {
    pub const ALL: [BoundId; 25] = [
        BoundId::B1_2,
        BoundId::B1_3,
        BoundId::B1_4a,
        BoundId::B1_4b,
        BoundId::B1_4c,
        BoundId::B1_5,
        BoundId::B1_6a,
        BoundId::B1_6b,
        BoundId::B1_7a,
        BoundId::B1_7b,
        BoundId::B1_7c,
        BoundId::B1_8,
        BoundId::B1_9,
        BoundId::B1_10,
        BoundId::B1_13,
        BoundId::B1_14a,
        BoundId::B1_14b,
        BoundId::B1_15,
        BoundId::B1_16,
        BoundId::B3_7,
        BoundId::B3_8,
        BoundId::B3_8r,
        BoundId::B1_20,
        BoundId::B1_23,
        BoundId::Chernoff,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BoundId::B1_2 => "1.2",
            BoundId::B1_3 => "1.3",
            BoundId::B1_4a => "1.4a",
            BoundId::B1_4b => "1.4b",
            BoundId::B1_4c => "1.4c",
            BoundId::B1_5 => "1.5",
            BoundId::B1_6a => "1.6a",
            BoundId::B1_6b => "1.6b",
            BoundId::B1_7a => "1.7a",
            BoundId::B1_7b => "1.7b",
            BoundId::B1_7c => "1.7c",
            BoundId::B1_8 => "1.8",
            BoundId::B1_9 => "1.9",
            BoundId::B1_10 => "1.10",
            BoundId::B1_13 => "1.13",
            BoundId::B1_14a => "1.14a",
            BoundId::B1_14b => "1.14b",
            BoundId::B1_15 => "1.15",
            BoundId::B1_16 => "1.16",
            BoundId::B3_7 => "3.7",
            BoundId::B3_8 => "3.8",
            BoundId::B3_8r => "3.8r",
            BoundId::B1_20 => "1.20",
            BoundId::B1_23 => "1.23",
            BoundId::Chernoff => "chernoff",
        }
    }

    /// The tail sides this bound is proved for.
    pub fn sides(self) -> &'static [Side] {
        const UPPER: &[Side] = &[Side::Upper];
        const LOWER: &[Side] = &[Side::Lower];
        const BOTH: &[Side] = &[Side::Upper, Side::Lower];
        match self {
            BoundId::B1_2
            | BoundId::B1_4a
            | BoundId::B1_4b
            | BoundId::B1_4c
            | BoundId::B1_5
            | BoundId::B1_6a
            | BoundId::B1_6b
            | BoundId::B3_7
            | BoundId::B3_8r => UPPER,
            BoundId::B1_3
            | BoundId::B1_7a
            | BoundId::B1_7b
            | BoundId::B1_7c
            | BoundId::B1_8
            | BoundId::B1_9
            | BoundId::B1_10
            | BoundId::B1_16
            | BoundId::B3_8 => LOWER,
            BoundId::B1_13
            | BoundId::B1_14a
            | BoundId::B1_14b
            | BoundId::B1_15
            | BoundId::B1_20
            | BoundId::B1_23
            | BoundId::Chernoff => BOTH,
        }
    }

    pub fn supports(self, side: Side) -> bool {
        self.sides().contains(&side)
    }
}

impl std::fmt::Display for BoundId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for BoundId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        BoundId::ALL
            .iter()
            .copied()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::Parse(format!("unknown bound id {s:?}")))
    }
}

/// A tail-probability bound carried in natural-log domain.
///
/// `log_value` may exceed 0 (a vacuous bound above 1); nothing clamps it.
/// `in_validity_domain` is false when the query fell outside the region the
/// bound is meaningful in, in which case `log_value` is `-inf` whenever the
/// exact tail is identically zero there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogBound {
    pub bound_id: BoundId,
    pub log_value: f64,
    pub in_validity_domain: bool,
}

impl LogBound {
    pub fn new(bound_id: BoundId, log_value: f64) -> Self {
        // Normalize -0.0 so zero-deviation queries render cleanly.
        let log_value = if log_value == 0.0 { 0.0 } else { log_value };
        LogBound { bound_id, log_value, in_validity_domain: true }
    }

    pub fn out_of_domain(bound_id: BoundId) -> Self {
        LogBound { bound_id, log_value: f64::NEG_INFINITY, in_validity_domain: false }
    }

    /// The bound as a probability-scale value (may exceed 1).
    pub fn value(&self) -> f64 {
        self.log_value.exp()
    }

    /// The bound clamped to at most 1; opt-in, never applied silently.
    pub fn value_clamped(&self) -> f64 {
        self.value().min(1.0)
    }
}
