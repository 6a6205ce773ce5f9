//! Cumulant-corrected tail bounds derived from the classical expansion of
//! the tail of a standardized sum: the first two correction coefficients
//! and the two closed-form bounds they yield on the window
//! `sigma <= a <= sigma^2 / 24`.

use crate::bound::{BoundId, LogBound};
use crate::error::{Error, Result};
use crate::exact::CumulantSet;
use crate::spec::Side;

/// First two coefficients of the tail-correction series, expressed through
/// the cumulants: `q1 = -k3/(3 s^3)`, `q2 = -k4/(12 s^4) + k3^2/(4 s^6)`.
/// Equivalently `q1 = -g1/3` and `q2 = -g2/12 + g1^2/4` in terms of the
/// skewness `g1` and excess `g2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FellerCoefficients {
    pub q1: f64,
    pub q2: f64,
}

pub fn feller_coefficients(kappas: &CumulantSet) -> Result<FellerCoefficients> {
    let s2 = kappas.kappa2;
    if !s2.is_finite() || s2 <= 0.0 {
        return Err(Error::domain(format!("needs Var X > 0, got {s2}")));
    }
    let s3 = s2 * s2.sqrt();
    let q1 = -kappas.kappa3 / (3.0 * s3);
    let q2 = -kappas.kappa4 / (12.0 * s2 * s2) + kappas.kappa3 * kappas.kappa3 / (4.0 * s3 * s3);
    Ok(FellerCoefficients { q1, q2 })
}

/// Expansion-based tail bound on the window `sigma <= a <= sigma^2/24`
/// (enforced strictly; the remainder control behind the derivation only
/// covers that window).
///
/// Without a third cumulant the exponent is
/// `-(a^2/2s^2)(1 - (24/7) a/s^2)` and is the same for both tails. With
/// `kappa3` supplied the exponent keeps the first-order term explicitly:
/// `-(a^2/2s^2)(1 - (288/7) a^2/s^4 -+ a k3/(3 s^4))`, the sign of the
/// odd term flipping for the lower tail.
pub fn feller_tail_bound(
    side: Side,
    a: f64,
    sigma: f64,
    kappa3: Option<f64>,
) -> Result<LogBound> {
    if !sigma.is_finite() || sigma <= 0.0 {
        return Err(Error::domain(format!("needs sigma > 0, got {sigma}")));
    }
    let s2 = sigma * sigma;
    if a.is_nan() || a < sigma || a > s2 / 24.0 {
        return Err(Error::precondition(format!(
            "a = {a} outside the proven window [{sigma}, {}] (empty unless sigma >= 24)",
            s2 / 24.0
        )));
    }
    let lead = a * a / (2.0 * s2);
    let (id, correction) = match kappa3 {
        None => (BoundId::B1_20, 1.0 - 24.0 / 7.0 * a / s2),
        Some(k3) => {
            let sign = match side {
                Side::Upper => 1.0,
                Side::Lower => -1.0,
            };
            (
                BoundId::B1_23,
                1.0 - 288.0 / 7.0 * a * a / (s2 * s2) - sign * a * k3 / (3.0 * s2 * s2),
            )
        }
    };
    Ok(LogBound::new(id, -lead * correction))
}
