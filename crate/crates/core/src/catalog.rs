//! Closed-form tail bounds for indicator sums, all evaluated in natural-log
//! domain.
//!
//! Mean-based bounds (`1.2`-`1.10`) see the spec through `n` and `p = EX/n`;
//! variance-based bounds (`1.13`-`1.16`) see it through `EX` and `Var X`.
//! Every formula is evaluated exactly as printed, with `ln_1p` wherever the
//! expression contains `ln(1 + x)`, and with the convention `0 * ln 0 = 0`
//! at domain endpoints.
//!
//! Domain policy: a query beyond the range where the tail can be nonzero
//! (`a > n - EX` upper, `a > EX` lower) yields `log_value = -inf` with
//! `in_validity_domain = false` instead of an error, so grid sweeps need no
//! branching.

use crate::bound::{BoundId, LogBound};
use crate::error::{Error, Result};
use crate::spec::{IndicatorSumSpec, Side, TailQuery};

/// `h(y) = (1+y) ln(1+y) - y` for `y >= 0`, the exponent kernel of the
/// Bennett-type bounds.
pub fn bennett_h(y: f64) -> Result<f64> {
    if y.is_nan() || y < 0.0 {
        return Err(Error::domain(format!("h needs y >= 0, got {y}")));
    }
    Ok((1.0 + y) * y.ln_1p() - y)
}

/// Mirror kernel for the lower tail: `(1-y) ln(1-y) + y` on `[0, 1]`,
/// with the value 1 at `y = 1` (the `0 * ln 0 = 0` convention).
pub fn bennett_h_mirror(y: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&y) {
        return Err(Error::domain(format!("mirror kernel needs 0 <= y <= 1, got {y}")));
    }
    if y == 1.0 {
        return Ok(1.0);
    }
    Ok((1.0 - y) * (-y).ln_1p() + y)
}

fn require_positive_lambda(lambda: f64) -> Result<()> {
    if lambda <= 0.0 {
        return Err(Error::precondition(format!("needs EX > 0, got {lambda}")));
    }
    Ok(())
}

/// Relative snap applied at domain boundaries, mirroring the threshold
/// snapping of the exact-tail oracle: a query a float ulp past the edge is
/// the edge.
pub const DOMAIN_SNAP: f64 = 1e-9;

/// True when `a` lies beyond `limit` by more than the boundary snap.
pub fn snapped_beyond(a: f64, limit: f64) -> bool {
    a > limit + DOMAIN_SNAP * limit.abs().max(1.0)
}

/// True when the exact tail is identically zero beyond the queried `a`:
/// above `n - EX` for the upper tail, above `EX` for the lower tail.
fn beyond_support(spec: &IndicatorSumSpec, q: &TailQuery) -> bool {
    match q.side {
        Side::Upper => match spec.n() {
            Some(n) => snapped_beyond(q.a, n as f64 - spec.lambda()),
            None => false,
        },
        Side::Lower => snapped_beyond(q.a, spec.lambda()),
    }
}

/// The optimized binomial Chernoff bound (`1.2` upper / `1.3` lower),
/// extended to any spec with known `n` via `p = EX/n`.
pub fn binomial_chernoff(spec: &IndicatorSumSpec, q: &TailQuery) -> Result<LogBound> {
    let n = spec.require_n("binomial Chernoff bound")? as f64;
    let lambda = spec.lambda();
    if lambda <= 0.0 || lambda >= n {
        return Err(Error::precondition(format!(
            "binomial Chernoff bound needs 0 < EX < n, got EX = {lambda}, n = {n}"
        )));
    }
    let id = match q.side {
        Side::Upper => BoundId::B1_2,
        Side::Lower => BoundId::B1_3,
    };
    if beyond_support(spec, q) {
        return Ok(LogBound::out_of_domain(id));
    }
    let a = q.a;
    // The boundary factors follow the 0 ln 0 = 0 convention; `rem <= 0`
    // rather than `== 0` keeps that stable under the snap above.
    let log_value = match q.side {
        Side::Upper => {
            // -(l+a) ln((l+a)/l) - (n-l-a) ln((n-l-a)/(n-l))
            let t1 = (lambda + a) * (a / lambda).ln_1p();
            let rem = n - lambda - a;
            let t2 = if rem <= 0.0 { 0.0 } else { rem * (-a / (n - lambda)).ln_1p() };
            -(t1 + t2)
        }
        Side::Lower => {
            let rem = lambda - a;
            let t1 = if rem <= 0.0 { 0.0 } else { rem * (-a / lambda).ln_1p() };
            let t2 = (n - lambda + a) * (a / (n - lambda)).ln_1p();
            -(t1 + t2)
        }
    };
    Ok(LogBound::new(id, log_value))
}

/// The family of simple bounds parameterized by `n` and `p = EX/n`
/// (`1.4a`-`1.10`).
pub fn binomial_bound(spec: &IndicatorSumSpec, q: &TailQuery, id: BoundId) -> Result<LogBound> {
    use BoundId::*;
    if !matches!(id, B1_4a | B1_4b | B1_4c | B1_5 | B1_6a | B1_6b | B1_7a | B1_7b | B1_7c | B1_8 | B1_9 | B1_10)
    {
        return Err(Error::precondition(format!("{id} is not a mean-based bound")));
    }
    if !id.supports(q.side) {
        return Err(Error::precondition(format!("bound {id} does not cover the {} tail", q.side)));
    }
    let n = spec.require_n("mean-based bound")? as f64;
    let lambda = spec.lambda();
    require_positive_lambda(lambda)?;
    let p = lambda / n;
    let ql = 1.0 - p;
    if p >= 1.0 {
        return Err(Error::precondition("needs p = EX/n < 1"));
    }
    if id == B1_10 && p > 0.5 {
        return Err(Error::precondition(format!("1.10 needs p <= 1/2, got p = {p}")));
    }
    if beyond_support(spec, q) {
        return Ok(LogBound::out_of_domain(id));
    }
    let a = q.a;
    let npq = lambda * ql;
    let log_value = match id {
        B1_4a => -a * a / (2.0 * (npq + a * (ql - p) / 3.0)),
        B1_4b => -a * a / (2.0 * (npq + a / 3.0)),
        B1_4c => -(a * a / (2.0 * npq)) * (1.0 - a / (3.0 * npq)),
        B1_5 => -lambda * bennett_h(a / lambda)?,
        B1_6a => -a * a / (2.0 * (lambda + a / 3.0)),
        B1_6b => -(a * a / (2.0 * lambda)) * (1.0 - a / (3.0 * lambda)),
        B1_7a => -a * a / (2.0 * (npq - a * (ql - p) / 3.0)),
        B1_7b => -a * a / (2.0 * (npq + a / 3.0)),
        B1_7c => -(a * a / (2.0 * npq)) * (1.0 - a / (3.0 * npq)),
        // In-domain after the snap, so the ratio caps at 1.
        B1_8 => -lambda * bennett_h_mirror((a / lambda).min(1.0))?,
        B1_9 => -a * a / (2.0 * lambda),
        B1_10 => -a * a / (2.0 * npq),
        _ => unreachable!(),
    };
    Ok(LogBound::new(id, log_value))
}

/// The variance-based bounds (`1.13`-`1.16`), valid for any sum of
/// independent indicators with the given `EX` and `Var X`.
pub fn variance_bound(spec: &IndicatorSumSpec, q: &TailQuery, id: BoundId) -> Result<LogBound> {
    use BoundId::*;
    if !matches!(id, B1_13 | B1_14a | B1_14b | B1_15 | B1_16) {
        return Err(Error::precondition(format!("{id} is not a variance-based bound")));
    }
    if !id.supports(q.side) {
        return Err(Error::precondition(format!("bound {id} does not cover the {} tail", q.side)));
    }
    let sigma2 = spec.sigma2();
    if sigma2 <= 0.0 {
        return Err(Error::precondition(format!("needs Var X > 0, got {sigma2}")));
    }
    if id == B1_16 && sigma2 < spec.lambda() / 2.0 {
        return Err(Error::precondition(format!(
            "1.16 needs Var X >= EX/2, got {} < {}",
            sigma2,
            spec.lambda() / 2.0
        )));
    }
    if id == B1_15 && q.a == 0.0 {
        return Err(Error::precondition("1.15 needs a > 0 (it is stated for a >= c Var X with c > 0)"));
    }
    if beyond_support(spec, q) {
        return Ok(LogBound::out_of_domain(id));
    }
    let a = q.a;
    let log_value = match id {
        B1_13 => -sigma2 * bennett_h(a / sigma2)?,
        B1_14a => -a * a / (2.0 * (sigma2 + a / 3.0)),
        B1_14b => -(a * a / (2.0 * sigma2)) * (1.0 - a / (3.0 * sigma2)),
        B1_15 => {
            let c = a / sigma2;
            -((1.0 + 1.0 / c) * c.ln_1p() - 1.0) * a
        }
        B1_16 => -a * a / (2.0 * sigma2),
        _ => unreachable!(),
    };
    Ok(LogBound::new(id, log_value))
}

/// Evaluates any catalog bound by id, dispatching to the closed forms, the
/// optimization engine, or the expansion-based bounds as appropriate.
pub fn evaluate_bound(spec: &IndicatorSumSpec, q: &TailQuery, id: BoundId) -> Result<LogBound> {
    use BoundId::*;
    match id {
        B1_2 | B1_3 => {
            if !id.supports(q.side) {
                return Err(Error::precondition(format!(
                    "bound {id} does not cover the {} tail",
                    q.side
                )));
            }
            binomial_chernoff(spec, q)
        }
        B1_4a | B1_4b | B1_4c | B1_5 | B1_6a | B1_6b | B1_7a | B1_7b | B1_7c | B1_8 | B1_9
        | B1_10 => binomial_bound(spec, q, id),
        B1_13 | B1_14a | B1_14b | B1_15 | B1_16 => variance_bound(spec, q, id),
        B3_7 => crate::chernoff::moment_mgf_upper_tail(spec, q),
        B3_8 => {
            if q.side != Side::Lower {
                return Err(Error::precondition("3.8 is a lower-tail bound"));
            }
            crate::chernoff::two_moment_lower_tail(spec.lambda(), spec.sigma2(), q.a)
        }
        B3_8r => crate::chernoff::reflected_two_moment_upper_tail(spec, q),
        B1_20 | B1_23 => {
            let sigma = spec.sigma2().sqrt();
            let kappa3 = if id == B1_23 {
                match spec {
                    IndicatorSumSpec::Homogeneous { n, p } => {
                        Some(crate::exact::cumulants(&vec![*p; *n as usize])?.kappa3)
                    }
                    IndicatorSumSpec::Heterogeneous { ps } => {
                        Some(crate::exact::cumulants(ps)?.kappa3)
                    }
                    IndicatorSumSpec::Moments { .. } => {
                        return Err(Error::UnsupportedSpec(
                            "1.23 needs the third cumulant, unavailable from moments alone".into(),
                        ))
                    }
                }
            } else {
                None
            };
            crate::feller::feller_tail_bound(q.side, q.a, sigma, kappa3)
        }
        Chernoff => crate::chernoff::chernoff_for_spec(spec, q),
    }
}
