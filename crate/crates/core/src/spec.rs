//! Descriptions of the random variable under study: a sum of 0-1 indicator
//! variables, given either explicitly or through its first two moments.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which tail of `X - EX` is being bounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// `P(X >= EX + a)`
    Upper,
    /// `P(X <= EX - a)`
    Lower,
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::Upper => "upper",
            Side::Lower => "lower",
        }
    }
}

impl std::str::FromStr for Side {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "upper" => Ok(Side::Upper),
            "lower" => Ok(Side::Lower),
            _ => Err(Error::Parse(format!("unknown side {s:?}"))),
        }
    }
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A tail query: side plus the deviation `a >= 0` from the mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailQuery {
    pub side: Side,
    pub a: f64,
}

impl TailQuery {
    pub fn new(side: Side, a: f64) -> Result<Self> {
        if !a.is_finite() || a < 0.0 {
            return Err(Error::domain(format!("deviation a = {a} must be >= 0")));
        }
        Ok(TailQuery { side, a })
    }

    pub fn upper(a: f64) -> Result<Self> {
        Self::new(Side::Upper, a)
    }

    pub fn lower(a: f64) -> Result<Self> {
        Self::new(Side::Lower, a)
    }
}

/// `X = I_1 + ... + I_n` described one of three ways: equal success
/// probabilities, an explicit probability vector, or just the first two
/// moments (with the number of summands optionally known).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum IndicatorSumSpec {
    Homogeneous { n: u64, p: f64 },
    Heterogeneous { ps: Vec<f64> },
    Moments { lambda: f64, sigma2: f64, n: Option<u64> },
}

fn check_probability(name: &'static str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) || !p.is_finite() {
        return Err(Error::InvalidProbability { name, value: p });
    }
    Ok(())
}

impl IndicatorSumSpec {
    pub fn homogeneous(n: u64, p: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("n must be positive"));
        }
        check_probability("p", p)?;
        Ok(IndicatorSumSpec::Homogeneous { n, p })
    }

    pub fn heterogeneous(ps: Vec<f64>) -> Result<Self> {
        for &p in &ps {
            check_probability("ps", p)?;
        }
        Ok(IndicatorSumSpec::Heterogeneous { ps })
    }

    /// Moment-only spec. Requires `sigma2 <= lambda`, with equality only in
    /// the degenerate case `sigma2 = lambda = 0`, and (when `n` is given)
    /// `sigma2 <= lambda - lambda^2/n`, both forced by `Var X = sum p(1-p)`.
    pub fn moments(lambda: f64, sigma2: f64, n: Option<u64>) -> Result<Self> {
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(Error::domain(format!("lambda = {lambda} must be >= 0")));
        }
        if !sigma2.is_finite() || sigma2 < 0.0 {
            return Err(Error::domain(format!("sigma2 = {sigma2} must be >= 0")));
        }
        if sigma2 >= lambda && !(sigma2 == 0.0 && lambda == 0.0) {
            return Err(Error::domain(format!(
                "need sigma2 < lambda for an indicator sum (got {sigma2} >= {lambda})"
            )));
        }
        if let Some(n) = n {
            if n == 0 {
                return Err(Error::domain("n must be positive"));
            }
            let nf = n as f64;
            if lambda > nf {
                return Err(Error::domain(format!("lambda = {lambda} exceeds n = {n}")));
            }
            // Allow a little float slack on the Cauchy-Schwarz cap.
            if sigma2 > lambda - lambda * lambda / nf + 1e-12 {
                return Err(Error::domain(format!(
                    "sigma2 = {sigma2} exceeds lambda - lambda^2/n = {}",
                    lambda - lambda * lambda / nf
                )));
            }
        }
        Ok(IndicatorSumSpec::Moments { lambda, sigma2, n })
    }

    /// `EX`.
    pub fn lambda(&self) -> f64 {
        match self {
            IndicatorSumSpec::Homogeneous { n, p } => *n as f64 * p,
            IndicatorSumSpec::Heterogeneous { ps } => ps.iter().sum(),
            IndicatorSumSpec::Moments { lambda, .. } => *lambda,
        }
    }

    /// `Var X`.
    pub fn sigma2(&self) -> f64 {
        match self {
            IndicatorSumSpec::Homogeneous { n, p } => *n as f64 * p * (1.0 - p),
            IndicatorSumSpec::Heterogeneous { ps } => ps.iter().map(|p| p * (1.0 - p)).sum(),
            IndicatorSumSpec::Moments { sigma2, .. } => *sigma2,
        }
    }

    /// Number of summands, when known.
    pub fn n(&self) -> Option<u64> {
        match self {
            IndicatorSumSpec::Homogeneous { n, .. } => Some(*n),
            IndicatorSumSpec::Heterogeneous { ps } => Some(ps.len() as u64),
            IndicatorSumSpec::Moments { n, .. } => *n,
        }
    }

    /// `n`, or an unsupported-spec error naming the operation that needs it.
    pub fn require_n(&self, what: &str) -> Result<u64> {
        self.n()
            .ok_or_else(|| Error::UnsupportedSpec(format!("{what} needs n, spec is moments-only")))
    }

    /// The averaged success probability `EX / n`.
    pub fn mean_p(&self) -> Result<f64> {
        let n = self.require_n("mean probability")?;
        Ok(self.lambda() / n as f64)
    }

    /// Short descriptor used in reports.
    pub fn describe(&self) -> String {
        match self {
            IndicatorSumSpec::Homogeneous { n, p } => format!("binomial(n={n}, p={p})"),
            IndicatorSumSpec::Heterogeneous { ps } => {
                let parts: Vec<String> = ps.iter().map(|p| format!("{p}")).collect();
                format!("heterogeneous(ps=[{}])", parts.join(","))
            }
            IndicatorSumSpec::Moments { lambda, sigma2, n } => match n {
                Some(n) => format!("moments(lambda={lambda}, sigma2={sigma2}, n={n})"),
                None => format!("moments(lambda={lambda}, sigma2={sigma2})"),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moment_identities() {
        let s = IndicatorSumSpec::heterogeneous(vec![0.2, 0.7]).unwrap();
        assert!((s.lambda() - 0.9).abs() < 1e-15);
        assert!((s.sigma2() - (0.16 + 0.21)).abs() < 1e-15);
        assert_eq!(s.n(), Some(2));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(IndicatorSumSpec::homogeneous(0, 0.5).is_err());
        assert!(IndicatorSumSpec::homogeneous(3, 1.5).is_err());
        assert!(IndicatorSumSpec::heterogeneous(vec![0.5, -0.1]).is_err());
        // sigma2 must stay below lambda...
        assert!(IndicatorSumSpec::moments(2.0, 2.0, None).is_err());
        // ...and below lambda - lambda^2/n when n is known.
        assert!(IndicatorSumSpec::moments(2.0, 1.5, Some(4)).is_err());
        assert!(IndicatorSumSpec::moments(2.0, 1.0, Some(4)).is_ok());
        assert!(IndicatorSumSpec::moments(0.0, 0.0, None).is_ok());
        assert!(TailQuery::upper(-1.0).is_err());
    }
}
