//! Shared flag resolution: turning `--dist`/`--model` flag groups into
//! library objects, with probabilities parsed as exact rationals so the
//! oracle columns stay exact.

use clap::Args;
use num::rational::BigRational;
use num::traits::One;

use tailbounds::dependent::DependentModel;
use tailbounds::error::{Error, Result};
use tailbounds::exact::{ExactDistribution, RATIONAL_SIZE_LIMIT};
use tailbounds::rational::{parse_rational, rational_to_f64};
use tailbounds::{IndicatorSumSpec, Side};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum DistKind {
    Binomial,
    Heterogeneous,
    Moments,
    Poisson,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ModelKind {
    Hypergeometric,
    Occupancy,
    ConditionedBinomial,
    Barbour,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SideArg {
    Upper,
    Lower,
}

impl From<SideArg> for Side {
    fn from(s: SideArg) -> Side {
        match s {
            SideArg::Upper => Side::Upper,
            SideArg::Lower => Side::Lower,
        }
    }
}

/// The common distribution/model flag group.
#[derive(Debug, Args)]
pub struct SourceFlags {
    /// Independent-sum distribution kind.
    #[arg(long, value_enum, conflicts_with = "model")]
    pub dist: Option<DistKind>,
    /// Dependent (negatively related) model kind.
    #[arg(long, value_enum)]
    pub model: Option<ModelKind>,
    /// Number of summands / urns in the tracked window.
    #[arg(long)]
    pub n: Option<u64>,
    /// Success probability (rational or decimal, e.g. 3/10 or 0.3).
    #[arg(long)]
    pub p: Option<String>,
    /// Comma-separated probability list for heterogeneous sums.
    #[arg(long)]
    pub ps: Option<String>,
    /// Mean EX.
    #[arg(long)]
    pub lambda: Option<String>,
    /// Variance Var X.
    #[arg(long)]
    pub sigma2: Option<String>,
    /// Total number of urns (hypergeometric N).
    #[arg(long = "N")]
    pub total: Option<u64>,
    /// Number of balls (hypergeometric / occupancy m).
    #[arg(long)]
    pub m: Option<u64>,
    /// Conditioning threshold (conditioned binomial k).
    #[arg(long)]
    pub k: Option<u64>,
}

/// An independent-sum source resolved from flags: the f64 spec for bound
/// formulas plus the exact view for oracles.
pub enum ResolvedDist {
    Binomial { n: u64, p: BigRational },
    Heterogeneous { ps: Vec<BigRational> },
    Moments { lambda: f64, sigma2: f64, n: Option<u64> },
    Poisson { lambda: f64 },
}

impl ResolvedDist {
    pub fn spec(&self) -> Result<IndicatorSumSpec> {
        match self {
            ResolvedDist::Binomial { n, p } => {
                IndicatorSumSpec::homogeneous(*n, rational_to_f64(p))
            }
            ResolvedDist::Heterogeneous { ps } => {
                IndicatorSumSpec::heterogeneous(ps.iter().map(rational_to_f64).collect())
            }
            ResolvedDist::Moments { lambda, sigma2, n } => {
                IndicatorSumSpec::moments(*lambda, *sigma2, *n)
            }
            ResolvedDist::Poisson { .. } => Err(Error::UnsupportedSpec(
                "a Poisson source has no indicator-sum spec; use the mean-based bounds".into(),
            )),
        }
    }

    /// Exact distribution when the source is explicit (rational mode up to
    /// the size cutoff).
    pub fn distribution(&self) -> Result<Option<ExactDistribution>> {
        match self {
            ResolvedDist::Binomial { n, p } => {
                if *n as usize <= RATIONAL_SIZE_LIMIT {
                    Ok(Some(ExactDistribution::binomial(*n, p)?))
                } else {
                    let ps = vec![rational_to_f64(p); *n as usize];
                    Ok(Some(ExactDistribution::poisson_binomial_f64(&ps)?))
                }
            }
            ResolvedDist::Heterogeneous { ps } => {
                Ok(Some(ExactDistribution::poisson_binomial_auto(ps)?))
            }
            _ => Ok(None),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            ResolvedDist::Binomial { n, p } => {
                format!("binomial(n={n}, p={})", tailbounds::rational::format_rational(p))
            }
            ResolvedDist::Heterogeneous { ps } => {
                let parts: Vec<String> =
                    ps.iter().map(tailbounds::rational::format_rational).collect();
                format!("heterogeneous(ps=[{}])", parts.join(","))
            }
            ResolvedDist::Moments { lambda, sigma2, n } => match n {
                Some(n) => format!("moments(lambda={lambda}, sigma2={sigma2}, n={n})"),
                None => format!("moments(lambda={lambda}, sigma2={sigma2})"),
            },
            ResolvedDist::Poisson { lambda } => format!("poisson(lambda={lambda})"),
        }
    }
}

fn need<T>(v: Option<T>, flag: &str, ctx: &str) -> Result<T> {
    v.ok_or_else(|| Error::Parse(format!("{ctx} requires --{flag}")))
}

pub fn parse_probability(s: &str, name: &str) -> Result<BigRational> {
    let r = parse_rational(s)?;
    if r < BigRational::from_integer(0.into()) || r > BigRational::one() {
        return Err(Error::Parse(format!("--{name} must be a probability in [0, 1], got {s}")));
    }
    Ok(r)
}

pub fn parse_probability_list(s: &str) -> Result<Vec<BigRational>> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| parse_probability(t.trim(), "ps"))
        .collect()
}

impl SourceFlags {
    pub fn resolve_dist(&self) -> Result<ResolvedDist> {
        let kind = need(self.dist, "dist", "this command")?;
        match kind {
            DistKind::Binomial => {
                let n = need(self.n, "n", "--dist binomial")?;
                let p = parse_probability(need(self.p.as_deref(), "p", "--dist binomial")?, "p")?;
                Ok(ResolvedDist::Binomial { n, p })
            }
            DistKind::Heterogeneous => {
                let ps = parse_probability_list(need(
                    self.ps.as_deref(),
                    "ps",
                    "--dist heterogeneous",
                )?)?;
                if ps.is_empty() {
                    return Err(Error::Parse("--ps must list at least one probability".into()));
                }
                Ok(ResolvedDist::Heterogeneous { ps })
            }
            DistKind::Moments => {
                let lambda = parse_rational(need(
                    self.lambda.as_deref(),
                    "lambda",
                    "--dist moments",
                )?)?;
                let sigma2 = parse_rational(need(
                    self.sigma2.as_deref(),
                    "sigma2",
                    "--dist moments",
                )?)?;
                Ok(ResolvedDist::Moments {
                    lambda: rational_to_f64(&lambda),
                    sigma2: rational_to_f64(&sigma2),
                    n: self.n,
                })
            }
            DistKind::Poisson => {
                let lambda = parse_rational(need(
                    self.lambda.as_deref(),
                    "lambda",
                    "--dist poisson",
                )?)?;
                Ok(ResolvedDist::Poisson { lambda: rational_to_f64(&lambda) })
            }
        }
    }

    pub fn resolve_model(&self) -> Result<DependentModel> {
        let kind = need(self.model, "model", "this command")?;
        let model = match kind {
            ModelKind::Hypergeometric => DependentModel::Hypergeometric {
                total: need(self.total, "N", "--model hypergeometric")?,
                balls: need(self.m, "m", "--model hypergeometric")?,
                tracked: need(self.n, "n", "--model hypergeometric")?,
            },
            ModelKind::Occupancy => DependentModel::Occupancy {
                urns: need(self.n, "n", "--model occupancy")?,
                balls: need(self.m, "m", "--model occupancy")?,
            },
            ModelKind::ConditionedBinomial => DependentModel::ConditionedBinomial {
                n: need(self.n, "n", "--model conditioned-binomial")?,
                p: parse_probability(
                    need(self.p.as_deref(), "p", "--model conditioned-binomial")?,
                    "p",
                )?,
                k: need(self.k, "k", "--model conditioned-binomial")?,
            },
            ModelKind::Barbour => DependentModel::Barbour,
        };
        model.validate()?;
        Ok(model)
    }
}

/// A probability rendered every way downstream tooling might want it.
#[derive(Debug, serde::Serialize)]
pub struct ProbValue {
    pub log: f64,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fraction: Option<String>,
}

impl ProbValue {
    pub fn from_rational(r: &BigRational) -> Self {
        ProbValue {
            log: tailbounds::rational::log_of_rational_abs(r),
            value: rational_to_f64(r),
            fraction: Some(tailbounds::rational::format_rational(r)),
        }
    }

    pub fn from_f64(v: f64) -> Self {
        ProbValue { log: v.ln(), value: v, fraction: None }
    }
}
