//! `oracle`: exact moments and tails of a distribution or model, the
//! ground truth the bounds are compared against.

use clap::Args;
use serde::Serialize;

use tailbounds::error::Result;
use tailbounds::rational::{parse_rational, rational_to_f64};
use tailbounds::Side;

use crate::common::{ProbValue, ResolvedDist, SideArg, SourceFlags};

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub source: SourceFlags,
    /// Tail side; with --a, reports the exact tail probability.
    #[arg(long, value_enum)]
    pub side: Option<SideArg>,
    /// Deviation from the mean.
    #[arg(long)]
    pub a: Option<String>,
}

#[derive(Serialize)]
struct OracleReport {
    spec: String,
    exact: bool,
    support: Option<(i64, i64)>,
    lambda: ProbValue,
    sigma2: ProbValue,
    #[serde(skip_serializing_if = "Option::is_none")]
    tail: Option<TailReport>,
}

#[derive(Serialize)]
struct TailReport {
    side: Side,
    a: f64,
    threshold: f64,
    probability: ProbValue,
}

pub fn run(args: &OracleArgs) -> Result<i32> {
    let (label, dist, poisson_lambda) = if args.source.model.is_some() {
        let model = args.source.resolve_model()?;
        (model.describe(), Some(model.distribution()?), None)
    } else {
        let dist = args.source.resolve_dist()?;
        match &dist {
            ResolvedDist::Poisson { lambda } => (dist.describe(), None, Some(*lambda)),
            _ => {
                let d = dist.distribution()?.ok_or_else(|| {
                    tailbounds::Error::UnsupportedSpec(
                        "the oracle needs an explicit distribution or model".into(),
                    )
                })?;
                (dist.describe(), Some(d), None)
            }
        }
    };

    let report = match (&dist, poisson_lambda) {
        (Some(d), _) => {
            let (lambda, sigma2) = match (d.mean_rational(), d.variance_rational()) {
                (Some(l), Some(v)) => (ProbValue::from_rational(&l), ProbValue::from_rational(&v)),
                _ => (ProbValue::from_f64(d.mean()), ProbValue::from_f64(d.variance())),
            };
            let tail = match (&args.side, &args.a) {
                (Some(side), Some(a)) => {
                    let side: Side = (*side).into();
                    let a_r = parse_rational(a)?;
                    let a = rational_to_f64(&a_r);
                    let mean = d.mean_rational();
                    let prob = match (&mean, d.is_exact()) {
                        (Some(mean_r), true) => {
                            let threshold = match side {
                                Side::Upper => mean_r + &a_r,
                                Side::Lower => mean_r - &a_r,
                            };
                            ProbValue::from_rational(
                                &d.tail_rational(side, &threshold).expect("exact mode"),
                            )
                        }
                        _ => {
                            let threshold = match side {
                                Side::Upper => d.mean() + a,
                                Side::Lower => d.mean() - a,
                            };
                            ProbValue::from_f64(d.tail_f64(side, threshold))
                        }
                    };
                    let threshold = match side {
                        Side::Upper => d.mean() + a,
                        Side::Lower => d.mean() - a,
                    };
                    Some(TailReport { side, a, threshold, probability: prob })
                }
                _ => None,
            };
            OracleReport {
                spec: label,
                exact: d.is_exact(),
                support: Some((d.support_min(), d.support_max())),
                lambda,
                sigma2,
                tail,
            }
        }
        (None, Some(lambda)) => {
            let tail = match (&args.side, &args.a) {
                (Some(side), Some(a)) => {
                    let side: Side = (*side).into();
                    let a = rational_to_f64(&parse_rational(a)?);
                    let threshold = match side {
                        Side::Upper => lambda + a,
                        Side::Lower => lambda - a,
                    };
                    let p = match side {
                        Side::Upper => {
                            let k = (threshold - 1e-9 * threshold.abs().max(1.0)).ceil() as i64;
                            tailbounds::exact::poisson_tail(lambda, k)?
                        }
                        Side::Lower => {
                            let k = (threshold + 1e-9 * threshold.abs().max(1.0)).floor() as i64;
                            1.0 - tailbounds::exact::poisson_tail(lambda, k + 1)?
                        }
                    };
                    Some(TailReport { side, a, threshold, probability: ProbValue::from_f64(p) })
                }
                _ => None,
            };
            OracleReport {
                spec: label,
                exact: false,
                support: None,
                lambda: ProbValue::from_f64(lambda),
                sigma2: ProbValue::from_f64(lambda),
                tail,
            }
        }
        _ => unreachable!(),
    };
    println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
    Ok(0)
}
