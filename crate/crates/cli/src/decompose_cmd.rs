//! `decompose`: real-rootedness verdict for a PGF and, when it holds, the
//! factorization into independent Bernoulli components with moment
//! reconciliation.

use clap::Args;
use serde::Serialize;

use tailbounds::error::Result;
use tailbounds::pgf::{bernoulli_decomposition, real_rootedness, RationalPolynomial, RealRootedness};
use crate::common::SourceFlags;

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    #[command(flatten)]
    pub source: SourceFlags,
}

#[derive(Serialize)]
struct RootInterval {
    low: String,
    high: String,
    multiplicity: usize,
    exact: bool,
}

#[derive(Serialize)]
struct DecomposeReport {
    spec: String,
    degree: usize,
    real_rooted: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    isolating_intervals: Option<Vec<RootInterval>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    conjugate_pairs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    real_root_count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    decomposition: Option<DecompositionReport>,
}

#[derive(Serialize)]
struct DecompositionReport {
    ps: Vec<f64>,
    zero_root_count: usize,
    residual: f64,
    sum_p: f64,
    mean: f64,
    mean_gap: f64,
    sum_pq: f64,
    variance: f64,
    variance_gap: f64,
}

pub fn run(args: &DecomposeArgs) -> Result<i32> {
    let (label, dist) = if args.source.model.is_some() {
        let model = args.source.resolve_model()?;
        (model.describe(), model.distribution()?)
    } else {
        let dist = args.source.resolve_dist()?;
        let d = dist.distribution()?.ok_or_else(|| {
            tailbounds::Error::UnsupportedSpec(
                "decomposition needs an explicit distribution or model".into(),
            )
        })?;
        (dist.describe(), d)
    };
    let pgf = RationalPolynomial::from_distribution(&dist)?;
    let verdict = real_rootedness(&pgf)?;
    let report = match verdict {
        RealRootedness::RealRooted { roots } => {
            let d = bernoulli_decomposition(&pgf)?;
            let mean = dist.mean();
            let variance = dist.variance();
            let sum_p = d.sum_p();
            let sum_pq = d.sum_pq();
            DecomposeReport {
                spec: label,
                degree: pgf.degree().unwrap_or(0),
                real_rooted: true,
                isolating_intervals: Some(
                    roots
                        .iter()
                        .map(|r| RootInterval {
                            low: tailbounds::rational::format_rational(&r.low),
                            high: tailbounds::rational::format_rational(&r.high),
                            multiplicity: r.multiplicity,
                            exact: r.is_exact(),
                        })
                        .collect(),
                ),
                conjugate_pairs: None,
                real_root_count: None,
                decomposition: Some(DecompositionReport {
                    ps: d.p_values(),
                    zero_root_count: d.zero_root_count,
                    residual: d.residual,
                    sum_p,
                    mean,
                    mean_gap: sum_p - mean,
                    sum_pq,
                    variance,
                    variance_gap: sum_pq - variance,
                }),
            }
        }
        RealRootedness::NotRealRooted { real_root_count, conjugate_pairs, .. } => {
            DecomposeReport {
                spec: label,
                degree: pgf.degree().unwrap_or(0),
                real_rooted: false,
                isolating_intervals: None,
                conjugate_pairs: Some(conjugate_pairs),
                real_root_count: Some(real_root_count),
                decomposition: None,
            }
        }
    };
    println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
    Ok(0)
}
