//! `compare`: sweep deviations over a grid, tabulating every applicable
//! bound next to the exact tail, flagging any domination violation (which
//! also flips the exit code to 1).

use std::collections::BTreeMap;

use clap::Args;
use num::rational::BigRational;
use serde::Serialize;

use tailbounds::catalog::evaluate_bound;
use tailbounds::dependent::DependentModel;
use tailbounds::error::{Error, Result};
use tailbounds::exact::ExactDistribution;
use tailbounds::rational::{
    format_rational, log_of_rational_abs, parse_rational, rational_to_f64,
};
use tailbounds::{BoundId, IndicatorSumSpec, LogBound, Side, TailQuery};

use crate::common::{ResolvedDist, SourceFlags};

const LOG_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SideFilter {
    Upper,
    Lower,
    Both,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub source: SourceFlags,
    /// Which tails to sweep.
    #[arg(long, value_enum, default_value = "both")]
    pub side: SideFilter,
    /// Explicit deviation grid start (defaults to the integer-aligned grid).
    #[arg(long)]
    pub a_min: Option<String>,
    /// Explicit deviation grid end.
    #[arg(long)]
    pub a_max: Option<String>,
    /// Explicit deviation grid step.
    #[arg(long)]
    pub a_step: Option<String>,
    /// Restrict to a comma-separated list of bound ids.
    #[arg(long)]
    pub bounds: Option<String>,
    /// Emit CSV instead of JSON.
    #[arg(long)]
    pub csv: bool,
    /// Clamp probability-scale values at 1.
    #[arg(long)]
    pub clamp: bool,
    /// For the urn models: also use the variance-based bounds with the
    /// exact (EX, Var X) (valid because their PGFs are real-rooted).
    #[arg(long)]
    pub exact_moments: bool,
}

#[derive(Serialize)]
struct BoundCell {
    #[serde(skip_serializing_if = "Option::is_none")]
    log: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    valid: Option<bool>,
}

#[derive(Serialize)]
struct CompareRow {
    spec: String,
    side: Side,
    a: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact_log_tail: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact_fraction: Option<String>,
    bounds: BTreeMap<String, BoundCell>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tightest_bound_id: Option<String>,
    violation: bool,
}

#[derive(Serialize)]
struct CompareReport {
    spec: String,
    rows: Vec<CompareRow>,
    violations: usize,
}

/// What the sweep runs against.
enum Subject {
    Independent { dist: ResolvedDist, spec: IndicatorSumSpec },
    Poisson { lambda: f64 },
    Dependent { model: DependentModel, exact_moments: bool },
}

impl Subject {
    fn describe(&self) -> String {
        match self {
            Subject::Independent { dist, .. } => dist.describe(),
            Subject::Poisson { lambda } => format!("poisson(lambda={lambda})"),
            Subject::Dependent { model, .. } => model.describe(),
        }
    }
}

fn bound_list(subject: &Subject, side: Side, spec: Option<&IndicatorSumSpec>) -> Vec<BoundId> {
    use BoundId::*;
    // Mean-only bounds carry over to the Poisson law.
    if matches!(subject, Subject::Poisson { .. }) {
        return match side {
            Side::Upper => vec![B1_5, B1_6a, B1_6b, Chernoff],
            Side::Lower => vec![B1_8, B1_9, Chernoff],
        };
    }
    let spec = spec.expect("non-Poisson subjects carry a spec");
    let mean_based_ok = spec.n().is_some();
    // Variance-based bounds need independence (or a real-rooted PGF,
    // opted into with --exact-moments for the urn models).
    let variance_ok = spec.sigma2() > 0.0
        && match subject {
            Subject::Independent { .. } => true,
            Subject::Dependent { exact_moments, .. } => *exact_moments,
            Subject::Poisson { .. } => false,
        };
    let mut ids = Vec::new();
    match side {
        Side::Upper => {
            if mean_based_ok {
                ids.extend([B1_2, B1_4a, B1_4b, B1_4c]);
            }
            ids.extend([B1_5, B1_6a, B1_6b]);
            if variance_ok {
                ids.extend([B1_13, B1_14a, B1_14b, B1_15]);
                if mean_based_ok {
                    ids.extend([B3_7, B3_8r]);
                }
            }
        }
        Side::Lower => {
            if mean_based_ok {
                ids.extend([B1_3, B1_7a, B1_7b, B1_7c]);
            }
            ids.extend([B1_8, B1_9]);
            if mean_based_ok && spec.mean_p().map(|p| p <= 0.5).unwrap_or(false) {
                ids.push(B1_10);
            }
            if variance_ok {
                ids.extend([B1_13, B1_14a, B1_14b, B1_15]);
                if spec.sigma2() >= spec.lambda() / 2.0 {
                    ids.push(B1_16);
                }
                if spec.sigma2() < spec.lambda() {
                    ids.push(B3_8);
                }
            }
        }
    }
    // The numeric optimizer needs an explicit MGF.
    if matches!(
        subject,
        Subject::Independent {
            dist: ResolvedDist::Binomial { .. } | ResolvedDist::Heterogeneous { .. },
            ..
        }
    ) {
        ids.push(Chernoff);
    }
    ids
}

fn eval_for(subject: &Subject, spec: &IndicatorSumSpec, q: &TailQuery, id: BoundId) -> Result<LogBound> {
    match subject {
        Subject::Poisson { lambda } => crate::bound_cmd::poisson_bound(*lambda, q, id),
        _ => evaluate_bound(spec, q, id),
    }
}

/// Deviation grid: explicit flags if given, otherwise integer-aligned to
/// the support when it is known, otherwise eight even steps over `[0, EX]`.
fn deviation_grid(
    args: &CompareArgs,
    side: Side,
    lambda: f64,
    support: Option<(i64, i64)>,
) -> Result<Vec<f64>> {
    if args.a_min.is_some() || args.a_max.is_some() || args.a_step.is_some() {
        let lo = rational_to_f64(&parse_rational(args.a_min.as_deref().unwrap_or("0"))?);
        let hi = match &args.a_max {
            Some(s) => rational_to_f64(&parse_rational(s)?),
            None => return Err(Error::Parse("--a-max is required with --a-min/--a-step".into())),
        };
        let step = rational_to_f64(&parse_rational(args.a_step.as_deref().unwrap_or("1"))?);
        if step <= 0.0 || hi < lo {
            return Err(Error::Parse("bad deviation grid".into()));
        }
        let mut out = Vec::new();
        let mut a = lo;
        while a <= hi + 1e-12 {
            out.push(a);
            a += step;
        }
        return Ok(out);
    }
    match support {
        Some((lo, hi)) => {
            let mut out = Vec::new();
            match side {
                Side::Upper => {
                    let start = lambda.ceil() as i64;
                    for k in start.max(lo)..=hi {
                        out.push(k as f64 - lambda);
                    }
                }
                Side::Lower => {
                    let end = lambda.floor() as i64;
                    for k in lo..=end.min(hi) {
                        out.push(lambda - k as f64);
                    }
                }
            }
            out.sort_by(|x, y| x.partial_cmp(y).unwrap());
            Ok(out)
        }
        None => Ok((0..=8).map(|i| lambda * i as f64 / 8.0).collect()),
    }
}

/// Exact log tail (and fraction when rational) at deviation `a`.
fn exact_tail(
    dist: Option<&ExactDistribution>,
    poisson_lambda: Option<f64>,
    side: Side,
    lambda: f64,
    a: f64,
) -> Result<(Option<f64>, Option<String>)> {
    if let Some(d) = dist {
        let threshold = match side {
            Side::Upper => lambda + a,
            Side::Lower => lambda - a,
        };
        if d.is_exact() {
            // Integer-aligned thresholds resolve exactly.
            let snapped = threshold.round();
            let t_r = if (threshold - snapped).abs() <= 1e-9 * threshold.abs().max(1.0) {
                BigRational::from_integer((snapped as i64).into())
            } else {
                tailbounds::rational::rational_from_f64(threshold)?
            };
            let t = d.tail_rational(side, &t_r).expect("exact mode");
            return Ok((Some(log_of_rational_abs(&t)), Some(format_rational(&t))));
        }
        return Ok((Some(d.log_tail_f64(side, threshold)), None));
    }
    if let Some(lambda_p) = poisson_lambda {
        let tail = match side {
            Side::Upper => {
                let k = (lambda_p + a - 1e-9 * (lambda_p + a).max(1.0)).ceil() as i64;
                tailbounds::exact::poisson_tail(lambda_p, k)?
            }
            Side::Lower => {
                let k = (lambda_p - a + 1e-9 * (lambda_p).max(1.0)).floor() as i64;
                1.0 - tailbounds::exact::poisson_tail(lambda_p, k + 1)?
            }
        };
        return Ok((Some(tail.ln()), None));
    }
    Ok((None, None))
}

pub fn run(args: &CompareArgs) -> Result<i32> {
    let subject = if args.source.model.is_some() {
        let model = args.source.resolve_model()?;
        if args.exact_moments
            && !matches!(
                model,
                DependentModel::Hypergeometric { .. } | DependentModel::Occupancy { .. }
            )
        {
            return Err(Error::Precondition(
                "--exact-moments applies only to the urn models (their PGFs are real-rooted)"
                    .into(),
            ));
        }
        Subject::Dependent { model, exact_moments: args.exact_moments }
    } else {
        let dist = args.source.resolve_dist()?;
        match dist {
            ResolvedDist::Poisson { lambda } => Subject::Poisson { lambda },
            other => {
                let spec = other.spec()?;
                Subject::Independent { dist: other, spec }
            }
        }
    };

    // Resolve the exact distribution (if any), the spec for bound
    // evaluation, and the mean.
    let (dist, spec, lambda, poisson_lambda) = match &subject {
        Subject::Independent { dist, spec } => {
            let d = dist.distribution()?;
            let lambda = spec.lambda();
            (d, Some(spec.clone()), lambda, None)
        }
        Subject::Poisson { lambda } => (None, None, *lambda, Some(*lambda)),
        Subject::Dependent { model, .. } => {
            let d = model.distribution()?;
            let lambda = d.mean();
            let sigma2 = d.variance();
            // Negative relatedness caps the variance by the matched
            // independent profile, so the moments spec always validates.
            let n = match model {
                DependentModel::ConditionedBinomial { n, .. } => Some(*n),
                DependentModel::Barbour => Some(5),
                _ => model.indicator_count().ok().map(|n| n as u64),
            };
            let spec = IndicatorSumSpec::moments(lambda, sigma2, n)?;
            (Some(d), Some(spec), lambda, None)
        }
    };

    let requested: Option<Vec<BoundId>> = match &args.bounds {
        Some(s) => Some(
            s.split(',')
                .filter(|t| !t.trim().is_empty())
                .map(|t| t.trim().parse())
                .collect::<Result<Vec<_>>>()?,
        ),
        None => None,
    };

    let sides: Vec<Side> = match args.side {
        SideFilter::Upper => vec![Side::Upper],
        SideFilter::Lower => vec![Side::Lower],
        SideFilter::Both => vec![Side::Upper, Side::Lower],
    };

    let mut rows = Vec::new();
    let mut violations = 0usize;
    for side in sides {
        let support = dist.as_ref().map(|d| (d.support_min(), d.support_max()));
        let grid = deviation_grid(args, side, lambda, support)?;
        for a in grid {
            let q = TailQuery::new(side, a)?;
            let (exact_log, exact_fraction) =
                exact_tail(dist.as_ref(), poisson_lambda, side, lambda, a)?;
            let mut cells = BTreeMap::new();
            let mut tightest: Option<(f64, BoundId)> = None;
            let mut row_violation = false;
            let ids = match &requested {
                Some(ids) => ids.clone(),
                None => bound_list(&subject, side, spec.as_ref()),
            };
            let fallback_spec =
                || IndicatorSumSpec::Moments { lambda, sigma2: 0.0, n: None };
            for id in ids {
                if !id.supports(side) {
                    continue;
                }
                // Bounds with preconditions that fail at this point (for
                // example 1.15 at a = 0) render as empty cells.
                let evaluated = match &spec {
                    Some(s) => eval_for(&subject, s, &q, id),
                    None => eval_for(&subject, &fallback_spec(), &q, id),
                };
                match evaluated {
                    Ok(b) => {
                        if b.in_validity_domain {
                            if tightest.map(|(v, _)| b.log_value < v).unwrap_or(true) {
                                tightest = Some((b.log_value, id));
                            }
                            if let Some(exact) = exact_log {
                                if b.log_value < exact - LOG_SLACK {
                                    row_violation = true;
                                }
                            }
                        }
                        cells.insert(
                            id.to_string(),
                            BoundCell {
                                log: Some(if args.clamp {
                                    b.log_value.min(0.0)
                                } else {
                                    b.log_value
                                }),
                                valid: Some(b.in_validity_domain),
                            },
                        );
                    }
                    Err(Error::Precondition(_)) | Err(Error::UnsupportedSpec(_)) => {
                        cells.insert(id.to_string(), BoundCell { log: None, valid: None });
                    }
                    Err(e) => return Err(e),
                }
            }
            if row_violation {
                violations += 1;
            }
            rows.push(CompareRow {
                spec: subject.describe(),
                side,
                a,
                exact_log_tail: exact_log,
                exact_fraction,
                bounds: cells,
                tightest_bound_id: tightest.map(|(_, id)| id.to_string()),
                violation: row_violation,
            });
        }
    }

    if args.csv {
        print_csv(&rows)?;
    } else {
        let report = CompareReport { spec: subject.describe(), rows, violations };
        println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
    }
    Ok(if violations > 0 { 1 } else { 0 })
}

fn print_csv(rows: &[CompareRow]) -> Result<()> {
    // Union of bound columns, in id order.
    let mut columns: Vec<String> = Vec::new();
    for row in rows {
        for id in row.bounds.keys() {
            if !columns.contains(id) {
                columns.push(id.clone());
            }
        }
    }
    columns.sort();
    let mut w = csv::Writer::from_writer(std::io::stdout());
    let mut header = vec![
        "spec".to_string(),
        "side".into(),
        "a".into(),
        "exact_log_tail".into(),
        "exact_fraction".into(),
    ];
    for c in &columns {
        header.push(format!("{c}_log"));
        header.push(format!("{c}_valid"));
    }
    header.push("tightest_bound_id".into());
    header.push("violation".into());
    w.write_record(&header).map_err(csv_err)?;
    for row in rows {
        let mut rec = vec![
            row.spec.clone(),
            row.side.to_string(),
            format!("{}", row.a),
            row.exact_log_tail.map(|v| format!("{v}")).unwrap_or_default(),
            row.exact_fraction.clone().unwrap_or_default(),
        ];
        for c in &columns {
            match row.bounds.get(c) {
                Some(cell) => {
                    rec.push(cell.log.map(|v| format!("{v}")).unwrap_or_default());
                    rec.push(cell.valid.map(|v| format!("{v}")).unwrap_or_default());
                }
                None => {
                    rec.push(String::new());
                    rec.push(String::new());
                }
            }
        }
        rec.push(row.tightest_bound_id.clone().unwrap_or_default());
        rec.push(format!("{}", row.violation));
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Parse(format!("csv: {e}")))?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(format!("csv: {e}"))
}
