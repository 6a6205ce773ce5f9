//! `simulate`: Monte Carlo runs of the coupling samplers with empirical
//! tails, confidence intervals and the by-construction invariant count; or
//! the conditioned-binomial witness search when `--alpha` is given.

use clap::Args;
use num::rational::BigRational;
use serde::Serialize;

use tailbounds::dependent::{
    find_heavy_tail_witness, parse_seed_manifest, run_coupling_trials, CouplingRun,
    DependentModel, ManifestEntry,
};
use tailbounds::error::{Error, Result};
use tailbounds::rational::{format_rational, rational_to_f64};
use tailbounds::Side;

use crate::common::{ProbValue, SourceFlags};

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub source: SourceFlags,
    /// Conditioned coordinate for the coupling.
    #[arg(long)]
    pub j: Option<usize>,
    /// RNG seed (one sequential ChaCha stream; byte-identical reruns).
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Number of Monte Carlo trials.
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    /// Seed-manifest file (JSON list of {model, j, seed, trials}); runs
    /// every entry.
    #[arg(long, conflicts_with_all = ["j", "alpha"])]
    pub manifest: Option<std::path::PathBuf>,
    /// Witness mode: deviation multiplier alpha (requires
    /// --model conditioned-binomial).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Witness mode: tail factor c in (0, 1/e).
    #[arg(long, default_value_t = 0.5 * std::f64::consts::E.recip())]
    pub c: f64,
    /// Witness mode: variance floor.
    #[arg(long, default_value_t = 10.0)]
    pub min_var: f64,
}

#[derive(Serialize)]
struct TailRow {
    threshold: i64,
    empirical: f64,
    ci_low: f64,
    ci_high: f64,
    exact: ProbValue,
}

#[derive(Serialize)]
struct SimulateReport {
    model: String,
    j: usize,
    seed: u64,
    trials: u64,
    violations: u64,
    x_mean: f64,
    x_standard_error: f64,
    exact_mean: ProbValue,
    tails: Vec<TailRow>,
}

#[derive(Serialize)]
struct WitnessReport {
    model: String,
    alpha: f64,
    c: f64,
    min_var: f64,
    n: u64,
    k: u64,
    epsilon: String,
    lambda: ProbValue,
    variance: ProbValue,
    exact_tail: ProbValue,
    target: f64,
    exceeds_target: bool,
    schedule: Vec<String>,
}

fn summarize(model: &DependentModel, j: usize, seed: u64, trials: u64, run: &CouplingRun) -> Result<SimulateReport> {
    let dist = model.distribution()?;
    let mut sum = 0.0f64;
    let mut sumsq = 0.0f64;
    for (x, &c) in run.x_counts.iter().enumerate() {
        sum += x as f64 * c as f64;
        sumsq += (x * x) as f64 * c as f64;
    }
    let t = trials as f64;
    let mean = sum / t;
    let var = (sumsq / t - mean * mean).max(0.0);
    let se = (var / t).sqrt();
    let exact_mean = match dist.mean_rational() {
        Some(m) => ProbValue::from_rational(&m),
        None => ProbValue::from_f64(dist.mean()),
    };
    // Empirical upper tails P(X >= k) with normal-approximation intervals.
    let mut tails = Vec::new();
    let mut above = 0u64;
    let mut rows: Vec<(i64, u64)> = Vec::new();
    for k in (0..run.x_counts.len()).rev() {
        above += run.x_counts[k];
        rows.push((k as i64, above));
    }
    rows.reverse();
    for (k, count) in rows {
        if k < dist.support_min() || k > dist.support_max() + 1 {
            continue;
        }
        let p_hat = count as f64 / t;
        let half = 1.96 * (p_hat * (1.0 - p_hat) / t).sqrt();
        let exact = match dist.tail_rational(Side::Upper, &BigRational::from_integer(k.into())) {
            Some(e) => ProbValue::from_rational(&e),
            None => ProbValue::from_f64(dist.tail_f64(Side::Upper, k as f64)),
        };
        tails.push(TailRow {
            threshold: k,
            empirical: p_hat,
            ci_low: (p_hat - half).max(0.0),
            ci_high: (p_hat + half).min(1.0),
            exact,
        });
    }
    Ok(SimulateReport {
        model: model.describe(),
        j,
        seed,
        trials,
        violations: run.violations,
        x_mean: mean,
        x_standard_error: se,
        exact_mean,
        tails,
    })
}

fn run_entry(model: &DependentModel, j: usize, seed: u64, trials: u64) -> Result<(SimulateReport, u64)> {
    let run = run_coupling_trials(model, j, seed, trials)?;
    let report = summarize(model, j, seed, trials, &run)?;
    Ok((report, run.violations))
}

pub fn run(args: &SimulateArgs) -> Result<i32> {
    if let Some(path) = &args.manifest {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("cannot read manifest {}: {e}", path.display())))?;
        let entries: Vec<ManifestEntry> = parse_seed_manifest(&text)?;
        let mut reports = Vec::new();
        let mut violations = 0u64;
        for entry in &entries {
            let model = entry.model.to_model();
            let (report, v) = run_entry(&model, entry.j, entry.seed, entry.trials)?;
            violations += v;
            reports.push(report);
        }
        println!("{}", serde_json::to_string_pretty(&reports).expect("serializable"));
        return Ok(if violations > 0 { 1 } else { 0 });
    }

    if let Some(alpha) = args.alpha {
        let model_kind = args.source.model;
        if !matches!(model_kind, Some(crate::common::ModelKind::ConditionedBinomial)) {
            return Err(Error::Precondition(
                "witness mode (--alpha) requires --model conditioned-binomial".into(),
            ));
        }
        let cert = find_heavy_tail_witness(alpha, args.c, args.min_var)?;
        let tail = rational_to_f64(&cert.tail);
        let report = WitnessReport {
            model: cert.model().describe(),
            alpha,
            c: args.c,
            min_var: args.min_var,
            n: cert.n,
            k: cert.k,
            epsilon: format_rational(&cert.epsilon),
            lambda: ProbValue::from_rational(&cert.lambda),
            variance: ProbValue::from_rational(&cert.variance),
            exact_tail: ProbValue::from_rational(&cert.tail),
            target: cert.target,
            exceeds_target: tail > cert.target,
            schedule: cert.schedule_log.clone(),
        };
        println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
        return Ok(0);
    }

    let model = args.source.resolve_model()?;
    let j = args.j.ok_or_else(|| Error::Parse("simulate requires --j (or --manifest)".into()))?;
    let (report, violations) = run_entry(&model, j, args.seed, args.trials)?;
    println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
    Ok(if violations > 0 { 1 } else { 0 })
}
