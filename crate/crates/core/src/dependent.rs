//! Exact distributions, closed-form moments and coupling samplers for the
//! negatively related indicator families: drawing without replacement,
//! empty urns under uniform placement, the conditioned binomial, and the
//! three-point counterexample distribution. Also the constructive search
//! for a conditioned binomial whose tail beats every sub-Gaussian profile.

use std::collections::BTreeMap;

use num::rational::BigRational;
use num::traits::{One, Signed, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::ExactDistribution;
use crate::rational::{binomial_coefficient, rational_from_f64, rational_pow, rational_to_f64};

/// One of the dependent indicator families.
#[derive(Debug, Clone, PartialEq)]
pub enum DependentModel {
    /// `m` balls into distinct urns among `total`; X counts occupied urns
    /// among the first `tracked`.
    Hypergeometric { total: u64, balls: u64, tracked: u64 },
    /// `balls` thrown uniformly into `urns`; X counts empty urns.
    Occupancy { urns: u64, balls: u64 },
    /// `Bi(n, p)` conditioned on being at least `k`.
    ConditionedBinomial { n: u64, p: BigRational, k: u64 },
    /// The fixed three-point distribution on {3, 4, 5} with weights
    /// 4/13, 5/13, 4/13.
    Barbour,
}

impl DependentModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            DependentModel::Hypergeometric { total, balls, tracked } => {
                if *total == 0 || balls.max(tracked) > total {
                    return Err(Error::domain(format!(
                        "hypergeometric needs max(m, n) <= N, got N={total} m={balls} n={tracked}"
                    )));
                }
            }
            DependentModel::Occupancy { urns, .. } => {
                if *urns == 0 {
                    return Err(Error::domain("occupancy needs at least one urn"));
                }
            }
            DependentModel::ConditionedBinomial { n, p, k } => {
                if *n == 0 || *k > *n {
                    return Err(Error::domain(format!(
                        "conditioned binomial needs 0 <= k <= n, got n={n} k={k}"
                    )));
                }
                if !p.is_positive() || *p >= BigRational::one() {
                    return Err(Error::domain("conditioned binomial needs 0 < p < 1"));
                }
            }
            DependentModel::Barbour => {}
        }
        Ok(())
    }

    /// Number of indicator coordinates in the representation `X = sum I_i`.
    pub fn indicator_count(&self) -> Result<usize> {
        match self {
            DependentModel::Hypergeometric { tracked, .. } => Ok(*tracked as usize),
            DependentModel::Occupancy { urns, .. } => Ok(*urns as usize),
            _ => Err(Error::UnsupportedSpec(
                "indicator coordinates are exposed only for the urn models".into(),
            )),
        }
    }

    pub fn distribution(&self) -> Result<ExactDistribution> {
        self.validate()?;
        match self {
            DependentModel::Hypergeometric { total, balls, tracked } => {
                hypergeometric_distribution(*total, *balls, *tracked)
            }
            DependentModel::Occupancy { urns, balls } => occupancy_distribution(*urns, *balls),
            DependentModel::ConditionedBinomial { n, p, k } => {
                conditioned_binomial(*n, p, *k)
            }
            DependentModel::Barbour => Ok(barbour_distribution()),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            DependentModel::Hypergeometric { total, balls, tracked } => {
                format!("hypergeometric(N={total}, m={balls}, n={tracked})")
            }
            DependentModel::Occupancy { urns, balls } => {
                format!("occupancy(n={urns}, m={balls})")
            }
            DependentModel::ConditionedBinomial { n, p, k } => {
                format!(
                    "conditioned-binomial(n={n}, p={}, k={k})",
                    crate::rational::format_rational(p)
                )
            }
            DependentModel::Barbour => "barbour".into(),
        }
    }
}

/// `P(X = k) = C(n, k) C(N - n, m - k) / C(N, m)` over the feasible range.
pub fn hypergeometric_distribution(total: u64, balls: u64, tracked: u64) -> Result<ExactDistribution> {
    if total == 0 || balls.max(tracked) > total {
        return Err(Error::domain(format!(
            "hypergeometric needs max(m, n) <= N, got N={total} m={balls} n={tracked}"
        )));
    }
    let denom = binomial_coefficient(total, balls);
    let lo = balls.saturating_sub(total - tracked);
    let hi = tracked.min(balls);
    let mut probs = vec![BigRational::zero(); hi as usize + 1];
    for k in lo..=hi {
        let num = binomial_coefficient(tracked, k) * binomial_coefficient(total - tracked, balls - k);
        probs[k as usize] = BigRational::new(num, denom.clone());
    }
    ExactDistribution::from_rational_pmf(0, probs)
}

/// Distribution of the number of empty urns after throwing `balls` balls
/// uniformly into `urns` urns:
/// `P(X = k) = C(n,k) sum_j (-1)^j C(n-k, j) ((n-k-j)/n)^m`, exact.
pub fn occupancy_distribution(urns: u64, balls: u64) -> Result<ExactDistribution> {
    if urns == 0 {
        return Err(Error::domain("occupancy needs at least one urn"));
    }
    let n = urns;
    let m = balls as u32;
    let nf = BigRational::from_integer(n.into());
    let mut probs = vec![BigRational::zero(); n as usize + 1];
    for k in 0..=n {
        let mut acc = BigRational::zero();
        for j in 0..=(n - k) {
            let frac = BigRational::from_integer((n - k - j).into()) / &nf;
            let term = BigRational::from_integer(binomial_coefficient(n - k, j))
                * rational_pow(&frac, m);
            if j % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        probs[k as usize] = BigRational::from_integer(binomial_coefficient(n, k)) * acc;
    }
    ExactDistribution::from_rational_pmf(0, probs)
}

/// Closed-form mean and variance of the empty-urn count:
/// `EX = n(1 - 1/n)^m`,
/// `Var X = n(1-1/n)^m + n(n-1)(1-2/n)^m - n^2 (1-1/n)^{2m}`.
pub fn occupancy_moments(urns: u64, balls: u64) -> Result<(BigRational, BigRational)> {
    if urns == 0 {
        return Err(Error::domain("occupancy needs at least one urn"));
    }
    let n = BigRational::from_integer(urns.into());
    let m = balls as u32;
    let one = BigRational::one();
    let a = rational_pow(&(&one - &(&one / &n)), m);
    let lambda = &n * &a;
    let b = if urns == 1 {
        BigRational::zero()
    } else {
        rational_pow(
            &(&one - &(BigRational::from_integer(2.into()) / &n)),
            m,
        )
    };
    let sigma2 = &lambda + &n * (&n - &one) * &b - &n * &n * &a * &a;
    Ok((lambda, sigma2))
}

/// `Bi(n, p)` conditioned on the event `X >= k` (`k = 0` is vacuous).
pub fn conditioned_binomial(n: u64, p: &BigRational, k: u64) -> Result<ExactDistribution> {
    if n == 0 || k > n {
        return Err(Error::domain(format!(
            "conditioned binomial needs 0 <= k <= n, got n={n} k={k}"
        )));
    }
    if !p.is_positive() || *p >= BigRational::one() {
        return Err(Error::domain("conditioned binomial needs 0 < p < 1"));
    }
    let base = ExactDistribution::binomial(n, p)?;
    base.conditioned_at_least(k as i64)
}

/// The three-point counterexample: P(3) = 4/13, P(4) = 5/13, P(5) = 4/13.
/// A sum of five negatively related indicators that is provably not a sum
/// of independent ones (its PGF has non-real roots).
pub fn barbour_distribution() -> ExactDistribution {
    let pmf = vec![
        BigRational::new(4.into(), 13.into()),
        BigRational::new(5.into(), 13.into()),
        BigRational::new(4.into(), 13.into()),
    ];
    ExactDistribution::from_rational_pmf(3, pmf).expect("fixed pmf")
}

/// `P(Y > x)` for a geometric variable on `{0, 1, ...}` with
/// `P(Y = i) = (1-r) r^i`: equals `r^{floor(x)+1}` for `x >= 0`.
pub fn geometric_upper_tail(r: f64, x: f64) -> f64 {
    if x < 0.0 {
        return 1.0;
    }
    r.powi(x.floor() as i32 + 1)
}

// ---------------------------------------------------------------------------
// Coupling samplers
// ---------------------------------------------------------------------------

/// One joint draw of the indicator vector and its conditioned companion:
/// `j_vector` is distributed as `i_vector` given `I_j = 1`, built so that
/// `j_vector[i] <= i_vector[i]` for every `i != j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingSample {
    pub i_vector: Vec<u8>,
    pub j_index: usize,
    pub j_vector: Vec<u8>,
}

impl CouplingSample {
    /// The by-construction invariants; sampling asserts these, tests count
    /// violations.
    pub fn invariants_hold(&self) -> bool {
        if self.j_vector.len() != self.i_vector.len() || self.j_index >= self.i_vector.len() {
            return false;
        }
        if self.j_vector[self.j_index] != 1 {
            return false;
        }
        self.i_vector
            .iter()
            .zip(&self.j_vector)
            .enumerate()
            .all(|(i, (iv, jv))| i == self.j_index || jv <= iv)
    }
}

const REDISTRIBUTION_CAP: u32 = 10_000;

/// Draws one coupling sample for the urn models.
///
/// Without replacement: distribute the balls, then force a ball into urn
/// `j` (if empty) by moving a uniformly chosen ball there. With
/// replacement: empty urn `j` by rethrowing each of its balls uniformly,
/// rejecting throws that land back in `j`.
pub fn sample_coupling(
    model: &DependentModel,
    j: usize,
    rng: &mut impl Rng,
) -> Result<CouplingSample> {
    model.validate()?;
    match model {
        DependentModel::Hypergeometric { total, balls, tracked } => {
            let big_n = *total as usize;
            let m = *balls as usize;
            let n = *tracked as usize;
            if j >= n {
                return Err(Error::domain(format!("j = {j} out of range for n = {n}")));
            }
            // Random m-subset via partial Fisher-Yates.
            let mut urns: Vec<usize> = (0..big_n).collect();
            for i in 0..m {
                let pick = rng.gen_range(i..big_n);
                urns.swap(i, pick);
            }
            let mut occupied = vec![false; big_n];
            for &u in &urns[..m] {
                occupied[u] = true;
            }
            let i_vector: Vec<u8> = occupied[..n].iter().map(|&b| b as u8).collect();
            let mut after = occupied;
            if !after[j] {
                // Move a uniformly chosen ball into urn j.
                let chosen = urns[rng.gen_range(0..m)];
                after[chosen] = false;
                after[j] = true;
            }
            let j_vector: Vec<u8> = after[..n].iter().map(|&b| b as u8).collect();
            let sample = CouplingSample { i_vector, j_index: j, j_vector };
            debug_assert!(sample.invariants_hold());
            Ok(sample)
        }
        DependentModel::Occupancy { urns, balls } => {
            let n = *urns as usize;
            let m = *balls as usize;
            if j >= n {
                return Err(Error::domain(format!("j = {j} out of range for n = {n}")));
            }
            let mut counts = vec![0u64; n];
            for _ in 0..m {
                counts[rng.gen_range(0..n)] += 1;
            }
            let i_vector: Vec<u8> = counts.iter().map(|&c| (c == 0) as u8).collect();
            // Rethrow the balls occupying urn j anywhere else.
            let mut after = counts;
            let displaced = after[j];
            after[j] = 0;
            for _ in 0..displaced {
                let mut tries = 0;
                let target = loop {
                    let u = rng.gen_range(0..n);
                    if u != j {
                        break u;
                    }
                    tries += 1;
                    if tries >= REDISTRIBUTION_CAP {
                        return Err(Error::Diagnostic(format!(
                            "redistribution failed to leave urn {j} after {REDISTRIBUTION_CAP} tries"
                        )));
                    }
                };
                after[target] += 1;
            }
            let j_vector: Vec<u8> = after.iter().map(|&c| (c == 0) as u8).collect();
            let sample = CouplingSample { i_vector, j_index: j, j_vector };
            debug_assert!(sample.invariants_hold());
            Ok(sample)
        }
        _ => Err(Error::UnsupportedSpec(
            "coupling samplers exist for the urn models only".into(),
        )),
    }
}

/// Aggregated Monte Carlo run of the coupling sampler, deterministic for a
/// given seed (single sequential ChaCha stream).
#[derive(Debug, Clone, Serialize)]
pub struct CouplingRun {
    pub trials: u64,
    pub violations: u64,
    /// Histogram of `sum(i_vector)`, index = value.
    pub x_counts: Vec<u64>,
    /// Histogram of `sum(j_vector)`.
    pub jx_counts: Vec<u64>,
    /// Pattern counts of `j_vector` as bitmasks, kept only when the
    /// indicator count is at most 20.
    pub j_pattern_counts: Option<BTreeMap<u64, u64>>,
}

pub fn run_coupling_trials(
    model: &DependentModel,
    j: usize,
    seed: u64,
    trials: u64,
) -> Result<CouplingRun> {
    let n = model.indicator_count()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x_counts = vec![0u64; n + 1];
    let mut jx_counts = vec![0u64; n + 1];
    let mut violations = 0u64;
    let mut patterns: Option<BTreeMap<u64, u64>> =
        if n <= 20 { Some(BTreeMap::new()) } else { None };
    for _ in 0..trials {
        let s = sample_coupling(model, j, &mut rng)?;
        if !s.invariants_hold() {
            violations += 1;
        }
        let x: u64 = s.i_vector.iter().map(|&b| b as u64).sum();
        let jx: u64 = s.j_vector.iter().map(|&b| b as u64).sum();
        x_counts[x as usize] += 1;
        jx_counts[jx as usize] += 1;
        if let Some(map) = patterns.as_mut() {
            let mask = s
                .j_vector
                .iter()
                .enumerate()
                .fold(0u64, |acc, (i, &b)| acc | ((b as u64) << i));
            *map.entry(mask).or_insert(0) += 1;
        }
    }
    Ok(CouplingRun { trials, violations, x_counts, jx_counts, j_pattern_counts: patterns })
}

// ---------------------------------------------------------------------------
// Seed manifest
// ---------------------------------------------------------------------------

/// Model descriptor in the seed manifest (urn models only: those are the
/// ones with coupling samplers).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ManifestModel {
    Hypergeometric {
        #[serde(rename = "N")]
        total: u64,
        m: u64,
        n: u64,
    },
    Occupancy { n: u64, m: u64 },
}

impl ManifestModel {
    pub fn to_model(&self) -> DependentModel {
        match *self {
            ManifestModel::Hypergeometric { total, m, n } => {
                DependentModel::Hypergeometric { total, balls: m, tracked: n }
            }
            ManifestModel::Occupancy { n, m } => DependentModel::Occupancy { urns: n, balls: m },
        }
    }
}

/// One simulation job: model, conditioned coordinate, seed, trial count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub model: ManifestModel,
    pub j: usize,
    pub seed: u64,
    pub trials: u64,
}

/// Parses the JSON seed-manifest format: a list of
/// `{model, j, seed, trials}` objects.
pub fn parse_seed_manifest(json: &str) -> Result<Vec<ManifestEntry>> {
    serde_json::from_str(json).map_err(|e| Error::Parse(format!("seed manifest: {e}")))
}

// ---------------------------------------------------------------------------
// Witness search
// ---------------------------------------------------------------------------

/// A conditioned-binomial instance certifying that variance-based tail
/// bounds fail for general negatively related sums: its variance exceeds
/// the requested floor while `P(X > EX + alpha sigma)` exceeds
/// `c e^{-alpha}`, with the tail certified as an exact rational.
#[derive(Debug, Clone)]
pub struct WitnessCertificate {
    pub n: u64,
    pub k: u64,
    pub p: BigRational,
    pub epsilon: BigRational,
    pub lambda: BigRational,
    pub variance: BigRational,
    pub tail: BigRational,
    pub target: f64,
    pub schedule_log: Vec<String>,
}

impl WitnessCertificate {
    pub fn model(&self) -> DependentModel {
        DependentModel::ConditionedBinomial { n: self.n, p: self.p.clone(), k: self.k }
    }
}

/// Exact `P(X > EX + alpha sigma)` for an exact distribution, comparing
/// `(i - EX)^2 > alpha^2 Var X` on the positive side so that the irrational
/// threshold is handled without rounding.
pub fn tail_beyond_alpha_sigma(dist: &ExactDistribution, alpha: &BigRational) -> Result<BigRational> {
    let pmf = dist
        .rational_pmf()
        .ok_or_else(|| Error::UnsupportedSpec("needs the exact-rational mode".into()))?;
    let lambda = dist.mean_rational().unwrap();
    let variance = dist.variance_rational().unwrap();
    let a2v = alpha * alpha * &variance;
    let mut tail = BigRational::zero();
    for (i, w) in pmf.iter().enumerate() {
        let dev = BigRational::from_integer((dist.support_min() + i as i64).into()) - &lambda;
        if dev.is_positive() && &dev * &dev > a2v {
            tail += w;
        }
    }
    Ok(tail)
}

/// Searches conditioned binomials for a witness, over the documented
/// schedule: `p` fixed at `1/2`; `epsilon` halving from `1/5`;
/// `k = floor(n(p + epsilon)) + 1`; `n` doubling from 64 until the pmf
/// ratio at the conditioning threshold is within 1% of its limiting value
/// `r = p(q - eps)/((p + eps) q)` (then one level beyond), after which the
/// next `epsilon` is tried. Every candidate is tested exactly; the first
/// pass is returned with its schedule log.
pub fn find_heavy_tail_witness(
    alpha: f64,
    c: f64,
    min_variance: f64,
) -> Result<WitnessCertificate> {
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(Error::precondition(format!("needs alpha > 0, got {alpha}")));
    }
    if c.is_nan() || c <= 0.0 || c >= (-1.0f64).exp() {
        return Err(Error::precondition(format!(
            "needs 0 < c < 1/e (= {}), got {c}",
            (-1.0f64).exp()
        )));
    }
    if !min_variance.is_finite() {
        return Err(Error::precondition("needs a finite variance floor"));
    }
    let alpha_r = rational_from_f64(alpha)?;
    let target = c * (-alpha).exp();
    let min_var_r = rational_from_f64(min_variance)?;
    let half = BigRational::new(1.into(), 2.into());
    let one = BigRational::one();
    let hundredth = BigRational::new(1.into(), 100.into());

    let mut log = Vec::new();
    let mut attempts = 0usize;
    let mut eps = BigRational::new(1.into(), 5.into());
    for _ in 0..8 {
        // r = p(q - eps) / ((p + eps) q) with p = q = 1/2.
        let r = (&half * (&half - &eps)) / ((&half + &eps) * &half);
        let mut n = 64u64;
        let mut past_stable = 0u32;
        while n <= 1 << 14 {
            let k_floor = (BigRational::from_integer(n.into()) * (&half + &eps))
                .floor()
                .to_integer();
            let k: u64 = num::traits::ToPrimitive::to_u64(&k_floor).unwrap() + 1;
            if k > n {
                break;
            }
            attempts += 1;
            let dist = conditioned_binomial(n, &half, k)?;
            let lambda = dist.mean_rational().unwrap();
            let variance = dist.variance_rational().unwrap();
            let tail = tail_beyond_alpha_sigma(&dist, &alpha_r)?;
            let tail_f = rational_to_f64(&tail);
            // pmf ratio at the threshold: (p/q)(n-k)/(k+1) = (n-k)/(k+1).
            let ratio0 = BigRational::new((n - k).into(), (k + 1).into());
            let stable = (&ratio0 - &r).abs() <= &hundredth * &r;
            log.push(format!(
                "eps={} n={n} k={k} var={:.3} tail={:.6e} ratio0={:.4} stable={stable}",
                crate::rational::format_rational(&eps),
                rational_to_f64(&variance),
                tail_f,
                rational_to_f64(&ratio0),
            ));
            if variance > min_var_r && tail_f > target {
                return Ok(WitnessCertificate {
                    n,
                    k,
                    p: half.clone(),
                    epsilon: eps.clone(),
                    lambda,
                    variance,
                    tail,
                    target,
                    schedule_log: log,
                });
            }
            if stable {
                past_stable += 1;
                if past_stable >= 2 {
                    break;
                }
            }
            n *= 2;
        }
        eps = &eps * &half / &one;
    }
    Err(Error::SearchExhausted { attempts, log })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::parse_rational;
    use crate::spec::Side;

    fn rat(s: &str) -> BigRational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn hypergeometric_small_cases() {
        let d = hypergeometric_distribution(2, 1, 1).unwrap();
        assert_eq!(d.prob_rational(0).unwrap(), rat("1/2"));
        assert_eq!(d.prob_rational(1).unwrap(), rat("1/2"));

        let d = hypergeometric_distribution(4, 2, 2).unwrap();
        assert_eq!(d.prob_rational(0).unwrap(), rat("1/6"));
        assert_eq!(d.prob_rational(1).unwrap(), rat("4/6"));
        assert_eq!(d.prob_rational(2).unwrap(), rat("1/6"));

        // Mean = n m / N.
        let d = hypergeometric_distribution(10, 5, 5).unwrap();
        assert_eq!(d.mean_rational().unwrap(), rat("5/2"));

        assert!(hypergeometric_distribution(4, 5, 2).is_err());
    }

    #[test]
    fn occupancy_small_cases() {
        // One ball, two urns: exactly one empty urn.
        let d = occupancy_distribution(2, 1).unwrap();
        assert_eq!(d.support_min(), 1);
        assert_eq!(d.support_max(), 1);

        let d = occupancy_distribution(2, 2).unwrap();
        assert_eq!(d.prob_rational(0).unwrap(), rat("1/2"));
        assert_eq!(d.prob_rational(1).unwrap(), rat("1/2"));

        // No balls: every urn empty.
        let d = occupancy_distribution(3, 0).unwrap();
        assert_eq!(d.prob_rational(3).unwrap(), BigRational::one());

        let d = occupancy_distribution(3, 3).unwrap();
        assert_eq!(d.mean_rational().unwrap(), rat("8/9"));
    }

    #[test]
    fn occupancy_closed_form_moments() {
        // Deterministic case: n=2, m=1 has variance 0... and the formula
        // agrees.
        let (lam, var) = occupancy_moments(2, 1).unwrap();
        assert_eq!(lam, rat("1"));
        assert_eq!(var, rat("0"));

        let (lam, var) = occupancy_moments(3, 2).unwrap();
        assert_eq!(lam, rat("4/3"));
        assert_eq!(var, rat("2/9"));

        for (n, m) in [(3u64, 2u64), (5, 7), (10, 10), (7, 0), (1, 4)] {
            let d = occupancy_distribution(n, m).unwrap();
            let (lam, var) = occupancy_moments(n, m).unwrap();
            assert_eq!(d.mean_rational().unwrap(), lam, "n={n} m={m}");
            assert_eq!(d.variance_rational().unwrap(), var, "n={n} m={m}");
        }
    }

    #[test]
    fn conditioned_binomial_cases() {
        let d = conditioned_binomial(2, &rat("1/2"), 1).unwrap();
        assert_eq!(d.prob_rational(1).unwrap(), rat("2/3"));
        assert_eq!(d.prob_rational(2).unwrap(), rat("1/3"));
        assert_eq!(d.mean_rational().unwrap(), rat("4/3"));
        assert_eq!(d.variance_rational().unwrap(), rat("2/9"));

        // Vacuous conditioning.
        let d = conditioned_binomial(5, &rat("1/2"), 0).unwrap();
        let plain = ExactDistribution::binomial(5, &rat("1/2")).unwrap();
        assert_eq!(d, plain);

        assert!(conditioned_binomial(5, &rat("1/2"), 6).is_err());
        assert!(conditioned_binomial(5, &rat("1"), 2).is_err());
    }

    #[test]
    fn conditioned_binomial_ratio_identity() {
        // P(X=k+i+1)/P(X=k+i) = (p/q)(n-k-i)/(k+i+1), exactly.
        let (n, p, k) = (17u64, rat("2/7"), 6u64);
        let d = conditioned_binomial(n, &p, k).unwrap();
        let q = BigRational::one() - &p;
        for i in 0..(n - k) {
            let num = d.prob_rational((k + i + 1) as i64).unwrap();
            let den = d.prob_rational((k + i) as i64).unwrap();
            let expect = (&p / &q)
                * BigRational::new((n - k - i).into(), (k + i + 1).into());
            assert_eq!(num, den * expect, "i={i}");
        }
    }

    #[test]
    fn geometric_ratio_bound_holds_exactly() {
        // P(X = k+i) <= r^i P(X = k) with r = p(q-eps)/((p+eps)q).
        let (n, eps) = (128u64, rat("1/10"));
        let p = rat("1/2");
        let q = BigRational::one() - &p;
        let k_floor = (BigRational::from_integer(n.into()) * (&p + &eps)).floor().to_integer();
        let k = num::traits::ToPrimitive::to_u64(&k_floor).unwrap() + 1;
        let r = (&p * (&q - &eps)) / ((&p + &eps) * &q);
        let d = conditioned_binomial(n, &p, k).unwrap();
        let at_k = d.prob_rational(k as i64).unwrap();
        for i in 0..=(n - k) {
            let lhs = d.prob_rational((k + i) as i64).unwrap();
            let rhs = rational_pow(&r, i as u32) * &at_k;
            assert!(lhs <= rhs, "i={i}");
        }
    }

    #[test]
    fn barbour_matches_fixed_pmf() {
        let d = barbour_distribution();
        assert_eq!(d.prob_rational(3).unwrap(), rat("4/13"));
        assert_eq!(d.prob_rational(4).unwrap(), rat("5/13"));
        assert_eq!(d.prob_rational(5).unwrap(), rat("4/13"));
        assert_eq!(d.tail_rational(Side::Upper, &rat("4")).unwrap(), rat("9/13"));
    }

    #[test]
    fn coupling_invariants_always_hold() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let hyper = DependentModel::Hypergeometric { total: 7, balls: 3, tracked: 4 };
        let occ = DependentModel::Occupancy { urns: 5, balls: 6 };
        for _ in 0..5000 {
            let s = sample_coupling(&hyper, 1, &mut rng).unwrap();
            assert!(s.invariants_hold());
            let s = sample_coupling(&occ, 2, &mut rng).unwrap();
            assert!(s.invariants_hold());
        }
    }

    #[test]
    fn full_urns_force_identical_vectors() {
        let model = DependentModel::Hypergeometric { total: 2, balls: 2, tracked: 2 };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let s = sample_coupling(&model, 0, &mut rng).unwrap();
            assert_eq!(s.i_vector, vec![1, 1]);
            assert_eq!(s.j_vector, vec![1, 1]);
        }
    }

    #[test]
    fn coupling_runs_are_deterministic() {
        let model = DependentModel::Occupancy { urns: 4, balls: 5 };
        let a = run_coupling_trials(&model, 0, 42, 2000).unwrap();
        let b = run_coupling_trials(&model, 0, 42, 2000).unwrap();
        assert_eq!(a.x_counts, b.x_counts);
        assert_eq!(a.j_pattern_counts, b.j_pattern_counts);
        assert_eq!(a.violations, 0);
    }

    #[test]
    fn manifest_round_trip() {
        let json = r#"[
            {"model": {"kind": "hypergeometric", "N": 50, "m": 20, "n": 10},
             "j": 1, "seed": 42, "trials": 1000},
            {"model": {"kind": "occupancy", "n": 20, "m": 30},
             "j": 7, "seed": 7, "trials": 500}
        ]"#;
        let entries = parse_seed_manifest(json).unwrap();
        assert_eq!(entries.len(), 2);
        assert_eq!(
            entries[0].model.to_model(),
            DependentModel::Hypergeometric { total: 50, balls: 20, tracked: 10 }
        );
        let back = serde_json::to_string(&entries).unwrap();
        let again = parse_seed_manifest(&back).unwrap();
        assert_eq!(entries, again);
    }

    #[test]
    fn witness_precondition_errors() {
        assert!(matches!(
            find_heavy_tail_witness(4.0, 0.4, 10.0),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            find_heavy_tail_witness(-1.0, 0.1, 10.0),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn geometric_tail_limit_sanity() {
        // As r -> 1, P(Y > (1+alpha)/(1-r)) approaches e^{-(1+alpha)}.
        let alpha = 4.0;
        let r = 0.999;
        let x = (1.0 + alpha) / (1.0 - r);
        let tail = geometric_upper_tail(r, x);
        let limit = (-(1.0 + alpha)).exp();
        assert!((tail - limit).abs() / limit < 0.02, "{tail} vs {limit}");
    }
}
