//! Exact distributions, tails, MGFs and cumulants for sums of independent
//! indicators. These are the ground truth the bound catalog is verified
//! against, so the default arithmetic is exact rationals; a flagged
//! double-precision mode covers sizes where rationals are impractical.

use num::rational::BigRational;
use num::traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{binomial_coefficient, log_of_rational_abs, rational_pow, rational_to_f64};
use crate::spec::Side;

/// Switch-over point between rational and double-precision pmf storage.
pub const RATIONAL_SIZE_LIMIT: usize = 200;

/// Probability masses in one of the two storage modes.
#[derive(Debug, Clone, PartialEq)]
pub enum Pmf {
    /// Exact rationals summing to exactly 1.
    Exact(Vec<BigRational>),
    /// Doubles summing to 1 within `1e-15` of float error.
    Approx(Vec<f64>),
}

/// A distribution on finitely many consecutive integers
/// `offset, offset+1, ..., offset + len - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactDistribution {
    offset: i64,
    probs: Pmf,
}

impl ExactDistribution {
    /// Builds from a rational pmf; trims zero mass at both ends, checks the
    /// masses are nonnegative and sum to exactly 1.
    pub fn from_rational_pmf(offset: i64, probs: Vec<BigRational>) -> Result<Self> {
        if probs.iter().any(|p| p.is_negative()) {
            return Err(Error::domain("negative probability mass"));
        }
        let total: BigRational = probs.iter().sum();
        if !total.is_one() {
            return Err(Error::domain(format!(
                "pmf sums to {} instead of 1",
                crate::rational::format_rational(&total)
            )));
        }
        let first = probs.iter().position(|p| !p.is_zero()).expect("total is 1");
        let last = probs.iter().rposition(|p| !p.is_zero()).expect("total is 1");
        let trimmed = probs[first..=last].to_vec();
        Ok(ExactDistribution { offset: offset + first as i64, probs: Pmf::Exact(trimmed) })
    }

    /// Builds from a double pmf (flagged approximate mode).
    pub fn from_f64_pmf(offset: i64, probs: Vec<f64>) -> Result<Self> {
        if probs.iter().any(|&p| p.is_nan() || p < 0.0) {
            return Err(Error::domain("negative or NaN probability mass"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::domain(format!("pmf sums to {total} instead of 1")));
        }
        let first = probs.iter().position(|&p| p > 0.0).unwrap_or(0);
        let last = probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
        let trimmed = probs[first..=last].to_vec();
        Ok(ExactDistribution { offset: offset + first as i64, probs: Pmf::Approx(trimmed) })
    }

    /// Point mass at `value`.
    pub fn degenerate(value: i64) -> Self {
        ExactDistribution { offset: value, probs: Pmf::Exact(vec![BigRational::one()]) }
    }

    /// Exact binomial pmf, built from binomial coefficients and rational
    /// powers.
    pub fn binomial(n: u64, p: &BigRational) -> Result<Self> {
        check_rational_probability(p)?;
        let q = BigRational::one() - p;
        if p.is_zero() {
            return Ok(Self::degenerate(0));
        }
        if q.is_zero() {
            return Ok(Self::degenerate(n as i64));
        }
        let mut probs = Vec::with_capacity(n as usize + 1);
        // q^n, then multiply by p/q stepwise alongside the coefficient.
        let ratio = p / &q;
        let mut power = rational_pow(&q, n as u32);
        for k in 0..=n {
            let coef = binomial_coefficient(n, k);
            probs.push(BigRational::from_integer(coef) * &power);
            power *= &ratio;
        }
        Self::from_rational_pmf(0, probs)
    }

    /// Exact pmf of a sum of independent indicators with the given success
    /// probabilities, by sequential convolution starting from the point mass
    /// at 0.
    pub fn poisson_binomial(ps: &[BigRational]) -> Result<Self> {
        for p in ps {
            check_rational_probability(p)?;
        }
        let mut probs = vec![BigRational::one()];
        for p in ps {
            let q = BigRational::one() - p;
            let mut next = vec![BigRational::zero(); probs.len() + 1];
            for (j, w) in probs.iter().enumerate() {
                if w.is_zero() {
                    continue;
                }
                next[j] += w * &q;
                next[j + 1] += w * p;
            }
            probs = next;
        }
        Self::from_rational_pmf(0, probs)
    }

    /// Double-precision convolution for sizes beyond the rational limit.
    pub fn poisson_binomial_f64(ps: &[f64]) -> Result<Self> {
        for &p in ps {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidProbability { name: "ps", value: p });
            }
        }
        let mut probs = vec![1.0f64];
        for &p in ps {
            let q = 1.0 - p;
            let mut next = vec![0.0f64; probs.len() + 1];
            for (j, &w) in probs.iter().enumerate() {
                next[j] += w * q;
                next[j + 1] += w * p;
            }
            probs = next;
        }
        Self::from_f64_pmf(0, probs)
    }

    /// Chooses rational or double mode by the size cutoff.
    pub fn poisson_binomial_auto(ps: &[BigRational]) -> Result<Self> {
        if ps.len() <= RATIONAL_SIZE_LIMIT {
            Self::poisson_binomial(ps)
        } else {
            let f: Vec<f64> = ps.iter().map(rational_to_f64).collect();
            Self::poisson_binomial_f64(&f)
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.probs, Pmf::Exact(_))
    }

    pub fn support_min(&self) -> i64 {
        self.offset
    }

    pub fn support_max(&self) -> i64 {
        self.offset + self.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        match &self.probs {
            Pmf::Exact(v) => v.len(),
            Pmf::Approx(v) => v.len(),
        }
    }

    // A distribution always carries at least one support point.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// `P(X = k)` as a rational; `None` in approximate mode.
    pub fn prob_rational(&self, k: i64) -> Option<BigRational> {
        match &self.probs {
            Pmf::Exact(v) => {
                if k < self.offset || k > self.support_max() {
                    Some(BigRational::zero())
                } else {
                    Some(v[(k - self.offset) as usize].clone())
                }
            }
            Pmf::Approx(_) => None,
        }
    }

    /// `P(X = k)` as a double (both modes).
    pub fn prob_f64(&self, k: i64) -> f64 {
        if k < self.offset || k > self.support_max() {
            return 0.0;
        }
        let i = (k - self.offset) as usize;
        match &self.probs {
            Pmf::Exact(v) => rational_to_f64(&v[i]),
            Pmf::Approx(v) => v[i],
        }
    }

    /// The rational pmf, when in exact mode.
    pub fn rational_pmf(&self) -> Option<&[BigRational]> {
        match &self.probs {
            Pmf::Exact(v) => Some(v),
            Pmf::Approx(_) => None,
        }
    }

    pub fn f64_pmf(&self) -> Vec<f64> {
        match &self.probs {
            Pmf::Exact(v) => v.iter().map(rational_to_f64).collect(),
            Pmf::Approx(v) => v.clone(),
        }
    }

    pub fn mean_rational(&self) -> Option<BigRational> {
        let pmf = self.rational_pmf()?;
        let mut acc = BigRational::zero();
        for (i, w) in pmf.iter().enumerate() {
            acc += w * BigRational::from_integer((self.offset + i as i64).into());
        }
        Some(acc)
    }

    pub fn variance_rational(&self) -> Option<BigRational> {
        let mean = self.mean_rational()?;
        let pmf = self.rational_pmf()?;
        let mut acc = BigRational::zero();
        for (i, w) in pmf.iter().enumerate() {
            let d = BigRational::from_integer((self.offset + i as i64).into()) - &mean;
            acc += w * &d * &d;
        }
        Some(acc)
    }

    pub fn mean(&self) -> f64 {
        match &self.probs {
            Pmf::Exact(_) => rational_to_f64(&self.mean_rational().unwrap()),
            Pmf::Approx(v) => v
                .iter()
                .enumerate()
                .map(|(i, w)| w * (self.offset + i as i64) as f64)
                .sum(),
        }
    }

    pub fn variance(&self) -> f64 {
        match &self.probs {
            Pmf::Exact(_) => rational_to_f64(&self.variance_rational().unwrap()),
            Pmf::Approx(v) => {
                let m = self.mean();
                v.iter()
                    .enumerate()
                    .map(|(i, w)| {
                        let d = (self.offset + i as i64) as f64 - m;
                        w * d * d
                    })
                    .sum()
            }
        }
    }

    /// `P(X >= threshold)` or `P(X <= threshold)` at an exact rational
    /// threshold (exact mode only).
    pub fn tail_rational(&self, side: Side, threshold: &BigRational) -> Option<BigRational> {
        let pmf = self.rational_pmf()?;
        let mut acc = BigRational::zero();
        for (i, w) in pmf.iter().enumerate() {
            let k = BigRational::from_integer((self.offset + i as i64).into());
            let include = match side {
                Side::Upper => k >= *threshold,
                Side::Lower => k <= *threshold,
            };
            if include {
                acc += w;
            }
        }
        Some(acc)
    }

    /// Strict version: `P(X > threshold)` / `P(X < threshold)`.
    pub fn tail_rational_strict(&self, side: Side, threshold: &BigRational) -> Option<BigRational> {
        let pmf = self.rational_pmf()?;
        let mut acc = BigRational::zero();
        for (i, w) in pmf.iter().enumerate() {
            let k = BigRational::from_integer((self.offset + i as i64).into());
            let include = match side {
                Side::Upper => k > *threshold,
                Side::Lower => k < *threshold,
            };
            if include {
                acc += w;
            }
        }
        Some(acc)
    }

    /// Tail at a real threshold, both modes. A threshold within `1e-9`
    /// relative of an integer snaps to it, so boundary mass is included
    /// rather than lost to float noise.
    pub fn tail_f64(&self, side: Side, threshold: f64) -> f64 {
        let k = snap_threshold(side, threshold);
        let (lo, hi) = match side {
            Side::Upper => (k.max(self.support_min()), self.support_max()),
            Side::Lower => (self.support_min(), k.min(self.support_max())),
        };
        if lo > hi {
            return 0.0;
        }
        match &self.probs {
            Pmf::Exact(v) => {
                let mut acc = BigRational::zero();
                for k in lo..=hi {
                    acc += &v[(k - self.offset) as usize];
                }
                rational_to_f64(&acc)
            }
            Pmf::Approx(v) => (lo..=hi).map(|k| v[(k - self.offset) as usize]).sum(),
        }
    }

    /// Natural log of `tail_f64`, robust for tails far below double range
    /// in exact mode.
    pub fn log_tail_f64(&self, side: Side, threshold: f64) -> f64 {
        let k = snap_threshold(side, threshold);
        let (lo, hi) = match side {
            Side::Upper => (k.max(self.support_min()), self.support_max()),
            Side::Lower => (self.support_min(), k.min(self.support_max())),
        };
        if lo > hi {
            return f64::NEG_INFINITY;
        }
        match &self.probs {
            Pmf::Exact(v) => {
                let mut acc = BigRational::zero();
                for k in lo..=hi {
                    acc += &v[(k - self.offset) as usize];
                }
                log_of_rational_abs(&acc)
            }
            Pmf::Approx(v) => {
                let s: f64 = (lo..=hi).map(|k| v[(k - self.offset) as usize]).sum();
                s.ln()
            }
        }
    }

    /// `ln E e^{tX}` by log-sum-exp over the support.
    pub fn log_mgf(&self, t: f64) -> f64 {
        let pmf = self.f64_pmf();
        let mut best = f64::NEG_INFINITY;
        let terms: Vec<f64> = pmf
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(|(i, &w)| {
                let e = t * (self.offset + i as i64) as f64 + w.ln();
                if e > best {
                    best = e;
                }
                e
            })
            .collect();
        if terms.is_empty() || best == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        let sum: f64 = terms.iter().map(|e| (e - best).exp()).sum();
        best + sum.ln()
    }

    /// `E z^X` exactly, for rational `z` (exact mode only). Needs the
    /// support to be nonnegative when `z` is zero.
    pub fn pgf_rational(&self, z: &BigRational) -> Option<BigRational> {
        let pmf = self.rational_pmf()?;
        if self.offset < 0 {
            return None;
        }
        let mut acc = BigRational::zero();
        let mut power = rational_pow(z, self.offset as u32);
        for w in pmf {
            acc += w * &power;
            power *= z;
        }
        Some(acc)
    }

    /// The distribution conditioned on `X >= k`.
    pub fn conditioned_at_least(&self, k: i64) -> Result<Self> {
        match &self.probs {
            Pmf::Exact(v) => {
                let lo = k.max(self.offset);
                if lo > self.support_max() {
                    return Err(Error::domain(format!(
                        "conditioning event X >= {k} has zero mass"
                    )));
                }
                let slice: Vec<BigRational> = v[(lo - self.offset) as usize..].to_vec();
                let mass: BigRational = slice.iter().sum();
                if mass.is_zero() {
                    return Err(Error::domain(format!(
                        "conditioning event X >= {k} has zero mass"
                    )));
                }
                let probs: Vec<BigRational> = slice.into_iter().map(|w| w / &mass).collect();
                Self::from_rational_pmf(lo, probs)
            }
            Pmf::Approx(_) => Err(Error::UnsupportedSpec(
                "conditioning needs the exact-rational mode".into(),
            )),
        }
    }
}

fn check_rational_probability(p: &BigRational) -> Result<()> {
    if p.is_negative() || *p > BigRational::one() {
        return Err(Error::InvalidProbability { name: "p", value: rational_to_f64(p) });
    }
    Ok(())
}

/// Integer cutoff for a real threshold: snap to a nearby integer first
/// (conservatively keeping boundary mass), otherwise round inward.
fn snap_threshold(side: Side, threshold: f64) -> i64 {
    let nearest = threshold.round();
    let snapped = if (threshold - nearest).abs() <= 1e-9 * threshold.abs().max(1.0) {
        nearest
    } else {
        match side {
            Side::Upper => threshold.ceil(),
            Side::Lower => threshold.floor(),
        }
    };
    snapped as i64
}

/// First four cumulants of an indicator sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CumulantSet {
    pub kappa1: f64,
    pub kappa2: f64,
    pub kappa3: f64,
    pub kappa4: f64,
}

/// Cumulants of `sum Be(p_i)` by additivity over independent summands:
/// `k1 = sum p`, `k2 = sum pq`, `k3 = sum pq(1-2p)`, `k4 = sum pq(1-6pq)`.
pub fn cumulants(ps: &[f64]) -> Result<CumulantSet> {
    let mut k = CumulantSet { kappa1: 0.0, kappa2: 0.0, kappa3: 0.0, kappa4: 0.0 };
    for &p in ps {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidProbability { name: "ps", value: p });
        }
        let q = 1.0 - p;
        let pq = p * q;
        k.kappa1 += p;
        k.kappa2 += pq;
        k.kappa3 += pq * (1.0 - 2.0 * p);
        k.kappa4 += pq * (1.0 - 6.0 * pq);
    }
    Ok(k)
}

/// `P(Po(lambda) >= k)` by forward summation of the pmf with an explicit
/// geometric remainder bound below `1e-15` of the result.
pub fn poisson_tail(lambda: f64, k: i64) -> Result<f64> {
    if !lambda.is_finite() || lambda <= 0.0 {
        return Err(Error::domain(format!("lambda = {lambda} must be > 0")));
    }
    if k <= 0 {
        return Ok(1.0);
    }
    // pmf(0..k) by the multiplicative recurrence, then sum the upper tail
    // until the remainder bound is negligible.
    let mut pmf = (-lambda).exp();
    if pmf == 0.0 {
        return Err(Error::domain(format!(
            "lambda = {lambda} too large for direct summation"
        )));
    }
    for j in 0..k {
        pmf *= lambda / (j + 1) as f64;
    }
    // pmf now holds P(Po = k).
    let mut sum = 0.0f64;
    let mut j = k;
    let mut term = pmf;
    loop {
        sum += term;
        j += 1;
        term *= lambda / j as f64;
        // Once the ratio drops below 1/2 the remaining mass is under
        // 2 * term; stop when that is below 1e-16 of the running sum.
        let ratio = lambda / (j + 1) as f64;
        if ratio < 0.5 && 2.0 * term < 1e-16 * sum.max(f64::MIN_POSITIVE) {
            sum += term;
            break;
        }
    }
    Ok(sum.min(1.0))
}
