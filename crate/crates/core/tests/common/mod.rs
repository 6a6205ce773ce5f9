//! Shared oracle helpers for the integration suites. Everything here is
//! deliberately independent of the implementation paths it checks: series
//! arithmetic over rationals for cumulant finite differences, direct
//! enumeration of the urn couplings, and a plain Pearson chi-square.

#![allow(dead_code)]

use std::collections::BTreeMap;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Signed, Zero};

use tailbounds::exact::ExactDistribution;
use tailbounds::rational::{parse_rational, rational_to_f64};

pub fn rat(s: &str) -> BigRational {
    parse_rational(s).unwrap()
}

// ---------------------------------------------------------------------------
// Fixed-precision rational series arithmetic (~100 significant digits)
// ---------------------------------------------------------------------------

const PREC_BITS: u32 = 360;

fn round_prec(r: &BigRational) -> BigRational {
    let scale = BigInt::one() << PREC_BITS;
    let scaled = (r * BigRational::from_integer(scale.clone())).floor();
    BigRational::new(scaled.to_integer(), scale)
}

fn tiny() -> BigRational {
    BigRational::new(BigInt::one(), BigInt::one() << (PREC_BITS - 20))
}

/// `e^x` by Taylor series; meant for `|x| <= 2`.
pub fn exp_rational(x: &BigRational) -> BigRational {
    let mut term = BigRational::one();
    let mut sum = BigRational::one();
    for j in 1..500u32 {
        term = round_prec(&(&term * x / BigRational::from_integer(j.into())));
        sum += &term;
        if term.abs() < tiny() {
            break;
        }
    }
    round_prec(&sum)
}

/// `ln s` for `s` near 1, via `2 atanh((s-1)/(s+1))`.
pub fn ln_rational_near_one(s: &BigRational) -> BigRational {
    let one = BigRational::one();
    let u = round_prec(&((s - &one) / (s + &one)));
    let u2 = round_prec(&(&u * &u));
    let mut term = u.clone();
    let mut sum = u.clone();
    let mut k = 1u32;
    loop {
        term = round_prec(&(&term * &u2));
        k += 2;
        let add = &term / BigRational::from_integer(k.into());
        sum += &add;
        if add.abs() < tiny() {
            break;
        }
    }
    round_prec(&(sum * BigRational::from_integer(2.into())))
}

/// Centered cumulant generating function `ln E e^{t(X - EX)}` of an exact
/// distribution, evaluated in fixed-precision rational arithmetic.
pub fn centered_cgf(dist: &ExactDistribution, t: &BigRational) -> BigRational {
    let pmf = dist.rational_pmf().expect("exact mode");
    let lambda = dist.mean_rational().unwrap();
    let mut sum = BigRational::zero();
    for (i, w) in pmf.iter().enumerate() {
        let dev = BigRational::from_integer((dist.support_min() + i as i64).into()) - &lambda;
        sum += round_prec(&(w * &exp_rational(&(t * &dev))));
    }
    ln_rational_near_one(&sum)
}

/// Third and fourth cumulants by 4th-order central finite differences of
/// the centered CGF at 0, with two Richardson levels (leading error
/// `O(h^6)` at `h = 1/64`). An oracle wholly independent of the closed
/// cumulant formulas.
pub fn finite_difference_cumulants(dist: &ExactDistribution) -> (f64, f64) {
    let half = BigRational::new(1.into(), 2.into());
    let stencil = |h: &BigRational| -> (BigRational, BigRational) {
        let k2h = centered_cgf(dist, &(h * BigRational::from_integer(2.into())));
        let k1h = centered_cgf(dist, h);
        let km1h = centered_cgf(dist, &(-h.clone()));
        let km2h = centered_cgf(dist, &(-(h * BigRational::from_integer(2.into()))));
        let two = BigRational::from_integer(2.into());
        let four = BigRational::from_integer(4.into());
        let h3 = h * h * h;
        let h4 = &h3 * h;
        let k3 = (&k2h - &two * &k1h + &two * &km1h - &km2h) / (&two * &h3);
        let k4 = (&k2h - &four * &k1h - &four * &km1h + &km2h) / h4;
        (round_prec(&k3), round_prec(&k4))
    };
    let richardson = |a: &BigRational, b: &BigRational, factor: i64| -> BigRational {
        // b computed at h/2; kills the h^{2} (factor 4) or h^{4} (factor 16)
        // error term.
        let f = BigRational::from_integer(factor.into());
        (&f * b - a) / (f - BigRational::one())
    };
    let h0 = BigRational::new(1.into(), 64.into());
    let h1 = &h0 * &half;
    let h2 = &h1 * &half;
    let (k3_a, k4_a) = stencil(&h0);
    let (k3_b, k4_b) = stencil(&h1);
    let (k3_c, k4_c) = stencil(&h2);
    let k3_ab = richardson(&k3_a, &k3_b, 4);
    let k3_bc = richardson(&k3_b, &k3_c, 4);
    let k3 = richardson(&k3_ab, &k3_bc, 16);
    let k4_ab = richardson(&k4_a, &k4_b, 4);
    let k4_bc = richardson(&k4_b, &k4_c, 4);
    let k4 = richardson(&k4_ab, &k4_bc, 16);
    (rational_to_f64(&k3), rational_to_f64(&k4))
}

// ---------------------------------------------------------------------------
// Pearson chi-square
// ---------------------------------------------------------------------------

/// p-value of the Pearson statistic for observed counts against exact
/// category probabilities (degrees of freedom = categories - 1).
pub fn chi_square_p_value(observed: &BTreeMap<u64, u64>, expected: &BTreeMap<u64, BigRational>, trials: u64) -> f64 {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    let mut stat = 0.0f64;
    let mut categories = 0usize;
    let t = trials as f64;
    for (mask, p) in expected {
        let e = rational_to_f64(p) * t;
        if e == 0.0 {
            assert!(!observed.contains_key(mask), "mass observed on a null category");
            continue;
        }
        categories += 1;
        let o = *observed.get(mask).unwrap_or(&0) as f64;
        stat += (o - e) * (o - e) / e;
    }
    for mask in observed.keys() {
        assert!(expected.contains_key(mask), "observed pattern {mask:#b} has zero probability");
    }
    let df = (categories - 1) as f64;
    if df == 0.0 {
        return 1.0;
    }
    let dist = ChiSquared::new(df).unwrap();
    1.0 - dist.cdf(stat)
}

// ---------------------------------------------------------------------------
// Exact laws of the urn couplings by direct enumeration
// ---------------------------------------------------------------------------
//
// These enumerators re-derive the constructions from scratch (bitmask
// subsets, base-n ball assignments) so they share no code with the
// library's samplers.

fn mask_first_n(mask: u64, n: usize) -> u64 {
    mask & ((1u64 << n) - 1)
}

/// Law of the indicator vector of the first `n` urns conditioned on urn
/// `j` being occupied, for `m` balls in distinct urns among `total`.
pub fn hyper_conditional_law(total: usize, m: usize, n: usize, j: usize) -> BTreeMap<u64, BigRational> {
    let mut law: BTreeMap<u64, BigRational> = BTreeMap::new();
    let mut count = 0u64;
    for mask in 0u64..(1 << total) {
        if mask.count_ones() as usize != m || mask & (1 << j) == 0 {
            continue;
        }
        count += 1;
        *law.entry(mask_first_n(mask, n)).or_insert_with(BigRational::zero) += BigRational::one();
    }
    for v in law.values_mut() {
        *v /= BigRational::from_integer(count.into());
    }
    law
}

/// Law of the companion vector produced by the move-a-ball coupling.
pub fn hyper_coupling_law(total: usize, m: usize, n: usize, j: usize) -> BTreeMap<u64, BigRational> {
    let mut law: BTreeMap<u64, BigRational> = BTreeMap::new();
    let mut subsets = 0u64;
    for mask in 0u64..(1 << total) {
        if mask.count_ones() as usize != m {
            continue;
        }
        subsets += 1;
    }
    let base = BigRational::new(1.into(), subsets.into());
    for mask in 0u64..(1 << total) {
        if mask.count_ones() as usize != m {
            continue;
        }
        if mask & (1 << j) != 0 {
            *law.entry(mask_first_n(mask, n)).or_insert_with(BigRational::zero) += &base;
        } else {
            let per_ball = &base / BigRational::from_integer(m.into());
            for u in 0..total {
                if mask & (1 << u) != 0 {
                    let moved = (mask & !(1 << u)) | (1 << j);
                    *law.entry(mask_first_n(moved, n)).or_insert_with(BigRational::zero) +=
                        &per_ball;
                }
            }
        }
    }
    law
}

fn empties_mask(counts: &[u32]) -> u64 {
    counts
        .iter()
        .enumerate()
        .fold(0u64, |acc, (i, &c)| if c == 0 { acc | (1 << i) } else { acc })
}

/// Law of the empty-urn indicator vector conditioned on urn `j` empty,
/// `m` balls uniform over `n` urns.
pub fn occupancy_conditional_law(n: usize, m: usize, j: usize) -> BTreeMap<u64, BigRational> {
    let mut law: BTreeMap<u64, BigRational> = BTreeMap::new();
    let mut total = BigRational::zero();
    let assignments = (n as u64).pow(m as u32);
    let base = BigRational::new(1.into(), assignments.into());
    for code in 0..assignments {
        let mut counts = vec![0u32; n];
        let mut c = code;
        for _ in 0..m {
            counts[(c % n as u64) as usize] += 1;
            c /= n as u64;
        }
        if counts[j] != 0 {
            continue;
        }
        total += &base;
        *law.entry(empties_mask(&counts)).or_insert_with(BigRational::zero) += &base;
    }
    for v in law.values_mut() {
        *v /= &total;
    }
    law
}

/// Law of the companion vector produced by the rethrow coupling (each ball
/// in urn `j` redistributed uniformly over the other urns).
pub fn occupancy_coupling_law(n: usize, m: usize, j: usize) -> BTreeMap<u64, BigRational> {
    let mut law: BTreeMap<u64, BigRational> = BTreeMap::new();
    let assignments = (n as u64).pow(m as u32);
    let base = BigRational::new(1.into(), assignments.into());
    for code in 0..assignments {
        let mut counts = vec![0u32; n];
        let mut c = code;
        for _ in 0..m {
            counts[(c % n as u64) as usize] += 1;
            c /= n as u64;
        }
        let displaced = counts[j] as usize;
        counts[j] = 0;
        if displaced == 0 {
            *law.entry(empties_mask(&counts)).or_insert_with(BigRational::zero) += &base;
            continue;
        }
        // Every rethrow pattern over the n-1 other urns, uniformly.
        let others: Vec<usize> = (0..n).filter(|&u| u != j).collect();
        let patterns = (others.len() as u64).pow(displaced as u32);
        let w = &base / BigRational::from_integer(patterns.into());
        for pat in 0..patterns {
            let mut after = counts.clone();
            let mut p = pat;
            for _ in 0..displaced {
                after[others[(p % others.len() as u64) as usize]] += 1;
                p /= others.len() as u64;
            }
            *law.entry(empties_mask(&after)).or_insert_with(BigRational::zero) += &w;
        }
    }
    law
}

/// Sum of a law's masses; every enumerator above must return exactly 1.
pub fn law_total(law: &BTreeMap<u64, BigRational>) -> BigRational {
    law.values().sum()
}
