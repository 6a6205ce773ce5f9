//! Probability generating functions as exact rational polynomials:
//! real-rootedness decided by Sturm sequences over the rationals, and
//! factorization of real-rooted PGFs into independent Bernoulli components.
//!
//! Realness is the load-bearing claim, so it is decided exactly; numeric
//! refinement (rational bisection) is used only afterward to extract the
//! component probabilities to high precision.

use num::rational::BigRational;
use num::traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exact::ExactDistribution;
use crate::rational::rational_to_f64;

/// A polynomial with exact rational coefficients, index = power.
/// Trailing zero coefficients are trimmed; the zero polynomial is `[]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalPolynomial {
    coeffs: Vec<BigRational>,
}

impl RationalPolynomial {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        RationalPolynomial { coeffs }
    }

    pub fn zero() -> Self {
        RationalPolynomial { coeffs: vec![] }
    }

    /// PGF of a finite distribution: the coefficient of `x^k` is `P(X = k)`.
    /// Exact mode with nonnegative support required.
    pub fn from_distribution(dist: &ExactDistribution) -> Result<Self> {
        let pmf = dist
            .rational_pmf()
            .ok_or_else(|| Error::UnsupportedSpec("PGF needs the exact-rational mode".into()))?;
        if dist.support_min() < 0 {
            return Err(Error::domain("PGF needs nonnegative support"));
        }
        let mut coeffs = vec![BigRational::zero(); dist.support_min() as usize];
        coeffs.extend_from_slice(pmf);
        Ok(Self::new(coeffs))
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        if self.is_zero() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn coeff(&self, k: usize) -> BigRational {
        self.coeffs.get(k).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::zero();
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * BigRational::from_integer(k.into()))
            .collect();
        Self::new(coeffs)
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut coeffs =
            vec![BigRational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Self::new(coeffs)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len).map(|k| self.coeff(k) - other.coeff(k)).collect();
        Self::new(coeffs)
    }

    /// Exact euclidean division: `self = q * div + r` with `deg r < deg div`.
    pub fn div_rem(&self, div: &Self) -> (Self, Self) {
        assert!(!div.is_zero(), "division by the zero polynomial");
        let d = div.degree().unwrap();
        if self.degree().is_none_or(|n| n < d) {
            return (Self::zero(), self.clone());
        }
        let mut rem = self.coeffs.clone();
        let n = self.degree().unwrap();
        let lead = &div.coeffs[d];
        let mut quot = vec![BigRational::zero(); n - d + 1];
        for k in (d..=n).rev() {
            let factor = &rem[k] / lead;
            if factor.is_zero() {
                continue;
            }
            for (j, c) in div.coeffs.iter().enumerate() {
                let idx = k - d + j;
                let delta = &factor * c;
                rem[idx] -= delta;
            }
            quot[k - d] = factor;
        }
        (Self::new(quot), Self::new(rem))
    }

    /// Divides every coefficient by |leading coefficient|: a positive
    /// scaling, so signs everywhere are preserved.
    fn scaled_by_leading_abs(&self) -> Self {
        match self.coeffs.last() {
            None => Self::zero(),
            Some(lead) => {
                let s = lead.abs();
                Self::new(self.coeffs.iter().map(|c| c / &s).collect())
            }
        }
    }

    fn monic(&self) -> Self {
        match self.coeffs.last() {
            None => Self::zero(),
            Some(lead) => Self::new(self.coeffs.iter().map(|c| c / lead).collect()),
        }
    }

    /// Monic gcd.
    pub fn gcd(&self, other: &Self) -> Self {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r.scaled_by_leading_abs();
        }
        a.monic()
    }

    /// The squarefree part `self / gcd(self, self')` (monic).
    pub fn squarefree_part(&self) -> Self {
        let g = self.gcd(&self.derivative());
        if g.degree() == Some(0) {
            return self.monic();
        }
        let (q, _) = self.div_rem(&g);
        q.monic()
    }

    /// Squarefree factorization: monic pairwise-coprime squarefree `f_i`
    /// with `self = lead * prod f_i^{m_i}` and distinct multiplicities.
    pub fn squarefree_factors(&self) -> Vec<(Self, usize)> {
        assert!(!self.is_zero());
        if self.degree() == Some(0) {
            return vec![];
        }
        let p = self.monic();
        let dp = p.derivative();
        let g = p.gcd(&dp);
        if g.degree() == Some(0) {
            return vec![(p, 1)];
        }
        let mut out = Vec::new();
        let (mut b, _) = p.div_rem(&g);
        let (c0, _) = dp.div_rem(&g);
        let mut d = c0.sub(&b.derivative());
        let mut i = 1usize;
        while b.degree().is_some_and(|deg| deg > 0) {
            let f = b.gcd(&d);
            if f.degree().is_some_and(|deg| deg > 0) {
                out.push((f.clone(), i));
            }
            let (nb, _) = b.div_rem(&f);
            let (nc, _) = d.div_rem(&f);
            b = nb;
            d = nc.sub(&b.derivative());
            i += 1;
        }
        out
    }

    /// Cauchy root bound: every root has magnitude below
    /// `1 + max |c_i| / |c_d|`.
    fn root_bound(&self) -> BigRational {
        let lead = self.coeffs.last().expect("nonzero").abs();
        let mut best = BigRational::zero();
        for c in &self.coeffs[..self.coeffs.len() - 1] {
            let v = c.abs() / &lead;
            if v > best {
                best = v;
            }
        }
        best + BigRational::one()
    }
}

/// Sturm chain of a squarefree polynomial.
struct SturmChain {
    chain: Vec<RationalPolynomial>,
}

impl SturmChain {
    fn new(f: &RationalPolynomial) -> Self {
        let mut chain = vec![f.clone(), f.derivative()];
        loop {
            let n = chain.len();
            if chain[n - 1].is_zero() {
                chain.pop();
                break;
            }
            let (_, r) = chain[n - 2].div_rem(&chain[n - 1]);
            if r.is_zero() {
                break;
            }
            // Negate, then rescale by a positive constant to contain growth.
            let neg = RationalPolynomial::zero().sub(&r).scaled_by_leading_abs();
            chain.push(neg);
        }
        SturmChain { chain }
    }

    fn variations_at(&self, x: &BigRational) -> usize {
        let mut count = 0;
        let mut prev: i8 = 0;
        for p in &self.chain {
            let v = p.eval(x);
            let s: i8 = if v.is_zero() {
                continue;
            } else if v.is_positive() {
                1
            } else {
                -1
            };
            if prev != 0 && s != prev {
                count += 1;
            }
            prev = s;
        }
        count
    }

    /// Number of distinct roots in `(lo, hi)`, endpoints non-roots.
    fn count_in(&self, lo: &BigRational, hi: &BigRational) -> usize {
        self.variations_at(lo) - self.variations_at(hi)
    }
}

/// An isolated real root: either the exact rational point (`low == high`)
/// or an open interval with a sign change containing exactly one root.
#[derive(Debug, Clone, PartialEq)]
pub struct IsolatedRoot {
    pub low: BigRational,
    pub high: BigRational,
    pub multiplicity: usize,
}

impl IsolatedRoot {
    pub fn midpoint(&self) -> BigRational {
        (&self.low + &self.high) / BigRational::from_integer(2.into())
    }

    pub fn is_exact(&self) -> bool {
        self.low == self.high
    }
}

/// Outcome of the exact real-rootedness decision.
#[derive(Debug, Clone, PartialEq)]
pub enum RealRootedness {
    /// All roots real; isolating intervals with multiplicities are the
    /// certificate (multiplicities sum to the degree).
    RealRooted { roots: Vec<IsolatedRoot> },
    /// Some roots are complex: the Sturm count of distinct real roots falls
    /// short of the degree of the squarefree part; the deficit counts the
    /// conjugate pairs.
    NotRealRooted {
        real_root_count: usize,
        squarefree_degree: usize,
        conjugate_pairs: usize,
    },
}

impl RealRootedness {
    pub fn verdict(&self) -> bool {
        matches!(self, RealRootedness::RealRooted { .. })
    }
}

/// Isolates the real roots of a squarefree polynomial into disjoint
/// intervals (or exact points), each holding exactly one root.
fn isolate_roots_squarefree(f: &RationalPolynomial) -> Vec<(BigRational, BigRational)> {
    let deg = f.degree().unwrap_or(0);
    if deg == 0 {
        return vec![];
    }
    let chain = SturmChain::new(f);
    let bound = f.root_bound();
    let lo = -bound.clone();
    let hi = bound;
    // Cauchy endpoints are never roots.
    let mut out = Vec::new();
    let mut stack = vec![(lo.clone(), hi.clone(), chain.count_in(&lo, &hi))];
    let two = BigRational::from_integer(2.into());
    while let Some((lo, hi, n)) = stack.pop() {
        match n {
            0 => {}
            1 => out.push((lo, hi)),
            _ => {
                // Pick a non-root split point.
                let mut mid = (&lo + &hi) / &two;
                while f.eval(&mid).is_zero() {
                    // Exact root at the candidate; nudge the split and let
                    // the half containing it isolate it.
                    mid = (&lo + &mid) / &two;
                }
                let left = chain.count_in(&lo, &mid);
                stack.push((lo, mid.clone(), left));
                stack.push((mid, hi, n - left));
            }
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

/// Shrinks an isolating interval by sign bisection until `done(lo, hi)`
/// holds; collapses to an exact point if a bisection midpoint lands on the
/// root.
fn refine_root(
    f: &RationalPolynomial,
    lo: &BigRational,
    hi: &BigRational,
    done: &dyn Fn(&BigRational, &BigRational) -> bool,
) -> (BigRational, BigRational) {
    let mut lo = lo.clone();
    let mut hi = hi.clone();
    let two = BigRational::from_integer(2.into());
    let f_lo = f.eval(&lo);
    if f_lo.is_zero() {
        return (lo.clone(), lo);
    }
    if f.eval(&hi).is_zero() {
        return (hi.clone(), hi);
    }
    let mut lo_positive = f_lo.is_positive();
    loop {
        if done(&lo, &hi) {
            return (lo, hi);
        }
        let mid = (&lo + &hi) / &two;
        let f_mid = f.eval(&mid);
        if f_mid.is_zero() {
            return (mid.clone(), mid);
        }
        if f_mid.is_positive() == lo_positive {
            lo = mid;
            lo_positive = f_mid.is_positive();
        } else {
            hi = mid;
        }
    }
}

/// Stopping rule: plain interval width at most `2^-shift` times the scale
/// of the endpoints.
fn width_done(shift: u32) -> impl Fn(&BigRational, &BigRational) -> bool {
    move |lo: &BigRational, hi: &BigRational| {
        let scale = lo.abs().max(hi.abs()).max(BigRational::one());
        (hi - lo) * BigRational::from_integer(num::BigInt::from(2).pow(shift)) <= scale
    }
}

/// Decides, exactly, whether every root of `poly` is real.
pub fn real_rootedness(poly: &RationalPolynomial) -> Result<RealRootedness> {
    if poly.is_zero() {
        return Err(Error::domain("zero polynomial"));
    }
    if poly.degree() == Some(0) {
        return Ok(RealRootedness::RealRooted { roots: vec![] });
    }
    let squarefree = poly.squarefree_part();
    let sf_degree = squarefree.degree().unwrap();
    let isolated = isolate_roots_squarefree(&squarefree);
    if isolated.len() < sf_degree {
        return Ok(RealRootedness::NotRealRooted {
            real_root_count: isolated.len(),
            squarefree_degree: sf_degree,
            conjugate_pairs: (sf_degree - isolated.len()) / 2,
        });
    }
    // All distinct roots are real; attach multiplicities factor by factor
    // and tighten the certificate intervals (rational roots collapse to
    // exact points along the way).
    let done = width_done(40);
    let mut roots = Vec::new();
    for (factor, mult) in poly.squarefree_factors() {
        for (lo, hi) in isolate_roots_squarefree(&factor) {
            let (lo, hi) = refine_root(&factor, &lo, &hi, &done);
            roots.push(IsolatedRoot { low: lo, high: hi, multiplicity: mult });
        }
    }
    roots.sort_by(|a, b| a.low.cmp(&b.low));
    Ok(RealRootedness::RealRooted { roots })
}

/// Convenience wrapper over [`real_rootedness`].
pub fn is_real_rooted(poly: &RationalPolynomial) -> Result<bool> {
    Ok(real_rootedness(poly)?.verdict())
}

/// A real-rooted PGF factored into independent Bernoulli components.
#[derive(Debug, Clone)]
pub struct BernoulliDecomposition {
    /// Success probabilities, one per component (multiplicities expanded),
    /// sorted descending. Roots at the origin contribute `p = 1` entries.
    pub ps: Vec<BigRational>,
    /// How many components came from roots at the origin (deterministic
    /// indicators equal to 1).
    pub zero_root_count: usize,
    /// Max absolute coefficient deviation between the reconstructed product
    /// and the input.
    pub residual: f64,
}

impl BernoulliDecomposition {
    pub fn p_values(&self) -> Vec<f64> {
        self.ps.iter().map(rational_to_f64).collect()
    }

    pub fn sum_p(&self) -> f64 {
        self.ps.iter().map(rational_to_f64).sum()
    }

    pub fn sum_pq(&self) -> f64 {
        self.ps
            .iter()
            .map(|p| {
                let pf = rational_to_f64(p);
                pf * (1.0 - pf)
            })
            .sum()
    }
}

fn check_is_pgf(poly: &RationalPolynomial) -> Result<()> {
    if poly.is_zero() {
        return Err(Error::domain("zero polynomial is not a PGF"));
    }
    if poly.coeffs().iter().any(|c| c.is_negative()) {
        return Err(Error::domain("PGF coefficients must be nonnegative"));
    }
    let total: BigRational = poly.coeffs().iter().sum();
    if !total.is_one() {
        return Err(Error::domain("PGF coefficients must sum to 1"));
    }
    Ok(())
}

/// Factors a real-rooted PGF as `prod (1 - p_i + p_i x)`.
///
/// Roots of the PGF sit at `-q_i/p_i <= 0`, so `p_i = 1/(1 - root)`; roots
/// at the origin are factored out first and reported as deterministic
/// components. Root refinement targets width `1e-40` in the mapped `p`
/// coordinate, and the reconstruction residual is computed exactly from the
/// refined rational midpoints before rounding to a double.
pub fn bernoulli_decomposition(poly: &RationalPolynomial) -> Result<BernoulliDecomposition> {
    check_is_pgf(poly)?;
    let rootedness = real_rootedness(poly)?;
    let RealRootedness::RealRooted { .. } = rootedness else {
        return Err(Error::precondition(
            "PGF has non-real roots; it is not a product of Bernoulli factors",
        ));
    };
    let zero_root_count = poly.coeffs().iter().position(|c| !c.is_zero()).unwrap();
    let reduced = RationalPolynomial::new(poly.coeffs()[zero_root_count..].to_vec());

    // Stop once the mapped probability interval [1/(1-hi), 1/(1-lo)] is
    // narrower than 1e-40; for roots left of 1 its width is exactly
    // (hi - lo)/((1-hi)(1-lo)).
    let tol = BigRational::new(1.into(), num::BigInt::from(10).pow(40));
    let one = BigRational::one();
    let done = move |lo: &BigRational, hi: &BigRational| {
        ((hi - lo) / ((&one - hi) * (&one - lo))).abs() <= tol
    };
    let mut ps: Vec<BigRational> = vec![BigRational::one(); zero_root_count];
    if reduced.degree().unwrap() > 0 {
        for (factor, mult) in reduced.squarefree_factors() {
            for (lo, hi) in isolate_roots_squarefree(&factor) {
                let (rlo, rhi) = refine_root(&factor, &lo, &hi, &done);
                let mid = (&rlo + &rhi) / BigRational::from_integer(2.into());
                if !mid.is_negative() {
                    return Err(Error::Diagnostic(format!(
                        "PGF root {} not negative; coefficients were not a pmf",
                        mid
                    )));
                }
                let p = (BigRational::one() - mid).recip();
                for _ in 0..mult {
                    ps.push(p.clone());
                }
            }
        }
    }

    // Exact reconstruction from the recovered probabilities.
    let mut recon = RationalPolynomial::new(vec![BigRational::one()]);
    for p in &ps[zero_root_count..] {
        let factor = RationalPolynomial::new(vec![BigRational::one() - p, p.clone()]);
        recon = recon.mul(&factor);
    }
    let mut shifted = vec![BigRational::zero(); zero_root_count];
    shifted.extend_from_slice(recon.coeffs());
    let recon = RationalPolynomial::new(shifted);
    let len = poly.coeffs().len().max(recon.coeffs().len());
    let residual = (0..len)
        .map(|k| rational_to_f64(&(poly.coeff(k) - recon.coeff(k)).abs()))
        .fold(0.0f64, f64::max);

    ps.sort_by(|a, b| b.cmp(a));
    Ok(BernoulliDecomposition { ps, zero_root_count, residual })
}
