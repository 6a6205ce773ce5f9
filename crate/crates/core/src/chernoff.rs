//! Numeric Chernoff optimization over moment generating functions, plus the
//! refined variance-aware machinery: the two-point measure reduction, the
//! `(1 -+ t)`-moment bounds it yields, the closed-form optimized lower-tail
//! bound, and the `g` exponent function.
//!
//! The optimizer works in the exponential parametrization `t = e^s - 1`
//! (upper) or `t = 1 - e^s` (lower), which turns both moment bounds into
//! convex objectives over an unbounded `s`-axis; brackets expand by doubling
//! and golden-section search terminates at interval width `1e-12`.

use crate::bound::{BoundId, LogBound};
use crate::error::{Error, Result};
use crate::exact::ExactDistribution;
use crate::spec::{IndicatorSumSpec, Side, TailQuery};

/// Contract for `t -> ln E e^{tX}` evaluators. Must be side-effect-free;
/// the value at `t = 0` must be 0 and the function convex on the declared
/// range.
pub trait MgfEvaluator {
    fn log_mgf(&self, t: f64) -> f64;

    /// Declared valid `t`-interval; the optimizer additionally caps its
    /// working range at `|t| <= 700`.
    fn t_range(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }
}

/// `ln(1 + p(e^t - 1))` for one indicator, stable across the whole axis.
fn log_mgf_bernoulli(p: f64, t: f64) -> f64 {
    if t > 0.0 {
        // ln(q + p e^t) = t + ln(p + q e^{-t})
        t + (p + (1.0 - p) * (-t).exp()).ln()
    } else {
        (p * t.exp_m1()).ln_1p()
    }
}

/// MGF of `Bi(n, p)`.
#[derive(Debug, Clone, Copy)]
pub struct BinomialMgf {
    pub n: f64,
    pub p: f64,
}

impl MgfEvaluator for BinomialMgf {
    fn log_mgf(&self, t: f64) -> f64 {
        self.n * log_mgf_bernoulli(self.p, t)
    }
}

/// Exact product-form MGF of a heterogeneous indicator sum.
#[derive(Debug, Clone)]
pub struct ProductMgf {
    pub ps: Vec<f64>,
}

impl MgfEvaluator for ProductMgf {
    fn log_mgf(&self, t: f64) -> f64 {
        self.ps.iter().map(|&p| log_mgf_bernoulli(p, t)).sum()
    }
}

/// MGF of `Po(lambda)`.
#[derive(Debug, Clone, Copy)]
pub struct PoissonMgf {
    pub lambda: f64,
}

impl MgfEvaluator for PoissonMgf {
    fn log_mgf(&self, t: f64) -> f64 {
        self.lambda * t.exp_m1()
    }

    fn t_range(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, 700.0)
    }
}

/// MGF read off a finite distribution by log-sum-exp.
#[derive(Debug, Clone)]
pub struct DistributionMgf {
    dist: ExactDistribution,
}

impl DistributionMgf {
    pub fn new(dist: ExactDistribution) -> Self {
        DistributionMgf { dist }
    }
}

impl MgfEvaluator for DistributionMgf {
    fn log_mgf(&self, t: f64) -> f64 {
        self.dist.log_mgf(t)
    }
}

const T_CAP: f64 = 700.0;
const GOLDEN_TOL: f64 = 1e-12;

/// Golden-section minimum of a convex function on `[lo, hi]`.
fn minimize_convex(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > GOLDEN_TOL {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    let mid = 0.5 * (lo + hi);
    (mid, f(mid))
}

/// Doubles the right edge from `[0, 1]` until the objective stops falling
/// (convexity then puts the minimum inside the bracket), and runs golden
/// section. Returns the minimum value (location discarded).
fn minimize_expanding(f: &dyn Fn(f64) -> f64, cap: f64) -> f64 {
    let cap = cap.clamp(GOLDEN_TOL, T_CAP);
    let mut hi = 1.0f64.min(cap);
    let mut best = f(hi);
    while hi < cap {
        let next = (hi * 2.0).min(cap);
        let f_next = f(next);
        let past_minimum = f_next >= best;
        hi = next;
        best = best.min(f_next);
        if past_minimum {
            break;
        }
    }
    let (_, fmin) = minimize_convex(f, 0.0, hi);
    fmin.min(best)
}

fn check_convexity(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> Result<()> {
    const POINTS: usize = 33;
    let step = (hi - lo) / (POINTS - 1) as f64;
    if step.is_nan() || step <= 0.0 {
        return Ok(());
    }
    let vals: Vec<f64> = (0..POINTS).map(|i| f(lo + i as f64 * step)).collect();
    let scale = vals.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    for w in vals.windows(3) {
        let second = w[0] - 2.0 * w[1] + w[2];
        if second < -1e-9 * scale {
            return Err(Error::Diagnostic(format!(
                "mgf evaluator is not convex: second difference {second} at scale {scale}"
            )));
        }
    }
    Ok(())
}

/// Numeric Chernoff bound: `inf_{t >= 0} [-t(EX + a) + ln E e^{tX}]` for the
/// upper tail, and the reflected problem (`t -> -t`) for the lower tail.
/// The result is never positive, since `t = 0` gives 0.
pub fn generic_chernoff(
    mgf: &dyn MgfEvaluator,
    lambda: f64,
    q: &TailQuery,
) -> Result<LogBound> {
    let at0 = mgf.log_mgf(0.0);
    if at0.abs() > 1e-9 {
        return Err(Error::Diagnostic(format!(
            "mgf evaluator violates ln E e^0 = 0 (got {at0})"
        )));
    }
    if q.a == 0.0 {
        // Jensen pins the objective at >= 0 with equality at t = 0, so the
        // infimum is exactly 0; skip the search and its float noise.
        return Ok(LogBound::new(BoundId::Chernoff, 0.0));
    }
    let (t_lo, t_hi) = mgf.t_range();
    let (objective, cap): (Box<dyn Fn(f64) -> f64>, f64) = match q.side {
        Side::Upper => {
            let theta = lambda + q.a;
            (Box::new(move |t: f64| -t * theta + mgf.log_mgf(t)), t_hi)
        }
        Side::Lower => {
            let theta = lambda - q.a;
            (Box::new(move |t: f64| t * theta + mgf.log_mgf(-t)), -t_lo)
        }
    };
    check_convexity(&*objective, 0.0, cap.min(8.0))?;
    let fmin = minimize_expanding(&*objective, cap);
    Ok(LogBound::new(BoundId::Chernoff, fmin.min(0.0)))
}

/// Numeric Chernoff bound for a spec, choosing the exact MGF form.
/// Degenerate specs (`Var X = 0`) short-circuit: the sum is deterministic,
/// so the tail is 0 beyond the mean and 1 at it.
pub fn chernoff_for_spec(spec: &IndicatorSumSpec, q: &TailQuery) -> Result<LogBound> {
    if spec.sigma2() == 0.0 {
        let log_value = if q.a > 0.0 { f64::NEG_INFINITY } else { 0.0 };
        return Ok(LogBound::new(BoundId::Chernoff, log_value));
    }
    match spec {
        IndicatorSumSpec::Homogeneous { n, p } => {
            let mgf = BinomialMgf { n: *n as f64, p: *p };
            generic_chernoff(&mgf, spec.lambda(), q)
        }
        IndicatorSumSpec::Heterogeneous { ps } => {
            let mgf = ProductMgf { ps: ps.clone() };
            generic_chernoff(&mgf, spec.lambda(), q)
        }
        IndicatorSumSpec::Moments { .. } => Err(Error::UnsupportedSpec(
            "numeric Chernoff needs an explicit distribution; use the moment-based bounds".into(),
        )),
    }
}

/// Upper bound on `ln E (1-t)^X` from the first two moments, `0 <= t <= 1`:
/// `(l^2/(l - s^2)) ln(1 - t(1 - s^2/l))`.
pub fn log_pgf_bound_down(lambda: f64, sigma2: f64, t: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::domain(format!("needs 0 <= t <= 1, got {t}")));
    }
    if sigma2.is_nan() || sigma2 < 0.0 || sigma2 >= lambda {
        return Err(Error::domain(format!(
            "needs 0 <= Var X < EX, got Var X = {sigma2}, EX = {lambda}"
        )));
    }
    Ok(lambda * lambda / (lambda - sigma2) * (-t * (1.0 - sigma2 / lambda)).ln_1p())
}

/// Upper bound on `ln E (1+t)^X` from `n` and the first two moments,
/// `t >= 0`. The boundary case `n - EX - Var X = 0` (only approachable in
/// the limit) is evaluated by its limiting expression.
pub fn log_pgf_bound_up(n: u64, lambda: f64, sigma2: f64, t: f64) -> Result<f64> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::domain(format!("needs t >= 0, got {t}")));
    }
    let nf = n as f64;
    if lambda.is_nan() || lambda < 0.0 || nf <= lambda {
        return Err(Error::domain(format!("needs 0 <= EX < n, got EX = {lambda}, n = {n}")));
    }
    if sigma2.is_nan() || sigma2 < 0.0 || sigma2 > nf - lambda {
        return Err(Error::domain(format!(
            "needs 0 <= Var X <= n - EX, got Var X = {sigma2}"
        )));
    }
    let gap = nf - lambda - sigma2; // = sum q_i^2 for a realizable spec
    if gap <= 1e-13 * nf {
        // Limit as the gap closes: n ln(1+t) - t(n - EX)/(1+t).
        return Ok(nf * t.ln_1p() - t * (nf - lambda) / (1.0 + t));
    }
    let c1 = (nf * lambda - lambda * lambda - nf * sigma2) / gap;
    let c2 = (nf - lambda) * (nf - lambda) / gap;
    Ok(c1 * t.ln_1p() + c2 * (t * sigma2 / (nf - lambda)).ln_1p())
}

fn two_moment_lower_tail_value(lambda: f64, sigma2: f64, a: f64) -> Result<f64> {
    if !sigma2.is_finite() || sigma2 <= 0.0 || sigma2 >= lambda {
        return Err(Error::domain(format!(
            "needs 0 < Var X < EX, got Var X = {sigma2}, EX = {lambda}"
        )));
    }
    if a.is_nan() || a < 0.0 || crate::catalog::snapped_beyond(a, lambda) {
        return Err(Error::domain(format!("needs 0 <= a <= EX, got a = {a}, EX = {lambda}")));
    }
    let a = a.min(lambda);
    let main = lambda / (lambda - sigma2)
        * (a + sigma2 - a * sigma2 / lambda)
        * (a / sigma2 - a / lambda).ln_1p();
    // (EX - a) ln(1 - a/EX), defined as 0 at a = EX.
    let rem = lambda - a;
    let tail_term = if rem == 0.0 { 0.0 } else { rem * (-a / lambda).ln_1p() };
    Ok(-main - tail_term)
}

/// Closed-form optimized lower-tail bound from `(EX, Var X)`:
/// `ln P(X <= EX - a)` is at most
/// `-(EX/(EX-V)) (a + V - aV/EX) ln(1 + a/V - a/EX) - (EX-a) ln(1 - a/EX)`.
pub fn two_moment_lower_tail(lambda: f64, sigma2: f64, a: f64) -> Result<LogBound> {
    Ok(LogBound::new(BoundId::B3_8, two_moment_lower_tail_value(lambda, sigma2, a)?))
}

/// The same bound found numerically: minimize
/// `ln-bound of E(1-t)^X - (EX - a) ln(1-t)` over `t` in `[0, 1]`, run in
/// the `t = 1 - e^s` parametrization. Agrees with the closed form to 1e-9.
pub fn optimized_two_moment_lower_tail(lambda: f64, sigma2: f64, a: f64) -> Result<f64> {
    if !sigma2.is_finite() || sigma2 <= 0.0 || sigma2 >= lambda {
        return Err(Error::domain(format!(
            "needs 0 < Var X < EX, got Var X = {sigma2}, EX = {lambda}"
        )));
    }
    if a.is_nan() || a < 0.0 || crate::catalog::snapped_beyond(a, lambda) {
        return Err(Error::domain(format!("needs 0 <= a <= EX, got a = {a}, EX = {lambda}")));
    }
    let a = a.min(lambda);
    let x0 = 1.0 - sigma2 / lambda;
    let coef = lambda * lambda / (lambda - sigma2);
    let target = lambda - a;
    // s <= 0, t = 1 - e^s; objective = coef ln(1 - t x0) - target s.
    let objective = |u: f64| {
        let s = -u;
        coef * (-(-s.exp_m1()) * x0).ln_1p() - target * s
    };
    let fmin = minimize_expanding(&objective, 46.0);
    Ok(fmin.min(0.0))
}

/// Numerically optimized upper-tail bound from the `(1+t)`-moment estimate:
/// `inf_{t >= 0} [-(EX+a) ln(1+t) + ln-bound of E(1+t)^X]`, run in the
/// `t = e^s - 1` parametrization. Needs `n`.
pub fn moment_mgf_upper_tail(spec: &IndicatorSumSpec, q: &TailQuery) -> Result<LogBound> {
    if q.side != Side::Upper {
        return Err(Error::precondition("3.7 is an upper-tail bound"));
    }
    let n = spec.require_n("3.7 bound")?;
    let lambda = spec.lambda();
    let sigma2 = spec.sigma2();
    let nf = n as f64;
    if lambda <= 0.0 || lambda >= nf {
        return Err(Error::precondition(format!("needs 0 < EX < n, got EX = {lambda}")));
    }
    if crate::catalog::snapped_beyond(q.a, nf - lambda) {
        return Ok(LogBound::out_of_domain(BoundId::B3_7));
    }
    let theta = lambda + q.a;
    let objective = move |s: f64| {
        // t = e^s - 1 with s >= 0; ln(1+t) = s.
        let t = s.exp_m1();
        -theta * s + log_pgf_bound_up(n, lambda, sigma2, t).expect("validated domain")
    };
    let fmin = minimize_expanding(&objective, 40.0);
    Ok(LogBound::new(BoundId::B3_7, fmin.min(0.0)))
}

/// Upper-tail counterpart of the closed-form two-moment bound, obtained by
/// applying it to the reflected sum `n - X` (same variance, mean `n - EX`).
/// Needs `n`.
pub fn reflected_two_moment_upper_tail(spec: &IndicatorSumSpec, q: &TailQuery) -> Result<LogBound> {
    if q.side != Side::Upper {
        return Err(Error::precondition("3.8r is an upper-tail bound"));
    }
    let n = spec.require_n("3.8r bound")?;
    let lambda = spec.lambda();
    let sigma2 = spec.sigma2();
    let reflected_mean = n as f64 - lambda;
    if crate::catalog::snapped_beyond(q.a, reflected_mean) {
        return Ok(LogBound::out_of_domain(BoundId::B3_8r));
    }
    let v = two_moment_lower_tail_value(reflected_mean, sigma2, q.a)?;
    Ok(LogBound::new(BoundId::B3_8r, v))
}

/// The normalized lower-tail exponent
/// `g(x,y) = (1/(1-x))(1+y-xy) ln(1+y-xy) + (1/x)(1-xy) ln(1-xy)` on
/// `0 < x < 1`, `0 <= y <= 1/x`. `g(x, 0) = 0`; as `x -> 0` it tends to
/// `h(y)`; the closed-form lower-tail bound equals `-Var X * g(x, y)` with
/// `x = Var X / EX`, `y = a / Var X`.
pub fn g_exponent(x: f64, y: f64) -> Result<f64> {
    if x.is_nan() || x <= 0.0 || x >= 1.0 {
        return Err(Error::domain(format!("needs 0 < x < 1, got {x}")));
    }
    if y.is_nan() || y < 0.0 || x * y > 1.0 {
        return Err(Error::domain(format!("needs 0 <= y <= 1/x, got x = {x}, y = {y}")));
    }
    let up = 1.0 / (1.0 - x) * (1.0 + y - x * y) * (y * (1.0 - x)).ln_1p();
    let xy = x * y;
    let down = if xy == 1.0 { 0.0 } else { 1.0 / x * (1.0 - xy) * (-xy).ln_1p() };
    Ok(up + down)
}

/// The matched two-atom surrogate of a finite measure on `[0, 1]`: one atom
/// pinned at an endpoint, the other placed to preserve total mass, first and
/// second moments. Extremal for integrands with one-signed third derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPointReduction {
    pub m: f64,
    pub x0: f64,
    pub alpha0: f64,
    pub x1: f64,
    pub alpha1: f64,
}

impl TwoPointReduction {
    /// `(m - alpha0) f(0) + alpha0 f(x0)`, the endpoint-0 estimate.
    pub fn estimate_at_zero(&self, f: &dyn Fn(f64) -> f64) -> f64 {
        (self.m - self.alpha0) * f(0.0) + self.alpha0 * f(self.x0)
    }

    /// `(m - alpha1) f(1) + alpha1 f(x1)`, the endpoint-1 estimate.
    pub fn estimate_at_one(&self, f: &dyn Fn(f64) -> f64) -> f64 {
        (self.m - self.alpha1) * f(1.0) + self.alpha1 * f(self.x1)
    }
}

/// Computes the two-point reduction of a finite point-mass measure given as
/// `(position, mass)` atoms, with the `0/0 = 0` convention for the
/// degenerate point masses at the endpoints.
pub fn two_point_reduction(atoms: &[(f64, f64)]) -> Result<TwoPointReduction> {
    let mut m = 0.0;
    let mut sx = 0.0;
    let mut sxx = 0.0;
    let mut sr = 0.0;
    let mut srr = 0.0;
    for &(x, w) in atoms {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::domain(format!("atom at {x} outside [0, 1]")));
        }
        if w.is_nan() || w < 0.0 {
            return Err(Error::domain(format!("negative mass {w}")));
        }
        m += w;
        sx += w * x;
        sxx += w * x * x;
        sr += w * (1.0 - x);
        srr += w * (1.0 - x) * (1.0 - x);
    }
    let div = |num: f64, den: f64| if den == 0.0 { 0.0 } else { num / den };
    Ok(TwoPointReduction {
        m,
        x0: div(sxx, sx),
        alpha0: div(sx * sx, sxx),
        x1: 1.0 - div(srr, sr),
        alpha1: div(sr * sr, srr),
    })
}
