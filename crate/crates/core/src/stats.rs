//! Rank and correlation statistics.
//!
//! Everything downstream (similarity structures, pruning, interpretation,
//! probing) reduces to a handful of primitives defined here: average-rank
//! transforms, Pearson and Spearman correlation, a two-sided Student-t
//! p-value, the paired t statistic, and the Dice set overlap.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::num::{clamp_unit, Real};

/// Ranks `values` 1-based; tied values all receive the average of the ranks
/// they span.
///
/// Panics on empty input or non-finite values (both are programmer errors at
/// this layer; loaders validate data before it gets here).
pub fn rank_transform<R: Real>(values: &[R]) -> Vec<R> {
    assert!(!values.is_empty(), "rank_transform requires at least one value");
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        values[a]
            .partial_cmp(&values[b])
            .expect("rank_transform requires finite, comparable values")
    });
    let mut ranks = vec![R::zero(); values.len()];
    let mut lo = 0;
    while lo < order.len() {
        let mut hi = lo;
        while hi + 1 < order.len() && values[order[hi + 1]] == values[order[lo]] {
            hi += 1;
        }
        // Positions lo..=hi hold tied values; their common rank is the mean
        // of lo+1 ..= hi+1, computed exactly as an integer half.
        let shared = R::of_usize(lo + hi + 2) / R::of(2.0);
        for k in lo..=hi {
            ranks[order[k]] = shared;
        }
        lo = hi + 1;
    }
    ranks
}

/// Pearson correlation of two equal-length series.
///
/// Two-pass formulation: means first, then centered products accumulated in
/// index order. Callers that must agree bit-for-bit with this routine (the
/// RSM builder and its oracle) rely on that exact evaluation order.
pub fn pearson_r<R: Real>(x: &[R], y: &[R]) -> Result<R> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { left: x.len(), right: y.len() });
    }
    if x.len() < 2 {
        return Err(Error::InsufficientSamples { required: 2, actual: x.len() });
    }
    let n = R::of_usize(x.len());
    let mut mx = R::zero();
    let mut my = R::zero();
    for i in 0..x.len() {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    let mut sxy = R::zero();
    let mut sxx = R::zero();
    let mut syy = R::zero();
    for i in 0..x.len() {
        let dx = x[i] - mx;
        let dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx.is_zero() || syy.is_zero() {
        return Err(Error::ConstantSeries);
    }
    Ok(clamp_unit(sxy / (sxx * syy).sqrt()))
}

/// Spearman rank correlation: Pearson over average-tie ranks.
///
/// Requires at least 3 observations; a constant series is an error because a
/// correlation against it carries no information.
pub fn spearman_rho<R: Real>(x: &[R], y: &[R]) -> Result<R> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { left: x.len(), right: y.len() });
    }
    if x.len() < 3 {
        return Err(Error::InsufficientSamples { required: 3, actual: x.len() });
    }
    pearson_r(&rank_transform(x), &rank_transform(y))
}

/// Two-sided p-value for a Spearman correlation via the t approximation
/// `t = rho * sqrt((n-2) / (1 - rho^2))` with `n - 2` degrees of freedom.
pub fn spearman_pvalue<R: Real>(rho: R, n: usize) -> Result<R> {
    if n < 4 {
        return Err(Error::InsufficientSamples { required: 4, actual: n });
    }
    let rho = clamp_unit(rho);
    if rho.abs() == R::one() {
        return Ok(R::zero());
    }
    let df = R::of_usize(n - 2);
    let t = rho * (df / (R::one() - rho * rho)).sqrt();
    Ok(student_t_two_sided(t, df))
}

/// Two-sided tail probability of Student's t distribution:
/// `P(|T| >= |t|) = I_{df/(df+t^2)}(df/2, 1/2)`.
pub fn student_t_two_sided<R: Real>(t: R, df: R) -> R {
    let x = df / (df + t * t);
    betainc_reg(df / R::of(2.0), R::of(0.5), x)
}

/// Paired t statistic over two matched series: `(t, dof)` with the sample
/// standard deviation (n - 1 denominator) and `dof = n - 1`.
///
/// Identical series (zero-variance differences) are an error; significance
/// interpretation is left to the caller.
pub fn paired_t<R: Real>(a: &[R], b: &[R]) -> Result<(R, usize)> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { left: a.len(), right: b.len() });
    }
    if a.len() < 2 {
        return Err(Error::InsufficientSamples { required: 2, actual: a.len() });
    }
    let n = a.len();
    let diffs: Vec<R> = (0..n).map(|i| a[i] - b[i]).collect();
    let mut mean = R::zero();
    for &d in &diffs {
        mean += d;
    }
    mean /= R::of_usize(n);
    let mut ss = R::zero();
    for &d in &diffs {
        let c = d - mean;
        ss += c * c;
    }
    if ss.is_zero() {
        return Err(Error::ZeroVariance);
    }
    let sd = (ss / R::of_usize(n - 1)).sqrt();
    let t = mean / (sd / R::of_usize(n).sqrt());
    Ok((t, n - 1))
}

/// Dice coefficient `2|A ∩ B| / (|A| + |B|)` between two non-empty sets.
pub fn dice<R: Real, T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> Result<R> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    let inter = a.intersection(b).count();
    Ok(R::of_usize(2 * inter) / R::of_usize(a.len() + b.len()))
}

/// Mean and sample standard deviation (n - 1). The sd is `None` for a single
/// observation.
pub fn mean_sd<R: Real>(xs: &[R]) -> Result<(R, Option<R>)> {
    if xs.is_empty() {
        return Err(Error::InsufficientSamples { required: 1, actual: 0 });
    }
    let n = R::of_usize(xs.len());
    let mut mean = R::zero();
    for &x in xs {
        mean += x;
    }
    mean /= n;
    if xs.len() < 2 {
        return Ok((mean, None));
    }
    let mut ss = R::zero();
    for &x in xs {
        let c = x - mean;
        ss += c * c;
    }
    let sd = (ss / R::of_usize(xs.len() - 1)).sqrt();
    Ok((mean, Some(sd)))
}

/// Regularized incomplete beta function `I_x(a, b)` for `a, b > 0`,
/// evaluated with the Lentz continued fraction (Numerical Recipes betacf).
fn betainc_reg<R: Real>(a: R, b: R, x: R) -> R {
    if x <= R::zero() {
        return R::zero();
    }
    if x >= R::one() {
        return R::one();
    }
    let front = (ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b)
        + a * x.ln()
        + b * (R::one() - x).ln())
    .exp();
    // The continued fraction converges fast for x below the split point;
    // otherwise evaluate the mirrored fraction.
    if x < (a + R::one()) / (a + b + R::of(2.0)) {
        front * beta_cf(a, b, x) / a
    } else {
        R::one() - front * beta_cf(b, a, R::one() - x) / b
    }
}

fn beta_cf<R: Real>(a: R, b: R, x: R) -> R {
    let max_iter = 300;
    let eps = R::epsilon() * R::of(4.0);
    let fpmin = R::min_positive_value() / R::epsilon();
    let one = R::one();

    let qab = a + b;
    let qap = a + one;
    let qam = a - one;
    let mut c = one;
    let mut d = one - qab * x / qap;
    if d.abs() < fpmin {
        d = fpmin;
    }
    d = one / d;
    let mut h = d;
    for m in 1..=max_iter {
        let mf = R::of_usize(m);
        let m2 = R::of_usize(2 * m);
        let aa = mf * (b - mf) * x / ((qam + m2) * (a + m2));
        d = one + aa * d;
        if d.abs() < fpmin {
            d = fpmin;
        }
        c = one + aa / c;
        if c.abs() < fpmin {
            c = fpmin;
        }
        d = one / d;
        h = h * d * c;
        let aa = -(a + mf) * (qab + mf) * x / ((a + m2) * (qap + m2));
        d = one + aa * d;
        if d.abs() < fpmin {
            d = fpmin;
        }
        c = one + aa / c;
        if c.abs() < fpmin {
            c = fpmin;
        }
        d = one / d;
        let del = d * c;
        h *= del;
        if (del - one).abs() < eps {
            break;
        }
    }
    h
}

/// Natural log of the gamma function (Lanczos, g = 7). Arguments here are
/// always positive half-integers, so no reflection branch is needed.
fn ln_gamma<R: Real>(z: R) -> R {
    // Published coefficients, kept verbatim.
    #[allow(clippy::excessive_precision)]
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    debug_assert!(z > R::zero());
    let z = z - R::one();
    let mut x = R::of(COEF[0]);
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        x += R::of(c) / (z + R::of_usize(i));
    }
    let t = z + R::of(7.5);
    let two_pi = R::of(2.0 * std::f64::consts::PI);
    (two_pi.sqrt() * x).ln() + (z + R::of(0.5)) * t.ln() - t
}
