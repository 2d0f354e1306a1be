//! Exact binomial tail computations and Clopper-Pearson intervals.
//!
//! The interval bounds are found by bisecting the exact binomial tail, so
//! no special-function approximations are involved; the tests validate the
//! bounds directly against the defining tail equations.

use crate::error::{Error, Result};

/// `Pr[X <= k]` for `X ~ Binomial(n, p)`, summing the shorter tail.
pub fn binomial_cdf(k: u64, n: u64, p: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&p));
    if k >= n {
        return 1.0;
    }
    if p <= 0.0 {
        return 1.0;
    }
    if p >= 1.0 {
        return 0.0;
    }
    if k < n - k {
        binomial_range_sum(0, k, n, p)
    } else {
        1.0 - binomial_range_sum(k + 1, n, n, p)
    }
}

/// `sum_{j=lo..=hi} C(n, j) p^j (1-p)^(n-j)`, term by term in log space.
fn binomial_range_sum(lo: u64, hi: u64, n: u64, p: f64) -> f64 {
    let ln_p = p.ln();
    let ln_q = (-p).ln_1p();
    // ln C(n, lo) built incrementally.
    let mut ln_c = 0.0;
    for i in 1..=lo {
        ln_c += ((n - i + 1) as f64).ln() - (i as f64).ln();
    }
    let mut sum = 0.0;
    let mut j = lo;
    loop {
        let ln_term = ln_c + j as f64 * ln_p + (n - j) as f64 * ln_q;
        sum += ln_term.exp();
        if j == hi {
            break;
        }
        j += 1;
        ln_c += ((n - j + 1) as f64).ln() - (j as f64).ln();
    }
    sum.min(1.0)
}

/// Exact Clopper-Pearson interval for `successes` out of `trials` at the
/// given confidence level (e.g. 0.99).
pub fn clopper_pearson(successes: u64, trials: u64, level: f64) -> Result<(f64, f64)> {
    if trials == 0 {
        return Err(Error::config("Clopper-Pearson needs at least one trial"));
    }
    if successes > trials {
        return Err(Error::config("successes exceed trials"));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::config(format!(
            "confidence level must be in (0, 1), got {level}"
        )));
    }
    let alpha = 1.0 - level;
    let half = alpha / 2.0;

    // Lower bound: the p with Pr[X >= successes] = alpha/2, i.e.
    // cdf(successes - 1, p) = 1 - alpha/2. The cdf is decreasing in p.
    let low = if successes == 0 {
        0.0
    } else {
        bisect_decreasing(|p| binomial_cdf(successes - 1, trials, p), 1.0 - half)
    };
    // Upper bound: the p with Pr[X <= successes] = alpha/2.
    let high = if successes == trials {
        1.0
    } else {
        bisect_decreasing(|p| binomial_cdf(successes, trials, p), half)
    };
    Ok((low, high))
}

/// Root of `f(p) = target` for `f` decreasing on [0, 1].
fn bisect_decreasing(f: impl Fn(f64) -> f64, target: f64) -> f64 {
    let mut lo = 0.0;
    let mut hi = 1.0;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
