//! Derivative-free inversion of monotone CDFs.

/// Find `z` with `cdf(z) = q` by bisection on `[lo, hi]`, where `cdf` is
/// nondecreasing and continuous, `cdf(lo) <= q <= cdf(hi)`.
///
/// Bisection is used deliberately: mixture CDFs have slope discontinuities at
/// every component support point, which defeats derivative-based solvers.
/// Stops once `|cdf(z) - q| <= tol`.
pub(crate) fn bisect_quantile<F: Fn(f64) -> f64>(cdf: F, q: f64, lo: f64, hi: f64, tol: f64) -> f64 {
    debug_assert!(lo <= hi);
    let mut lo = lo;
    let mut hi = hi;
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..400 {
        mid = 0.5 * (lo + hi);
        let v = cdf(mid);
        if (v - q).abs() <= tol {
            return mid;
        }
        if v < q {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * mid.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    mid
}
