//! Adaptive Simpson quadrature for the few internal integrals that have no
//! closed form (power-law count tails).

/// Integrate `f` over `[a, b]` to absolute tolerance `tol`.
///
/// The per-interval tolerance never drops below the floating-point noise of
/// the local estimate, so flat stretches cannot trigger runaway refinement.
pub(crate) fn adaptive_simpson<F: Fn(f64) -> f64 + Copy>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    fn recurse<F: Fn(f64) -> f64 + Copy>(
        f: F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let err = left + right - whole;
        let floor = 4.0 * f64::EPSILON * (libm::fabs(left) + libm::fabs(right));
        if depth == 0 || libm::fabs(err) <= (15.0 * tol).max(floor) {
            return left + right + err / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let m = 0.5 * (a + b);
    let (fa, fm_, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm_ + fb);
    recurse(f, a, b, fa, fm_, fb, whole, tol, 28)
}
