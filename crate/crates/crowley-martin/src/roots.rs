//! Bracketing root finders shared by the equilibrium and regime code.

/// Bisects `f` on `[a, b]` until the bracket can no longer be split in binary64.
///
/// `f(a)` and `f(b)` must have opposite signs (or one of them vanish).
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return a;
    }
    if fb == 0.0 {
        return b;
    }
    debug_assert!(
        fa.signum() != fb.signum(),
        "bisect called without a sign change"
    );
    loop {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            // a and b are adjacent floats; return the endpoint with the smaller residual.
            return if fa.abs() <= f(b).abs() { a } else { b };
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
}

/// Uniform samples of `[lo, hi]` merged with extra abscissae that fall inside it.
pub fn sample_knots(lo: f64, hi: f64, n: usize, extra: &[f64]) -> Vec<f64> {
    let mut knots: Vec<f64> = (0..=n)
        .map(|i| lo + (hi - lo) * i as f64 / n as f64)
        .collect();
    knots.extend(extra.iter().copied().filter(|x| *x > lo && *x < hi));
    knots.sort_by(|a, b| a.total_cmp(b));
    knots.dedup();
    knots
}

/// All roots of `f` bracketed by sign changes between consecutive knots.
///
/// A knot where `f` vanishes exactly is reported once, as itself.
pub fn scan_roots<F: Fn(f64) -> f64>(f: F, knots: &[f64]) -> Vec<f64> {
    let values: Vec<f64> = knots.iter().map(|&x| f(x)).collect();
    let mut roots = Vec::new();
    for i in 0..knots.len() {
        if values[i] == 0.0 {
            roots.push(knots[i]);
            continue;
        }
        if i + 1 < knots.len()
            && values[i + 1] != 0.0
            && values[i].signum() != values[i + 1].signum()
        {
            roots.push(bisect(&f, knots[i], knots[i + 1]));
        }
    }
    roots
}
