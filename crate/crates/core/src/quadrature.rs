//! Simpson-rule quadrature.

/// Composite Simpson rule with `panels` panels on `[a, b]`; each panel uses its
/// two endpoints and midpoint.
pub fn composite_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let n = panels.max(1);
    let h = (b - a) / n as f64;
    let mut ends = f(a) + f(b);
    let mut mids = 0.0;
    for k in 0..n {
        let left = a + h * k as f64;
        mids += f(left + 0.5 * h);
        if k > 0 {
            ends += 2.0 * f(left);
        }
    }
    h / 6.0 * (ends + 4.0 * mids)
}

/// Simpson's rule on a single panel from precomputed samples.
pub fn simpson_panel(h: f64, left: f64, mid: f64, right: f64) -> f64 {
    h / 6.0 * (left + 4.0 * mid + right)
}

/// Adaptive Simpson quadrature with Richardson correction.
///
/// Recursion stops once the two-half estimate agrees with the whole-panel estimate
/// to `15·tol`, or at `max_depth`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64, max_depth: u32) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson_panel(b - a, fa, fm, fb);
    adaptive_step(&f, a, b, fa, fm, fb, whole, tol, max_depth)
}

#[allow(clippy::too_many_arguments)]
fn adaptive_step<F: Fn(f64) -> f64>(
    f: &F,
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
    let left = simpson_panel(m - a, fa, flm, fm);
    let right = simpson_panel(b - m, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    adaptive_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + adaptive_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}
