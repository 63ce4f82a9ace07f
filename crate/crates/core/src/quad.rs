//! Numerical quadrature used by validation code (norms, moments, residual checks).

/// ∫_a^b f using double-exponential quadrature on geometrically growing panels.
///
/// Panels are [a, a+w], [a+w, a+3w], ... with doubling widths, which keeps the
/// node density high near the left end where every density in this crate is
/// concentrated, while still covering long tails cheaply.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    assert!(b >= a, "integration bounds reversed");
    if b == a {
        return 0.0;
    }
    let mut total = 0.0;
    let mut lo = a;
    let mut width = ((b - a) / 1024.0).max(0.25).min(b - a);
    // s = a + u² on the first panel smooths algebraic endpoint singularities
    let first = width;
    total += quadrature::integrate(|u| 2.0 * u * f(a + u * u), 0.0, first.sqrt(), tol).integral;
    lo += first;
    width *= 2.0;
    while lo < b {
        let hi = (lo + width).min(b);
        total += quadrature::integrate(&f, lo, hi, tol).integral;
        lo = hi;
        width *= 2.0;
    }
    total
}

/// Composite trapezoid rule for a tabulated function on uniform nodes.
pub fn trapezoid(values: &[f64], step: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => step * (0.5 * (values[0] + values[n - 1]) + values[1..n - 1].iter().sum::<f64>()),
    }
}
