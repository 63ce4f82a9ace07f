//! Gamma, Beta and modified Bessel functions.

/// Γ(x) for x > 0.
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Beta function B(a, b) = Γ(a)Γ(b)/Γ(a+b) for a, b > 0.
///
/// Small arguments use the direct Gamma ratio; large ones go through
/// log-gamma to avoid overflow. Both routes are symmetric in (a, b).
pub fn beta(a: f64, b: f64) -> f64 {
    if a + b < 150.0 {
        gamma(a) * gamma(b) / gamma(a + b)
    } else {
        (ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)).exp()
    }
}

/// Modified Bessel function of the first kind of order one, by its power series
///
/// I₁(x) = Σ_k (x/2)^{2k+1} / (k! (k+1)!)
///
/// summed until the next term drops below 1e-16 of the partial sum. Intended
/// for 0 ≤ x ≤ 50; all terms are positive so there is no cancellation.
pub fn bessel_i1(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let half = 0.5 * x;
    let q = half * half;
    let mut term = half;
    let mut sum = term;
    let mut k = 0.0_f64;
    loop {
        k += 1.0;
        term *= q / (k * (k + 1.0));
        sum += term;
        if term < 1e-16 * sum {
            return sum;
        }
    }
}

/// Exponentially scaled I₁: e^{-x} I₁(x), finite for every x ≥ 0.
///
/// Uses the power series below x = 40 and the large-argument asymptotic
/// expansion above it.
pub fn bessel_i1_scaled(x: f64) -> f64 {
    if x < 40.0 {
        return bessel_i1(x) * (-x).exp();
    }
    // e^{-x} I₁(x) ~ 1/√(2πx) Σ_k (-1)^k a_k(1) / x^k, a_k(ν) = Π_{i=1..k} (4ν² - (2i-1)²) / (k! 8^k)
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..30 {
        let odd = (2 * k - 1) as f64;
        let next = -term * (4.0 - odd * odd) / (k as f64 * 8.0 * x);
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum / (2.0 * std::f64::consts::PI * x).sqrt()
}
