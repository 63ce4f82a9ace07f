//! Exact solutions used as validation references.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad;
use crate::special::{bessel_i1_scaled, ln_gamma};

/// Which closed form a reference evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExactId {
    /// Constant kernel, `c_0 = e^{-s}`.
    ConstantExp,
    /// Sum kernel, `c_0 = e^{-s}`.
    SumExp,
    /// Product kernel, `c_0 = e^{-s}`, valid before gelation (τ ≤ 1).
    ProductExp,
    /// Constant kernel with binary breakage `β = 2/ξ`, `S = σ s`, and
    /// `c_0 = A s e^{-a s}` with `A = 4σa`.
    BinaryBreakage { amplitude: f64, rate: f64, sigma: f64 },
}

impl ExactId {
    pub fn evaluate(&self, s: f64, tau: f64) -> f64 {
        match *self {
            ExactId::ConstantExp => exact_constant(s, tau),
            ExactId::SumExp => exact_sum(s, tau),
            ExactId::ProductExp => exact_product(s, tau),
            ExactId::BinaryBreakage { amplitude, rate, sigma } => {
                BinaryBreakageExact::new(amplitude, rate, sigma)
                    .map(|e| e.evaluate(s, tau))
                    .unwrap_or(f64::NAN)
            }
        }
    }
}

/// `c(s, τ) = 4 e^{-2s/(τ+2)} / (τ+2)²`.
pub fn exact_constant(s: f64, tau: f64) -> f64 {
    let t2 = tau + 2.0;
    4.0 * (-2.0 * s / t2).exp() / (t2 * t2)
}

/// `c(s, τ) = e^{(e^{-τ}-2)s-τ} I₁(2√(1-e^{-τ}) s) / (√(1-e^{-τ}) s)`,
/// continued to its limits at `s = 0` and `τ = 0`.
pub fn exact_sum(s: f64, tau: f64) -> f64 {
    let decay = (-tau).exp();
    let g = -(-tau).exp_m1();
    let root = g.sqrt();
    let x = 2.0 * root * s;
    // I₁(x)/(√g s) = 2 I₁(x)/x
    let (ratio, shift) = if x < 1e-4 {
        (1.0 + x * x / 8.0 + x.powi(4) / 192.0, 0.0)
    } else {
        (2.0 * bessel_i1_scaled(x) / x, x)
    };
    ((decay - 2.0) * s - tau + shift).exp() * ratio
}

/// `c(s, τ) = e^{-(1+τ)s} Σ_k τ^k s^{3k} / ((k+1)! Γ(2k+2))`, summed in log space.
pub fn exact_product(s: f64, tau: f64) -> f64 {
    let base = -(1.0 + tau) * s;
    if s == 0.0 || tau == 0.0 {
        return base.exp();
    }
    let lt = tau.ln();
    let ls = s.ln();
    let mut sum = 0.0;
    let mut k = 0u32;
    let mut prev = f64::NEG_INFINITY;
    loop {
        let kf = k as f64;
        let log_term = kf * lt + 3.0 * kf * ls - ln_gamma(kf + 2.0) - ln_gamma(2.0 * kf + 2.0) + base;
        let term = log_term.exp();
        sum += term;
        // past the peak the terms decay faster than geometrically
        if log_term < prev && term < 1e-16 * sum {
            return sum;
        }
        prev = log_term;
        k += 1;
        if k > 10_000 {
            return sum;
        }
    }
}

/// Moment `∫ s^j c(s, τ) ds` of an exact solution.
///
/// The constant kernel uses `n₀ = 2/(τ+2)`, `n₁ = 1`; other cases integrate the
/// evaluator numerically up to a cut-off where the tail is negligible.
pub fn exact_moments(id: ExactId, j: u32, tau: f64) -> f64 {
    match (id, j) {
        (ExactId::ConstantExp, 0) => 2.0 / (tau + 2.0),
        (ExactId::ConstantExp, 1) => 1.0,
        _ => {
            let f = |s: f64| s.powi(j as i32) * id.evaluate(s, tau);
            let cut = tail_cutoff(&f);
            quad::integrate(f, 0.0, cut, 1e-13)
        }
    }
}

/// Smallest `10·2^m` beyond which the integrand stays below 1e-16 relative to its peak.
fn tail_cutoff<F: Fn(f64) -> f64>(f: &F) -> f64 {
    let peak = (1..=400).map(|i| f(0.05 * i as f64).abs()).fold(0.0, f64::max);
    let mut cut = 10.0;
    while cut < 1e5 {
        let probe = (0..8).map(|i| f(cut * (1.0 + i as f64 / 8.0)).abs()).fold(0.0, f64::max);
        if probe * cut < 1e-16 * peak {
            break;
        }
        cut *= 2.0;
    }
    cut
}

/// Closed-form transient of constant aggregation with binary breakage.
///
/// The Laplace transform keeps the form `(u p + N z)/(p² + w p + z)` with a
/// constant particle count `N`, provided `A = 4σa` for `c_0 = A s e^{-a s}`:
///
/// ```text
/// u = 2σ(1 − e^{−Nτ}),  w = 2a + στ + (σ/N)(1 − e^{−Nτ}),  z = 2σ(N w − u)/N²
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinaryBreakageExact {
    count: f64,
    rate: f64,
    sigma: f64,
}

impl BinaryBreakageExact {
    pub fn new(amplitude: f64, rate: f64, sigma: f64) -> Result<Self> {
        if !(amplitude > 0.0 && rate > 0.0 && sigma > 0.0) {
            return Err(Error::InvalidInput("amplitude, rate and σ must be positive".into()));
        }
        let expected = 4.0 * sigma * rate;
        if (amplitude - expected).abs() > 1e-12 * expected {
            return Err(Error::NoExactSolution(format!(
                "closed form needs A = 4σa = {expected}, got {amplitude}"
            )));
        }
        Ok(BinaryBreakageExact {
            count: amplitude / (rate * rate),
            rate,
            sigma,
        })
    }

    /// Particle count, constant in time.
    pub fn count(&self) -> f64 {
        self.count
    }

    pub fn evaluate(&self, s: f64, tau: f64) -> f64 {
        let n = self.count;
        let k = self.sigma;
        let decay = -(-n * tau).exp_m1();
        let u = 2.0 * k * decay;
        let w = 2.0 * self.rate + k * tau + k / n * decay;
        let z = 2.0 * k * (n * w - u) / (n * n);
        // roots m ± d/2 of p² + w p + z
        let m = -0.5 * w;
        let disc = w * w - 4.0 * z;
        let half = 0.5 * disc.abs().sqrt() * s;
        // (e^{ds/2} − e^{−ds/2})/d and (e^{ds/2} + e^{−ds/2})/2, with the
        // trigonometric forms for complex roots
        let (shc, ch) = if half < 1e-6 {
            let sgn = disc.signum();
            (s * (1.0 + sgn * half * half / 6.0), 1.0 + sgn * half * half / 2.0)
        } else if disc > 0.0 {
            (s * half.sinh() / half, half.cosh())
        } else {
            (s * half.sin() / half, half.cos())
        };
        (m * s).exp() * ((u * m + n * z) * shc + u * ch)
    }
}
