//! Aggregation kernels as sums of separable monomials, and power-law breakage.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expoly::{int, pow, ratio, Exponent};

/// Correction factor of the free-molecular Brownian kernel.
#[allow(clippy::approx_constant)]
pub const BROWNIAN_CORRECTION: f64 = 0.7071;

/// One separable product `lambda · s^alpha · ξ^beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelTerm {
    pub lambda: f64,
    pub alpha: Exponent,
    pub beta: Exponent,
}

impl KernelTerm {
    pub fn new(lambda: f64, alpha: Exponent, beta: Exponent) -> Self {
        KernelTerm {
            lambda,
            alpha,
            beta,
        }
    }
}

/// Symmetric, homogeneous aggregation kernel `w(s, ξ) = Σ λ s^α ξ^β`.
///
/// The empty kernel is the zero kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<KernelTerm>", into = "Vec<KernelTerm>")]
pub struct SeparableKernel {
    terms: Vec<KernelTerm>,
}

impl TryFrom<Vec<KernelTerm>> for SeparableKernel {
    type Error = Error;

    fn try_from(terms: Vec<KernelTerm>) -> Result<Self> {
        SeparableKernel::new(terms)
    }
}

impl From<SeparableKernel> for Vec<KernelTerm> {
    fn from(k: SeparableKernel) -> Self {
        k.terms
    }
}

impl SeparableKernel {
    /// Validates symmetry and homogeneity.
    pub fn new(terms: Vec<KernelTerm>) -> Result<Self> {
        if let Some(first) = terms.first() {
            let degree = first.alpha + first.beta;
            for t in &terms {
                if !t.lambda.is_finite() {
                    return Err(Error::InvalidInput("non-finite kernel weight".into()));
                }
                if t.alpha + t.beta != degree {
                    return Err(Error::InvalidInput(format!(
                        "kernel is not homogeneous: degree {} vs {}",
                        t.alpha + t.beta,
                        degree
                    )));
                }
            }
            for t in terms.iter().filter(|t| t.alpha != t.beta) {
                let mirrored: f64 = terms
                    .iter()
                    .filter(|u| u.alpha == t.beta && u.beta == t.alpha)
                    .map(|u| u.lambda)
                    .sum();
                let direct: f64 = terms
                    .iter()
                    .filter(|u| u.alpha == t.alpha && u.beta == t.beta)
                    .map(|u| u.lambda)
                    .sum();
                if (mirrored - direct).abs() > 1e-14 * direct.abs() {
                    return Err(Error::InvalidInput(format!(
                        "kernel is not symmetric: s^{} ξ^{} has no mirror",
                        t.alpha, t.beta
                    )));
                }
            }
        }
        Ok(SeparableKernel { terms })
    }

    pub fn zero() -> Self {
        SeparableKernel { terms: Vec::new() }
    }

    pub fn constant() -> Self {
        SeparableKernel {
            terms: vec![KernelTerm::new(1.0, int(0), int(0))],
        }
    }

    pub fn sum() -> Self {
        SeparableKernel {
            terms: vec![
                KernelTerm::new(1.0, int(1), int(0)),
                KernelTerm::new(1.0, int(0), int(1)),
            ],
        }
    }

    pub fn product() -> Self {
        SeparableKernel {
            terms: vec![KernelTerm::new(1.0, int(1), int(1))],
        }
    }

    /// Free-molecular Brownian kernel in its integrable separable form,
    /// `b (s^{1/3} + ξ^{1/3})² (s^{-1/2} + ξ^{-1/2})` with `b = 0.7071`.
    ///
    /// Expanded, every term has homogeneity degree 1/6.
    pub fn brownian() -> Self {
        let b = BROWNIAN_CORRECTION;
        let t = |w: f64, a: Exponent, c: Exponent| KernelTerm::new(b * w, a, c);
        SeparableKernel {
            terms: vec![
                t(1.0, ratio(2, 3), ratio(-1, 2)),
                t(1.0, ratio(1, 6), int(0)),
                t(2.0, ratio(1, 3), ratio(-1, 6)),
                t(2.0, ratio(-1, 6), ratio(1, 3)),
                t(1.0, int(0), ratio(1, 6)),
                t(1.0, ratio(-1, 2), ratio(2, 3)),
            ],
        }
    }

    /// Looks up one of the built-in kernels by name.
    pub fn builtin(name: &str) -> Result<Self> {
        match name {
            "constant" => Ok(Self::constant()),
            "sum" => Ok(Self::sum()),
            "product" => Ok(Self::product()),
            "brownian" => Ok(Self::brownian()),
            other => Err(Error::InvalidInput(format!("unknown kernel '{other}'"))),
        }
    }

    pub fn terms(&self) -> &[KernelTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Common homogeneity degree α+β, `None` for the zero kernel.
    pub fn homogeneity(&self) -> Option<Exponent> {
        self.terms.first().map(|t| t.alpha + t.beta)
    }

    pub fn evaluate(&self, s: f64, xi: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| t.lambda * pow(s, t.alpha) * pow(xi, t.beta))
            .sum()
    }
}

/// Power-law breakage: `β(s, ξ) = η s^{i-1} / ξ^i` with selection `S(s) = σ s^j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BreakageSpec {
    pub eta: f64,
    pub i: u32,
    pub j: u32,
    pub sigma_s: f64,
}

impl BreakageSpec {
    /// Validates the mass normalization `∫_0^ξ s β(s, ξ) ds = ξ`, i.e. `η = i + 1`.
    pub fn new(eta: f64, i: u32, j: u32, sigma_s: f64) -> Result<Self> {
        let spec = BreakageSpec { eta, i, j, sigma_s };
        spec.validate()?;
        Ok(spec)
    }

    /// Uniform binary breakage `β = 2/ξ` with linear selection `S(s) = σ s`.
    pub fn binary_linear(sigma_s: f64) -> Result<Self> {
        Self::new(2.0, 1, 1, sigma_s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.i < 1 || self.j < 1 {
            return Err(Error::InvalidInput("breakage exponents must be ≥ 1".into()));
        }
        if !(self.eta > 0.0) || !(self.sigma_s > 0.0) {
            return Err(Error::InvalidInput("η and σ must be positive".into()));
        }
        let expected = (self.i + 1) as f64;
        if (self.eta - expected).abs() > 1e-12 * expected {
            return Err(Error::InvalidInput(format!(
                "breakage kernel is not mass-normalized: η = {} but i + 1 = {}",
                self.eta, expected
            )));
        }
        Ok(())
    }

    pub fn kernel(&self, s: f64, xi: f64) -> f64 {
        if s > xi {
            return 0.0;
        }
        self.eta * s.powi(self.i as i32 - 1) / xi.powi(self.i as i32)
    }

    pub fn selection(&self, s: f64) -> f64 {
        self.sigma_s * s.powi(self.j as i32)
    }
}
