//! Contraction constants and a priori error bounds for the truncated series.

use serde::{Deserialize, Serialize};

use crate::aham::SeriesSolution;
use crate::analytic::ExactId;
use crate::error::{Error, Result};
use crate::quad;

/// Constants entering the contraction conditions.
///
/// `norm_c0` is the L1-sup norm of the initial condition, `d` the radius of
/// the ball the iterates stay in, `t_tilde = min(tau0, tau1)`. The breakage
/// fields are only used by [`gamma_cabe`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractionParams {
    pub norm_c0: f64,
    pub d: f64,
    pub tau0: f64,
    pub tau1: f64,
    pub t_tilde: f64,
    pub sigma: f64,
    pub eta: f64,
    pub j: u32,
}

impl ContractionParams {
    /// Aggregation-only parameters; `T̃ = min(τ₀, τ₁)`.
    pub fn aggregation(norm_c0: f64, d: f64, tau0: f64, tau1: f64) -> Result<Self> {
        let p = ContractionParams {
            norm_c0,
            d,
            tau0,
            tau1,
            t_tilde: tau0.min(tau1),
            sigma: 1.0,
            eta: 0.0,
            j: 1,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_breakage(mut self, sigma: f64, eta: f64, j: u32) -> Result<Self> {
        if !(sigma > 0.0 && eta > 0.0) || j < 1 {
            return Err(Error::InvalidInput("σ, η must be positive and j ≥ 1".into()));
        }
        self.sigma = sigma;
        self.eta = eta;
        self.j = j;
        Ok(self)
    }

    /// Smallest admissible radius `(1 − √(1 − 2τ₀‖c₀‖))/τ₀`.
    pub fn admissible_radius(norm_c0: f64, tau0: f64) -> Option<(f64, f64)> {
        let disc = 1.0 - 2.0 * tau0 * norm_c0;
        if disc < 0.0 || tau0 <= 0.0 {
            return None;
        }
        Some(((1.0 - disc.sqrt()) / tau0, (1.0 + disc.sqrt()) / tau0))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.norm_c0 > 0.0 && self.tau0 > 0.0 && self.tau1 > 0.0 && self.t_tilde > 0.0) {
            return Err(Error::InvalidInput("norms and times must be positive".into()));
        }
        if self.tau0 > 1.0 / (2.0 * self.norm_c0) {
            return Err(Error::InvalidInput(format!(
                "τ₀ = {} exceeds 1/(2‖c₀‖) = {}",
                self.tau0,
                0.5 / self.norm_c0
            )));
        }
        let (lo, hi) = Self::admissible_radius(self.norm_c0, self.tau0).expect("checked above");
        let slack = 1e-12 * hi;
        if self.d < lo - slack || self.d > hi + slack {
            return Err(Error::InvalidInput(format!("D = {} outside [{lo}, {hi}]", self.d)));
        }
        if self.t_tilde > self.tau0.min(self.tau1) * (1.0 + 1e-12) {
            return Err(Error::InvalidInput("T̃ must not exceed min(τ₀, τ₁)".into()));
        }
        Ok(())
    }
}

/// A constant with a flag for values ≥ 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Contraction {
    pub value: f64,
    pub contractive: bool,
}

impl Contraction {
    fn of(value: f64) -> Self {
        Contraction {
            value,
            contractive: value < 1.0,
        }
    }
}

/// `γ = T̃ e^{T̃D}(‖c₀‖ + ½T̃D² + T̃D)`.
pub fn gamma_aggregation(p: &ContractionParams) -> Result<Contraction> {
    p.validate()?;
    let (t, d) = (p.t_tilde, p.d);
    Ok(Contraction::of(t * (t * d).exp() * (p.norm_c0 + 0.5 * t * d * d + t * d)))
}

/// `γ₂ = T̃ e^{2T̃D}(‖c₀‖ + 2D(τ₀D + 1) + (2τ₀ + 1) η (j−1)!/σ^j)`.
pub fn gamma_cabe(p: &ContractionParams) -> Result<Contraction> {
    p.validate()?;
    if !(p.sigma > 0.0 && p.eta > 0.0) || p.j < 1 {
        return Err(Error::InvalidInput("breakage constants are not set".into()));
    }
    let (t, d) = (p.t_tilde, p.d);
    let fact: f64 = (1..p.j).map(|i| i as f64).product();
    let breakage = (2.0 * p.tau0 + 1.0) * p.eta * fact / p.sigma.powi(p.j as i32);
    Ok(Contraction::of(
        t * (2.0 * t * d).exp() * (p.norm_c0 + 2.0 * d * (p.tau0 * d + 1.0) + breakage),
    ))
}

/// `Θ_h = |1 + h| + γ|h|`, with a flag telling whether `h` lies in the
/// region `[−1, 0)` where `Θ < 1` is guaranteed for `γ < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Theta {
    pub value: f64,
    pub h_admissible: bool,
}

pub fn theta(h: f64, gamma: f64) -> Result<Theta> {
    if h == 0.0 {
        return Err(Error::InvalidInput("h must be non-zero".into()));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidInput(format!("γ = {gamma} is not in (0, 1)")));
    }
    Ok(Theta {
        value: (1.0 + h).abs() + gamma * h.abs(),
        h_admissible: (-1.0..0.0).contains(&h),
    })
}

/// The interval `[−1, 0)` as `(lower, upper)`; the upper end is open.
pub fn admissible_h(gamma: f64) -> Result<(f64, f64)> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidInput(format!("γ = {gamma} is not in (0, 1)")));
    }
    Ok((-1.0, 0.0))
}

/// `Θ^m ‖μ₁‖ / (1 − Θ)`.
pub fn apriori_bound(theta: f64, m: u32, norm_mu1: f64) -> Result<f64> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::InvalidInput(format!("Θ = {theta} is not in (0, 1)")));
    }
    if m < 1 {
        return Err(Error::InvalidInput("m must be ≥ 1".into()));
    }
    Ok(theta.powi(m as i32) * norm_mu1 / (1.0 - theta))
}

/// Sup over 64 times in `[0, t]` of `∫_0^60 |f(s, τ)| ds`.
pub fn sup_l1<F: Fn(f64, f64) -> f64>(f: F, t: f64) -> f64 {
    (0..64)
        .map(|i| {
            let tau = t * i as f64 / 63.0;
            quad::integrate(|s| f(s, tau).abs(), 0.0, 60.0, 1e-10)
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub k: usize,
    pub measured: f64,
    pub bound: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub gamma: f64,
    pub theta: f64,
    pub h: f64,
    pub norm_mu1: f64,
    pub rows: Vec<BoundRow>,
    /// Set when the theorem's hypotheses fail, so a violated bound is not a
    /// solver defect.
    pub precondition_failure: Option<String>,
}

impl BoundReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report is plain data")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,measured,bound,gamma,theta\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{:.9e},{:.9e},{:.9e},{:.9e}\n",
                r.k, r.measured, r.bound, self.gamma, self.theta
            ));
        }
        out
    }
}

/// Measured sup-L1 error of `ψ_k` against the exact solution over `[0, T̃]`
/// next to the bound `Θ^k ‖μ₁‖/(1−Θ)`, for every `k` in `ks`.
pub fn empirical_vs_bound(
    exact: Option<ExactId>,
    sol: &SeriesSolution,
    params: &ContractionParams,
    ks: &[usize],
) -> Result<BoundReport> {
    let exact = exact.ok_or_else(|| Error::NoExactSolution("no exact solution is registered".into()))?;
    let t = params.t_tilde;
    let mut failure = None;
    let gamma = match gamma_aggregation(params) {
        Ok(g) if g.contractive => g.value,
        Ok(g) => {
            failure = Some(format!("γ = {} ≥ 1", g.value));
            g.value
        }
        Err(e) => return Err(e),
    };
    if !(-1.0..0.0).contains(&sol.h) {
        failure.get_or_insert(format!("h = {} outside [−1, 0)", sol.h));
    }
    let th = (1.0 + sol.h).abs() + gamma * sol.h.abs();
    if th >= 1.0 {
        failure.get_or_insert(format!("Θ = {th} ≥ 1"));
    }
    let mu1 = sol
        .iterates()
        .get(1)
        .ok_or_else(|| Error::InvalidInput("solution has no μ_1".into()))?;
    let norm_mu1 = sup_l1(|s, tau| mu1.eval_unchecked(s, tau), t);
    let mut rows = Vec::new();
    for &k in ks {
        if k > sol.order() {
            return Err(Error::InvalidInput(format!("ψ_{k} needs more iterates than {}", sol.order())));
        }
        let psi = sol.partial_sum(k + 1);
        let measured = sup_l1(|s, tau| psi.eval_unchecked(s, tau) - exact.evaluate(s, tau), t);
        let bound = if th < 1.0 && k >= 1 {
            th.powi(k as i32) * norm_mu1 / (1.0 - th)
        } else {
            f64::INFINITY
        };
        rows.push(BoundRow {
            k,
            measured,
            bound,
            holds: measured <= bound,
        });
    }
    Ok(BoundReport {
        gamma,
        theta: th,
        h: sol.h,
        norm_mu1,
        rows,
        precondition_failure: failure,
    })
}
