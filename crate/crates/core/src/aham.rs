//! Series solutions by the accelerated homotopy analysis recursion and by the
//! classic homotopy recursion.
//!
//! Both modes build iterates `μ_0 .. μ_K` with `μ_0 = c_0` and
//!
//! ```text
//! μ_1 = ∫_0^τ h [∂μ_0/∂ρ + L μ_0 + N_0] dρ
//! μ_k = ∫_0^τ (∂μ_{k-1}/∂ρ + h [∂μ_{k-1}/∂ρ + L μ_{k-1} + N_{k-1}]) dρ
//! ```
//!
//! where `N_k` is the accelerated He polynomial `H_k = M(ψ_k) − Σ_{j<k} H_j`
//! (accelerated mode) or the Cauchy-product homotopy polynomial
//! `Q_k = Σ_{m+n=k} B(μ_m, μ_n)` (classic mode). With `h = −1` the classic
//! mode reproduces the Adomian decomposition iterates.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expoly::{ExpPoly, TimeField};
use crate::pbe_ops::{aggregation_m, apply_m, breakage_l, OperatorSplit};

/// Default cap on the number of terms any single coefficient may carry.
pub const DEFAULT_TERM_CAP: usize = 512;

/// A population balance problem with its initial condition and horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub c0: ExpPoly,
    pub split: OperatorSplit,
    pub t_max: f64,
    pub label: String,
}

impl ProblemSpec {
    pub fn new(label: impl Into<String>, c0: ExpPoly, split: OperatorSplit, t_max: f64) -> Result<Self> {
        if !(t_max > 0.0) {
            return Err(Error::InvalidInput("time horizon must be positive".into()));
        }
        if let Some(b) = &split.breakage {
            b.validate()?;
        }
        // moments 0..2 are finite for every admissible expoly; the check is
        // that they are actually representable
        for j in 0..=2 {
            if !c0.moment(j).is_finite() {
                return Err(Error::InvalidInput(format!("initial moment {j} is not finite")));
            }
        }
        Ok(ProblemSpec {
            c0,
            split,
            t_max,
            label: label.into(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Aham,
    Classic,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Aham => "aham",
            Mode::Classic => "classic",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "aham" => Ok(Mode::Aham),
            "classic" => Ok(Mode::Classic),
            other => Err(Error::InvalidInput(format!("unknown mode '{other}'"))),
        }
    }
}

/// Running record of accelerated He polynomials.
#[derive(Debug, Clone, Default)]
pub struct HePolynomialLedger {
    h_list: Vec<TimeField>,
    running: TimeField,
}

impl HePolynomialLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn polynomials(&self) -> &[TimeField] {
        &self.h_list
    }

    /// `Σ_j H_j` over the recorded polynomials.
    pub fn total(&self) -> &TimeField {
        &self.running
    }
}

/// Computes `H_k = M(ψ_k) − Σ_{j<k} H_j` with `ψ_k = Σ_{j≤k} μ_j` and records it.
///
/// `iterates` must hold `μ_0 .. μ_k` and the ledger `H_0 .. H_{k-1}`.
pub fn accelerated_he(
    split: &OperatorSplit,
    iterates: &[TimeField],
    ledger: &mut HePolynomialLedger,
) -> Result<TimeField> {
    if iterates.len() != ledger.h_list.len() + 1 {
        return Err(Error::InvalidInput(format!(
            "ledger holds {} polynomials but {} iterates were given",
            ledger.h_list.len(),
            iterates.len()
        )));
    }
    let psi = partial_sum(iterates);
    let m_psi = apply_m(split, &psi)?;
    let h_k = &m_psi - &ledger.running;
    ledger.running = m_psi;
    ledger.h_list.push(h_k.clone());
    Ok(h_k)
}

/// Classic homotopy polynomial `Q_k = Σ_{m+n=k} B(μ_m, μ_n)` over ordered pairs.
pub fn homotopy_polynomial(split: &OperatorSplit, iterates: &[TimeField], k: usize) -> Result<TimeField> {
    let mut q = TimeField::zero();
    for m in 0..=k {
        let n = k - m;
        if n < m {
            break;
        }
        let b = aggregation_m(split, &iterates[m], &iterates[n])?;
        q = if m == n { &q + &b } else { &q + &b.scale(2.0) };
    }
    Ok(q)
}

fn partial_sum(fields: &[TimeField]) -> TimeField {
    fields.iter().fold(TimeField::zero(), |acc, f| &acc + f)
}

/// Ordered iterates of a series solution for one convergence-control value.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesSolution {
    iterates: Vec<TimeField>,
    pub h: f64,
    pub mode: Mode,
}

impl SeriesSolution {
    /// Wraps precomputed iterates; `iterates` must hold at least `μ_0`.
    pub fn from_iterates(iterates: Vec<TimeField>, h: f64, mode: Mode) -> Self {
        assert!(!iterates.is_empty(), "a series needs μ_0");
        SeriesSolution { iterates, h, mode }
    }

    /// The first `n_terms` iterates as a solution of their own.
    pub fn truncate_to(&self, n_terms: usize) -> SeriesSolution {
        let n = n_terms.clamp(1, self.iterates.len());
        SeriesSolution::from_iterates(self.iterates[..n].to_vec(), self.h, self.mode)
    }

    pub fn iterates(&self) -> &[TimeField] {
        &self.iterates
    }

    /// Highest iterate index `K`.
    pub fn order(&self) -> usize {
        self.iterates.len() - 1
    }

    /// `ψ = Σ_{i < n_terms} μ_i`.
    pub fn partial_sum(&self, n_terms: usize) -> TimeField {
        partial_sum(&self.iterates[..n_terms.min(self.iterates.len())])
    }

    /// Full truncated series `ψ_K`.
    pub fn truncated(&self) -> TimeField {
        partial_sum(&self.iterates)
    }

    pub fn to_json(&self) -> serde_json::Value {
        // (coeff, power numer, power denom, rate numer, rate denom) per τ-degree
        type Terms = Vec<(f64, i64, i64, i64, i64)>;
        let iterates: Vec<Vec<(usize, Terms)>> = self
            .iterates
            .iter()
            .map(|field| {
                field
                    .coeffs()
                    .iter()
                    .map(|(k, f)| {
                        let terms = f
                            .terms()
                            .iter()
                            .map(|t| (t.coeff, *t.power.numer(), *t.power.denom(), *t.rate.numer(), *t.rate.denom()))
                            .collect();
                        (*k, terms)
                    })
                    .collect()
            })
            .collect();
        serde_json::json!({
            "h": self.h,
            "mode": self.mode,
            "K": self.order(),
            "iterates": iterates,
        })
    }
}

/// Accelerated recursion with the default term cap.
pub fn iterate_aham(problem: &ProblemSpec, h: f64, k: usize) -> Result<SeriesSolution> {
    iterate(problem, h, k, Mode::Aham, DEFAULT_TERM_CAP)
}

/// Classic recursion with the default term cap.
pub fn iterate_classic(problem: &ProblemSpec, h: f64, k: usize) -> Result<SeriesSolution> {
    iterate(problem, h, k, Mode::Classic, DEFAULT_TERM_CAP)
}

pub fn iterate(problem: &ProblemSpec, h: f64, k: usize, mode: Mode, term_cap: usize) -> Result<SeriesSolution> {
    if h == 0.0 || !h.is_finite() {
        return Err(Error::InvalidInput(format!("convergence-control parameter must be non-zero, got {h}")));
    }
    if k < 1 {
        return Err(Error::InvalidInput("at least one iterate beyond μ_0 is required".into()));
    }
    let split = &problem.split;
    let mut iterates = vec![TimeField::constant(problem.c0.clone())];
    let mut ledger = HePolynomialLedger::new();
    for idx in 1..=k {
        let mut step = || -> Result<TimeField> {
            let nonlinear = match mode {
                Mode::Aham => accelerated_he(split, &iterates, &mut ledger)?,
                Mode::Classic => homotopy_polynomial(split, &iterates, idx - 1)?,
            };
            let prev = &iterates[idx - 1];
            let rate = prev.differentiate();
            let inner = &(&rate + &breakage_l(split, prev)?) + &nonlinear;
            let integrand = if idx == 1 {
                inner.scale(h)
            } else {
                &rate + &inner.scale(h)
            };
            Ok(integrand.integrate())
        };
        let next = step().map_err(|e| e.at_iterate(idx))?;
        let terms = next.max_terms();
        if terms > term_cap {
            return Err(Error::TermCap {
                iterate: idx,
                terms,
                cap: term_cap,
            });
        }
        iterates.push(next);
    }
    Ok(SeriesSolution { iterates, h, mode })
}

/// Value of the partial sum of the first `n_terms` iterates at `(s, τ)`.
pub fn evaluate_solution(sol: &SeriesSolution, s: f64, tau: f64, n_terms: usize) -> Result<f64> {
    if n_terms == 0 || n_terms > sol.iterates.len() {
        return Err(Error::InvalidInput(format!(
            "n_terms must be in 1..={}, got {n_terms}",
            sol.iterates.len()
        )));
    }
    sol.iterates[..n_terms]
        .iter()
        .try_fold(0.0, |acc, f| Ok(acc + f.evaluate(s, tau)?))
}

/// Exact moment of order `j` of the partial sum of the first `n_terms` iterates.
pub fn solution_moment(sol: &SeriesSolution, j: u32, tau: f64, n_terms: usize) -> f64 {
    sol.iterates[..n_terms.min(sol.iterates.len())]
        .iter()
        .map(|f| f.moment_at(j, tau))
        .sum()
}
