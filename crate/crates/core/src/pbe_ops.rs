//! Closed-form aggregation and breakage operators on time fields.
//!
//! Both operators are written on the left-hand side of the evolution law,
//! `∂c/∂τ + L[c] + M[c] = 0`, so `M = loss − gain` and `L = death − birth`.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::expoly::{convolve_fields_dense, convolve_into, int, shifted, ExpPoly, ExpPolyTerm, TimeField};
use crate::kernels::{BreakageSpec, SeparableKernel};

/// Linear/nonlinear decomposition of a population balance right-hand side.
/// The source term is fixed to zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorSplit {
    pub kernel: SeparableKernel,
    pub breakage: Option<BreakageSpec>,
}

impl OperatorSplit {
    pub fn aggregation(kernel: SeparableKernel) -> Self {
        OperatorSplit {
            kernel,
            breakage: None,
        }
    }

    pub fn with_breakage(kernel: SeparableKernel, breakage: BreakageSpec) -> Self {
        OperatorSplit {
            kernel,
            breakage: Some(breakage),
        }
    }
}

/// Symmetrized bilinear aggregation form `B(F, G)`; `B(F, F) = M[F]`.
///
/// For each kernel term `(λ, α, β)` and τ-coefficients `f_m`, `g_n`:
/// gain `λ/2 · (s^α f_m) * (s^β g_n)` and loss
/// `λ/2 · [s^α f_m ∫ s^β g_n + s^α g_n ∫ s^β f_m]`, at τ-degree `m + n`.
pub fn aggregation_m(split: &OperatorSplit, f: &TimeField, g: &TimeField) -> Result<TimeField> {
    let mut raw: Vec<(usize, Vec<ExpPolyTerm>)> = Vec::new();
    for kt in split.kernel.terms() {
        let half = 0.5 * kt.lambda;
        let prep = |field: &TimeField| -> Result<Vec<Prepared>> {
            field
                .coeffs()
                .iter()
                .map(|(k, c)| {
                    let alpha = shifted(c.terms(), kt.alpha, 1.0)?;
                    let beta = shifted(c.terms(), kt.beta, 1.0)?;
                    let integral = ExpPoly::from_canonical_raw(beta.clone()).total_integral();
                    Ok(Prepared {
                        degree: *k,
                        alpha,
                        beta,
                        integral,
                    })
                })
                .collect()
        };
        let fp = prep(f)?;
        let gp = prep(g)?;
        let fa: Vec<(usize, Vec<ExpPolyTerm>)> = fp.iter().map(|a| (a.degree, a.alpha.clone())).collect();
        let gb: Vec<(usize, Vec<ExpPolyTerm>)> = gp.iter().map(|b| (b.degree, b.beta.clone())).collect();
        let dense = convolve_fields_dense(&fa, &gb, -half);
        let have_dense = dense.is_some();
        raw.extend(dense.into_iter().flatten());
        for a in &fp {
            for b in &gp {
                let mut out = Vec::with_capacity(a.alpha.len() + b.alpha.len());
                if !have_dense {
                    convolve_into(&a.alpha, &b.beta, -half, &mut out)?;
                }
                out.extend(a.alpha.iter().map(|t| scaled(t, half * b.integral)));
                out.extend(b.alpha.iter().map(|t| scaled(t, half * a.integral)));
                raw.push((a.degree + b.degree, out));
            }
        }
    }
    Ok(TimeField::from_raw(raw))
}

/// `M[F] = B(F, F)`.
pub fn apply_m(split: &OperatorSplit, f: &TimeField) -> Result<TimeField> {
    aggregation_m(split, f, f)
}

/// `L[F] = S(s) F(s) − ∫_s^∞ β(s, ξ) S(ξ) F(ξ) dξ`; zero without breakage.
pub fn breakage_l(split: &OperatorSplit, f: &TimeField) -> Result<TimeField> {
    let Some(b) = split.breakage else {
        return Ok(TimeField::zero());
    };
    let j = int(b.j as i64);
    let i = int(b.i as i64);
    f.try_map(|c| {
        let death = ExpPoly::from_canonical_raw(shifted(c.terms(), j, b.sigma_s)?);
        let weighted = ExpPoly::from_canonical_raw(shifted(c.terms(), j - i, b.sigma_s)?);
        let birth = weighted.tail_integral()?.mul_power(i - int(1))?.scale(b.eta);
        Ok(&death - &birth)
    })
}

/// Full spatial operator `L[F] + M[F]`.
pub fn spatial_operator(split: &OperatorSplit, f: &TimeField) -> Result<TimeField> {
    Ok(&breakage_l(split, f)? + &apply_m(split, f)?)
}

struct Prepared {
    degree: usize,
    alpha: Vec<ExpPolyTerm>,
    beta: Vec<ExpPolyTerm>,
    integral: f64,
}

fn scaled(t: &ExpPolyTerm, factor: f64) -> ExpPolyTerm {
    ExpPolyTerm::new(t.coeff * factor, t.power, t.rate)
}
