//! The seven worked examples: initial conditions, kernels, breakage and horizons.

use serde::{Deserialize, Serialize};

use crate::aham::ProblemSpec;
use crate::analytic::ExactId;
use crate::error::{Error, Result};
use crate::expoly::{int, ExpPoly};
use crate::hopt::ResidualGrid;
use crate::kernels::{BreakageSpec, SeparableKernel};
use crate::pbe_ops::OperatorSplit;

/// A registered example with its reference solution, if one exists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Example {
    pub id: String,
    pub problem: ProblemSpec,
    pub exact: Option<ExactId>,
    /// Lower end of the residual grid in `s`; positive when the residual is
    /// singular at the origin.
    pub residual_s_min: f64,
    /// Number of iterates beyond `μ_0` used by default.
    pub default_terms: usize,
}

impl Example {
    /// Default residual grid: uniform, `s ∈ [s_min, 10]`, `τ ∈ [0, t_max]`, `K = 20`.
    pub fn residual_grid(&self) -> ResidualGrid {
        ResidualGrid::uniform_from(20, self.residual_s_min, 10.0, self.problem.t_max)
            .expect("registry grids are valid")
    }

    pub fn is_aggregation_only(&self) -> bool {
        self.problem.split.breakage.is_none()
    }
}

pub const EXAMPLE_IDS: [&str; 7] = ["4.1", "4.2", "4.3", "4.4", "4.5", "4.6", "4.7"];

fn exp_s() -> ExpPoly {
    ExpPoly::monomial(1.0, int(0), int(1)).expect("valid monomial")
}

fn gamma_ic(amplitude: f64, rate: i64) -> ExpPoly {
    ExpPoly::monomial(amplitude, int(1), int(rate)).expect("valid monomial")
}

/// Looks up an example by id (`"4.1"` .. `"4.7"`).
pub fn example(id: &str) -> Result<Example> {
    let agg = |k: SeparableKernel| OperatorSplit::aggregation(k);
    let (c0, split, t_max, exact, s_min, terms, label) = match id {
        "4.1" => (exp_s(), agg(SeparableKernel::constant()), 3.0, Some(ExactId::ConstantExp), 0.0, 3, "constant kernel"),
        "4.2" => (exp_s(), agg(SeparableKernel::sum()), 2.0, Some(ExactId::SumExp), 0.0, 3, "sum kernel"),
        "4.3" => (exp_s(), agg(SeparableKernel::product()), 1.0, Some(ExactId::ProductExp), 0.0, 3, "product kernel"),
        "4.4" => (gamma_ic(4.0, 2), agg(SeparableKernel::sum()), 1.0, None, 0.0, 3, "sum kernel, gamma initial condition"),
        // ψ_2 is the longest Brownian truncation with an integrable residual,
        // which is singular like s^{-1/2} at the origin
        "4.5" => (gamma_ic(4.0, 2), agg(SeparableKernel::brownian()), 1.0, None, 0.05, 2, "free-molecular Brownian kernel"),
        "4.6" => (
            gamma_ic(4.0, 2),
            OperatorSplit::with_breakage(SeparableKernel::constant(), BreakageSpec::binary_linear(0.5)?),
            2.0,
            Some(ExactId::BinaryBreakage { amplitude: 4.0, rate: 2.0, sigma: 0.5 }),
            0.0,
            4,
            "constant aggregation, binary breakage S = s/2",
        ),
        "4.7" => (
            gamma_ic(32.0, 4),
            OperatorSplit::with_breakage(SeparableKernel::constant(), BreakageSpec::binary_linear(2.0)?),
            2.0,
            Some(ExactId::BinaryBreakage { amplitude: 32.0, rate: 4.0, sigma: 2.0 }),
            0.0,
            3,
            "constant aggregation, binary breakage S = 2s",
        ),
        other => return Err(Error::InvalidInput(format!("unknown example '{other}'"))),
    };
    Ok(Example {
        id: id.to_string(),
        problem: ProblemSpec::new(format!("example {id}: {label}"), c0, split, t_max)?,
        exact,
        residual_s_min: s_min,
        default_terms: terms,
    })
}

pub fn all_examples() -> Vec<Example> {
    EXAMPLE_IDS.iter().map(|id| example(id).expect("registry is valid")).collect()
}
