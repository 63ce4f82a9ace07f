//! Residual of a truncated series, the discrete squared residual `E(h)`, and
//! selection of the convergence-control parameter.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aham::{iterate, Mode, ProblemSpec, SeriesSolution, DEFAULT_TERM_CAP};
use crate::error::{Error, Result};
use crate::expoly::TimeField;
use crate::pbe_ops::spatial_operator;

/// Tensor grid `(s_i, τ_j)` on which the squared residual is averaged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualGrid {
    s_nodes: Vec<f64>,
    t_nodes: Vec<f64>,
}

impl ResidualGrid {
    /// Uniform nodes `s ∈ [0, s_max]`, `τ ∈ [0, t_max]`, `K + 1` of each.
    pub fn uniform(k: usize, s_max: f64, t_max: f64) -> Result<Self> {
        Self::uniform_from(k, 0.0, s_max, t_max)
    }

    /// Uniform grid whose size nodes start at `s_min` instead of 0, for
    /// kernels whose residual is singular at the origin.
    pub fn uniform_from(k: usize, s_min: f64, s_max: f64, t_max: f64) -> Result<Self> {
        if k < 1 {
            return Err(Error::InvalidInput("residual grid needs K ≥ 1".into()));
        }
        if !(s_min >= 0.0 && s_max > s_min && t_max > 0.0) {
            return Err(Error::InvalidInput(format!(
                "bad residual grid bounds s ∈ [{s_min}, {s_max}], τ ∈ [0, {t_max}]"
            )));
        }
        let line = |a: f64, b: f64| (0..=k).map(|i| a + (b - a) * i as f64 / k as f64).collect();
        Ok(ResidualGrid {
            s_nodes: line(s_min, s_max),
            t_nodes: line(0.0, t_max),
        })
    }

    pub fn from_nodes(s_nodes: Vec<f64>, t_nodes: Vec<f64>) -> Result<Self> {
        let increasing = |v: &[f64]| v.windows(2).all(|w| w[0] < w[1]);
        if s_nodes.len() < 2 || s_nodes.len() != t_nodes.len() {
            return Err(Error::InvalidInput("grid needs K + 1 ≥ 2 nodes on both axes".into()));
        }
        if !increasing(&s_nodes) || !increasing(&t_nodes) || s_nodes[0] < 0.0 || t_nodes[0] < 0.0 {
            return Err(Error::InvalidInput("grid nodes must be non-negative and strictly increasing".into()));
        }
        Ok(ResidualGrid { s_nodes, t_nodes })
    }

    pub fn k(&self) -> usize {
        self.s_nodes.len() - 1
    }

    pub fn s_nodes(&self) -> &[f64] {
        &self.s_nodes
    }

    pub fn t_nodes(&self) -> &[f64] {
        &self.t_nodes
    }
}

/// Closed-form residual field `∂ψ/∂τ + L[ψ] + M[ψ]` of the full truncated series.
pub fn residual_field(problem: &ProblemSpec, sol: &SeriesSolution) -> Result<TimeField> {
    let psi = sol.truncated();
    Ok(&psi.differentiate() + &spatial_operator(&problem.split, &psi)?)
}

/// Pointwise residual of the truncated series.
pub fn residual(problem: &ProblemSpec, sol: &SeriesSolution, s: f64, tau: f64) -> Result<f64> {
    residual_field(problem, sol)?.evaluate(s, tau)
}

/// `(1/K²) Σ_i Σ_j Res²(s_i, τ_j)` for a solution already built.
pub fn squared_residual(problem: &ProblemSpec, sol: &SeriesSolution, grid: &ResidualGrid) -> Result<f64> {
    let field = residual_field(problem, sol)?;
    let mut total = 0.0;
    for &s in &grid.s_nodes {
        for &t in &grid.t_nodes {
            let r = field.evaluate(s, t)?;
            total += r * r;
        }
    }
    let k = grid.k() as f64;
    Ok(total / (k * k))
}

/// `E(h)` for the accelerated recursion with `K` iterates beyond `μ_0`.
pub fn e_of_h(problem: &ProblemSpec, grid: &ResidualGrid, k_terms: usize, h: f64) -> Result<f64> {
    e_of_h_mode(problem, grid, k_terms, h, Mode::Aham)
}

pub fn e_of_h_mode(problem: &ProblemSpec, grid: &ResidualGrid, k_terms: usize, h: f64, mode: Mode) -> Result<f64> {
    let sol = iterate(problem, h, k_terms, mode, DEFAULT_TERM_CAP)?;
    squared_residual(problem, &sol, grid)
}

/// Settings of the scan-then-refine optimizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerSettings {
    pub bracket: (f64, f64),
    pub scan_points: usize,
    pub tol: f64,
    pub mode: Mode,
    /// Extra candidate always added to the scan when inside the bracket.
    pub anchor: Option<f64>,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        OptimizerSettings {
            bracket: (-2.0, -1e-3),
            scan_points: 41,
            tol: 1e-4,
            mode: Mode::Aham,
            anchor: Some(-1.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub h: f64,
    /// `None` when the recursion failed for this candidate.
    pub e: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerReport {
    pub bracket: (f64, f64),
    pub grid_k: usize,
    pub s_range: (f64, f64),
    pub t_range: (f64, f64),
    pub k_terms: usize,
    pub mode: Mode,
    pub candidates: Vec<Candidate>,
    /// Incumbent E after each golden-section step.
    pub refinement: Vec<f64>,
    pub h_star: f64,
    pub e_star: f64,
    /// Set when `h* < −1`, outside the region with a convergence guarantee.
    pub outside_guaranteed_region: bool,
}

impl OptimizerReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report is plain data")
    }
}

/// Picks `h` minimizing `E(h)` over the bracket with default settings.
pub fn optimize_h(problem: &ProblemSpec, grid: &ResidualGrid, k_terms: usize) -> Result<OptimizerReport> {
    optimize_h_with(problem, grid, k_terms, &OptimizerSettings::default())
}

pub fn optimize_h_with(
    problem: &ProblemSpec,
    grid: &ResidualGrid,
    k_terms: usize,
    settings: &OptimizerSettings,
) -> Result<OptimizerReport> {
    let (a, b) = settings.bracket;
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::Optimizer(format!("degenerate bracket [{a}, {b}]")));
    }
    if a <= 0.0 && b >= 0.0 {
        return Err(Error::Optimizer(format!("bracket [{a}, {b}] contains h = 0")));
    }
    if settings.scan_points < 3 {
        return Err(Error::Optimizer("the scan needs at least 3 points".into()));
    }
    let eval = |h: f64| e_of_h_mode(problem, grid, k_terms, h, settings.mode).ok();

    let n = settings.scan_points;
    let mut hs: Vec<f64> = (0..n)
        .map(|i| if i + 1 == n { b } else { a + (b - a) * i as f64 / (n - 1) as f64 })
        .collect();
    if let Some(x) = settings.anchor {
        if x > a && x < b && !hs.contains(&x) {
            hs.push(x);
        }
    }
    // smallest |h| first, so the first minimizer found is also the tie-break winner
    hs.sort_by(|x, y| x.abs().total_cmp(&y.abs()));
    let candidates: Vec<Candidate> = hs.par_iter().map(|&h| Candidate { h, e: eval(h) }).collect();

    let mut best: Option<(usize, f64)> = None;
    for (i, c) in candidates.iter().enumerate() {
        if let Some(e) = c.e {
            if best.is_none_or(|(_, be)| e < be) {
                best = Some((i, e));
            }
        }
    }
    let Some((bi, be)) = best else {
        return Err(Error::Optimizer("every candidate h failed".into()));
    };
    let mut h_star = candidates[bi].h;
    let mut e_star = be;

    // refine between the scan neighbours of the incumbent
    let step = (b - a) / (n - 1) as f64;
    let mut lo = (h_star - step).max(a);
    let mut hi = (h_star + step).min(b);
    let mut refinement = Vec::new();
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let f = |h: f64| eval(h).unwrap_or(f64::INFINITY);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let consider = |h: f64, e: f64, h_star: &mut f64, e_star: &mut f64| {
        if e < *e_star || (e == *e_star && h.abs() < h_star.abs()) {
            *h_star = h;
            *e_star = e;
        }
    };
    consider(x1, f1, &mut h_star, &mut e_star);
    consider(x2, f2, &mut h_star, &mut e_star);
    refinement.push(e_star);
    while hi - lo > settings.tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
            consider(x1, f1, &mut h_star, &mut e_star);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
            consider(x2, f2, &mut h_star, &mut e_star);
        }
        refinement.push(e_star);
    }

    Ok(OptimizerReport {
        bracket: settings.bracket,
        grid_k: grid.k(),
        s_range: (grid.s_nodes[0], *grid.s_nodes.last().unwrap()),
        t_range: (grid.t_nodes[0], *grid.t_nodes.last().unwrap()),
        k_terms,
        mode: settings.mode,
        candidates,
        refinement,
        h_star,
        e_star,
        outside_guaranteed_region: h_star < -1.0,
    })
}
