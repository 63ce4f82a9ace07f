//! Mass-conserving finite-volume reference solver on a truncated size domain.
//!
//! Cell masses evolve by a pairwise gain/loss double sum: the newborn mass
//! `s_i + s_j` of a pair goes entirely to the cell containing it, and mass
//! born beyond the last edge is discarded and tracked as leak. Optional
//! power-law breakage redistributes the mass of a broken particle over the
//! cells below it in proportion to `∫ s β(s, ξ) ds`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{BreakageSpec, SeparableKernel};
use crate::quad;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKind {
    Uniform,
    Geometric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeGrid {
    edges: Vec<f64>,
    points: Vec<f64>,
    kind: GridKind,
}

impl SizeGrid {
    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    /// Representative points: midpoints, or geometric means on geometric grids.
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn cells(&self) -> usize {
        self.points.len()
    }

    pub fn width(&self, i: usize) -> f64 {
        self.edges[i + 1] - self.edges[i]
    }

    /// Index of the cell containing `s`, `None` outside the domain.
    pub fn locate(&self, s: f64) -> Option<usize> {
        let n = self.cells();
        if s < self.edges[0] || s >= self.edges[n] {
            return None;
        }
        let i = self.edges.partition_point(|&e| e <= s);
        Some(i - 1)
    }
}

pub fn build_grid(s_min: f64, s_max: f64, cells: usize, kind: GridKind) -> Result<SizeGrid> {
    if cells < 16 {
        return Err(Error::InvalidInput(format!("a size grid needs at least 16 cells, got {cells}")));
    }
    if !(s_min > 0.0 && s_max > s_min && s_max.is_finite()) {
        return Err(Error::InvalidInput(format!("bad size bounds [{s_min}, {s_max}]")));
    }
    let edges: Vec<f64> = match kind {
        GridKind::Uniform => (0..=cells)
            .map(|i| s_min + (s_max - s_min) * i as f64 / cells as f64)
            .collect(),
        GridKind::Geometric => {
            let r = (s_max / s_min).powf(1.0 / cells as f64);
            (0..=cells).map(|i| s_min * r.powi(i as i32)).collect()
        }
    };
    let mut edges = edges;
    edges[cells] = s_max;
    let points = edges
        .windows(2)
        .map(|w| match kind {
            GridKind::Uniform => 0.5 * (w[0] + w[1]),
            GridKind::Geometric => (w[0] * w[1]).sqrt(),
        })
        .collect();
    Ok(SizeGrid { edges, points, kind })
}

/// Densities on a grid at one time, with run diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSolution {
    pub grid: SizeGrid,
    pub values: Vec<f64>,
    pub time: f64,
    /// Mass born beyond the last edge and discarded.
    pub mass_leak: f64,
    pub initial_mass: f64,
    pub dt: f64,
    pub steps: usize,
}

impl CellSolution {
    /// Discrete moment `Σ x_i^j c_i Δ_i`.
    pub fn moment(&self, j: u32) -> f64 {
        (0..self.grid.cells())
            .map(|i| self.grid.points[i].powi(j as i32) * self.values[i] * self.grid.width(i))
            .sum()
    }

    /// `(n₁(τ) + leak − n₁(0)) / n₁(0)`.
    pub fn mass_drift(&self) -> f64 {
        (self.moment(1) + self.mass_leak - self.initial_mass) / self.initial_mass
    }

    /// `Σ |c_i − reference(x_i)| Δ_i`.
    pub fn l1_distance<F: Fn(f64) -> f64>(&self, reference: F) -> f64 {
        (0..self.grid.cells())
            .map(|i| (self.values[i] - reference(self.grid.points[i])).abs() * self.grid.width(i))
            .sum()
    }

    /// Piecewise-linear interpolation in the representative points, constant
    /// beyond the ends of the grid and zero past the last edge.
    pub fn interpolate(&self, s: f64) -> f64 {
        let x = &self.grid.points;
        let n = x.len();
        if s >= self.grid.edges[n] {
            return 0.0;
        }
        if s <= x[0] {
            return self.values[0];
        }
        if s >= x[n - 1] {
            return self.values[n - 1];
        }
        let i = x.partition_point(|&p| p <= s) - 1;
        let t = (s - x[i]) / (x[i + 1] - x[i]);
        self.values[i] * (1.0 - t) + self.values[i + 1] * t
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,density\n");
        for (s, v) in self.grid.points.iter().zip(&self.values) {
            let _ = writeln!(out, "{s:.9e},{v:.9e}");
        }
        out
    }
}

/// Aggregation-only solve.
pub fn fvm_solve<F: Fn(f64) -> f64>(
    kernel: &SeparableKernel,
    c0: F,
    grid: &SizeGrid,
    tau_end: f64,
    dt_cfl: f64,
) -> Result<CellSolution> {
    fvm_solve_with(kernel, None, c0, grid, tau_end, dt_cfl)
}

/// Solve with optional power-law breakage.
pub fn fvm_solve_with<F: Fn(f64) -> f64>(
    kernel: &SeparableKernel,
    breakage: Option<&BreakageSpec>,
    c0: F,
    grid: &SizeGrid,
    tau_end: f64,
    dt_cfl: f64,
) -> Result<CellSolution> {
    let mut snaps = fvm_snapshots(kernel, breakage, c0, grid, &[tau_end], dt_cfl)?;
    Ok(snaps.pop().expect("one snapshot per requested time"))
}

/// One run recording the solution at each of the increasing `times`.
///
/// Each interval between snapshots is split into equal steps no longer than
/// the stability bound, so a single time reproduces [`fvm_solve_with`].
pub fn fvm_snapshots<F: Fn(f64) -> f64>(
    kernel: &SeparableKernel,
    breakage: Option<&BreakageSpec>,
    c0: F,
    grid: &SizeGrid,
    times: &[f64],
    dt_cfl: f64,
) -> Result<Vec<CellSolution>> {
    if times.is_empty() || !(times[0] > 0.0) || times.windows(2).any(|w| !(w[1] > w[0])) || !(dt_cfl > 0.0) {
        return Err(Error::InvalidInput(
            "snapshot times must be positive and increasing, step bound positive".into(),
        ));
    }
    let sys = System::new(kernel, breakage, grid);
    let n = grid.cells();
    let x = &grid.points;
    // cell masses from the exact cell integrals of c0
    let mut mass: Vec<f64> = (0..n)
        .map(|i| x[i] * quad::integrate(&c0, grid.edges[i], grid.edges[i + 1], 1e-12))
        .collect();
    let initial_mass: f64 = mass.iter().sum();

    let number: Vec<f64> = (0..n).map(|i| mass[i] / x[i]).collect();
    let rate_bound = (0..n)
        .map(|i| {
            let agg: f64 = (0..n).map(|j| sys.w[i * n + j] * number[j]).sum();
            agg + breakage.map_or(0.0, |b| b.selection(x[i]))
        })
        .fold(0.0, f64::max);
    let dt_max = if rate_bound > 0.0 { dt_cfl.min(0.5 / rate_bound) } else { dt_cfl };

    let mut leak = 0.0;
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut stage = vec![0.0; n];
    let mut now = 0.0;
    let mut total_steps = 0;
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        let steps = ((target - now) / dt_max).ceil().max(1.0) as usize;
        let dt = (target - now) / steps as f64;
        for step in 0..steps {
            let l1 = sys.rhs(&mass, &mut k1);
            for i in 0..n {
                stage[i] = mass[i] + dt * k1[i];
            }
            let l2 = sys.rhs(&stage, &mut k2);
            for i in 0..n {
                mass[i] += 0.5 * dt * (k1[i] + k2[i]);
            }
            leak += 0.5 * dt * (l1 + l2);
            if let Some(bad) = mass.iter().find(|m| !m.is_finite() || m.abs() > 1e12) {
                return Err(Error::Unstable {
                    time: now + (step + 1) as f64 * dt,
                    value: *bad,
                });
            }
        }
        now = target;
        total_steps += steps;
        let values = (0..n)
            .map(|i| {
                let v = mass[i] / (x[i] * grid.width(i));
                if (-1e-12..0.0).contains(&v) {
                    0.0
                } else {
                    v
                }
            })
            .collect();
        out.push(CellSolution {
            grid: grid.clone(),
            values,
            time: target,
            mass_leak: leak,
            initial_mass,
            dt,
            steps: total_steps,
        });
    }
    Ok(out)
}

struct System {
    x: Vec<f64>,
    w: Vec<f64>,
    /// Target cell of each pair `i ≤ j`, `usize::MAX` for leaking pairs.
    target: Vec<usize>,
    /// Breakage: `(selection rate, [(target cell, mass fraction)])` per cell.
    frag: Vec<(f64, Vec<(usize, f64)>)>,
}

impl System {
    fn new(kernel: &SeparableKernel, breakage: Option<&BreakageSpec>, grid: &SizeGrid) -> Self {
        let x = grid.points.clone();
        let n = x.len();
        let mut w = vec![0.0; n * n];
        let mut target = vec![usize::MAX; n * n];
        for i in 0..n {
            for j in 0..n {
                w[i * n + j] = kernel.evaluate(x[i], x[j]);
                if i <= j {
                    target[i * n + j] = grid.locate(x[i] + x[j]).unwrap_or(usize::MAX);
                }
            }
        }
        let frag = match breakage {
            None => Vec::new(),
            Some(b) => (0..n)
                .map(|j| {
                    // mass below s of fragments of a particle of size ξ: ξ (s/ξ)^{i+1}
                    let xi = x[j];
                    let below = |s: f64| xi * (s.min(xi) / xi).powi(b.i as i32 + 1);
                    let mut parts: Vec<(usize, f64)> = (0..=j)
                        .map(|i| {
                            let lo = if i == 0 { 0.0 } else { grid.edges[i] };
                            (i, (below(grid.edges[i + 1]) - below(lo)) / xi)
                        })
                        .filter(|(_, f)| *f > 0.0)
                        .collect();
                    let total: f64 = parts.iter().map(|p| p.1).sum();
                    for p in &mut parts {
                        p.1 /= total;
                    }
                    (b.selection(xi), parts)
                })
                .collect(),
        };
        System { x, w, target, frag }
    }

    /// Mass rates into `out`; returns the leak rate.
    fn rhs(&self, mass: &[f64], out: &mut [f64]) -> f64 {
        let n = self.x.len();
        let number: Vec<f64> = mass.iter().zip(&self.x).map(|(m, x)| m / x).collect();
        let mut leak = 0.0;
        for k in 0..n {
            let row = &self.w[k * n..(k + 1) * n];
            let collide: f64 = row.iter().zip(&number).map(|(w, nj)| w * nj).sum();
            out[k] = -mass[k] * collide;
        }
        for i in 0..n {
            if number[i] == 0.0 {
                continue;
            }
            for j in i..n {
                let pair = self.w[i * n + j] * number[i] * number[j] * if i == j { 0.5 } else { 1.0 };
                let born = pair * (self.x[i] + self.x[j]);
                match self.target[i * n + j] {
                    usize::MAX => leak += born,
                    k => out[k] += born,
                }
            }
        }
        for (j, (rate, parts)) in self.frag.iter().enumerate() {
            let broken = rate * mass[j];
            out[j] -= broken;
            for &(i, f) in parts {
                out[i] += broken * f;
            }
        }
        leak
    }
}
