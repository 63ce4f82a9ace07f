//! Experiment runner: solves a registered example and writes density, moment,
//! error-norm and h-optimization tables.

use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Map};
use sha2::{Digest, Sha256};
use thiserror::Error;

use aham_core::aham::DEFAULT_TERM_CAP;
use aham_core::{
    build_grid, error_norm, example, exact_moments, fvm_snapshots, iterate, optimize_h_with, CellSolution, ErrorGrid,
    ExactId, Example, GridKind, Mode, OptimizerReport, OptimizerSettings, ResidualGrid, TimeField,
};

pub mod table;

use table::{Cell, Table};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] aham_core::Error),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Usage(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum HChoice {
    Fixed(f64),
    Optimize,
}

/// One run. `out` is not part of the configuration hash.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub example: String,
    /// Iterates beyond `μ_0`; the example's default when `None`.
    pub terms: Option<usize>,
    pub h: HChoice,
    pub h_bracket: (f64, f64),
    /// `(K, s_max, t_max)`; the example's default when `None`.
    pub residual_grid: Option<(usize, f64, f64)>,
    /// `(K, s_max)` of the midpoint error norm.
    pub error_grid: (usize, f64),
    pub format: Format,
    pub fvm_cells: usize,
    pub mode: Mode,
    #[serde(skip)]
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            example: "4.1".into(),
            terms: None,
            h: HChoice::Optimize,
            h_bracket: (-2.0, -1e-3),
            residual_grid: None,
            error_grid: (1000, 10.0),
            format: Format::Csv,
            fvm_cells: 400,
            mode: Mode::Aham,
            out: PathBuf::from("."),
        }
    }
}

impl RunConfig {
    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("config is plain data");
        format!("{:x}", Sha256::digest(text.as_bytes()))
    }
}

/// Reference solution: closed form, or finite-volume snapshots.
enum Reference {
    Exact(ExactId),
    Fvm(Vec<CellSolution>),
}

impl Reference {
    fn describe(&self, cells: usize) -> String {
        match self {
            Reference::Exact(id) => format!("exact {id:?}"),
            Reference::Fvm(_) => format!("fvm, {cells} geometric cells on [1e-3, 60], dt 0.01"),
        }
    }

    fn snapshot(&self, tau: f64) -> Option<&CellSolution> {
        match self {
            Reference::Fvm(snaps) => snaps.iter().find(|c| (c.time - tau).abs() < 1e-12),
            Reference::Exact(_) => None,
        }
    }

    fn density(&self, ex: &Example, s: f64, tau: f64) -> f64 {
        if tau == 0.0 {
            return ex.problem.c0.evaluate(s).unwrap_or(f64::NAN);
        }
        match self {
            Reference::Exact(id) => id.evaluate(s, tau),
            Reference::Fvm(_) => self.snapshot(tau).map_or(f64::NAN, |c| c.interpolate(s)),
        }
    }

    fn moment(&self, ex: &Example, j: u32, tau: f64) -> f64 {
        if tau == 0.0 {
            return ex.problem.c0.moment(j);
        }
        match self {
            Reference::Exact(id) => exact_moments(*id, j, tau),
            Reference::Fvm(_) => self.snapshot(tau).map_or(f64::NAN, |c| c.moment(j)),
        }
    }
}

/// Table times: `0.5, 1.0, …` up to the horizon.
pub fn table_times(t_max: f64) -> Vec<f64> {
    (1..).map(|i| 0.5 * i as f64).take_while(|t| *t <= t_max + 1e-12).collect()
}

/// Moment-curve times: 21 points on `[0, t_max]`.
pub fn moment_times(t_max: f64) -> Vec<f64> {
    (0..=20).map(|i| t_max * i as f64 / 20.0).collect()
}

/// Density sample points `0.25, 0.5, …, 10`.
pub fn density_points() -> Vec<f64> {
    (1..=40).map(|i| 0.25 * i as f64).collect()
}

fn solve(ex: &Example, grid: &ResidualGrid, k: usize, cfg: &RunConfig) -> Result<(TimeField, f64, Option<OptimizerReport>), CliError> {
    let (h, report) = match cfg.h {
        HChoice::Fixed(h) => (h, None),
        HChoice::Optimize => {
            let settings = OptimizerSettings {
                bracket: cfg.h_bracket,
                mode: cfg.mode,
                ..OptimizerSettings::default()
            };
            let r = optimize_h_with(&ex.problem, grid, k, &settings)?;
            (r.h_star, Some(r))
        }
    };
    let sol = iterate(&ex.problem, h, k, cfg.mode, DEFAULT_TERM_CAP)?;
    Ok((sol.truncated(), h, report))
}

/// Runs one example and writes its tables into `cfg.out`; returns the paths.
pub fn run_example(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let ex = example(&cfg.example)?;
    let k = cfg.terms.unwrap_or(ex.default_terms);
    if k < 1 {
        return Err(CliError::Usage("--terms must be at least 1".into()));
    }
    let grid = match cfg.residual_grid {
        Some((gk, s_max, t_max)) => ResidualGrid::uniform_from(gk, ex.residual_s_min, s_max, t_max)?,
        None => ex.residual_grid(),
    };
    let egrid = ErrorGrid::new(cfg.error_grid.0, cfg.error_grid.1)?;
    let (psi, h, report) = solve(&ex, &grid, k, cfg)?;

    let t_max = ex.problem.t_max;
    let tab_times = table_times(t_max);
    let mom_times = moment_times(t_max);
    let reference = match ex.exact {
        Some(id) => Reference::Exact(id),
        None => {
            let mut times: Vec<f64> = tab_times.iter().chain(&mom_times).copied().filter(|t| *t > 0.0).collect();
            times.sort_by(f64::total_cmp);
            times.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
            let g = build_grid(1e-3, 60.0, cfg.fvm_cells, GridKind::Geometric)?;
            let c0 = |s: f64| ex.problem.c0.evaluate(s).unwrap_or(0.0);
            let snaps = fvm_snapshots(
                &ex.problem.split.kernel,
                ex.problem.split.breakage.as_ref(),
                c0,
                &g,
                &times,
                0.01,
            )?;
            Reference::Fvm(snaps)
        }
    };

    let mut meta = Map::new();
    meta.insert("config_hash".into(), json!(cfg.hash()));
    meta.insert("example".into(), json!(ex.id));
    meta.insert("label".into(), json!(ex.problem.label));
    meta.insert("mode".into(), json!(cfg.mode.to_string()));
    meta.insert(
        "h".into(),
        json!({ "choice": match cfg.h { HChoice::Fixed(_) => "fixed", HChoice::Optimize => "optimize" }, "value": h }),
    );
    meta.insert("terms".into(), json!(k));
    meta.insert("term_cap".into(), json!(DEFAULT_TERM_CAP));
    let s_nodes = grid.s_nodes();
    let t_nodes = grid.t_nodes();
    meta.insert(
        "residual_grid".into(),
        json!({ "k": grid.k(), "s": [s_nodes[0], s_nodes[s_nodes.len() - 1]], "tau": [t_nodes[0], t_nodes[t_nodes.len() - 1]] }),
    );
    meta.insert("error_grid".into(), json!({ "k": cfg.error_grid.0, "s_max": cfg.error_grid.1 }));
    meta.insert("reference".into(), json!(reference.describe(cfg.fvm_cells)));

    let mut density = Table::new("density", &["s", "tau", "approx", "reference", "abs_error"]);
    for &tau in &tab_times {
        for s in density_points() {
            let a = psi.evaluate(s, tau)?;
            let r = reference.density(&ex, s, tau);
            density.push(vec![s.into(), tau.into(), a.into(), r.into(), (a - r).abs().into()]);
        }
    }

    let mut moments = Table::new("moments", &["tau", "j", "approx", "reference"]);
    for &tau in &mom_times {
        for j in 0..=2u32 {
            moments.push(vec![
                tau.into(),
                Cell::Int(j as i64),
                psi.moment_at(j, tau).into(),
                reference.moment(&ex, j, tau).into(),
            ]);
        }
    }

    let mut errors = Table::new("error_norm", &["terms", "h", "tau", "error"]);
    for n in 1..=k {
        let (psi_n, h_n) = if n == k {
            (psi.clone(), h)
        } else {
            let (p, hn, _) = solve(&ex, &grid, n, cfg)?;
            (p, hn)
        };
        for &tau in &tab_times {
            let e = error_norm(
                |s| psi_n.evaluate(s, tau).unwrap_or(f64::NAN),
                |s| reference.density(&ex, s, tau),
                &egrid,
            );
            errors.push(vec![n.into(), h_n.into(), tau.into(), e.into()]);
        }
    }

    let dir: &Path = &cfg.out;
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut written = Vec::new();
    for t in [&density, &moments, &errors] {
        written.push(t.write(dir, &ex.id, &meta, cfg.format)?);
    }
    if let Some(r) = report {
        let mut hr = Table::new("h_report", &["h", "e"]);
        for c in &r.candidates {
            hr.push(vec![c.h.into(), c.e.unwrap_or(f64::NAN).into()]);
        }
        let mut hmeta = meta.clone();
        hmeta.insert("h_star".into(), json!(r.h_star));
        hmeta.insert("e_star".into(), json!(r.e_star));
        hmeta.insert("bracket".into(), json!([r.bracket.0, r.bracket.1]));
        hmeta.insert("refinement".into(), json!(r.refinement));
        hmeta.insert("outside_guaranteed_region".into(), json!(r.outside_guaranteed_region));
        written.push(hr.write(dir, &ex.id, &hmeta, cfg.format)?);
    }
    Ok(written)
}

/// Parses `a,b` into two numbers.
pub fn parse_pair(text: &str) -> Result<(f64, f64), String> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [a, b] => Ok((a.parse().map_err(|e| format!("{a}: {e}"))?, b.parse().map_err(|e| format!("{b}: {e}"))?)),
        _ => Err(format!("expected two comma-separated numbers, got '{text}'")),
    }
}

/// Parses `K,s_max,t_max`.
pub fn parse_residual_grid(text: &str) -> Result<(usize, f64, f64), String> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [k, s, t] => Ok((
            k.parse().map_err(|e| format!("{k}: {e}"))?,
            s.parse().map_err(|e| format!("{s}: {e}"))?,
            t.parse().map_err(|e| format!("{t}: {e}"))?,
        )),
        _ => Err(format!("expected K,s_max,t_max, got '{text}'")),
    }
}

/// Parses `K,s_max`.
pub fn parse_error_grid(text: &str) -> Result<(usize, f64), String> {
    let (k, s) = text
        .split_once(',')
        .ok_or_else(|| format!("expected K,s_max, got '{text}'"))?;
    Ok((
        k.trim().parse().map_err(|e| format!("{k}: {e}"))?,
        s.trim().parse().map_err(|e| format!("{s}: {e}"))?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argument_parsers() {
        assert_eq!(parse_pair("-2,-0.001"), Ok((-2.0, -0.001)));
        assert!(parse_pair("-2").is_err());
        assert_eq!(parse_residual_grid("20,10,1"), Ok((20, 10.0, 1.0)));
        assert!(parse_residual_grid("20,10").is_err());
        assert_eq!(parse_error_grid("1000,10"), Ok((1000, 10.0)));
        assert!(parse_error_grid("x,10").is_err());
    }

    #[test]
    fn time_levels() {
        assert_eq!(table_times(3.0), vec![0.5, 1.0, 1.5, 2.0, 2.5, 3.0]);
        assert_eq!(table_times(1.0), vec![0.5, 1.0]);
        assert_eq!(moment_times(2.0).len(), 21);
        assert!(density_points().contains(&5.0));
    }

    #[test]
    fn hash_ignores_output_directory() {
        let a = RunConfig::default();
        let b = RunConfig {
            out: PathBuf::from("/elsewhere"),
            ..RunConfig::default()
        };
        assert_eq!(a.hash(), b.hash());
        let c = RunConfig {
            terms: Some(2),
            ..RunConfig::default()
        };
        assert_ne!(a.hash(), c.hash());
    }
}
