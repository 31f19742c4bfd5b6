//! Self-consistent radial Thomas-Fermi solver.
//!
//! Solves `gamma * rho^{2/3} = [Z/r - V_rho(r) - mu]_+` on a log-spaced
//! radial grid by damped fixed-point iteration, with an outer bisection on
//! the chemical potential `mu >= 0` that drives the total bound charge to
//! `min(N_target, Z)`. The potential of the radial density is evaluated with
//! the shell kernel `1/max(r, r')` through prefix sums, which is exact for
//! radial densities and linear in the grid size.
//!
//! The moment inequality `(1 - 1/k) * charge inside R <= Z` is exposed as
//! [`moment_check`]; on a converged solution it holds for every admissible
//! `(k, R)`, and letting both grow recovers the bound `total charge <= Z`.

pub mod shooting;

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};

/// Radial grid specification; `build` produces log-spaced points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub r_min: f64,
    pub r_max: f64,
    pub points: usize,
}

impl GridSpec {
    /// Default window `[1e-4, 1e2] * Z^{-1/3}` with 2000 points; the density
    /// varies on the `Z^{-1/3}` length scale.
    pub fn default_for(z: f64) -> Self {
        let scale = z.abs().max(f64::MIN_POSITIVE).powf(-1.0 / 3.0);
        Self {
            r_min: 1e-4 * scale,
            r_max: 1e2 * scale,
            points: 2000,
        }
    }

    pub fn build(&self) -> Result<Vec<f64>> {
        if !self.r_min.is_finite() || !self.r_max.is_finite() || self.r_min <= 0.0 {
            return Err(Error::configuration("grid radii must be finite and positive"));
        }
        if self.r_max <= self.r_min {
            return Err(Error::configuration("grid needs r_max > r_min"));
        }
        if self.points < 8 {
            return Err(Error::configuration("grid needs at least 8 points"));
        }
        let n = self.points;
        let step = (self.r_max / self.r_min).ln() / (n - 1) as f64;
        let mut grid: Vec<f64> = (0..n)
            .map(|i| self.r_min * (step * i as f64).exp())
            .collect();
        grid[0] = self.r_min;
        grid[n - 1] = self.r_max;
        Ok(grid)
    }
}

/// Solver knobs. The damping is exposed because the plain iteration diverges
/// undamped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TfOptions {
    /// Mixing factor of the damped fixed-point update.
    pub mixing: f64,
    /// Iteration cap per chemical-potential probe.
    pub max_iterations: usize,
    /// Sup-norm tolerance on the equation defect.
    pub residual_tol: f64,
    /// Tolerance on the total charge, relative to `Z`.
    pub charge_tol: f64,
    /// Cap on chemical-potential bisection steps.
    pub mu_max_bisections: usize,
}

impl Default for TfOptions {
    fn default() -> Self {
        Self {
            mixing: 0.3,
            max_iterations: 10_000,
            residual_tol: 1e-8,
            charge_tol: 1e-6,
            mu_max_bisections: 200,
        }
    }
}

/// Converged solution of the density equation on a radial grid.
#[derive(Debug, Clone, Serialize)]
pub struct TFSolution {
    #[serde(rename = "Z")]
    pub z: f64,
    pub gamma: f64,
    pub mu: f64,
    #[serde(skip)]
    pub grid: Vec<f64>,
    #[serde(skip)]
    pub rho: Vec<f64>,
    /// `4 pi * integral of rho r^2 dr` by trapezoid quadrature on the grid.
    pub total_charge: f64,
    /// Sup-norm of the equation defect at the last iterate.
    pub residual: f64,
}

/// Trapezoid `dr` weights on a non-uniform grid.
fn trapezoid_weights(grid: &[f64]) -> Vec<f64> {
    let n = grid.len();
    let mut t = vec![0.0; n];
    t[0] = 0.5 * (grid[1] - grid[0]);
    t[n - 1] = 0.5 * (grid[n - 1] - grid[n - 2]);
    for i in 1..n - 1 {
        t[i] = 0.5 * (grid[i + 1] - grid[i - 1]);
    }
    t
}

/// Charge atoms `w_k = 4 pi r_k^2 rho_k t_k` carried by each grid node.
fn charge_atoms(grid: &[f64], quad: &[f64], rho: &[f64], out: &mut [f64]) {
    for (((w, &r), &t), &d) in out.iter_mut().zip(grid).zip(quad).zip(rho) {
        *w = 4.0 * PI * r * r * d * t;
    }
}

/// Shell potential of the charge atoms at every grid node, via prefix sums:
/// `V_i = (sum_{k <= i} w_k)/r_i + sum_{k > i} w_k/r_k`.
fn potential_on_grid(grid: &[f64], atoms: &[f64], out: &mut [f64]) {
    let n = grid.len();
    let mut suffix = 0.0;
    let mut suffixes = vec![0.0; n];
    for i in (0..n).rev() {
        suffixes[i] = suffix;
        suffix += atoms[i] / grid[i];
    }
    let mut prefix = 0.0;
    for i in 0..n {
        prefix += atoms[i];
        out[i] = prefix / grid[i] + suffixes[i];
    }
}

struct FixedMu {
    residual: f64,
    charge: f64,
}

/// Iterations without a new best residual before the damping is halved.
const STAGNATION_PATIENCE: usize = 50;
/// Smallest damping the safeguard will fall to.
const MIXING_FLOOR: f64 = 1e-4;

/// Damped fixed-point iteration at fixed `mu`, in place on `rho`.
///
/// The damping starts at `opts.mixing` and is halved whenever the residual
/// stops improving: the linearized map is only a contraction for small
/// enough damping, and the stable threshold depends on the problem, so a
/// fixed factor either diverges or wastes iterations.
fn solve_fixed_mu(
    z: f64,
    gamma: f64,
    mu: f64,
    grid: &[f64],
    quad: &[f64],
    opts: &TfOptions,
    rho: &mut [f64],
) -> Result<FixedMu> {
    let n = grid.len();
    let inv_gamma = gamma.powf(-1.5);
    let mut atoms = vec![0.0; n];
    let mut potential = vec![0.0; n];
    let mut trace: Vec<f64> = Vec::new();
    let mut mixing = opts.mixing;
    let mut best_residual = f64::INFINITY;
    let mut since_best = 0usize;
    for _ in 0..opts.max_iterations {
        charge_atoms(grid, quad, rho, &mut atoms);
        potential_on_grid(grid, &atoms, &mut potential);
        let mut residual = 0.0_f64;
        for i in 0..n {
            let rhs = (z / grid[i] - potential[i] - mu).max(0.0);
            let lhs = gamma * rho[i].cbrt().powi(2);
            residual = residual.max((lhs - rhs).abs());
        }
        if residual <= opts.residual_tol {
            let charge: f64 = atoms.iter().sum();
            return Ok(FixedMu { residual, charge });
        }
        trace.push(residual);
        if residual < best_residual * (1.0 - 1e-12) {
            best_residual = residual;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= STAGNATION_PATIENCE && mixing > MIXING_FLOOR {
                mixing = (mixing * 0.5).max(MIXING_FLOOR);
                since_best = 0;
            }
        }
        for i in 0..n {
            let rhs = (z / grid[i] - potential[i] - mu).max(0.0);
            let update = inv_gamma * rhs * rhs.sqrt();
            rho[i] = (1.0 - mixing) * rho[i] + mixing * update;
        }
    }
    let tail = trace.len().saturating_sub(32);
    Err(Error::Convergence {
        message: format!(
            "fixed-point iteration at mu = {mu} exceeded {} iterations",
            opts.max_iterations
        ),
        residual_trace: trace[tail..].to_vec(),
    })
}

/// Bare-potential starting density, truncated once its enclosed charge
/// reaches `z` so the first iterations do not over-screen.
fn initial_density(z: f64, gamma: f64, grid: &[f64], quad: &[f64]) -> Vec<f64> {
    let inv_gamma = gamma.powf(-1.5);
    let mut rho = vec![0.0; grid.len()];
    let mut enclosed = 0.0;
    for i in 0..grid.len() {
        if enclosed >= z {
            break;
        }
        let bare = z / grid[i];
        rho[i] = inv_gamma * bare * bare.sqrt();
        enclosed += 4.0 * PI * grid[i] * grid[i] * rho[i] * quad[i];
    }
    rho
}

/// Solves the density equation for central charge `z`, requested particle
/// number `n_target`, and kinetic constant `gamma`.
///
/// The chemical potential starts at zero (maximal binding); when the zero-mu
/// charge exceeds `min(n_target, z)`, an outer bisection on `mu` drives the
/// total charge to that target within `charge_tol * z`.
pub fn solve_tf(
    z: f64,
    n_target: f64,
    gamma: f64,
    spec: &GridSpec,
    opts: &TfOptions,
) -> Result<TFSolution> {
    for (name, v) in [("Z", z), ("N_target", n_target), ("gamma", gamma)] {
        if !v.is_finite() || v <= 0.0 {
            return Err(Error::domain(format!("{name} must be positive, got {v}")));
        }
    }
    if !(opts.mixing > 0.0 && opts.mixing <= 1.0) {
        return Err(Error::configuration("mixing must lie in (0, 1]"));
    }
    let grid = spec.build()?;
    let quad = trapezoid_weights(&grid);
    let target = n_target.min(z);
    let charge_tol = opts.charge_tol * z;

    let mut rho = initial_density(z, gamma, &grid, &quad);
    let neutral = solve_fixed_mu(z, gamma, 0.0, &grid, &quad, opts, &mut rho)?;
    if neutral.charge <= target + charge_tol {
        return Ok(TFSolution {
            z,
            gamma,
            mu: 0.0,
            grid,
            rho,
            total_charge: neutral.charge,
            residual: neutral.residual,
        });
    }

    let (mut lo, mut hi) = (0.0_f64, z / grid[0]);
    for _ in 0..opts.mu_max_bisections {
        let mid = 0.5 * (lo + hi);
        let state = solve_fixed_mu(z, gamma, mid, &grid, &quad, opts, &mut rho)?;
        if (state.charge - target).abs() <= charge_tol {
            return Ok(TFSolution {
                z,
                gamma,
                mu: mid,
                grid,
                rho,
                total_charge: state.charge,
                residual: state.residual,
            });
        }
        if state.charge > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Convergence {
        message: format!(
            "chemical-potential bisection missed the charge target {target} after {} steps",
            opts.mu_max_bisections
        ),
        residual_trace: vec![],
    })
}

impl TFSolution {
    fn atoms(&self) -> Vec<f64> {
        let quad = trapezoid_weights(&self.grid);
        let mut atoms = vec![0.0; self.grid.len()];
        charge_atoms(&self.grid, &quad, &self.rho, &mut atoms);
        atoms
    }

    /// CSV body with header `r,rho,phi_screened`, one row per grid point.
    pub fn to_csv(&self) -> String {
        let atoms = self.atoms();
        let mut potential = vec![0.0; self.grid.len()];
        potential_on_grid(&self.grid, &atoms, &mut potential);
        let mut out = String::from("r,rho,phi_screened\n");
        for i in 0..self.grid.len() {
            let phi = self.z / self.grid[i] - potential[i];
            let _ = writeln!(out, "{},{},{}", self.grid[i], self.rho[i], phi);
        }
        out
    }

    /// JSON sidecar `{Z, gamma, mu, total_charge, residual}`.
    pub fn sidecar_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain floats always serialize")
    }
}

/// Screened potential `Z/r - V_rho(r)` of a solution at any radius `r > 0`.
///
/// Tends to `(Z - total charge)/r` far outside the density and stays at or
/// above `mu` wherever the density is positive, up to the residual.
pub fn screened_potential(sol: &TFSolution, r: f64) -> Result<f64> {
    if !r.is_finite() || r <= 0.0 {
        return Err(Error::domain(format!("radius must be positive, got {r}")));
    }
    let atoms = sol.atoms();
    let mut v = 0.0;
    for (&rk, &w) in sol.grid.iter().zip(&atoms) {
        v += w / r.max(rk);
    }
    Ok(sol.z / r - v)
}

/// Result of the moment inequality at one `(k, R)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MomentCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

/// Moment inequality `(1 - 1/k) * charge inside R <= Z` on a converged
/// solution. `k` must exceed one and `R` must lie within the grid span.
pub fn moment_check(sol: &TFSolution, k: f64, r_cut: f64) -> Result<MomentCheck> {
    if !k.is_finite() || k <= 1.0 {
        return Err(Error::domain(format!("moment exponent must exceed 1, got {k}")));
    }
    let (lo, hi) = (sol.grid[0], sol.grid[sol.grid.len() - 1]);
    if !r_cut.is_finite() || r_cut < lo || r_cut > hi {
        return Err(Error::domain(format!(
            "cutoff radius {r_cut} outside the grid span [{lo}, {hi}]"
        )));
    }
    // Trapezoid integral of 4 pi rho r^2 up to r_cut, with a linearly
    // interpolated partial cell at the cutoff.
    let f = |i: usize| 4.0 * PI * sol.grid[i] * sol.grid[i] * sol.rho[i];
    let mut integral = 0.0;
    for i in 0..sol.grid.len() - 1 {
        if sol.grid[i + 1] <= r_cut {
            integral += 0.5 * (f(i) + f(i + 1)) * (sol.grid[i + 1] - sol.grid[i]);
        } else {
            let span = sol.grid[i + 1] - sol.grid[i];
            let frac = (r_cut - sol.grid[i]) / span;
            let f_cut = f(i) + frac * (f(i + 1) - f(i));
            integral += 0.5 * (f(i) + f_cut) * (r_cut - sol.grid[i]);
            break;
        }
    }
    let lhs = (1.0 - 1.0 / k) * integral;
    let rhs = sol.z;
    Ok(MomentCheck {
        lhs,
        rhs,
        ok: lhs <= rhs + 1e-6 * sol.z,
    })
}
