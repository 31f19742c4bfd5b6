//! Projected-gradient ratio descent for the radial measure ratio over the
//! probability simplex.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::functionals::radial_kernel;
use crate::geometry::RadialMeasure;
use crate::rng::subrng;

use super::{OptimizationResult, SearchOptions, ARMIJO};

/// Euclidean projection onto the probability simplex
/// `{ w : w_k >= 0, sum w_k = 1 }` (sort-and-threshold).
pub fn project_to_simplex(w: &mut [f64]) {
    let mut sorted = w.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut prefix = 0.0;
    let mut theta = 0.0;
    for (i, &u) in sorted.iter().enumerate() {
        prefix += u;
        let t = (prefix - 1.0) / (i as f64 + 1.0);
        if u - t > 0.0 {
            theta = t;
        }
    }
    for x in w.iter_mut() {
        *x = (*x - theta).max(0.0);
    }
}

/// Minimizes the radial measure ratio over weights on the probability
/// simplex, the radial grid staying fixed (the ratio is invariant under a
/// common rescaling of the grid, so optimizing weights loses nothing).
/// Accepted steps only ever decrease the value, so the best-value trace is
/// monotone non-increasing within each restart.
pub fn minimize_measure_ratio(
    radii_grid: &[f64],
    opts: &SearchOptions,
) -> Result<OptimizationResult<RadialMeasure>> {
    opts.validate()?;
    validate_grid(radii_grid)?;
    let k = radii_grid.len();

    if k == 1 {
        let measure = RadialMeasure::new(radii_grid.to_vec(), vec![1.0])?;
        let value = crate::functionals::measure_ratio(&measure)?;
        return Ok(OptimizationResult {
            best_value: value,
            best_config: measure,
            restarts: 1,
            evaluations: 1,
            converged: true,
            seed: opts.seed,
            per_restart_values: vec![value],
        });
    }

    // Dense kernel matrix; K is a few hundred on the default grids.
    let kernel: Vec<f64> = (0..k * k)
        .map(|idx| radial_kernel(radii_grid[idx / k], radii_grid[idx % k]))
        .collect();

    let outcomes: Vec<(f64, Vec<f64>, u64, bool)> = (0..opts.restarts)
        .into_par_iter()
        .map(|i| {
            let mut w = initial_weights(k, i as u64, opts.seed);
            let (value, evals, converged) = ratio_descent(&kernel, radii_grid, &mut w, opts);
            (value, w, evals, converged)
        })
        .collect();

    let mut best = 0;
    for (i, o) in outcomes.iter().enumerate().skip(1) {
        if o.0 < outcomes[best].0 {
            best = i;
        }
    }
    let (value, mut weights, _, converged) = outcomes[best].clone();
    // The projection keeps the mass at one up to rounding; renormalize the
    // last bits so the measure constructor's tolerance is met exactly.
    let mass: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= mass;
    }
    let measure = RadialMeasure::new(radii_grid.to_vec(), weights)?;
    Ok(OptimizationResult {
        best_value: value,
        best_config: measure,
        restarts: outcomes.len(),
        evaluations: outcomes.iter().map(|o| o.2).sum(),
        converged,
        seed: opts.seed,
        per_restart_values: outcomes.iter().map(|o| o.0).collect(),
    })
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::configuration("radial grid must be non-empty"));
    }
    let mut prev = 0.0;
    for &r in grid {
        if !r.is_finite() || r <= prev {
            return Err(Error::configuration(
                "radial grid must be finite, positive and strictly increasing",
            ));
        }
        prev = r;
    }
    Ok(())
}

/// Restart 0 starts from uniform weights; later restarts draw a flat
/// Dirichlet sample from the restart's private stream.
fn initial_weights(k: usize, restart: u64, seed: u64) -> Vec<f64> {
    if restart == 0 {
        return vec![1.0 / k as f64; k];
    }
    let mut rng = subrng(seed, restart);
    let mut w: Vec<f64> = (0..k)
        .map(|_| -rng.random_range(f64::MIN_POSITIVE..1.0_f64).ln())
        .collect();
    let total: f64 = w.iter().sum();
    for x in &mut w {
        *x /= total;
    }
    w
}

fn ratio_value(kernel: &[f64], radii: &[f64], w: &[f64], kw: &mut [f64]) -> (f64, f64) {
    let k = w.len();
    for (row, out) in kw.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (col, &wc) in w.iter().enumerate() {
            acc += kernel[row * k + col] * wc;
        }
        *out = acc;
    }
    let num: f64 = w.iter().zip(kw.iter()).map(|(a, b)| a * b).sum();
    let den: f64 = w.iter().zip(radii).map(|(a, r)| a * r).sum();
    (num, den)
}

fn ratio_descent(
    kernel: &[f64],
    radii: &[f64],
    w: &mut Vec<f64>,
    opts: &SearchOptions,
) -> (f64, u64, bool) {
    let k = w.len();
    let mut kw = vec![0.0; k];
    let mut scratch = vec![0.0; k];
    let mut evals = 0u64;
    project_to_simplex(w);
    let (_, mut den) = ratio_value(kernel, radii, w, &mut kw);
    evals += 1;
    let mut value = {
        let num: f64 = w.iter().zip(kw.iter()).map(|(a, b)| a * b).sum();
        num / den
    };
    let mut eta = 1.0;
    let mut small_drops = 0u32;
    let mut converged = false;
    for _ in 0..opts.max_iterations {
        // Gradient of (w'Kw)/(c'w): (2Kw - R c) / (c'w).
        let grad: Vec<f64> = kw
            .iter()
            .zip(radii)
            .map(|(kwi, r)| (2.0 * kwi - value * r) / den)
            .collect();
        let mut accepted = false;
        let mut step = eta;
        while step >= 1e-18 {
            let mut cand: Vec<f64> = w.iter().zip(&grad).map(|(x, g)| x - step * g).collect();
            project_to_simplex(&mut cand);
            let moved2: f64 = cand
                .iter()
                .zip(w.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            if moved2 == 0.0 {
                break;
            }
            let (num_c, den_c) = ratio_value(kernel, radii, &cand, &mut scratch);
            evals += 1;
            let v = num_c / den_c;
            if v < value - ARMIJO / step * moved2 {
                let drop = value - v;
                *w = cand;
                std::mem::swap(&mut kw, &mut scratch);
                den = den_c;
                value = v;
                accepted = true;
                eta = (step * 2.0).min(1e6);
                if drop <= opts.tol * value.abs().max(1.0) {
                    small_drops += 1;
                    if small_drops >= 5 {
                        converged = true;
                    }
                } else {
                    small_drops = 0;
                }
                break;
            }
            step *= 0.5;
        }
        if converged || !accepted {
            converged = converged || !accepted;
            break;
        }
    }
    (value, evals, converged)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_on_simplex(w: &[f64]) {
        assert!(w.iter().all(|&x| x >= 0.0));
        let sum: f64 = w.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12, "sum = {sum}");
    }

    #[test]
    fn projection_basic_cases() {
        let mut w = vec![0.25, 0.25, 0.25, 0.25];
        project_to_simplex(&mut w);
        assert_on_simplex(&w);
        assert!((w[0] - 0.25).abs() < 1e-15);

        let mut w = vec![10.0, 0.0];
        project_to_simplex(&mut w);
        assert_on_simplex(&w);
        assert!((w[0] - 1.0).abs() < 1e-15);

        let mut w = vec![-3.0, -1.0, 0.5];
        project_to_simplex(&mut w);
        assert_on_simplex(&w);
        assert_eq!(w[0], 0.0);
        assert_eq!(w[1], 0.0);
    }

    #[test]
    fn projection_is_idempotent() {
        let mut rng = subrng(11, 0);
        for _ in 0..50 {
            let mut w: Vec<f64> = (0..8).map(|_| rng.random_range(-2.0..2.0)).collect();
            project_to_simplex(&mut w);
            assert_on_simplex(&w);
            let once = w.clone();
            project_to_simplex(&mut w);
            for (a, b) in once.iter().zip(&w) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
