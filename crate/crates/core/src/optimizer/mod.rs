//! Global minimization engines.
//!
//! [`minimize_config`] runs a seeded multi-start search over point
//! configurations: one deterministic symmetric start plus random starts drawn
//! from a ball, each followed by projected gradient descent with backtracking
//! line search in the gauge where the radius sum equals the point count.
//! Minimax objectives are smoothed by a log-sum-exp surrogate whose
//! temperature is driven to a floor, then polished against the exact maximum
//! by per-point coordinate descent. A soft barrier keeps iterates away from
//! collisions and is removed for every reported value, so reported values are
//! always the exact functional at the reported configuration.
//!
//! [`minimize_measure_ratio`] minimizes the radial measure ratio over the
//! probability simplex by projected-gradient ratio descent on a fixed grid.
//!
//! Restarts are independent, own private RNG streams derived from
//! `(seed, restart index)`, and may run concurrently; aggregation is ordered
//! by restart index, so results do not depend on scheduling.

mod objective;
mod simplex;

pub use simplex::{minimize_measure_ratio, project_to_simplex};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::functionals::FunctionalKind;
use crate::geometry::{normalize_scale, PointConfiguration};
use crate::rng::subrng;

use objective::Objective;

/// Armijo sufficient-decrease constant for all line searches.
pub(crate) const ARMIJO: f64 = 1e-4;
/// Passes of exact-max coordinate polish after the smoothing schedule.
const POLISH_PASSES: usize = 120;
/// Relative spread of restart values beyond which the annealing fallback
/// runs; flags multimodality while keeping the default runtime low.
const ANNEAL_SPREAD_TRIGGER: f64 = 1e-3;
/// RNG stream reserved for the annealing fallback.
const ANNEAL_STREAM: u64 = u64::MAX;

/// Log-sum-exp temperature schedule for minimax objectives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemperatureSchedule {
    pub initial: f64,
    pub decay: f64,
    pub floor: f64,
}

/// Backtracking line-search schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSchedule {
    pub initial: f64,
    pub backtrack: f64,
    pub min_step: f64,
}

/// Metropolis annealing fallback parameters; `iterations = 0` disables it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnealingSchedule {
    pub initial_temp: f64,
    pub cooling: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    pub restarts: usize,
    /// Iteration cap per restart and per smoothing stage.
    pub max_iterations: usize,
    pub softmax: TemperatureSchedule,
    pub step: StepSchedule,
    pub annealing: AnnealingSchedule,
    pub seed: u64,
    /// Convergence tolerance on the objective value.
    pub tol: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            restarts: 8,
            max_iterations: 2000,
            softmax: TemperatureSchedule {
                initial: 1.0,
                decay: 0.5,
                floor: 1e-4,
            },
            step: StepSchedule {
                initial: 0.25,
                backtrack: 0.5,
                min_step: 1e-14,
            },
            annealing: AnnealingSchedule {
                initial_temp: 0.5,
                cooling: 0.995,
                iterations: 4000,
            },
            seed: 0,
            tol: 1e-9,
        }
    }
}

impl SearchOptions {
    pub fn seeded(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("restarts", self.restarts as f64),
            ("max_iterations", self.max_iterations as f64),
            ("softmax.initial", self.softmax.initial),
            ("softmax.floor", self.softmax.floor),
            ("step.initial", self.step.initial),
            ("step.min_step", self.step.min_step),
            ("annealing.initial_temp", self.annealing.initial_temp),
            ("tol", self.tol),
        ];
        for (name, v) in positive {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::configuration(format!("{name} must be positive")));
            }
        }
        for (name, v) in [
            ("softmax.decay", self.softmax.decay),
            ("step.backtrack", self.step.backtrack),
            ("annealing.cooling", self.annealing.cooling),
        ] {
            if !(0.0..1.0).contains(&v) || v == 0.0 {
                return Err(Error::configuration(format!(
                    "{name} must lie strictly inside (0, 1)"
                )));
            }
        }
        Ok(())
    }
}

/// Search domain for point configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    FullSpace,
    /// One-dimensional configurations restricted to a single ray.
    HalfLine,
}

/// Outcome of a multi-start minimization.
#[derive(Debug, Clone)]
pub struct OptimizationResult<C> {
    /// Exact objective at `best_config`; equals the minimum of
    /// `per_restart_values`.
    pub best_value: f64,
    pub best_config: C,
    /// Number of entries in `per_restart_values` (the annealing fallback adds
    /// one when it runs).
    pub restarts: usize,
    /// Objective evaluations across all restarts, line searches included.
    pub evaluations: u64,
    pub converged: bool,
    pub seed: u64,
    pub per_restart_values: Vec<f64>,
}

struct RestartOutcome {
    value: f64,
    coords: Vec<f64>,
    evals: u64,
    converged: bool,
}

/// Minimizes a configuration functional over `n` points in `R^dim`.
pub fn minimize_config(
    kind: FunctionalKind,
    n: usize,
    dim: usize,
    opts: &SearchOptions,
) -> Result<OptimizationResult<PointConfiguration>> {
    minimize_config_on(kind, n, dim, Domain::FullSpace, opts)
}

/// [`minimize_config`] restricted to a domain (half-line searches need
/// `dim = 1`).
pub fn minimize_config_on(
    kind: FunctionalKind,
    n: usize,
    dim: usize,
    domain: Domain,
    opts: &SearchOptions,
) -> Result<OptimizationResult<PointConfiguration>> {
    opts.validate()?;
    kind.validate()?;
    if matches!(kind, FunctionalKind::MeasureRatio) {
        return Err(Error::configuration(
            "measure-ratio is minimized over measures; use minimize_measure_ratio",
        ));
    }
    if !(1..=3).contains(&dim) {
        return Err(Error::configuration(format!(
            "dimension must be 1, 2 or 3, got {dim}"
        )));
    }
    if n < 2 {
        return Err(Error::configuration(format!(
            "configuration search needs at least 2 points, got {n}"
        )));
    }
    if domain == Domain::HalfLine && dim != 1 {
        return Err(Error::configuration(
            "the half-line domain is only meaningful in dimension 1",
        ));
    }

    let obj = Objective {
        kind,
        dim,
        n,
        domain,
    };

    let mut outcomes: Vec<RestartOutcome> = (0..opts.restarts)
        .into_par_iter()
        .map(|i| run_restart(&obj, i as u64, opts))
        .collect();

    // Annealing fallback: a large spread across restarts flags
    // multimodality, so spend one extra seeded Metropolis run from the
    // incumbent before trusting the aggregate.
    if opts.annealing.iterations > 0 && spread_exceeds(&outcomes, ANNEAL_SPREAD_TRIGGER) {
        let best = best_index(&outcomes);
        let start = outcomes[best].coords.clone();
        let mut rng = subrng(opts.seed, ANNEAL_STREAM);
        outcomes.push(anneal_restart(&obj, start, opts, &mut rng));
    }

    let best = best_index(&outcomes);
    if !outcomes[best].value.is_finite() {
        return Err(Error::Convergence {
            message: "no restart produced a finite objective value".to_string(),
            residual_trace: outcomes.iter().map(|o| o.value).collect(),
        });
    }

    let config = normalize_scale(&PointConfiguration::new(dim, outcomes[best].coords.clone())?)?;
    Ok(OptimizationResult {
        best_value: outcomes[best].value,
        best_config: config,
        restarts: outcomes.len(),
        evaluations: outcomes.iter().map(|o| o.evals).sum(),
        converged: outcomes[best].converged,
        seed: opts.seed,
        per_restart_values: outcomes.iter().map(|o| o.value).collect(),
    })
}

fn best_index(outcomes: &[RestartOutcome]) -> usize {
    let mut best = 0;
    for (i, o) in outcomes.iter().enumerate().skip(1) {
        if o.value < outcomes[best].value {
            best = i;
        }
    }
    best
}

fn spread_exceeds(outcomes: &[RestartOutcome], rel: f64) -> bool {
    let finite: Vec<f64> = outcomes
        .iter()
        .map(|o| o.value)
        .filter(|v| v.is_finite())
        .collect();
    if finite.len() < 2 {
        return false;
    }
    let lo = finite.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = finite.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (hi - lo) > rel * lo.abs().max(1.0)
}

fn run_restart(obj: &Objective, index: u64, opts: &SearchOptions) -> RestartOutcome {
    let mut rng = subrng(opts.seed, index);
    let mut evals = 0u64;
    let mut coords = if index == 0 {
        deterministic_init(obj.n, obj.dim, obj.domain)
    } else if index == 1 && matches!(obj.kind, FunctionalKind::LsstValue { .. }) {
        // The screened-margin surface has a wide spurious basin around
        // equal-radius shells; the radially spread minimizers of the minimax
        // functional sit where its negative region lives, so one restart
        // starts there.
        warm_start_from_minimax(obj, opts).unwrap_or_else(|| random_init(obj, &mut rng))
    } else {
        random_init(obj, &mut rng)
    };
    obj.project(&mut coords);
    let warm = index == 1 && matches!(obj.kind, FunctionalKind::LsstValue { .. });
    let converged = if warm {
        // Refinement only: the exploratory high-temperature stages would walk
        // the informed start back out of its basin.
        local_refine(obj, &mut coords, opts, &mut evals)
    } else {
        local_minimize(obj, &mut coords, opts, &mut evals)
    };
    finish_restart(obj, coords, evals, converged)
}

fn warm_start_from_minimax(obj: &Objective, opts: &SearchOptions) -> Option<Vec<f64>> {
    // Same options as the caller: a screened-margin search and a minimax
    // search run with equal options then share one incumbent, which keeps the
    // bisection on the retention parameter coherent with the reported
    // minimax infimum.
    minimize_config_on(FunctionalKind::QMinimax, obj.n, obj.dim, obj.domain, opts)
        .ok()
        .map(|res| res.best_config.coords().to_vec())
}

fn finish_restart(
    obj: &Objective,
    coords: Vec<f64>,
    evals: u64,
    converged: bool,
) -> RestartOutcome {
    match obj.exact(&coords) {
        Ok(value) => RestartOutcome {
            value,
            coords,
            evals,
            converged,
        },
        Err(_) => RestartOutcome {
            value: f64::INFINITY,
            coords,
            evals,
            converged: false,
        },
    }
}

/// Symmetric deterministic start: antipodal pair, centered lattice on the
/// line, regular polygon in the plane, spiral points on the sphere.
fn deterministic_init(n: usize, dim: usize, domain: Domain) -> Vec<f64> {
    if domain == Domain::HalfLine {
        return (1..=n).map(|i| i as f64).collect();
    }
    match dim {
        1 => {
            if n == 2 {
                vec![-1.0, 1.0]
            } else {
                // Unit lattice, offset so no point lands on the center.
                let shift = if n % 2 == 1 { 0.25 } else { 0.0 };
                (0..n)
                    .map(|i| i as f64 - (n as f64 - 1.0) / 2.0 + shift)
                    .collect()
            }
        }
        2 => {
            let mut coords = Vec::with_capacity(2 * n);
            for i in 0..n {
                let theta = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                coords.push(theta.cos());
                coords.push(theta.sin());
            }
            coords
        }
        _ => {
            if n == 2 {
                return vec![0.0, 0.0, 1.0, 0.0, 0.0, -1.0];
            }
            // Golden-angle spiral on the unit sphere.
            let golden = std::f64::consts::PI * (3.0 - 5.0_f64.sqrt());
            let mut coords = Vec::with_capacity(3 * n);
            for i in 0..n {
                let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
                let rho = (1.0 - z * z).max(0.0).sqrt();
                let theta = golden * i as f64;
                coords.push(rho * theta.cos());
                coords.push(rho * theta.sin());
                coords.push(z);
            }
            coords
        }
    }
}

/// Random start: points i.i.d. uniform in a ball of radius 2 (uniform on
/// (0, 2] for the half-line), re-drawn if the sample lands in the guard
/// region.
fn random_init(obj: &Objective, rng: &mut ChaCha8Rng) -> Vec<f64> {
    for _ in 0..64 {
        let mut coords = Vec::with_capacity(obj.n * obj.dim);
        if obj.domain == Domain::HalfLine {
            for _ in 0..obj.n {
                coords.push(2.0 * rng.random_range(1e-6..=1.0));
            }
        } else {
            for _ in 0..obj.n {
                let mut v: Vec<f64> = (0..obj.dim).map(|_| rng.sample(StandardNormal)).collect();
                let len = v.iter().map(|c| c * c).sum::<f64>().sqrt();
                if len == 0.0 {
                    v[0] = 1.0;
                }
                let radius = 2.0 * rng.random_range(0.0..1.0_f64).powf(1.0 / obj.dim as f64);
                let scale = radius / v.iter().map(|c| c * c).sum::<f64>().sqrt();
                coords.extend(v.iter().map(|c| c * scale));
            }
        }
        obj.project(&mut coords);
        if obj.value(&coords, 1.0).is_some() {
            return coords;
        }
    }
    // Guard region hit 64 times in a row: fall back to the symmetric start.
    deterministic_init(obj.n, obj.dim, obj.domain)
}

/// Smoothing schedule followed by exact-max polish for minimax kinds; plain
/// descent otherwise. Returns the convergence flag of the final stage.
fn local_minimize(
    obj: &Objective,
    coords: &mut Vec<f64>,
    opts: &SearchOptions,
    evals: &mut u64,
) -> bool {
    local_minimize_from(obj, coords, opts, evals, opts.softmax.initial)
}

/// [`local_minimize`] for an informed start: skips the exploratory
/// high-temperature stages and refines at the temperature floor.
fn local_refine(
    obj: &Objective,
    coords: &mut Vec<f64>,
    opts: &SearchOptions,
    evals: &mut u64,
) -> bool {
    local_minimize_from(obj, coords, opts, evals, opts.softmax.floor)
}

fn local_minimize_from(
    obj: &Objective,
    coords: &mut Vec<f64>,
    opts: &SearchOptions,
    evals: &mut u64,
    tau_start: f64,
) -> bool {
    let mut converged;
    if obj.kind.is_minimax() {
        let mut tau = tau_start;
        loop {
            gd_stage(obj, coords, tau, opts, evals);
            if tau <= opts.softmax.floor {
                break;
            }
            tau = (tau * opts.softmax.decay).max(opts.softmax.floor);
        }
        converged = polish(obj, coords, opts, evals);
    } else {
        converged = gd_stage(obj, coords, opts.softmax.floor, opts, evals);
        // A second pass from a fresh step size cheaply escapes stale
        // line-search states.
        converged = gd_stage(obj, coords, opts.softmax.floor, opts, evals) || converged;
    }
    converged
}

/// Projected gradient descent with backtracking at a fixed temperature.
/// Returns true when the value settles to tolerance.
fn gd_stage(
    obj: &Objective,
    coords: &mut Vec<f64>,
    tau: f64,
    opts: &SearchOptions,
    evals: &mut u64,
) -> bool {
    *evals += 1;
    let Some(mut current) = obj.value(coords, tau) else {
        return false;
    };
    let mut step_start = opts.step.initial;
    let mut small_drops = 0u32;
    for _ in 0..opts.max_iterations {
        let Some((_, grad)) = obj.value_grad(coords, tau) else {
            return false;
        };
        let gnorm2: f64 = grad.iter().map(|g| g * g).sum();
        if gnorm2 <= 1e-30 {
            return true;
        }
        let mut step = step_start;
        let mut accepted = false;
        while step >= opts.step.min_step {
            let mut cand: Vec<f64> = coords
                .iter()
                .zip(&grad)
                .map(|(x, g)| x - step * g)
                .collect();
            obj.project(&mut cand);
            *evals += 1;
            if let Some(v) = obj.value(&cand, tau) {
                let moved2: f64 = cand
                    .iter()
                    .zip(coords.iter())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                if v <= current - ARMIJO / step.max(1e-300) * moved2 && v < current {
                    let drop = current - v;
                    *coords = cand;
                    current = v;
                    accepted = true;
                    step_start = (step * 2.0).min(opts.step.initial);
                    if drop <= opts.tol * current.abs().max(1.0) {
                        small_drops += 1;
                        if small_drops >= 3 {
                            return true;
                        }
                    } else {
                        small_drops = 0;
                    }
                    break;
                }
            }
            step *= opts.step.backtrack;
        }
        if !accepted {
            // No admissible step at line-search resolution: stationary.
            return true;
        }
    }
    false
}

/// Exact-max polish: cycles over points, stepping each along the negative
/// gradient of the active branch with a line search on the exact objective.
fn polish(obj: &Objective, coords: &mut Vec<f64>, opts: &SearchOptions, evals: &mut u64) -> bool {
    *evals += 1;
    let Some((mut current, mut branch)) = obj.exact_with_barrier(coords) else {
        return false;
    };
    for _ in 0..POLISH_PASSES {
        let mut improved = false;
        for m in 0..obj.n {
            let g = obj.point_grad(coords, m, branch);
            let gnorm2: f64 = g.iter().map(|c| c * c).sum();
            if gnorm2 <= 1e-30 {
                continue;
            }
            let mut step = opts.step.initial;
            while step >= opts.step.min_step {
                let mut cand = coords.clone();
                for (k, gk) in g.iter().enumerate() {
                    cand[m * obj.dim + k] -= step * gk;
                }
                obj.project(&mut cand);
                *evals += 1;
                if let Some((v, b)) = obj.exact_with_barrier(&cand) {
                    if v < current - ARMIJO * step * gnorm2 {
                        *coords = cand;
                        current = v;
                        branch = b;
                        improved = true;
                        break;
                    }
                }
                step *= opts.step.backtrack;
            }
        }
        if !improved {
            return true;
        }
    }
    true
}

/// Metropolis annealing from a starting configuration, followed by a local
/// descent from the best visited state.
fn anneal_restart(
    obj: &Objective,
    start: Vec<f64>,
    opts: &SearchOptions,
    rng: &mut ChaCha8Rng,
) -> RestartOutcome {
    let mut evals = 0u64;
    let mut x = start;
    obj.project(&mut x);
    evals += 1;
    let Some((mut current, _)) = obj.exact_with_barrier(&x) else {
        return finish_restart(obj, x, evals, false);
    };
    let mut best = x.clone();
    let mut best_value = current;
    let mut temp = opts.annealing.initial_temp;
    for _ in 0..opts.annealing.iterations {
        let m = rng.random_range(0..obj.n);
        let sigma = 0.05 + 0.45 * temp.min(1.0);
        let mut cand = x.clone();
        for k in 0..obj.dim {
            let noise: f64 = rng.sample(StandardNormal);
            cand[m * obj.dim + k] += sigma * noise;
        }
        obj.project(&mut cand);
        evals += 1;
        if let Some((v, _)) = obj.exact_with_barrier(&cand) {
            let accept = v <= current || rng.random_range(0.0..1.0) < ((current - v) / temp).exp();
            if accept {
                x = cand;
                current = v;
                if v < best_value {
                    best = x.clone();
                    best_value = v;
                }
            }
        }
        temp = (temp * opts.annealing.cooling).max(1e-8);
    }
    let converged = local_minimize(obj, &mut best, opts, &mut evals);
    finish_restart(obj, best, evals, converged)
}

/// `nu(n, d) = n - inf Q` over `n`-point configurations in dimension `d`
/// (the half-line convention restricts dimension 1 to a single ray).
///
/// The screened bound with constant `C` holds for every configuration at
/// this `(n, d)` exactly when `C >= nu(n, d)`. The search yields an upper
/// bound on `inf Q`, hence a lower bound on `nu`; more restarts can only
/// lower the infimum estimate and so raise the reported value.
pub fn nu_constant(n: usize, dim: usize, half_line: bool, opts: &SearchOptions) -> Result<f64> {
    let domain = if half_line {
        Domain::HalfLine
    } else {
        Domain::FullSpace
    };
    let result = minimize_config_on(FunctionalKind::QMinimax, n, dim, domain, opts)?;
    Ok(n as f64 - result.best_value)
}

/// Width of the bisection interval returned by [`bisect_epsilon`].
pub const EPSILON_INTERVAL: f64 = 1e-3;

/// Smallest retention parameter for which the minimized screened repulsion
/// margin is non-negative at this `(n, d)`, located by bisection with an
/// inner global minimization per probe. Algebraically this equals
/// `nu(n, d) / n`.
pub fn bisect_epsilon(n: usize, dim: usize, opts: &SearchOptions) -> Result<f64> {
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while hi - lo > EPSILON_INTERVAL {
        let mid = 0.5 * (lo + hi);
        let result = minimize_config(FunctionalKind::LsstValue { epsilon: mid }, n, dim, opts)?;
        if result.best_value >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn options_validation() {
        assert!(SearchOptions::default().validate().is_ok());
        let mut bad = SearchOptions::default();
        bad.softmax.decay = 1.0;
        assert!(bad.validate().is_err());
        let mut bad = SearchOptions::default();
        bad.restarts = 0;
        assert!(bad.validate().is_err());
        let mut bad = SearchOptions::default();
        bad.tol = -1.0;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn rejects_bad_problems() {
        let opts = SearchOptions::seeded(1);
        assert!(minimize_config(FunctionalKind::QMinimax, 1, 3, &opts).is_err());
        assert!(minimize_config(FunctionalKind::QMinimax, 4, 4, &opts).is_err());
        assert!(minimize_config(FunctionalKind::MeasureRatio, 4, 3, &opts).is_err());
        assert!(
            minimize_config_on(FunctionalKind::QMinimax, 4, 3, Domain::HalfLine, &opts).is_err()
        );
    }

    #[test]
    fn deterministic_inits_avoid_the_center() {
        for n in 2..=9 {
            for dim in 1..=3 {
                let coords = deterministic_init(n, dim, Domain::FullSpace);
                assert_eq!(coords.len(), n * dim);
                for p in coords.chunks_exact(dim) {
                    assert!(crate::geometry::norm(p) > 1e-3, "n={n} dim={dim}");
                }
            }
        }
    }
}
