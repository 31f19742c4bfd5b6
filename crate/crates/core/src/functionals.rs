//! Evaluators for the classical Coulomb configuration functionals and the
//! inequalities they satisfy.
//!
//! All configuration functionals divide by inter-particle distances (and some
//! by distances to the center), so they reject inputs whose separations fall
//! below [`MIN_SEPARATION`](crate::geometry::MIN_SEPARATION) relative to the
//! mean particle radius, measured after the scale gauge. Ties in any
//! `max over particles` are broken by the lowest index so results are
//! deterministic across platforms.

use crate::error::{Error, Result};
use crate::geometry::{dist, norm, PointConfiguration, RadialMeasure, MIN_SEPARATION};

/// Which configuration functional a search or a table row refers to,
/// together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FunctionalKind {
    /// Farthest-particle excess at central charge `z`.
    SigalExcess { z: f64 },
    /// Screened repulsion margin at retention fraction `1 - epsilon`.
    LsstValue { epsilon: f64 },
    /// Scale-invariant minimax of radius times total repulsion.
    QMinimax,
    /// Second-moment Coulomb ratio over point configurations.
    BetaRatio,
    /// Second-moment Coulomb ratio over radial probability measures.
    MeasureRatio,
}

impl FunctionalKind {
    pub fn name(&self) -> &'static str {
        match self {
            FunctionalKind::SigalExcess { .. } => "sigal-excess",
            FunctionalKind::LsstValue { .. } => "lsst-value",
            FunctionalKind::QMinimax => "q-minimax",
            FunctionalKind::BetaRatio => "beta-ratio",
            FunctionalKind::MeasureRatio => "measure-ratio",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            FunctionalKind::SigalExcess { z } => {
                if !z.is_finite() || z <= 0.0 {
                    return Err(Error::domain(format!("central charge must be > 0, got {z}")));
                }
            }
            FunctionalKind::LsstValue { epsilon } => {
                if !epsilon.is_finite() || epsilon <= 0.0 || epsilon >= 1.0 {
                    return Err(Error::domain(format!(
                        "epsilon must lie strictly inside (0, 1), got {epsilon}"
                    )));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// True for functionals defined as a maximum over particles; these get
    /// log-sum-exp smoothing inside the optimizer.
    pub fn is_minimax(&self) -> bool {
        matches!(
            self,
            FunctionalKind::LsstValue { .. } | FunctionalKind::QMinimax
        )
    }

    /// Evaluates the functional on a point configuration.
    pub fn evaluate(&self, config: &PointConfiguration) -> Result<f64> {
        self.validate()?;
        match *self {
            FunctionalKind::SigalExcess { z } => sigal_excess(config, z),
            FunctionalKind::LsstValue { epsilon } => lsst_value(config, epsilon),
            FunctionalKind::QMinimax => q_minimax(config),
            FunctionalKind::BetaRatio => beta_ratio(config),
            FunctionalKind::MeasureRatio => Err(Error::configuration(
                "measure-ratio is a functional of radial measures, not point configurations",
            )),
        }
    }
}

/// Precomputed per-configuration data shared by the evaluators.
pub(crate) struct Checked {
    pub norms: Vec<f64>,
}

/// Validates separation guards on a flat coordinate buffer.
///
/// `origin_guard` additionally rejects points closer to the center than the
/// separation floor (for functionals that divide by `|x_j|`).
pub(crate) fn check_config(dim: usize, coords: &[f64], origin_guard: bool) -> Result<Checked> {
    let n = coords.len() / dim;
    let norms: Vec<f64> = coords.chunks_exact(dim).map(norm).collect();
    let total: f64 = norms.iter().sum();
    if total <= 0.0 {
        return Err(Error::degenerate("every point sits at the origin"));
    }
    let scale = total / n as f64;
    let min_sep = MIN_SEPARATION * scale;
    if origin_guard {
        if let Some(j) = norms.iter().position(|&r| r < min_sep) {
            return Err(Error::degenerate(format!(
                "point {j} sits at the origin (|x| = {} < {min_sep:e})",
                norms[j]
            )));
        }
    }
    for i in 0..n {
        let pi = &coords[i * dim..(i + 1) * dim];
        for j in (i + 1)..n {
            let d = dist(pi, &coords[j * dim..(j + 1) * dim]);
            if d < min_sep {
                return Err(Error::degenerate(format!(
                    "points {i} and {j} coincide (distance {d:e} < {min_sep:e})"
                )));
            }
        }
    }
    Ok(Checked { norms })
}

fn require_points(dim: usize, coords: &[f64], min: usize, what: &str) -> Result<usize> {
    let n = coords.len() / dim;
    if n < min {
        return Err(Error::domain(format!(
            "{what} needs at least {min} points, got {n}"
        )));
    }
    Ok(n)
}

/// For each particle, the total Coulomb repulsion it feels:
/// `g_j = sum_{i != j} 1/|x_i - x_j|`.
fn total_repulsion(dim: usize, coords: &[f64]) -> Vec<f64> {
    let n = coords.len() / dim;
    let mut g = vec![0.0; n];
    for i in 0..n {
        let pi = &coords[i * dim..(i + 1) * dim];
        for j in (i + 1)..n {
            let inv = 1.0 / dist(pi, &coords[j * dim..(j + 1) * dim]);
            g[i] += inv;
            g[j] += inv;
        }
    }
    g
}

/// Index of the particle farthest from the center, ties broken by the lowest
/// index.
pub(crate) fn farthest_index(norms: &[f64]) -> usize {
    let mut best = 0;
    for (i, &r) in norms.iter().enumerate().skip(1) {
        if r > norms[best] {
            best = i;
        }
    }
    best
}

pub(crate) fn sigal_excess_slice(dim: usize, coords: &[f64], z: f64) -> Result<f64> {
    if !z.is_finite() || z <= 0.0 {
        return Err(Error::domain(format!("central charge must be > 0, got {z}")));
    }
    require_points(dim, coords, 2, "farthest-particle excess")?;
    let checked = check_config(dim, coords, true)?;
    let f = farthest_index(&checked.norms);
    let pf = &coords[f * dim..(f + 1) * dim];
    let mut repulsion = 0.0;
    for (i, p) in coords.chunks_exact(dim).enumerate() {
        if i != f {
            repulsion += 1.0 / dist(p, pf);
        }
    }
    Ok(-z / checked.norms[f] + repulsion)
}

/// Energy contributed by the particle farthest from the center:
/// `-z/|x_f| + sum_{i != f} 1/|x_i - x_f|`.
///
/// Strictly positive whenever `N > 2z + 1`, because every other particle lies
/// within distance `2|x_f|` of the farthest one.
pub fn sigal_excess(config: &PointConfiguration, z: f64) -> Result<f64> {
    sigal_excess_slice(config.dim(), config.coords(), z)
}

/// Per-particle screened repulsion margins
/// `f_j = sum_{i != j} 1/|x_i - x_j| - n(1 - epsilon)/|x_j|`.
pub(crate) fn lsst_values_slice(dim: usize, coords: &[f64], epsilon: f64) -> Result<Vec<f64>> {
    if !epsilon.is_finite() || epsilon <= 0.0 || epsilon >= 1.0 {
        return Err(Error::domain(format!(
            "epsilon must lie strictly inside (0, 1), got {epsilon}"
        )));
    }
    let n = require_points(dim, coords, 2, "screened repulsion margin")?;
    let checked = check_config(dim, coords, true)?;
    let repulsion = total_repulsion(dim, coords);
    let c = n as f64 * (1.0 - epsilon);
    Ok((0..n)
        .map(|j| repulsion[j] - c / checked.norms[j])
        .collect())
}

/// Largest screened repulsion margin over particles. Its sign is invariant
/// under rescaling the configuration.
pub fn lsst_value(config: &PointConfiguration, epsilon: f64) -> Result<f64> {
    let values = lsst_values_slice(config.dim(), config.coords(), epsilon)?;
    Ok(max_first(&values))
}

/// Per-particle values `f_j = |x_j| * sum_{i != j} 1/|x_i - x_j|`.
pub(crate) fn q_values_slice(dim: usize, coords: &[f64]) -> Result<Vec<f64>> {
    let n = require_points(dim, coords, 1, "minimax functional")?;
    let checked = check_config(dim, coords, true)?;
    if n == 1 {
        return Ok(vec![0.0]);
    }
    let repulsion = total_repulsion(dim, coords);
    Ok((0..n).map(|j| checked.norms[j] * repulsion[j]).collect())
}

/// Scale-invariant minimax functional
/// `Q(X) = max_j |x_j| * sum_{i != j} 1/|x_i - x_j|`.
///
/// The screened bound `max_j { sum_{i != j} 1/|x_i - x_j| - (N - C)/|x_j| } >= 0`
/// holds for every `N`-point configuration with a given constant `C` exactly
/// when `Q(X) >= N - C` for all `X`, so the infimum of `Q` over
/// configurations decides the smallest admissible constant; see
/// [`nu_constant`](crate::optimizer::nu_constant). A single point gives the
/// empty sum, hence zero.
pub fn q_minimax(config: &PointConfiguration) -> Result<f64> {
    let values = q_values_slice(config.dim(), config.coords())?;
    Ok(max_first(&values))
}

pub(crate) fn beta_ratio_slice(dim: usize, coords: &[f64]) -> Result<f64> {
    let n = require_points(dim, coords, 2, "second-moment ratio")?;
    let checked = check_config(dim, coords, false)?;
    let mut num = 0.0;
    for i in 0..n {
        let pi = &coords[i * dim..(i + 1) * dim];
        let ri2 = checked.norms[i] * checked.norms[i];
        for j in (i + 1)..n {
            let pj = &coords[j * dim..(j + 1) * dim];
            let rj2 = checked.norms[j] * checked.norms[j];
            num += (ri2 + rj2) / dist(pi, pj);
        }
    }
    let den = (n as f64 - 1.0) * checked.norms.iter().sum::<f64>();
    Ok(num / den)
}

/// Second-moment Coulomb ratio over a point configuration:
/// `sum_{i<j} (|x_i|^2 + |x_j|^2)/|x_i - x_j|` divided by
/// `(N - 1) sum_i |x_i|`. Positive and invariant under rescaling.
pub fn beta_ratio(config: &PointConfiguration) -> Result<f64> {
    beta_ratio_slice(config.dim(), config.coords())
}

/// Spherical average of `(|x|^2 + |y|^2) / (2 |x - y|)` over directions at
/// radii `r` and `s`: `(r^2 + s^2) / (2 max(r, s))` by the shell potential.
/// Finite on the diagonal, where it equals `r`.
pub fn radial_kernel(r: f64, s: f64) -> f64 {
    (r * r + s * s) / (2.0 * r.max(s))
}

/// Second-moment Coulomb ratio of a discrete radial probability measure,
/// diagonal atoms included:
/// `sum_{k,l} w_k w_l K(r_k, r_l) / sum_k w_k r_k` with
/// `K` = [`radial_kernel`].
pub fn measure_ratio(measure: &RadialMeasure) -> Result<f64> {
    let den = measure.first_moment();
    if den <= 0.0 {
        return Err(Error::degenerate(
            "measure has zero first moment; the ratio is undefined",
        ));
    }
    let radii = measure.radii();
    let weights = measure.weights();
    let mut num = 0.0;
    for (k, (&rk, &wk)) in radii.iter().zip(weights).enumerate() {
        num += wk * wk * radial_kernel(rk, rk);
        for l in (k + 1)..radii.len() {
            num += 2.0 * wk * weights[l] * radial_kernel(rk, radii[l]);
        }
    }
    Ok(num / den)
}

/// Triangle-inequality slack of the symmetrized Coulomb kernel:
/// `(|x| + |y|)/|x - y| - 1`, always non-negative.
pub fn triangle_kernel_check(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || !(1..=3).contains(&x.len()) {
        return Err(Error::domain(format!(
            "vectors must share a dimension in 1..=3, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    if x.iter().chain(y).any(|c| !c.is_finite()) {
        return Err(Error::domain("vectors must be finite".to_string()));
    }
    let d = dist(x, y);
    if d == 0.0 {
        return Err(Error::domain("vectors must be distinct".to_string()));
    }
    Ok((norm(x) + norm(y)) / d - 1.0)
}

fn pair_extrema(ri: f64, rj: f64) -> (f64, f64) {
    if ri <= rj {
        (ri, rj)
    } else {
        (rj, ri)
    }
}

fn offdiag_gap(
    dim: usize,
    coords: &[f64],
    bracket: impl Fn(f64, f64, f64) -> f64,
) -> Result<f64> {
    let n = require_points(dim, coords, 2, "kernel gap")?;
    let checked = check_config(dim, coords, false)?;
    let w = 1.0 / n as f64;
    let mut gap = 0.0;
    for i in 0..n {
        let pi = &coords[i * dim..(i + 1) * dim];
        for j in (i + 1)..n {
            let pj = &coords[j * dim..(j + 1) * dim];
            let d = dist(pi, pj);
            gap += 2.0 * w * w * bracket(checked.norms[i], checked.norms[j], d);
        }
    }
    Ok(gap)
}

/// Off-diagonal discrete gap of the first kernel decomposition, with uniform
/// weights `1/N` over ordered pairs:
/// bracket `(r_i^2 + r_j^2)/d - d - (2/3) min^2/max`.
///
/// The underlying measure inequality follows from positivity of the Coulomb
/// kernel; the discrete off-diagonal version can be negative for small `N`
/// (the diagonal would diverge for point masses, so it is left out), and the
/// integral statement is validated separately by Monte-Carlo clouds.
pub fn proof_inequality_a(config: &PointConfiguration) -> Result<f64> {
    offdiag_gap(config.dim(), config.coords(), |ri, rj, d| {
        let (mn, mx) = pair_extrema(ri, rj);
        (ri * ri + rj * rj) / d - d - (2.0 / 3.0) * mn * mn / mx
    })
}

/// Off-diagonal discrete gap of the second kernel decomposition:
/// bracket `(r_i^2 + r_j^2)/d - max - min^2/d`. Same conventions as
/// [`proof_inequality_a`].
pub fn proof_inequality_b(config: &PointConfiguration) -> Result<f64> {
    offdiag_gap(config.dim(), config.coords(), |ri, rj, d| {
        let (mn, mx) = pair_extrema(ri, rj);
        (ri * ri + rj * rj) / d - mx - mn * mn / d
    })
}

/// Mean of `|x - y|` over independent directions at radii `r` and `s`:
/// `max + min^2 / (3 max)`.
pub fn mean_shell_distance(r: f64, s: f64) -> f64 {
    let (mn, mx) = pair_extrema(r, s);
    mx + mn * mn / (3.0 * mx)
}

fn require_positive_radii(r: f64, s: f64) -> Result<()> {
    if !r.is_finite() || !s.is_finite() || r <= 0.0 || s <= 0.0 {
        return Err(Error::domain(format!("radii must be > 0, got {r} and {s}")));
    }
    Ok(())
}

/// Residue of the angular average of the first kernel decomposition, which is
/// an exact identity in the radii:
/// `(r^2 + s^2)/max - [mean shell distance + (2/3) min^2/max]`.
/// Zero up to rounding for all positive `r`, `s`.
pub fn radial_identity_a(r: f64, s: f64) -> Result<f64> {
    require_positive_radii(r, s)?;
    let (mn, mx) = pair_extrema(r, s);
    let lhs = (r * r + s * s) / mx;
    let rhs = mean_shell_distance(r, s) + (2.0 / 3.0) * mn * mn / mx;
    Ok(lhs - rhs)
}

/// Residue of the angular average of the second kernel decomposition, also an
/// exact identity: `(r^2 + s^2)/max - [max + min^2/max]`.
pub fn radial_identity_b(r: f64, s: f64) -> Result<f64> {
    require_positive_radii(r, s)?;
    let (mn, mx) = pair_extrema(r, s);
    let lhs = (r * r + s * s) / mx;
    let rhs = mx + mn * mn / mx;
    Ok(lhs - rhs)
}

/// Gap of the elementary power-mean inequality
/// `(r^k + s^k)/max(r, s) - (1 - 1/k)(r^{k-1} + s^{k-1})`, non-negative for
/// all `r, s > 0` and `k > 1`.
pub fn elementary_inequality_gap(r: f64, s: f64, k: f64) -> Result<f64> {
    require_positive_radii(r, s)?;
    if !k.is_finite() || k <= 1.0 {
        return Err(Error::domain(format!("exponent must exceed 1, got {k}")));
    }
    let mx = r.max(s);
    let lhs = (r.powf(k) + s.powf(k)) / mx;
    let rhs = (1.0 - 1.0 / k) * (r.powf(k - 1.0) + s.powf(k - 1.0));
    Ok(lhs - rhs)
}

/// Upper bound `1.22 z + 3 z^{1/3}` on the number of bound particles,
/// monotone increasing in the central charge. Falls below the classic
/// `2z + 1` bound once `z >= 6`.
pub fn theorem_bound(z: f64) -> Result<f64> {
    if !z.is_finite() || z <= 0.0 {
        return Err(Error::domain(format!("central charge must be > 0, got {z}")));
    }
    Ok(1.22 * z + 3.0 * z.cbrt())
}

/// Maximum of a non-empty slice, first occurrence on ties.
fn max_first(values: &[f64]) -> f64 {
    let mut best = values[0];
    for &v in &values[1..] {
        if v > best {
            best = v;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::PointConfiguration;
    use approx::assert_relative_eq;

    fn antipodal_pair() -> PointConfiguration {
        PointConfiguration::new(3, vec![1.0, 0.0, 0.0, -1.0, 0.0, 0.0]).unwrap()
    }

    #[test]
    fn sigal_excess_direct_arithmetic() {
        let c = antipodal_pair();
        assert_relative_eq!(sigal_excess(&c, 0.4).unwrap(), 0.1, epsilon = 1e-15);
        assert_relative_eq!(sigal_excess(&c, 1.0).unwrap(), -0.5, epsilon = 1e-15);
    }

    #[test]
    fn sigal_excess_rejects_degenerate_inputs() {
        let origin = PointConfiguration::new(3, vec![0.0, 0.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            sigal_excess(&origin, 1.0),
            Err(Error::DegenerateInput(_))
        ));
        let coincident =
            PointConfiguration::new(3, vec![1.0, 0.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            sigal_excess(&coincident, 1.0),
            Err(Error::DegenerateInput(_))
        ));
        let single = PointConfiguration::new(3, vec![1.0, 0.0, 0.0]).unwrap();
        assert!(sigal_excess(&single, 1.0).is_err());
        assert!(matches!(
            sigal_excess(&antipodal_pair(), 0.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn lsst_value_direct_arithmetic() {
        let c = antipodal_pair();
        assert_relative_eq!(lsst_value(&c, 0.5).unwrap(), -0.5, epsilon = 1e-15);
        assert_relative_eq!(lsst_value(&c, 0.9).unwrap(), 0.3, epsilon = 1e-15);

        let collinear = PointConfiguration::new(3, vec![1.0, 0.0, 0.0, 2.0, 0.0, 0.0]).unwrap();
        assert_relative_eq!(lsst_value(&collinear, 0.5).unwrap(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn lsst_value_rejects_bad_epsilon() {
        let c = antipodal_pair();
        assert!(matches!(lsst_value(&c, 0.0), Err(Error::Domain(_))));
        assert!(matches!(lsst_value(&c, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn q_minimax_examples() {
        let single = PointConfiguration::new(2, vec![0.3, -0.4]).unwrap();
        assert_eq!(q_minimax(&single).unwrap(), 0.0);
        assert_relative_eq!(q_minimax(&antipodal_pair()).unwrap(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn beta_ratio_examples() {
        assert_relative_eq!(beta_ratio(&antipodal_pair()).unwrap(), 0.5, epsilon = 1e-15);
        let perp = PointConfiguration::new(3, vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0]).unwrap();
        assert_relative_eq!(
            beta_ratio(&perp).unwrap(),
            2.0 / 2.0_f64.sqrt() / 2.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn measure_ratio_examples() {
        let unit = RadialMeasure::new(vec![1.0], vec![1.0]).unwrap();
        assert_relative_eq!(measure_ratio(&unit).unwrap(), 1.0, epsilon = 1e-15);

        let two = RadialMeasure::new(vec![1.0, 2.0], vec![0.5, 0.5]).unwrap();
        let expected = (0.25 * 1.0 + 0.25 * 2.0 + 0.5 * 1.25) / 1.5;
        assert_relative_eq!(measure_ratio(&two).unwrap(), expected, epsilon = 1e-15);
    }

    #[test]
    fn triangle_kernel_examples() {
        assert_relative_eq!(
            triangle_kernel_check(&[1.0, 0.0, 0.0], &[-1.0, 0.0, 0.0]).unwrap(),
            0.0,
            epsilon = 1e-15
        );
        assert_relative_eq!(
            triangle_kernel_check(&[1.0, 0.0, 0.0], &[2.0, 0.0, 0.0]).unwrap(),
            2.0,
            epsilon = 1e-15
        );
        assert!(matches!(
            triangle_kernel_check(&[1.0], &[1.0]),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn offdiag_gaps_at_antipodal_pair() {
        let c = antipodal_pair();
        // Bracket A per ordered pair: 2/2 - 2 - 2/3 = -5/3; gap = 2 * (1/4) * (-5/3).
        assert_relative_eq!(
            proof_inequality_a(&c).unwrap(),
            -5.0 / 6.0,
            epsilon = 1e-15
        );
        // Bracket B per ordered pair: 2/2 - 1 - 1/2 = -1/2; gap = 2 * (1/4) * (-1/2).
        assert_relative_eq!(proof_inequality_b(&c).unwrap(), -0.25, epsilon = 1e-15);
    }

    #[test]
    fn radial_identities_vanish() {
        for &(r, s) in &[(1.0, 1.0), (0.5, 2.0), (3.0, 0.125), (1e-3, 1e3)] {
            assert_relative_eq!(radial_identity_a(r, s).unwrap(), 0.0, epsilon = 1e-12);
            assert_relative_eq!(radial_identity_b(r, s).unwrap(), 0.0, epsilon = 1e-12);
        }
        assert!(radial_identity_a(0.0, 1.0).is_err());
    }

    #[test]
    fn elementary_gap_examples() {
        assert_relative_eq!(
            elementary_inequality_gap(1.0, 1.0, 2.0).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        assert_relative_eq!(
            elementary_inequality_gap(2.0, 1.0, 2.0).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        assert!(matches!(
            elementary_inequality_gap(1.0, 1.0, 1.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn theorem_bound_values_and_crossover() {
        assert_relative_eq!(theorem_bound(1.0).unwrap(), 4.22, epsilon = 1e-12);
        assert_relative_eq!(theorem_bound(8.0).unwrap(), 15.76, epsilon = 1e-12);
        // Improves on 2z + 1 from z = 6 onward, not at z = 5.
        assert!(theorem_bound(6.0).unwrap() < 13.0);
        assert!(theorem_bound(5.0).unwrap() > 11.0);
        assert!(matches!(theorem_bound(0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn kind_evaluate_dispatch() {
        let c = antipodal_pair();
        assert_relative_eq!(
            FunctionalKind::QMinimax.evaluate(&c).unwrap(),
            0.5,
            epsilon = 1e-15
        );
        assert!(FunctionalKind::MeasureRatio.evaluate(&c).is_err());
        assert!(FunctionalKind::SigalExcess { z: -1.0 }.evaluate(&c).is_err());
    }
}
