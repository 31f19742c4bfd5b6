//! Geometric core: particle configurations about a fixed attracting center,
//! discrete radial probability measures, the Newton shell potential, and the
//! scale normalization shared by the configuration functionals.
//!
//! Coordinates are dimensionless. Every functional downstream is either
//! homogeneous of degree zero under `x -> lambda x` or has a sign that
//! survives rescaling, so no unit system is attached.

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Relative pairwise-separation floor. Functionals that divide by
/// inter-particle distances reject configurations whose minimum separation
/// falls below this fraction of the mean particle radius, so optimizers can
/// probe near-collision regions and still get a clean error instead of an
/// infinity.
pub const MIN_SEPARATION: f64 = 1e-9;

/// Euclidean norm of a coordinate slice.
pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// Euclidean distance between two points given as slices of equal length.
pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// `N` particle positions in `R^dim` (dim 1..=3) with the attracting center
/// implicitly fixed at the origin. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct PointConfiguration {
    dim: usize,
    coords: Vec<f64>,
}

impl PointConfiguration {
    /// Builds a configuration from flat coordinates (`dim` entries per point).
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::configuration(format!(
                "dimension must be 1, 2 or 3, got {dim}"
            )));
        }
        if coords.is_empty() || coords.len() % dim != 0 {
            return Err(Error::configuration(format!(
                "coordinate buffer of length {} is not a positive multiple of dim {dim}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::configuration(
                "all coordinates must be finite".to_string(),
            ));
        }
        Ok(Self { dim, coords })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_points(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    /// Distances of the points from the center.
    pub fn norms(&self) -> Vec<f64> {
        self.points().map(norm).collect()
    }

    /// Sum of the distances from the center.
    pub fn radius_sum(&self) -> f64 {
        self.points().map(norm).sum()
    }

    /// Plain-text form: first line `dim N`, then `N` lines of `dim`
    /// whitespace-separated decimals. Values round-trip exactly.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.dim, self.n_points());
        for p in self.points() {
            for (k, c) in p.iter().enumerate() {
                if k > 0 {
                    out.push(' ');
                }
                let _ = write!(out, "{c}");
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut tokens = text.split_whitespace();
        let dim: usize = next_token(&mut tokens, "dim")?;
        let n: usize = next_token(&mut tokens, "point count")?;
        if n == 0 {
            return Err(Error::Parse("point count must be positive".to_string()));
        }
        let total = dim
            .checked_mul(n)
            .ok_or_else(|| Error::Parse("point count overflow".to_string()))?;
        let mut coords = Vec::with_capacity(total);
        for _ in 0..total {
            coords.push(next_token::<f64>(&mut tokens, "coordinate")?);
        }
        if tokens.next().is_some() {
            return Err(Error::Parse(
                "trailing tokens after configuration".to_string(),
            ));
        }
        Self::new(dim, coords)
    }
}

fn next_token<T: std::str::FromStr>(
    tokens: &mut std::str::SplitWhitespace<'_>,
    what: &str,
) -> Result<T> {
    let tok = tokens
        .next()
        .ok_or_else(|| Error::Parse(format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| Error::Parse(format!("invalid {what}: {tok:?}")))
}

/// Symmetric matrix of pairwise Euclidean distances.
#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }
}

/// Pairwise distance matrix of a configuration. Diagonal is zero; coincident
/// points yield zero off-diagonal entries, which callers must decide about.
pub fn pairwise_distances(config: &PointConfiguration) -> DistanceMatrix {
    let n = config.n_points();
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = dist(config.point(i), config.point(j));
            data[i * n + j] = d;
            data[j * n + i] = d;
        }
    }
    DistanceMatrix { n, data }
}

/// Rescales a configuration by the positive factor that makes the radius sum
/// equal to the number of points. All scale-invariant functionals are
/// unchanged by this gauge fix.
pub fn normalize_scale(config: &PointConfiguration) -> Result<PointConfiguration> {
    let total = config.radius_sum();
    if total <= 0.0 {
        return Err(Error::degenerate(
            "cannot normalize: every point sits at the origin",
        ));
    }
    let lambda = config.n_points() as f64 / total;
    let coords = config.coords.iter().map(|c| c * lambda).collect();
    PointConfiguration::new(config.dim, coords)
}

/// Discrete radial probability measure: positive atoms at strictly
/// increasing radii with non-negative weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialMeasure {
    radii: Vec<f64>,
    weights: Vec<f64>,
}

/// Tolerance on the total mass of a [`RadialMeasure`].
pub const MASS_TOLERANCE: f64 = 1e-12;

impl RadialMeasure {
    pub fn new(radii: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if radii.is_empty() || radii.len() != weights.len() {
            return Err(Error::configuration(format!(
                "need equally many radii and weights, got {} and {}",
                radii.len(),
                weights.len()
            )));
        }
        let mut prev = 0.0;
        for &r in &radii {
            if !r.is_finite() || r <= prev {
                return Err(Error::configuration(
                    "radii must be finite, positive and strictly increasing".to_string(),
                ));
            }
            prev = r;
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::configuration(
                "weights must be finite and non-negative".to_string(),
            ));
        }
        let mass: f64 = weights.iter().sum();
        if (mass - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::configuration(format!(
                "weights must sum to 1 within {MASS_TOLERANCE:e}, got {mass}"
            )));
        }
        Ok(Self { radii, weights })
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// First radial moment `sum_k w_k r_k`.
    pub fn first_moment(&self) -> f64 {
        self.radii
            .iter()
            .zip(&self.weights)
            .map(|(r, w)| r * w)
            .sum()
    }

    /// Plain-text form: first line `K`, then `K` lines `radius weight`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.len());
        for (r, w) in self.radii.iter().zip(&self.weights) {
            let _ = writeln!(out, "{r} {w}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut tokens = text.split_whitespace();
        let k: usize = next_token(&mut tokens, "atom count")?;
        let mut radii = Vec::with_capacity(k);
        let mut weights = Vec::with_capacity(k);
        for _ in 0..k {
            radii.push(next_token::<f64>(&mut tokens, "radius")?);
            weights.push(next_token::<f64>(&mut tokens, "weight")?);
        }
        if tokens.next().is_some() {
            return Err(Error::Parse("trailing tokens after measure".to_string()));
        }
        Self::new(radii, weights)
    }
}

/// Shell potential of a radial measure at radius `r`:
/// `sum_k w_k / max(r, r_k)`.
///
/// This is the exact Coulomb potential of the spherically averaged measure
/// (each atom is a uniform shell), non-increasing in `r` and tending to
/// `total mass / r` far away.
pub fn newton_potential(measure: &RadialMeasure, r: f64) -> Result<f64> {
    if !r.is_finite() || r <= 0.0 {
        return Err(Error::domain(format!(
            "newton potential needs r > 0, got {r}"
        )));
    }
    Ok(measure
        .radii
        .iter()
        .zip(&measure.weights)
        .map(|(&rk, &w)| w / r.max(rk))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn pairwise_distances_1d_pair() {
        let c = PointConfiguration::new(1, vec![0.0, 3.0]).unwrap();
        let m = pairwise_distances(&c);
        assert_eq!(m.get(0, 0), 0.0);
        assert_eq!(m.get(0, 1), 3.0);
        assert_eq!(m.get(1, 0), 3.0);
    }

    #[test]
    fn pairwise_distances_antipodal() {
        let c = PointConfiguration::new(3, vec![1.0, 0.0, 0.0, -1.0, 0.0, 0.0]).unwrap();
        let m = pairwise_distances(&c);
        assert_eq!(m.get(0, 1), 2.0);
    }

    #[test]
    fn pairwise_distances_single_point() {
        let c = PointConfiguration::new(2, vec![0.5, -0.25]).unwrap();
        let m = pairwise_distances(&c);
        assert_eq!(m.n(), 1);
        assert_eq!(m.get(0, 0), 0.0);
    }

    #[test]
    fn newton_potential_examples() {
        let unit = RadialMeasure::new(vec![1.0], vec![1.0]).unwrap();
        assert_relative_eq!(newton_potential(&unit, 2.0).unwrap(), 0.5);
        assert_relative_eq!(newton_potential(&unit, 0.5).unwrap(), 1.0);

        let two = RadialMeasure::new(vec![1.0, 2.0], vec![0.5, 0.5]).unwrap();
        assert_relative_eq!(
            newton_potential(&two, 1.5).unwrap(),
            0.5 / 1.5 + 0.5 / 2.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn newton_potential_rejects_nonpositive_radius() {
        let unit = RadialMeasure::new(vec![1.0], vec![1.0]).unwrap();
        assert!(matches!(
            newton_potential(&unit, 0.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            newton_potential(&unit, -1.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn normalize_scale_examples() {
        let single = PointConfiguration::new(3, vec![0.0, 0.0, 2.0]).unwrap();
        let scaled = normalize_scale(&single).unwrap();
        assert_relative_eq!(norm(scaled.point(0)), 1.0);

        let pair = PointConfiguration::new(1, vec![0.5, -0.5]).unwrap();
        let scaled = normalize_scale(&pair).unwrap();
        assert_relative_eq!(scaled.point(0)[0], 1.0);
        assert_relative_eq!(scaled.point(1)[0], -1.0);

        // Already normalized input comes back bit-identical.
        let normed = PointConfiguration::new(1, vec![1.0, -1.0]).unwrap();
        assert_eq!(normalize_scale(&normed).unwrap(), normed);
    }

    #[test]
    fn normalize_scale_rejects_origin_cluster() {
        let c = PointConfiguration::new(2, vec![0.0, 0.0]).unwrap();
        assert!(matches!(
            normalize_scale(&c),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn invalid_constructions_are_rejected() {
        assert!(PointConfiguration::new(4, vec![0.0; 4]).is_err());
        assert!(PointConfiguration::new(2, vec![0.0; 3]).is_err());
        assert!(PointConfiguration::new(1, vec![]).is_err());
        assert!(PointConfiguration::new(1, vec![f64::NAN]).is_err());

        assert!(RadialMeasure::new(vec![1.0, 1.0], vec![0.5, 0.5]).is_err());
        assert!(RadialMeasure::new(vec![-1.0], vec![1.0]).is_err());
        assert!(RadialMeasure::new(vec![1.0], vec![0.5]).is_err());
        assert!(RadialMeasure::new(vec![1.0, 2.0], vec![0.7, 0.5]).is_err());
    }

    #[test]
    fn text_round_trips() {
        let c = PointConfiguration::new(3, vec![0.1, -2.5, 3e-7, 1.0, 2.0, -0.125]).unwrap();
        let back = PointConfiguration::from_text(&c.to_text()).unwrap();
        assert_eq!(c, back);

        let m = RadialMeasure::new(vec![0.25, 1.5, 7.75], vec![0.5, 0.25, 0.25]).unwrap();
        let back = RadialMeasure::from_text(&m.to_text()).unwrap();
        assert_eq!(m, back);
    }
}
