//! Objective evaluation for configuration search: exact values, log-sum-exp
//! smoothed surrogates with analytic gradients, the near-collision barrier,
//! and the gauge/domain projection applied after every step.

use crate::error::Result;
use crate::functionals::{self, FunctionalKind};
use crate::geometry::{dist, norm, MIN_SEPARATION};

use super::Domain;

/// Pair separation below which the soft barrier turns on (in the gauge where
/// the radius sum equals the point count).
pub(crate) const BARRIER_DISTANCE: f64 = 1e-4;
/// Barrier strength: adds `BARRIER_STRENGTH / d` per close pair.
pub(crate) const BARRIER_STRENGTH: f64 = 1e-6;
/// Coordinate floor applied on the half-line so iterates never reach the
/// center exactly.
const HALF_LINE_FLOOR: f64 = 1e-8;

pub(crate) struct Objective {
    pub kind: FunctionalKind,
    pub dim: usize,
    pub n: usize,
    pub domain: Domain,
}

impl Objective {
    /// Gauge and domain projection: clamps half-line coordinates to positive
    /// values, then rescales so the radius sum equals the point count.
    pub fn project(&self, coords: &mut [f64]) {
        if self.domain == Domain::HalfLine {
            for c in coords.iter_mut() {
                if *c < HALF_LINE_FLOOR {
                    *c = HALF_LINE_FLOOR;
                }
            }
        }
        let total: f64 = coords.chunks_exact(self.dim).map(norm).sum();
        if total > 0.0 && total.is_finite() {
            let lambda = self.n as f64 / total;
            for c in coords.iter_mut() {
                *c *= lambda;
            }
        }
    }

    fn feasible(&self, coords: &[f64]) -> Option<Feasible> {
        let norms: Vec<f64> = coords.chunks_exact(self.dim).map(norm).collect();
        let total: f64 = norms.iter().sum();
        if total <= 0.0 || !total.is_finite() {
            return None;
        }
        let min_sep = MIN_SEPARATION * total / self.n as f64;
        let origin_guard = !matches!(self.kind, FunctionalKind::BetaRatio);
        if origin_guard && norms.iter().any(|&r| r < min_sep) {
            return None;
        }
        let mut barrier = 0.0;
        for i in 0..self.n {
            let pi = &coords[i * self.dim..(i + 1) * self.dim];
            for j in (i + 1)..self.n {
                let d = dist(pi, &coords[j * self.dim..(j + 1) * self.dim]);
                if d < min_sep {
                    return None;
                }
                if d < BARRIER_DISTANCE {
                    barrier += BARRIER_STRENGTH / d;
                }
            }
        }
        Some(Feasible { norms, barrier })
    }

    /// Smoothed (or exact, for smooth kinds) objective with the barrier.
    /// `None` on guard rejection, so line searches back off.
    pub fn value(&self, coords: &[f64], tau: f64) -> Option<f64> {
        let feas = self.feasible(coords)?;
        let base = match self.kind {
            FunctionalKind::BetaRatio => self.beta_value(coords, &feas),
            FunctionalKind::SigalExcess { z } => self.sigal_value(coords, &feas, z),
            FunctionalKind::QMinimax | FunctionalKind::LsstValue { .. } => {
                log_sum_exp(&self.branch_values(coords, &feas), tau)
            }
            FunctionalKind::MeasureRatio => unreachable!("guarded by minimize_config"),
        };
        let v = base + feas.barrier;
        v.is_finite().then_some(v)
    }

    /// Smoothed objective and its analytic gradient, barrier included.
    pub fn value_grad(&self, coords: &[f64], tau: f64) -> Option<(f64, Vec<f64>)> {
        let feas = self.feasible(coords)?;
        let (base, mut grad) = match self.kind {
            FunctionalKind::BetaRatio => self.beta_value_grad(coords, &feas),
            FunctionalKind::SigalExcess { z } => self.sigal_value_grad(coords, &feas, z),
            FunctionalKind::QMinimax => self.q_lse_grad(coords, &feas, tau),
            FunctionalKind::LsstValue { epsilon } => {
                self.lsst_lse_grad(coords, &feas, epsilon, tau)
            }
            FunctionalKind::MeasureRatio => unreachable!("guarded by minimize_config"),
        };
        self.add_barrier_grad(coords, &mut grad);
        let v = base + feas.barrier;
        if !v.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return None;
        }
        Some((v, grad))
    }

    /// Exact objective (hard max for minimax kinds) plus barrier, with the
    /// active branch index for minimax kinds.
    pub fn exact_with_barrier(&self, coords: &[f64]) -> Option<(f64, usize)> {
        let feas = self.feasible(coords)?;
        let (base, branch) = match self.kind {
            FunctionalKind::BetaRatio => (self.beta_value(coords, &feas), 0),
            FunctionalKind::SigalExcess { z } => (self.sigal_value(coords, &feas, z), 0),
            FunctionalKind::QMinimax | FunctionalKind::LsstValue { .. } => {
                let values = self.branch_values(coords, &feas);
                let j = argmax_first(&values);
                (values[j], j)
            }
            FunctionalKind::MeasureRatio => unreachable!("guarded by minimize_config"),
        };
        let v = base + feas.barrier;
        v.is_finite().then_some((v, branch))
    }

    /// Final reported value: the exact functional, no barrier, full guards.
    pub fn exact(&self, coords: &[f64]) -> Result<f64> {
        match self.kind {
            FunctionalKind::SigalExcess { z } => {
                functionals::sigal_excess_slice(self.dim, coords, z)
            }
            FunctionalKind::LsstValue { epsilon } => {
                functionals::lsst_values_slice(self.dim, coords, epsilon)
                    .map(|v| v[argmax_first(&v)])
            }
            FunctionalKind::QMinimax => {
                functionals::q_values_slice(self.dim, coords).map(|v| v[argmax_first(&v)])
            }
            FunctionalKind::BetaRatio => functionals::beta_ratio_slice(self.dim, coords),
            FunctionalKind::MeasureRatio => unreachable!("guarded by minimize_config"),
        }
    }

    /// Gradient of one max branch with respect to a single point, barrier
    /// included; used by the exact-max coordinate polish.
    pub fn point_grad(&self, coords: &[f64], m: usize, branch: usize) -> Vec<f64> {
        let norms: Vec<f64> = coords.chunks_exact(self.dim).map(norm).collect();
        let mut g = match self.kind {
            FunctionalKind::QMinimax => self.q_branch_point_grad(coords, &norms, m, branch),
            FunctionalKind::LsstValue { epsilon } => {
                self.lsst_branch_point_grad(coords, &norms, m, branch, epsilon)
            }
            FunctionalKind::BetaRatio | FunctionalKind::SigalExcess { .. } => {
                // Smooth kinds polish through the full gradient path instead.
                vec![0.0; self.dim]
            }
            FunctionalKind::MeasureRatio => unreachable!("guarded by minimize_config"),
        };
        self.add_barrier_point_grad(coords, m, &mut g);
        g
    }

    fn point<'a>(&self, coords: &'a [f64], i: usize) -> &'a [f64] {
        &coords[i * self.dim..(i + 1) * self.dim]
    }

    /// Per-branch values `f_j` for minimax kinds.
    fn branch_values(&self, coords: &[f64], feas: &Feasible) -> Vec<f64> {
        let g = self.repulsion(coords);
        match self.kind {
            FunctionalKind::QMinimax => (0..self.n).map(|j| feas.norms[j] * g[j]).collect(),
            FunctionalKind::LsstValue { epsilon } => {
                let c = self.n as f64 * (1.0 - epsilon);
                (0..self.n).map(|j| g[j] - c / feas.norms[j]).collect()
            }
            _ => unreachable!(),
        }
    }

    fn repulsion(&self, coords: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.n];
        for i in 0..self.n {
            let pi = self.point(coords, i);
            for j in (i + 1)..self.n {
                let inv = 1.0 / dist(pi, self.point(coords, j));
                g[i] += inv;
                g[j] += inv;
            }
        }
        g
    }

    fn beta_value(&self, coords: &[f64], feas: &Feasible) -> f64 {
        let mut num = 0.0;
        for i in 0..self.n {
            let pi = self.point(coords, i);
            let ri2 = feas.norms[i] * feas.norms[i];
            for j in (i + 1)..self.n {
                let rj2 = feas.norms[j] * feas.norms[j];
                num += (ri2 + rj2) / dist(pi, self.point(coords, j));
            }
        }
        let s: f64 = feas.norms.iter().sum();
        num / ((self.n as f64 - 1.0) * s)
    }

    fn beta_value_grad(&self, coords: &[f64], feas: &Feasible) -> (f64, Vec<f64>) {
        let n = self.n;
        let dim = self.dim;
        let s: f64 = feas.norms.iter().sum();
        let mut num = 0.0;
        let mut grad_num = vec![0.0; coords.len()];
        for i in 0..n {
            let ri2 = feas.norms[i] * feas.norms[i];
            for j in (i + 1)..n {
                let rj2 = feas.norms[j] * feas.norms[j];
                let d = dist(self.point(coords, i), self.point(coords, j));
                let inv = 1.0 / d;
                num += (ri2 + rj2) * inv;
                let coef = (ri2 + rj2) * inv * inv * inv;
                for k in 0..dim {
                    let xi = coords[i * dim + k];
                    let xj = coords[j * dim + k];
                    let diff = xi - xj;
                    grad_num[i * dim + k] += 2.0 * xi * inv - coef * diff;
                    grad_num[j * dim + k] += 2.0 * xj * inv + coef * diff;
                }
            }
        }
        let den = (n as f64 - 1.0) * s;
        let value = num / den;
        let mut grad = vec![0.0; coords.len()];
        for i in 0..n {
            let ri = feas.norms[i];
            for k in 0..dim {
                let mut g = grad_num[i * dim + k] / den;
                if ri > 0.0 {
                    g -= value * coords[i * dim + k] / (ri * s);
                }
                grad[i * dim + k] = g;
            }
        }
        (value, grad)
    }

    fn sigal_value(&self, coords: &[f64], feas: &Feasible, z: f64) -> f64 {
        let f = argmax_first(&feas.norms);
        let pf = self.point(coords, f);
        let mut repulsion = 0.0;
        for i in 0..self.n {
            if i != f {
                repulsion += 1.0 / dist(self.point(coords, i), pf);
            }
        }
        -z / feas.norms[f] + repulsion
    }

    fn sigal_value_grad(&self, coords: &[f64], feas: &Feasible, z: f64) -> (f64, Vec<f64>) {
        let dim = self.dim;
        let f = argmax_first(&feas.norms);
        let rf = feas.norms[f];
        let pf = self.point(coords, f).to_vec();
        let mut grad = vec![0.0; coords.len()];
        let mut repulsion = 0.0;
        for i in 0..self.n {
            if i == f {
                continue;
            }
            let pi = self.point(coords, i);
            let d = dist(pi, &pf);
            repulsion += 1.0 / d;
            let inv3 = 1.0 / (d * d * d);
            for k in 0..dim {
                let u = (pf[k] - pi[k]) * inv3;
                grad[f * dim + k] -= u;
                grad[i * dim + k] += u;
            }
        }
        let rf3 = rf * rf * rf;
        for k in 0..dim {
            grad[f * dim + k] += z * pf[k] / rf3;
        }
        (-z / rf + repulsion, grad)
    }

    fn q_lse_grad(&self, coords: &[f64], feas: &Feasible, tau: f64) -> (f64, Vec<f64>) {
        let dim = self.dim;
        let g = self.repulsion(coords);
        let values: Vec<f64> = (0..self.n).map(|j| feas.norms[j] * g[j]).collect();
        let (lse, p) = softmax(&values, tau);
        let mut grad = vec![0.0; coords.len()];
        for m in 0..self.n {
            let rm = feas.norms[m];
            let pm = self.point(coords, m);
            // Radial part of the active weight on branch m.
            if rm > 0.0 {
                let coef = p[m] * g[m] / rm;
                for k in 0..dim {
                    grad[m * dim + k] += coef * pm[k];
                }
            }
            for j in (m + 1)..self.n {
                let pj = self.point(coords, j);
                let d = dist(pm, pj);
                let inv3 = 1.0 / (d * d * d);
                let coef = (p[m] * rm + p[j] * feas.norms[j]) * inv3;
                for k in 0..dim {
                    let u = (pm[k] - pj[k]) * coef;
                    grad[m * dim + k] -= u;
                    grad[j * dim + k] += u;
                }
            }
        }
        (lse, grad)
    }

    fn lsst_lse_grad(
        &self,
        coords: &[f64],
        feas: &Feasible,
        epsilon: f64,
        tau: f64,
    ) -> (f64, Vec<f64>) {
        let dim = self.dim;
        let c = self.n as f64 * (1.0 - epsilon);
        let g = self.repulsion(coords);
        let values: Vec<f64> = (0..self.n).map(|j| g[j] - c / feas.norms[j]).collect();
        let (lse, p) = softmax(&values, tau);
        let mut grad = vec![0.0; coords.len()];
        for m in 0..self.n {
            let rm = feas.norms[m];
            let pm = self.point(coords, m);
            let coef = p[m] * c / (rm * rm * rm);
            for k in 0..dim {
                grad[m * dim + k] += coef * pm[k];
            }
            for j in (m + 1)..self.n {
                let pj = self.point(coords, j);
                let d = dist(pm, pj);
                let inv3 = 1.0 / (d * d * d);
                let w = (p[m] + p[j]) * inv3;
                for k in 0..dim {
                    let u = (pm[k] - pj[k]) * w;
                    grad[m * dim + k] -= u;
                    grad[j * dim + k] += u;
                }
            }
        }
        (lse, grad)
    }

    fn q_branch_point_grad(
        &self,
        coords: &[f64],
        norms: &[f64],
        m: usize,
        j: usize,
    ) -> Vec<f64> {
        let dim = self.dim;
        let mut g = vec![0.0; dim];
        let pm = self.point(coords, m);
        if m == j {
            let rm = norms[m];
            let mut rep = 0.0;
            for i in 0..self.n {
                if i == m {
                    continue;
                }
                let pi = self.point(coords, i);
                let d = dist(pm, pi);
                rep += 1.0 / d;
                let inv3 = rm / (d * d * d);
                for k in 0..dim {
                    g[k] -= (pm[k] - pi[k]) * inv3;
                }
            }
            if rm > 0.0 {
                for k in 0..dim {
                    g[k] += pm[k] / rm * rep;
                }
            }
        } else {
            let pj = self.point(coords, j);
            let d = dist(pm, pj);
            let inv3 = norms[j] / (d * d * d);
            for k in 0..dim {
                g[k] = -(pm[k] - pj[k]) * inv3;
            }
        }
        g
    }

    fn lsst_branch_point_grad(
        &self,
        coords: &[f64],
        norms: &[f64],
        m: usize,
        j: usize,
        epsilon: f64,
    ) -> Vec<f64> {
        let dim = self.dim;
        let c = self.n as f64 * (1.0 - epsilon);
        let mut g = vec![0.0; dim];
        let pm = self.point(coords, m);
        if m == j {
            for i in 0..self.n {
                if i == m {
                    continue;
                }
                let pi = self.point(coords, i);
                let d = dist(pm, pi);
                let inv3 = 1.0 / (d * d * d);
                for k in 0..dim {
                    g[k] -= (pm[k] - pi[k]) * inv3;
                }
            }
            let rm = norms[m];
            let coef = c / (rm * rm * rm);
            for k in 0..dim {
                g[k] += coef * pm[k];
            }
        } else {
            let pj = self.point(coords, j);
            let d = dist(pm, pj);
            let inv3 = 1.0 / (d * d * d);
            for k in 0..dim {
                g[k] = -(pm[k] - pj[k]) * inv3;
            }
        }
        g
    }

    fn add_barrier_grad(&self, coords: &[f64], grad: &mut [f64]) {
        let dim = self.dim;
        for i in 0..self.n {
            let pi = self.point(coords, i);
            for j in (i + 1)..self.n {
                let pj = self.point(coords, j);
                let d = dist(pi, pj);
                if d < BARRIER_DISTANCE {
                    let coef = BARRIER_STRENGTH / (d * d * d);
                    for k in 0..dim {
                        let u = (pi[k] - pj[k]) * coef;
                        grad[i * dim + k] -= u;
                        grad[j * dim + k] += u;
                    }
                }
            }
        }
    }

    fn add_barrier_point_grad(&self, coords: &[f64], m: usize, g: &mut [f64]) {
        let dim = self.dim;
        let pm = self.point(coords, m);
        for i in 0..self.n {
            if i == m {
                continue;
            }
            let pi = self.point(coords, i);
            let d = dist(pm, pi);
            if d < BARRIER_DISTANCE {
                let coef = BARRIER_STRENGTH / (d * d * d);
                for k in 0..dim {
                    g[k] -= (pm[k] - pi[k]) * coef;
                }
            }
        }
    }
}

struct Feasible {
    norms: Vec<f64>,
    barrier: f64,
}

pub(crate) fn argmax_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Numerically stable `tau * log(sum exp(v/tau))`.
fn log_sum_exp(values: &[f64], tau: f64) -> f64 {
    let m = values[argmax_first(values)];
    let sum: f64 = values.iter().map(|v| ((v - m) / tau).exp()).sum();
    m + tau * sum.ln()
}

/// Log-sum-exp value together with its softmax weights.
fn softmax(values: &[f64], tau: f64) -> (f64, Vec<f64>) {
    let m = values[argmax_first(values)];
    let mut weights: Vec<f64> = values.iter().map(|v| ((v - m) / tau).exp()).collect();
    let sum: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= sum;
    }
    (m + tau * sum.ln(), weights)
}
