//! Independent reference solver for the neutral screening profile.
//!
//! In the scaled variable `x = r / b` with `b = (4 pi)^{-2/3} gamma Z^{-1/3}`
//! the neutral (`mu = 0`) density equation is equivalent to the universal
//! boundary-value problem
//!
//! ```text
//! chi''(x) = chi(x)^{3/2} / sqrt(x),   chi(0) = 1,   chi(x) -> 0,
//! ```
//!
//! with the screened potential recovered as `Z chi(x) / r`. This module
//! integrates that problem by shooting on the initial slope with bisection
//! and fourth-order Runge-Kutta in `ln x`. It shares no code with the
//! self-consistent grid solver, so the two can be cross-checked.

use std::f64::consts::PI;

/// Dimensionless screening profile with the slope located by shooting.
#[derive(Debug, Clone)]
pub struct UniversalProfile {
    pub slope_at_origin: f64,
    xs: Vec<f64>,
    chi: Vec<f64>,
}

const X_START: f64 = 1e-9;
const STEP_LN: f64 = 5e-4;
const SLOPE_BRACKET: (f64, f64) = (-2.0, -1.0);

enum Shot {
    CrossedZero,
    TurnedUp,
    Reached,
}

fn series_start(slope: f64) -> (f64, f64) {
    let x = X_START;
    let chi = 1.0 + slope * x + (4.0 / 3.0) * x.powf(1.5) + 0.4 * slope * x.powf(2.5);
    let dchi = slope + 2.0 * x.sqrt() + slope * x.powf(1.5);
    (chi, dchi)
}

/// RK4 step of `(chi, chi')` in `s = ln x`.
fn rk4_step(x: f64, chi: f64, dchi: f64, ds: f64) -> (f64, f64) {
    let f = |x: f64, c: f64, d: f64| {
        let c_pos = c.max(0.0);
        (x * d, x.sqrt() * c_pos * c_pos.sqrt())
    };
    let (k1c, k1d) = f(x, chi, dchi);
    let xm = x * (0.5 * ds).exp();
    let (k2c, k2d) = f(xm, chi + 0.5 * ds * k1c, dchi + 0.5 * ds * k1d);
    let (k3c, k3d) = f(xm, chi + 0.5 * ds * k2c, dchi + 0.5 * ds * k2d);
    let xe = x * ds.exp();
    let (k4c, k4d) = f(xe, chi + ds * k3c, dchi + ds * k3d);
    (
        chi + ds / 6.0 * (k1c + 2.0 * k2c + 2.0 * k3c + k4c),
        dchi + ds / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d),
    )
}

fn integrate(slope: f64, x_max: f64, mut record: Option<&mut Vec<(f64, f64)>>) -> Shot {
    let (mut chi, mut dchi) = series_start(slope);
    let mut x = X_START;
    if let Some(rec) = record.as_deref_mut() {
        rec.push((x, chi));
    }
    while x < x_max {
        let (c, d) = rk4_step(x, chi, dchi, STEP_LN);
        chi = c;
        dchi = d;
        x *= STEP_LN.exp();
        if chi <= 0.0 {
            return Shot::CrossedZero;
        }
        if dchi >= 0.0 {
            return Shot::TurnedUp;
        }
        if let Some(rec) = record.as_deref_mut() {
            rec.push((x, chi));
        }
    }
    Shot::Reached
}

/// Shoots for the decaying solution out to `x_max`.
pub fn solve_universal(x_max: f64) -> UniversalProfile {
    let (mut lo, mut hi) = SLOPE_BRACKET;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        match integrate(mid, x_max, None) {
            Shot::CrossedZero => lo = mid,
            _ => hi = mid,
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    let slope = 0.5 * (lo + hi);
    let mut samples = Vec::new();
    integrate(slope, x_max, Some(&mut samples));
    let (xs, chi) = samples.into_iter().unzip();
    UniversalProfile {
        slope_at_origin: slope,
        xs,
        chi,
    }
}

impl UniversalProfile {
    /// Largest scaled radius the recorded profile reaches before the shot
    /// degrades.
    pub fn x_max(&self) -> f64 {
        *self.xs.last().expect("profile is never empty")
    }

    /// Profile value by log-log interpolation; below the first sample the
    /// profile is essentially 1, beyond the last it decays like `x^{-3}`.
    pub fn chi(&self, x: f64) -> f64 {
        assert!(x > 0.0 && x.is_finite(), "chi needs x > 0");
        if x <= self.xs[0] {
            return 1.0 + self.slope_at_origin * x;
        }
        let last = self.xs.len() - 1;
        if x >= self.xs[last] {
            return self.chi[last] * (self.xs[last] / x).powi(3);
        }
        let pos = self.xs.partition_point(|&xi| xi < x);
        let (x0, x1) = (self.xs[pos - 1], self.xs[pos]);
        let (c0, c1) = (self.chi[pos - 1], self.chi[pos]);
        let t = (x.ln() - x0.ln()) / (x1.ln() - x0.ln());
        (c0.ln() + t * (c1.ln() - c0.ln())).exp()
    }

    /// Length unit of the scaled problem for charges `z` and constant
    /// `gamma`.
    pub fn length_unit(gamma: f64, z: f64) -> f64 {
        (4.0 * PI).powf(-2.0 / 3.0) * gamma * z.powf(-1.0 / 3.0)
    }

    /// Neutral screened potential `Z chi(r/b) / r` at radius `r`.
    pub fn screened_potential(&self, z: f64, gamma: f64, r: f64) -> f64 {
        let b = Self::length_unit(gamma, z);
        z * self.chi(r / b) / r
    }
}
