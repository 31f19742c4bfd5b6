//! Numerical laboratory for classical bounds on how much negative charge a
//! fixed positive center can bind.
//!
//! The crate has four layers:
//!
//! * [`geometry`] — particle configurations around a fixed center, discrete
//!   radial probability measures, the Newton shell potential, and the scale
//!   gauge shared by every functional;
//! * [`functionals`] — evaluators for the Coulomb configuration functionals
//!   and the inequalities they satisfy (farthest-particle excess, minimax
//!   screening values, ratio functionals, kernel identities);
//! * [`optimizer`] — seeded multi-start global minimization of the
//!   configuration functionals and projected-gradient descent for the
//!   simplex-constrained radial measure ratio;
//! * [`tf_atom`] — a self-consistent radial Thomas-Fermi solver together with
//!   the moment inequality that bounds its total bound charge, plus an
//!   independent shooting-method reference profile.
//!
//! Everything is dimensionless and deterministic: all randomness flows from
//! explicit 64-bit seeds through a fixed stream-splitting rule.

pub mod error;
pub mod functionals;
pub mod geometry;
pub mod optimizer;
pub mod rng;
pub mod tf_atom;

pub use error::{Error, Result};
