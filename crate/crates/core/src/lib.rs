//! Classification toolkit for torus-leaf neighborhoods of suspension-type
//! holomorphic foliations, driven by the holonomy germ f.
//!
//! The crate models the glued two-chart surface over the elliptic curve
//! C = C*/(z ~ lambda z) with seam twist xi |-> f(xi), and decides the
//! neighborhood type of the leaf from the dynamics and arithmetic of f:
//!
//! - [`germ`]: truncated power-series calculus and the normal-form
//!   recursion extracting obstruction coefficients at resonant orders;
//! - [`dynamics`]: Green function of the filled Julia set, periodic
//!   cycles with multipliers, Koenigs linearization, backward orbits;
//! - [`diophantine`]: small divisors |tau^n - 1|, the polynomial-growth
//!   and liminf conditions on the multiplier, Cremer-type angles;
//! - [`surface`]: the two charts, seam transitions, the harmonic
//!   function Phi and the Green-based G, with gluing and harmonicity
//!   certificates;
//! - [`classify`]: the decision tree and the family parameter sweep.

pub mod classify;
pub mod config;
pub mod diophantine;
pub mod dynamics;
pub mod error;
pub mod germ;
pub mod num;
pub mod parse;
pub mod surface;

pub use config::{OutputFormat, RunConfig, Tolerances};
pub use error::{Error, Result};
