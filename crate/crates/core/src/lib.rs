//! Dyadic constructions for weighted norm inequalities on piecewise-constant
//! grid data.
//!
//! Every function handled here is a [`grid::GridFunction`]: one value per
//! finest dyadic cell of a root cube, interpreted as the constant value of
//! the function on that cell. Integrals and averages over dyadic cubes are
//! therefore finite sums, and the inequalities built on top of them
//! (sparse domination, maximal function bounds, Poincaré-type estimates)
//! become checkable assertions rather than approximations.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, experiment
//! configuration and the command line live in the `sparse-poincare` crate.
//!
//! Module map:
//!
//! * [`grid`]: cubes, dyadic cubes, grid functions, cell masks and the
//!   compensated prefix-sum tables behind every integral.
//! * [`weights`]: weight models, the dyadic A∞ estimator, the two-weight
//!   compatibility constant and the doubling / Aikawa / reverse Hölder /
//!   half-Harnack / supersolution checks.
//! * [`maximal`]: fractional, weighted, sharp and non-centered maximal
//!   operators.
//! * [`sparse`]: the oscillation and level-set stopping-time families and
//!   the pointwise domination checks built on them.
//! * [`domain`]: rasterized domains, Whitney decompositions, chain
//!   decompositions with shadows and the Boman constant.

#![no_std]
#![allow(clippy::too_many_arguments)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod domain;
pub mod error;
pub mod grid;
pub mod maximal;
pub mod num;
pub mod report;
pub mod sparse;
pub mod weights;

pub use error::{Error, Result};
