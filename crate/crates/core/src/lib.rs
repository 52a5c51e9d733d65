//! Affine hypercubes inside dense subsets of the grid `[N]^n`.
//!
//! The crate computes the maximal cube dimension `M(S)` of a finite point set
//! exactly, evaluates the inductive and closed-form lower bounds on
//! `f_N(n, c)`, builds cube-free sets by Moser–Tardos resampling, and computes
//! the parameters of toric evaluation codes over prime fields.
//!
//! Everything here is `no_std` (with `alloc`); file formats, parallel drivers
//! and the command line live in the companion `hcube` crate.

#![no_std]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod bounds;
pub mod cube;
pub mod grid;
pub mod lll;
pub mod rational;
pub mod toric;

pub use cube::{AffineCube, CubeNotion};
pub use grid::{GridParams, Point, PointSet};
pub use rational::Rational;
