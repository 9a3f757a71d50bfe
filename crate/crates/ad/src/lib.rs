//! Nested forward/reverse automatic differentiation.
//!
//! The library computes machine-precision derivatives of ordinary Rust
//! programs written against [`Scalar`], [`ADVector`], and [`ADMatrix`]:
//!
//! * **Forward mode** propagates tangents alongside the primal via dual
//!   numbers — one directional derivative per pass.
//! * **Reverse mode** records the evaluation on a [`Trace`] and sweeps
//!   adjoints backwards — a full gradient in one sweep.
//! * **Nesting**: every differentiation call runs under a fresh [`Tag`],
//!   so forward and reverse instantiations compose to any depth without
//!   perturbation confusion. This is what makes Hessian-vector products
//!   and hypergradients one-liners.
//!
//! The functional API lives in [`diff`] (plain `f64` entry points) and
//! [`diff::lifted`] (the same operations over lifted values, for use
//! inside other differentiations). Finite-difference counterparts with
//! identical shape contracts live in [`numdiff`].
//!
//! ```
//! use ad::diff::{diff, grad, hessianv};
//!
//! // f(x) = x^3 at x = 2
//! let d = diff(|x| x * x * x, 2.0);
//! assert!((d - 12.0).abs() < 1e-12);
//!
//! // f(x) = sum x_i^2
//! let g = grad(|x| x.iter().map(|v| v * v).sum(), &[1.0, 2.0, 3.0]);
//! assert_eq!(g, vec![2.0, 4.0, 6.0]);
//!
//! // H v without materializing H
//! let hv = hessianv(|x| x.iter().map(|v| v * v).sum(), &[1.0, 2.0], &[1.0, 0.0]);
//! assert_eq!(hv, vec![2.0, 0.0]);
//! ```

pub mod diff;
pub mod linalg;
pub mod numdiff;
pub mod scalar;
pub mod tag;
pub mod trace;

pub use linalg::{ADMatrix, ADVector};
pub use scalar::Scalar;
pub use tag::{fresh_tag, Tag};
pub use trace::{make_reverse_inputs, Adjoints, Trace};
