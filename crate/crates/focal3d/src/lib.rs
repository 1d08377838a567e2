//! Exact-arithmetic engine for the cyclicity of centers on center manifolds
//! of three-dimensional polynomial systems with a Hopf singular point.
//!
//! The pipeline: parse a system (or pick a catalog entry), compute focal
//! coefficients as truncated jets in the perturbation parameters, then
//! certify lower bounds on cyclicity either through the rank of the linear
//! parts (plus a trace perturbation) or through the higher-order criterion:
//! reduce the next coefficients to quadratic forms, find a transversal line
//! on which they vanish, and verify everything in exact ℚ(α) arithmetic.
//! A floating-point Poincaré-return oracle cross-checks signs.

pub mod rational;

pub mod catalog;
pub mod cyclicity;
pub mod focal;
pub mod manifold;
pub mod system;

pub mod jet;
pub mod linalg;
pub mod mpoly;
pub mod numfield;
pub mod oracle;
pub mod poly3;
pub mod univar;

pub use jet::{JetMono, JetPoly, ParamIndex};
pub use linalg::QMatrix;
pub use poly3::{Mono3, Poly3};
pub use rational::Rational;
