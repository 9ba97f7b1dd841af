//! Boundary-integral solver for Robin traction problems of linear elasticity
//! in periodically perforated planar domains.
//!
//! The displacement is sought as a periodic single-layer potential plus a
//! constant and a linear drift, `u = v_q[mu] + c + B q^{-1} x`, where the
//! single layer uses the lattice-periodic fundamental solution of the Lamé
//! operator `Delta + omega grad div`.

pub mod error;
pub mod geometry;
pub mod io;
pub mod kernels;
pub mod linalg;
pub mod nonlinear;
pub mod operators;
pub mod quadrature;
pub mod robin;
pub mod special;
pub mod verification;

pub use error::{CurveError, Error, Result};
pub use geometry::{BoundaryCurve, PeriodicityCell, Point, ShapeSpec, TrigSeries};
pub use kernels::{LameEnv, LatticeSumPlan, PeriodicLame};
