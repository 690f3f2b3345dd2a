//! Simulation and analytics for user point processes in cellular networks.
//!
//! Base stations form a point process (Poisson or lattice) and each Voronoi
//! cell serves at most one active user. Two user models are provided:
//! type I places one user uniformly in every cell, type II picks one user per
//! cell from an independent population process and may leave cells vacant.
//! The crate estimates their pair correlation functions, distance
//! distributions and cell statistics by Monte Carlo on a torus, and collects
//! the closed-form approximations they are compared against.

// `!(x > 0.0)` style checks are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod csv;
pub mod error;
pub mod estimators;
pub mod exec;
pub mod geometry;
mod grid;
pub mod quadrature;
pub mod runner;
pub mod sampling;
pub mod tessellation;
pub mod users;

pub use error::{Error, Result};
pub use exec::Execution;
pub use geometry::{ConvexPolygon, Point, Window};
pub use sampling::{PointPattern, Seed};
pub use tessellation::{build_voronoi, Tessellation};
pub use users::{type1_users, type2_users, UserAssignment, UserModel};
