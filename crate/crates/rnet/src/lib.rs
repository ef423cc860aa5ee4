//! Potential theory on infinite networks of resistors.
//!
//! A resistance network is a connected graph with positive symmetric edge
//! conductances. This crate computes the objects that make the theory of
//! such networks concrete when the vertex set is infinite:
//!
//! * truncations of the network to finite balls, in a free flavor (complement
//!   deleted) and a wired flavor (complement shorted to a single vertex), and
//!   limits of quantities along such exhaustions ([`exhaust`]);
//! * the energy kernel `v_x` reproducing potentials against the Dirichlet
//!   energy form, its wired part `f_x`, and the harmonic remainder
//!   `h_x = v_x - f_x` ([`solve`]);
//! * monopoles of finite energy and the transient/recurrent dichotomy they
//!   decide ([`solve`]);
//! * free and wired effective resistance, finite-network reduction by
//!   series, parallel, and wye-delta moves ([`resist`]);
//! * boundary-term bookkeeping: the discrete Gauss-Green split, charge
//!   balance, and the representation of harmonic functions by boundary
//!   sums ([`potential_theory`]);
//! * the Gaussian field indexed by finite-energy potentials, sampled by
//!   seeded Monte Carlo, and random-walk hitting probabilities
//!   ([`stochastic`]);
//! * boundary points at infinity: paths to infinity, their separation by
//!   harmonic functions, and limiting boundary functionals ([`boundary`]).
//!
//! Everything is exact-arithmetic-honest: limits carry their traces and a
//! convergence flag instead of a bare number, and identities that hold
//! exactly on finite networks are checked to near machine precision.

pub mod boundary;
pub mod cli;
pub mod error;
pub mod exhaust;
pub mod linalg;
pub mod models;
pub mod network;
pub mod potential_theory;
pub mod resist;
pub mod solve;
pub mod stochastic;

pub use error::{Error, Result};
pub use network::{Network, Potential, Vertex};
