//! Steady-state entanglement of two two-level atoms in a pumped cavity whose
//! output mirror loses photons faster at higher intracavity photon number.
//!
//! * [`model`]: dressed states and their reduced two-atom density matrices.
//! * [`kinetics`]: rate equations between dressed manifolds, their steady
//!   state (numerical and analytic) and time evolution.
//! * [`entanglement`]: the two-atom density matrix and Wootters concurrence.
//! * [`analysis`]: (Π, K) sweeps, maximum search and the η threshold.
//! * [`lindblad`]: full master-equation model used to validate the rate model.
//!
//! Algorithm families are selectable by name through [`registry::Registry`]:
//! [`solver::steady_state_solvers`], [`entanglement::concurrence_methods`] and
//! [`lindblad::mirror_models`].

pub mod analysis;
pub mod density;
pub mod entanglement;
pub mod error;
pub mod kinetics;
pub mod lindblad;
pub mod model;
pub mod ode;
pub mod params;
pub mod registry;
pub mod solver;

pub use density::TwoQubitDensity;
pub use error::{Error, Result};
pub use kinetics::{ManifoldPopulations, RateMatrix};
pub use params::SystemParams;
