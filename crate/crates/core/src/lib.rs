//! Dephasing-driven relaxation of a bipartite tight-binding chain.
//!
//! Two identical chains are prepared at different temperatures and chemical
//! potentials, then coupled mode by mode. Each momentum sector is a two-site
//! fermionic system whose coherences decay under energy-conserving
//! dephasing, which makes the halves exchange particles and heat.

pub mod analytic;
pub mod dynamics;
pub mod entropy;
pub mod error;
pub mod fluctuation;
pub mod lattice;
pub mod quadrature;
pub mod special;
pub mod transport;

pub use analytic::SommerfeldForm;
pub use entropy::{EquilibriumModePrep, ModeEntropyBreakdown};
pub use error::{Error, Result};
pub use fluctuation::{Affinities, Direction, FtConvention};
pub use lattice::{ModeSpec, ReservoirParams, Statistics, UnitSystem};
pub use quadrature::QuadratureSpec;
pub use special::SeriesResult;
pub use transport::{Horizon, OnsagerBlock};
