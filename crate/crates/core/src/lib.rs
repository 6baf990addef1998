//! Growth of bipartite heterosexual contact networks with fitness-weighted
//! preferential attachment, relationship expiry and secondary link formation,
//! plus an SIR transmission process running on the evolving network.

pub mod baselines;
pub mod config;
pub mod epidemic;
pub mod error;
pub mod growth;
pub mod model;
pub mod output;
pub mod runner;
pub mod simulation;
pub mod topology;

pub use error::{Error, Result};
pub use model::{NetworkState, SimConfig};
pub use simulation::Simulation;
