//! Amplify-and-forward Gaussian relay networks: path gains, achievable rates,
//! amplification optimization and cut-set bounds.

pub mod bounds;
pub mod error;
pub mod format;
pub mod network;
pub mod optimize;
pub mod paths;
pub mod presets;
pub mod quadrature;
pub mod scenario;
pub mod spectral;

pub use error::{Error, Result};
pub use network::{NodeId, PowerBudget, RelayNetwork, Topology, TopologyGains};
pub use paths::AmplificationVector;
