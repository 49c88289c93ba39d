//! Agent-based Ramsey–Cass–Koopmans economy in which households revise their
//! savings rate by copying the highest-consuming neighbour on a social graph,
//! together with the closed-form approximations, regime diagnostics and
//! network-scaling analysis that go with it.

pub mod analytics;
pub mod config;
pub mod econ;
pub mod engine;
pub mod ensemble;
pub mod error;
pub mod experiment;
pub mod network;
pub mod params;

pub use error::{Error, Result};
pub use params::Params;
