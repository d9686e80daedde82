//! Sweeps, figure presets, trajectory runs and file formats on top of
//! `qdcav-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod figures;
pub mod output;
pub mod sweep;
pub mod trajectories;

pub use config::RunConfig;
pub use error::{Error, Result};
pub use qdcav_core;
