//! Experiment runner: mesh generation, ACA/BACA/dense pipelines, CSV tables
//! and block-structure drawings.

pub mod app;
pub mod compare;
pub mod config;
pub mod error;
pub mod render;
pub mod results;
pub mod run;

pub use config::{Geometry, Pipeline, RunConfig};
pub use error::{CliError, CliResult};
