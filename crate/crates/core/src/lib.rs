pub mod config;
pub mod diagnostics;
pub mod error;
pub mod integrators;
pub mod lie;
pub mod models;
pub mod retraction;
pub mod run;
pub mod sampling;
pub mod selftest;
pub mod solver;

pub use error::{Error, Result};
