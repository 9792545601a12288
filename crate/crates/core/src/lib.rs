//! Collisional gyrokinetic limit operators on a strongly magnetized plasma.

pub mod boltzmann;
pub mod config;
pub mod diagnostics;
pub mod drift;
pub mod error;
pub mod fokker_planck;
pub mod geometry;
pub mod grid;
pub mod gyroaverage;
pub mod kernels;
pub mod landau;
pub mod physics;
pub mod quadrature;
pub mod snapshot;
pub mod solver;
pub mod verify;

pub use error::{GyroError, Result};
