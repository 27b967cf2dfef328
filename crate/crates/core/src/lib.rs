//! Hydrogenic radial squeezed states and their spectral time evolution.
//!
//! The pipeline is: fit the three squeezed-state parameters for a central
//! principal quantum number, project the state onto the `l = 1` hydrogen
//! bound states, propagate the expansion in time, and analyse the result
//! (uncertainty products, densities, packet counts, revivals).
//!
//! All quantities are in atomic units unless a name says otherwise.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod error;
pub mod evolution;
pub mod grid;
pub mod specfun;
pub mod spectral;
pub mod squeezed;

pub use error::{Error, Result};
pub use evolution::{BasisTable, UncertaintyRecord};
pub use grid::RadialGrid;
pub use spectral::{EigenExpansion, Window};
pub use squeezed::{fit_parameters, PotentialMode, QuantumNumbers, RadialSqueezedState};

/// One atomic unit of time in seconds.
pub const AU_TIME_SECONDS: f64 = 2.418884326e-17;
