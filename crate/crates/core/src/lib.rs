//! Models of magnons, cavity photons and a superconducting qubit coupled in a
//! microwave cavity: spin-wave dispersion, magnetostatic response, the
//! cavity–magnon transmission, dispersive shifts and parameter fitting.

pub mod dispersive;
pub mod error;
pub mod fit;
pub mod hybrid;
pub mod io;
pub mod magnetostatics;
pub mod presets;
pub mod response;
pub mod spinwave;
pub mod synth;
pub mod units;

pub use error::{Error, Result};
