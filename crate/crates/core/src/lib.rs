//! Random canonical correlation analysis: the limiting Wachter model, data
//! samplers, sample canonical correlations, the linearized resolvent and its
//! local law, and Tracy–Widom edge statistics.

pub mod edge;
pub mod error;
pub mod harness;
mod par;
pub mod quadrature;
pub mod resolvent;
pub mod rng;
pub mod sampler;
pub mod scc;
pub mod spectral_model;

pub use error::{Error, Result};
pub use sampler::{DataPair, Law};
pub use spectral_model::{SpectralDomain, SpectralModel, SpectralParameter};
