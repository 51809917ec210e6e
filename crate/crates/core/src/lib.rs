//! Exact-diagonalization laboratory for isolated excitations of gapped,
//! translation-invariant spin chains.
//!
//! Everything is generic over the real scalar ([`Real`], f32 or f64); the
//! aliases below fix f64.

pub mod error;
pub mod filter;
pub mod lattice;
pub mod linalg;
pub mod models;
pub mod ops;
pub mod oracles;
pub mod scalar;
pub mod sector;
pub mod spectral;

pub use error::{Error, Result};
pub use scalar::{Real, C};

pub type Complex64 = C<f64>;
pub type CMat64 = linalg::CMat<f64>;
pub type Hamiltonian = models::LocalHamiltonian<f64>;
pub type Operator = ops::RegionOperator<f64>;
pub type Spectrum = sector::Spectrum<f64>;
pub type EigenSector = sector::EigenSector<f64>;
pub type Schedule = filter::FilterSchedule<f64>;
pub type FilterLab = filter::FilterLab<f64>;
pub type FidelityReport = filter::FidelityReport<f64>;
pub type SpectralLine = spectral::SpectralLine<f64>;
