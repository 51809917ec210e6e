//! Thermodynamic-limit block excitation ansatz on top of a uniform MPS ground
//! state: transfer operators, regularized resolvents, effective norm and
//! Hamiltonian matrices, the null-space-aware eigensolve and dispersion scans.

pub mod effective;
pub mod oracle;
pub mod resolvent;
pub mod scan;
pub mod solve;
pub mod tensor;
pub mod window;

pub use effective::{effective_hamiltonian_matrix, effective_norm_matrix, BlockModel};
pub use resolvent::{regularized_resolvent, regularized_resolvent_apply};
pub use scan::{continuum_edges, converge, dispersion_scan, ConvergenceTable, ExcitationBand};
pub use solve::{excitation_energies, ExcitationLevels};
pub use tensor::{aklt_tensor, transfer_fixed_points, MpsTensor};

pub type Tensor = tensor::MpsTensor<f64>;
pub type Model = effective::BlockModel<f64>;
pub type Levels = solve::ExcitationLevels<f64>;
pub type Band = scan::ExcitationBand<f64>;
