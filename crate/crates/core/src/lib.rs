//! Time-dependent restricted-active-space self-consistent-field propagation
//! for bosons in a one-dimensional harmonic trap.
//!
//! The wavefunction is a configuration expansion over time-dependent orbitals
//! whose configuration space is restricted by the number of particles allowed
//! in a second block of orbitals. One orbital gives the Gross-Pitaevskii limit
//! and an unrestricted space gives MCTDHB.
//!
//! Units: `hbar = m = omega_x = 1`.

pub mod dvr;
pub mod eom;
pub mod error;
pub mod fock;
pub mod observables;
pub mod oracle;
pub mod propagator;
pub mod secondq;
pub mod tensor;

pub use num_complex::Complex64 as C64;

pub use dvr::{build_grid, Grid, Interaction, InteractionKind, OrbitalSet, Trap};
pub use eom::{EomOptions, Model, RasEquations, TimeMode, WavefunctionState};
pub use error::{Error, Result};
pub use fock::{dim_fci, dim_ras, FockSpace, OccupationVector, RasSpec, Scheme};
pub use observables::ObservableRecord;
pub use propagator::{IntegratorSpec, Method, Protocol, ProtocolKind, RelaxOptions, RunFlags};
pub use secondq::{CoefficientVector, DensityMatrices, OperatorTables};
pub use tensor::Tensor4;
