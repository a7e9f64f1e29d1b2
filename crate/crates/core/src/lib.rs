//! Effective matter Hamiltonians for cavity QED.
//!
//! The crate builds the Dicke testbed in fixed total-spin sectors, computes
//! free energies and observables by exact diagonalization, evaluates the
//! thermodynamic-limit solution, and provides the general ingredients of the
//! effective theory: Bogoliubov diagonalization of quadratic photon forms,
//! the effective Hamiltonian for arbitrary coupling operators, and the
//! imaginary-time kernel.

pub mod applications;
pub mod bogoliubov;
pub mod ed;
pub mod effective;
pub mod error;
pub mod fock;
pub mod models;
pub mod operator;
pub mod selftest;
pub mod spin;
pub mod sweep;
pub mod thermo;

pub use applications::{Mode, ModeSet, SpinCouplingMatrix};
pub use bogoliubov::{BogoTransform, QuadraticBosonForm, SingleModeBogo};
pub use ed::{dicke_thermo, EdOptions};
pub use effective::{CouplingChannel, MatsubaraKernel, MatsubaraKernelSpec};
pub use error::{Error, Result};
pub use models::{DickeParams, ModelKind};
pub use operator::{CMatrix, HermitianOperator, C64};
pub use spin::{HalfInt, SpinOperators, SpinSector};
pub use sweep::{SweepResult, SweepRow, SweepSpec};
pub use thermo::{Branch, MeanFieldSolution, ThermoResult};
