//! Exact quantum thermodynamics for small Heisenberg spin systems.
//!
//! Builds Gibbs states of spin-1/2 clusters and runs quasi-static Carnot,
//! Stirling and Otto cycles stroke by stroke, with operation-mode
//! classification and ergotropy of battery states.
//!
//! Units: k_B = 1, energies and temperatures in kelvin, entropy dimensionless.
//! Work and heat are signed from the point of view of the working substance:
//! positive work is done on it, positive heat is absorbed by it.

pub mod battery;
pub mod cycles;
pub mod error;
pub mod gibbs;
pub mod spectra;
pub mod strokes;

pub use battery::{ergotropy, ergotropy_bruteforce, gibbs_battery_state, ErgotropyReport, QuantumState};
pub use cycles::{
    classify_mode, figure_of_merit, run_carnot, run_carnot_model, run_otto, run_stirling, CycleKind,
    CycleReport, OperationMode,
};
pub use error::{Error, Result};
pub use gibbs::ThermalState;
pub use spectra::{build_eigensystem, build_spectrum, diagonalize_dense, Bond, Eigensystem, ModelSpec, Spectrum};
pub use strokes::{
    adiabatic_endpoint, adiabatic_stroke, isochoric_stroke, isothermal_stroke, StrokeKind, StrokeLedger,
};
